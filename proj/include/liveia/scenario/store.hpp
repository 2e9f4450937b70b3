#pragma once

// Directory-backed scenario persistence: one canonical document per scenario
// (`<dir>/<id>.liveia`) plus `index.tsv` listing id, parent id and name.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "liveia/core/error.hpp"
#include "liveia/scenario/document.hpp"
#include "liveia/scenario/scenario.hpp"

namespace liveia::scenario {

struct IndexEntry {
  std::string id;
  std::string parent_id;  // empty for a root scenario
  std::string name;
  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

inline bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

inline std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

/// Write `data` to `path` so that readers see either the old or the new file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(ErrorCode::io_error, "cannot open " + tmp.string());
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw Error(ErrorCode::io_error, "cannot flush " + tmp.string());
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot rename " + tmp.string() + ": " + ec.message());
  const int dfd = ::open(path.parent_path().c_str(), O_RDONLY | O_DIRECTORY);
  if (dfd >= 0) {
    ::fsync(dfd);
    ::close(dfd);
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Thread-safe store. Writes to one scenario are serialized; each write is on
/// disk before the call returns.
class ScenarioStore {
 public:
  explicit ScenarioStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.path().extension() != ".liveia") continue;
      const std::string stem = entry.path().stem().string();
      Scenario s;
      try {
        s = parse_scenario(read_file(entry.path()));
      } catch (const Error& e) {
        throw Error(ErrorCode::io_error, entry.path().string() + ": " + e.what());
      }
      if (s.id.empty()) s.id = stem;
      if (s.id != stem) throw Error(ErrorCode::io_error, entry.path().string() + ": id does not match file name");
      cache_.emplace(s.id, std::move(s));
    }
  }

  const std::filesystem::path& directory() const { return dir_; }

  std::vector<IndexEntry> list() const {
    std::shared_lock lock(mu_);
    std::vector<IndexEntry> out;
    for (const auto& [id, s] : cache_) out.push_back({id, s.lineage.parent_id.value_or(""), s.name});
    return out;
  }

  std::optional<Scenario> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto it = cache_.find(id);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
  }

  Scenario require(const std::string& id) const {
    auto s = get(id);
    if (!s) throw Error(ErrorCode::not_found, "no scenario " + id);
    return *s;
  }

  /// Persist a new scenario, assigning a fresh id when it has none.
  Scenario create(Scenario s) {
    if (s.id.empty()) {
      do s.id = random_id();
      while (get(s.id));
    }
    if (!valid_id(s.id)) throw ValidationError("id", "scenario id must be 1-64 of [A-Za-z0-9_-]");
    validate(s);
    std::lock_guard w(lock_for(s.id));
    if (get(s.id)) throw Error(ErrorCode::conflict, "scenario " + s.id + " already exists");
    persist(s);
    return s;
  }

  /// Replace a scenario with `fn(current)` under its write lock.
  Scenario update(const std::string& id, const std::function<Scenario(const Scenario&)>& fn) {
    std::lock_guard w(lock_for(id));
    const Scenario next = fn(require(id));
    if (next.id != id) throw ValidationError("id", "an update must keep the scenario id");
    persist(next);
    return next;
  }

  Scenario branch(const std::string& id, const std::string& new_name) {
    const Scenario parent = require(id);
    std::string child_id;
    do child_id = random_id();
    while (get(child_id));
    return create(scenario::branch(parent, new_name.empty() ? parent.name : new_name, child_id));
  }

  /// Delete a scenario. Scenarios with children are kept so lineage stays
  /// resolvable.
  void remove(const std::string& id) {
    std::lock_guard w(lock_for(id));
    require(id);
    {
      std::unique_lock lock(mu_);
      for (const auto& [other, s] : cache_) {
        if (s.lineage.parent_id == id) {
          throw Error(ErrorCode::conflict, "scenario " + id + " has branch " + other);
        }
      }
      cache_.erase(id);
    }
    std::filesystem::remove(dir_ / (id + ".liveia"));
    write_index();
  }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Scenario> cache_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
  std::mutex index_mu_;

  std::mutex& lock_for(const std::string& id) {
    std::lock_guard g(locks_mu_);
    auto& m = locks_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  void persist(const Scenario& s) {
    write_file_atomic(dir_ / (s.id + ".liveia"), serialize_scenario(s));
    {
      std::unique_lock lock(mu_);
      cache_[s.id] = s;
    }
    write_index();
  }

  static std::string tsv_field(std::string v) {
    std::replace_if(v.begin(), v.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return v;
  }

  void write_index() {
    std::lock_guard g(index_mu_);
    std::string text;
    for (const auto& e : list()) {
      text += tsv_field(e.id) + '\t' + tsv_field(e.parent_id) + '\t' + tsv_field(e.name) + '\n';
    }
    write_file_atomic(dir_ / "index.tsv", text);
  }
};

inline std::vector<IndexEntry> read_index(const std::filesystem::path& dir) {
  std::vector<IndexEntry> out;
  std::istringstream in(read_file(dir / "index.tsv"));
  std::string line;
  while (std::getline(in, line)) {
    IndexEntry e;
    const auto a = line.find('\t');
    const auto b = line.find('\t', a + 1);
    if (a == std::string::npos || b == std::string::npos) continue;
    e.id = line.substr(0, a);
    e.parent_id = line.substr(a + 1, b - a - 1);
    e.name = line.substr(b + 1);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace liveia::scenario
