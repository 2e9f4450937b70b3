#pragma once

#include <cstdio>
#include <cstdlib>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liveia/render/render.hpp"
#include "liveia/render/trace_document.hpp"
#include "liveia/scenario/document.hpp"
#include "liveia/scenario/store.hpp"
#include "liveia/service/http.hpp"

namespace liveia::cli {

enum ExitCode { kOk = 0, kInvalid = 1, kUsage = 2 };

/// Fixed 9-decimal real, as used in `analyze` output.
inline std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v == 0.0 ? 0.0 : v);
  return buf;
}

/// `analyze` report: one `key\tvalue` line per metric, psyches in
/// document order.
inline std::string analyze_report(const scenario::Scenario& s, int grid) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) { out += key + '\t' + value + '\n'; };
  for (const auto& p : s.psyches) {
    const auto m = render::psyche_metrics(p, grid);
    const std::string& n = m.psyche;
    if (m.enlightenment) {
      line("enlightenment." + n, fixed9(m.enlightenment->score));
      line("uniformity." + n, fixed9(m.enlightenment->uniformity));
      line("obstructed." + n, fixed9(m.enlightenment->obstructed_fraction));
    } else {
      line("enlightenment." + n, "undefined");
    }
    line("fractures." + n, std::to_string(m.fractures.size()));
    std::size_t voxels = 0;
    for (const auto& c : m.shadow_clusters) voxels += c.voxels.size();
    line("shadow_clusters." + n, std::to_string(m.shadow_clusters.size()));
    line("shadow_voxels." + n, std::to_string(voxels));
    line("shadow_volume." + n, fixed9(static_cast<double>(voxels) * m.voxel_size * m.voxel_size * m.voxel_size));
  }
  return out;
}

namespace detail {

struct Failure {
  int code;
  std::string message;
};

inline std::string read_input(const std::string& path) {
  try {
    return scenario::read_file(path);
  } catch (const Error& e) {
    throw Failure{kInvalid, path + ": " + e.what()};
  }
}

inline scenario::Scenario load(const std::string& path) {
  const std::string text = read_input(path);
  try {
    return scenario::parse_scenario(text);
  } catch (const ParseError& e) {
    // The message already leads with "line L, column C: ".
    const std::string what = e.what();
    const auto colon = what.find(": ");
    const std::string detail = colon == std::string::npos ? what : what.substr(colon + 2);
    throw Failure{kInvalid, path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                                e.invariant() + ": " + detail};
  }
}

inline void write_output(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
    out.flush();
    return;
  }
  try {
    scenario::write_file_atomic(path, data);
  } catch (const std::exception& e) {
    throw Failure{kInvalid, path + ": " + e.what()};
  }
}

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

inline std::atomic<service::HttpServer*> g_server{nullptr};

inline void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace detail

/// Run one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario tools for psyche-sphere optics", "liveia"};
  app.require_subcommand(1);

  std::string input, output, id, name, scenario_dir, listen;
  int width = 512, height = 512, grid = render::kDocumentShadowGrid;
  long idle_timeout = 0;
  bool check = false, in_place = false;

  auto* validate = app.add_subcommand("validate", "Parse a scenario and check its invariants");
  validate->add_option("file", input, "Scenario document")->required();

  auto* fmt = app.add_subcommand("fmt", "Print a scenario in canonical form");
  fmt->add_option("file", input, "Scenario document")->required();
  fmt->add_option("--out", output, "Output path (default stdout)");
  fmt->add_flag("-w,--write", in_place, "Rewrite the file in place");
  fmt->add_flag("--check", check, "Exit 1 if the file is not canonical");

  auto* trace = app.add_subcommand("trace", "Write the trace document");
  trace->add_option("file", input, "Scenario document")->required();
  trace->add_option("--out", output, "Output path (default stdout)");

  auto* render = app.add_subcommand("render", "Render a P6 image");
  render->add_option("file", input, "Scenario document")->required();
  render->add_option("--out", output, "Output path (default stdout)");
  render->add_option("--width", width, "Image width")->check(CLI::Range(render::kMinSize, render::kMaxSize));
  render->add_option("--height", height, "Image height")->check(CLI::Range(render::kMinSize, render::kMaxSize));

  auto* analyze = app.add_subcommand("analyze", "Print per-psyche metrics");
  analyze->add_option("file", input, "Scenario document")->required();
  analyze->add_option("--grid", grid, "Shadow scan resolution")->check(CLI::Range(1, 256));
  analyze->add_option("--out", output, "Output path (default stdout)");

  auto* branch = app.add_subcommand("branch", "Copy a scenario as a new branch");
  branch->add_option("source", input, "Scenario document, or an id with --scenario-dir")->required();
  branch->add_option("--name", name, "Branch name (default: the parent's)");
  branch->add_option("--id", id, "Branch id (default: random)");
  branch->add_option("--out", output, "Output path (default stdout)");
  branch->add_option("--scenario-dir", scenario_dir, "Branch inside this scenario store");

  auto* serve = app.add_subcommand("serve", "Run the session service");
  serve->add_option("--listen", listen, "host:port (env LIVEIA_LISTEN)");
  serve->add_option("--scenario-dir", scenario_dir, "Scenario store (env LIVEIA_SCENARIO_DIR)");
  serve->add_option("--idle-timeout", idle_timeout, "Session idle timeout in seconds (env LIVEIA_IDLE_TIMEOUT)")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "liveia: " << e.what() << "\n";
    const auto sub = app.get_subcommands();
    err << (sub.empty() ? app.help() : sub.front()->help());
    return kUsage;
  }

  try {
    if (validate->parsed()) {
      detail::load(input);
      return kOk;
    }
    if (fmt->parsed()) {
      const std::string original = detail::read_input(input);
      const std::string canonical = scenario::serialize_scenario(detail::load(input));
      if (check) {
        if (original == canonical) return kOk;
        err << input << ": not in canonical form\n";
        return kInvalid;
      }
      if (in_place) {
        if (original != canonical) detail::write_output(input, canonical, out);
      } else {
        detail::write_output(output, canonical, out);
      }
      return kOk;
    }
    if (trace->parsed()) {
      detail::write_output(output, render::write_trace_document(render::export_trace(detail::load(input))), out);
      return kOk;
    }
    if (render->parsed()) {
      detail::write_output(output, render::to_ppm(render::render_image(detail::load(input), width, height)), out);
      return kOk;
    }
    if (analyze->parsed()) {
      detail::write_output(output, analyze_report(detail::load(input), grid), out);
      return kOk;
    }
    if (branch->parsed()) {
      if (!scenario_dir.empty()) {
        if (!id.empty()) {
          err << "liveia: --id cannot be combined with --scenario-dir\n";
          return kUsage;
        }
        scenario::ScenarioStore store(scenario_dir);
        const auto child = store.branch(input, name);
        if (!output.empty()) detail::write_output(output, scenario::serialize_scenario(child), out);
        out << child.id << "\n";
        return kOk;
      }
      const auto parent = detail::load(input);
      if (!id.empty() && !scenario::valid_id(id)) {
        err << "liveia: --id must be 1-64 of [A-Za-z0-9_-]\n";
        return kUsage;
      }
      const auto child = scenario::branch(parent, name.empty() ? parent.name : name,
                                          id.empty() ? scenario::random_id() : id);
      detail::write_output(output, scenario::serialize_scenario(child), out);
      return kOk;
    }
    if (serve->parsed()) {
      if (listen.empty()) listen = detail::env_or("LIVEIA_LISTEN", "127.0.0.1:8787");
      if (scenario_dir.empty()) scenario_dir = detail::env_or("LIVEIA_SCENARIO_DIR", "scenarios");
      if (idle_timeout == 0) {
        const std::string env = detail::env_or("LIVEIA_IDLE_TIMEOUT", "1800");
        try {
          idle_timeout = std::stol(env);
        } catch (const std::logic_error&) {
          idle_timeout = -1;
        }
        if (idle_timeout <= 0) {
          err << "liveia: LIVEIA_IDLE_TIMEOUT must be a positive number of seconds\n";
          return kUsage;
        }
      }
      service::ListenAddress addr;
      try {
        addr = service::parse_listen(listen);
      } catch (const Error& e) {
        err << "liveia: " << e.what() << "\n";
        return kUsage;
      }
      scenario::ScenarioStore store(scenario_dir);
      service::ServiceOptions opt;
      opt.idle_timeout = std::chrono::seconds(idle_timeout);
      service::Service svc(store, opt);
      service::HttpServer server(svc);
      if (!server.bind(addr)) {
        err << "liveia: cannot listen on " << listen << "\n";
        return kInvalid;
      }
      detail::g_server = &server;
      std::signal(SIGINT, detail::on_signal);
      std::signal(SIGTERM, detail::on_signal);
      err << "liveia: serving " << store.directory().string() << " on " << addr.host << ":" << server.port() << "\n";
      server.serve();
      detail::g_server = nullptr;
      return kOk;
    }
  } catch (const detail::Failure& f) {
    err << f.message << "\n";
    return f.code;
  } catch (const ValidationError& e) {
    err << input << ": " << e.invariant() << ": " << e.what() << "\n";
    return kInvalid;
  } catch (const Error& e) {
    err << input << ": " << e.label() << ": " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}

}  // namespace liveia::cli
