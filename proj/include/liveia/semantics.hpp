#pragma once

#include "liveia/semantics/compile.hpp"
#include "liveia/semantics/deception.hpp"
#include "liveia/semantics/hue_table.hpp"
#include "liveia/semantics/metrics.hpp"
#include "liveia/semantics/psyche.hpp"
#include "liveia/semantics/reflection.hpp"
