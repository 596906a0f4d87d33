// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "gridsplit/devices.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit::testing {

inline std::filesystem::path data_dir() { return GRIDSPLIT_DATA_DIR; }
inline std::filesystem::path case9_path() { return data_dir() / "case9.case"; }
inline std::filesystem::path scenario_path(const std::string& name) {
  return data_dir() / "scenarios" / (name + ".scn");
}

/// Module parameters of the bundled inverter block.
inline GfmDefinition table_gfm() {
  PowerFlowCase c = load_case(case9_path());
  return gfm_definition_from_block(c.block("inv1"), c.frequency, c.base_mva);
}

inline Complex random_complex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Complex(u(rng), u(rng));
}

constexpr const char* kTwoBusCase = R"(base_mva = 100
frequency = 60
[bus]
bus type Pd Qd Gs Bs baseKV
1 slack 0 0 0 0 1
2 pq 50 10 0 0 1
[branch]
fbus tbus r x b status
1 2 0.0384615384615385 0.192307692307692 0 1
[gen]
bus kind key Pg Vg
1 machine m1 0 1
[machine m1]
H = 3.7
D = 0
tau_g = 5
dp = 0.01
xd_p = 0.1
)";

}  // namespace gridsplit::testing
