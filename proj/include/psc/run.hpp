#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psc/presets.hpp"

namespace psc {

enum class RunMode { solve, cont, verify, report };

/** One batch run. Flags override config-file values; the file is flat
 *  `key = value` text with '#' comments and rejects unknown keys. */
struct RunConfig {
    RunMode mode = RunMode::solve;
    int dim = 3;
    int res = 16;
    Preset preset{"cosgap", {0.1}};
    double q = 4.0;
    std::vector<double> schedule;  // explicit list; empty -> geometric default
    double q_start = 0.0;          // 0 -> (2 + 2*)/2
    double q_end = 0.0;            // 0 -> 2*
    int q_steps = 6;
    double tol = 1e-7;
    long max_iters = 200000;
    double step = 0.0;
    std::uint64_t seed = 12345;
    std::filesystem::path out = "psc_out";
    std::filesystem::path in;   // report-mode input directory
    bool gap = false;           // include the strict-gap experiment in verify mode
    double delta = 0.25;
};

/** Parse argv-style arguments (without the program name). Throws
 *  std::invalid_argument on unknown keys, out-of-range values, or a
 *  missing mode. */
RunConfig parse_config(const std::vector<std::string>& args);

/** Execute one run. Artifacts land in cfg.out; failures leave a `.failed`
 *  marker there. Returns 0 exactly when every hard postcondition holds
 *  (soft findings never fail a run). */
int run(const RunConfig& cfg);

}  // namespace psc
