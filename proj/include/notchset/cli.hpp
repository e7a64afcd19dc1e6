#pragma once

#include <string>

#include "notchset/io.hpp"

// Batch entry points. Every command writes its artifacts plus a
// run_manifest.json that embeds the full normalized config; `rerun`
// re-executes a manifest and reproduces the numeric outputs byte for byte.
//
// Exit codes: 0 success, 1 usage/config error, 2 completed with warnings
// (sweep cap hit before the convergence threshold, or sensing left no
// usable passband).

namespace notchset::cli {

int cmd_design(const io::json& config, const std::string& out_dir);
int cmd_evaluate(const io::json& config, const std::string& out_dir);
int cmd_simulate(const io::json& config, const std::string& out_dir);
int cmd_sense(const io::json& config, const std::string& out_dir);
int cmd_rerun(const std::string& manifest_path, const std::string& out_dir);

// Full argv front end used by the `notchset` binary.
int run(int argc, const char* const* argv);

}  // namespace notchset::cli
