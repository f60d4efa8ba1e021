#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nlpb/config.hpp"

namespace nlpb {

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a of the config text, as 16 hex digits.
std::string config_hash(const std::string& text);

/// Executes the configured command, writing CSVs (and the denoised image)
/// into `out_dir` and one `PASS`/`FAIL` line per check to `out`. Returns 0
/// when every check passes, 1 when one fails, 2 after printing
/// `ERROR <code> <message>` to `err`.
int run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out,
        std::ostream& err);

}  // namespace nlpb
