#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsf/generator.hpp"

namespace nsf::cli {

inline constexpr std::uint64_t kDefaultSeed = 1234;

/// 0 everything succeeded, 1 nothing did (or the run was misconfigured),
/// 2 some cases failed or were skipped.
enum ExitCode : int { kOk = 0, kFailure = 1, kPartial = 2 };

struct RunConfig {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::string> references;
    std::string output;
    std::string schema_path;
    std::string config_path;
    std::size_t count = 1;
    std::uint64_t seed = kDefaultSeed;
    bool random_seed = false;
    unsigned workers = 1;
    std::string predictor;
    bool tta = true;
    std::size_t max_voxels = 0;
    std::int64_t phantom_size = 48;
    GeneratorConfig generator;
};

/// Applies `key = value` lines from a config file. Keys already present in
/// `locked` (set on the command line) are left alone. Throws InvalidArgument
/// on unknown keys or malformed values.
void apply_config_text(const std::string& text, RunConfig& config, const std::vector<std::string>& locked);

/// Seed of sample `index` under run seed `seed`; independent of worker count.
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

/// File name without directory and without .nii / .nii.gz.
std::string volume_stem(const std::string& path);

/// Entry point without the program name; returns the process exit code.
int run(const std::vector<std::string>& args);

} // namespace nsf::cli
