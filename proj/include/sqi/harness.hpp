#pragma once
// Batch commands behind the sqi command-line tool. Each command reads a
// JSON config (config_version 1, unknown keys rejected), writes CSV and
// JSON reports into the output directory and returns the process exit
// code. Reruns with the same config, inputs and seed produce identical
// bytes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sqi::harness {

inline constexpr int kConfigVersion = 1;

struct Options {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  std::filesystem::path out = ".";
  std::size_t jobs = 1;               // 0 = all hardware threads
};

const std::vector<std::string>& command_names();

// 0 on success, 1 when some rows failed (measure). Config and schema
// problems throw sqi::Error.
int run(const std::string& command, const Options& options, std::ostream& log);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);  // 16 hex digits

}  // namespace sqi::harness
