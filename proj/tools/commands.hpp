#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpmsa::cli {

struct RunOptions {
  std::string config;
  std::string out_dir = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<int> threads;
};

const std::vector<std::string>& subcommands();

// Returns the process exit code.
int run(const std::string& subcommand, const RunOptions& options);

}  // namespace mpmsa::cli
