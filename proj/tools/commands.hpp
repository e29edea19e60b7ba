#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace safeimm::cli {

struct CommonArgs {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

int cmd_simulate(const CommonArgs& args);
int cmd_track(const CommonArgs& args);
int cmd_ablate(const CommonArgs& args);
int cmd_bench(const CommonArgs& args);

}  // namespace safeimm::cli
