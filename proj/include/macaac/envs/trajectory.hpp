#pragma once

// Trajectory dumps: JSON lines, one StepResult per line:
//   {"env": e, "episode": ep, "t": t, "actions": [...], "cost": k,
//    "penalties": [...], "done": b, "observations": [[...], ...]}

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "macaac/envs/environment.hpp"

namespace macaac::envs {

nlohmann::json step_record(std::size_t env, std::int64_t episode, int t,
                           std::span<const int> actions, const StepResult& r);

class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  void write(const nlohmann::json& record);

 private:
  std::ofstream os_;
};

}  // namespace macaac::envs
