#include "macaac/envs/trajectory.hpp"

#include <stdexcept>

namespace macaac::envs {

nlohmann::json step_record(std::size_t env, std::int64_t episode, int t,
                           std::span<const int> actions, const StepResult& r) {
  return {{"env", env},
          {"episode", episode},
          {"t", t},
          {"actions", std::vector<int>(actions.begin(), actions.end())},
          {"cost", r.cost},
          {"penalties", r.penalties},
          {"done", r.done},
          {"observations", r.observations}};
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  os_.open(path);
  if (!os_) throw std::runtime_error("cannot write trajectory file " + path.string());
}

void TrajectoryWriter::write(const nlohmann::json& record) { os_ << record.dump() << '\n'; }

}  // namespace macaac::envs
