#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "pdeil/pdeil.hpp"

namespace pdeil {

// Shortest round-trip decimal form; keeps emitted files byte-deterministic.
std::string fmt_double(double v);

// Demo files: a JSON header line (env kind, seed, expert return stats)
// followed by one {"s": [...], "a": ...} record per line.
void write_demos(const std::filesystem::path& path, const DemoSet& demos);
DemoSet read_demos(const std::filesystem::path& path);

// Density model serialization: estimator kind tag + parameters at full
// precision.
std::string density_to_json(const StateDensity& model);
StateDensity density_from_json(const std::string& text);
std::string conditional_to_json(const ConditionalActionModel& model);
ConditionalActionModel conditional_from_json(const std::string& text);
std::string reward_model_to_json(const RewardModel& model);
RewardModel reward_model_from_json(const std::string& text);

// Parameter checkpoints: flat weight vector + architecture descriptor.
void write_policy(const std::filesystem::path& path, const PolicyParams& p);
PolicyParams read_policy(const std::filesystem::path& path);
void write_value(const std::filesystem::path& path, const ValueParams& v);
ValueParams read_value(const std::filesystem::path& path);

// Per-epoch metrics, flushed per row so partial results survive a crash.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void write_row(const MetricsRow& row);

  static const char* header();

 private:
  std::ofstream out_;
};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

}  // namespace pdeil
