#pragma once

#include <filesystem>

#include "pdeil/io.hpp"
#include "pdeil/pdeil.hpp"

namespace pdeil {

// A sweep over alpha values, demo-set sizes, and seeds (full cross product).
struct ExperimentSpec {
  PdeilConfig base;
  std::vector<double> alphas;
  std::vector<int> demo_episode_counts;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir;
  std::string demo_path;          // optional: load demos instead of collecting
  double return_threshold = 0.0;  // "solved" bar for epochs_to_threshold

  void validate() const;
};

struct RunSummary {
  std::string config_tag;
  std::uint64_t config_hash = 0;
  double alpha = 0.0;
  int demo_episodes = 0;
  std::uint64_t seed = 0;
  double final_return = 0.0;
  double best_return = 0.0;
  int epochs_to_threshold = -1;  // -1: never reached
  bool failed = false;
};

std::string run_tag(double alpha, int demo_episodes, std::uint64_t seed);

// Executes the sweep in an isolated-task worker pool, writes one metrics
// file per run plus summary.csv and aggregate.csv (per-config mean/std
// across seeds per epoch), and returns one summary per run.
std::vector<RunSummary> run_experiment(const ExperimentSpec& spec);

void write_summaries(const std::filesystem::path& path,
                     std::span<const RunSummary> summaries);

struct AggregateRow {
  std::string config_tag;  // seed axis collapsed
  double alpha = 0.0;
  int demo_episodes = 0;
  int epoch = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_correlation = 0.0;  // over seeds whose probe reported a value
  int correlation_count = 0;
  int n_seeds = 0;
};

std::vector<AggregateRow> aggregate_metrics(
    std::span<const std::vector<MetricsRow>> per_run,
    std::span<const RunSummary> summaries);
void write_aggregate(const std::filesystem::path& path,
                     std::span<const AggregateRow> rows);

// Behavioral-cloning baseline: trained on the demos only, evaluated with the
// same deterministic protocol; consumes zero environment steps.
struct BcBaselineConfig {
  int epochs = 300;
  double learning_rate = 1e-3;
  int minibatch = 128;
  int eval_episodes = 5;
};

RunSummary run_bc_baseline(const DemoSet& demos, std::uint64_t seed,
                           const BcBaselineConfig& cfg,
                           const std::filesystem::path& out_dir);

// Cross-check path: the same learner trained on the ground-truth reward.
struct ExpertTrainResult {
  PolicyParams policy;
  std::vector<double> eval_returns_per_epoch;
};

ExpertTrainResult train_expert(EnvKind env, const LearnerConfig& cfg,
                               int epochs, std::uint64_t seed);

}  // namespace pdeil
