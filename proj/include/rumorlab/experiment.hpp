#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rumorlab/config.hpp"

namespace rumorlab {

/// Indices into a corpus, each list ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified by label: round(test_fraction * class size) trees of each class
/// go to the test side, chosen by a seeded shuffle.
Split split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed);

/// Seeds used by one replicate of the experiment matrix. Every arm of a
/// replicate shares them.
struct SeedSchedule {
  std::uint64_t replicate = 0;
  std::uint64_t split = 0;
  std::uint64_t init = 0;
  std::uint64_t train = 0;
  std::uint64_t generator = 0;
  std::uint64_t surrogate = 0;
};

/// Replicate k of a run started with `run_seed`.
SeedSchedule seed_schedule(std::uint64_t run_seed, std::size_t k);

TrainConfig arm_train_config(const TrainConfig& base, Arm arm, std::uint64_t seed);

/// Generator configured by the experiment; `vocab` feeds the built-in one.
std::unique_ptr<MessageGenerator> make_generator(const GeneratorSettings& settings, const EncoderConfig& encoder,
                                                 std::vector<std::string> vocab, std::uint64_t seed);

/// Metrics of one arm in one replicate. AUA is measured twice: with the
/// attack's stop decisions taken by the evaluated model itself ("self") and by
/// an independently trained surrogate ("transfer").
struct ArmMetrics {
  Arm arm = Arm::Normal;
  std::size_t replicate = 0;
  bool ok = false;
  std::string error;
  double acc_clean = 0.0;
  double aua_self = 0.0;
  double aua_transfer = 0.0;
  bool has_transfer = false;  // false when the surrogate stage failed
  double influence_gap = 0.0;  // mean over held-out trees
  std::size_t attack_failures = 0;
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t n = 0;
};

Stat summarize(const std::vector<double>& values);

struct ArmSummary {
  Arm arm = Arm::Normal;
  Stat acc_clean;
  Stat aua_self;
  Stat aua_transfer;
  Stat influence_gap;
};

struct ExperimentResult {
  std::vector<SeedSchedule> seeds;
  std::vector<ArmMetrics> metrics;  // replicate-major, arms in config order
  std::vector<ArmSummary> summary;  // one per arm, failed replicates excluded
  std::string transfer_error;       // set when the surrogate stage failed
};

/// Per-arm mean/stddev over successful replicates, arms in the given order.
std::vector<ArmSummary> summarize_arms(const std::vector<Arm>& arms, const std::vector<ArmMetrics>& metrics);

/// Runs every configured arm on every replicate. When `out_dir` is non-empty
/// the run directory is written there (see write_run_directory).
/// A failing arm is recorded and the others continue.
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t run_seed,
                                const std::filesystem::path& out_dir = {});

std::string metrics_csv(const ExperimentResult& result);
std::string summary_csv(const ExperimentResult& result);
std::string summary_text(const ExperimentResult& result);

/// One run_experiment per value of `param` (alpha1 or alpha2), each into
/// out_dir/<param>=<value> when out_dir is non-empty. Returns the sweep CSV:
/// one row per value and arm.
std::string sweep(const ExperimentConfig& config, std::uint64_t run_seed, const std::string& param,
                  const std::vector<double>& values, const std::filesystem::path& out_dir = {});

}  // namespace rumorlab
