#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rumorlab/attack.hpp"
#include "rumorlab/detector.hpp"
#include "rumorlab/encoder.hpp"
#include "rumorlab/generator.hpp"
#include "rumorlab/synth.hpp"
#include "rumorlab/train.hpp"

namespace rumorlab {

/// A trained model variant in the experiment matrix.
enum class Arm { Normal, Sincon, SinconRandom };

const char* to_string(Arm arm);
Arm parse_arm(const std::string& text);

struct GeneratorSettings {
  std::string kind = "builtin";  // builtin | http
  std::size_t length = 8;        // builtin message length in tokens
  HttpGeneratorConfig http;
};

struct ExperimentSettings {
  std::size_t seeds = 5;
  double test_fraction = 0.2;
  std::vector<Arm> arms{Arm::Normal, Arm::Sincon, Arm::SinconRandom};
  std::size_t jobs = 1;
};

struct ExperimentConfig {
  EncoderConfig encoder;
  DetectorConfig detector;
  TrainConfig train;
  AttackConfig attack;
  Architecture surrogate_arch = Architecture::BiGcn;
  GeneratorSettings generator;
  CorpusSpec corpus;
  std::uint64_t corpus_seed = 7;
  ExperimentSettings experiment;
  std::string output_dir = "runs/default";

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Strict conversion: unknown keys and ill-typed values are ConfigErrors.
/// Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Applies "a.b.c=value" to a config document. The value is parsed as JSON
/// when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads a config file (if the path is non-empty), applies overrides in
/// order, converts and validates.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Hex SHA-1 of the canonical serialization, ignoring output_dir and jobs.
std::string config_hash(const ExperimentConfig& config);

}  // namespace rumorlab
