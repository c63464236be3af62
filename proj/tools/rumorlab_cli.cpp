// Command-line front end: synth, train, attack, eval, run, sweep, report.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rumorlab/attack.hpp"
#include "rumorlab/config.hpp"
#include "rumorlab/corpus_io.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/experiment.hpp"
#include "rumorlab/report.hpp"
#include "rumorlab/synth.hpp"

using namespace rumorlab;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override a config value, e.g. --set train.epochs=10")->take_all();
}

ExperimentConfig load(const Common& c) { return load_config(c.config_path, c.overrides); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << content;
}

// Model files carry the encoder so features are rebuilt consistently.
void save_model(const fs::path& path, const EncoderConfig& enc, const ModelParams& params) {
  nlohmann::json doc{{"encoder", {{"dim", enc.dim}, {"vocab_seed", enc.vocab_seed}}},
                     {"params", nlohmann::json::parse(params_to_json(params))}};
  spit(path, doc.dump() + "\n");
}

std::pair<EncoderConfig, ModelParams> load_model(const fs::path& path) {
  try {
    const auto doc = nlohmann::json::parse(slurp(path));
    EncoderConfig enc;
    enc.dim = doc.at("encoder").at("dim").get<std::size_t>();
    enc.vocab_seed = doc.at("encoder").at("vocab_seed").get<std::uint64_t>();
    enc.validate();
    ModelParams params = params_from_json(doc.at("params").dump());
    if (params.input_dim != enc.dim) throw ParseError("encoder dimension does not match the model input");
    return {enc, std::move(params)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file " + path.string() + " is malformed: " + e.what());
  }
}

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& idx) {
  Corpus out;
  for (std::size_t i : idx) out.push_back(corpus[i]);
  return out;
}

std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> values;
  for (const auto& chunk : raw) {
    std::stringstream ss(chunk);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ArgumentError("sweep value '" + item + "' is not a number");
      }
    }
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rumor detection attack/defense laboratory"};
  app.require_subcommand(1);

  // synth
  Common synth_c;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  add_common(synth, synth_c);
  synth->add_option("-o,--out", synth_out, "Corpus JSON output")->required();
  synth->add_option("--seed", synth_seed, "Corpus seed (overrides corpus.seed)");

  // train
  Common train_c;
  std::string train_corpus, train_model, train_loss, train_test, train_mode;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train a detector on the training split of a corpus");
  add_common(train_cmd, train_c);
  train_cmd->add_option("--corpus", train_corpus, "Corpus JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", train_seed, "Seed for split, initialization and shuffling")->required();
  train_cmd->add_option("--mode", train_mode, "normal | sincon | sincon-random (default: train.mode)");
  train_cmd->add_option("--model-out", train_model, "Model JSON output")->required();
  train_cmd->add_option("--loss-out", train_loss, "Loss history CSV output");
  train_cmd->add_option("--test-out", train_test, "Held-out split as corpus JSON");

  // attack
  Common attack_c;
  std::string attack_model, attack_oracle, attack_corpus_path, attack_out, attack_traces;
  std::uint64_t attack_seed = 0;
  auto* attack_cmd = app.add_subcommand("attack", "Inject messages into every rumor tree of a corpus");
  add_common(attack_cmd, attack_c);
  attack_cmd->add_option("--model", attack_model, "Target model JSON")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--oracle", attack_oracle, "Model deciding when to stop (default: the target)")
      ->check(CLI::ExistingFile);
  attack_cmd->add_option("--corpus", attack_corpus_path, "Corpus JSON to attack")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--seed", attack_seed, "Generator seed")->required();
  attack_cmd->add_option("-o,--out", attack_out, "Perturbed corpus JSON output")->required();
  attack_cmd->add_option("--traces", attack_traces, "Injection traces (JSON lines) output");

  // eval
  std::string eval_model, eval_corpus, eval_attacked, eval_csv;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy of a model on a corpus, optionally under attack");
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", eval_corpus, "Clean corpus JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--attacked", eval_attacked, "Perturbed corpus JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--csv", eval_csv, "Metrics CSV output");

  // run
  Common run_c;
  std::string run_out;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Full experiment matrix");
  add_common(run_cmd, run_c);
  run_cmd->add_option("--seed", run_seed, "Run seed")->required();
  run_cmd->add_option("-o,--out", run_out, "Run directory (default: output_dir)");

  // sweep
  Common sweep_c;
  std::string sweep_param, sweep_out;
  std::vector<std::string> sweep_values;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat the experiment over values of alpha1 or alpha2");
  add_common(sweep_cmd, sweep_c);
  sweep_cmd->add_option("--param", sweep_param, "alpha1 | alpha2")
      ->required()
      ->check(CLI::IsMember({"alpha1", "alpha2"}));
  sweep_cmd->add_option("--values", sweep_values, "Values, comma separated or repeated")->required();
  sweep_cmd->add_option("--seed", sweep_seed, "Run seed")->required();
  sweep_cmd->add_option("-o,--out", sweep_out, "Sweep directory (default: output_dir)");

  // report
  std::string report_dir, report_csv;
  auto* report_cmd = app.add_subcommand("report", "Verify a run directory and print its summary table");
  report_cmd->add_option("run_dir", report_dir, "Run directory")->required();
  report_cmd->add_option("--csv", report_csv, "Write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      ExperimentConfig cfg = load(synth_c);
      const std::uint64_t seed = synth_seed.value_or(cfg.corpus_seed);
      const Corpus corpus = synth_corpus(cfg.corpus, seed);
      save_corpus(corpus, synth_out);
      std::size_t rumors = 0;
      for (const auto& t : corpus) rumors += t.label() == Label::Rumor;
      std::printf("wrote %zu trees (%zu rumor, %zu non-rumor) to %s\n", corpus.size(), rumors,
                  corpus.size() - rumors, synth_out.c_str());
    } else if (train_cmd->parsed()) {
      ExperimentConfig cfg = load(train_c);
      Arm arm = cfg.train.mode == TrainMode::Normal
                    ? Arm::Normal
                    : (cfg.train.augmentation == Augmentation::Random ? Arm::SinconRandom : Arm::Sincon);
      if (!train_mode.empty()) arm = parse_arm(train_mode);
      const Corpus corpus = load_corpus(train_corpus);
      const SeedSchedule seeds = seed_schedule(train_seed, 0);
      const Split split = split_corpus(corpus, cfg.experiment.test_fraction, seeds.split);
      const auto train_set = encode_corpus(cfg.encoder, subset(corpus, split.train));
      const auto test_set = encode_corpus(cfg.encoder, subset(corpus, split.test));
      const TrainResult r = train(init_params(cfg.detector, cfg.encoder.dim, seeds.init), train_set,
                                  arm_train_config(cfg.train, arm, seeds.train));
      save_model(train_model, cfg.encoder, r.params);
      if (!train_loss.empty()) spit(train_loss, history_csv(r.history));
      if (!train_test.empty()) save_corpus(subset(corpus, split.test), train_test);
      std::printf("mode %s: train accuracy %.4f, test accuracy %.4f (%zu/%zu trees)\n", to_string(arm),
                  evaluate(r.params, train_set), evaluate(r.params, test_set), train_set.size(), test_set.size());
    } else if (attack_cmd->parsed()) {
      ExperimentConfig cfg = load(attack_c);
      const auto [enc, target] = load_model(attack_model);
      const ModelParams oracle = attack_oracle.empty() ? target : load_model(attack_oracle).second;
      const Corpus corpus = load_corpus(attack_corpus_path);
      const auto samples = encode_corpus(enc, corpus);
      const auto generator = make_generator(cfg.generator, enc, corpus_vocabulary(corpus), attack_seed);
      const Campaign c = attack_corpus(detector_victim(oracle), samples, cfg.attack, *generator, enc);
      Corpus perturbed;
      for (const auto& s : c.perturbed) perturbed.push_back(s.tree);
      save_corpus(perturbed, attack_out);
      if (!attack_traces.empty()) spit(attack_traces, traces_jsonl(c.traces));
      std::size_t flipped = 0, injected = 0;
      for (const auto& t : c.traces) {
        flipped += t.outcome == AttackOutcome::Flipped;
        injected += t.records.size();
      }
      std::printf("attacked %zu rumor trees: %zu flipped by the oracle, %zu injections, %zu failures\n",
                  c.traces.size(), flipped, injected, c.failures);
      std::printf("target accuracy: clean %.4f, under attack %.4f\n", evaluate(target, samples),
                  evaluate(target, c.perturbed));
      if (c.failures > 0) return 1;
    } else if (eval_cmd->parsed()) {
      const auto [enc, params] = load_model(eval_model);
      const double acc = evaluate(params, encode_corpus(enc, load_corpus(eval_corpus)));
      std::string csv = "acc_clean,acc_under_attack\n";
      char line[96];
      if (eval_attacked.empty()) {
        std::printf("ACC %.4f\n", acc);
        std::snprintf(line, sizeof(line), "%.17g,\n", acc);
      } else {
        const double aua = evaluate(params, encode_corpus(enc, load_corpus(eval_attacked)));
        std::printf("ACC %.4f  AUA %.4f\n", acc, aua);
        std::snprintf(line, sizeof(line), "%.17g,%.17g\n", acc, aua);
      }
      if (!eval_csv.empty()) spit(eval_csv, csv + line);
    } else if (run_cmd->parsed()) {
      ExperimentConfig cfg = load(run_c);
      const fs::path out = run_out.empty() ? fs::path(cfg.output_dir) : fs::path(run_out);
      const ExperimentResult r = run_experiment(cfg, run_seed, out);
      std::fputs(summary_text(r).c_str(), stdout);
      std::printf("\nrun directory: %s\n", out.string().c_str());
    } else if (sweep_cmd->parsed()) {
      ExperimentConfig cfg = load(sweep_c);
      const fs::path out = sweep_out.empty() ? fs::path(cfg.output_dir) : fs::path(sweep_out);
      std::fputs(sweep(cfg, sweep_seed, sweep_param, parse_values(sweep_values), out).c_str(), stdout);
    } else if (report_cmd->parsed()) {
      const RunReport r = report(report_dir);
      std::fputs(r.text.c_str(), stdout);
      if (!report_csv.empty()) spit(report_csv, r.csv);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
