#include "rumorlab/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "rumorlab/attack.hpp"
#include "rumorlab/checksum.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"
#include "rumorlab/sincon.hpp"

namespace rumorlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

Split split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test_fraction must lie in (0, 1)");
  Split split;
  Rng rng(seed);
  for (Label label : {Label::Rumor, Label::NonRumor}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label() == label) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

SeedSchedule seed_schedule(std::uint64_t run_seed, std::size_t k) {
  SeedSchedule s;
  s.replicate = derive_seed(run_seed, k);
  s.split = derive_seed(s.replicate, 1);
  s.init = derive_seed(s.replicate, 2);
  s.train = derive_seed(s.replicate, 3);
  s.generator = derive_seed(s.replicate, 4);
  s.surrogate = derive_seed(s.replicate, 5);
  return s;
}

TrainConfig arm_train_config(const TrainConfig& base, Arm arm, std::uint64_t seed) {
  TrainConfig tc = base;
  tc.seed = seed;
  tc.mode = arm == Arm::Normal ? TrainMode::Normal : TrainMode::Sincon;
  tc.augmentation = arm == Arm::SinconRandom ? Augmentation::Random : Augmentation::Influence;
  return tc;
}

std::unique_ptr<MessageGenerator> make_generator(const GeneratorSettings& settings, const EncoderConfig& encoder,
                                                 std::vector<std::string> vocab, std::uint64_t seed) {
  if (settings.kind == "http") return std::make_unique<HttpGenerator>(settings.http);
  if (settings.kind == "builtin") {
    return std::make_unique<BuiltinDissimilarGenerator>(std::move(vocab), encoder, seed, settings.length);
  }
  throw ConfigError("unknown generator kind '" + settings.kind + "'");
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

struct ReplicateOutput {
  std::vector<ArmMetrics> metrics;
  std::map<std::string, std::string> files;  // relative path -> content
  std::string predictions;                   // rows without header
  std::string transfer_error;
};

std::vector<EncodedTree> pick(const std::vector<EncodedTree>& all, const std::vector<std::size_t>& idx) {
  std::vector<EncodedTree> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

void add_predictions(std::string& rows, std::size_t replicate, const std::string& arm, const char* condition,
                     const std::vector<std::size_t>& tree_ids, const std::vector<EncodedTree>& samples,
                     const std::vector<Prediction>& preds) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rows += std::to_string(replicate) + "," + arm + "," + condition + "," + std::to_string(tree_ids[i]) + "," +
            to_string(samples[i].tree.label()) + "," + to_string(preds[i].label) + "," + fmt(preds[i].probs[1]) +
            "\n";
  }
}

double accuracy_of(const std::vector<EncodedTree>& samples, const std::vector<Prediction>& preds) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) hits += preds[i].label == samples[i].tree.label();
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

ReplicateOutput run_replicate(const ExperimentConfig& config, const Corpus& corpus,
                              const std::vector<EncodedTree>& encoded, const SeedSchedule& seeds, std::size_t k) {
  ReplicateOutput out;
  const std::string tag = "r" + std::to_string(k);
  const Split split = split_corpus(corpus, config.experiment.test_fraction, seeds.split);
  const auto train_set = pick(encoded, split.train);
  const auto test_set = pick(encoded, split.test);
  Corpus train_trees;
  for (const auto& s : train_set) train_trees.push_back(s.tree);
  const auto generator = make_generator(config.generator, config.encoder, corpus_vocabulary(train_trees), seeds.generator);

  // Transfer perturbation: stop decisions from a normally trained surrogate.
  std::optional<std::vector<EncodedTree>> transfer_set;
  try {
    DetectorConfig sdc = config.detector;
    sdc.arch = config.surrogate_arch;
    const TrainResult surrogate =
        train(init_params(sdc, config.encoder.dim, derive_seed(seeds.surrogate, 1)), train_set,
              arm_train_config(config.train, Arm::Normal, derive_seed(seeds.surrogate, 2)));
    out.files["loss/" + tag + "_surrogate.csv"] = history_csv(surrogate.history);
    Campaign c = attack_corpus(detector_victim(surrogate.params), test_set, config.attack, *generator, config.encoder);
    out.files["traces/" + tag + "_transfer.jsonl"] = traces_jsonl(c.traces);
    transfer_set = std::move(c.perturbed);
  } catch (const std::exception& e) {
    out.transfer_error = e.what();
  }

  for (Arm arm : config.experiment.arms) {
    ArmMetrics m;
    m.arm = arm;
    m.replicate = k;
    const std::string name = to_string(arm);
    std::string rows;
    try {
      const TrainResult trained = train(init_params(config.detector, config.encoder.dim, seeds.init), train_set,
                                        arm_train_config(config.train, arm, seeds.train));
      out.files["loss/" + tag + "_" + name + ".csv"] = history_csv(trained.history);
      const ModelParams& params = trained.params;

      const auto clean = predict_all(params, test_set);
      m.acc_clean = accuracy_of(test_set, clean);
      add_predictions(rows, k, name, "clean", split.test, test_set, clean);

      Campaign self = attack_corpus(detector_victim(params), test_set, config.attack, *generator, config.encoder);
      out.files["traces/" + tag + "_" + name + "_self.jsonl"] = traces_jsonl(self.traces);
      m.attack_failures = self.failures;
      const auto attacked = predict_all(params, self.perturbed);
      m.aua_self = accuracy_of(self.perturbed, attacked);
      add_predictions(rows, k, name, "self", split.test, self.perturbed, attacked);

      if (transfer_set) {
        const auto moved = predict_all(params, *transfer_set);
        m.aua_transfer = accuracy_of(*transfer_set, moved);
        m.has_transfer = true;
        add_predictions(rows, k, name, "transfer", split.test, *transfer_set, moved);
      }

      double gap = 0.0;
      for (const auto& s : test_set) {
        gap += influence_gap(params, s.tree, make_views(s.tree, s.features, rank_by_influence(s.tree)));
      }
      m.influence_gap = gap / static_cast<double>(test_set.size());
      out.predictions += rows;
      m.ok = true;
    } catch (const std::exception& e) {
      m.ok = false;
      m.error = e.what();
    }
    out.metrics.push_back(std::move(m));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + path.string());
  f << content;
  if (!f) throw ArgumentError("failed writing " + path.string());
}

}  // namespace

std::string metrics_csv(const ExperimentResult& result) {
  std::string out = "replicate,arm,status,acc_clean,aua_self,aua_transfer,influence_gap,attack_failures,error\n";
  for (const auto& m : result.metrics) {
    out += std::to_string(m.replicate) + "," + to_string(m.arm) + ",";
    if (m.ok) {
      out += "ok," + fmt(m.acc_clean) + "," + fmt(m.aua_self) + "," +
             (m.has_transfer ? fmt(m.aua_transfer) : std::string()) + "," + fmt(m.influence_gap) +
             "," + std::to_string(m.attack_failures) + ",\n";
    } else {
      out += "failed,,,,,," + csv_field(m.error) + "\n";
    }
  }
  return out;
}

std::vector<ArmSummary> summarize_arms(const std::vector<Arm>& arms, const std::vector<ArmMetrics>& metrics) {
  std::vector<ArmSummary> out;
  for (Arm arm : arms) {
    std::vector<double> acc, self, transfer, gap;
    for (const auto& m : metrics) {
      if (m.arm != arm || !m.ok) continue;
      acc.push_back(m.acc_clean);
      self.push_back(m.aua_self);
      if (m.has_transfer) transfer.push_back(m.aua_transfer);
      gap.push_back(m.influence_gap);
    }
    out.push_back({arm, summarize(acc), summarize(self), summarize(transfer), summarize(gap)});
  }
  return out;
}

std::string summary_csv(const ExperimentResult& result) {
  std::string out =
      "arm,n,acc_mean,acc_std,aua_self_mean,aua_self_std,aua_transfer_mean,aua_transfer_std,gap_mean,gap_std\n";
  for (const auto& s : result.summary) {
    out += std::string(to_string(s.arm)) + "," + std::to_string(s.acc_clean.n) + "," + fmt(s.acc_clean.mean) + "," +
           fmt(s.acc_clean.stddev) + "," + fmt(s.aua_self.mean) + "," + fmt(s.aua_self.stddev) + "," +
           fmt(s.aua_transfer.mean) + "," + fmt(s.aua_transfer.stddev) + "," + fmt(s.influence_gap.mean) + "," +
           fmt(s.influence_gap.stddev) + "\n";
  }
  return out;
}

std::string summary_text(const ExperimentResult& result) {
  auto pct = [](const Stat& s) {
    if (s.n == 0) return std::string("      n/a      ");
    return fmt_fixed(100.0 * s.mean, 2) + " +- " + fmt_fixed(100.0 * s.stddev, 2);
  };
  auto delta = [](const Stat& a, const Stat& b) {
    if (a.n == 0 || b.n == 0) return std::string("n/a");
    const double d = 100.0 * (a.mean - b.mean);
    return (d >= 0 ? "+" : "") + fmt_fixed(d, 2);
  };
  std::string out = "arm            n   ACC (%)          AUA self (%)     AUA transfer (%) influence gap\n";
  char line[256];
  for (const auto& s : result.summary) {
    std::snprintf(line, sizeof(line), "%-14s %-3zu %-16s %-16s %-16s %s\n", to_string(s.arm), s.acc_clean.n,
                  pct(s.acc_clean).c_str(), pct(s.aua_self).c_str(), pct(s.aua_transfer).c_str(),
                  s.influence_gap.n ? fmt_fixed(s.influence_gap.mean, 4).c_str() : "n/a");
    out += line;
  }
  const ArmSummary* normal = nullptr;
  for (const auto& s : result.summary) {
    if (s.arm == Arm::Normal) normal = &s;
  }
  if (normal != nullptr) {
    out += "\nchange vs normal (points)\n";
    for (const auto& s : result.summary) {
      if (&s == normal) continue;
      std::snprintf(line, sizeof(line), "%-14s ACC %s  AUA self %s  AUA transfer %s\n", to_string(s.arm),
                    delta(s.acc_clean, normal->acc_clean).c_str(), delta(s.aua_self, normal->aua_self).c_str(),
                    delta(s.aua_transfer, normal->aua_transfer).c_str());
      out += line;
    }
  }
  bool failed_header = false;
  for (const auto& m : result.metrics) {
    if (m.ok) continue;
    if (!failed_header) out += "\nfailures\n";
    failed_header = true;
    out += "  replicate " + std::to_string(m.replicate) + " " + to_string(m.arm) + ": " + m.error + "\n";
  }
  if (!result.transfer_error.empty()) out += "\ntransfer stage failed: " + result.transfer_error + "\n";
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t run_seed,
                                const std::filesystem::path& out_dir) {
  config.validate();
  const Corpus corpus = synth_corpus(config.corpus, config.corpus_seed);
  const auto encoded = encode_corpus(config.encoder, corpus);

  const std::size_t n = config.experiment.seeds;
  ExperimentResult result;
  for (std::size_t k = 0; k < n; ++k) result.seeds.push_back(seed_schedule(run_seed, k));

  std::vector<ReplicateOutput> outputs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        outputs[k] = run_replicate(config, corpus, encoded, result.seeds[k], k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::min(config.experiment.jobs, n);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string predictions = "replicate,arm,condition,tree,label,predicted,prob_nonrumor\n";
  std::map<std::string, std::string> files;
  for (std::size_t k = 0; k < n; ++k) {
    auto& o = outputs[k];
    result.metrics.insert(result.metrics.end(), o.metrics.begin(), o.metrics.end());
    predictions += o.predictions;
    files.merge(o.files);
    if (!o.transfer_error.empty() && result.transfer_error.empty()) {
      result.transfer_error = "replicate " + std::to_string(k) + ": " + o.transfer_error;
    }
  }
  result.summary = summarize_arms(config.experiment.arms, result.metrics);

  if (!out_dir.empty()) {
    files["config.json"] = config_to_json(config).dump(2) + "\n";
    files["metrics.csv"] = metrics_csv(result);
    files["summary.csv"] = summary_csv(result);
    files["summary.txt"] = summary_text(result);
    files["predictions.csv"] = predictions;

    nlohmann::json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["run_seed"] = run_seed;
    manifest["seed_schedule"] = nlohmann::json::array();
    for (const auto& s : result.seeds) {
      manifest["seed_schedule"].push_back({{"replicate", s.replicate},
                                           {"split", s.split},
                                           {"init", s.init},
                                           {"train", s.train},
                                           {"generator", s.generator},
                                           {"surrogate", s.surrogate}});
    }
    manifest["files"] = nlohmann::json::object();
    for (const auto& [path, content] : files) manifest["files"][path] = git_blob_sha1(content);

    std::filesystem::create_directories(out_dir);
    for (const auto& [path, content] : files) write_file(out_dir / path, content);
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return result;
}

std::string sweep(const ExperimentConfig& config, std::uint64_t run_seed, const std::string& param,
                  const std::vector<double>& values, const std::filesystem::path& out_dir) {
  if (values.empty()) throw ArgumentError("sweep needs at least one value");
  if (param != "alpha1" && param != "alpha2") throw ArgumentError("sweep parameter must be alpha1 or alpha2");
  std::string out =
      "param,value,arm,n,acc_mean,acc_std,aua_self_mean,aua_self_std,aua_transfer_mean,aua_transfer_std,gap_mean,"
      "gap_std\n";
  for (double v : values) {
    ExperimentConfig c = config;
    (param == "alpha1" ? c.train.alpha1 : c.train.alpha2) = v;
    char name[64];
    std::snprintf(name, sizeof(name), "%s=%g", param.c_str(), v);
    const std::filesystem::path dir = out_dir.empty() ? out_dir : out_dir / name;
    const ExperimentResult r = run_experiment(c, run_seed, dir);
    for (const auto& s : r.summary) {
      out += param + "," + fmt(v) + "," + to_string(s.arm) + "," + std::to_string(s.acc_clean.n) + "," +
             fmt(s.acc_clean.mean) + "," + fmt(s.acc_clean.stddev) + "," + fmt(s.aua_self.mean) + "," +
             fmt(s.aua_self.stddev) + "," + fmt(s.aua_transfer.mean) + "," + fmt(s.aua_transfer.stddev) + "," +
             fmt(s.influence_gap.mean) + "," + fmt(s.influence_gap.stddev) + "\n";
    }
  }
  if (!out_dir.empty()) write_file(out_dir / "sweep.csv", out);
  return out;
}

}  // namespace rumorlab
