// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --cli <path to rumorlab> [--work <scratch dir>] [--only <name>...]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rumorlab/attack.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/experiment.hpp"
#include "rumorlab/sincon.hpp"
#include "rumorlab/train.hpp"

using namespace rumorlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double max_seconds;  // wall-clock bound on the check itself; 0 when the bound applies to the shared run
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool defined(const ModelParams& p, std::span<const ViewedExample> batch, const LossWeights& w) {
  try {
    total_loss(p, batch, w);
    return true;
  } catch (const ArgumentError&) {
    return false;
  }
}

// Criterion: analytic gradients of the full objective against central differences.
Outcome gradient_check() {
  std::mt19937_64 rng(2024);
  const LossWeights w{0.5, 1e-5, 1e-2};
  double worst = 0.0;
  std::size_t redraws = 0;
  for (int b = 0; b < 20; ++b) {
    const std::size_t d = 4 + rng() % 5;
    std::vector<PropagationTree> trees;
    std::vector<Matrix> feats;
    for (int i = 0; i < 2; ++i) {
      trees.push_back(oracle::random_tree(3 + rng() % 6, rng, rng() % 2 ? Label::Rumor : Label::NonRumor));
      feats.push_back(oracle::random_features(trees.back().size(), d, rng));
    }
    std::vector<AugmentedViews> views;
    for (int i = 0; i < 2; ++i) views.push_back(make_views(trees[i], feats[i], rank_by_influence(trees[i])));
    std::vector<ViewedExample> batch;
    for (int i = 0; i < 2; ++i) batch.push_back({&trees[i], &feats[i], &views[i], trees[i].label()});
    const Architecture arch = b % 2 ? Architecture::BiGcn : Architecture::Gcn;
    const std::vector<std::size_t> hidden{4 + rng() % 5, 4 + rng() % 5};
    ModelParams p = init_params({arch, hidden}, d, rng());
    // The contrastive term is undefined at an all-zero summary; draw another init.
    while (!defined(p, batch, w)) {
      p = init_params({arch, hidden}, d, rng());
      ++redraws;
    }
    const auto g = gradients(p, [&](ad::Tape& tape, const ParamVars& vars) {
      return total_loss_on_tape(tape, vars, p, batch, w).total;
    });
    const auto fd = oracle::finite_difference_check(
        p, g.grads, [&](const ModelParams& q) { return total_loss(q, batch, w); }, 1e-5);
    worst = std::max(worst, fd.max_rel_error);
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3g", worst) + " (< 1e-4) over 20 batches, " +
                            std::to_string(redraws) + " init redraws"};
}

// Criterion: contrastive loss against the term-by-term assembly.
Outcome contrastive_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int b = 0; b < 100; ++b) {
    const std::size_t B = 1 + rng() % 4, d = 2 + rng() % 10;
    const double tau = 0.05 + 0.95 * (u(rng) + 1.0) / 2.0;
    auto vec = [&] {
      std::vector<double> v(d);
      for (double& x : v) x = u(rng);
      return v;
    };
    std::vector<SummaryTriple> batch;
    std::vector<oracle::Triple> ref;
    for (std::size_t i = 0; i < B; ++i) {
      batch.push_back({vec(), vec(), vec()});
      ref.push_back({batch.back().original, batch.back().imp, batch.back().ump});
    }
    const auto got = sincon_loss(batch, tau);
    const auto want = oracle::contrastive(ref, tau);
    double mean = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      worst = std::max(worst, std::abs(got.loss[i] - want[i]));
      mean += want[i] / static_cast<double>(B);
    }
    worst = std::max(worst, std::abs(got.mean - mean));
  }
  return {worst <= 1e-9, "max abs difference " + fmt("%.3g", worst) + " (<= 1e-9)"};
}

// Criterion: ranking and attachment against brute force, across successive injections.
Outcome influence_oracle() {
  std::mt19937_64 rng(5);
  const EncoderConfig enc{16, 0};
  std::size_t mismatches = 0, checks = 0;
  for (int t = 0; t < 100; ++t) {
    auto tree = oracle::random_tree(1 + rng() % 30, rng);
    auto feats = encode_tree(enc, tree);
    for (int step = 0; step <= 5; ++step) {
      const auto order = oracle::rank(oracle::influence(tree.size(), tree.edges()));
      ++checks;
      if (rank_by_influence(tree).order != order) ++mismatches;
      if (step == 5) break;
      auto next = inject(tree, feats, "injected message " + std::to_string(step), enc);
      ++checks;
      if (next.parent != order.front() || next.tree.parent(next.tree.size() - 1) != order.front()) ++mismatches;
      tree = std::move(next.tree);
      feats = std::move(next.features);
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(checks) + " checks"};
}

// Criterion: zero-weight SINCon training retraces normal training.
Outcome degeneration() {
  ExperimentConfig cfg;
  cfg.corpus.n_trees = 200;
  const auto corpus = encode_corpus(cfg.encoder, synth_corpus(cfg.corpus, cfg.corpus_seed));
  const auto init = init_params(cfg.detector, cfg.encoder.dim, 11);
  TrainConfig normal = cfg.train;
  normal.seed = 12;
  normal.mode = TrainMode::Normal;
  TrainConfig zero = normal;
  zero.mode = TrainMode::Sincon;
  zero.alpha1 = 0.0;
  zero.alpha2 = 0.0;
  const auto a = train(init, corpus, normal);
  const auto b = train(init, corpus, zero);
  bool same = a.history.size() == b.history.size() && a.params == b.params;
  for (std::size_t e = 0; same && e < a.history.size(); ++e) {
    same = a.history[e].total == b.history[e].total && a.history[e].sup == b.history[e].sup;
  }
  return {same, std::to_string(a.history.size()) + " epochs compared bit for bit"};
}

struct SummaryRow {
  std::size_t n = 0;
  double acc = 0, aua_self = 0, aua_transfer = 0, gap = 0;
};

std::map<std::string, SummaryRow> read_summary(const fs::path& csv) {
  std::map<std::string, SummaryRow> rows;
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 10) continue;
    SummaryRow r;
    r.n = std::stoul(f[1]);
    r.acc = std::stod(f[2]);
    r.aua_self = std::stod(f[4]);
    r.aua_transfer = std::stod(f[6]);
    r.gap = std::stod(f[8]);
    rows[f[0]] = r;
  }
  return rows;
}

// Runs `rumorlab run` on the default configuration, returning wall seconds.
double cli_run(const std::string& cli, const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = "\"" + cli + "\" run --seed 1 -o \"" + out.string() + "\" > \"" + out.string() + ".log\" 2>&1";
  const auto start = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (rc != 0) throw std::runtime_error("'" + cmd + "' exited with " + std::to_string(rc));
  return secs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rumorlab acceptance suite"};
  std::string cli;
  std::string work = (fs::temp_directory_path() / "rumorlab_acceptance").string();
  std::vector<std::string> only;
  app.add_option("--cli", cli, "Path to the rumorlab executable")->required();
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run only the named criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  // The default experiment is shared by the four experiment-level criteria.
  std::map<std::string, SummaryRow> summary;
  double run_seconds = -1.0;
  std::string run_error;
  auto ensure_run = [&] {
    if (run_seconds >= 0.0 || !run_error.empty()) return;
    try {
      run_seconds = cli_run(cli, fs::path(work) / "run_a");
      summary = read_summary(fs::path(work) / "run_a" / "summary.csv");
    } catch (const std::exception& e) {
      run_error = e.what();
    }
  };
  auto arms_complete = [&](std::string& why) {
    ensure_run();
    if (!run_error.empty()) {
      why = run_error;
      return false;
    }
    for (const char* arm : {"normal", "sincon", "sincon-random"}) {
      if (!summary.count(arm) || summary[arm].n != 5) {
        why = std::string("arm ") + arm + " did not complete 5 replicates";
        return false;
      }
    }
    return true;
  };
  auto pts = [](double v) { return fmt("%.2f", 100.0 * v); };

  const std::vector<Criterion> criteria{
      {"gradient-check", 60, gradient_check},
      {"contrastive-oracle", 60, contrastive_oracle},
      {"influence-oracle", 60, influence_oracle},
      {"attack-efficacy", 0,
       [&]() -> Outcome {
         std::string why;
         if (!arms_complete(why)) return {false, why};
         const auto& n = summary["normal"];
         const double drop = n.acc - n.aua_self;
         return {drop >= 0.15 && run_seconds < 600,
                 "normal ACC " + pts(n.acc) + ", AUA " + pts(n.aua_self) + ", drop " + pts(drop) +
                     " points (>= 15); run " + fmt("%.0f", run_seconds) + "s"};
       }},
      {"defense-efficacy", 0,
       [&]() -> Outcome {
         std::string why;
         if (!arms_complete(why)) return {false, why};
         const auto& n = summary["normal"];
         const auto& s = summary["sincon"];
         const double gain = s.aua_self - n.aua_self;
         const double cost = n.acc - s.acc;
         return {gain >= 0.05 && cost <= 0.05 && run_seconds < 900,
                 "AUA gain " + pts(gain) + " points (>= 5), ACC cost " + pts(cost) + " points (<= 5)"};
       }},
      {"ablation-direction", 0,
       [&]() -> Outcome {
         std::string why;
         if (!arms_complete(why)) return {false, why};
         const auto& s = summary["sincon"];
         const auto& r = summary["sincon-random"];
         return {s.aua_self >= r.aua_self && run_seconds < 900,
                 "influence masking AUA " + pts(s.aua_self) + " vs random masking " + pts(r.aua_self)};
       }},
      {"influence-gap", 0,
       [&]() -> Outcome {
         std::string why;
         if (!arms_complete(why)) return {false, why};
         const auto& n = summary["normal"];
         const auto& s = summary["sincon"];
         return {s.gap < n.gap, "sincon gap " + fmt("%.5f", s.gap) + " vs normal " + fmt("%.5f", n.gap)};
       }},
      {"degeneration", 300, degeneration},
      {"determinism", 0,
       [&]() -> Outcome {
         ensure_run();
         if (!run_error.empty()) return {false, run_error};
         try {
           cli_run(cli, fs::path(work) / "run_b");
         } catch (const std::exception& e) {
           return {false, e.what()};
         }
         const auto a = slurp(fs::path(work) / "run_a" / "metrics.csv");
         const auto b = slurp(fs::path(work) / "run_b" / "metrics.csv");
         return {!a.empty() && a == b, "metrics.csv " + std::string(a == b ? "identical" : "differs") + " across runs"};
       }},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0 && secs > c.max_seconds) {
      o.pass = false;
      o.detail += "; exceeded " + fmt("%.0f", c.max_seconds) + "s";
    }
    all &= o.pass;
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
