#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/sincon.hpp"

using namespace rumorlab;

namespace {

PropagationTree chain(std::size_t n) {
  std::vector<std::string> texts(n, "t");
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(i - 1, i);
  return PropagationTree::from_texts(texts, edges, Label::Rumor);
}

std::vector<double> random_vec(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(d);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("mask sizes") {
  CHECK(mask_size(3) == 1);
  CHECK(mask_size(10) == 1);
  CHECK(mask_size(11) == 2);
  CHECK(mask_size(25) == 3);
  CHECK(mask_size(100) == 10);
}

TEST_CASE("make_views on a path excludes the root") {
  const auto t = chain(3);
  Matrix x(3, 2, 1.0);
  const auto ranking = rank_by_influence(t);
  REQUIRE(ranking.order == std::vector<std::size_t>{1, 0, 2});
  const auto v = make_views(t, x, ranking);
  CHECK(v.imp_mask == std::vector<std::size_t>{1});
  CHECK(v.ump_mask == std::vector<std::size_t>{2});
  CHECK(v.imp_features(1, 0) == 0.0);
  CHECK(v.imp_features(2, 0) == 1.0);
  CHECK(v.ump_features(2, 1) == 0.0);
  CHECK(v.ump_features(0, 0) == 1.0);
}

TEST_CASE("make_views invariants on random trees") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    const auto t = oracle::random_tree(n, rng);
    const Matrix x = oracle::random_features(n, 3, rng);
    const auto v = make_views(t, x, rank_by_influence(t));
    const std::size_t k = std::max<std::size_t>(1, (n + 9) / 10);
    CHECK(v.imp_mask.size() == k);
    CHECK(v.ump_mask.size() == k);
    std::set<std::size_t> both(v.imp_mask.begin(), v.imp_mask.end());
    both.insert(v.ump_mask.begin(), v.ump_mask.end());
    CHECK(both.size() == 2 * k);
    CHECK(both.count(0) == 0);
    // imp holds the highest-ranked non-root nodes.
    const auto order = oracle::rank(oracle::influence(n, t.edges()));
    std::vector<std::size_t> top;
    for (std::size_t u : order)
      if (u != 0 && top.size() < k) top.push_back(u);
    CHECK(v.imp_mask == top);
  }
}

TEST_CASE("views reject trees too small for disjoint masks") {
  const auto t = chain(2);
  Matrix x(2, 2, 1.0);
  CHECK_THROWS_AS(make_views(t, x, rank_by_influence(t)), DegenerateInputError);
  CHECK_THROWS_AS(make_random_views(t, x, 1), DegenerateInputError);
}

TEST_CASE("random views") {
  std::mt19937_64 rng(6);
  const auto t = oracle::random_tree(10, rng);
  const Matrix x = oracle::random_features(10, 3, rng);
  const auto a = make_random_views(t, x, 42);
  const auto b = make_random_views(t, x, 42);
  CHECK(a.imp_mask == b.imp_mask);
  CHECK(a.ump_mask == b.ump_mask);
  CHECK(a.imp_mask.size() == 1);
  CHECK(a.ump_mask.size() == 1);
  bool varied = false;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto v = make_random_views(t, x, s);
    CHECK(v.imp_mask[0] != 0);
    CHECK(v.ump_mask[0] != 0);
    CHECK(v.imp_mask[0] != v.ump_mask[0]);
    varied |= v.imp_mask != a.imp_mask;
  }
  CHECK(varied);
}

TEST_CASE("sim_kernel examples") {
  const std::vector<double> a{1, 2, 3}, o1{1, 0}, o2{0, 1}, z{0, 0, 0};
  CHECK(sim_kernel(a, a, 1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(sim_kernel(o1, o2, 0.5) == doctest::Approx(1.0));
  CHECK(sim_kernel(a, a, 0.5) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(sim_kernel(a, a, 0.0), ArgumentError);
  CHECK_THROWS_AS(sim_kernel(a, a, -1.0), ArgumentError);
  CHECK_THROWS_AS(sim_kernel(a, z, 1.0), ArgumentError);
}

TEST_CASE("contrastive loss of one example with identical summaries is -log 3") {
  const std::vector<double> s{0.3, -0.2, 0.9};
  for (double tau : {0.1, 0.5, 2.0}) {
    const std::vector<SummaryTriple> b{{s, s, s}};
    const auto l = sincon_loss(b, tau);
    CHECK(l.mean == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("contrastive loss matches the brute-force oracle") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t B = 1 + rng() % 4, d = 1 + rng() % 8;
    const double tau = 0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<SummaryTriple> b;
    std::vector<oracle::Triple> o;
    for (std::size_t i = 0; i < B; ++i) {
      b.push_back({random_vec(d, rng), random_vec(d, rng), random_vec(d, rng)});
      o.push_back({b.back().original, b.back().imp, b.back().ump});
    }
    const auto got = sincon_loss(b, tau);
    const auto expect = oracle::contrastive(o, tau);
    double mean = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      CHECK(std::abs(got.loss[i] - expect[i]) < 1e-9);
      CHECK(got.positive[i] > 0.0);
      CHECK(got.negative[i] > 0.0);
      mean += expect[i] / static_cast<double>(B);
    }
    CHECK(std::abs(got.mean - mean) < 1e-9);

    // Positive rescaling leaves the loss unchanged.
    for (auto& t : b) {
      for (double& v : t.original) v *= 3.0;
      for (double& v : t.imp) v *= 3.0;
      for (double& v : t.ump) v *= 3.0;
    }
    CHECK(std::abs(sincon_loss(b, tau).mean - got.mean) < 1e-12);
  }
}

TEST_CASE("contrastive loss rejects zero summaries") {
  const std::vector<SummaryTriple> b{{{1, 0}, {0, 0}, {0, 1}}};
  CHECK_THROWS_AS(sincon_loss(b, 0.5), ArgumentError);
}

namespace {

struct Fixture {
  std::vector<PropagationTree> trees;
  std::vector<Matrix> feats;
  std::vector<AugmentedViews> views;
  std::vector<ViewedExample> batch;
  ModelParams params;

  explicit Fixture(std::uint64_t seed, std::size_t B = 3) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < B; ++i) {
      trees.push_back(oracle::random_tree(3 + rng() % 8, rng, i % 2 ? Label::Rumor : Label::NonRumor));
      feats.push_back(oracle::random_features(trees.back().size(), 5, rng));
    }
    for (std::size_t i = 0; i < B; ++i) views.push_back(make_views(trees[i], feats[i], rank_by_influence(trees[i])));
    for (std::size_t i = 0; i < B; ++i) batch.push_back({&trees[i], &feats[i], &views[i], trees[i].label()});
    params = init_params({Architecture::Gcn, {6, 4}}, 5, seed);
  }

  double sup(bool imp, bool ump) const {
    double s = 0.0;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      const Matrix& f = imp ? views[i].imp_features : ump ? views[i].ump_features : feats[i];
      const auto p = forward(params, trees[i], f);
      s += -std::log(p.probs[class_index(trees[i].label())]);
    }
    return s;
  }

  double contrast(double tau) const {
    std::vector<oracle::Triple> o;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      o.push_back({forward(params, trees[i], feats[i]).summary, forward(params, trees[i], views[i].imp_features).summary,
                   forward(params, trees[i], views[i].ump_features).summary});
    }
    double m = 0.0;
    for (double l : oracle::contrastive(o, tau)) m += l / static_cast<double>(o.size());
    return m;
  }
};

}  // namespace

TEST_CASE("total loss composes its parts") {
  const Fixture f(31);
  const double sup = f.sup(false, false);
  CHECK(total_loss(f.params, f.batch, {0.5, 0.0, 0.0}) == sup);
  CHECK(total_loss(f.params, f.batch, {0.5, 1.0, 0.0}) ==
        doctest::Approx(sup + f.sup(true, false) + f.sup(false, true)).epsilon(1e-12));
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const Fixture g(seed, 1 + seed % 4);
    const LossWeights w{0.7, 0.3, 0.2};
    const double expect = g.sup(false, false) + w.alpha1 * (g.sup(true, false) + g.sup(false, true)) +
                          w.alpha2 * g.contrast(w.tau);
    CHECK(std::abs(total_loss(g.params, g.batch, w) - expect) < 1e-12);
  }
}

TEST_CASE("influence gap") {
  const Fixture f(5, 4);
  for (std::size_t i = 0; i < f.trees.size(); ++i) {
    const double gap = influence_gap(f.params, f.trees[i], f.views[i]);
    CHECK(gap >= 0.0);
    CHECK(gap <= 2.0);
    const auto pi = forward(f.params, f.trees[i], f.views[i].imp_features).probs;
    const auto pu = forward(f.params, f.trees[i], f.views[i].ump_features).probs;
    CHECK(gap == doctest::Approx(std::abs(pu[0] - pi[0]) + std::abs(pu[1] - pi[1])).epsilon(1e-12));
  }
  AugmentedViews same = f.views[0];
  same.ump_mask = same.imp_mask;
  same.ump_features = same.imp_features;
  CHECK(influence_gap(f.params, f.trees[0], same) == 0.0);
}
