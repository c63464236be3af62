#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rumorlab/corpus_io.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/mpt.hpp"

using namespace rumorlab;

namespace {

PropagationTree path3() { return PropagationTree::from_texts({"a", "b", "c"}, {{0, 1}, {1, 2}}, Label::Rumor); }

PropagationTree star(std::size_t leaves) {
  std::vector<std::string> texts(leaves + 1, "x");
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return PropagationTree::from_texts(texts, edges, Label::NonRumor);
}

Matrix rows(std::vector<std::vector<double>> r) {
  Matrix m(r.size(), r.front().size());
  for (std::size_t i = 0; i < r.size(); ++i) std::copy(r[i].begin(), r[i].end(), m.row(i).begin());
  return m;
}

}  // namespace

TEST_CASE("tree construction rejects malformed shapes") {
  CHECK_NOTHROW(path3());
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", "b", "c"}, {{0, 1}, {0, 2}, {1, 2}}, Label::Rumor),
                  ArgumentError);
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", "b", "c"}, {{0, 1}}, Label::Rumor), ArgumentError);
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", "b"}, {{1, 0}}, Label::Rumor), ArgumentError);
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", "b"}, {{1, 1}}, Label::Rumor), ArgumentError);
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", ""}, {{0, 1}}, Label::Rumor), ArgumentError);
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", "b", "c"}, {{0, 1}, {2, 3}}, Label::Rumor), ArgumentError);
  // 1 -> 2 -> 1 cycle detached from the root.
  CHECK_THROWS_AS(PropagationTree::from_texts({"a", "b", "c"}, {{2, 1}, {1, 2}}, Label::Rumor), ArgumentError);
}

TEST_CASE("degree") {
  const auto p = path3();
  CHECK(degree(p, 0) == 1);
  CHECK(degree(p, 1) == 2);
  CHECK(degree(star(4), 0) == 4);
  CHECK_THROWS_AS(degree(p, 3), ArgumentError);
}

TEST_CASE("influence score examples") {
  const auto p = path3();
  CHECK(influence_score(p, 1) == doctest::Approx(4.8284271247).epsilon(1e-10));
  CHECK(influence_score(p, 0) == doctest::Approx(2.4142135624).epsilon(1e-10));
  CHECK(influence_score(PropagationTree::from_texts({"a"}, {}, Label::Rumor), 0) == 0.0);
  CHECK_THROWS_AS(influence_score(p, 7), ArgumentError);
}

TEST_CASE("rank_by_influence examples") {
  CHECK(rank_by_influence(path3()).order == std::vector<std::size_t>{1, 0, 2});
  CHECK(rank_by_influence(star(4)).order.front() == 0);
  CHECK(rank_by_influence(PropagationTree::from_texts({"a"}, {}, Label::Rumor)).order == std::vector<std::size_t>{0});
  CHECK(most_influential(path3()) == 1);
}

TEST_CASE("ranking and degrees agree with brute force on random trees") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const auto tree = oracle::random_tree(n, rng);
    const auto d = oracle::degrees(n, tree.edges());
    std::size_t total = 0;
    for (std::size_t u = 0; u < n; ++u) {
      CHECK(degree(tree, u) == d[u]);
      total += degree(tree, u);
    }
    CHECK(total == 2 * tree.edges().size());
    const auto expected = oracle::influence(n, tree.edges());
    const auto ranking = rank_by_influence(tree);
    for (std::size_t u = 0; u < n; ++u) CHECK(ranking.scores[u] == doctest::Approx(expected[u]).epsilon(1e-12));
    CHECK(ranking.order == oracle::rank(ranking.scores));
  }
}

TEST_CASE("pair homophily") {
  const auto f = rows({{1, 0}, {0, 1}, {-1, 0}, {2, 0}});
  CHECK(pair_homophily(f, 0, 0) == doctest::Approx(1.0));
  CHECK(pair_homophily(f, 0, 1) == doctest::Approx(0.0));
  CHECK(pair_homophily(f, 0, 2) == doctest::Approx(-1.0));
  CHECK(pair_homophily(f, 0, 3) == doctest::Approx(1.0));
  CHECK(pair_homophily(f, 1, 3) == pair_homophily(f, 3, 1));
  const auto z = rows({{1, 0}, {0, 0}});
  CHECK_THROWS_AS(pair_homophily(z, 0, 1), DegenerateInputError);
}

TEST_CASE("root homophily") {
  const auto t5 = PropagationTree::from_texts({"a", "a", "a", "a", "a"}, {{0, 1}, {0, 2}, {1, 3}, {1, 4}}, Label::Rumor);
  CHECK(root_homophily(t5, rows({{0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}})) == doctest::Approx(1.0));
  const auto t3 = PropagationTree::from_texts({"a", "b", "c"}, {{0, 1}, {0, 2}}, Label::Rumor);
  CHECK(root_homophily(t3, rows({{1, 0}, {0, 1}, {0, -1}})) == doctest::Approx(0.0));
  CHECK(root_homophily(t3, rows({{1, 0}, {1, 0}, {0, 1}})) == doctest::Approx(0.5));
  // Positive row scaling changes nothing.
  CHECK(root_homophily(t3, rows({{5, 0}, {0.1, 0}, {0, 7}})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(root_homophily(PropagationTree::from_texts({"a"}, {}, Label::Rumor), rows({{1, 0}})),
                  DegenerateInputError);
}

TEST_CASE("with_leaf grows by one injected leaf") {
  const auto p = path3();
  const auto q = p.with_leaf(1, "new", true);
  CHECK(q.size() == 4);
  CHECK(q.parent(3) == 1);
  CHECK(q.message(3).injected);
  CHECK(q.injected_count() == 1);
  CHECK(p.size() == 3);
  CHECK_THROWS_AS(p.with_leaf(5, "x", true), ArgumentError);
}

TEST_CASE("corpus round trip") {
  std::mt19937_64 rng(5);
  Corpus corpus;
  corpus.push_back(PropagationTree::from_texts({"only the root"}, {}, Label::NonRumor));
  for (int i = 0; i < 5; ++i) corpus.push_back(oracle::random_tree(2 + i * 3, rng, i % 2 ? Label::Rumor : Label::NonRumor));
  corpus.push_back(corpus[2].with_leaf(0, "injected \"quoted\" text", true));

  const auto dir = std::filesystem::temp_directory_path() / "rumorlab_test_corpus";
  std::filesystem::create_directories(dir);
  save_corpus(corpus, dir / "c.json");
  CHECK(load_corpus(dir / "c.json") == corpus);
  CHECK(parse_corpus(serialize_corpus(corpus)) == corpus);

  std::ofstream(dir / "empty.json") << "";
  CHECK(load_corpus(dir / "empty.json").empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("corpus parse errors name the record and field") {
  const std::string two_parents =
      R"({"trees":[{"label":"rumor","messages":[{"text":"a","injected":false},{"text":"b","injected":false},)"
      R"({"text":"c","injected":false}],"edges":[[0,2],[1,2]]}]})";
  CHECK_THROWS_AS(parse_corpus(two_parents), ParseError);
  try {
    parse_corpus(R"({"trees":[{"label":"rumor","messages":[{"text":"a"}],"edges":[]},{"label":"maybe","messages":[{"text":"a"}],"edges":[]}]})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("record 1") != std::string::npos);
    CHECK(what.find("label") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_corpus("{not json"), ParseError);
}
