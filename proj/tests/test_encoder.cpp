#include <doctest.h>

#include <cmath>
#include <map>

#include "rumorlab/encoder.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/matrix.hpp"

using namespace rumorlab;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Hello, World!! 42x") == std::vector<std::string>{"hello", "world", "42x"});
  CHECK(tokenize("  --  ").empty());
  CHECK(tokenize("a_b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((EncoderConfig{1, 0}).validate(), ArgumentError);
  CHECK_NOTHROW((EncoderConfig{2, 0}).validate());
}

TEST_CASE("encode_message is deterministic and unit norm") {
  const EncoderConfig cfg{64, 3};
  const auto a = encode_message(cfg, "the quick brown fox jumps");
  CHECK(a == encode_message(cfg, "the quick brown fox jumps"));
  CHECK(norm2(a) == doctest::Approx(1.0).epsilon(1e-12));
  for (const char* t : {"x", "x x x x", "many different words in one message here"}) {
    CHECK(std::abs(norm2(encode_message(cfg, t)) - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(encode_message(cfg, ""), ArgumentError);
  CHECK_THROWS_AS(encode_message(cfg, "?!"), ArgumentError);
}

TEST_CASE("encoding equals normalized bias plus hashed counts") {
  const EncoderConfig cfg{16, 9};
  const std::string text = "red red blue green red";
  std::vector<double> expected(cfg.dim, 0.0);
  expected[0] = 1.0;
  for (const auto& tok : tokenize(text)) expected[token_slot(cfg, tok)] += 1.0;
  double norm = 0.0;
  for (double v : expected) norm += v * v;
  for (double& v : expected) v /= std::sqrt(norm);
  const auto got = encode_message(cfg, text);
  for (std::size_t i = 0; i < cfg.dim; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("slots stay in range and depend on the seed") {
  std::map<std::size_t, int> seen;
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const std::string tok = "tok" + std::to_string(i);
    const auto s = token_slot({32, 1}, tok);
    CHECK(s >= 1);
    CHECK(s < 32);
    ++seen[s];
    differs |= s != token_slot({32, 2}, tok);
  }
  CHECK(seen.size() > 20);
  CHECK(differs);
}

TEST_CASE("texts sharing no bucket have cosine equal to the bias product") {
  const EncoderConfig cfg{64, 0};
  // Find single-token texts in different buckets.
  std::string a = "w0", b;
  for (int i = 1; b.empty(); ++i) {
    const std::string cand = "w" + std::to_string(i);
    if (token_slot(cfg, cand) != token_slot(cfg, a)) b = cand;
  }
  const auto ea = encode_message(cfg, a + " " + a);
  const auto eb = encode_message(cfg, b);
  // Bias components: 1/sqrt(1 + 2^2) and 1/sqrt(1 + 1^2).
  CHECK(cosine(ea, eb) == doctest::Approx(1.0 / std::sqrt(5.0) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("encode_tree rows align with messages") {
  const EncoderConfig cfg{8, 0};
  const auto one = PropagationTree::from_texts({"solo"}, {}, Label::Rumor);
  const auto m1 = encode_tree(cfg, one);
  CHECK(m1.rows() == 1);
  CHECK(m1.cols() == 8);
  const auto dup = PropagationTree::from_texts({"a b", "c", "a b"}, {{0, 1}, {0, 2}}, Label::Rumor);
  const auto m = encode_tree(cfg, dup);
  CHECK(std::equal(m.row(0).begin(), m.row(0).end(), m.row(2).begin()));
  const auto row1 = encode_message(cfg, "c");
  CHECK(std::equal(row1.begin(), row1.end(), m.row(1).begin()));
  CHECK(encode_tree(cfg, dup) == m);
}
