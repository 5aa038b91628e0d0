#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <geokern/string_kernel.hpp>

#include "support/oracles.hpp"

using namespace geokern;

namespace {

std::vector<std::string> grams_vec(const NGramProfile& p, int n) {
  const auto s = p.grams(n);
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("profile enumerates distinct n-grams") {
  const KernelConfig c3{3, 3, true};
  CHECK(grams_vec(profile("abcd", c3), 3) == std::vector<std::string>{"abc", "bcd"});

  const KernelConfig c2{2, 2, true};
  CHECK(grams_vec(profile("aaaa", c2), 2) == std::vector<std::string>{"aa"});

  CHECK(grams_vec(profile("ab", c3), 3).empty());
  CHECK(profile("", KernelConfig{}).self_similarity() == 0.0);
}

TEST_CASE("n-grams run over Unicode scalars, not bytes") {
  const KernelConfig c3{3, 3, true};
  const auto p = profile("zäme", c3);
  CHECK(grams_vec(p, 3) == std::vector<std::string>{"zäm", "äme"});

  // 4 scalars -> two 3-grams even though the text is 5 bytes
  CHECK(p.grams(3).size() == 2);
  CHECK_THROWS_AS(profile("\xff", c3), DataError);
}

TEST_CASE("kernel_value matches hand-counted cases") {
  const KernelConfig blended{3, 5, false};
  const auto x = profile("abcde", blended);
  CHECK(kernel_value(x, x) == 6.0);  // 3 + 2 + 1 distinct n-grams

  const KernelConfig c3{3, 3, false};
  CHECK(kernel_value(profile("abcab", c3), profile("abc", c3)) == 1.0);

  const KernelConfig norm{3, 5, true};
  const auto y = profile("grüezi mitenand", norm);
  CHECK(kernel_value(y, y) == 1.0);

  CHECK_THROWS_AS(kernel_value(profile("abc", c3), profile("abc", blended)), Error);
}

TEST_CASE("texts shorter than n_min have zero self-similarity") {
  const KernelConfig cfg{3, 5, true};
  const auto tiny = profile("ab", cfg);
  CHECK(tiny.self_similarity() == 0.0);
  CHECK(kernel_value(tiny, profile("abcdef", cfg)) == 0.0);
  CHECK(kernel_value(tiny, tiny) == 0.0);
}

TEST_CASE("kernel equals the explicit string-set oracle") {
  geokern::Rng rng(1234);
  const std::vector<KernelConfig> ranges = {
      {3, 3, false}, {3, 5, false}, {2, 7, false},
      {3, 3, true},  {3, 5, true},  {2, 7, true}};
  int checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t alpha = 5 + rng.below(26);
    const std::string a = oracles::random_text(rng, alpha, rng.below(41));
    const std::string b = oracles::random_text(rng, alpha, rng.below(41));
    for (const auto& cfg : ranges) {
      const double got = kernel_value(profile(a, cfg), profile(b, cfg));
      const double want = oracles::naive_kernel_value(a, b, cfg);
      if (cfg.normalize) {
        CHECK(got == Catch::Approx(want).epsilon(1e-12).margin(1e-15));
      } else {
        CHECK(got == want);  // exact: integer set intersections
      }
      ++checked;
    }
  }
  CHECK(checked >= 300);
}

TEST_CASE("kernel symmetry is exact") {
  geokern::Rng rng(77);
  const KernelConfig cfg{3, 5, true};
  for (int rep = 0; rep < 40; ++rep) {
    const auto x = profile(oracles::random_text(rng, 12, rng.below(30)), cfg);
    const auto y = profile(oracles::random_text(rng, 12, rng.below(30)), cfg);
    CHECK(kernel_value(x, y) == kernel_value(y, x));
  }
}

TEST_CASE("appending characters never decreases the unnormalized kernel") {
  geokern::Rng rng(99);
  const KernelConfig cfg{3, 5, false};
  for (int rep = 0; rep < 30; ++rep) {
    std::string x = oracles::random_text(rng, 8, 5 + rng.below(15));
    const auto y = profile(oracles::random_text(rng, 8, 5 + rng.below(15)), cfg);
    double prev = kernel_value(profile(x, cfg), y);
    for (int grow = 0; grow < 8; ++grow) {
      x += oracles::random_text(rng, 8, 1);
      const double next = kernel_value(profile(x, cfg), y);
      CHECK(next >= prev);
      prev = next;
    }
  }
}

TEST_CASE("gram matrix equals pairwise kernel values") {
  geokern::Rng rng(31);
  for (const bool normalize : {false, true}) {
    const KernelConfig cfg{3, 5, normalize};
    std::vector<std::string> texts;
    for (int i = 0; i < 3; ++i) texts.push_back(oracles::random_text(rng, 10, 15));
    const auto profiles = profile_all(texts, cfg);

    const KernelMatrix K = gram_matrix(profiles);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(K.at(i, j) == kernel_value(profiles[i], profiles[j]));

    // rectangular case against a different right-hand side
    std::vector<std::string> right_texts;
    for (int i = 0; i < 4; ++i) right_texts.push_back(oracles::random_text(rng, 10, 12));
    const auto right = profile_all(right_texts, cfg);
    const KernelMatrix R = gram_matrix(profiles, right);
    REQUIRE(R.rows() == 3);
    REQUIRE(R.cols() == 4);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(R.at(i, j) == kernel_value(profiles[i], right[j]));
  }
}

TEST_CASE("gram matrix is exactly symmetric and parallelism changes nothing") {
  geokern::Rng rng(47);
  const KernelConfig cfg{3, 5, true};
  std::vector<std::string> texts;
  for (int i = 0; i < 40; ++i) texts.push_back(oracles::random_text(rng, 14, 5 + rng.below(30)));
  const auto profiles = profile_all(texts, cfg);

  const KernelMatrix K1 = gram_matrix(profiles, profiles, 1);
  const KernelMatrix K4 = gram_matrix(profiles, profiles, 4);
  CHECK(K1.values.data == K4.values.data);  // bit-identical
  for (std::size_t i = 0; i < K1.rows(); ++i)
    for (std::size_t j = 0; j < K1.cols(); ++j)
      CHECK(K1.at(i, j) == K1.at(j, i));
}

TEST_CASE("texts sharing no n-grams give zero off-diagonals") {
  const KernelConfig cfg{3, 5, true};
  std::vector<std::string> texts = {"aaaaaa", "bbbbbb"};
  const auto profiles = profile_all(texts, cfg);
  const KernelMatrix K = gram_matrix(profiles);
  CHECK(K.at(0, 1) == 0.0);
  CHECK(K.at(1, 0) == 0.0);
  CHECK(K.at(0, 0) == 1.0);
}

TEST_CASE("gram matrix rejects empty input") {
  CHECK_THROWS_AS(gram_matrix(std::span<const NGramProfile>{}), DataError);
}

TEST_CASE("normalized gram matrix is positive semidefinite") {
  geokern::Rng rng(2024);
  const KernelConfig cfg{3, 5, true};
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i)
    texts.push_back(oracles::random_text(rng, 10, 3 + rng.below(35)));
  const auto profiles = profile_all(texts, cfg);
  const KernelMatrix K = gram_matrix(profiles);

  Eigen::MatrixXd M(K.rows(), K.cols());
  for (std::size_t i = 0; i < K.rows(); ++i)
    for (std::size_t j = 0; j < K.cols(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = K.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
}
