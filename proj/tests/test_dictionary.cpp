#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sompns/dictionary.hpp"
#include "sompns/matrix_io.hpp"
#include "sompns/recovery.hpp"
#include "sompns/rng.hpp"
#include "sompns/signal_model.hpp"

#include "support/oracles.hpp"

#include <cmath>
#include <cstdio>

using namespace sompns;

namespace {

Dictionary two_atoms_with_inner_product(double g, Index rows = 2) {
  // atoms e1 and g*e1 + sqrt(1-g^2)*e2, so the coherence is exactly |g|
  Matrix a = Matrix::Zero(rows, 2);
  a(0, 0) = 1.0;
  a(0, 1) = g;
  a(1, 1) = std::sqrt(1.0 - g * g);
  return Dictionary(a);
}

Dictionary identity_dictionary(Index m) {
  return Dictionary(Matrix::Identity(m, m));
}

}  // namespace

TEST_CASE("gaussian dictionary columns are unit norm") {
  const Dictionary tall = generate_gaussian_dictionary(4, 1, 11);
  CHECK(std::abs(tall.entries().col(0).norm() - 1.0) <= 1e-6);

  const Dictionary paper_scale = generate_gaussian_dictionary(250, 1000, 42);
  double worst = 0.0;
  for (Index j = 0; j < paper_scale.cols(); ++j)
    worst = std::max(worst, std::abs(paper_scale.entries().col(j).norm() - 1.0));
  CHECK(worst <= 1e-6);
}

TEST_CASE("gaussian dictionary is deterministic in the seed") {
  const Dictionary a = generate_gaussian_dictionary(16, 64, 123);
  const Dictionary b = generate_gaussian_dictionary(16, 64, 123);
  CHECK(a.entries() == b.entries());
  const Dictionary c = generate_gaussian_dictionary(16, 64, 124);
  CHECK(a.entries() != c.entries());
}

TEST_CASE("rademacher dictionary entries and norms") {
  const Dictionary d = generate_rademacher_dictionary(4, 8, 5);
  for (Index j = 0; j < d.cols(); ++j) {
    for (Index i = 0; i < d.rows(); ++i) {
      const double v = d.entries()(i, j);
      CHECK((v == 0.5 || v == -0.5));
    }
    CHECK(d.entries().col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  const Dictionary e = generate_rademacher_dictionary(9, 3, 5);
  for (Index j = 0; j < e.cols(); ++j)
    for (Index i = 0; i < e.rows(); ++i)
      CHECK(std::abs(e.entries()(i, j)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("coherence of orthonormal and constructed pairs") {
  CHECK(coherence(identity_dictionary(2)) == doctest::Approx(0.0));
  const Dictionary d = two_atoms_with_inner_product(1.0 / std::sqrt(2.0));
  CHECK(coherence(d) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("coherence matches the pairwise brute-force oracle") {
  const Dictionary d = generate_gaussian_dictionary(8, 16, 77);
  CHECK(coherence(d) ==
        doctest::Approx(oracle::coherence_pairwise(d.entries())).epsilon(1e-13));
}

TEST_CASE("coherence rejects single-atom dictionaries") {
  const Dictionary d = generate_gaussian_dictionary(4, 1, 3);
  CHECK_THROWS_AS(coherence(d), InvalidInputError);
}

TEST_CASE("babel agrees with coherence at p = 1 and with enumeration") {
  const Dictionary d = generate_gaussian_dictionary(6, 10, 99);
  CHECK(babel(d, 1) == doctest::Approx(coherence(d)).epsilon(1e-12));
  CHECK(babel(d, 3) ==
        doctest::Approx(oracle::babel_enumerated(d.entries(), 3)).epsilon(1e-12));
}

TEST_CASE("babel is nondecreasing in p and below p * coherence") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dictionary d = generate_gaussian_dictionary(7, 12, seed);
    const double mu = coherence(d);
    double prev = 0.0;
    for (int p = 1; p <= 11; ++p) {
      const double value = babel(d, p);
      CHECK(value >= prev - 1e-12);
      CHECK(value <= p * mu + 1e-12);
      prev = value;
    }
  }
}

TEST_CASE("babel rejects out-of-range orders") {
  const Dictionary d = generate_gaussian_dictionary(6, 10, 4);
  CHECK_THROWS_AS(babel(d, 0), InvalidInputError);
  CHECK_THROWS_AS(babel(d, 10), InvalidInputError);
}

TEST_CASE("erc constant of an orthonormal dictionary is zero") {
  const Dictionary d = identity_dictionary(6);
  CHECK(erc_constant(d, Support({0, 2, 4})) == doctest::Approx(0.0));
}

TEST_CASE("erc constant of a single atom is its worst correlation") {
  const Dictionary d = generate_gaussian_dictionary(10, 20, 13);
  const double mu = coherence(d);
  for (Index j : {Index(0), Index(7), Index(19)}) {
    double direct = 0.0;
    for (Index i = 0; i < d.cols(); ++i)
      if (i != j)
        direct = std::max(direct, std::abs(d.entries().col(j).dot(d.entries().col(i))));
    const double value = erc_constant(d, Support({j}));
    CHECK(value == doctest::Approx(direct).epsilon(1e-12));
    CHECK(value <= mu + 1e-12);
  }
}

TEST_CASE("erc constant matches a per-column least-squares oracle") {
  Rng rng(2024);
  for (int rep = 0; rep < 5; ++rep) {
    const Dictionary d = generate_gaussian_dictionary(16, 32, 100 + rep);
    const Support s = sample_support(32, 4, rng);
    CHECK(erc_constant(d, s) ==
          doctest::Approx(oracle::erc_least_squares(d.entries(), s.indices()))
              .epsilon(1e-10));
  }
}

TEST_CASE("erc constant is invariant under permutations within S and Sbar") {
  const Dictionary d = generate_gaussian_dictionary(12, 24, 55);
  // Support construction sorts, so feed shuffled index lists
  const double a = erc_constant(d, Support({3, 9, 17, 21}));
  const double b = erc_constant(d, Support({21, 3, 17, 9}));
  CHECK(a == b);
}

TEST_CASE("erc constant flags rank-deficient supports") {
  Matrix a(3, 3);
  a.col(0) << 1.0, 0.0, 0.0;
  a.col(1) << 0.0, 1.0, 0.0;
  a.col(2) << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const Dictionary d{Matrix(a)};
  // {e1, e2, (e1+e2)/sqrt(2)} spans only a plane
  CHECK_THROWS_AS(erc_constant(d, Support({0, 1, 2})), RankDeficiencyError);
  CHECK_NOTHROW(erc_constant(d, Support({0, 1})));
}

TEST_CASE("exact ric is zero for orthonormal atoms and order one") {
  CHECK(exact_ric(identity_dictionary(5), 3) == doctest::Approx(0.0));
  const Dictionary d = generate_gaussian_dictionary(8, 12, 7);
  CHECK(exact_ric(d, 1) == doctest::Approx(0.0));
}

TEST_CASE("exact ric of order two equals the coherence") {
  const Dictionary d = generate_gaussian_dictionary(8, 12, 21);
  const double mu = coherence(d);
  const double delta2 = exact_ric(d, 2);
  CHECK(delta2 == doctest::Approx(mu).epsilon(1e-10));
  CHECK(delta2 <= mu + 1e-12);
}

TEST_CASE("exact ric respects the enumeration budget") {
  const Dictionary d = generate_gaussian_dictionary(8, 30, 3);
  CHECK_THROWS_AS(exact_ric(d, 4, 100), BudgetError);
}

TEST_CASE("ric coherence bound values and vacuity") {
  const Dictionary d = two_atoms_with_inner_product(0.1);
  CHECK(ric_coherence_bound(d, 1).value == doctest::Approx(0.0));
  const BoundValue b5 = ric_coherence_bound(d, 5, false);
  CHECK(b5.value == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_FALSE(b5.vacuous);

  const Dictionary tight = two_atoms_with_inner_product(0.9);
  CHECK(ric_coherence_bound(tight, 3, false).vacuous);
}

TEST_CASE("exact ric never exceeds the coherence bound when non-vacuous") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Dictionary d = generate_gaussian_dictionary(8, 12, 1000 + seed);
    for (int s : {2, 3}) {
      const BoundValue bound = ric_coherence_bound(d, s, false);
      const BoundValue babel_bound = ric_coherence_bound(d, s, true);
      const double delta = exact_ric(d, s);
      if (!bound.vacuous) {
        CHECK(delta <= bound.value + 1e-10);
        ++checked;
      }
      if (!babel_bound.vacuous) {
        CHECK(delta <= babel_bound.value + 1e-10);
        CHECK(babel_bound.value <= bound.value + 1e-12);
      }
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("spark lower bound boundary cases") {
  CHECK(spark_lower_bound(identity_dictionary(4)) == 5);
  // (s-1)*mu < 1 must be strict: mu = 0.5 admits s = 2, not 3
  CHECK(spark_lower_bound(two_atoms_with_inner_product(0.5, 8)) == 2);
  CHECK(spark_lower_bound(two_atoms_with_inner_product(0.3, 8)) == 4);
  // direct enumeration of the strict inequality on random dictionaries
  for (std::uint64_t seed : {10u, 20u, 30u}) {
    const Dictionary d = generate_gaussian_dictionary(6, 12, seed);
    const double mu = coherence(d);
    const Index got = spark_lower_bound(d);
    Index expect = 1;
    while (static_cast<double>(expect) * mu < 1.0) ++expect;  // s-1 = expect
    expect = std::min(expect, d.rows() + 1);
    CHECK(got == expect);
  }
}

TEST_CASE("greedy selection ratio basics") {
  const Dictionary d = identity_dictionary(4);
  Matrix residual = Matrix::Zero(4, 2);
  residual.col(0) = d.entries().col(1);
  residual.col(1) = d.entries().col(1);
  const WeightVector w = WeightVector::ones(2);

  const SelectionRatio aligned =
      greedy_selection_ratio(d, Support({1, 2}), residual, w);
  CHECK_FALSE(aligned.degenerate);
  CHECK(aligned.value == doctest::Approx(0.0));

  // residual orthogonal to Phi_S
  const SelectionRatio degenerate =
      greedy_selection_ratio(d, Support({0, 3}), residual, w);
  CHECK(degenerate.degenerate);
  CHECK(std::isinf(degenerate.value));
}

TEST_CASE("selection ratio below one iff the winning atom is in support") {
  Rng rng(4242);
  const WeightVector w{(Vector(2) << 1.0, 0.7).finished()};
  int in_support_hits = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const Dictionary d = generate_gaussian_dictionary(10, 24, 500 + rep);
    const Support s = sample_support(24, 3, rng);
    Matrix residual = oracle::random_matrix(10, 2, rng);
    const SelectionRatio ratio = greedy_selection_ratio(d, s, residual, w);
    REQUIRE_FALSE(ratio.degenerate);
    const auto [j, value] = select_atom(d, residual, w);
    (void)value;
    if (ratio.value < 1.0) {
      CHECK(s.contains(j));
      ++in_support_hits;
    } else if (ratio.value > 1.0) {
      CHECK_FALSE(s.contains(j));
    }
  }
  CHECK(in_support_hits > 0);
}

TEST_CASE("mixed norm duality on random matrices") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = oracle::random_matrix(5 + rep, 9, rng);
    CHECK(matrix_inf_norm(a) == oracle::max_row_abs_sum(a));
    CHECK(matrix_inf_norm(a) == oracle::max_col_abs_sum(a.transpose()));
    CHECK(matrix_one_norm(a) == oracle::max_col_abs_sum(a));
  }
}

TEST_CASE("dictionary csv round trip preserves metrics to 1e-9") {
  const Dictionary d = generate_gaussian_dictionary(12, 30, 321);
  const std::string path = "roundtrip_dict_test.csv";
  store_dictionary(d, path);
  const Dictionary loaded = load_dictionary(path);
  std::remove(path.c_str());

  CHECK(std::abs(coherence(loaded) - coherence(d)) <= 1e-9);
  CHECK(std::abs(babel(loaded, 4) - babel(d, 4)) <= 1e-9);
  const Support s({1, 5, 9});
  CHECK(std::abs(erc_constant(loaded, s) - erc_constant(d, s)) <= 1e-9);
  CHECK(std::abs(exact_ric(loaded, 2) - exact_ric(d, 2)) <= 1e-9);
}

TEST_CASE("matrix csv parser rejects malformed input") {
  CHECK_THROWS_AS(parse_matrix_csv_string(""), ConfigError);
  CHECK_THROWS_AS(parse_matrix_csv_string("1,2\n3,4\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_csv_string("# dims 2 2\n1,2\n3\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_csv_string("# dims 2 2\n1,2,9\n3,4\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_matrix_csv_string("# dims 2 2\n1,x\n3,4\n"),
                  ConfigError);
}

TEST_CASE("dictionary validation rejects bad columns") {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 0.0, 0.0;  // second column norm 2
  CHECK_THROWS_AS(Dictionary{bad}, InvalidInputError);
}
