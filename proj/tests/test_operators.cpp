#include <cmath>
#include <random>

#include "doctest.h"
#include "hwl/operators.hpp"
#include "oracle.hpp"

using namespace hwl;

namespace {

LeafFunction lf(int depth, std::vector<double> v) { return LeafFunction(DyadicModel(depth), std::move(v)); }
Weight wt(int depth, std::vector<double> v) { return Weight(lf(depth, std::move(v))); }

SignPattern random_sigma(std::mt19937_64& rng, const DyadicModel& m) {
  SignPattern s(m);
  for (std::size_t h = 0; h < m.internal_count(); ++h) s.set_heap(h, (rng() & 1) ? -1 : 1);
  return s;
}

std::vector<int> as_ints(const SignPattern& s) { return {s.signs().begin(), s.signs().end()}; }

std::vector<double> vec(const LeafFunction& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

TEST_CASE("sign pattern construction") {
  const DyadicModel m(2);
  const SignPattern s = SignPattern::from_bits(m, 0b101);
  CHECK(s.at_heap(0) == -1);
  CHECK(s.at_heap(1) == 1);
  CHECK(s.at_heap(2) == -1);
  CHECK(s.negated().at_heap(0) == 1);
  CHECK_THROWS_AS(SignPattern(m, std::vector<signed char>{1, 1}), Error);
  CHECK_THROWS_AS(SignPattern(m, std::vector<signed char>{1, 0, 1}), Error);
}

TEST_CASE("T_sigma examples") {
  std::mt19937_64 rng(3);
  const DyadicModel m(3);
  auto f = oracle::random_function(rng, 8);
  const double mean = oracle::integral(f);
  for (auto& x : f) x -= mean;
  const LeafFunction g = apply_T_sigma(lf(3, f), SignPattern(m));
  for (std::size_t i = 0; i < 8; ++i) CHECK(g[i] == doctest::Approx(f[i]).epsilon(1e-13));

  const LeafFunction c = apply_T_sigma(LeafFunction::constant(m, 3.0), random_sigma(rng, m));
  for (double x : c.values()) CHECK(std::abs(x) <= 1e-14);

  const LeafFunction d = apply_T_sigma(lf(1, {2, 0}), SignPattern(DyadicModel(1), -1));
  CHECK(d[0] == doctest::Approx(-1.0));
  CHECK(d[1] == doctest::Approx(1.0));
}

TEST_CASE("weighted T_sigma examples") {
  const DyadicModel m(2);
  const LeafFunction f = lf(2, {1, -1, 0.5, -0.5});
  const Weight one(LeafFunction::constant(m, 1.0));
  const LeafFunction g = apply_weighted_T_sigma(f, SignPattern(m), one, one);
  for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(f[i]));
  const LeafFunction z = apply_weighted_T_sigma(LeafFunction::constant(m, 0.0), SignPattern(m), one, one);
  for (double x : z.values()) CHECK(x == 0.0);
  const LeafFunction h =
      apply_weighted_T_sigma(lf(1, {2, 0}), SignPattern(DyadicModel(1), -1), wt(1, {4, 4}), wt(1, {1, 1}));
  CHECK(h[0] == doctest::Approx(-2.0));
  CHECK(h[1] == doctest::Approx(2.0));
}

TEST_CASE("property: weighted T_sigma matches the dense oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 40; ++t) {
    const int depth = 1 + t % 5;
    const DyadicModel m(depth);
    const auto v = oracle::random_weight(rng, m.leaf_count()), w = oracle::random_weight(rng, m.leaf_count());
    const auto f = oracle::random_function(rng, m.leaf_count());
    const SignPattern s = random_sigma(rng, m);
    const Eigen::MatrixXd M = oracle::weighted_T_sigma(depth, as_ints(s), v, w);
    const Eigen::VectorXd want = M * Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
    const LeafFunction got = apply_weighted_T_sigma(lf(depth, f), s, wt(depth, v), wt(depth, w));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(got[i] == doctest::Approx(want(i)).epsilon(1e-11));
  }
}

TEST_CASE("property: sign flip covariance is exact") {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 30; ++t) {
    const int depth = 1 + t % 6;
    const DyadicModel m(depth);
    const LeafFunction f = lf(depth, oracle::random_function(rng, m.leaf_count()));
    const SignPattern s = random_sigma(rng, m);
    const LeafFunction a = apply_T_sigma(f, s), b = apply_T_sigma(f, s.negated());
    for (std::size_t i = 0; i < m.leaf_count(); ++i) CHECK(a[i] == -b[i]);
    CHECK(std::abs(a.integral()) <= 1e-13);
  }
}

TEST_CASE("T0 examples") {
  const DyadicModel m(2);
  const AlphaCoefficients zero(m, 1, 0.0);
  const LeafFunction t0 = apply_T0(LeafFunction::constant(m, 1.0), zero);
  for (double x : t0.values()) CHECK(x == 0.0);
  AlphaCoefficients root(DyadicModel(1), 0, 0.0);
  root[{0, 0}] = 1.0;
  const LeafFunction r = apply_T0(LeafFunction::constant(DyadicModel(1), 1.0), root);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(1.0));
}

TEST_CASE("kernel examples") {
  AlphaCoefficients root(DyadicModel(1), 0, 0.0);
  root[{0, 0}] = 1.0;
  const KernelMatrix k = kernel_matrix(root);
  for (double x : k.data()) CHECK(x == doctest::Approx(1.0));
  const KernelMatrix z = kernel_matrix(AlphaCoefficients(DyadicModel(3), 2, 0.0));
  for (double x : z.data()) CHECK(x == 0.0);
}

TEST_CASE("property: kernel, T0 and the oracle agree; positivity and monotonicity") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const int depth = 1 + t % 6;
    const DyadicModel m(depth);
    AlphaCoefficients a(m, depth - 1);
    std::vector<double> av(m.internal_count());
    for (std::size_t h = 0; h < av.size(); ++h) a.at_heap(h) = av[h] = u(rng);
    const KernelMatrix k = kernel_matrix(a);
    const std::vector<double> ones(m.leaf_count(), 1.0);
    const Eigen::MatrixXd ref = oracle::weighted_T0(depth, av, ones, ones);
    const std::size_t n = m.leaf_count();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(k(i, j) == k(j, i));
        CHECK(k(i, j) >= 0.0);
        CHECK(k(i, j) / static_cast<double>(n) == doctest::Approx(ref(i, j)).epsilon(1e-12));
      }
    std::vector<double> f(n), f2(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = u(rng);
      f2[i] = f[i] + u(rng);
    }
    const LeafFunction T = apply_T0(lf(depth, f), a), T2 = apply_T0(lf(depth, f2), a);
    const auto via_kernel = k.apply(f);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(T[i] >= 0.0);
      CHECK(T[i] <= T2[i]);
      CHECK(T[i] == doctest::Approx(via_kernel[i] / static_cast<double>(n)).epsilon(1e-10));
    }
  }
}

TEST_CASE("square function examples and properties") {
  const LeafFunction flat = square_function(LeafFunction::constant(DyadicModel(3), 5.0));
  for (double x : flat.values()) CHECK(x == 0.0);
  const LeafFunction s = square_function(lf(1, {1, -1}));
  CHECK(s[0] == doctest::Approx(2.0));
  CHECK(s[1] == doctest::Approx(2.0));

  std::mt19937_64 rng(29);
  for (int t = 0; t < 30; ++t) {
    const int depth = 1 + t % 5;
    const DyadicModel m(depth);
    const auto f = oracle::random_function(rng, m.leaf_count());
    const LeafFunction S = square_function(lf(depth, f));
    const LeafFunction S3 = square_function(-3.0 * lf(depth, f));
    for (std::size_t i = 0; i < m.leaf_count(); ++i) {
      double sum = 0;
      for (auto n : oracle::internal_nodes(depth))
        if (i >= oracle::first(depth, n) && i < oracle::last(depth, n)) {
          const double d = oracle::avg(f, depth, oracle::left(n)) - oracle::avg(f, depth, oracle::right(n));
          sum += d * d;
        }
      CHECK(S[i] == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
      CHECK(S3[i] == doctest::Approx(3 * S[i]).epsilon(1e-12));
      CHECK(S[i] > 0.0);
    }
  }
}

TEST_CASE("four sums examples") {
  std::mt19937_64 rng(31);
  const DyadicModel m(3);
  const Weight one(LeafFunction::constant(m, 1.0));
  const LeafFunction f = lf(3, oracle::random_function(rng, 8)), g = lf(3, oracle::random_function(rng, 8));
  const SignPattern s = random_sigma(rng, m);
  const FourSumDecomposition d = four_sum_decomposition(f, g, s, one, one);
  CHECK(std::abs(d.sigma2) <= 1e-14);
  CHECK(std::abs(d.sigma3) <= 1e-14);
  CHECK(std::abs(d.sigma4) <= 1e-14);
  CHECK(d.sigma1 == doctest::Approx(apply_T_sigma(f, s).inner(g)).epsilon(1e-12));

  const Weight w = wt(3, oracle::random_weight(rng, 8));
  const FourSumDecomposition z = four_sum_decomposition(LeafFunction::constant(m, 0.0), g, s, w, w);
  CHECK(z.sigma1 == 0.0);
  CHECK(z.sigma2 == 0.0);
  CHECK(z.sigma3 == 0.0);
  CHECK(z.sigma4 == 0.0);

  const Weight w2 = wt(2, {1, 3, 2, 2}), v2 = wt(2, {2, 1, 1, 1});
  const auto fv = oracle::random_function(rng, 4), gv = oracle::random_function(rng, 4);
  const SignPattern s2 = random_sigma(rng, DyadicModel(2));
  const FourSumDecomposition e = four_sum_decomposition(lf(2, fv), lf(2, gv), s2, v2, w2);
  const Eigen::MatrixXd M = oracle::weighted_T_sigma(2, as_ints(s2), {2, 1, 1, 1}, {1, 3, 2, 2});
  const double direct = Eigen::Map<const Eigen::VectorXd>(gv.data(), 4).dot(
                            M * Eigen::Map<const Eigen::VectorXd>(fv.data(), 4)) / 4.0;
  CHECK(std::abs(e.total - direct) <= 1e-9 * (1 + std::abs(direct)));
  CHECK(e.total == doctest::Approx(e.sigma1 + e.sigma2 + e.sigma3 + e.sigma4).epsilon(1e-12));
}

TEST_CASE("property: four sums reproduce the bilinear form") {
  std::mt19937_64 rng(37);
  double worst = 0;
  for (int t = 0; t < 500; ++t) {
    const int depth = 1 + t % 5;
    const DyadicModel m(depth);
    const auto v = oracle::random_weight(rng, m.leaf_count(), 1.2), w = oracle::random_weight(rng, m.leaf_count(), 1.2);
    const auto f = oracle::random_function(rng, m.leaf_count()), g = oracle::random_function(rng, m.leaf_count());
    const SignPattern s = random_sigma(rng, m);
    const FourSumDecomposition d = four_sum_decomposition(lf(depth, f), lf(depth, g), s, wt(depth, v), wt(depth, w));
    const Eigen::MatrixXd M = oracle::weighted_T_sigma(depth, as_ints(s), v, w);
    const double direct = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size())
                              .dot(M * Eigen::Map<const Eigen::VectorXd>(f.data(), f.size())) /
                          static_cast<double>(f.size());
    worst = std::max(worst, std::abs(d.total - direct) / (1 + std::abs(d.total)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("embedding and bilinear T0 forms") {
  const DyadicModel m(2);
  const Weight one(LeafFunction::constant(m, 1.0));
  CHECK(embedding_form(LeafFunction::constant(m, 1.0), one, AlphaCoefficients(m, 1, 0.0)) == 0.0);
  AlphaCoefficients root(m, 1, 0.0);
  root[{0, 0}] = 1.0;
  CHECK(embedding_form(LeafFunction::constant(m, 1.0), one, root) == doctest::Approx(1.0));
  std::mt19937_64 rng(41);
  const LeafFunction f = lf(2, oracle::random_function(rng, 4));
  const Weight w = wt(2, oracle::random_weight(rng, 4));
  const AlphaCoefficients a = alpha_coefficients(wt(2, oracle::random_weight(rng, 4)), w);
  CHECK(embedding_form(2.0 * f, w, a) == doctest::Approx(4 * embedding_form(f, w, a)).epsilon(1e-13));
  CHECK(bilinear_T0_form(f, f, w, w) == doctest::Approx(embedding_form(f, w, alpha_coefficients(w, w))).epsilon(1e-13));
  CHECK(bilinear_T0_form(f, f, one, one) == 0.0);

  const Weight w1 = wt(1, {1, 3}), v1 = wt(1, {2, 1});
  const LeafFunction ones = LeafFunction::constant(DyadicModel(1), 1.0);
  const double expect = (std::sqrt(2.0) + 1) / 2 * (1 + std::sqrt(3.0)) / 2 * (2.0 / 3.0);
  CHECK(bilinear_T0_form(ones, ones, v1, w1) == doctest::Approx(expect).epsilon(1e-14));

  const LeafFunction g = lf(2, oracle::random_function(rng, 4));
  const Weight v = wt(2, oracle::random_weight(rng, 4));
  CHECK(bilinear_T0_form(f, g, v, w) == doctest::Approx(bilinear_T0_form(g, f, w, v)).epsilon(1e-13));
}
