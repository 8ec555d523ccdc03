#include <cmath>
#include <random>

#include "doctest.h"
#include "hwl/bellman.hpp"

using namespace hwl;

TEST_CASE("finite-difference Hessian examples") {
  const std::vector<double> p{1.0, 1.0};
  const Matrix h = fd_hessian([](std::span<const double> a) { return a[0] * a[1]; }, p);
  CHECK(std::abs(h(0, 0)) <= 1e-8);
  CHECK(std::abs(h(1, 1)) <= 1e-8);
  CHECK(h(0, 1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(h(1, 0) == h(0, 1));

  const Matrix q = fd_hessian([](std::span<const double> a) { return std::pow(a[0] * a[1], 0.25); }, p);
  const double form = q(0, 0) + 2 * q(0, 1) + q(1, 1);
  CHECK(form == doctest::Approx(-0.25).epsilon(1e-6));
  const Matrix c = hessian_power(0.25, 1.0, 1.0);
  CHECK(c(0, 0) + 2 * c(0, 1) + c(1, 1) == doctest::Approx(-0.25).epsilon(1e-14));

  auto quad = [](std::span<const double> a) { return 3 * a[0] * a[0] - 2 * a[0] * a[1] + 0.5 * a[1] * a[1]; };
  for (double hr : {1e-2, 1e-3}) {
    const Matrix e = fd_hessian(quad, std::vector<double>{2.0, -1.0}, hr);
    CHECK(e(0, 0) == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(e(0, 1) == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(e(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("fd stencil leaving the domain") {
  auto f = [](std::span<const double> a) { return std::sqrt(a[0]); };
  auto dom = [](std::span<const double> a) { return a[0] >= 1.0; };
  try {
    fd_hessian(f, std::vector<double>{1.0}, 1e-4, dom);
    FAIL("expected stencil error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::stencil);
  }
}

TEST_CASE("closed-form Hessians agree with finite differences") {
  std::mt19937_64 rng(151);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double x = u(rng), y = u(rng);
    for (double a : {0.1, 0.3, 0.45}) {
      const Matrix c = hessian_power(a, x, y);
      const Matrix f = fd_hessian([a](std::span<const double> p) { return std::pow(p[0] * p[1], a); },
                                  std::vector<double>{x, y});
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(f(i, j) == doctest::Approx(c(i, j)).epsilon(1e-5));
    }
    for (double a : {0.6, 0.8, 1.0}) {
      const Matrix c = hessian_alpha_large(a, x, y);
      const Matrix f = fd_hessian([a](std::span<const double> p) { return bellman_alpha_large(a, p[0], p[1]); },
                                  std::vector<double>{x, y});
      const double scale = std::abs(c(0, 0)) + std::abs(c(1, 1)) + std::abs(c(0, 1));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(f(i, j) - c(i, j)) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("midpoint drop examples") {
  auto f = [](std::span<const double> a) { return std::pow(a[0] * a[1], 0.25); };
  const std::vector<double> a{1, 1}, am{1.5, 0.5}, ap{0.5, 1.5};
  CHECK(midpoint_drop(f, a, am, ap) == doctest::Approx(1 - std::pow(0.75, 0.25)).epsilon(1e-14));
  CHECK(midpoint_drop(f, a, a, a) == 0.0);
  auto lin = [](std::span<const double> p) { return 2 * p[0] - p[1]; };
  CHECK(std::abs(midpoint_drop(lin, a, am, ap)) <= 1e-15);
}

TEST_CASE("power drop examples") {
  CHECK(power_drop_lhs(0.25, 0, 0) == 0.0);
  CHECK(power_drop_lhs(0.25, 1, 1) == doctest::Approx(1 - std::sqrt(2.0) / 2).epsilon(1e-14));
  CHECK(power_drop_lhs(0.25, 1, -1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("alpha large function examples") {
  CHECK(bellman_alpha_large(1.0, 1.0, 1.0) == doctest::Approx(0.75));
  CHECK(bellman_alpha_large(0.75, 0.0, 0.7) == 0.0);
  // rho - r at alpha = 3/4, x = y = 1/2.
  const double xy = 0.25, a = 0.75;
  const double rho_minus_r = a * (2 * a - 1) * std::pow(xy, a - 0.5);
  CHECK(rho_minus_r == doctest::Approx(0.26517).epsilon(1e-4));
  const Matrix h = hessian_alpha_large(a, 0.5, 0.5);
  // Quadratic form at (xi, eta) = (x, y) signs (+,-) gives the mixed bound.
  const double xi = 0.5, eta = -0.5;
  const double form = h(0, 0) * xi * xi + 2 * h(0, 1) * xi * eta + h(1, 1) * eta * eta;
  CHECK(form <= -0.25 * rho_minus_r * std::sqrt(xy) * std::abs(xi * eta) / xy + 1e-12);
}

TEST_CASE("sup over s") {
  const SupS k0 = sup_s_value(2, 1, 3, 2, 0);
  CHECK(k0.value == doctest::Approx(4.0 + 4.5));
  CHECK(k0.s_star == 1.0);
  const SupS one = sup_s_value(1, 1, 1, 1, 1);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));
  for (double s : {1e-3, 0.5, 1.0, 7.0}) CHECK(sup_s_objective(1, 1, 1, 1, 1, s) == doctest::Approx(1.0).epsilon(1e-14));
  const SupS y0 = sup_s_value(2, 1, 0, 1, 1);
  CHECK(y0.value == doctest::Approx(4.0).epsilon(1e-12));

  std::mt19937_64 rng(157);
  std::uniform_real_distribution<double> lu(-3, 3);
  for (int t = 0; t < 200; ++t) {
    const double x = std::exp(lu(rng)), w = std::exp(lu(rng)), y = std::exp(lu(rng)), v = std::exp(lu(rng)),
                 K = std::exp(lu(rng));
    const SupS r = sup_s_value(x, w, y, v, K);
    // Brute-force grid oracle on log s.
    double grid = 0;
    for (int i = 0; i <= 4000; ++i) grid = std::max(grid, sup_s_objective(x, w, y, v, K, std::exp(-20 + 40.0 * i / 4000)));
    CHECK(r.value >= grid * (1 - 1e-10));
    CHECK(r.value <= std::max(grid, std::max(x * x / w, y * y / v)) * (1 + 1e-6));
  }
}

TEST_CASE("certified constants") {
  CHECK(certified_alpha_small(0.25) > 0);
  CHECK(certified_alpha_large(0.75) > 0);
  // The grid estimate of the drop constant dominates the certified value.
  for (double a : {0.1, 0.25, 0.4, 0.49}) {
    double c = 1e9;
    for (int i = -100; i <= 100; ++i)
      for (int j = -100; j <= 100; ++j) {
        const double l = i / 100.0, m = j / 100.0;
        if (i == 0 || j == 0) continue;
        c = std::min(c, power_drop_lhs(a, l, m) / std::abs(l * m));
      }
    CHECK(c >= certified_alpha_small(a));
  }
}

TEST_CASE("certificates pass at modest sample counts") {
  SamplerConfig cfg;
  cfg.samples = 4000;
  cfg.hessian_points = 300;
  cfg.seed = 3;
  for (const auto& r : {cert_alpha_small(0.25, cfg), cert_alpha_large(0.75, cfg), cert_alpha_large(1.0, cfg),
                        cert_embedding(1.0, cfg), cert_embedding(2.5, cfg), cert_seven(1.0, cfg), cert_nine(cfg)}) {
    INFO(r.id << " worst " << r.worst_margin);
    CHECK(r.passed());
    CHECK(r.failures.empty());
    CHECK(r.samples >= cfg.samples);
  }
}

TEST_CASE("certificates are deterministic and validate arguments") {
  SamplerConfig cfg;
  cfg.samples = 1000;
  cfg.hessian_points = 100;
  cfg.seed = 9;
  const CertificateReport a = cert_seven(1.0, cfg), b = cert_seven(1.0, cfg);
  CHECK(a.worst_margin == b.worst_margin);
  CHECK(a.extras == b.extras);
  CHECK_THROWS_AS(cert_alpha_small(0.5, cfg), Error);
  CHECK_THROWS_AS(cert_alpha_small(0.0, cfg), Error);
  CHECK_THROWS_AS(cert_alpha_large(0.5, cfg), Error);
  CHECK_THROWS_AS(cert_alpha_large(1.2, cfg), Error);
  cfg.c_fun = 3.0;
  try {
    cert_embedding(1.0, cfg);
    FAIL("expected configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
  CHECK_THROWS_AS(run_certificate("cert_ten", std::nullopt, cfg), Error);
}

TEST_CASE("d2P identity example") {
  // P = X - x^2/w; -d2P along (0, 1, -1) at (1, 1, 1) equals 8.
  auto P = [](std::span<const double> a) { return a[0] - a[1] * a[1] / a[2]; };
  const Matrix h = fd_hessian(P, std::vector<double>{1, 1, 1});
  const double xi = 1, om = -1;
  const double form = h(1, 1) * xi * xi + 2 * h(1, 2) * xi * om + h(2, 2) * om * om;
  CHECK(-form == doctest::Approx(8.0).epsilon(1e-6));
}
