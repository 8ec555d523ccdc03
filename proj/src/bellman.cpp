#include "hwl/bellman.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hwl/error.hpp"
#include "hwl/parallel.hpp"
#include "hwl/rng.hpp"

namespace hwl {

// ---------------------------------------------------------------------------
// Finite differences

namespace {

bool all_in(const DomainFn& in_domain, std::span<const double> p) {
  return !in_domain || in_domain(p);
}

Matrix fd_hessian_once(const ScalarFn& f, std::span<const double> p, double h_rel,
                       const DomainFn& in_domain, bool& ok) {
  const std::size_t k = p.size();
  std::vector<double> h(k);
  for (std::size_t i = 0; i < k; ++i) h[i] = p[i] != 0.0 ? h_rel * std::abs(p[i]) : h_rel;
  std::vector<double> q(p.begin(), p.end());
  ok = true;
  auto eval = [&]() -> double {
    if (!all_in(in_domain, q)) {
      ok = false;
      return 0.0;
    }
    return f(q);
  };
  Matrix H(k, k);
  const double f0 = eval();
  for (std::size_t i = 0; i < k && ok; ++i) {
    q[i] = p[i] + h[i];
    const double fp = eval();
    q[i] = p[i] - h[i];
    const double fm = eval();
    q[i] = p[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i && ok; ++j) {
      double s = 0.0;
      for (int a = -1; a <= 1; a += 2)
        for (int b = -1; b <= 1; b += 2) {
          q[i] = p[i] + a * h[i];
          q[j] = p[j] + b * h[j];
          s += a * b * eval();
        }
      q[i] = p[i];
      q[j] = p[j];
      H(i, j) = H(j, i) = s / (4.0 * h[i] * h[j]);
    }
  }
  return H;
}

}  // namespace

Matrix fd_hessian(const ScalarFn& f, std::span<const double> p, double h_rel,
                  const DomainFn& in_domain) {
  if (!all_in(in_domain, p)) throw Error(ErrorCode::domain, "Hessian base point outside the domain");
  bool ok = false;
  Matrix H = fd_hessian_once(f, p, h_rel, in_domain, ok);
  if (ok) return H;
  H = fd_hessian_once(f, p, 0.5 * h_rel, in_domain, ok);
  if (ok) return H;
  throw Error(ErrorCode::stencil, "finite-difference stencil leaves the domain");
}

Matrix fd_hessian_richardson(const ScalarFn& f, std::span<const double> p, double h_rel,
                             const DomainFn& in_domain) {
  const Matrix a = fd_hessian(f, p, h_rel, in_domain);
  const Matrix b = fd_hessian(f, p, 0.5 * h_rel, in_domain);
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = (4.0 * b(i, j) - a(i, j)) / 3.0;
  return r;
}

double midpoint_drop(const ScalarFn& f, std::span<const double> a, std::span<const double> a_minus,
                     std::span<const double> a_plus, const DomainFn& in_domain) {
  if (a.size() != a_minus.size() || a.size() != a_plus.size())
    throw Error(ErrorCode::invalid_argument, "midpoint_drop points differ in dimension");
  if (!all_in(in_domain, a) || !all_in(in_domain, a_minus) || !all_in(in_domain, a_plus))
    throw Error(ErrorCode::domain, "midpoint_drop point outside the domain");
  return f(a) - 0.5 * (f(a_minus) + f(a_plus));
}

// ---------------------------------------------------------------------------
// Closed forms

double power_drop_lhs(double alpha, double lambda, double mu) {
  return 1.0 - 0.5 * (std::pow((1.0 - lambda) * (1.0 - mu), alpha) +
                      std::pow((1.0 + lambda) * (1.0 + mu), alpha));
}

Matrix hessian_power(double alpha, double x, double y) {
  const double F = std::pow(x * y, alpha);
  Matrix H(2, 2);
  H(0, 0) = alpha * (alpha - 1.0) * F / (x * x);
  H(1, 1) = alpha * (alpha - 1.0) * F / (y * y);
  H(0, 1) = H(1, 0) = alpha * alpha * F / (x * y);
  return H;
}

double bellman_alpha_large(double alpha, double x, double y) {
  const double s = x * y;
  return std::sqrt(s) - 0.25 * std::pow(s, alpha);
}

Matrix hessian_alpha_large(double alpha, double x, double y) {
  const Matrix a = hessian_power(0.5, x, y);
  const Matrix b = hessian_power(alpha, x, y);
  Matrix H(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) H(i, j) = a(i, j) - 0.25 * b(i, j);
  return H;
}

// Along x_t = x + t xi with t in [-1/2, 1/2], x_t <= 3x/2; the midpoint drop equals
// (1/2) int (1 - |t|)(-b''), and the [-1/2,1/2] part of the weight integrates to 3/4.
double certified_alpha_small(double alpha) {
  return 0.375 * alpha * (1.0 - 2.0 * alpha) * std::pow(4.0 / 9.0, 1.0 - alpha);
}

// Same route with the (xy)^{1/2} - (xy)^alpha/4 Hessian bound -(1/2)(rho - r) sqrt(s)|ab|, an
// extra factor 1/2 for segments that leave xy <= 1 (xy_t <= 9/8 there), and the
// |x+ - x-|/x = 2|lambda| normalization.
double certified_alpha_large(double alpha) {
  return (3.0 / 128.0) * alpha * (2.0 * alpha - 1.0) * std::pow(4.0 / 9.0, 1.0 - alpha);
}

double sup_s_objective(double x, double w, double y, double v, double K, double s) {
  return x * x / (w + s * K) + y * y / (v + K / s);
}

SupS sup_s_value(double x, double w, double y, double v, double K) {
  if (!(w > 0 && v > 0 && K >= 0))
    throw Error(ErrorCode::domain, "sup_s_value needs w, v > 0 and K >= 0");
  const double lim0 = x * x / w, liminf = y * y / v;
  if (K == 0.0) return {1.0, lim0 + liminf};
  auto g = [&](double u) { return sup_s_objective(x, w, y, v, K, std::exp(u)); };
  constexpr int n = 801;
  constexpr double lo = -40.0, hi = 40.0, step = (hi - lo) / (n - 1);
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < n; ++i) {
    const double val = g(lo + step * i);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  double a = lo + step * std::max(best - 1, 0), b = lo + step * std::min(best + 1, n - 1);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > 1e-12) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + phi * (b - a);
      gd = g(d);
    }
  }
  double u = 0.5 * (a + b);
  double val = g(u);
  if (best_val > val) {
    val = best_val;
    u = lo + step * best;
  }
  SupS out{std::exp(u), val};
  const double edge = std::max(lim0, liminf);
  if (edge > val * (1.0 + 1e-14)) {
    out.value = edge;
    out.s_star = lim0 >= liminf ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling infrastructure

namespace {

constexpr std::size_t max_failures = 20;
constexpr double tiny = 1e-300;

struct Acc {
  double tol = 1e-9;
  double worst = std::numeric_limits<double>::infinity();
  std::vector<Failure> fails;
  std::map<std::string, double> mins, maxs;

  void margin(const char* check, double m, std::vector<double> pt) {
    if (std::isnan(m)) m = -std::numeric_limits<double>::infinity();
    worst = std::min(worst, m);
    if (m < -tol && fails.size() < max_failures) fails.push_back({check, std::move(pt), m});
  }
  void lo(const std::string& key, double v) {
    auto [it, fresh] = mins.emplace(key, v);
    if (!fresh) it->second = std::min(it->second, v);
  }
  void hi(const std::string& key, double v) {
    auto [it, fresh] = maxs.emplace(key, v);
    if (!fresh) it->second = std::max(it->second, v);
  }
  void merge(const Acc& o) {
    worst = std::min(worst, o.worst);
    for (const auto& f : o.fails)
      if (fails.size() < max_failures) fails.push_back(f);
    for (const auto& [k, v] : o.mins) lo(k, v);
    for (const auto& [k, v] : o.maxs) hi(k, v);
  }
};

// Runs body(rng, acc, index) for index in [0, n) over 64 fixed shards seeded from
// (seed, stream, shard); merges in shard order.
template <class Body>
Acc run_sharded(std::uint64_t n, std::uint64_t seed, std::uint64_t stream, Body body) {
  constexpr std::size_t shards = 64;
  std::vector<Acc> accs(shards);
  parallel_chunks(n, shards, [&](std::size_t c, std::size_t b, std::size_t e) {
    Rng rng(derive_seed(seed, stream * 1000003u + c));
    for (std::size_t i = b; i < e; ++i) body(rng, accs[c], i);
  });
  Acc out;
  for (const auto& a : accs) out.merge(a);
  return out;
}

double loguni(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

// Fraction in [0,1] that hits the endpoints with small probability.
double fraction(Rng& rng) {
  const double r = uniform01(rng);
  if (r < 0.01) return 0.0;
  if (r < 0.02) return 1.0;
  return uniform01(rng);
}

// Entrywise error of a against b after scaling row i and column j by |p_i|, relative
// to the largest scaled entry of b. A roundoff floor for fd steps of relative size
// h_rel on a function of size |f| is added to the tolerance by the caller.
struct ScaledErr {
  double err = 0.0;
  double den = 0.0;
};

ScaledErr scaled_rel_err(const Matrix& a, const Matrix& b, std::span<const double> p) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double s = std::abs(p[i] * p[j]);
      num = std::max(num, s * std::abs(a(i, j) - b(i, j)));
      den = std::max(den, s * std::abs(b(i, j)));
    }
  return {den > 0 ? num / den : num, den};
}

double fd_floor(double f, double h_rel, double den) {
  return 1e3 * std::numeric_limits<double>::epsilon() * std::abs(f) /
         (h_rel * h_rel * std::max(den, tiny));
}

double quad(const Matrix& H, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) s += d[i] * H(i, j) * d[j];
  return s;
}

double scale_of(std::initializer_list<double> vals) {
  double s = tiny;
  for (double v : vals) s = std::max(s, std::abs(v));
  return s;
}

CertificateReport finish(std::string id, const SamplerConfig& cfg, std::uint64_t samples,
                         std::vector<Acc> parts) {
  Acc all;
  for (auto& p : parts) all.merge(p);
  CertificateReport r;
  r.id = std::move(id);
  r.samples = samples;
  r.seed = cfg.seed;
  r.worst_margin = all.worst;
  r.failures = std::move(all.fails);
  for (const auto& [k, v] : all.mins) r.extras[k] = v;
  for (const auto& [k, v] : all.maxs) r.extras[k] = v;
  return r;
}

const DomainFn positive2 = [](std::span<const double> p) { return p[0] > 0 && p[1] > 0; };

}  // namespace

// ---------------------------------------------------------------------------
// (xy)^alpha, alpha in (0, 1/2)

CertificateReport cert_alpha_small(double alpha, const SamplerConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw Error(ErrorCode::invalid_argument, "alpha_small needs alpha in (0, 1/2)");
  const double c_cert = certified_alpha_small(alpha);

  Acc grid;
  double c_grid = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const double l = (i - 100) / 100.0, m = (j - 100) / 100.0;
      const double lhs = power_drop_lhs(alpha, l, m);
      if (l * m != 0.0) c_grid = std::min(c_grid, lhs / std::abs(l * m));
      grid.margin("grid_drop", lhs - c_cert * std::abs(l * m), {l, m});
    }

  const ScalarFn B = [alpha](std::span<const double> p) { return std::pow(p[0] * p[1], alpha); };

  Acc drops = run_sharded(cfg.samples, cfg.seed, 1, [&](Rng& rng, Acc& acc, std::size_t) {
    const double x = loguni(rng, 1e-3, 1e3), y = loguni(rng, 1e-3, 1e3);
    const double l = uniform(rng, -1, 1), m = uniform(rng, -1, 1);
    const std::array<double, 2> a{x, y}, am{(1 - l) * x, (1 - m) * y}, ap{(1 + l) * x, (1 + m) * y};
    const double drop = midpoint_drop(B, a, am, ap);
    const double base = std::pow(x * y, alpha);
    const double scale = scale_of({B(a), B(am), B(ap)});
    acc.margin("random_drop", (drop - c_cert * base * std::abs(l * m)) / scale, {x, y, l, m});
    if (std::abs(l * m) > 1e-8) acc.lo("sample_constant_estimate", drop / (base * std::abs(l * m)));
  });

  Acc hess = run_sharded(cfg.hessian_points, cfg.seed, 2, [&](Rng& rng, Acc& acc, std::size_t) {
    const double x = loguni(rng, 1e-3, 1e3), y = loguni(rng, 1e-3, 1e3);
    const std::array<double, 2> p{x, y};
    const Matrix cf = hessian_power(alpha, x, y);
    const ScaledErr e = scaled_rel_err(fd_hessian(B, p, 1e-4, positive2), cf, p);
    acc.hi("hessian_max_rel_err", e.err);
    acc.margin("hessian_fd_agreement", 1e-5 + fd_floor(B(p), 1e-4, e.den) - e.err, {x, y});
    const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1);
    const std::array<double, 2> d{a * x, b * y};
    const double s_alpha = std::pow(x * y, alpha);
    const double req = (1 - 2 * alpha) * alpha * std::abs(a * b) * s_alpha;
    const double scale = alpha * s_alpha * (a * a + b * b) + tiny;
    acc.margin("hessian_bound", (-quad(cf, d) - req) / scale, {x, y, a, b});
  });

  CertificateReport r = finish("alpha_small", cfg, cfg.samples, {grid, drops, hess});
  r.best_constant_estimate = c_grid;
  r.extras["alpha"] = alpha;
  r.extras["certified_constant"] = c_cert;
  r.extras["grid_constant_estimate"] = c_grid;
  return r;
}

// ---------------------------------------------------------------------------
// (xy)^{1/2} - (xy)^alpha / 4, alpha in (1/2, 1], domain xy <= 1

CertificateReport cert_alpha_large(double alpha, const SamplerConfig& cfg) {
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw Error(ErrorCode::invalid_argument, "alpha_large needs alpha in (1/2, 1]");
  const double c_cert = certified_alpha_large(alpha);
  const ScalarFn B = [alpha](std::span<const double> p) {
    return bellman_alpha_large(alpha, p[0], p[1]);
  };
  const DomainFn in_D = [](std::span<const double> p) {
    return p[0] >= 0 && p[1] >= 0 && p[0] * p[1] <= 1.0 + 1e-12;
  };

  Acc drops = run_sharded(cfg.samples, cfg.seed, 1, [&](Rng& rng, Acc& acc, std::size_t) {
    const double x = loguni(rng, 1e-3, 1e3);
    const double s = uniform01(rng) < 0.01 ? 1.0 : loguni(rng, 1e-6, 1.0);
    const double y = s / x;
    double l = 0, m = 0;
    bool found = false;
    for (int t = 0; t < 64 && !found; ++t) {
      l = uniform(rng, -1, 1);
      m = uniform(rng, -1, 1);
      found = (1 + l) * (1 + m) * s <= 1.0 && (1 - l) * (1 - m) * s <= 1.0;
    }
    while (!found) {
      l *= 0.5;
      m *= 0.5;
      found = (1 + l) * (1 + m) * s <= 1.0 && (1 - l) * (1 - m) * s <= 1.0;
    }
    const std::array<double, 2> a{x, y}, am{(1 - l) * x, (1 - m) * y}, ap{(1 + l) * x, (1 + m) * y};
    const double b0 = B(a);
    const double root = std::sqrt(x * y);
    acc.margin("lower_bound", b0 / root, {x, y});
    acc.margin("upper_bound", (root - b0) / root, {x, y});
    const double drop = midpoint_drop(B, a, am, ap, in_D);
    const double base = std::pow(x * y, alpha) * 4.0 * std::abs(l * m);
    const double scale = scale_of({b0, B(am), B(ap)});
    acc.margin("random_drop", (drop - c_cert * base) / scale, {x, y, l, m});
    if (std::abs(l * m) > 1e-8) acc.lo("sample_constant_estimate", drop / base);

    // Hessian along the segment at t in [-1/2, 1/2], normalized as in the drop estimate.
    const double t = uniform(rng, -0.5, 0.5);
    const double xt = x + t * l * x, yt = y + t * m * y;
    if (xt * yt <= 1.0 && std::abs(l * m) > 1e-8) {
      const std::array<double, 2> d{l * x, m * y};
      const double h = quad(hessian_alpha_large(alpha, xt, yt), d);
      acc.lo("hessian_constant_estimate",
             -h * std::pow(x, 1 - alpha) * std::pow(y, 1 - alpha) / std::abs(d[0] * d[1]));
    }
  });

  Acc hess = run_sharded(cfg.hessian_points, cfg.seed, 2, [&](Rng& rng, Acc& acc, std::size_t) {
    const double x = loguni(rng, 1e-3, 1e3);
    const double s = loguni(rng, 1e-6, 0.999);
    const double y = s / x;
    const std::array<double, 2> p{x, y};
    const Matrix cf = hessian_alpha_large(alpha, x, y);
    const ScaledErr e = scaled_rel_err(fd_hessian(B, p, 1e-4, in_D), cf, p);
    acc.hi("hessian_max_rel_err", e.err);
    acc.margin("hessian_fd_agreement", 1e-5 + fd_floor(B(p), 1e-4, e.den) - e.err, {x, y});
    const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1);
    const std::array<double, 2> d{a * x, b * y};
    const double rho = alpha * alpha * std::pow(s, alpha - 0.5);
    const double r = alpha * (1 - alpha) * std::pow(s, alpha - 0.5);
    const double req = 0.25 * (rho - r) * std::sqrt(s) * std::abs(a * b);
    const double h = quad(cf, d);
    acc.margin("hessian_bound", (-h - req) / (std::abs(h) + req + tiny), {x, y, a, b});
  });

  CertificateReport r = finish("alpha_large", cfg, cfg.samples, {drops, hess});
  r.best_constant_estimate = r.extras.count("sample_constant_estimate")
                                 ? r.extras["sample_constant_estimate"]
                                 : 0.0;
  r.extras["alpha"] = alpha;
  r.extras["certified_constant"] = c_cert;
  return r;
}

// ---------------------------------------------------------------------------
// C X - C x^2/(w + M)

namespace {

double required_c_fun(double c_dom) { return (1.0 + c_dom) * (1.0 + c_dom); }

double pick_c_fun(double c_dom, const SamplerConfig& cfg) {
  if (!(c_dom >= 1.0)) throw Error(ErrorCode::invalid_argument, "c_dom must be at least 1");
  const double need = required_c_fun(c_dom);
  const double c = cfg.c_fun.value_or(need);
  if (c < need)
    throw Error(ErrorCode::configuration,
                "c_fun = " + std::to_string(c) + " is too small for c_dom = " +
                    std::to_string(c_dom) + "; the minimum is (1 + c_dom)^2 = " + std::to_string(need));
  return c;
}

struct XwPoint {
  double X, x, w, M;
};

XwPoint sample_xw(Rng& rng, double c_dom) {
  XwPoint p;
  p.X = loguni(rng, 1e-3, 1e3);
  p.w = loguni(rng, 1e-3, 1e3);
  p.x = std::sqrt(p.X * p.w) * fraction(rng);
  p.M = c_dom * p.w * fraction(rng);
  return p;
}

Matrix embedding_hessian(double C, double x, double w, double M) {
  const double u = w + M;
  Matrix H(4, 4);
  const double xx = -2.0 * C / u, xu = 2.0 * C * x / (u * u), uu = -2.0 * C * x * x / (u * u * u);
  H(1, 1) = xx;
  for (int k : {2, 3}) {
    H(1, k) = H(k, 1) = xu;
    for (int l : {2, 3}) H(k, l) = uu;
  }
  return H;
}

double max_eigenvalue(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = 0.5 * (m(i, j) + m(j, i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

CertificateReport cert_embedding(double c_dom, const SamplerConfig& cfg) {
  const double C = pick_c_fun(c_dom, cfg);
  const ScalarFn B = [C](std::span<const double> p) {
    return C * (p[0] - p[1] * p[1] / (p[2] + p[3]));
  };
  const DomainFn defined = [](std::span<const double> p) { return p[2] + p[3] > 0; };

  Acc main = run_sharded(cfg.samples, cfg.seed, 1, [&](Rng& rng, Acc& acc, std::size_t) {
    const XwPoint lo = sample_xw(rng, c_dom), hi = sample_xw(rng, c_dom);
    const double X = 0.5 * (lo.X + hi.X), x = 0.5 * (lo.x + hi.x), w = 0.5 * (lo.w + hi.w);
    const double m_avg = 0.5 * (lo.M + hi.M);
    const double room = c_dom * w - m_avg;
    const double h = room > 0 ? loguni(rng, 1e-6, 1.0) * room : 0.0;
    const std::array<double, 4> a{X, x, w, m_avg + h}, am{lo.X, lo.x, lo.w, lo.M},
        ap{hi.X, hi.x, hi.w, hi.M};
    const double b0 = B(a);
    acc.margin("lower_bound", b0 / (C * X), {a.begin(), a.end()});
    acc.margin("upper_bound", (C * X - b0) / (C * X), {a.begin(), a.end()});
    if (x > 0) {
      const double dbdm = C * x * x / ((w + a[3]) * (w + a[3]));
      const double need = x * x / (w * w);
      acc.margin("dB_dM", (dbdm - need) / (dbdm + need), {a.begin(), a.end()});
      acc.lo("gamma_estimate", dbdm / need);
    }
    const double drop = midpoint_drop(B, a, am, ap, defined);
    const double req = x * x / (w * w) * h;
    const double scale = scale_of({b0, B(am), B(ap)});
    acc.margin("drop_chain", (drop - req) / scale, {a.begin(), a.end()});
    if (req > 1e-12 * scale) acc.lo("drop_constant_estimate", drop / req);
  });

  Acc hess = run_sharded(cfg.hessian_points, cfg.seed, 2, [&](Rng& rng, Acc& acc, std::size_t) {
    const double X = loguni(rng, 1e-3, 1e3), w = loguni(rng, 1e-3, 1e3);
    const double x = std::sqrt(X * w) * uniform(rng, 0.01, 0.99);
    const double M = c_dom * w * uniform(rng, 0.01, 0.99);
    const std::array<double, 4> p{X, x, w, M};
    const std::vector<double> pt(p.begin(), p.end());
    const Matrix cf = embedding_hessian(C, x, w, M);
    const Matrix fd = fd_hessian_richardson(B, p, 2e-3, defined);
    const ScaledErr e = scaled_rel_err(fd, cf, p);
    acc.hi("hessian_max_rel_err", e.err);
    acc.margin("hessian_fd_agreement", 1e-5 + fd_floor(B(p), 2e-3, e.den) - e.err, pt);
    Matrix dhd(4, 4);
    double frob = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        dhd(i, j) = p[i] * fd(i, j) * p[j];
        frob += dhd(i, j) * dhd(i, j);
      }
    const double scale = std::max({std::sqrt(frob), std::abs(B(p)), tiny});
    const double lmax = max_eigenvalue(dhd) / scale;
    acc.hi("nsd_max_scaled_eigenvalue", lmax);
    acc.margin("hessian_nsd", 1e-8 - lmax, pt);

    // Composition with a quadratic M(w): d^2 Q = J^T d^2B J + dB/dM M''(w) e_w e_w^T.
    const double m1 = uniform(rng, 0.0, 0.5 * c_dom);
    const double m2 = uniform(rng, -0.25, 0.25) * m1 / w;
    const double m0 = M - m1 * w - m2 * w * w;
    auto Mof = [=](double t) { return m0 + m1 * t + m2 * t * t; };
    const ScalarFn Q = [&](std::span<const double> q) {
      const std::array<double, 4> full{q[0], q[1], q[2], Mof(q[2])};
      return B(full);
    };
    const DomainFn q_defined = [&](std::span<const double> q) { return q[2] + Mof(q[2]) > 0; };
    const std::array<double, 3> q0{X, x, w};
    const Matrix fdq = fd_hessian_richardson(Q, q0, 2e-3, q_defined);
    const double mp = m1 + 2 * m2 * w, mpp = 2 * m2;
    const double J[4][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, mp}};
    Matrix rhs(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) s += J[k][i] * cf(k, l) * J[l][j];
        rhs(i, j) = s;
      }
    rhs(2, 2) += C * x * x / ((w + M) * (w + M)) * mpp;
    const ScaledErr ce = scaled_rel_err(fdq, rhs, q0);
    acc.hi("composition_max_rel_err", ce.err);
    acc.margin("composition_rule", 1e-5 + fd_floor(Q(q0), 2e-3, ce.den) - ce.err, pt);
  });

  CertificateReport r = finish("embedding", cfg, cfg.samples, {main, hess});
  r.best_constant_estimate = r.extras.count("gamma_estimate") ? r.extras["gamma_estimate"] : 0.0;
  r.extras["c_dom"] = c_dom;
  r.extras["c_fun"] = C;
  return r;
}

// ---------------------------------------------------------------------------
// Nine-variable function B = Q + P

namespace {

struct NinePoint {
  double X, x, w, Y, y, v, K, M, N;
  std::vector<double> vec() const { return {X, x, w, Y, y, v, K, M, N}; }
};

NinePoint sample_nine(Rng& rng, double c_dom) {
  NinePoint p{};
  p.X = loguni(rng, 1e-3, 1e3);
  p.w = loguni(rng, 1e-3, 1e3);
  p.Y = loguni(rng, 1e-3, 1e3);
  p.v = loguni(rng, 1e-3, 1e3);
  p.x = std::sqrt(p.X * p.w) * fraction(rng);
  p.y = std::sqrt(p.Y * p.v) * fraction(rng);
  p.K = c_dom * std::sqrt(p.w * p.v) * fraction(rng);
  p.M = c_dom * p.w * fraction(rng);
  p.N = c_dom * p.v * fraction(rng);
  return p;
}

}  // namespace

CertificateReport cert_seven(double c_dom, const SamplerConfig& cfg) {
  const double C = pick_c_fun(c_dom, cfg);
  const double thr = cfg.regime_threshold;
  if (!(thr > 0.0 && thr < 1.0))
    throw Error(ErrorCode::configuration, "regime_threshold must lie in (0, 1)");
  const double gamma1 = 2.0 * (1.0 - thr) * (1.0 - thr);

  auto Q = [C](const NinePoint& p) {
    return C * (p.X + p.Y - p.x * p.x / (p.w + p.M) - p.y * p.y / (p.v + p.N));
  };
  auto P = [](const NinePoint& p) { return p.X + p.Y - sup_s_value(p.x, p.w, p.y, p.v, p.K).value; };

  Acc main = run_sharded(cfg.samples, cfg.seed, 1, [&](Rng& rng, Acc& acc, std::size_t i) {
    const NinePoint lo = sample_nine(rng, c_dom), hi = sample_nine(rng, c_dom);
    NinePoint a{0.5 * (lo.X + hi.X), 0.5 * (lo.x + hi.x), 0.5 * (lo.w + hi.w),
                0.5 * (lo.Y + hi.Y), 0.5 * (lo.y + hi.y), 0.5 * (lo.v + hi.v),
                0.5 * (lo.K + hi.K), 0.5 * (lo.M + hi.M), 0.5 * (lo.N + hi.N)};
    const int kind = static_cast<int>(i % 4);  // 0: K, 1: M, 2: N, 3: all
    auto slack = [&](double cap, double avg) {
      return cap > avg ? loguni(rng, 1e-6, 1.0) * (cap - avg) : 0.0;
    };
    const double hK = (kind == 0 || kind == 3) ? slack(c_dom * std::sqrt(a.w * a.v), a.K) : 0.0;
    const double hM = (kind == 1 || kind == 3) ? slack(c_dom * a.w, a.M) : 0.0;
    const double hN = (kind == 2 || kind == 3) ? slack(c_dom * a.v, a.N) : 0.0;
    a.K += hK;
    a.M += hM;
    a.N += hN;
    const std::vector<double> pt = a.vec();

    const double q0 = Q(a), qm = Q(lo), qp = Q(hi);
    const double p0 = P(a), pm = P(lo), pp = P(hi);
    const double b0 = q0 + p0;
    const double cap = (C + 1.0) * (a.X + a.Y);
    acc.margin("lower_bound", b0 / cap, pt);
    acc.margin("upper_bound", (cap - b0) / cap, pt);

    const double gm = a.x * a.x / (a.w * a.w), gn = a.y * a.y / (a.v * a.v);
    const double drop_q = q0 - 0.5 * (qm + qp);
    const double req_q = gm * hM + gn * hN;
    acc.margin("q_drop", (drop_q - req_q) / scale_of({q0, qm, qp}), pt);
    if (kind == 1 && gm * hM > 1e-12 * std::abs(q0)) acc.lo("gamma2_estimate", drop_q / (gm * hM));
    if (kind == 2 && gn * hN > 1e-12 * std::abs(q0)) acc.lo("gamma3_estimate", drop_q / (gn * hN));

    const double kxy = a.x * a.y / (a.w * a.v);
    const bool small = (a.x * a.x / a.w + a.y * a.y / a.v) * a.K <= thr * a.x * a.y;
    const double drop_p = p0 - 0.5 * (pm + pp);
    const double req_p = small ? gamma1 * kxy * hK : 0.0;
    acc.margin(small ? "p_drop_small_regime" : "p_drop_concavity",
               (drop_p - req_p) / scale_of({p0, pm, pp}), pt);
    if (small && kind == 0 && kxy * hK > 1e-12 * std::abs(p0))
      acc.lo("gamma1_estimate", drop_p / (kxy * hK));

    if (kind == 3) {
      const double drop_b = drop_q + drop_p;
      const double req_b = small ? gamma1 * kxy * hK : gm * hM + gn * hN;
      acc.margin(small ? "b_drop_small_regime" : "b_drop_large_regime",
                 (drop_b - req_b) / scale_of({b0, qm + pm, qp + pp}), pt);
    }
  });

  Acc sups = run_sharded(cfg.hessian_points, cfg.seed, 2, [&](Rng& rng, Acc& acc, std::size_t) {
    const NinePoint p = sample_nine(rng, c_dom);
    const SupS s = sup_s_value(p.x, p.w, p.y, p.v, p.K);
    const std::vector<double> pt = p.vec();
    for (int t = 0; t < 100; ++t) {
      const double obj = sup_s_objective(p.x, p.w, p.y, p.v, p.K, std::exp(uniform(rng, -40, 40)));
      acc.margin("sup_s_dominates", (s.value - obj) / std::max(s.value, tiny) + 1e-10, pt);
    }
    if (p.K > 0 && s.s_star > 0 && std::isfinite(s.s_star)) {
      const double sk = s.s_star * p.K, ks = p.K / s.s_star;
      const double lhs = sk * p.x * p.x / ((p.w + sk) * (p.w + sk));
      const double rhs = ks * p.y * p.y / ((p.v + ks) * (p.v + ks));
      // d/d(log s) of the objective, relative to its value
      const double res = std::abs(lhs - rhs) / std::max(s.value, tiny);
      acc.hi("stationarity_max_residual", res);
      acc.margin("sup_s_stationarity", 1e-6 - res, pt);
    }
  });

  CertificateReport r = finish("seven", cfg, cfg.samples, {main, sups});
  r.best_constant_estimate = r.extras.count("gamma1_estimate") ? r.extras["gamma1_estimate"] : 0.0;
  r.extras["gamma1_certified"] = gamma1;
  r.extras["gamma2_certified"] = 1.0;
  r.extras["gamma3_certified"] = 1.0;
  r.extras["c_dom"] = c_dom;
  r.extras["c_fun"] = C;
  r.extras["regime_threshold"] = thr;
  return r;
}

// ---------------------------------------------------------------------------
// P = X - x^2/w and Q = X - x^2/(w + M)

CertificateReport cert_nine(const SamplerConfig& cfg) {
  const double c_dom = cfg.c_dom;
  if (!(c_dom > 0)) throw Error(ErrorCode::invalid_argument, "c_dom must be positive");
  const double c_q = 1.0 / ((1.0 + c_dom) * (1.0 + c_dom));
  const double c_p = 1.0 / 32.0;
  const ScalarFn P = [](std::span<const double> p) { return p[0] - p[1] * p[1] / p[2]; };
  auto Q = [](const XwPoint& p) { return p.X - p.x * p.x / (p.w + p.M); };
  std::array<double, 41> grid{};
  for (int k = 0; k < 41; ++k) grid[k] = 0.5 + 1.5 * k / 40.0;

  Acc main = run_sharded(cfg.samples, cfg.seed, 1, [&](Rng& rng, Acc& acc, std::size_t) {
    const XwPoint lo = sample_xw(rng, c_dom), hi = sample_xw(rng, c_dom);
    XwPoint a{0.5 * (lo.X + hi.X), 0.5 * (lo.x + hi.x), 0.5 * (lo.w + hi.w), 0.5 * (lo.M + hi.M)};
    const double room = c_dom * a.w - a.M;
    const double h = room > 0 ? loguni(rng, 1e-6, 1.0) * room : 0.0;
    a.M += h;
    const std::vector<double> pt{a.X, a.x, a.w, a.M};

    const double q0 = Q(a), qm = Q(lo), qp = Q(hi);
    const double req_q = c_q * a.x * a.x / (a.w * a.w) * h;
    acc.margin("q_drop", (q0 - 0.5 * (qm + qp) - req_q) / scale_of({q0, qm, qp}), pt);

    const std::array<double, 3> pa{a.X, a.x, a.w}, pm{lo.X, lo.x, lo.w}, pp{hi.X, hi.x, hi.w};
    const double drop = midpoint_drop(P, pa, pm, pp);
    if (a.x > 0) {
      const double dx = (lo.x - hi.x) / a.x, dw = (lo.w - hi.w) / a.w;
      double inf = std::numeric_limits<double>::infinity();
      for (double c1 : grid)
        for (double c2 : grid) {
          const double d = c1 * dx - c2 * dw;
          inf = std::min(inf, d * d);
        }
      const double base = a.x * a.x / a.w * inf;
      const double scale = scale_of({P(pa), P(pm), P(pp)});
      acc.margin("p_drop", (drop - c_p * base) / scale, pt);
      if (base > 1e-12 * scale) acc.lo("p_constant_estimate", drop / base);
    } else {
      acc.margin("p_drop", drop / scale_of({P(pa), P(pm), P(pp)}), pt);
    }
  });

  Acc hess = run_sharded(cfg.hessian_points, cfg.seed, 2, [&](Rng& rng, Acc& acc, std::size_t) {
    const double X = loguni(rng, 1e-3, 1e3), w = loguni(rng, 1e-3, 1e3);
    const double x = std::sqrt(X * w) * uniform(rng, 0.01, 0.99);
    const std::array<double, 3> p{X, x, w};
    const std::vector<double> pt(p.begin(), p.end());
    Matrix cf(3, 3);
    cf(1, 1) = -2.0 / w;
    cf(1, 2) = cf(2, 1) = 2.0 * x / (w * w);
    cf(2, 2) = -2.0 * x * x / (w * w * w);
    const Matrix fd = fd_hessian_richardson(P, p, 2e-3);
    const ScaledErr e = scaled_rel_err(fd, cf, p);
    const double floor_p = fd_floor(P(p), 2e-3, e.den);
    acc.hi("hessian_max_rel_err", e.err);
    acc.margin("hessian_fd_agreement", 1e-5 + floor_p - e.err, pt);
    const std::array<double, 3> d{uniform(rng, -1, 1) * X, uniform(rng, -1, 1) * x,
                                  uniform(rng, -1, 1) * w};
    const double r1 = d[1] / x, r2 = d[2] / w;
    const double form = 2.0 * x * x / w * (r1 - r2) * (r1 - r2);
    const double scale = 2.0 * x * x / w * (r1 * r1 + r2 * r2) + tiny;
    const double ierr = std::abs(-quad(fd, d) - form) / scale;
    acc.hi("identity_max_rel_err", ierr);
    acc.margin("d2P_identity", 1e-5 + 9.0 * floor_p * e.den / scale - ierr, pt);
  });

  CertificateReport r = finish("nine", cfg, cfg.samples, {main, hess});
  r.best_constant_estimate =
      r.extras.count("p_constant_estimate") ? r.extras["p_constant_estimate"] : 0.0;
  r.extras["p_certified_constant"] = c_p;
  r.extras["q_certified_constant"] = c_q;
  r.extras["c_dom"] = c_dom;
  return r;
}

CertificateReport run_certificate(const std::string& id, std::optional<double> alpha,
                                  const SamplerConfig& cfg) {
  const std::string key = id.rfind("cert_", 0) == 0 ? id.substr(5) : id;
  if (key == "alpha_small") return cert_alpha_small(alpha.value_or(0.25), cfg);
  if (key == "alpha_large") return cert_alpha_large(alpha.value_or(1.0), cfg);
  if (key == "embedding") return cert_embedding(cfg.c_dom, cfg);
  if (key == "seven") return cert_seven(cfg.c_dom, cfg);
  if (key == "nine") return cert_nine(cfg);
  throw Error(ErrorCode::invalid_argument, "unknown certificate '" + id + "'");
}

}  // namespace hwl
