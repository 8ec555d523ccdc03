#include "hwl/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "hwl/parallel.hpp"
#include "hwl/rng.hpp"

namespace hwl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Rank-one pieces u_I w_I^T of v^{1/2} T_sigma w^{1/2}; column j of the leaf basis.
void add_haar_piece(Matrix& a, const DyadicModel& m, const DyadicIndex& I, double coef,
                    const std::vector<double>& sv, const std::vector<double>& sw) {
  const std::size_t lo = m.first_leaf(I), hi = m.last_leaf(I), mid = (lo + hi) / 2;
  const double amp2 = coef * m.leaf_measure() / I.length();
  for (std::size_t i = lo; i < hi; ++i) {
    const double hi_sign = i < mid ? 1.0 : -1.0;
    for (std::size_t j = lo; j < hi; ++j) {
      const double hj_sign = j < mid ? 1.0 : -1.0;
      a(i, j) += amp2 * hi_sign * hj_sign * sv[i] * sw[j];
    }
  }
}

std::vector<double> sqrt_values(const Weight& u) {
  std::vector<double> s(u.base().values().begin(), u.base().values().end());
  for (double& x : s) x = std::sqrt(x);
  return s;
}

}  // namespace

OperatorMatrix assemble(const OperatorSpec& spec, const Weight& v, const Weight& w) {
  require_same_model(v.model(), w.model());
  const DyadicModel& m = v.model();
  const std::size_t n = m.leaf_count();
  const std::vector<double> sv = sqrt_values(v), sw = sqrt_values(w);
  const double root = std::sqrt(m.leaf_measure());  // 2^{-N/2}
  OperatorMatrix out;
  out.domain_weight = w;
  out.codomain_weight = v;
  std::visit(
      overloaded{
          [&](const op::TSigma& t) {
            require_same_model(m, t.sigma.model());
            out.entries = Matrix(n, n);
            for (std::size_t h = 0; h < m.internal_count(); ++h)
              add_haar_piece(out.entries, m, DyadicIndex::from_heap(h), t.sigma.at_heap(h), sv, sw);
          },
          [&](const op::T0&) {
            const KernelMatrix k = kernel_matrix(alpha_coefficients(v, w));
            out.entries = Matrix(n, n);
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < n; ++j)
                out.entries(i, j) = m.leaf_measure() * sv[i] * k(i, j) * sw[j];
          },
          [&](const op::Square&) {
            out.entries = Matrix(m.internal_count(), n);
            for (std::size_t h = 0; h < m.internal_count(); ++h) {
              const DyadicIndex I = DyadicIndex::from_heap(h);
              const std::size_t lo = m.first_leaf(I), hi = m.last_leaf(I), mid = (lo + hi) / 2;
              const double c = 2.0 * std::sqrt(v.average(I)) * root / std::sqrt(I.length());
              for (std::size_t j = lo; j < hi; ++j)
                out.entries(h, j) = (j < mid ? c : -c) * sw[j];
            }
          },
          [&](const op::Embedding& e) {
            require_same_model(m, e.alpha.model());
            out.codomain_weight.reset();
            out.entries = Matrix(m.internal_count(), n);
            for (std::size_t h = 0; h < m.internal_count(); ++h) {
              const DyadicIndex I = DyadicIndex::from_heap(h);
              const double a = e.alpha.at_heap(h);
              if (a < 0) throw Error(ErrorCode::domain, "embedding coefficients must be nonnegative");
              const double c = std::sqrt(a) * root / I.length();
              for (std::size_t j = m.first_leaf(I); j < m.last_leaf(I); ++j)
                out.entries(h, j) = c * sw[j];
            }
          },
          [&](const op::HaarTerm& t) {
            if (!m.is_internal(t.index))
              throw Error(ErrorCode::invalid_index, "Haar term needs an internal interval");
            out.entries = Matrix(n, n);
            add_haar_piece(out.entries, m, t.index, 1.0, sv, sw);
          },
      },
      spec);
  return out;
}

double spectral_norm(const Matrix& a) {
  const std::size_t n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  double frob = 0.0;
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "matrix has non-finite entries");
    frob += x * x;
  }
  if (frob == 0.0) return 0.0;

  auto gram = [&](const std::vector<double>& x) { return a.apply_transpose(a.apply(x)); };
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double t : x) s += t * t;
    s = std::sqrt(s);
    for (double& t : x) t /= s;
    return s;
  };

  std::vector<double> x(n, 1.0);
  normalize(x);
  std::vector<double> y = gram(x);
  double ny = 0.0;
  for (double t : y) ny += t * t;
  if (std::sqrt(ny) <= 1e-14 * frob) {
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
    normalize(x);
    y = gram(x);
  }

  double lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) lambda += x[i] * y[i];
  constexpr int cap = 100000;
  for (int it = 0; it < cap; ++it) {
    x = y;
    if (normalize(x) == 0.0) return 0.0;
    y = gram(x);
    double next = 0.0, res = 0.0;
    for (std::size_t i = 0; i < n; ++i) next += x[i] * y[i];
    for (std::size_t i = 0; i < n; ++i) res += (y[i] - next * x[i]) * (y[i] - next * x[i]);
    const double change = std::abs(next - lambda);
    lambda = next;
    if (change <= 1e-15 * lambda) return std::sqrt(lambda);
    if (change <= 1e-12 * lambda && std::sqrt(res) <= 1e-6 * lambda) return std::sqrt(lambda);
  }
  throw ConvergenceError("power iteration hit the iteration cap", std::sqrt(std::max(lambda, 0.0)));
}

double spectral_norm(const OperatorMatrix& m) { return spectral_norm(m.entries); }

const char* to_string(SearchKind kind) {
  switch (kind) {
    case SearchKind::exhaustive: return "exhaustive";
    case SearchKind::sampled: return "sampled";
    case SearchKind::greedy: return "greedy";
  }
  return "unknown";
}

SearchKind search_kind_from_string(const std::string& s) {
  if (s == "exhaustive") return SearchKind::exhaustive;
  if (s == "sampled") return SearchKind::sampled;
  if (s == "greedy") return SearchKind::greedy;
  throw Error(ErrorCode::invalid_argument, "unknown sign search mode '" + s + "'");
}

namespace {

// Precomputed rank-one data so that each pattern costs one accumulation pass.
struct PatternEvaluator {
  const DyadicModel& m;
  std::vector<double> sv, sw;

  PatternEvaluator(const Weight& v, const Weight& w)
      : m(v.model()), sv(sqrt_values(v)), sw(sqrt_values(w)) {}

  double norm(const SignPattern& s) const {
    Matrix a(m.leaf_count(), m.leaf_count());
    for (std::size_t h = 0; h < m.internal_count(); ++h)
      add_haar_piece(a, m, DyadicIndex::from_heap(h), s.at_heap(h), sv, sw);
    return spectral_norm(a);
  }
};

bool better(double a, double b) { return a > b * (1.0 + 1e-13) + 1e-300; }

}  // namespace

double weighted_T_sigma_norm(const Weight& v, const Weight& w, const SignPattern& sigma) {
  require_same_model(v.model(), w.model());
  require_same_model(v.model(), sigma.model());
  return PatternEvaluator(v, w).norm(sigma);
}

SignSearchResult sup_sign_norm(const Weight& v, const Weight& w, const SignSearchMode& mode) {
  require_same_model(v.model(), w.model());
  const DyadicModel& m = v.model();
  const PatternEvaluator ev(v, w);
  SignSearchResult res{0.0, std::nullopt, SignPattern(m), mode.kind, 0, std::nullopt};
  const std::size_t n = m.internal_count();

  switch (mode.kind) {
    case SearchKind::exhaustive: {
      if (n > exhaustive_interval_cap)
        throw Error(ErrorCode::capacity, "exhaustive sign search supports at most 20 internal "
                                         "intervals; depth " + std::to_string(m.depth()) +
                                             " has " + std::to_string(n));
      // sigma and -sigma give the same norm: enumerate patterns with the top bit clear.
      const std::uint64_t total = std::uint64_t{1} << (n - 1);
      const std::size_t chunks = std::min<std::uint64_t>(total, 64);
      std::vector<std::pair<double, std::uint64_t>> best(chunks, {-1.0, 0});
      parallel_chunks(total, chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::uint64_t bits = b; bits < e; ++bits) {
          const double val = ev.norm(SignPattern::from_bits(m, bits));
          if (better(val, best[c].first)) best[c] = {val, bits};
        }
      });
      std::pair<double, std::uint64_t> top = best[0];
      for (std::size_t c = 1; c < chunks; ++c)
        if (better(best[c].first, top.first)) top = best[c];
      res.lower_bound = top.first;
      res.upper_bound = top.first;
      res.best_sigma = SignPattern::from_bits(m, top.second);
      res.evaluations = total;
      break;
    }
    case SearchKind::sampled: {
      res.seed = mode.seed;
      Rng rng(mode.seed);
      std::vector<SignPattern> pats;
      const std::uint64_t count = std::max<std::uint64_t>(mode.samples, 1);
      pats.reserve(count);
      for (std::uint64_t t = 0; t < count; ++t) {
        std::vector<signed char> s(n);
        for (auto& x : s) x = (rng() >> 63) ? -1 : 1;
        pats.emplace_back(m, std::move(s));
      }
      std::vector<double> vals(count);
      parallel_chunks(count, std::min<std::uint64_t>(count, 64),
                      [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t t = b; t < e; ++t) vals[t] = ev.norm(pats[t]);
                      });
      std::size_t arg = 0;
      for (std::size_t t = 1; t < count; ++t)
        if (better(vals[t], vals[arg])) arg = t;
      res.lower_bound = vals[arg];
      res.best_sigma = pats[arg];
      res.evaluations = count;
      break;
    }
    case SearchKind::greedy: {
      res.seed = mode.seed;
      Rng rng(mode.seed);
      res.lower_bound = -1.0;
      for (int r = 0; r < std::max(1, mode.restarts); ++r) {
        SignPattern s(m);
        for (std::size_t h = 0; h < n; ++h) s.set_heap(h, (rng() >> 63) ? -1 : 1);
        double cur = ev.norm(s);
        ++res.evaluations;
        for (bool improved = true; improved;) {
          improved = false;
          for (std::size_t h = 0; h < n; ++h) {
            s.flip_heap(h);
            const double val = ev.norm(s);
            ++res.evaluations;
            if (better(val, cur)) {
              cur = val;
              improved = true;
            } else {
              s.flip_heap(h);
            }
          }
        }
        if (better(cur, res.lower_bound)) {
          res.lower_bound = cur;
          res.best_sigma = s;
        }
      }
      break;
    }
  }
  return res;
}

std::pair<double, double> sign_average_identity(const LeafFunction& g, const Weight& v) {
  require_same_model(g.model(), v.model());
  const DyadicModel& m = g.model();
  const std::size_t n = m.internal_count();
  if (n > exhaustive_interval_cap)
    throw Error(ErrorCode::capacity, "sign averaging enumerates all patterns; at most 20 "
                                     "internal intervals are supported");
  const IntervalMap c = haar_coefficients(g);
  double rhs = 0.0;
  for (std::size_t h = 0; h < n; ++h) rhs += c.at_heap(h) * c.at_heap(h) * v.averages().at_heap(h);

  // Leaf values of each c_I h_I, then sum over half the patterns (sign-even integrand).
  const std::size_t L = m.leaf_count();
  std::vector<double> piece(n * L, 0.0);
  for (std::size_t h = 0; h < n; ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const std::size_t lo = m.first_leaf(I), hi = m.last_leaf(I), mid = (lo + hi) / 2;
    const double amp = c.at_heap(h) / std::sqrt(I.length());
    for (std::size_t i = lo; i < hi; ++i) piece[h * L + i] = i < mid ? amp : -amp;
  }
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  const std::size_t chunks = std::min<std::uint64_t>(total, 64);
  std::vector<double> partial(chunks, 0.0);
  parallel_chunks(total, chunks, [&](std::size_t ch, std::size_t b, std::size_t e) {
    std::vector<double> val(L);
    double acc = 0.0;
    for (std::uint64_t bits = b; bits < e; ++bits) {
      std::fill(val.begin(), val.end(), 0.0);
      for (std::size_t h = 0; h < n; ++h) {
        const double s = ((bits >> h) & 1u) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < L; ++i) val[i] += s * piece[h * L + i];
      }
      double integral = 0.0;
      for (std::size_t i = 0; i < L; ++i) integral += val[i] * val[i] * v.base()[i];
      acc += integral * m.leaf_measure();
    }
    partial[ch] = acc;
  });
  double sum = 0.0;
  for (double p : partial) sum += p;
  return {sum / static_cast<double>(total), rhs};
}

double t0_norm(const Weight& v, const Weight& w) {
  return spectral_norm(assemble(op::T0{}, v, w));
}

double square_function_norm(const Weight& v, const Weight& w) {
  return spectral_norm(assemble(op::Square{}, v, w));
}

ConditionReport square_function_testing(const Weight& v, const Weight& w) {
  require_same_model(v.model(), w.model());
  const DyadicModel& m = v.model();
  IntervalMap vals(m, m.depth() - 1);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    // Local square function of chi_J w, evaluated leafwise on J.
    std::vector<double> acc(m.last_leaf(J) - m.first_leaf(J), 0.0);
    const std::size_t base = m.first_leaf(J);
    for (int level = J.level; level < m.depth(); ++level) {
      const int d = level - J.level;
      for (std::uint64_t p = J.pos << d; p < ((J.pos + 1) << d); ++p) {
        const DyadicIndex I{level, p};
        const double diff = w.average(I.left()) - w.average(I.right());
        for (std::size_t i = m.first_leaf(I); i < m.last_leaf(I); ++i) acc[i - base] += diff * diff;
      }
    }
    double integral = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i) integral += acc[i] * v.base()[base + i];
    integral *= m.leaf_measure();
    vals.at_heap(h) = integral / (J.length() * w.average(J));
  }
  return report_from_map("square_function_testing", std::move(vals));
}

double embedding_norm_squared(const Weight& w, const AlphaCoefficients& alpha) {
  const double n = spectral_norm(assemble(op::Embedding{alpha}, w, w));
  return n * n;
}

Theorem02Bound theorem02_bound(const Weight& v, const Weight& w) {
  Theorem02Bound b;
  b.joint_a2 = joint_a2(v, w).constant;
  b.cond_12 = cond_12(v, w).constant;
  b.cond_13 = cond_13(v, w).constant;
  b.t0_norm = t0_norm(v, w);
  b.bound = std::sqrt(b.joint_a2) + std::sqrt(b.cond_12) + std::sqrt(b.cond_13) + 0.25 * b.t0_norm;
  return b;
}

}  // namespace hwl
