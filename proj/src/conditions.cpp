#include "hwl/conditions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "hwl/norms.hpp"
#include "hwl/rng.hpp"

namespace hwl {

ConditionReport report_from_map(std::string name, IntervalMap values) {
  ConditionReport r;
  r.name = std::move(name);
  std::size_t best = 0;
  for (std::size_t h = 1; h < values.size(); ++h)
    if (values.at_heap(h) > values.at_heap(best)) best = h;
  r.constant = values.at_heap(best);
  r.witness = DyadicIndex::from_heap(best);
  r.per_interval = std::move(values);
  return r;
}

namespace {

const DyadicModel& internal_model(const Weight& v, const Weight& w) {
  require_same_model(v.model(), w.model());
  return v.model();
}

// Per internal J: sum over internal I within J of own[I].
IntervalMap subtree_sums(const DyadicModel& m, const std::vector<double>& own) {
  IntervalMap out(m, m.depth() - 1);
  for (std::size_t h = m.internal_count(); h-- > 0;) {
    double s = own[h];
    const std::size_t l = 2 * h + 1;
    if (l < m.internal_count()) s += out.at_heap(l) + out.at_heap(l + 1);
    out.at_heap(h) = s;
  }
  return out;
}

double split(const Weight& u, const DyadicIndex& I) {
  return u.average(I.left()) - u.average(I.right());
}

}  // namespace

ConditionReport joint_a2(const Weight& v, const Weight& w) {
  const DyadicModel& m = internal_model(v, w);
  IntervalMap vals(m, m.depth());
  for (std::size_t h = 0; h < m.interval_count(); ++h)
    vals.at_heap(h) = v.averages().at_heap(h) * w.averages().at_heap(h);
  return report_from_map("joint_a2", std::move(vals));
}

ConditionReport cond_12(const Weight& v, const Weight& w) {
  const DyadicModel& m = internal_model(v, w);
  std::vector<double> own(m.internal_count());
  for (std::size_t h = 0; h < own.size(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const double d = split(w, I);
    own[h] = d * d * v.average(I) * I.length();
  }
  IntervalMap vals = subtree_sums(m, own);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    vals.at_heap(h) /= J.length() * w.average(J);
  }
  return report_from_map("cond_12", std::move(vals));
}

ConditionReport cond_13(const Weight& v, const Weight& w) {
  ConditionReport r = cond_12(w, v);
  r.name = "cond_13";
  return r;
}

namespace {

// Quadratic form F(sigma) = sigma^T G sigma for the local testing quantity on J.
// Only nested pairs couple, so G is stored sparsely per row.
struct LocalForm {
  std::vector<std::size_t> nodes;  // heap indices inside J, level-then-pos order
  std::vector<double> diag;
  std::vector<std::vector<std::pair<std::size_t, double>>> off;  // local index pairs

  std::size_t size() const { return nodes.size(); }

  double value(const std::vector<int>& s) const {
    double f = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
      double r = diag[k] * s[k];
      for (auto [j, g] : off[k]) r += g * s[j];
      f += s[k] * r;
    }
    return f;
  }
  std::vector<double> apply(const std::vector<int>& s) const {
    std::vector<double> r(size());
    for (std::size_t k = 0; k < size(); ++k) {
      double acc = diag[k] * s[k];
      for (auto [j, g] : off[k]) acc += g * s[j];
      r[k] = acc;
    }
    return r;
  }
};

// Local form for f = chi_J w against weight v: coefficients c_I = (w, h_I).
LocalForm build_local_form(const Weight& v, const Weight& w, const DyadicIndex& J) {
  const DyadicModel& m = v.model();
  LocalForm lf;
  std::vector<int> local_of(m.internal_count(), -1);
  for (int level = J.level; level < m.depth(); ++level) {
    const int d = level - J.level;
    for (std::uint64_t p = J.pos << d; p < ((J.pos + 1) << d); ++p) {
      const std::size_t h = DyadicIndex{level, p}.heap();
      local_of[h] = static_cast<int>(lf.nodes.size());
      lf.nodes.push_back(h);
    }
  }
  const std::size_t n = lf.nodes.size();
  std::vector<double> c(n), hv(n);
  lf.diag.resize(n);
  lf.off.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const DyadicIndex I = DyadicIndex::from_heap(lf.nodes[k]);
    c[k] = std::sqrt(I.length()) * 0.5 * split(w, I);
    hv[k] = std::sqrt(I.length()) * 0.5 * split(v, I);  // (v, h_I)
    lf.diag[k] = c[k] * c[k] * v.average(I);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const DyadicIndex K = DyadicIndex::from_heap(lf.nodes[k]);
    // h_I is constant (+-|I|^{-1/2}) on every strict descendant K.
    for (int level = J.level; level < K.level; ++level) {
      const DyadicIndex I{level, K.pos >> (K.level - level)};
      // Sign of h_I on K: + if K lies in the left half of I.
      const int s = ((K.pos >> (K.level - level - 1)) % 2 == 0) ? 1 : -1;
      const std::size_t i = local_of[I.heap()];
      const double g = c[k] * c[i] * s / std::sqrt(I.length()) * hv[k];
      lf.off[k].push_back({i, g});
      lf.off[i].push_back({k, g});
    }
  }
  return lf;
}

double exhaustive_max(const LocalForm& lf) {
  const std::size_t n = lf.size();
  // Dense copy; Gray code walk over sign patterns with the first sign fixed (F is even).
  std::vector<double> g(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    g[k * n + k] = lf.diag[k];
    for (auto [j, val] : lf.off[k]) g[k * n + j] += val;
  }
  std::vector<int> s(n, 1);
  std::vector<double> r = lf.apply(s);
  double f = 0.0;
  for (std::size_t k = 0; k < n; ++k) f += s[k] * r[k];
  double best = f;
  if (n <= 1) return best;
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  for (std::uint64_t step = 1; step < total; ++step) {
    const std::size_t k = 1 + static_cast<std::size_t>(std::countr_zero(step));
    const int old = s[k];
    f -= 4.0 * old * (r[k] - g[k * n + k] * old);
    for (std::size_t j = 0; j < n; ++j) r[j] -= 2.0 * old * g[j * n + k];
    s[k] = -old;
    best = std::max(best, f);
  }
  return best;
}

double greedy_max(const LocalForm& lf, int restarts, std::uint64_t seed) {
  const std::size_t n = lf.size();
  Rng rng(seed);
  double best = 0.0;
  for (int rs = 0; rs < std::max(1, restarts); ++rs) {
    std::vector<int> s(n);
    for (auto& x : s) x = (rng() >> 63) ? -1 : 1;
    if (rs == 0) std::fill(s.begin(), s.end(), 1);
    std::vector<double> r = lf.apply(s);
    double f = 0.0;
    for (std::size_t k = 0; k < n; ++k) f += s[k] * r[k];
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t k = 0; k < n; ++k) {
        const double gain = -4.0 * s[k] * (r[k] - lf.diag[k] * s[k]);
        if (gain > 1e-14 * std::abs(f) + 1e-300) {
          const int old = s[k];
          r[k] -= 2.0 * old * lf.diag[k];
          for (auto [j, val] : lf.off[k]) r[j] -= 2.0 * old * val;
          s[k] = -old;
          f += gain;
          improved = true;
        }
      }
    }
    best = std::max(best, f);
  }
  return best;
}

double sampled_max(const LocalForm& lf, std::uint64_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> s(lf.size());
  double best = 0.0;
  for (std::uint64_t t = 0; t < std::max<std::uint64_t>(samples, 1); ++t) {
    for (auto& x : s) x = (rng() >> 63) ? -1 : 1;
    best = std::max(best, lf.value(s));
  }
  return best;
}

ConditionReport tsigma_one(const Weight& v, const Weight& w, const SignSearchMode& mode,
                           const char* name) {
  const DyadicModel& m = v.model();
  if (mode.kind == SearchKind::exhaustive &&
      m.internal_count() > exhaustive_interval_cap)
    throw Error(ErrorCode::capacity,
                "exhaustive testing needs at most 20 internal intervals under each J; depth " +
                    std::to_string(m.depth()) + " has " + std::to_string(m.internal_count()));
  IntervalMap vals(m, m.depth() - 1);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    const LocalForm lf = build_local_form(v, w, J);
    double f = 0.0;
    switch (mode.kind) {
      case SearchKind::exhaustive: f = exhaustive_max(lf); break;
      case SearchKind::greedy: f = greedy_max(lf, mode.restarts, derive_seed(mode.seed, h)); break;
      case SearchKind::sampled: f = sampled_max(lf, mode.samples, derive_seed(mode.seed, h)); break;
    }
    vals.at_heap(h) = f / (J.length() * w.average(J));
  }
  ConditionReport r = report_from_map(name, std::move(vals));
  r.mode = to_string(mode.kind);
  if (mode.kind != SearchKind::exhaustive) r.note = "lower bound (non-exhaustive sign search)";
  return r;
}

}  // namespace

std::pair<ConditionReport, ConditionReport> sawyer_tsigma_test(const Weight& v, const Weight& w,
                                                                const SignSearchMode& mode) {
  internal_model(v, w);
  return {tsigma_one(v, w, mode, "sawyer_tsigma_1"), tsigma_one(w, v, mode, "sawyer_tsigma_2")};
}

namespace {

ConditionReport t0_one(const Weight& v, const Weight& w, const IntervalMap& alpha,
                       const char* name) {
  const DyadicModel& m = v.model();
  std::vector<double> term(m.internal_count());
  for (std::size_t h = 0; h < term.size(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    term[h] = alpha.at_heap(h) * w.average(I) / I.length();
  }
  IntervalMap vals(m, m.depth() - 1);
  const double leaf = m.leaf_measure();
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    double integral = 0.0;
    for (std::size_t i = m.first_leaf(J); i < m.last_leaf(J); ++i) {
      double s = 0.0;
      for (int level = J.level; level < m.depth(); ++level)
        s += term[DyadicIndex{level, i >> (m.depth() - level)}.heap()];
      integral += s * s * v.base()[i];
    }
    vals.at_heap(h) = integral * leaf / (J.length() * w.average(J));
  }
  return report_from_map(name, std::move(vals));
}

}  // namespace

std::pair<ConditionReport, ConditionReport> sawyer_t0_test(const Weight& v, const Weight& w) {
  internal_model(v, w);
  const AlphaCoefficients alpha = alpha_coefficients(v, w);
  return {t0_one(v, w, alpha, "sawyer_t0_1"), t0_one(w, v, alpha, "sawyer_t0_2")};
}

ConditionReport carleson_norm(const IntervalMap& beta) {
  const DyadicModel& m = beta.model();
  if (beta.max_level() < m.depth() - 1)
    throw Error(ErrorCode::invalid_argument, "Carleson data must cover all internal intervals");
  std::vector<double> own(m.internal_count());
  for (std::size_t h = 0; h < own.size(); ++h) {
    own[h] = beta.at_heap(h);
    if (!(own[h] >= 0.0))
      throw Error(ErrorCode::domain, "negative Carleson mass at heap index " + std::to_string(h));
  }
  IntervalMap vals = subtree_sums(m, own);
  for (std::size_t h = 0; h < m.internal_count(); ++h)
    vals.at_heap(h) /= DyadicIndex::from_heap(h).length();
  return report_from_map("carleson_norm", std::move(vals));
}

std::pair<Weight, Weight> normalize_pair(const Weight& v, const Weight& w) {
  const double a2 = joint_a2(v, w).constant;
  const double s = 1.0 / std::sqrt(a2);
  return {v.scaled(s), w.scaled(s)};
}

CarlesonFamilies sigma_k_families(const Weight& v0, const Weight& w0, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw Error(ErrorCode::invalid_argument, "q must lie in (0, 1)");
  const DyadicModel& m = internal_model(v0, w0);
  const double a2 = joint_a2(v0, w0).constant;
  const auto [v, w] = normalize_pair(v0, w0);
  CarlesonFamilies out{q, 1.0 / std::sqrt(a2), {}, alpha_coefficients(v, w), {}, {}};
  out.family.assign(m.internal_count(), -1);
  int kmax = -1;
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const double p = v.averages().at_heap(h) * w.averages().at_heap(h);
    if (p > 1.0 + 1e-12) continue;
    // q^{k+1} <= p <= q^k; the shared endpoint q^{k+1} goes to the deeper family.
    const int k = std::max(0, static_cast<int>(std::floor(std::log(std::min(p, 1.0)) / std::log(q))));
    out.family[h] = k;
    kmax = std::max(kmax, k);
  }
  IntervalMap agg(m, m.depth() - 1);
  for (int k = 0; k <= kmax; ++k) {
    IntervalMap part(m, m.depth() - 1);
    for (std::size_t h = 0; h < m.internal_count(); ++h)
      if (out.family[h] == k) {
        part.at_heap(h) = out.beta.at_heap(h);
        agg.at_heap(h) += std::pow(q, k / 4.0) * out.beta.at_heap(h);
      }
    ConditionReport r = carleson_norm(part);
    r.name = "sigma_" + std::to_string(k);
    out.per_k.push_back(std::move(r));
  }
  out.aggregate = carleson_norm(agg);
  out.aggregate.name = "sigma_aggregate";
  return out;
}

ConditionReport lemma33_constant(const Weight& v0, const Weight& w0, double alpha_exp) {
  if (!(alpha_exp > 0.0 && alpha_exp <= 1.0) || alpha_exp == 0.5)
    throw Error(ErrorCode::invalid_argument, "exponent must lie in (0, 1] and differ from 1/2");
  const DyadicModel& m = internal_model(v0, w0);
  const auto [v, w] = normalize_pair(v0, w0);
  const AlphaCoefficients beta = alpha_coefficients(v, w);
  std::vector<double> own(m.internal_count());
  for (std::size_t h = 0; h < own.size(); ++h)
    own[h] = std::pow(v.averages().at_heap(h) * w.averages().at_heap(h), alpha_exp) *
             beta.at_heap(h);
  IntervalMap vals = subtree_sums(m, own);
  const double e = std::min(alpha_exp, 0.5);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    vals.at_heap(h) /= J.length() * std::pow(v.average(J) * w.average(J), e);
  }
  ConditionReport r = report_from_map("lemma33", std::move(vals));
  r.note = "pair rescaled so that sup <v><w> = 1";
  return r;
}

ConditionReport bump_condition(const Weight& v, const Weight& w, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::invalid_argument, "bump exponent must be positive");
  const DyadicModel& m = internal_model(v, w);
  const IntervalMap va = averages(pow(v.base(), 1.0 + eta));
  const IntervalMap wa = averages(pow(w.base(), 1.0 + eta));
  IntervalMap vals(m, m.depth());
  for (std::size_t h = 0; h < m.interval_count(); ++h) vals.at_heap(h) = va.at_heap(h) * wa.at_heap(h);
  return report_from_map("bump", std::move(vals));
}

ConditionReport fkp_condition(const Weight& u) {
  const DyadicModel& m = u.model();
  std::vector<double> own(m.internal_count());
  for (std::size_t h = 0; h < own.size(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const double r = split(u, I) / u.average(I);
    own[h] = u.average(I) * r * r * I.length();
  }
  IntervalMap vals = subtree_sums(m, own);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    vals.at_heap(h) /= J.length() * u.average(J);
  }
  ConditionReport r = report_from_map("fkp", std::move(vals));
  r.note = "computable proxy for A_infinity; the set-function condition is not evaluated";
  return r;
}

ConditionReport doubling_constant(const Weight& u) {
  const DyadicModel& m = u.model();
  IntervalMap vals(m, m.depth() - 1);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    vals.at_heap(h) = u.average(I) / std::min(u.average(I.left()), u.average(I.right()));
  }
  ConditionReport r = report_from_map("doubling", std::move(vals));
  r.note = "dyadic doubling proxy; A_infinity itself is not evaluated";
  return r;
}

ConditionReport embedding_testing(const Weight& w, const IntervalMap& alpha) {
  const DyadicModel& m = w.model();
  require_same_model(m, alpha.model());
  std::vector<double> own(m.internal_count());
  for (std::size_t h = 0; h < own.size(); ++h) {
    const double a = w.averages().at_heap(h);
    own[h] = a * a * alpha.at_heap(h);
  }
  IntervalMap vals = subtree_sums(m, own);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex J = DyadicIndex::from_heap(h);
    vals.at_heap(h) /= J.length() * w.average(J);
  }
  return report_from_map("embedding_testing", std::move(vals));
}

}  // namespace hwl
