#include "hwl/operators.hpp"

#include <cmath>

namespace hwl {

SignPattern::SignPattern(DyadicModel model, int sign)
    : model_(model), signs_(model.internal_count(), static_cast<signed char>(sign < 0 ? -1 : 1)) {}

SignPattern::SignPattern(DyadicModel model, std::vector<signed char> signs)
    : model_(model), signs_(std::move(signs)) {
  if (signs_.size() != model_.internal_count())
    throw Error(ErrorCode::invalid_argument, "sign pattern length does not match the model");
  for (auto& s : signs_)
    if (s != 1 && s != -1) throw Error(ErrorCode::invalid_argument, "signs must be +1 or -1");
}

SignPattern SignPattern::from_bits(DyadicModel model, std::uint64_t bits) {
  SignPattern p(model);
  for (std::size_t h = 0; h < p.signs_.size() && h < 64; ++h)
    if ((bits >> h) & 1u) p.signs_[h] = -1;
  return p;
}

SignPattern SignPattern::negated() const {
  SignPattern p = *this;
  for (auto& s : p.signs_) s = static_cast<signed char>(-s);
  return p;
}

namespace {

// Adds coef * h_I to out for every internal I (heap order).
void synthesize(const DyadicModel& m, const std::vector<double>& coef, std::vector<double>& out) {
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    if (coef[h] == 0.0) continue;
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const double amp = coef[h] / std::sqrt(I.length());
    const std::size_t a = m.first_leaf(I), b = m.last_leaf(I), mid = (a + b) / 2;
    for (std::size_t i = a; i < mid; ++i) out[i] += amp;
    for (std::size_t i = mid; i < b; ++i) out[i] -= amp;
  }
}

}  // namespace

LeafFunction apply_T_sigma(const LeafFunction& f, const SignPattern& sigma) {
  require_same_model(f.model(), sigma.model());
  const DyadicModel& m = f.model();
  const IntervalMap c = haar_coefficients(f);
  std::vector<double> coef(m.internal_count());
  for (std::size_t h = 0; h < coef.size(); ++h) coef[h] = sigma.at_heap(h) * c.at_heap(h);
  std::vector<double> out(m.leaf_count(), 0.0);
  synthesize(m, coef, out);
  return LeafFunction(m, std::move(out));
}

LeafFunction apply_weighted_T_sigma(const LeafFunction& f, const SignPattern& sigma,
                                    const Weight& v, const Weight& w) {
  require_same_model(v.model(), w.model());
  return sqrt(v.base()) * apply_T_sigma(sqrt(w.base()) * f, sigma);
}

LeafFunction apply_T0(const LeafFunction& f, const AlphaCoefficients& alpha) {
  require_same_model(f.model(), alpha.model());
  const DyadicModel& m = f.model();
  const IntervalMap avg = averages(f);
  std::vector<double> out(m.leaf_count(), 0.0);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const double term = alpha.at_heap(h) / I.length() * avg.at_heap(h);
    for (std::size_t i = m.first_leaf(I); i < m.last_leaf(I); ++i) out[i] += term;
  }
  return LeafFunction(m, std::move(out));
}

KernelMatrix kernel_matrix(const AlphaCoefficients& alpha) {
  const DyadicModel& m = alpha.model();
  const std::size_t n = m.leaf_count();
  // Cumulative kernel along each root-to-node path: k(i,j) = acc(lca(i,j)).
  std::vector<double> acc(m.internal_count(), 0.0);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const double own = alpha.at_heap(h) / (I.length() * I.length());
    acc[h] = (h == 0 ? 0.0 : acc[I.parent().heap()]) + own;
  }
  KernelMatrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        k(i, j) = acc[DyadicIndex{m.depth() - 1, i / 2}.heap()];
        continue;
      }
      std::size_t a = i, b = j;
      int level = m.depth();
      while (a != b) {
        a >>= 1;
        b >>= 1;
        --level;
      }
      k(i, j) = acc[DyadicIndex{level, a}.heap()];
    }
  }
  return k;
}

LeafFunction square_function(const LeafFunction& f) {
  const DyadicModel& m = f.model();
  const IntervalMap avg = averages(f);
  std::vector<double> out(m.leaf_count(), 0.0);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const double d = avg[I.left()] - avg[I.right()];
    const double d2 = d * d;
    for (std::size_t i = m.first_leaf(I); i < m.last_leaf(I); ++i) out[i] += d2;
  }
  for (double& x : out) x = std::sqrt(x);
  return LeafFunction(m, std::move(out));
}

FourSumDecomposition four_sum_decomposition(const LeafFunction& f, const LeafFunction& g,
                                            const SignPattern& sigma, const Weight& v,
                                            const Weight& w) {
  require_same_model(f.model(), g.model());
  require_same_model(f.model(), sigma.model());
  require_same_model(v.model(), w.model());
  require_same_model(f.model(), v.model());
  const DyadicModel& m = f.model();
  const LeafFunction fw = f * sqrt(w.base());
  const LeafFunction gv = g * sqrt(v.base());
  const IntervalMap fw_avg = averages(fw), gv_avg = averages(gv);

  FourSumDecomposition out;
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    const DisbalancedHaar hw = disbalanced_haar(w, I);
    const DisbalancedHaar hv = disbalanced_haar(v, I);
    const double half = 0.5 * I.length();
    // a = (f w^{-1/2}, h^w_I)_w and c = (g v^{-1/2}, h^v_I)_v.
    const double a = half * (hw.left_value * fw_avg[I.left()] + hw.right_value * fw_avg[I.right()]);
    const double c = half * (hv.left_value * gv_avg[I.left()] + hv.right_value * gv_avg[I.right()]);
    const double len = I.length();
    const double s = sigma.at_heap(h) / (hv.x * hw.x);
    out.sigma1 += s * c * a;
    out.sigma2 += s * c * fw_avg.at_heap(h) * hw.a * len;
    out.sigma3 += s * gv_avg.at_heap(h) * a * hv.a * len;
    out.sigma4 += s * gv_avg.at_heap(h) * fw_avg.at_heap(h) * hv.a * hw.a * len * len;
  }
  out.total = out.sigma1 + out.sigma2 + out.sigma3 + out.sigma4;
  return out;
}

double embedding_form(const LeafFunction& f, const Weight& w, const AlphaCoefficients& alpha) {
  require_same_model(f.model(), w.model());
  require_same_model(f.model(), alpha.model());
  const IntervalMap avg = averages(f * sqrt(w.base()));
  double s = 0.0;
  for (std::size_t h = 0; h < f.model().internal_count(); ++h)
    s += avg.at_heap(h) * avg.at_heap(h) * alpha.at_heap(h);
  return s;
}

double bilinear_T0_form(const LeafFunction& f, const LeafFunction& g, const Weight& v,
                        const Weight& w) {
  require_same_model(f.model(), g.model());
  require_same_model(v.model(), w.model());
  require_same_model(f.model(), v.model());
  const AlphaCoefficients alpha = alpha_coefficients(v, w);
  const IntervalMap fa = averages(f * sqrt(w.base()));
  const IntervalMap ga = averages(g * sqrt(v.base()));
  double s = 0.0;
  for (std::size_t h = 0; h < f.model().internal_count(); ++h)
    s += ga.at_heap(h) * fa.at_heap(h) * alpha.at_heap(h);
  return s;
}

}  // namespace hwl
