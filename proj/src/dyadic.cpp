#include "hwl/dyadic.hpp"

#include <cmath>
#include <string>

namespace hwl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_index: return "invalid_index";
    case ErrorCode::model_mismatch: return "model_mismatch";
    case ErrorCode::domain: return "domain";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::io: return "io";
    case ErrorCode::stencil: return "stencil";
  }
  return "unknown";
}

double DyadicIndex::length() const { return std::ldexp(1.0, -level); }

bool DyadicIndex::contains(const DyadicIndex& other) const {
  if (other.level < level) return false;
  return (other.pos >> (other.level - level)) == pos;
}

DyadicIndex DyadicIndex::from_heap(std::size_t h) {
  int level = 0;
  while (((std::size_t{2} << level) - 1) <= h) ++level;
  return {level, h - ((std::size_t{1} << level) - 1)};
}

DyadicModel::DyadicModel(int depth) : depth_(depth) {
  if (depth < 1 || depth > 24)
    throw Error(ErrorCode::invalid_argument,
                "depth must be in [1, 24], got " + std::to_string(depth));
}

bool DyadicModel::is_valid(const DyadicIndex& idx) const {
  return idx.level >= 0 && idx.level <= depth_ &&
         idx.pos < (std::uint64_t{1} << idx.level);
}

bool DyadicModel::is_internal(const DyadicIndex& idx) const {
  return is_valid(idx) && idx.level < depth_;
}

void require_same_model(const DyadicModel& a, const DyadicModel& b) {
  if (!(a == b))
    throw Error(ErrorCode::model_mismatch,
                "model depth mismatch: " + std::to_string(a.depth()) + " vs " +
                    std::to_string(b.depth()));
}

LeafFunction::LeafFunction(DyadicModel model, std::vector<double> values)
    : model_(model), values_(std::move(values)) {
  if (values_.size() != model_.leaf_count())
    throw Error(ErrorCode::invalid_argument,
                "expected " + std::to_string(model_.leaf_count()) +
                    " leaf values, got " + std::to_string(values_.size()));
}

LeafFunction LeafFunction::constant(DyadicModel model, double c) {
  return LeafFunction(model, std::vector<double>(model.leaf_count(), c));
}

LeafFunction LeafFunction::indicator(DyadicModel model, const DyadicIndex& idx) {
  if (!model.is_valid(idx)) throw Error(ErrorCode::invalid_index, "interval outside model");
  std::vector<double> v(model.leaf_count(), 0.0);
  for (std::size_t i = model.first_leaf(idx); i < model.last_leaf(idx); ++i) v[i] = 1.0;
  return LeafFunction(model, std::move(v));
}

double LeafFunction::integral() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return s * model_.leaf_measure();
}

double LeafFunction::inner(const LeafFunction& other) const {
  require_same_model(model_, other.model_);
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
  return s * model_.leaf_measure();
}

double LeafFunction::norm2() const { return inner(*this); }

namespace {
template <class Op>
LeafFunction zip(const LeafFunction& a, const LeafFunction& b, Op op) {
  require_same_model(a.model(), b.model());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return LeafFunction(a.model(), std::move(out));
}
template <class Op>
LeafFunction map(const LeafFunction& a, Op op) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i]);
  return LeafFunction(a.model(), std::move(out));
}
}  // namespace

LeafFunction operator*(const LeafFunction& a, const LeafFunction& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
LeafFunction operator+(const LeafFunction& a, const LeafFunction& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
LeafFunction operator-(const LeafFunction& a, const LeafFunction& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
LeafFunction operator*(double s, const LeafFunction& a) {
  return map(a, [s](double x) { return s * x; });
}
LeafFunction sqrt(const LeafFunction& a) {
  return map(a, [](double x) { return std::sqrt(x); });
}
LeafFunction pow(const LeafFunction& a, double exponent) {
  return map(a, [exponent](double x) { return std::pow(x, exponent); });
}

IntervalMap::IntervalMap(DyadicModel model, int max_level, double fill)
    : model_(model), max_level_(max_level) {
  if (max_level < 0 || max_level > model.depth())
    throw Error(ErrorCode::invalid_argument, "interval map level out of range");
  data_.assign((std::size_t{2} << max_level) - 1, fill);
}

IntervalMap averages(const LeafFunction& f) {
  const DyadicModel& m = f.model();
  IntervalMap out(m, m.depth());
  const std::size_t leaf_base = m.leaf_count() - 1;
  for (std::size_t i = 0; i < m.leaf_count(); ++i) out.at_heap(leaf_base + i) = f[i];
  for (std::size_t h = leaf_base; h-- > 0;)
    out.at_heap(h) = 0.5 * (out.at_heap(2 * h + 1) + out.at_heap(2 * h + 2));
  return out;
}

Weight::Weight(LeafFunction base) : base_(std::move(base)), averages_(hwl::averages(base_)) {
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (!(base_[i] >= min_value) || !std::isfinite(base_[i]))
      throw Error(ErrorCode::domain, "weight value at leaf " + std::to_string(i) +
                                         " is below the minimum 1e-9 or not finite");
  }
}

Weight Weight::scaled(double factor) const { return Weight(factor * base_); }

LeafFunction haar_function(const DyadicIndex& idx, const DyadicModel& model) {
  if (!model.is_internal(idx))
    throw Error(ErrorCode::invalid_index, "Haar functions exist only for internal intervals");
  std::vector<double> v(model.leaf_count(), 0.0);
  const double amp = 1.0 / std::sqrt(idx.length());
  const std::size_t a = model.first_leaf(idx), b = model.last_leaf(idx), mid = (a + b) / 2;
  for (std::size_t i = a; i < mid; ++i) v[i] = amp;
  for (std::size_t i = mid; i < b; ++i) v[i] = -amp;
  return LeafFunction(model, std::move(v));
}

IntervalMap haar_coefficients(const LeafFunction& f) {
  const DyadicModel& m = f.model();
  const IntervalMap avg = averages(f);
  IntervalMap out(m, m.depth() - 1);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    out.at_heap(h) = std::sqrt(I.length()) * 0.5 * (avg[I.left()] - avg[I.right()]);
  }
  return out;
}

LeafFunction DisbalancedHaar::realize(const DyadicModel& model) const {
  std::vector<double> v(model.leaf_count(), 0.0);
  const std::size_t a = model.first_leaf(index), b = model.last_leaf(index), mid = (a + b) / 2;
  for (std::size_t i = a; i < mid; ++i) v[i] = left_value;
  for (std::size_t i = mid; i < b; ++i) v[i] = right_value;
  return LeafFunction(model, std::move(v));
}

DisbalancedHaar disbalanced_haar(const Weight& w, const DyadicIndex& idx) {
  if (!w.model().is_internal(idx))
    throw Error(ErrorCode::invalid_index, "disbalanced Haar needs an internal interval");
  const double wi = w.average(idx), wl = w.average(idx.left()), wr = w.average(idx.right());
  if (!(wi > 0 && wl > 0 && wr > 0))
    throw Error(ErrorCode::domain, "nonpositive weight average");
  DisbalancedHaar d;
  d.index = idx;
  const double len = idx.length();
  d.x = std::sqrt(wi / (wl * wr));
  d.a = d.x / (2.0 * std::sqrt(len)) * (wl - wr) / wi;
  const double amp = d.x / std::sqrt(len);
  d.left_value = amp - d.a;
  d.right_value = -amp - d.a;
  return d;
}

double relative_split(const Weight& u, const DyadicIndex& idx) {
  return std::abs(u.average(idx.left()) - u.average(idx.right())) / u.average(idx);
}

AlphaCoefficients alpha_coefficients(const Weight& v, const Weight& w) {
  require_same_model(v.model(), w.model());
  const DyadicModel& m = v.model();
  IntervalMap out(m, m.depth() - 1);
  for (std::size_t h = 0; h < m.internal_count(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    out.at_heap(h) = relative_split(v, I) * relative_split(w, I) * I.length();
  }
  return out;
}

}  // namespace hwl
