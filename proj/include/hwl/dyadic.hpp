#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hwl/error.hpp"

namespace hwl {

// Dyadic interval [pos 2^-level, (pos+1) 2^-level) of [0,1).
struct DyadicIndex {
  int level = 0;
  std::uint64_t pos = 0;

  DyadicIndex left() const { return {level + 1, 2 * pos}; }
  DyadicIndex right() const { return {level + 1, 2 * pos + 1}; }
  DyadicIndex parent() const { return {level - 1, pos / 2}; }
  double length() const;
  bool contains(const DyadicIndex& other) const;

  // Breadth-first (heap) numbering: 2^level - 1 + pos.
  std::size_t heap() const { return (std::size_t{1} << level) - 1 + pos; }
  static DyadicIndex from_heap(std::size_t h);

  friend bool operator==(const DyadicIndex&, const DyadicIndex&) = default;
};

class DyadicModel {
 public:
  explicit DyadicModel(int depth);

  int depth() const { return depth_; }
  std::size_t leaf_count() const { return std::size_t{1} << depth_; }
  std::size_t internal_count() const { return leaf_count() - 1; }
  // All intervals including leaves.
  std::size_t interval_count() const { return 2 * leaf_count() - 1; }
  double leaf_measure() const { return 1.0 / static_cast<double>(leaf_count()); }

  // Leaves of I as a half-open range [first, last).
  std::size_t first_leaf(const DyadicIndex& idx) const {
    return static_cast<std::size_t>(idx.pos) << (depth_ - idx.level);
  }
  std::size_t last_leaf(const DyadicIndex& idx) const {
    return first_leaf(idx) + (std::size_t{1} << (depth_ - idx.level));
  }
  DyadicIndex leaf(std::size_t i) const { return {depth_, i}; }
  bool is_internal(const DyadicIndex& idx) const;
  bool is_valid(const DyadicIndex& idx) const;

  friend bool operator==(const DyadicModel&, const DyadicModel&) = default;

 private:
  int depth_;
};

void require_same_model(const DyadicModel& a, const DyadicModel& b);

class LeafFunction {
 public:
  LeafFunction(DyadicModel model, std::vector<double> values);
  static LeafFunction constant(DyadicModel model, double c);
  static LeafFunction indicator(DyadicModel model, const DyadicIndex& idx);

  const DyadicModel& model() const { return model_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double integral() const;
  double inner(const LeafFunction& other) const;
  double norm2() const;  // ||f||_2^2

 private:
  DyadicModel model_;
  std::vector<double> values_;
};

// Pointwise helpers.
LeafFunction operator*(const LeafFunction& a, const LeafFunction& b);
LeafFunction operator+(const LeafFunction& a, const LeafFunction& b);
LeafFunction operator-(const LeafFunction& a, const LeafFunction& b);
LeafFunction operator*(double s, const LeafFunction& a);
LeafFunction sqrt(const LeafFunction& a);
LeafFunction pow(const LeafFunction& a, double exponent);

// Real values indexed by dyadic intervals of levels 0..max_level.
class IntervalMap {
 public:
  IntervalMap(DyadicModel model, int max_level, double fill = 0.0);

  const DyadicModel& model() const { return model_; }
  int max_level() const { return max_level_; }
  std::size_t size() const { return data_.size(); }
  double& operator[](const DyadicIndex& idx) { return data_[idx.heap()]; }
  double operator[](const DyadicIndex& idx) const { return data_[idx.heap()]; }
  double& at_heap(std::size_t h) { return data_[h]; }
  double at_heap(std::size_t h) const { return data_[h]; }
  std::span<const double> data() const { return data_; }

 private:
  DyadicModel model_;
  int max_level_;
  std::vector<double> data_;
};

// <f>_I for all intervals, levels 0..N.
IntervalMap averages(const LeafFunction& f);

class Weight {
 public:
  static constexpr double min_value = 1e-9;

  explicit Weight(LeafFunction base);

  const DyadicModel& model() const { return base_.model(); }
  const LeafFunction& base() const { return base_; }
  const IntervalMap& averages() const { return averages_; }
  double average(const DyadicIndex& idx) const { return averages_[idx]; }
  Weight scaled(double factor) const;

 private:
  LeafFunction base_;
  IntervalMap averages_;
};

LeafFunction haar_function(const DyadicIndex& idx, const DyadicModel& model);

// (f, h_I) for every internal I.
IntervalMap haar_coefficients(const LeafFunction& f);

struct DisbalancedHaar {
  DyadicIndex index;
  double x = 1.0;
  double a = 0.0;
  double left_value = 0.0;   // h^w_I on I_-
  double right_value = 0.0;  // h^w_I on I_+

  LeafFunction realize(const DyadicModel& model) const;
};

DisbalancedHaar disbalanced_haar(const Weight& w, const DyadicIndex& idx);

// alpha_I over internal intervals.
using AlphaCoefficients = IntervalMap;

AlphaCoefficients alpha_coefficients(const Weight& v, const Weight& w);

// Signed relative split |<u>_{I-} - <u>_{I+}| / <u>_I, used throughout.
double relative_split(const Weight& u, const DyadicIndex& idx);

}  // namespace hwl
