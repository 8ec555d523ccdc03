#pragma once

#include <cstdint>
#include <vector>

#include "hwl/dyadic.hpp"
#include "hwl/matrix.hpp"

namespace hwl {

class SignPattern {
 public:
  explicit SignPattern(DyadicModel model, int sign = +1);
  SignPattern(DyadicModel model, std::vector<signed char> signs);
  // Bit h set means sigma = -1 on the interval with heap index h.
  static SignPattern from_bits(DyadicModel model, std::uint64_t bits);

  const DyadicModel& model() const { return model_; }
  int operator[](const DyadicIndex& idx) const { return signs_[idx.heap()]; }
  int at_heap(std::size_t h) const { return signs_[h]; }
  void set_heap(std::size_t h, int s) { signs_[h] = static_cast<signed char>(s < 0 ? -1 : 1); }
  void flip_heap(std::size_t h) { signs_[h] = static_cast<signed char>(-signs_[h]); }
  SignPattern negated() const;
  const std::vector<signed char>& signs() const { return signs_; }

  friend bool operator==(const SignPattern&, const SignPattern&) = default;

 private:
  DyadicModel model_;
  std::vector<signed char> signs_;
};

// Leaf-pair kernel values k(x_i, x_j).
using KernelMatrix = Matrix;

struct FourSumDecomposition {
  double sigma1 = 0, sigma2 = 0, sigma3 = 0, sigma4 = 0;
  double total = 0;
};

LeafFunction apply_T_sigma(const LeafFunction& f, const SignPattern& sigma);
LeafFunction apply_weighted_T_sigma(const LeafFunction& f, const SignPattern& sigma,
                                    const Weight& v, const Weight& w);
LeafFunction apply_T0(const LeafFunction& f, const AlphaCoefficients& alpha);
KernelMatrix kernel_matrix(const AlphaCoefficients& alpha);

// Pointwise square root of sum over internal I containing x of |<f>_{I-} - <f>_{I+}|^2.
LeafFunction square_function(const LeafFunction& f);

FourSumDecomposition four_sum_decomposition(const LeafFunction& f, const LeafFunction& g,
                                            const SignPattern& sigma, const Weight& v,
                                            const Weight& w);

double embedding_form(const LeafFunction& f, const Weight& w, const AlphaCoefficients& alpha);
double bilinear_T0_form(const LeafFunction& f, const LeafFunction& g, const Weight& v,
                        const Weight& w);

}  // namespace hwl
