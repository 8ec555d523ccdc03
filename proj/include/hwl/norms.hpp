#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "hwl/conditions.hpp"
#include "hwl/dyadic.hpp"
#include "hwl/matrix.hpp"
#include "hwl/operators.hpp"

namespace hwl {

namespace op {
struct TSigma {
  SignPattern sigma;
};
struct T0 {};
struct Square {};
struct Embedding {
  AlphaCoefficients alpha;
};
// Single rank-one piece f -> (f, h_I) h_I.
struct HaarTerm {
  DyadicIndex index;
};
}  // namespace op

using OperatorSpec = std::variant<op::TSigma, op::T0, op::Square, op::Embedding, op::HaarTerm>;

struct OperatorMatrix {
  Matrix entries;
  bool weights_absorbed = true;
  std::optional<Weight> domain_weight;
  std::optional<Weight> codomain_weight;

  std::size_t rows() const { return entries.rows(); }
  std::size_t cols() const { return entries.cols(); }
};

// Matrix in the orthonormal leaf basis e_j = 2^{N/2} chi_j whose spectral norm is the
// operator norm from L^2(w^{-1}) to L^2(v) (substitution f = w^{1/2} phi).
// Embedding maps into l^2 over internal intervals; Square realizes ||S f||_{L^2(v)}.
OperatorMatrix assemble(const OperatorSpec& spec, const Weight& v, const Weight& w);

double spectral_norm(const Matrix& m);
double spectral_norm(const OperatorMatrix& m);

enum class SearchKind { exhaustive, sampled, greedy };
const char* to_string(SearchKind kind);
SearchKind search_kind_from_string(const std::string& s);

struct SignSearchMode {
  SearchKind kind = SearchKind::exhaustive;
  std::uint64_t samples = 1000;  // sampled mode
  int restarts = 8;              // greedy mode
  std::uint64_t seed = 0;
};

struct SignSearchResult {
  double lower_bound = 0;
  std::optional<double> upper_bound;
  SignPattern best_sigma;
  SearchKind mode = SearchKind::exhaustive;
  std::uint64_t evaluations = 0;
  std::optional<std::uint64_t> seed;
};

constexpr std::size_t exhaustive_interval_cap = 20;

// Norm of v^{1/2} T_sigma w^{1/2} for one pattern.
double weighted_T_sigma_norm(const Weight& v, const Weight& w, const SignPattern& sigma);

SignSearchResult sup_sign_norm(const Weight& v, const Weight& w, const SignSearchMode& mode);

// lhs = average over all sign patterns of ||T_sigma g||^2_{L^2(v)}, rhs = sum (g,h_I)^2 <v>_I.
std::pair<double, double> sign_average_identity(const LeafFunction& g, const Weight& v);

double t0_norm(const Weight& v, const Weight& w);

// Norm of f -> S f from L^2(w^{-1}) to L^2(v).
double square_function_norm(const Weight& v, const Weight& w);

// Per internal J: (1/|J|) int_J S_J(chi_J w)^2 v / <w>_J where S_J keeps only I within J.
ConditionReport square_function_testing(const Weight& v, const Weight& w);

// Squared Carleson embedding norm for f -> (<f w^{1/2}>_I sqrt(alpha_I))_I.
double embedding_norm_squared(const Weight& w, const AlphaCoefficients& alpha);

struct Theorem02Bound {
  double joint_a2 = 0, cond_12 = 0, cond_13 = 0, t0_norm = 0;
  double bound = 0;  // sqrt(a2) + sqrt(c12) + sqrt(c13) + t0_norm / 4
};

Theorem02Bound theorem02_bound(const Weight& v, const Weight& w);

}  // namespace hwl
