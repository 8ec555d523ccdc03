#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hwl/dyadic.hpp"

namespace hwl {

struct SignSearchMode;

struct ConditionReport {
  std::string name;
  double constant = 0;
  DyadicIndex witness;
  std::optional<IntervalMap> per_interval;
  std::string mode;  // how per-J values were obtained, when that varies
  std::string note;
};

// Builds a report from per-interval values; witness tie-break is smallest level, then pos.
ConditionReport report_from_map(std::string name, IntervalMap values);

ConditionReport joint_a2(const Weight& v, const Weight& w);
ConditionReport cond_12(const Weight& v, const Weight& w);
ConditionReport cond_13(const Weight& v, const Weight& w);

// Sup over sign patterns of (1/|J|) int_J |T^J_sigma(chi_J w)|^2 v / <w>_J, where T^J keeps
// only the Haar terms with I inside J. second is the (v, w)-swapped condition.
std::pair<ConditionReport, ConditionReport> sawyer_tsigma_test(const Weight& v, const Weight& w,
                                                                const SignSearchMode& mode);

std::pair<ConditionReport, ConditionReport> sawyer_t0_test(const Weight& v, const Weight& w);

ConditionReport carleson_norm(const IntervalMap& beta);

struct CarlesonFamilies {
  double q = 0.5;
  double prescale = 1.0;              // v, w were multiplied by this factor
  std::vector<int> family;            // per internal heap index, -1 if <v><w> > 1
  IntervalMap beta;                   // |dv/v| |dw/w| |I| of the prescaled pair
  std::vector<ConditionReport> per_k; // Carleson norm of sigma_k
  ConditionReport aggregate;          // sum_k q^{k/4} sigma_k
};

CarlesonFamilies sigma_k_families(const Weight& v, const Weight& w, double q);

// Jointly rescales v, w by 1/sqrt(joint_a2) so that sup <v><w> = 1.
std::pair<Weight, Weight> normalize_pair(const Weight& v, const Weight& w);

ConditionReport lemma33_constant(const Weight& v, const Weight& w, double alpha_exp);
ConditionReport bump_condition(const Weight& v, const Weight& w, double eta);
ConditionReport fkp_condition(const Weight& u);
ConditionReport doubling_constant(const Weight& u);

// max_J (1/(|J| <w>_J)) sum_{I in J} <w>_I^2 alpha_I: the embedding tested on chi_J w^{1/2}.
ConditionReport embedding_testing(const Weight& w, const IntervalMap& alpha);

}  // namespace hwl
