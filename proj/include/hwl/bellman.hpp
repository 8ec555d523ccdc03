#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hwl/error.hpp"
#include "hwl/matrix.hpp"

namespace hwl {

struct SamplerConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  double c_dom = 1.0;                 // M <= c_dom w, N <= c_dom v, K <= c_dom sqrt(wv)
  double regime_threshold = 0.5;      // small-K regime: (x^2/w + y^2/v) K <= threshold * xy
  std::uint64_t hessian_points = 10000;
  std::optional<double> c_fun;        // overrides (1 + c_dom)^2; must not be smaller
};

struct Failure {
  std::string check;
  std::vector<double> point;
  double margin = 0;
};

struct CertificateReport {
  std::string id;
  std::uint64_t samples = 0;
  double worst_margin = 0;
  double best_constant_estimate = 0;
  std::vector<Failure> failures;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  std::map<std::string, double> extras;

  bool passed() const { return worst_margin >= -tolerance; }
};

using ScalarFn = std::function<double(std::span<const double>)>;
using DomainFn = std::function<bool(std::span<const double>)>;

// Central second differences with per-coordinate step h_rel * |p_i| (h_rel when p_i = 0).
// A stencil leaving the domain is retried once with half the step, then fails.
Matrix fd_hessian(const ScalarFn& f, std::span<const double> p, double h_rel = 1e-4,
                  const DomainFn& in_domain = {});

// Richardson combination (4 H(h/2) - H(h)) / 3 of fd_hessian.
Matrix fd_hessian_richardson(const ScalarFn& f, std::span<const double> p, double h_rel = 1e-3,
                             const DomainFn& in_domain = {});

double midpoint_drop(const ScalarFn& f, std::span<const double> a, std::span<const double> a_minus,
                     std::span<const double> a_plus, const DomainFn& in_domain = {});

// Left side of 1 - ((1-l)(1-m))^a/2 - ((1+l)(1+m))^a/2.
double power_drop_lhs(double alpha, double lambda, double mu);

// Closed-form Hessians in (x, y).
Matrix hessian_power(double alpha, double x, double y);        // (xy)^alpha
Matrix hessian_alpha_large(double alpha, double x, double y);  // (xy)^{1/2} - (xy)^alpha / 4
double bellman_alpha_large(double alpha, double x, double y);

// Lower bounds used as required right-hand sides.
double certified_alpha_small(double alpha);  // in the 1 - ... >= c |lambda mu| form
double certified_alpha_large(double alpha);  // in the |x+ - x-|/x |y+ - y-|/y form

struct SupS {
  double s_star = 1.0;  // 0 or +inf when the supremum is a limit
  double value = 0.0;
};

// sup over s > 0 of x^2/(w + sK) + y^2/(v + K/s).
SupS sup_s_value(double x, double w, double y, double v, double K);
double sup_s_objective(double x, double w, double y, double v, double K, double s);

CertificateReport cert_alpha_small(double alpha, const SamplerConfig& cfg);
CertificateReport cert_alpha_large(double alpha, const SamplerConfig& cfg);
CertificateReport cert_embedding(double c_dom, const SamplerConfig& cfg);
CertificateReport cert_seven(double c_dom, const SamplerConfig& cfg);
CertificateReport cert_nine(const SamplerConfig& cfg);

// Dispatch by identifier: alpha_small, alpha_large, embedding, seven, nine (cert_ prefix optional).
CertificateReport run_certificate(const std::string& id, std::optional<double> alpha,
                                  const SamplerConfig& cfg);

}  // namespace hwl
