#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwl/bellman.hpp"
#include "hwl/dyadic.hpp"
#include "hwl/norms.hpp"

namespace hwl {

using Json = nlohmann::ordered_json;

struct WeightSpec {
  std::string kind = "constant";  // constant | explicit | lognormal | power | reciprocal_of
  double value = 1.0;             // constant
  std::vector<double> values;     // explicit
  double sigma_log = 1.0;         // lognormal
  double exponent = 0.0;          // power, in (-1, 1)
  std::size_t center = 0;         // power
  double jitter = 0.0;            // reciprocal_of
  std::optional<std::uint64_t> seed;
  std::shared_ptr<WeightSpec> of;  // reciprocal_of
};

Weight generate_weights(const WeightSpec& spec, const DyadicModel& model);

struct ScenarioConfig {
  int depth = 3;
  WeightSpec weight_spec_v, weight_spec_w;
  std::vector<std::string> analyses;
  SignSearchMode sign_search;
  bool sign_search_seeded = false;
  SamplerConfig certificates;
  bool certificates_seeded = false;
  std::vector<double> alphas_small{0.25};
  std::vector<double> alphas_large{1.0};
  double q = 0.5;
  double eta = 0.5;
  double lemma33_alpha = 0.25;
  std::string output_path;
  std::string output_format = "json";
};

// Parses the JSON config text; unknown keys and missing seeds are configuration errors.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig config_from_json(const Json& j);

// Canonical identifiers in execution order (conditions, norms, certificates).
const std::vector<std::string>& analysis_ids();
const std::vector<std::string>& norm_analysis_ids();

struct AnalysisBundle {
  Json doc;

  std::string serialize() const;
  static AnalysisBundle load(const std::string& text);
  friend bool operator==(const AnalysisBundle& a, const AnalysisBundle& b) { return a.doc == b.doc; }
};

struct RunOptions {
  bool timing = false;
};

AnalysisBundle run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

struct BundleSummary {
  int skipped = 0;
  int capacity_skipped = 0;
  int certificates_failed = 0;
};
BundleSummary summarize(const AnalysisBundle& b);

// Flattens per-interval maps: analysis,report,level,pos,value.
std::string bundle_to_csv(const AnalysisBundle& b);

// Writes the bundle to cfg.output_path in cfg.output_format; returns false if no path is set.
bool write_output(const ScenarioConfig& cfg, const AnalysisBundle& b);

Json number(double x);  // {"hex": "%a", "decimal": x}
double from_number(const Json& j);
Json to_json(const ConditionReport& r);
Json to_json(const CertificateReport& r);
Json to_json(const SignSearchResult& r);

// Condition identifiers usable by search_separation.
const std::vector<std::string>& separation_condition_ids();
double evaluate_condition(const std::string& id, const Weight& v, const Weight& w);

struct Specimen {
  double ratio = 0;
  double from_value = 0, to_value = 0;
  std::vector<double> v, w;
  AnalysisBundle bundle;
};

std::vector<Specimen> search_separation(const std::string& from, const std::string& to,
                                        std::uint64_t budget, std::uint64_t seed, int depth,
                                        std::size_t top_k = 5);
Json to_json(const std::vector<Specimen>& specimens, const std::string& from, const std::string& to,
             std::uint64_t budget, std::uint64_t seed, int depth);

struct SelftestResult {
  Json doc;
  bool passed = false;
};
SelftestResult selftest();

}  // namespace hwl
