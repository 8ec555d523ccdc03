#include "hwl/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "hwl/conditions.hpp"
#include "hwl/rng.hpp"

namespace hwl {

namespace {

constexpr const char* bundle_schema = "hwl.bundle/1";
constexpr const char* library_version = "1.0.0";

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::configuration, what);
}

double gaussian(Rng& rng) {
  // Box-Muller on the library's own uniform stream, so values do not depend on the STL.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t need_seed(const WeightSpec& s) {
  if (!s.seed) config_error("weight kind '" + s.kind + "' needs a seed");
  return *s.seed;
}

}  // namespace

Weight generate_weights(const WeightSpec& spec, const DyadicModel& model) {
  const std::size_t n = model.leaf_count();
  std::vector<double> vals(n);
  if (spec.kind == "constant") {
    if (!(spec.value > 0)) config_error("constant weight must be positive");
    std::fill(vals.begin(), vals.end(), spec.value);
  } else if (spec.kind == "explicit") {
    if (spec.values.size() != n)
      config_error("explicit weight needs " + std::to_string(n) + " values, got " +
                   std::to_string(spec.values.size()));
    vals = spec.values;
    for (double x : vals)
      if (!(x > 0)) config_error("explicit weight values must be positive");
  } else if (spec.kind == "lognormal") {
    if (!(spec.sigma_log >= 0)) config_error("sigma_log must be nonnegative");
    Rng rng(need_seed(spec));
    for (double& x : vals) x = std::exp(spec.sigma_log * gaussian(rng));
  } else if (spec.kind == "power") {
    if (!(spec.exponent > -1.0 && spec.exponent < 1.0)) config_error("power exponent must lie in (-1, 1)");
    if (spec.center >= n) config_error("power center leaf out of range");
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (static_cast<double>(i > spec.center ? i - spec.center : spec.center - i) + 0.5) *
                       model.leaf_measure();
      vals[i] = std::pow(d, spec.exponent);
    }
  } else if (spec.kind == "reciprocal_of") {
    if (!spec.of) config_error("reciprocal_of needs an 'of' weight");
    const Weight base = generate_weights(*spec.of, model);
    Rng rng(spec.jitter > 0 ? need_seed(spec) : spec.seed.value_or(0));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = spec.jitter > 0 ? gaussian(rng) : 0.0;
      vals[i] = std::exp(spec.jitter * z) / base.base()[i];
    }
  } else {
    config_error("unknown weight kind '" + spec.kind + "'");
  }
  for (double& x : vals) x = std::max(x, Weight::min_value);
  return Weight(LeafFunction(model, std::move(vals)));
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) config_error("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(where + "." + key + ": " + e.what());
  }
}

WeightSpec parse_weight(const Json& j, const std::string& where) {
  check_keys(j, {"kind", "value", "values", "sigma_log", "exponent", "center", "jitter", "seed", "of"},
             where);
  WeightSpec s;
  if (!j.contains("kind")) config_error(where + " needs 'kind'");
  s.kind = get<std::string>(j, "kind", where);
  if (j.contains("value")) s.value = get<double>(j, "value", where);
  if (j.contains("values")) s.values = get<std::vector<double>>(j, "values", where);
  if (j.contains("sigma_log")) s.sigma_log = get<double>(j, "sigma_log", where);
  if (j.contains("exponent")) s.exponent = get<double>(j, "exponent", where);
  if (j.contains("center")) s.center = get<std::size_t>(j, "center", where);
  if (j.contains("jitter")) s.jitter = get<double>(j, "jitter", where);
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j, "seed", where);
  if (j.contains("of")) s.of = std::make_shared<WeightSpec>(parse_weight(j.at("of"), where + ".of"));
  if (s.kind == "lognormal" && !s.seed) config_error(where + ": lognormal weights need a seed");
  if (s.kind == "reciprocal_of" && s.jitter > 0 && !s.seed)
    config_error(where + ": reciprocal_of with jitter needs a seed");
  return s;
}

bool is_certificate(const std::string& id) { return id.rfind("cert_", 0) == 0; }

}  // namespace

const std::vector<std::string>& analysis_ids() {
  static const std::vector<std::string> ids = {
      "alpha",         "joint_a2",     "cond_12",          "cond_13",
      "sawyer_tsigma", "sawyer_t0",    "sigma_k",          "lemma33",
      "bump",          "fkp",          "doubling",         "sup_sign_norm",
      "t0_norm",       "square_function_norm", "theorem02_bound",
      "cert_alpha_small", "cert_alpha_large", "cert_embedding", "cert_seven", "cert_nine"};
  return ids;
}

const std::vector<std::string>& norm_analysis_ids() {
  static const std::vector<std::string> ids = {"sup_sign_norm", "t0_norm", "square_function_norm",
                                               "theorem02_bound"};
  return ids;
}

ScenarioConfig config_from_json(const Json& j) {
  check_keys(j, {"depth", "weight_spec_v", "weight_spec_w", "analyses", "sign_search", "certificates",
                 "q", "eta", "lemma33_alpha", "output"},
             "config");
  ScenarioConfig c;
  if (!j.contains("depth")) config_error("config needs 'depth'");
  c.depth = get<int>(j, "depth", "config");
  if (c.depth < 1 || c.depth > 12) config_error("depth must lie in [1, 12]");
  if (!j.contains("weight_spec_v") || !j.contains("weight_spec_w"))
    config_error("config needs weight_spec_v and weight_spec_w");
  c.weight_spec_v = parse_weight(j.at("weight_spec_v"), "weight_spec_v");
  c.weight_spec_w = parse_weight(j.at("weight_spec_w"), "weight_spec_w");

  std::vector<std::string> requested = j.contains("analyses")
                                           ? get<std::vector<std::string>>(j, "analyses", "config")
                                           : std::vector<std::string>{"all"};
  std::set<std::string> chosen;
  for (const auto& id : requested) {
    std::vector<std::string> expand;
    if (id == "all") {
      for (const auto& a : analysis_ids())
        if (!is_certificate(a)) expand.push_back(a);
    } else if (id == "norms") {
      expand = norm_analysis_ids();
    } else if (id == "certificates") {
      for (const auto& a : analysis_ids())
        if (is_certificate(a)) expand.push_back(a);
    } else if (std::find(analysis_ids().begin(), analysis_ids().end(), id) != analysis_ids().end()) {
      expand.push_back(id);
    } else {
      config_error("unknown analysis '" + id + "'");
    }
    for (auto& e : expand) chosen.insert(e);
  }
  for (const auto& a : analysis_ids())
    if (chosen.count(a)) c.analyses.push_back(a);

  if (j.contains("sign_search")) {
    const Json& s = j.at("sign_search");
    check_keys(s, {"mode", "samples", "restarts", "seed"}, "sign_search");
    if (s.contains("mode")) {
      try {
        c.sign_search.kind = search_kind_from_string(get<std::string>(s, "mode", "sign_search"));
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    if (s.contains("samples")) c.sign_search.samples = get<std::uint64_t>(s, "samples", "sign_search");
    if (s.contains("restarts")) c.sign_search.restarts = get<int>(s, "restarts", "sign_search");
    if (s.contains("seed")) {
      c.sign_search.seed = get<std::uint64_t>(s, "seed", "sign_search");
      c.sign_search_seeded = true;
    }
  }
  const bool uses_sign_search = chosen.count("sup_sign_norm") || chosen.count("sawyer_tsigma");
  if (uses_sign_search && c.sign_search.kind != SearchKind::exhaustive && !c.sign_search_seeded)
    config_error("sign_search.seed is required for sampled and greedy modes");

  if (j.contains("certificates")) {
    const Json& s = j.at("certificates");
    check_keys(s, {"samples", "seed", "c_dom", "regime_threshold", "hessian_points", "alphas_small",
                   "alphas_large"},
               "certificates");
    if (s.contains("samples")) c.certificates.samples = get<std::uint64_t>(s, "samples", "certificates");
    if (s.contains("seed")) {
      c.certificates.seed = get<std::uint64_t>(s, "seed", "certificates");
      c.certificates_seeded = true;
    }
    if (s.contains("c_dom")) c.certificates.c_dom = get<double>(s, "c_dom", "certificates");
    if (s.contains("regime_threshold"))
      c.certificates.regime_threshold = get<double>(s, "regime_threshold", "certificates");
    if (s.contains("hessian_points"))
      c.certificates.hessian_points = get<std::uint64_t>(s, "hessian_points", "certificates");
    if (s.contains("alphas_small")) c.alphas_small = get<std::vector<double>>(s, "alphas_small", "certificates");
    if (s.contains("alphas_large")) c.alphas_large = get<std::vector<double>>(s, "alphas_large", "certificates");
  }
  const bool uses_certs = std::any_of(c.analyses.begin(), c.analyses.end(), is_certificate);
  if (uses_certs && !c.certificates_seeded) config_error("certificates.seed is required for certificate analyses");

  if (j.contains("q")) c.q = get<double>(j, "q", "config");
  if (j.contains("eta")) c.eta = get<double>(j, "eta", "config");
  if (j.contains("lemma33_alpha")) c.lemma33_alpha = get<double>(j, "lemma33_alpha", "config");
  if (j.contains("output")) {
    const Json& o = j.at("output");
    check_keys(o, {"path", "format"}, "output");
    if (o.contains("path")) c.output_path = get<std::string>(o, "path", "output");
    if (o.contains("format")) c.output_format = get<std::string>(o, "format", "output");
    if (c.output_format != "json" && c.output_format != "csv")
      config_error("output.format must be 'json' or 'csv'");
  }
  return c;
}

ScenarioConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Serialization helpers

Json number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  Json j;
  j["hex"] = buf;
  if (std::isfinite(x))
    j["decimal"] = x;
  else
    j["decimal"] = nullptr;
  return j;
}

double from_number(const Json& j) {
  const std::string s = j.at("hex").get<std::string>();
  return std::strtod(s.c_str(), nullptr);
}

namespace {

Json index_json(const DyadicIndex& i) { return Json{{"level", i.level}, {"pos", i.pos}}; }

Json map_json(const IntervalMap& m) {
  Json arr = Json::array();
  for (std::size_t h = 0; h < m.size(); ++h) {
    const DyadicIndex I = DyadicIndex::from_heap(h);
    arr.push_back(Json{{"level", I.level}, {"pos", I.pos}, {"value", number(m.at_heap(h))}});
  }
  return arr;
}

Json values_json(std::span<const double> v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

}  // namespace

Json to_json(const ConditionReport& r) {
  Json j;
  j["name"] = r.name;
  j["constant"] = number(r.constant);
  j["witness"] = index_json(r.witness);
  if (!r.mode.empty()) j["mode"] = r.mode;
  if (!r.note.empty()) j["note"] = r.note;
  if (r.per_interval) j["per_interval"] = map_json(*r.per_interval);
  return j;
}

Json to_json(const CertificateReport& r) {
  Json j;
  j["id"] = r.id;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["tolerance"] = number(r.tolerance);
  j["worst_margin"] = number(r.worst_margin);
  j["best_constant_estimate"] = number(r.best_constant_estimate);
  j["passed"] = r.passed();
  Json fails = Json::array();
  for (const auto& f : r.failures)
    fails.push_back(Json{{"check", f.check}, {"point", values_json(f.point)}, {"margin", number(f.margin)}});
  j["failures"] = fails;
  Json ex = Json::object();
  for (const auto& [k, v] : r.extras) ex[k] = number(v);
  j["extras"] = ex;
  return j;
}

Json to_json(const SignSearchResult& r) {
  Json j;
  j["lower_bound"] = number(r.lower_bound);
  j["upper_bound"] = r.upper_bound ? number(*r.upper_bound) : Json(nullptr);
  Json signs = Json::array();
  for (auto s : r.best_sigma.signs()) signs.push_back(static_cast<int>(s));
  j["best_sigma"] = signs;
  j["mode"] = to_string(r.mode);
  j["evaluations"] = r.evaluations;
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  return j;
}

std::string AnalysisBundle::serialize() const { return doc.dump(2) + "\n"; }

AnalysisBundle AnalysisBundle::load(const std::string& text) {
  AnalysisBundle b;
  try {
    b.doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("bundle is not valid JSON: ") + e.what());
  }
  if (!b.doc.contains("schema") || b.doc["schema"] != bundle_schema)
    throw Error(ErrorCode::io, "bundle schema mismatch");
  return b;
}

// ---------------------------------------------------------------------------
// Scenario execution

namespace {

Json run_one(const std::string& id, const ScenarioConfig& cfg, const Weight& v, const Weight& w) {
  if (id == "alpha") return to_json(report_from_map("alpha", alpha_coefficients(v, w)));
  if (id == "joint_a2") return to_json(joint_a2(v, w));
  if (id == "cond_12") return to_json(cond_12(v, w));
  if (id == "cond_13") return to_json(cond_13(v, w));
  if (id == "sawyer_tsigma") {
    auto [a, b] = sawyer_tsigma_test(v, w, cfg.sign_search);
    return Json{{"first", to_json(a)}, {"second", to_json(b)}};
  }
  if (id == "sawyer_t0") {
    auto [a, b] = sawyer_t0_test(v, w);
    return Json{{"first", to_json(a)}, {"second", to_json(b)}};
  }
  if (id == "sigma_k") {
    const CarlesonFamilies f = sigma_k_families(v, w, cfg.q);
    Json per = Json::array();
    for (const auto& r : f.per_k) per.push_back(to_json(r));
    Json fam = Json::array();
    for (std::size_t h = 0; h < f.family.size(); ++h) {
      const DyadicIndex I = DyadicIndex::from_heap(h);
      fam.push_back(Json{{"level", I.level}, {"pos", I.pos}, {"family", f.family[h]}});
    }
    return Json{{"q", number(f.q)}, {"prescale", number(f.prescale)}, {"per_k", per},
                {"aggregate", to_json(f.aggregate)}, {"families", fam}};
  }
  if (id == "lemma33") return to_json(lemma33_constant(v, w, cfg.lemma33_alpha));
  if (id == "bump") return to_json(bump_condition(v, w, cfg.eta));
  if (id == "fkp") return Json{{"v", to_json(fkp_condition(v))}, {"w", to_json(fkp_condition(w))}};
  if (id == "doubling")
    return Json{{"v", to_json(doubling_constant(v))}, {"w", to_json(doubling_constant(w))}};

  const int norm_depth_cap = 10;
  const bool is_norm = std::find(norm_analysis_ids().begin(), norm_analysis_ids().end(), id) !=
                       norm_analysis_ids().end();
  if (is_norm && cfg.depth > norm_depth_cap)
    throw Error(ErrorCode::capacity, "dense norms are limited to depth 10");
  if (id == "sup_sign_norm") return to_json(sup_sign_norm(v, w, cfg.sign_search));
  if (id == "t0_norm") return Json{{"value", number(t0_norm(v, w))}};
  if (id == "square_function_norm")
    return Json{{"value", number(square_function_norm(v, w))},
                {"testing", to_json(square_function_testing(v, w))}};
  if (id == "theorem02_bound") {
    const Theorem02Bound b = theorem02_bound(v, w);
    return Json{{"joint_a2", number(b.joint_a2)}, {"cond_12", number(b.cond_12)},
                {"cond_13", number(b.cond_13)},   {"t0_norm", number(b.t0_norm)},
                {"bound", number(b.bound)}};
  }

  if (id == "cert_alpha_small" || id == "cert_alpha_large") {
    Json arr = Json::array();
    const bool small = id == "cert_alpha_small";
    for (double a : small ? cfg.alphas_small : cfg.alphas_large)
      arr.push_back(to_json(small ? cert_alpha_small(a, cfg.certificates)
                                  : cert_alpha_large(a, cfg.certificates)));
    return Json{{"reports", arr}};
  }
  if (id == "cert_embedding")
    return Json{{"reports", Json::array({to_json(cert_embedding(cfg.certificates.c_dom, cfg.certificates))})}};
  if (id == "cert_seven")
    return Json{{"reports", Json::array({to_json(cert_seven(cfg.certificates.c_dom, cfg.certificates))})}};
  if (id == "cert_nine") return Json{{"reports", Json::array({to_json(cert_nine(cfg.certificates))})}};
  throw Error(ErrorCode::invalid_argument, "unknown analysis '" + id + "'");
}

}  // namespace

AnalysisBundle run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const DyadicModel model(cfg.depth);
  const Weight v = generate_weights(cfg.weight_spec_v, model);
  const Weight w = generate_weights(cfg.weight_spec_w, model);

  AnalysisBundle b;
  b.doc["schema"] = bundle_schema;
  Json meta;
  meta["version"] = library_version;
  meta["depth"] = cfg.depth;
  meta["analyses"] = cfg.analyses;
  Json seeds = Json::object();
  if (cfg.weight_spec_v.seed) seeds["weight_v"] = *cfg.weight_spec_v.seed;
  if (cfg.weight_spec_w.seed) seeds["weight_w"] = *cfg.weight_spec_w.seed;
  if (cfg.sign_search_seeded) seeds["sign_search"] = cfg.sign_search.seed;
  if (cfg.certificates_seeded) seeds["certificates"] = cfg.certificates.seed;
  meta["seeds"] = seeds;
  meta["sign_search"] = Json{{"mode", to_string(cfg.sign_search.kind)},
                             {"samples", cfg.sign_search.samples},
                             {"restarts", cfg.sign_search.restarts}};
  meta["weights"] = Json{{"v", values_json(v.base().values())}, {"w", values_json(w.base().values())}};
  b.doc["metadata"] = meta;

  Json results = Json::array();
  for (const auto& id : cfg.analyses) {
    Json entry;
    entry["id"] = id;
    try {
      Json r = run_one(id, cfg, v, w);
      entry["status"] = "ok";
      entry["result"] = std::move(r);
    } catch (const Error& e) {
      entry["status"] = "skipped";
      entry["error_code"] = to_string(e.code());
      entry["reason"] = e.what();
    }
    results.push_back(std::move(entry));
  }
  b.doc["results"] = results;
  if (opts.timing) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    b.doc["metadata"]["wall_time_seconds"] = secs;
  }
  return b;
}

BundleSummary summarize(const AnalysisBundle& b) {
  BundleSummary s;
  for (const auto& e : b.doc.at("results")) {
    if (e.at("status") == "skipped") {
      ++s.skipped;
      if (e.at("error_code") == "capacity") ++s.capacity_skipped;
      continue;
    }
    const Json& r = e.at("result");
    if (r.contains("reports"))
      for (const auto& rep : r.at("reports"))
        if (!rep.at("passed").get<bool>()) ++s.certificates_failed;
  }
  return s;
}

namespace {

void flatten(const Json& j, const std::string& analysis, const std::string& report, std::ostream& os) {
  if (j.is_object()) {
    if (j.contains("per_interval") && j.contains("name")) {
      for (const auto& row : j.at("per_interval")) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", from_number(row.at("value")));
        os << analysis << ',' << j.at("name").get<std::string>() << ',' << row.at("level").get<int>()
           << ',' << row.at("pos").get<std::uint64_t>() << ',' << buf << '\n';
      }
      return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), analysis, report, os);
  } else if (j.is_array()) {
    for (const auto& x : j) flatten(x, analysis, report, os);
  }
}

}  // namespace

std::string bundle_to_csv(const AnalysisBundle& b) {
  std::ostringstream os;
  os << "analysis,report,level,pos,value\n";
  for (const auto& e : b.doc.at("results"))
    if (e.at("status") == "ok") flatten(e.at("result"), e.at("id").get<std::string>(), "", os);
  return os.str();
}

bool write_output(const ScenarioConfig& cfg, const AnalysisBundle& b) {
  if (cfg.output_path.empty()) return false;
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open output file '" + cfg.output_path + "'");
  out << (cfg.output_format == "csv" ? bundle_to_csv(b) : b.serialize());
  if (!out) throw Error(ErrorCode::io, "failed writing '" + cfg.output_path + "'");
  return true;
}

// ---------------------------------------------------------------------------
// Separation search

const std::vector<std::string>& separation_condition_ids() {
  static const std::vector<std::string> ids = {"joint_a2", "cond_12", "cond_13", "sawyer_t0_1",
                                               "sawyer_t0_2", "t0_norm", "fkp_v", "fkp_w",
                                               "doubling_v", "doubling_w", "bump", "square_testing"};
  return ids;
}

double evaluate_condition(const std::string& id, const Weight& v, const Weight& w) {
  if (id == "joint_a2") return joint_a2(v, w).constant;
  if (id == "cond_12") return cond_12(v, w).constant;
  if (id == "cond_13") return cond_13(v, w).constant;
  if (id == "sawyer_t0_1") return sawyer_t0_test(v, w).first.constant;
  if (id == "sawyer_t0_2") return sawyer_t0_test(v, w).second.constant;
  if (id == "t0_norm") return t0_norm(v, w);
  if (id == "fkp_v") return fkp_condition(v).constant;
  if (id == "fkp_w") return fkp_condition(w).constant;
  if (id == "doubling_v") return doubling_constant(v).constant;
  if (id == "doubling_w") return doubling_constant(w).constant;
  if (id == "bump") return bump_condition(v, w, 0.5).constant;
  if (id == "square_testing") return square_function_testing(v, w).constant;
  throw Error(ErrorCode::invalid_argument, "unknown condition id '" + id + "'");
}

std::vector<Specimen> search_separation(const std::string& from, const std::string& to,
                                        std::uint64_t budget, std::uint64_t seed, int depth,
                                        std::size_t top_k) {
  const auto& ids = separation_condition_ids();
  for (const auto& id : {from, to})
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
      throw Error(ErrorCode::invalid_argument, "unknown condition id '" + id + "'");
  if (budget == 0) return {};
  const DyadicModel model(depth);
  const std::size_t n = model.leaf_count();
  Rng rng(seed);

  struct Cand {
    double ratio, a, b;
    std::vector<double> v, w;
  };
  std::vector<Cand> pool;
  auto consider = [&](std::vector<double> v, std::vector<double> w) {
    for (double& x : v) x = std::clamp(x, 1e-6, 1e6);
    for (double& x : w) x = std::clamp(x, 1e-6, 1e6);
    const Weight wv(LeafFunction(model, v)), ww(LeafFunction(model, w));
    const double a = evaluate_condition(from, wv, ww), b = evaluate_condition(to, wv, ww);
    double ratio = 0.0;
    if (a > 0) ratio = b / a;
    else if (b > 0) ratio = std::numeric_limits<double>::infinity();
    pool.push_back({ratio, a, b, std::move(v), std::move(w)});
    std::stable_sort(pool.begin(), pool.end(), [](const Cand& x, const Cand& y) { return x.ratio > y.ratio; });
    if (pool.size() > top_k) pool.resize(top_k);
  };

  const std::uint64_t random_phase = std::max<std::uint64_t>(1, budget / 2);
  for (std::uint64_t t = 0; t < budget; ++t) {
    if (t < random_phase || pool.empty()) {
      const double sv = uniform(rng, 0.1, 3.0), sw = uniform(rng, 0.1, 3.0);
      std::vector<double> v(n), w(n);
      for (auto& x : v) x = std::exp(sv * gaussian(rng));
      for (auto& x : w) x = std::exp(sw * gaussian(rng));
      consider(std::move(v), std::move(w));
    } else {
      const Cand& parent = pool[static_cast<std::size_t>(rng() % pool.size())];
      std::vector<double> v = parent.v, w = parent.w;
      const int flips = 1 + static_cast<int>(rng() % 3);
      for (int f = 0; f < flips; ++f) {
        auto& target = (rng() >> 63) ? v : w;
        target[rng() % n] *= std::exp(uniform(rng, -2.0, 2.0));
      }
      consider(std::move(v), std::move(w));
    }
  }

  std::vector<Specimen> out;
  for (const auto& c : pool) {
    Specimen s{c.ratio, c.a, c.b, c.v, c.w, {}};
    ScenarioConfig cfg;
    cfg.depth = depth;
    cfg.weight_spec_v.kind = cfg.weight_spec_w.kind = "explicit";
    cfg.weight_spec_v.values = c.v;
    cfg.weight_spec_w.values = c.w;
    cfg.analyses = {"alpha", "joint_a2", "cond_12", "cond_13", "sawyer_t0", "fkp", "doubling"};
    s.bundle = run_scenario(cfg);
    out.push_back(std::move(s));
  }
  return out;
}

Json to_json(const std::vector<Specimen>& specimens, const std::string& from, const std::string& to,
             std::uint64_t budget, std::uint64_t seed, int depth) {
  Json j;
  j["schema"] = "hwl.search/1";
  j["from"] = from;
  j["to"] = to;
  j["budget"] = budget;
  j["seed"] = seed;
  j["depth"] = depth;
  Json arr = Json::array();
  for (const auto& s : specimens)
    arr.push_back(Json{{"ratio", number(s.ratio)}, {"from_value", number(s.from_value)},
                       {"to_value", number(s.to_value)}, {"v", values_json(s.v)},
                       {"w", values_json(s.w)}, {"bundle", s.bundle.doc}});
  j["specimens"] = arr;
  return j;
}

// ---------------------------------------------------------------------------
// Self test: the invariant suite at small depth, fixed seeds.

namespace {

struct Checks {
  Json list = Json::array();
  bool all = true;
  void add(const std::string& name, bool ok, double worst) {
    list.push_back(Json{{"name", name}, {"passed", ok}, {"worst", number(worst)}});
    all = all && ok;
  }
};

Weight random_weight(Rng& rng, const DyadicModel& m, double spread) {
  std::vector<double> v(m.leaf_count());
  for (auto& x : v) x = std::exp(spread * gaussian(rng));
  return Weight(LeafFunction(m, std::move(v)));
}

LeafFunction random_function(Rng& rng, const DyadicModel& m) {
  std::vector<double> v(m.leaf_count());
  for (auto& x : v) x = uniform(rng, -1, 1);
  return LeafFunction(m, std::move(v));
}

}  // namespace

SelftestResult selftest() {
  Checks c;
  Rng rng(20240601);

  double parseval = 0, haar = 0, four = 0, avg = 0, rank1 = 0, dom = 0, s_eq = 0;
  bool band = true;
  for (int depth = 1; depth <= 4; ++depth) {
    const DyadicModel m(depth);
    for (int t = 0; t < 10; ++t) {
      const LeafFunction f = random_function(rng, m), g = random_function(rng, m);
      const Weight v = random_weight(rng, m, 1.0), w = random_weight(rng, m, 1.0);

      const IntervalMap hc = haar_coefficients(f);
      double s = f.integral() * f.integral();
      for (double x : hc.data()) s += x * x;
      parseval = std::max(parseval, std::abs(s - f.norm2()) / (1 + f.norm2()));

      for (std::size_t h = 0; h < m.internal_count(); ++h) {
        const DisbalancedHaar d = disbalanced_haar(w, DyadicIndex::from_heap(h));
        const LeafFunction hw = d.realize(m);
        haar = std::max({haar, std::abs(hw.inner(w.base())), std::abs((hw * hw).inner(w.base()) - 1)});
      }

      SignPattern sigma(m);
      for (std::size_t h = 0; h < m.internal_count(); ++h) sigma.set_heap(h, (rng() >> 63) ? -1 : 1);
      const FourSumDecomposition fs = four_sum_decomposition(f, g, sigma, v, w);
      const double direct = apply_weighted_T_sigma(f, sigma, v, w).inner(g);
      four = std::max(four, std::abs(fs.total - direct) / (1 + std::abs(direct)));

      const auto [lhs, rhs] = sign_average_identity(g, v);
      avg = std::max(avg, std::abs(lhs - rhs) / (1 + rhs));

      const DyadicIndex I = DyadicIndex::from_heap(rng() % m.internal_count());
      const double n1 = spectral_norm(assemble(op::HaarTerm{I}, v, w));
      rank1 = std::max(rank1, std::abs(n1 - std::sqrt(v.average(I) * w.average(I))));

      const SignSearchResult sup = sup_sign_norm(v, w, {});
      const auto [t1, t2] = sawyer_tsigma_test(v, w, {});
      const double n0 = t0_norm(v, w);
      const auto [s1, s2] = sawyer_t0_test(v, w);
      const double sq = sup.lower_bound * sup.lower_bound;
      // leaves carry no Haar function, so only internal intervals are dominated
      const ConditionReport ja = joint_a2(v, w);
      double ja_internal = 0.0;
      for (std::size_t h = 0; h < m.internal_count(); ++h)
        ja_internal = std::max(ja_internal, ja.per_interval->at_heap(h));
      dom = std::max({dom, t1.constant - sq, t2.constant - sq, s1.constant - n0 * n0,
                      s2.constant - n0 * n0, ja_internal - sq});

      const ConditionReport st = square_function_testing(v, w), c12 = cond_12(v, w);
      for (std::size_t h = 0; h < m.internal_count(); ++h)
        s_eq = std::max(s_eq, std::abs(st.per_interval->at_heap(h) - c12.per_interval->at_heap(h)) /
                                  (1 + c12.per_interval->at_heap(h)));

      const AlphaCoefficients alpha = alpha_coefficients(v, w);
      const double T = embedding_testing(w, alpha).constant, E = embedding_norm_squared(w, alpha);
      band = band && T <= E * (1 + 1e-9) + 1e-12 && E <= 16 * T * (1 + 1e-9) + 1e-12;
    }
  }
  c.add("parseval", parseval <= 1e-10, parseval);
  c.add("disbalanced_haar", haar <= 1e-10, haar);
  c.add("four_sum_identity", four <= 1e-9, four);
  c.add("sign_average_identity", avg <= 1e-10, avg);
  c.add("rank_one_norm", rank1 <= 1e-9, rank1);
  c.add("testing_dominates", dom <= 1e-9, dom);
  c.add("square_testing_equals_cond_12", s_eq <= 1e-9, s_eq);
  c.add("embedding_band", band, band ? 0.0 : 1.0);

  const SupS one = sup_s_value(1, 1, 1, 1, 1);
  c.add("sup_s_identity", std::abs(one.value - 1) <= 1e-12, std::abs(one.value - 1));

  SamplerConfig sc;
  sc.samples = 2000;
  sc.hessian_points = 200;
  sc.seed = 7;
  for (const auto& rep : {cert_alpha_small(0.25, sc), cert_alpha_large(0.75, sc), cert_embedding(1.0, sc),
                          cert_seven(1.0, sc), cert_nine(sc)})
    c.add("certificate_" + rep.id, rep.passed(), rep.worst_margin);

  SelftestResult r;
  r.doc["schema"] = "hwl.selftest/1";
  r.doc["checks"] = c.list;
  r.doc["passed"] = c.all;
  r.passed = c.all;
  return r;
}

}  // namespace hwl
