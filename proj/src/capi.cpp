#include "hwl/hwl.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "hwl/app.hpp"
#include "hwl/bellman.hpp"
#include "hwl/conditions.hpp"
#include "hwl/norms.hpp"

struct hwl_weight {
  hwl::DyadicModel model;
  hwl::Weight weight;
};

namespace {

thread_local std::string last_error;

hwl_status fail(hwl_status s, const char* what) {
  last_error = what;
  return s;
}

template <class F>
hwl_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return HWL_OK;
  } catch (const hwl::Error& e) {
    return fail(static_cast<hwl_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HWL_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return fail(HWL_INTERNAL, e.what());
  } catch (...) {
    return fail(HWL_INTERNAL, "unknown failure");
  }
}

char* dup(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* name) {
  if (!p) throw hwl::Error(hwl::ErrorCode::invalid_argument, std::string(name) + " is null");
}

}  // namespace

extern "C" {

const char* hwl_version(void) { return "1.0.0"; }

const char* hwl_status_name(hwl_status s) {
  if (s == HWL_INTERNAL) return "internal";
  if (s < HWL_OK || s > HWL_STENCIL) return "unknown";
  return hwl::to_string(static_cast<hwl::ErrorCode>(s));
}

const char* hwl_last_error(void) { return last_error.c_str(); }

void hwl_string_free(char* s) { delete[] s; }

hwl_status hwl_weight_create(int depth, const double* values, size_t count, hwl_weight** out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    hwl::DyadicModel m(depth);
    if (count != m.leaf_count())
      throw hwl::Error(hwl::ErrorCode::invalid_argument, "value count does not match 2^depth");
    hwl::Weight w(hwl::LeafFunction(m, std::vector<double>(values, values + count)));
    *out = new hwl_weight{m, std::move(w)};
  });
}

void hwl_weight_destroy(hwl_weight* w) { delete w; }

hwl_status hwl_weight_average(const hwl_weight* w, int level, uint64_t pos, double* out) {
  return guarded([&] {
    need(w, "w");
    need(out, "out");
    const hwl::DyadicIndex I{level, pos};
    if (!w->model.is_valid(I)) throw hwl::Error(hwl::ErrorCode::invalid_index, "interval outside model");
    *out = w->weight.average(I);
  });
}

#define HWL_PAIR_CHECK \
  need(v, "v");        \
  need(w, "w");        \
  need(out, "out")

hwl_status hwl_joint_a2(const hwl_weight* v, const hwl_weight* w, double* out) {
  return guarded([&] {
    HWL_PAIR_CHECK;
    *out = hwl::joint_a2(v->weight, w->weight).constant;
  });
}

hwl_status hwl_cond_12(const hwl_weight* v, const hwl_weight* w, double* out) {
  return guarded([&] {
    HWL_PAIR_CHECK;
    *out = hwl::cond_12(v->weight, w->weight).constant;
  });
}

hwl_status hwl_cond_13(const hwl_weight* v, const hwl_weight* w, double* out) {
  return guarded([&] {
    HWL_PAIR_CHECK;
    *out = hwl::cond_13(v->weight, w->weight).constant;
  });
}

hwl_status hwl_t0_norm(const hwl_weight* v, const hwl_weight* w, double* out) {
  return guarded([&] {
    HWL_PAIR_CHECK;
    *out = hwl::t0_norm(v->weight, w->weight);
  });
}

hwl_status hwl_sup_sign_norm(const hwl_weight* v, const hwl_weight* w, const char* mode, uint64_t samples,
                             uint64_t seed, double* lower, double* upper) {
  return guarded([&] {
    need(v, "v");
    need(w, "w");
    need(mode, "mode");
    need(lower, "lower");
    hwl::SignSearchMode m;
    m.kind = hwl::search_kind_from_string(mode);
    if (samples) m.samples = samples;
    m.seed = seed;
    const hwl::SignSearchResult r = hwl::sup_sign_norm(v->weight, w->weight, m);
    *lower = r.lower_bound;
    if (upper) *upper = r.upper_bound.value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

hwl_status hwl_sup_s_value(double x, double w, double y, double v, double k, double* s_star, double* value) {
  return guarded([&] {
    need(value, "value");
    const hwl::SupS s = hwl::sup_s_value(x, w, y, v, k);
    if (s_star) *s_star = s.s_star;
    *value = s.value;
  });
}

hwl_status hwl_run_scenario_json(const char* config, int norms_only, int timing, char** out,
                                 hwl_run_summary* summary) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    hwl::Json j;
    try {
      j = hwl::Json::parse(config);
    } catch (const std::exception& e) {
      throw hwl::Error(hwl::ErrorCode::configuration, std::string("config is not valid JSON: ") + e.what());
    }
    if (norms_only) {
      if (!j.is_object()) throw hwl::Error(hwl::ErrorCode::configuration, "config must be an object");
      j["analyses"] = hwl::Json::array({"norms"});
    }
    const hwl::ScenarioConfig cfg = hwl::config_from_json(j);
    const hwl::AnalysisBundle b = hwl::run_scenario(cfg, hwl::RunOptions{timing != 0});
    const bool wrote = hwl::write_output(cfg, b);
    if (!wrote) *out = dup(cfg.output_format == "csv" ? hwl::bundle_to_csv(b) : b.serialize());
    if (summary) {
      const hwl::BundleSummary s = hwl::summarize(b);
      summary->skipped = s.skipped;
      summary->capacity_skipped = s.capacity_skipped;
      summary->certificates_failed = s.certificates_failed;
      summary->wrote_file = wrote ? 1 : 0;
    }
  });
}

hwl_status hwl_certify_json(const char* cert_id, double alpha, uint64_t samples, uint64_t seed, char** out,
                            int* passed) {
  return guarded([&] {
    need(cert_id, "cert_id");
    need(out, "out");
    hwl::SamplerConfig cfg;
    if (samples) cfg.samples = samples;
    cfg.seed = seed;
    std::optional<double> a;
    if (!std::isnan(alpha)) a = alpha;
    const hwl::CertificateReport r = hwl::run_certificate(cert_id, a, cfg);
    *out = dup(hwl::to_json(r).dump(2) + "\n");
    if (passed) *passed = r.passed() ? 1 : 0;
  });
}

hwl_status hwl_search_json(const char* from, const char* to, uint64_t budget, uint64_t seed, int depth,
                           char** out) {
  return guarded([&] {
    need(from, "from");
    need(to, "to");
    need(out, "out");
    const auto specimens = hwl::search_separation(from, to, budget, seed, depth);
    *out = dup(hwl::to_json(specimens, from, to, budget, seed, depth).dump(2) + "\n");
  });
}

hwl_status hwl_selftest_json(char** out, int* passed) {
  return guarded([&] {
    need(out, "out");
    const hwl::SelftestResult r = hwl::selftest();
    *out = dup(r.doc.dump(2) + "\n");
    if (passed) *passed = r.passed ? 1 : 0;
  });
}

hwl_status hwl_bundle_to_csv(const char* bundle_json, char** out) {
  return guarded([&] {
    need(bundle_json, "bundle_json");
    need(out, "out");
    *out = dup(hwl::bundle_to_csv(hwl::AnalysisBundle::load(bundle_json)));
  });
}

}  // extern "C"
