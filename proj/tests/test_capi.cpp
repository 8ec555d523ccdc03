// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "hwl/hwl.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      std::fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol * (1 + std::fabs(b)); }

int main() {
  const double vv[2] = {2, 1}, wv[2] = {1, 3};
  hwl_weight *v = nullptr, *w = nullptr;
  EXPECT(hwl_weight_create(1, vv, 2, &v) == HWL_OK);
  EXPECT(hwl_weight_create(1, wv, 2, &w) == HWL_OK);

  double x = 0;
  EXPECT(hwl_weight_average(w, 0, 0, &x) == HWL_OK && x == 2.0);
  EXPECT(hwl_weight_average(w, 2, 0, &x) == HWL_INVALID_INDEX);
  EXPECT(hwl_joint_a2(v, w, &x) == HWL_OK && near(x, 3.0, 1e-14));
  EXPECT(hwl_cond_12(v, w, &x) == HWL_OK && near(x, 3.0, 1e-14));
  EXPECT(hwl_cond_13(w, v, &x) == HWL_OK && near(x, 3.0, 1e-14));
  EXPECT(hwl_t0_norm(v, w, &x) == HWL_OK && x * x >= 4.0 / 3.0);
  double lo = 0, hi = 0;
  EXPECT(hwl_sup_sign_norm(v, w, "exhaustive", 0, 0, &lo, &hi) == HWL_OK && lo == hi && lo > 0);
  EXPECT(hwl_sup_sign_norm(v, w, "bogus", 0, 0, &lo, &hi) == HWL_INVALID_ARGUMENT);
  EXPECT(std::strlen(hwl_last_error()) > 0);
  double s = 0;
  EXPECT(hwl_sup_s_value(1, 1, 1, 1, 1, &s, &x) == HWL_OK && near(x, 1.0, 1e-12));

  const double bad[2] = {1, -1};
  hwl_weight* z = nullptr;
  EXPECT(hwl_weight_create(1, bad, 2, &z) != HWL_OK && z == nullptr);
  EXPECT(hwl_weight_create(2, vv, 2, &z) == HWL_INVALID_ARGUMENT);
  EXPECT(hwl_joint_a2(nullptr, w, &x) == HWL_INVALID_ARGUMENT);

  const double v4[4] = {1, 1, 1, 1};
  hwl_weight* u = nullptr;
  EXPECT(hwl_weight_create(2, v4, 4, &u) == HWL_OK);
  EXPECT(hwl_joint_a2(u, w, &x) == HWL_MODEL_MISMATCH);

  char* out = nullptr;
  hwl_run_summary sum{};
  const char* cfg =
      "{\"depth\": 6, \"weight_spec_v\": {\"kind\": \"constant\", \"value\": 1},"
      " \"weight_spec_w\": {\"kind\": \"constant\", \"value\": 1}, \"analyses\": [\"joint_a2\", \"sup_sign_norm\"]}";
  EXPECT(hwl_run_scenario_json(cfg, 0, 0, &out, &sum) == HWL_OK);
  EXPECT(out != nullptr && sum.capacity_skipped == 1 && sum.wrote_file == 0);
  char* csv = nullptr;
  EXPECT(hwl_bundle_to_csv(out, &csv) == HWL_OK && std::string(csv).rfind("analysis,report", 0) == 0);
  hwl_string_free(csv);
  hwl_string_free(out);

  EXPECT(hwl_run_scenario_json("{\"depth\": 1}", 0, 0, &out, &sum) == HWL_CONFIGURATION);
  EXPECT(hwl_run_scenario_json("[", 0, 0, &out, &sum) == HWL_CONFIGURATION);

  int passed = 0;
  EXPECT(hwl_certify_json("cert_nine", NAN, 500, 3, &out, &passed) == HWL_OK && passed == 1);
  hwl_string_free(out);
  EXPECT(hwl_certify_json("nope", NAN, 500, 3, &out, &passed) == HWL_INVALID_ARGUMENT);

  EXPECT(hwl_search_json("joint_a2", "joint_a2", 10, 1, 2, &out) == HWL_OK);
  hwl_string_free(out);

  EXPECT(std::string(hwl_status_name(HWL_CAPACITY)) == "capacity");
  EXPECT(std::string(hwl_version()).size() > 0);

  hwl_weight_destroy(u);
  hwl_weight_destroy(v);
  hwl_weight_destroy(w);
  if (failures) std::fprintf(stderr, "%d failure(s)\n", failures);
  else std::printf("capi ok\n");
  return failures ? 1 : 0;
}
