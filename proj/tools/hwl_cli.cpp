// Command-line front end. Talks to the library only through hwl.h.
#include <cmath>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hwl/hwl.h"

namespace {

enum Exit { exit_ok = 0, exit_config = 1, exit_capacity = 2, exit_certificate = 3 };

int report(hwl_status s) {
  std::fprintf(stderr, "hwl: %s: %s\n", hwl_status_name(s), hwl_last_error());
  return exit_config;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

void emit(char* text) {
  if (!text) return;
  std::fwrite(text, 1, std::strlen(text), stdout);
  hwl_string_free(text);
}

int run_config(const std::string& path, bool norms_only, bool strict, bool timing) {
  std::string text;
  if (!read_file(path, text)) {
    std::fprintf(stderr, "hwl: cannot read config '%s'\n", path.c_str());
    return exit_config;
  }
  char* out = nullptr;
  hwl_run_summary sum{};
  const hwl_status s = hwl_run_scenario_json(text.c_str(), norms_only, timing, &out, &sum);
  if (s != HWL_OK) return report(s);
  emit(out);
  if (sum.certificates_failed > 0) {
    std::fprintf(stderr, "hwl: %d certificate report(s) below tolerance\n", sum.certificates_failed);
    return exit_certificate;
  }
  if (strict && sum.capacity_skipped > 0) {
    std::fprintf(stderr, "hwl: %d analysis(es) skipped for capacity\n", sum.capacity_skipped);
    return exit_capacity;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-weight dyadic Haar multiplier toolkit"};
  app.require_subcommand(1);
  bool strict = false, timing = false;
  app.add_flag("--strict", strict, "Exit with code 2 when an analysis is skipped for capacity");
  app.add_flag("--timing", timing, "Record wall time in bundle metadata");

  std::string analyze_path, norms_path;
  auto* analyze = app.add_subcommand("analyze", "Run every analysis listed in a config file");
  analyze->add_option("config", analyze_path, "Config file (JSON)")->required();
  analyze->add_flag("--strict", strict);
  analyze->add_flag("--timing", timing);

  auto* norms = app.add_subcommand("norms", "Run only the operator-norm analyses of a config file");
  norms->add_option("config", norms_path, "Config file (JSON)")->required();
  norms->add_flag("--strict", strict);
  norms->add_flag("--timing", timing);

  std::string cert;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t samples = 100000, seed = 1;
  auto* certify = app.add_subcommand("certify", "Sample a Bellman certificate");
  certify->add_option("--cert", cert, "cert_alpha_small, cert_alpha_large, cert_embedding, cert_seven, cert_nine")
      ->required();
  certify->add_option("--alpha", alpha, "Exponent for the alpha certificates");
  certify->add_option("--samples", samples, "Number of samples");
  certify->add_option("--seed", seed, "Sampler seed");

  std::string from, to;
  std::uint64_t budget = 0, search_seed = 0;
  int depth = 4;
  auto* search = app.add_subcommand("search", "Look for weight pairs separating two conditions");
  search->add_option("--from", from)->required();
  search->add_option("--to", to)->required();
  search->add_option("--budget", budget)->required();
  search->add_option("--seed", search_seed)->required();
  search->add_option("--depth", depth)->required();

  auto* self = app.add_subcommand("selftest", "Run the invariant suite at small depths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  if (*analyze) return run_config(analyze_path, false, strict, timing);
  if (*norms) return run_config(norms_path, true, strict, timing);
  if (*certify) {
    char* out = nullptr;
    int passed = 0;
    const hwl_status s = hwl_certify_json(cert.c_str(), alpha, samples, seed, &out, &passed);
    if (s != HWL_OK) return report(s);
    emit(out);
    return passed ? exit_ok : exit_certificate;
  }
  if (*search) {
    char* out = nullptr;
    const hwl_status s = hwl_search_json(from.c_str(), to.c_str(), budget, search_seed, depth, &out);
    if (s != HWL_OK) return report(s);
    emit(out);
    return exit_ok;
  }
  if (*self) {
    char* out = nullptr;
    int passed = 0;
    const hwl_status s = hwl_selftest_json(&out, &passed);
    if (s != HWL_OK) return report(s);
    emit(out);
    return passed ? exit_ok : exit_certificate;
  }
  return exit_config;
}
