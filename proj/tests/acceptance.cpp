// Runs the built-in experiments with their default configurations and prints
// one PASS/FAIL line per acceptance criterion. Exit code 1 on any failure.

#include "jumpvar/experiments.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace jumpvar;

namespace {

struct Criterion {
  std::string label;
  std::string experiment;
  std::set<std::string> checks;  // empty: every check of the experiment
  double max_seconds = 0.0;      // 0: no runtime bound
};

std::string csv_of(const RunReport& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"variance identity on 50 random kernels", "theorem1_sweep", {"variance_identity"}, 5.0},
      {"jump chain gap dominates", "gap_inheritance", {"jump_gap_dominates"}, 0.0},
      {"birth-death example", "birth_death_example", {"jump_law_geometric", "batch_means_matches_oracle"}, 15.0},
      {"two-point independence sampler", "imh_two_point",
       {"oracle_value", "envelope", "envelope_upper_tight", "snis_lower_bound"}, 1.0},
      {"jump kernel minorization", "imh_bounds_sweep", {"minorization"}, 0.0},
      {"acceptance-probability sandwiches", "sandwich_bounds", {}, 0.0},
      {"geometric-weight CLT", "prop10_clt", {"geo_clt_variance", "rb_clt_variance"}, 30.0},
      {"geometric estimator variance identity", "sigma_geo_identity", {"geo_variance_identity"}, 0.0},
      {"Peskun ordering on product chains", "peskun_ordering", {"peskun_ordering"}, 0.0},
      {"averaging invariance", "averaging_invariance", {"verdict_invariant_under_averaging"}, 0.0},
      {"infinite-variance signature", "divergence_scan", {"infinite_variance_signature", "null_model_not_monotone"},
       120.0},
  };

  std::map<std::string, std::string> first_csv;
  bool all_ok = true;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    ExperimentConfig config;
    config.experiment = c.experiment;
    std::string detail;
    bool ok = true;
    try {
      const RunReport r = run_experiment(config);
      first_csv[c.experiment] = csv_of(r);
      bool seen = false;
      for (const auto& s : r.checks) {
        if (!c.checks.empty() && !c.checks.count(s.name)) continue;
        seen = true;
        ok = ok && s.ok();
        detail += " " + s.name + "=" + std::to_string(s.passed) + "/" + std::to_string(s.total);
      }
      ok = ok && seen;
      if (c.max_seconds > 0.0) {
        ok = ok && r.seconds < c.max_seconds;
        char buf[64];
        std::snprintf(buf, sizeof buf, " time=%.2fs(<%.0fs)", r.seconds, c.max_seconds);
        detail += buf;
      }
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string(" error: ") + e.what();
    }
    all_ok = all_ok && ok;
    std::printf("%s %2d %s:%s\n", ok ? "PASS" : "FAIL", index, c.label.c_str(), detail.c_str());
    std::fflush(stdout);
  }

  // determinism: rerun every experiment and compare CSV bytes
  ++index;
  std::string mismatched;
  for (const auto& info : list_experiments()) {
    ExperimentConfig config;
    config.experiment = info.name;
    try {
      const std::string again = csv_of(run_experiment(config));
      auto it = first_csv.find(info.name);
      const std::string first = it != first_csv.end() ? it->second : csv_of(run_experiment(config));
      if (first != again) mismatched += " " + info.name;
    } catch (const std::exception& e) {
      mismatched += " " + info.name + "(" + e.what() + ")";
    }
  }
  const bool det_ok = mismatched.empty();
  all_ok = all_ok && det_ok;
  std::printf("%s %2d byte-identical CSV on rerun:%s\n", det_ok ? "PASS" : "FAIL", index,
              det_ok ? " all experiments" : mismatched.c_str());
  return all_ok ? 0 : 1;
}
