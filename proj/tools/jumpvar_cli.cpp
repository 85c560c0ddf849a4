#include "jumpvar/errors.hpp"
#include "jumpvar/experiments.hpp"
#include "jumpvar/finite_chain.hpp"
#include "jumpvar/jump_chain.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace jumpvar;

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

StateFunction parse_values(std::string spec) {
  if (spec.rfind("values:", 0) == 0) spec = spec.substr(7);
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw InvalidConfig("--f: cannot parse \"" + item + "\"");
    }
  }
  if (values.empty()) throw InvalidConfig("--f: expected comma-separated values");
  return StateFunction(Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::size_t> replicates,
            std::optional<std::string> out) {
  auto config = ExperimentConfig::from_file(path);
  if (seed) config.seed = *seed;
  if (replicates) config.replicates = *replicates;
  if (out) config.out_dir = *out;
  const auto report = run_and_write(config);
  for (const auto& c : report.checks)
    std::cout << (c.ok() ? "PASS " : "FAIL ") << c.name << " (" << c.passed << "/" << c.total << ")  " << c.anchor
              << "\n";
  std::cout << report.experiment << ": " << report.rows.size() << " rows, n=" << report.n
            << ", replicates=" << report.replicates << ", seed=" << report.seed << ", " << report.seconds
            << " s -> " << (config.out_dir / (config.experiment + ".csv")).string() << "\n";
  return report.all_passed() ? 0 : 1;
}

int cmd_oracle(const std::string& path, const std::string& f_spec) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open model file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
  const auto kernel = FiniteReversibleKernel::from_json(doc);
  const auto f = parse_values(f_spec);
  if (f.size() != kernel.size()) throw DimensionMismatch("--f needs one value per state");
  const auto spec = spectral_gap(kernel);
  nlohmann::json out;
  out["states"] = kernel.states();
  out["pi"] = std::vector<double>(kernel.pi().data(), kernel.pi().data() + kernel.pi().size());
  out["mean"] = expectation(kernel.pi(), f);
  out["variance"] = variance(kernel.pi(), f);
  out["spectral_gap"] = spec.gap;
  out["min_eigenvalue"] = spec.min_eigenvalue;
  out["asymptotic_variance"] = number(asymptotic_variance_exact(kernel, f));
  try {
    out["variational_asymptotic_variance"] = number(variational_avar(kernel, f));
  } catch (const SingularSystem& e) {
    out["variational_asymptotic_variance"] = nullptr;
  }
  try {
    const auto d = decompose(kernel);
    const auto id = variance_identity(d, f);
    const auto ev = estimator_variances_exact(d, f);
    out["pi_rho"] = d.pi_rho();
    out["jump_spectral_gap"] = spectral_gap(d.jump_kernel()).gap;
    out["variance_identity_residual"] = number(id.residual);
    out["sigma2_rb"] = number(ev.sigma2_rb);
    out["sigma2_geo"] = number(ev.sigma2_geo);
  } catch (const AbsorbingState& e) {
    out["jump_chain"] = e.what();
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_list(bool json) {
  const auto& all = list_experiments();
  if (json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : all)
      arr.push_back({{"name", e.name},
                     {"anchor", e.anchor},
                     {"description", e.description},
                     {"default_n", e.default_n},
                     {"default_replicates", e.default_replicates}});
    std::cout << arr.dump(2) << "\n";
    return 0;
  }
  for (const auto& e : all) std::cout << e.name << "  -  " << e.anchor << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic variance of reversible chains, jump chains and pseudo-marginal samplers"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::string> out;
  run->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "master seed");
  run->add_option("--replicates", replicates, "number of replicates")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output directory");

  auto* oracle = app.add_subcommand("oracle", "exact quantities for a finite kernel");
  std::string model_path, f_spec;
  oracle->add_option("model", model_path, "kernel JSON: {matrix, states?, pi?}")->required()->check(CLI::ExistingFile);
  oracle->add_option("--f", f_spec, "function values, e.g. 1,-1")->required();

  auto* list = app.add_subcommand("list", "list built-in experiments");
  bool json = false;
  list->add_flag("--json", json, "machine-readable listing");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, seed, replicates, out);
    if (*oracle) return cmd_oracle(model_path, f_spec);
    if (*list) return cmd_list(json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
