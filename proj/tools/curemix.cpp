#include "curemix/csv.hpp"
#include "curemix/errors.hpp"
#include "curemix/inference.hpp"
#include "curemix/report.hpp"
#include "curemix/simulation.hpp"
#include "curemix/two_step.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct DataArgs
{
  std::string input;
  std::string time = "time";
  std::string status = "status";
  std::string incidence;
  std::string latency;
  double trim = 0.0;
  std::optional<double> bandwidth;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
};

void
add_data_options(CLI::App& cmd, DataArgs& a)
{
  cmd.add_option("--input", a.input, "CSV file with a header row")->required();
  cmd.add_option("--time", a.time, "follow-up time column");
  cmd.add_option("--status", a.status, "event indicator column (1 = event, 0 = censored)");
  cmd.add_option("--incidence", a.incidence, "comma-separated incidence covariates")->required();
  cmd.add_option("--latency", a.latency, "comma-separated latency covariates")->required();
  cmd.add_option("--trim", a.trim, "index-density trimming threshold c (0 = off)");
  cmd.add_option("--bandwidth", a.bandwidth, "fixed smoothing bandwidth (default: cross-validation)");
  cmd.add_option("--seed", a.seed, "seed for all randomness");
  cmd.add_option("--threads", a.threads, "worker threads (0 = all cores)");
}

curemix::TableDataset
load(const DataArgs& a)
{
  const auto table = curemix::read_csv(a.input);
  auto loaded = curemix::dataset_from_table(
    table, a.time, a.status, curemix::split_list(a.incidence), curemix::split_list(a.latency));
  if (loaded.dropped_rows > 0)
    std::cerr << "note: dropped " << loaded.dropped_rows << " row(s) with missing values\n";
  return loaded;
}

std::vector<std::string>
diagnostic_names(const std::vector<curemix::Diagnostic>& ds)
{
  std::vector<std::string> out;
  for (auto d : ds)
    out.push_back(curemix::to_string(d));
  return out;
}

int
cmd_fit(const DataArgs& a, const std::string& which, int n_bootstrap)
{
  using namespace curemix;
  if (n_bootstrap < 0 || n_bootstrap == 1)
    throw InvalidInput("--bootstrap must be 0 or at least 2");
  const auto loaded = load(a);
  const auto& data = loaded.data;

  std::vector<std::string> inc_names{ "(Intercept)" };
  for (const auto& c : split_list(a.incidence))
    inc_names.push_back(c);
  const auto lat_names = split_list(a.latency);

  InferenceOptions opts;
  opts.trim_threshold = a.trim;
  opts.bandwidth_override = a.bandwidth;
  opts.threads = a.threads;

  FitReport report;
  report.n = data.size();
  report.dropped_rows = loaded.dropped_rows;
  report.seed = a.seed;

  const auto em = fit_em(data, opts.em_config);
  const auto stacked = [](const Eigen::VectorXd& g, const Eigen::VectorXd& b) {
    Eigen::VectorXd v(g.size() + b.size());
    v << g, b;
    return v;
  };

  if (which == "em" || which == "both") {
    EstimatorReport er;
    er.estimator = "em";
    er.converged = em.converged;
    er.iterations = em.n_iterations;
    er.diagnostics = diagnostic_names(em.diagnostics);
    std::optional<InferenceReport> inf;
    if (n_bootstrap > 0)
      inf = bootstrap_inference(data, Estimator::em, n_bootstrap, a.seed, opts);
    fill_coefficients(er, stacked(em.gamma, em.beta), inc_names, lat_names, inf ? &*inf : nullptr);
    report.estimators.push_back(std::move(er));
  }
  if (which == "two_step" || which == "both") {
    TwoStepOptions ts;
    ts.latency_config = opts.em_config;
    const auto fit = fit_two_step(data, em, a.trim, a.bandwidth, ts);
    EstimatorReport er;
    er.estimator = "two_step";
    er.converged = fit.diagnostics.projection_converged && fit.diagnostics.latency_converged;
    er.iterations = fit.diagnostics.latency_iterations;
    er.bandwidth = fit.bandwidth;
    er.diagnostics = diagnostic_names(fit.diagnostics.latency_diagnostics);
    if (fit.diagnostics.degenerate_neighborhoods > 0)
      er.diagnostics.push_back(std::to_string(fit.diagnostics.degenerate_neighborhoods) +
                               " degenerate kernel neighbourhood(s) trimmed");
    std::optional<InferenceReport> inf;
    if (n_bootstrap > 0)
      inf = bootstrap_inference(data, Estimator::two_step, n_bootstrap, a.seed, opts);
    fill_coefficients(er, stacked(fit.gamma, fit.beta), inc_names, lat_names, inf ? &*inf : nullptr);
    report.estimators.push_back(std::move(er));
  }

  if (!a.out.empty())
    write_file_atomic(a.out, fit_report_to_json(report));
  std::cout << format_fit_table(report);
  return kOk;
}

int
cmd_simulate(int model, int scenario, std::size_t n, std::size_t reps, const std::string& estimators,
             bool misspecify, std::uint64_t seed, unsigned threads, const std::string& out)
{
  using namespace curemix;
  const auto set = parse_estimator_set(estimators);
  if (!set)
    throw InvalidInput("--estimators must be em, two_step or both");
  auto config = ScenarioConfig::from_catalog(model, scenario, n, seed);
  config.misspecify_latency_covariates = misspecify;
  MonteCarloOptions options;
  options.threads = threads;
  const auto report = run_monte_carlo(config, reps, *set, seed, options);

  write_file_atomic(out, report_to_csv(report));
  std::filesystem::path json_path(out);
  json_path.replace_extension(".json");
  if (json_path == std::filesystem::path(out))
    json_path += ".json";
  write_file_atomic(json_path, report_to_json(report));

  std::printf("Model %d scenario %d, n = %zu%s: %zu replications, %zu used\n", model, scenario, n,
              misspecify ? " (misspecified latency)" : "", report.n_replications, report.n_used);
  std::printf("EM non-converged: %zu, 2-step failed: %zu, non-finite: %zu\n",
              report.n_nonconverged_em, report.n_two_step_failed, report.n_two_step_nonfinite);
  std::printf("empirical cure rate %.3f, censoring rate %.3f\n", report.empirical_cure_rate,
              report.empirical_censor_rate);
  std::printf("%-9s %-10s %10s %10s %10s\n", "estimator", "parameter", "bias", "variance", "mse");
  for (const auto& r : report.rows)
    std::printf("%-9s %-10s %10.4f %10.4f %10.4f\n", r.estimator.c_str(), r.parameter.c_str(), r.bias,
                r.variance, r.mse);
  return kOk;
}

int
cmd_pe(const DataArgs& a, int splits)
{
  using namespace curemix;
  const auto loaded = load(a);
  InferenceOptions opts;
  opts.trim_threshold = a.trim;
  opts.bandwidth_override = a.bandwidth;
  opts.threads = a.threads;
  const auto results = pe_comparison(loaded.data, splits, a.seed, opts);
  write_file_atomic(a.out, pe_results_to_csv(results));
  const auto s = summarize(results);
  std::printf("valid splits: %zu of %zu\n", s.n_valid, results.size());
  std::printf("median PE difference (two_step - em): %.6g\n", s.median_difference);
  std::printf("fraction of negative differences: %.4f\n", s.fraction_negative);
  return kOk;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Mixture cure models: EM and presmoothed 2-step estimators" };
  app.require_subcommand(1);

  DataArgs fit_args;
  std::string which = "both";
  int n_bootstrap = 0;
  auto* fit = app.add_subcommand("fit", "fit a logistic-Cox mixture cure model to a CSV dataset");
  add_data_options(*fit, fit_args);
  fit->add_option("--estimator", which, "em, two_step or both")
    ->check(CLI::IsMember({ "em", "two_step", "both" }));
  fit->add_option("--bootstrap", n_bootstrap, "bootstrap resamples for SE / p-values (0 = none)");
  fit->add_option("--out", fit_args.out, "JSON report path");

  int model = 0, scenario = 0;
  std::size_t n = 200, reps = 100;
  std::string estimators = "both";
  bool misspecify = false;
  std::uint64_t sim_seed = 1;
  unsigned sim_threads = 0;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study on a catalog scenario");
  sim->add_option("--model", model)->required();
  sim->add_option("--scenario", scenario)->required();
  sim->add_option("--n", n, "sample size");
  sim->add_option("--reps", reps, "replications");
  sim->add_option("--estimators", estimators, "em, two_step or both");
  sim->add_flag("--misspecify", misspecify, "Model 4: fit the latency on X1..X5");
  sim->add_option("--seed", sim_seed);
  sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
  sim->add_option("--out", sim_out, "CSV report path (a .json twin is written too)")->required();

  DataArgs pe_args;
  int splits = 100;
  auto* pe = app.add_subcommand("pe", "train/test prediction-error comparison of the two estimators");
  add_data_options(*pe, pe_args);
  pe->add_option("--splits", splits, "random 2:1 splits");
  pe->add_option("--out", pe_args.out, "per-split CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*fit)
      return cmd_fit(fit_args, which, n_bootstrap);
    if (*sim)
      return cmd_simulate(model, scenario, n, reps, estimators, misspecify, sim_seed, sim_threads, sim_out);
    return cmd_pe(pe_args, splits);
  } catch (const curemix::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const curemix::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
