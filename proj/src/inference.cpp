#include "curemix/inference.hpp"

#include "curemix/cox.hpp"
#include "curemix/errors.hpp"
#include "curemix/logistic.hpp"
#include "curemix/parallel.hpp"
#include "curemix/random.hpp"
#include "curemix/two_step.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace curemix {

std::string
to_string(Estimator e)
{
  return e == Estimator::em ? "em" : "two_step";
}

namespace {

Eigen::VectorXd
stack(const Eigen::VectorXd& gamma, const Eigen::VectorXd& beta)
{
  Eigen::VectorXd out(gamma.size() + beta.size());
  out << gamma, beta;
  return out;
}

} // namespace

ParameterEstimator
make_estimator(Estimator estimator, const InferenceOptions& options)
{
  if (estimator == Estimator::em) {
    return [config = options.em_config](const Dataset& data) -> Eigen::VectorXd {
      const auto fit = fit_em(data, config);
      if (!fit.diagnostics.empty())
        throw DivergenceError("EM fit reported " + to_string(fit.diagnostics.front()));
      return stack(fit.gamma, fit.beta);
    };
  }
  return [options](const Dataset& data) -> Eigen::VectorXd {
    const auto fit = two_step_with_em_preliminary(
      data, options.em_config, options.trim_threshold, options.bandwidth_override);
    if (!fit.diagnostics.latency_diagnostics.empty())
      throw DivergenceError("latency refit reported " +
                            to_string(fit.diagnostics.latency_diagnostics.front()));
    return stack(fit.gamma, fit.beta);
  };
}

double
normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double
wald_p_value(double estimate, double standard_error)
{
  if (!(standard_error > 0.0))
    return estimate == 0.0 ? 1.0 : 0.0;
  const double z = std::abs(estimate / standard_error);
  // 2 (1 - Phi(z)) written through erfc to keep precision in the tail.
  return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

InferenceReport
bootstrap_inference(const Dataset& dataset,
                    const ParameterEstimator& estimator,
                    int n_bootstrap,
                    std::uint64_t seed,
                    unsigned threads)
{
  if (n_bootstrap < 2)
    throw InvalidInput("bootstrap needs at least 2 resamples");
  InferenceReport report;
  report.estimates = estimator(dataset);
  const auto k = report.estimates.size();
  report.n_bootstrap = n_bootstrap;

  const std::size_t n = dataset.size();
  std::vector<std::optional<Eigen::VectorXd>> draws(static_cast<std::size_t>(n_bootstrap));
  parallel_for(
    draws.size(),
    [&](std::size_t b) {
      auto rng = stream_rng(seed, b);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::vector<std::size_t> rows(n);
      for (auto& r : rows)
        r = pick(rng);
      try {
        auto est = estimator(dataset.subset(rows));
        if (est.size() == k && est.allFinite())
          draws[b] = std::move(est);
      } catch (const Error&) {
      }
    },
    threads);

  std::vector<Eigen::VectorXd> ok;
  for (auto& d : draws)
    if (d)
      ok.push_back(std::move(*d));
  report.n_bootstrap_failed = n_bootstrap - static_cast<int>(ok.size());
  if (2 * report.n_bootstrap_failed > n_bootstrap || ok.size() < 2)
    throw InferenceUnreliable(std::to_string(report.n_bootstrap_failed) + " of " +
                              std::to_string(n_bootstrap) + " bootstrap resamples failed");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  for (const auto& e : ok)
    mean += e;
  mean /= static_cast<double>(ok.size());
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(k);
  for (const auto& e : ok)
    ss += (e - mean).array().square().matrix();
  report.standard_errors = (ss / static_cast<double>(ok.size() - 1)).array().sqrt().matrix();
  report.p_values.resize(k);
  report.degenerate_se.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    report.p_values(j) = wald_p_value(report.estimates(j), report.standard_errors(j));
    report.degenerate_se[static_cast<std::size_t>(j)] = report.standard_errors(j) < 1e-12;
  }
  return report;
}

InferenceReport
bootstrap_inference(const Dataset& dataset,
                    Estimator estimator,
                    int n_bootstrap,
                    std::uint64_t seed,
                    const InferenceOptions& options)
{
  return bootstrap_inference(
    dataset, make_estimator(estimator, options), n_bootstrap, seed, options.threads);
}

double
prediction_error(const Dataset& test, const CureModelParameters& fit, double clamp_epsilon)
{
  const Eigen::VectorXd w =
    e_step(fit.gamma, fit.beta, fit.baseline_cum_hazard, test, clamp_epsilon);
  const Eigen::VectorXd eta = test.incidence_design() * fit.gamma;
  double pe = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double p = std::clamp(phi(eta(j)), clamp_epsilon, 1.0 - clamp_epsilon);
    pe -= w(j) * std::log(p) + (1.0 - w(j)) * std::log(1.0 - p);
  }
  return pe;
}

TrainTestSplit
random_split(std::size_t n, std::uint64_t split_seed)
{
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
  std::mt19937_64 rng(split_seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_train = (2 * n + 2) / 3;
  TrainTestSplit split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return split;
}

std::vector<PredictionErrorResult>
pe_comparison(const Dataset& dataset, int n_splits, std::uint64_t seed, const InferenceOptions& options)
{
  if (n_splits < 1)
    throw InvalidInput("need at least one split");
  std::vector<PredictionErrorResult> results(static_cast<std::size_t>(n_splits));
  parallel_for(
    results.size(),
    [&](std::size_t s) {
      auto& r = results[s];
      r.split_seed = derive_seed(seed, s);
      const auto split = random_split(dataset.size(), r.split_seed);
      try {
        const auto train = dataset.subset(split.train);
        const auto test = dataset.subset(split.test);
        const auto em = fit_em(train, options.em_config);
        if (em.diagnostics.empty())
          r.pe_em = prediction_error(test, em.parameters(), options.em_config.clamp_epsilon);
        TwoStepOptions ts;
        ts.latency_config = options.em_config;
        const auto two = fit_two_step(
          train, em, options.trim_threshold, options.bandwidth_override, ts);
        if (two.diagnostics.latency_diagnostics.empty())
          r.pe_two_step =
            prediction_error(test, two.parameters(), options.em_config.clamp_epsilon);
      } catch (const Error&) {
      }
      if (r.pe_em && !std::isfinite(*r.pe_em))
        r.pe_em.reset();
      if (r.pe_two_step && !std::isfinite(*r.pe_two_step))
        r.pe_two_step.reset();
    },
    options.threads);
  return results;
}

PeSummary
summarize(const std::vector<PredictionErrorResult>& results)
{
  std::vector<double> diff;
  for (const auto& r : results)
    if (r.valid())
      diff.push_back(*r.pe_two_step - *r.pe_em);
  PeSummary s;
  s.n_valid = diff.size();
  if (diff.empty())
    return s;
  std::sort(diff.begin(), diff.end());
  const std::size_t m = diff.size();
  s.median_difference = m % 2 == 1 ? diff[m / 2] : 0.5 * (diff[m / 2 - 1] + diff[m / 2]);
  s.fraction_negative =
    static_cast<double>(std::count_if(diff.begin(), diff.end(), [](double d) { return d < 0.0; })) /
    static_cast<double>(m);
  return s;
}

} // namespace curemix
