#pragma once

#include "curemix/dataset.hpp"
#include "curemix/em.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace curemix {

enum class Estimator
{
  em,
  two_step,
};

std::string to_string(Estimator e);

struct InferenceOptions
{
  EmConfig em_config{};
  double trim_threshold = 0.0;
  std::optional<double> bandwidth_override;
  unsigned threads = 0;
};

struct InferenceReport
{
  Eigen::VectorXd estimates; // (gamma, beta)
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd p_values;
  //! SE below 1e-12: the Wald statistic is meaningless for that entry.
  std::vector<bool> degenerate_se;
  int n_bootstrap = 0;
  int n_bootstrap_failed = 0;
};

//! Maps a dataset to a parameter vector; throwing curemix::Error or
//! returning non-finite entries marks the resample as failed.
using ParameterEstimator = std::function<Eigen::VectorXd(const Dataset&)>;

ParameterEstimator make_estimator(Estimator estimator, const InferenceOptions& options = {});

double normal_cdf(double x);
//! Two-sided Wald p-value 2 (1 - Phi(|estimate / se|)).
double wald_p_value(double estimate, double standard_error);

InferenceReport bootstrap_inference(const Dataset& dataset,
                                    Estimator estimator,
                                    int n_bootstrap,
                                    std::uint64_t seed,
                                    const InferenceOptions& options = {});

InferenceReport bootstrap_inference(const Dataset& dataset,
                                    const ParameterEstimator& estimator,
                                    int n_bootstrap,
                                    std::uint64_t seed,
                                    unsigned threads = 0);

//! Negative log score of the incidence model on a test set, with the
//! latent uncure status replaced by its posterior probability.
double prediction_error(const Dataset& test,
                        const CureModelParameters& fit,
                        double clamp_epsilon = 1e-10);

struct PredictionErrorResult
{
  std::optional<double> pe_two_step;
  std::optional<double> pe_em;
  std::uint64_t split_seed = 0;

  bool valid() const { return pe_two_step.has_value() && pe_em.has_value(); }
};

struct TrainTestSplit
{
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

//! Random 2:1 partition; the training part gets ceil(2n/3) subjects.
TrainTestSplit random_split(std::size_t n, std::uint64_t split_seed);

std::vector<PredictionErrorResult> pe_comparison(const Dataset& dataset,
                                                 int n_splits,
                                                 std::uint64_t seed,
                                                 const InferenceOptions& options = {});

struct PeSummary
{
  std::size_t n_valid = 0;
  double median_difference = 0.0; // two-step minus EM
  double fraction_negative = 0.0;
};

PeSummary summarize(const std::vector<PredictionErrorResult>& results);

} // namespace curemix
