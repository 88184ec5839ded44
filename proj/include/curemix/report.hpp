#pragma once

#include "curemix/inference.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace curemix {

struct CoefficientRow
{
  std::string name;
  double estimate = 0.0;
  std::optional<double> se;      // absent without bootstrap
  std::optional<double> p_value;

  bool operator==(const CoefficientRow&) const = default;
};

struct EstimatorReport
{
  std::string estimator; // "em" or "two_step"
  bool converged = false;
  int iterations = 0;
  std::optional<double> bandwidth; // 2-step only
  int n_bootstrap = 0;
  int n_bootstrap_failed = 0;
  std::vector<std::string> diagnostics;
  std::vector<CoefficientRow> incidence;
  std::vector<CoefficientRow> latency;

  bool operator==(const EstimatorReport&) const = default;
};

struct FitReport
{
  int schema_version = 1;
  std::size_t n = 0;
  std::size_t dropped_rows = 0;
  std::uint64_t seed = 0;
  std::vector<EstimatorReport> estimators;

  bool operator==(const FitReport&) const = default;
};

//! Fills estimates (and SE / p-values when `inference` is given) from a
//! stacked (gamma, beta) vector.
void fill_coefficients(EstimatorReport& report,
                       const Eigen::VectorXd& estimates,
                       const std::vector<std::string>& incidence_names,
                       const std::vector<std::string>& latency_names,
                       const InferenceReport* inference);

std::string fit_report_to_json(const FitReport& report);
FitReport fit_report_from_json(const std::string& text);
//! Aligned plain-text table, one block per estimator.
std::string format_fit_table(const FitReport& report);

std::string pe_results_to_csv(const std::vector<PredictionErrorResult>& results);
std::vector<PredictionErrorResult> parse_pe_csv(const std::string& text);

} // namespace curemix
