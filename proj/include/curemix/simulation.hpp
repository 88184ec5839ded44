#pragma once

#include "curemix/dataset.hpp"
#include "curemix/em.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace curemix {

//! One row of the scenario catalog; rates are fractions in [0, 1].
struct CatalogEntry
{
  int model = 0;
  int scenario = 0;
  double gamma0 = 0.0;
  double lambda_c = 0.0;
  double censoring_rate = 0.0;
  double cure_rate = 0.0;
};

const std::vector<CatalogEntry>& scenario_catalog();
const CatalogEntry* find_catalog_entry(int model, int scenario);
//! "1/1, 1/2, ..., 5/1"
std::string valid_cells_description();

struct ScenarioConfig
{
  int model = 1;
  int scenario = 1;
  std::size_t n = 200;
  double gamma0_intercept = 0.0;
  double lambda_c = 1.0;
  std::uint64_t seed = 0;
  //! Model 4 only: fit the latency on X1..X5 instead of Z1..Z3.
  bool misspecify_latency_covariates = false;
  //! Models 3 and 4: use X1 as Z1 instead of an independent draw.
  bool tie_z1_to_x1 = false;

  static ScenarioConfig from_catalog(int model, int scenario, std::size_t n, std::uint64_t seed = 0);
  void validate() const;
};

//! Incidence coefficients, intercept first.
Eigen::VectorXd true_gamma(const ScenarioConfig& config);
//! Latency coefficients in the columns the estimators see.
Eigen::VectorXd true_beta(const ScenarioConfig& config);

//! Model 5: 97% quantile of the Weibull with survival exp(-mu t^rho).
double model5_truncation(double rho);
//! Model 5 censoring bound max_z tau0(z) + 2.
double model5_censoring_bound();

struct SimulatedData
{
  Dataset data;
  //! Hidden truth, for diagnostics only.
  std::vector<bool> uncured;
  Eigen::VectorXd latent_time; // +inf for cured subjects
  double censoring_bound = 0.0;

  double cure_rate() const;
  double censoring_rate() const;
};

SimulatedData generate_dataset(const ScenarioConfig& config, std::mt19937_64& rng);
//! Uses config.seed.
SimulatedData generate_dataset(const ScenarioConfig& config);

//! Inverse-transform draw with survival exp(-mu t^rho e^lp).
double weibull_ph_draw(double mu, double rho, double lp, double u);

enum class EstimatorSet
{
  em,
  two_step,
  both,
};

std::string to_string(EstimatorSet s);
std::optional<EstimatorSet> parse_estimator_set(const std::string& s);

struct MonteCarloOptions
{
  EmConfig em_config{};
  unsigned threads = 0;
};

struct ReplicationRecord
{
  bool em_converged = false;
  bool em_failed = false;
  bool two_step_failed = false;
  bool two_step_finite = false;
  bool pi_hat_in_range = true;
  Eigen::VectorXd em_estimate;
  Eigen::VectorXd two_step_estimate;
  double cure_rate = 0.0;
  double censoring_rate = 0.0;
  double bandwidth = 0.0;
};

struct ReportRow
{
  std::string estimator; // "em" or "two_step"
  std::string parameter; // gamma1.., beta1..
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  std::size_t n_reps = 0;
  std::size_t n_nonconverged = 0;

  bool operator==(const ReportRow&) const = default;
};

struct MonteCarloReport
{
  int model = 0;
  int scenario = 0;
  std::size_t n = 0;
  bool misspecified = false;
  std::size_t n_replications = 0;
  //! Replications entering the aggregates: EM converged and the 2-step did not fail.
  std::size_t n_used = 0;
  std::size_t n_nonconverged_em = 0;
  std::size_t n_two_step_failed = 0;
  std::size_t n_two_step_nonfinite = 0;
  std::size_t n_pi_hat_out_of_range = 0;
  double empirical_cure_rate = 0.0;
  double empirical_censor_rate = 0.0;
  std::vector<ReportRow> rows;
  std::vector<ReplicationRecord> replications;

  const ReportRow* find(const std::string& estimator, const std::string& parameter) const;
};

std::vector<std::string> parameter_names(std::size_t n_gamma, std::size_t n_beta);

MonteCarloReport run_monte_carlo(const ScenarioConfig& config,
                                 std::size_t n_replications,
                                 EstimatorSet estimators,
                                 std::uint64_t seed,
                                 const MonteCarloOptions& options = {});

//! Report rows as CSV (doubles printed with 17 significant digits).
std::string report_to_csv(const MonteCarloReport& report);

struct ParsedReportCsv
{
  int model = 0;
  int scenario = 0;
  std::size_t n = 0;
  std::vector<ReportRow> rows;
};

ParsedReportCsv parse_report_csv(const std::string& text);

//! JSON without per-replication records.
std::string report_to_json(const MonteCarloReport& report);
MonteCarloReport report_from_json(const std::string& text);

} // namespace curemix
