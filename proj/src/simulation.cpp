#include "curemix/simulation.hpp"

#include "curemix/csv.hpp"
#include "curemix/errors.hpp"
#include "curemix/logistic.hpp"
#include "curemix/parallel.hpp"
#include "curemix/random.hpp"
#include "curemix/two_step.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace curemix {

namespace {

constexpr double kMu = 1.5;
constexpr double kRho = 0.75;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform on the open interval (0, 1) from 53 random bits.
double
open_uniform(std::mt19937_64& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

struct Layout
{
  int p;       // incidence covariates
  int q;       // latency covariates used to generate T
  double tau0; // latency truncation (Model 5: per subject)
  double tau;  // censoring truncation
};

Layout
layout(int model)
{
  switch (model) {
    case 1: return { 2, 2, 15.0, 17.0 };
    case 2: return { 3, 3, 7.0, 9.0 };
    case 3: return { 4, 3, 10.0, 12.0 };
    case 4: return { 5, 3, 7.0, 9.0 };
    default: return { 3, 3, kInf, model5_censoring_bound() };
  }
}

Eigen::VectorXd
generating_beta(int model)
{
  switch (model) {
    case 1: return Eigen::Vector2d(0.5, 0.3);
    case 2: return Eigen::Vector3d(-0.8, 1.5, -0.5);
    case 3: return Eigen::Vector3d(0.1, 0.4, -0.2);
    case 4: return Eigen::Vector3d(0.2, -0.5, 0.3);
    default: return Eigen::Vector3d(1.0, 0.4, -0.6);
  }
}

} // namespace

const std::vector<CatalogEntry>&
scenario_catalog()
{
  // Model 4 scenario 1 uses lambda_C = 0.06; see the decisions ledger.
  static const std::vector<CatalogEntry> catalog{
    { 1, 1, 2.0, 0.4, 0.36, 0.20 },        { 1, 2, 0.6, 0.4, 0.50, 0.40 },
    { 1, 3, -0.5, 0.3, 0.63, 0.58 },       { 2, 1, 1.6, 1.0 / 35.0, 0.30, 0.20 },
    { 2, 2, 0.4, 1.0 / 20.0, 0.45, 0.40 }, { 2, 3, -0.6, 1.0, 0.75, 0.60 },
    { 3, 1, 2.0, 1.0 / 9.0, 0.35, 0.20 },  { 3, 2, 0.9, 1.0 / 7.0, 0.50, 0.40 },
    { 3, 3, -0.1, 1.0 / 7.0, 0.65, 0.60 }, { 4, 1, 1.5, 0.06, 0.25, 0.20 },
    { 4, 2, 0.3, 0.3, 0.55, 0.40 },        { 4, 3, -0.6, 0.4, 0.70, 0.60 },
    { 5, 1, 1.4, 1.0 / 22.0, 0.45, 0.30 },
  };
  return catalog;
}

const CatalogEntry*
find_catalog_entry(int model, int scenario)
{
  for (const auto& e : scenario_catalog())
    if (e.model == model && e.scenario == scenario)
      return &e;
  return nullptr;
}

std::string
valid_cells_description()
{
  std::string out;
  for (const auto& e : scenario_catalog()) {
    if (!out.empty())
      out += ", ";
    out += std::to_string(e.model) + "/" + std::to_string(e.scenario);
  }
  return out;
}

ScenarioConfig
ScenarioConfig::from_catalog(int model, int scenario, std::size_t n, std::uint64_t seed)
{
  const auto* entry = find_catalog_entry(model, scenario);
  if (entry == nullptr)
    throw InvalidInput("unknown (model, scenario) cell " + std::to_string(model) + "/" +
                       std::to_string(scenario) + "; valid cells: " + valid_cells_description());
  ScenarioConfig c;
  c.model = model;
  c.scenario = scenario;
  c.n = n;
  c.gamma0_intercept = entry->gamma0;
  c.lambda_c = entry->lambda_c;
  c.seed = seed;
  return c;
}

void
ScenarioConfig::validate() const
{
  if (find_catalog_entry(model, scenario) == nullptr)
    throw InvalidInput("unknown (model, scenario) cell " + std::to_string(model) + "/" +
                       std::to_string(scenario) + "; valid cells: " + valid_cells_description());
  if (n < 2)
    throw InvalidInput("n must be at least 2");
  if (!(lambda_c > 0.0) || !std::isfinite(lambda_c))
    throw InvalidInput("lambda_C must be positive");
  if (!std::isfinite(gamma0_intercept))
    throw InvalidInput("intercept must be finite");
  if (misspecify_latency_covariates && model != 4)
    throw InvalidInput("latency misspecification is defined for Model 4 only");
  if (tie_z1_to_x1 && model != 3 && model != 4)
    throw InvalidInput("tying Z1 to X1 applies to Models 3 and 4 only");
}

Eigen::VectorXd
true_gamma(const ScenarioConfig& c)
{
  const double g = c.gamma0_intercept;
  switch (c.model) {
    case 1: return Eigen::Vector3d(g, 1.5, 1.5);
    case 2: return Eigen::Vector4d(g, -1.0, 1.0, -0.3);
    case 3: {
      Eigen::VectorXd v(5);
      v << g, -0.3, 0.8, 0.5, -1.0;
      return v;
    }
    case 4: {
      Eigen::VectorXd v(6);
      v << g, -0.8, 0.3, -0.4, 0.5, 0.6;
      return v;
    }
    default: return Eigen::Vector4d(g, 2.0, 1.0, -1.0);
  }
}

Eigen::VectorXd
true_beta(const ScenarioConfig& c)
{
  if (c.model == 4 && c.misspecify_latency_covariates) {
    // Z2 = X3 and Z3 = X4; Z1 is not among X1..X5 unless tied to X1.
    Eigen::VectorXd v(5);
    v << (c.tie_z1_to_x1 ? 0.2 : 0.0), 0.0, -0.5, 0.3, 0.0;
    return v;
  }
  return generating_beta(c.model);
}

double
model5_truncation(double rho)
{
  return std::pow(-std::log(0.03) / kMu, 1.0 / rho);
}

double
model5_censoring_bound()
{
  // (-log 0.03 / mu) > 1, so tau0 decreases in rho; rho is smallest at
  // beta'z = -1 + 0 - 0.6 on the closure of the covariate support.
  const double rho_min = kRho + std::exp(-1.6);
  return model5_truncation(rho_min) + 2.0;
}

double
weibull_ph_draw(double mu, double rho, double lp, double u)
{
  return std::pow(-std::log(u) / (mu * std::exp(lp)), 1.0 / rho);
}

double
SimulatedData::cure_rate() const
{
  const auto k = std::count(uncured.begin(), uncured.end(), false);
  return static_cast<double>(k) / static_cast<double>(uncured.size());
}

double
SimulatedData::censoring_rate() const
{
  return static_cast<double>(data.censored_count()) / static_cast<double>(data.size());
}

SimulatedData
generate_dataset(const ScenarioConfig& config, std::mt19937_64& rng)
{
  config.validate();
  const auto L = layout(config.model);
  const auto n = static_cast<Eigen::Index>(config.n);
  const Eigen::VectorXd gamma = true_gamma(config);
  const Eigen::VectorXd beta = generating_beta(config.model);

  std::normal_distribution<double> normal(0.0, 1.0);
  const auto unif_pm1 = [&] { return 2.0 * open_uniform(rng) - 1.0; };
  const auto bern = [&](double p) { return open_uniform(rng) < p ? 1.0 : 0.0; };

  Eigen::MatrixXd x(n, L.p);
  Eigen::MatrixXd z(n, L.q);
  Eigen::VectorXd time(n), latent(n);
  Eigen::VectorXi event(n);
  std::vector<bool> uncured(config.n);

  for (Eigen::Index i = 0; i < n; ++i) {
    switch (config.model) {
      case 1:
        x(i, 0) = normal(rng);
        x(i, 1) = unif_pm1();
        z.row(i) = x.row(i);
        break;
      case 2:
        x(i, 0) = normal(rng);
        x(i, 1) = bern(0.3);
        x(i, 2) = bern(0.7);
        z.row(i) = x.row(i);
        break;
      case 3: {
        x(i, 0) = normal(rng);
        x(i, 1) = unif_pm1();
        x(i, 2) = bern(0.4);
        x(i, 3) = bern(0.6);
        const double z1 = normal(rng);
        z(i, 0) = config.tie_z1_to_x1 ? x(i, 0) : z1;
        z(i, 1) = x(i, 1);
        z(i, 2) = x(i, 3);
        break;
      }
      case 4: {
        x(i, 0) = normal(rng);
        x(i, 1) = unif_pm1();
        x(i, 2) = bern(0.5) + bern(0.5);
        x(i, 3) = bern(0.4);
        x(i, 4) = bern(0.6);
        const double z1 = normal(rng);
        z(i, 0) = config.tie_z1_to_x1 ? x(i, 0) : z1;
        z(i, 1) = x(i, 2);
        z(i, 2) = x(i, 3);
        break;
      }
      default:
        x(i, 0) = unif_pm1();
        x(i, 1) = bern(0.4);
        x(i, 2) = bern(0.6);
        z.row(i) = x.row(i);
        break;
    }

    const double inc_lp = gamma(0) + x.row(i).dot(gamma.tail(L.p));
    const double lat_lp = z.row(i).dot(beta);
    const bool is_uncured = open_uniform(rng) < phi(inc_lp);

    double t = kInf;
    const double u_t = open_uniform(rng);
    if (is_uncured) {
      if (config.model == 5) {
        const double rho = kRho + std::exp(lat_lp);
        t = std::min(weibull_ph_draw(kMu, rho, lat_lp, u_t), model5_truncation(rho));
      } else {
        t = std::min(weibull_ph_draw(kMu, kRho, lat_lp, u_t), L.tau0);
      }
    }

    const double u_c = open_uniform(rng);
    double c = 0.0;
    switch (config.model) {
      case 1:
      case 4: c = -std::log(u_c) / config.lambda_c; break;
      case 2: c = weibull_ph_draw(config.lambda_c * kMu, kRho, inc_lp, u_c); break;
      case 3: c = weibull_ph_draw(config.lambda_c * kMu, kRho, 0.4 * inc_lp + 0.5 * lat_lp, u_c); break;
      default: c = weibull_ph_draw(config.lambda_c * kMu, 2.5, inc_lp, u_c); break;
    }
    c = std::min(c, L.tau);

    latent(i) = t;
    uncured[static_cast<std::size_t>(i)] = is_uncured;
    event(i) = t <= c ? 1 : 0;
    time(i) = std::min(t, c);
  }

  Eigen::MatrixXd fit_z = config.misspecify_latency_covariates ? x : z;
  return { Dataset(std::move(time), std::move(event), std::move(x), std::move(fit_z)),
           std::move(uncured), std::move(latent), L.tau };
}

SimulatedData
generate_dataset(const ScenarioConfig& config)
{
  std::mt19937_64 rng(config.seed);
  return generate_dataset(config, rng);
}

std::string
to_string(EstimatorSet s)
{
  switch (s) {
    case EstimatorSet::em: return "em";
    case EstimatorSet::two_step: return "two_step";
    default: return "both";
  }
}

std::optional<EstimatorSet>
parse_estimator_set(const std::string& s)
{
  if (s == "em")
    return EstimatorSet::em;
  if (s == "two_step" || s == "two-step")
    return EstimatorSet::two_step;
  if (s == "both")
    return EstimatorSet::both;
  return std::nullopt;
}

std::vector<std::string>
parameter_names(std::size_t n_gamma, std::size_t n_beta)
{
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= n_gamma; ++j)
    names.push_back("gamma" + std::to_string(j));
  for (std::size_t j = 1; j <= n_beta; ++j)
    names.push_back("beta" + std::to_string(j));
  return names;
}

const ReportRow*
MonteCarloReport::find(const std::string& estimator, const std::string& parameter) const
{
  for (const auto& r : rows)
    if (r.estimator == estimator && r.parameter == parameter)
      return &r;
  return nullptr;
}

namespace {

Eigen::VectorXd
stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

ReplicationRecord
run_replication(const ScenarioConfig& config,
                EstimatorSet estimators,
                std::uint64_t seed,
                std::size_t index,
                const MonteCarloOptions& options)
{
  auto rng = stream_rng(seed, index);
  const auto sim = generate_dataset(config, rng);
  ReplicationRecord rec;
  rec.cure_rate = sim.cure_rate();
  rec.censoring_rate = sim.censoring_rate();

  std::optional<MixtureCureFit> em;
  try {
    em = fit_em(sim.data, options.em_config);
    rec.em_converged = em->converged;
    rec.em_estimate = stack(em->gamma, em->beta);
  } catch (const Error&) {
    rec.em_failed = true;
  }

  if (estimators == EstimatorSet::em)
    return rec;
  if (!em) {
    rec.two_step_failed = true;
    return rec;
  }
  try {
    TwoStepOptions ts;
    ts.latency_config = options.em_config;
    const auto fit = fit_two_step(sim.data, *em, 0.0, std::nullopt, ts);
    rec.two_step_estimate = stack(fit.gamma, fit.beta);
    rec.two_step_finite = rec.two_step_estimate.allFinite();
    rec.pi_hat_in_range =
      (fit.pi_hat.array() >= 0.0).all() && (fit.pi_hat.array() <= 1.0).all();
    rec.bandwidth = fit.bandwidth;
  } catch (const Error&) {
    rec.two_step_failed = true;
  }
  return rec;
}

void
aggregate(MonteCarloReport& report,
          const std::vector<std::size_t>& used,
          const std::string& estimator,
          const Eigen::VectorXd& truth,
          const std::vector<std::string>& names,
          bool two_step)
{
  const auto k = truth.size();
  const double m = static_cast<double>(used.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  for (auto r : used)
    mean += two_step ? report.replications[r].two_step_estimate : report.replications[r].em_estimate;
  mean /= m;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(k);
  for (auto r : used) {
    const auto& e =
      two_step ? report.replications[r].two_step_estimate : report.replications[r].em_estimate;
    ss += (e - mean).array().square().matrix();
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    ReportRow row;
    row.estimator = estimator;
    row.parameter = names[static_cast<std::size_t>(j)];
    row.bias = mean(j) - truth(j);
    row.variance = used.size() >= 2 ? ss(j) / (m - 1.0) : std::numeric_limits<double>::quiet_NaN();
    row.mse = row.bias * row.bias + row.variance;
    row.n_reps = used.size();
    row.n_nonconverged = report.n_nonconverged_em;
    report.rows.push_back(std::move(row));
  }
}

} // namespace

MonteCarloReport
run_monte_carlo(const ScenarioConfig& config,
                std::size_t n_replications,
                EstimatorSet estimators,
                std::uint64_t seed,
                const MonteCarloOptions& options)
{
  config.validate();
  options.em_config.validate();
  if (n_replications < 2)
    throw InvalidInput("need at least 2 replications");

  MonteCarloReport report;
  report.model = config.model;
  report.scenario = config.scenario;
  report.n = config.n;
  report.misspecified = config.misspecify_latency_covariates;
  report.n_replications = n_replications;
  report.replications.resize(n_replications);
  parallel_for(
    n_replications,
    [&](std::size_t r) {
      report.replications[r] = run_replication(config, estimators, seed, r, options);
    },
    options.threads);

  const bool with_two_step = estimators != EstimatorSet::em;
  std::vector<std::size_t> used;
  for (std::size_t r = 0; r < n_replications; ++r) {
    const auto& rec = report.replications[r];
    report.empirical_cure_rate += rec.cure_rate;
    report.empirical_censor_rate += rec.censoring_rate;
    if (!rec.em_converged)
      ++report.n_nonconverged_em;
    if (with_two_step) {
      if (rec.two_step_failed)
        ++report.n_two_step_failed;
      else if (!rec.two_step_finite)
        ++report.n_two_step_nonfinite;
      if (!rec.pi_hat_in_range)
        ++report.n_pi_hat_out_of_range;
    }
    const bool em_ok = rec.em_converged && rec.em_estimate.allFinite();
    const bool ts_ok = !with_two_step || (!rec.two_step_failed && rec.two_step_finite);
    if (em_ok && ts_ok)
      used.push_back(r);
  }
  report.empirical_cure_rate /= static_cast<double>(n_replications);
  report.empirical_censor_rate /= static_cast<double>(n_replications);
  report.n_used = used.size();

  const Eigen::VectorXd truth = stack(true_gamma(config), true_beta(config));
  const auto names = parameter_names(static_cast<std::size_t>(true_gamma(config).size()),
                                     static_cast<std::size_t>(true_beta(config).size()));
  if (!used.empty()) {
    if (estimators != EstimatorSet::two_step)
      aggregate(report, used, "em", truth, names, false);
    if (with_two_step)
      aggregate(report, used, "two_step", truth, names, true);
  }
  return report;
}

namespace {

std::string
fmt17(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double
to_double(const std::string& s)
{
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size())
    throw InvalidInput("bad number '" + s + "' in report");
  return v;
}

} // namespace

std::string
report_to_csv(const MonteCarloReport& report)
{
  std::ostringstream out;
  out << "model,scenario,n,estimator,parameter,bias,variance,mse,n_reps,n_nonconverged\n";
  for (const auto& r : report.rows)
    out << report.model << ',' << report.scenario << ',' << report.n << ',' << r.estimator << ','
        << r.parameter << ',' << fmt17(r.bias) << ',' << fmt17(r.variance) << ',' << fmt17(r.mse)
        << ',' << r.n_reps << ',' << r.n_nonconverged << '\n';
  return out.str();
}

ParsedReportCsv
parse_report_csv(const std::string& text)
{
  const auto table = parse_csv(text);
  const std::vector<std::string> expected{ "model", "scenario", "n", "estimator", "parameter",
                                           "bias", "variance", "mse", "n_reps", "n_nonconverged" };
  if (table.header != expected)
    throw InvalidInput("unexpected report header");
  ParsedReportCsv parsed;
  try {
    for (const auto& row : table.rows) {
      parsed.model = std::stoi(row[0]);
      parsed.scenario = std::stoi(row[1]);
      parsed.n = std::stoul(row[2]);
      parsed.rows.push_back({ row[3], row[4], to_double(row[5]), to_double(row[6]),
                              to_double(row[7]), std::stoul(row[8]), std::stoul(row[9]) });
    }
  } catch (const std::logic_error& e) {
    throw InvalidInput(std::string("malformed report: ") + e.what());
  }
  return parsed;
}

std::string
report_to_json(const MonteCarloReport& report)
{
  nlohmann::json j;
  j["schema_version"] = 1;
  j["model"] = report.model;
  j["scenario"] = report.scenario;
  j["n"] = report.n;
  j["misspecified"] = report.misspecified;
  j["n_replications"] = report.n_replications;
  j["n_used"] = report.n_used;
  j["n_nonconverged_em"] = report.n_nonconverged_em;
  j["n_two_step_failed"] = report.n_two_step_failed;
  j["n_two_step_nonfinite"] = report.n_two_step_nonfinite;
  j["n_pi_hat_out_of_range"] = report.n_pi_hat_out_of_range;
  j["empirical_cure_rate"] = report.empirical_cure_rate;
  j["empirical_censor_rate"] = report.empirical_censor_rate;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({ { "estimator", r.estimator },
                     { "parameter", r.parameter },
                     { "bias", r.bias },
                     { "variance", r.variance },
                     { "mse", r.mse },
                     { "n_reps", r.n_reps },
                     { "n_nonconverged", r.n_nonconverged } });
  return j.dump(2) + "\n";
}

MonteCarloReport
report_from_json(const std::string& text)
{
  try {
    const auto j = nlohmann::json::parse(text);
    MonteCarloReport report;
    report.model = j.at("model").get<int>();
    report.scenario = j.at("scenario").get<int>();
    report.n = j.at("n").get<std::size_t>();
    report.misspecified = j.at("misspecified").get<bool>();
    report.n_replications = j.at("n_replications").get<std::size_t>();
    report.n_used = j.at("n_used").get<std::size_t>();
    report.n_nonconverged_em = j.at("n_nonconverged_em").get<std::size_t>();
    report.n_two_step_failed = j.at("n_two_step_failed").get<std::size_t>();
    report.n_two_step_nonfinite = j.at("n_two_step_nonfinite").get<std::size_t>();
    report.n_pi_hat_out_of_range = j.at("n_pi_hat_out_of_range").get<std::size_t>();
    report.empirical_cure_rate = j.at("empirical_cure_rate").get<double>();
    report.empirical_censor_rate = j.at("empirical_censor_rate").get<double>();
    for (const auto& r : j.at("rows"))
      report.rows.push_back({ r.at("estimator").get<std::string>(),
                              r.at("parameter").get<std::string>(),
                              r.at("bias").get<double>(),
                              r.at("variance").get<double>(),
                              r.at("mse").get<double>(),
                              r.at("n_reps").get<std::size_t>(),
                              r.at("n_nonconverged").get<std::size_t>() });
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed report JSON: ") + e.what());
  }
}

} // namespace curemix
