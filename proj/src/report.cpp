#include "curemix/report.hpp"

#include "curemix/csv.hpp"
#include "curemix/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace curemix {

namespace {

using nlohmann::json;

json
optional_number(const std::optional<double>& v)
{
  return v ? json(*v) : json(nullptr);
}

std::optional<double>
read_optional(const json& j, const char* key)
{
  const auto& v = j.at(key);
  if (v.is_null())
    return std::nullopt;
  return v.get<double>();
}

json
rows_to_json(const std::vector<CoefficientRow>& rows)
{
  auto out = json::array();
  for (const auto& r : rows)
    out.push_back({ { "name", r.name },
                    { "estimate", r.estimate },
                    { "se", optional_number(r.se) },
                    { "p_value", optional_number(r.p_value) } });
  return out;
}

std::vector<CoefficientRow>
rows_from_json(const json& j)
{
  std::vector<CoefficientRow> rows;
  for (const auto& r : j)
    rows.push_back({ r.at("name").get<std::string>(), r.at("estimate").get<double>(),
                     read_optional(r, "se"), read_optional(r, "p_value") });
  return rows;
}

std::string
fmt17(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string
cell(const std::optional<double>& v, const char* format)
{
  if (!v)
    return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, *v);
  return buf;
}

} // namespace

void
fill_coefficients(EstimatorReport& report,
                  const Eigen::VectorXd& estimates,
                  const std::vector<std::string>& incidence_names,
                  const std::vector<std::string>& latency_names,
                  const InferenceReport* inference)
{
  const auto k_inc = incidence_names.size();
  if (static_cast<std::size_t>(estimates.size()) != k_inc + latency_names.size())
    throw InvalidInput("coefficient count does not match names");
  report.incidence.clear();
  report.latency.clear();
  for (std::size_t j = 0; j < static_cast<std::size_t>(estimates.size()); ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    CoefficientRow row{ j < k_inc ? incidence_names[j] : latency_names[j - k_inc], estimates(e),
                        std::nullopt, std::nullopt };
    if (inference != nullptr) {
      row.se = inference->standard_errors(e);
      row.p_value = inference->p_values(e);
    }
    (j < k_inc ? report.incidence : report.latency).push_back(std::move(row));
  }
  if (inference != nullptr) {
    report.n_bootstrap = inference->n_bootstrap;
    report.n_bootstrap_failed = inference->n_bootstrap_failed;
  }
}

std::string
fit_report_to_json(const FitReport& report)
{
  json j;
  j["schema_version"] = report.schema_version;
  j["n"] = report.n;
  j["dropped_rows"] = report.dropped_rows;
  j["seed"] = report.seed;
  auto& ests = j["estimators"] = json::array();
  for (const auto& e : report.estimators)
    ests.push_back({ { "estimator", e.estimator },
                     { "converged", e.converged },
                     { "iterations", e.iterations },
                     { "bandwidth", optional_number(e.bandwidth) },
                     { "n_bootstrap", e.n_bootstrap },
                     { "n_bootstrap_failed", e.n_bootstrap_failed },
                     { "diagnostics", e.diagnostics },
                     { "incidence", rows_to_json(e.incidence) },
                     { "latency", rows_to_json(e.latency) } });
  return j.dump(2) + "\n";
}

FitReport
fit_report_from_json(const std::string& text)
{
  try {
    const auto j = json::parse(text);
    FitReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != 1)
      throw InvalidInput("unsupported schema_version " + std::to_string(r.schema_version));
    r.n = j.at("n").get<std::size_t>();
    r.dropped_rows = j.at("dropped_rows").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("estimators")) {
      EstimatorReport er;
      er.estimator = e.at("estimator").get<std::string>();
      er.converged = e.at("converged").get<bool>();
      er.iterations = e.at("iterations").get<int>();
      er.bandwidth = read_optional(e, "bandwidth");
      er.n_bootstrap = e.at("n_bootstrap").get<int>();
      er.n_bootstrap_failed = e.at("n_bootstrap_failed").get<int>();
      er.diagnostics = e.at("diagnostics").get<std::vector<std::string>>();
      er.incidence = rows_from_json(e.at("incidence"));
      er.latency = rows_from_json(e.at("latency"));
      r.estimators.push_back(std::move(er));
    }
    return r;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed fit report: ") + e.what());
  }
}

std::string
format_fit_table(const FitReport& report)
{
  std::size_t width = 9;
  for (const auto& e : report.estimators) {
    for (const auto& r : e.incidence)
      width = std::max(width, r.name.size());
    for (const auto& r : e.latency)
      width = std::max(width, r.name.size());
  }
  std::ostringstream out;
  char line[256];
  for (const auto& e : report.estimators) {
    out << "== " << e.estimator << " (n = " << report.n;
    if (e.bandwidth)
      out << ", bandwidth = " << cell(e.bandwidth, "%.4g");
    out << (e.converged ? "" : ", NOT converged") << ")\n";
    for (const auto& d : e.diagnostics)
      out << "   warning: " << d << '\n';
    for (const auto* block : { &e.incidence, &e.latency }) {
      out << (block == &e.incidence ? "incidence\n" : "latency\n");
      std::snprintf(line, sizeof line, "  %-*s %12s %12s %10s\n", static_cast<int>(width), "covariate",
                    "estimate", "se", "p-value");
      out << line;
      for (const auto& r : *block) {
        std::snprintf(line, sizeof line, "  %-*s %12.5f %12s %10s\n", static_cast<int>(width),
                      r.name.c_str(), r.estimate, cell(r.se, "%.5f").c_str(),
                      cell(r.p_value, "%.4f").c_str());
        out << line;
      }
    }
  }
  return out.str();
}

std::string
pe_results_to_csv(const std::vector<PredictionErrorResult>& results)
{
  std::ostringstream out;
  out << "split,split_seed,pe_two_step,pe_em,difference\n";
  const auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string("NA"); };
  for (std::size_t s = 0; s < results.size(); ++s) {
    const auto& r = results[s];
    out << s << ',' << r.split_seed << ',' << opt(r.pe_two_step) << ',' << opt(r.pe_em) << ','
        << (r.valid() ? fmt17(*r.pe_two_step - *r.pe_em) : std::string("NA")) << '\n';
  }
  return out.str();
}

std::vector<PredictionErrorResult>
parse_pe_csv(const std::string& text)
{
  const auto table = parse_csv(text);
  if (table.header != std::vector<std::string>{ "split", "split_seed", "pe_two_step", "pe_em", "difference" })
    throw InvalidInput("unexpected PE header");
  const auto opt = [](const std::string& s) -> std::optional<double> {
    if (s == "NA")
      return std::nullopt;
    return std::stod(s);
  };
  std::vector<PredictionErrorResult> out;
  try {
    for (const auto& row : table.rows)
      out.push_back({ opt(row[2]), opt(row[3]), std::stoull(row[1]) });
  } catch (const std::logic_error& e) {
    throw InvalidInput(std::string("malformed PE CSV: ") + e.what());
  }
  return out;
}

} // namespace curemix
