// Integration tests driving the curemix executable.

#include "curemix/csv.hpp"
#include "curemix/report.hpp"
#include "curemix/simulation.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace curemix;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code = -1;
  std::string err;
};

Run
run(const std::string& args)
{
  const std::string err_path = "cli_stderr.txt";
  const std::string cmd = std::string(CUREMIX_CLI) + " " + args + " > cli_stdout.txt 2> " + err_path;
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err_path);
  return r;
}

std::string
write_dataset(const std::string& name, std::uint64_t seed, std::size_t n = 150)
{
  const auto sim = generate_dataset(ScenarioConfig::from_catalog(1, 2, n, seed));
  std::ostringstream os;
  os.precision(17);
  os << "time,status,x1,x2,dup\n";
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    os << sim.data.time()(k) << ',' << sim.data.event()(k) << ',' << sim.data.x()(k, 0) << ','
       << sim.data.x()(k, 1) << ',' << 2.0 * sim.data.x()(k, 0) << '\n';
  }
  write_file_atomic(name, os.str());
  return name;
}

std::size_t
count_lines(const std::string& text)
{
  std::size_t lines = 0;
  for (char c : text)
    lines += c == '\n' ? 1 : 0;
  return lines;
}

} // namespace

TEST_CASE("fit succeeds and writes a parseable report")
{
  const auto data = write_dataset("cli_data.csv", 1);
  const auto r = run("fit --input " + data +
                     " --incidence x1,x2 --latency x1,x2 --estimator both --bootstrap 10 --seed 3 --out cli_fit.json");
  REQUIRE(r.code == 0);
  const auto report = fit_report_from_json(read_file("cli_fit.json"));
  REQUIRE(report.estimators.size() == 2);
  CHECK(report.n == 150);
  CHECK(report.estimators[0].incidence.size() == 3);
  CHECK(report.estimators[0].latency.size() == 2);
  CHECK(report.estimators[1].bandwidth.has_value());
  CHECK(report.estimators[0].incidence[0].se.has_value());
  CHECK(read_file("cli_stdout.txt").find("two_step") != std::string::npos);
}

TEST_CASE("fit without bootstrap leaves SE and p-values null")
{
  const auto data = write_dataset("cli_data.csv", 2);
  const auto r = run("fit --input " + data + " --incidence x1,x2 --latency x1,x2 --estimator em --out cli_fit0.json");
  REQUIRE(r.code == 0);
  const auto text = read_file("cli_fit0.json");
  const auto report = fit_report_from_json(text);
  REQUIRE(report.estimators.size() == 1);
  for (const auto& row : report.estimators[0].incidence) {
    CHECK_FALSE(row.se.has_value());
    CHECK_FALSE(row.p_value.has_value());
  }
  CHECK(text.find("null") != std::string::npos);
}

TEST_CASE("data errors exit with code 2")
{
  write_file_atomic("cli_bad_status.csv", "time,status,x\n1,1,0.5\n2,2,0.1\n3,0,0.3\n");
  const auto bad = run("fit --input cli_bad_status.csv --incidence x --latency x");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 3") != std::string::npos);

  const auto data = write_dataset("cli_data.csv", 3);
  const auto missing = run("fit --input " + data + " --incidence x1,weight --latency x1");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("weight") != std::string::npos);

  write_file_atomic("cli_text.csv", "time,status,x\n1,1,0.5\n2,0,abc\n");
  const auto text = run("fit --input cli_text.csv --incidence x --latency x");
  CHECK(text.code == 2);
  CHECK(text.err.find("abc") != std::string::npos);

  CHECK(run("fit --input does_not_exist.csv --incidence x --latency x").code == 2);
  CHECK(run("fit --input " + data + " --incidence x1 --latency x1 --estimator three").code == 2);
}

TEST_CASE("collinear covariates are a numerical failure")
{
  const auto data = write_dataset("cli_data.csv", 4);
  const auto r = run("fit --input " + data + " --incidence x1,dup --latency x2");
  CHECK(r.code == 3);
}

TEST_CASE("pe is deterministic and writes one row per split")
{
  const auto data = write_dataset("cli_data.csv", 5);
  REQUIRE(run("pe --input " + data + " --incidence x1,x2 --latency x1,x2 --splits 3 --seed 7 --out cli_pe_a.csv").code == 0);
  REQUIRE(run("pe --input " + data + " --incidence x1,x2 --latency x1,x2 --splits 3 --seed 7 --out cli_pe_b.csv").code == 0);
  CHECK(read_file("cli_pe_a.csv") == read_file("cli_pe_b.csv"));
  CHECK(parse_pe_csv(read_file("cli_pe_a.csv")).size() == 3);
  CHECK(read_file("cli_stdout.txt").find("median") != std::string::npos);

  REQUIRE(run("pe --input " + data + " --incidence x1,x2 --latency x1,x2 --splits 1 --seed 7 --out cli_pe_1.csv").code == 0);
  CHECK(count_lines(read_file("cli_pe_1.csv")) == 2);
}

TEST_CASE("simulate writes the expected rows")
{
  REQUIRE(run("simulate --model 1 --scenario 1 --n 200 --reps 50 --seed 1 --out cli_sim.csv").code == 0);
  const auto parsed = parse_report_csv(read_file("cli_sim.csv"));
  CHECK(parsed.rows.size() == 10);
  CHECK(fs::exists("cli_sim.json"));
  CHECK(report_from_json(read_file("cli_sim.json")).rows == parsed.rows);

  REQUIRE(run("simulate --model 4 --scenario 1 --n 200 --reps 3 --misspecify --seed 1 --out cli_sim4.csv").code == 0);
  int beta_rows = 0;
  for (const auto& row : parse_report_csv(read_file("cli_sim4.csv")).rows)
    beta_rows += row.estimator == "em" && row.parameter.rfind("beta", 0) == 0 ? 1 : 0;
  CHECK(beta_rows == 5);

  const auto bad = run("simulate --model 6 --scenario 1 --n 100 --reps 2 --out cli_sim6.csv");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("5/1") != std::string::npos);
  CHECK(run("simulate --model 1 --scenario 1 --misspecify --n 100 --reps 2 --out cli_sim7.csv").code == 2);
}
