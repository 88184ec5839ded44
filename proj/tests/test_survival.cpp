#include "oracles.hpp"

#include "curemix/dataset.hpp"
#include "curemix/errors.hpp"
#include "curemix/kernel.hpp"
#include "curemix/step_function.hpp"
#include "curemix/survival.hpp"

#include <doctest.h>

#include <random>

using namespace curemix;

namespace {

Eigen::VectorXd
vec(std::initializer_list<double> v)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

Eigen::VectorXi
ivec(std::initializer_list<int> v)
{
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v)
    out(i++) = x;
  return out;
}

struct Censored
{
  Eigen::VectorXd y;
  Eigen::VectorXi d;
};

Censored
random_censored(std::mt19937_64& rng, int n, bool ties = false)
{
  std::exponential_distribution<double> t(1.0), c(0.5);
  Censored out{ Eigen::VectorXd(n), Eigen::VectorXi(n) };
  for (int i = 0; i < n; ++i) {
    double a = t(rng), b = c(rng);
    if (ties) {
      a = std::ceil(a * 4) / 4;
      b = std::ceil(b * 4) / 4;
    }
    out.y(i) = std::min(a, b);
    out.d(i) = a <= b ? 1 : 0;
  }
  out.d(0) = 1;
  return out;
}

} // namespace

TEST_CASE("dataset validation")
{
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  CHECK_NOTHROW(Dataset(vec({ 1, 2, 3 }), ivec({ 1, 0, 0 }), x, x));
  CHECK_THROWS_AS(Dataset(vec({ 1, 2, 3 }), ivec({ 0, 0, 0 }), x, x), InvalidInput);
  CHECK_THROWS_AS(Dataset(vec({ 1, -2, 3 }), ivec({ 1, 0, 0 }), x, x), InvalidInput);
  CHECK_THROWS_AS(Dataset(vec({ 1, 2, 3 }), ivec({ 1, 2, 0 }), x, x), InvalidInput);
  CHECK_THROWS_AS(Dataset(vec({ 1, 2 }), ivec({ 1, 0, 0 }), x, x), InvalidInput);
  CHECK_THROWS_AS(Dataset(vec({ 1, std::nan(""), 3 }), ivec({ 1, 0, 0 }), x, x), InvalidInput);

  const Dataset ds(vec({ 1, 2, 3 }), ivec({ 1, 0, 1 }), Eigen::MatrixXd::Ones(3, 2), x);
  const Eigen::MatrixXd design = ds.incidence_design();
  CHECK(design.cols() == 3);
  CHECK(design.col(0).isOnes());
  const std::vector<std::size_t> rows{ 2, 2, 0 };
  const auto sub = ds.subset(rows);
  CHECK(sub.size() == 3);
  CHECK(sub.time()(0) == 3.0);
  CHECK(sub.time()(2) == 1.0);
  CHECK(ds.event_count() == 2);
}

TEST_CASE("step function evaluation is right-continuous")
{
  const StepFunction f({ 1.0, 2.0 }, { 0.5, 0.25 }, 1.0);
  CHECK(f(0.5) == 1.0);
  CHECK(f(1.0) == 0.5);
  CHECK(f(1.999) == 0.5);
  CHECK(f(2.0) == 0.25);
  CHECK(f.jump_at(2.0) == doctest::Approx(-0.25));
  CHECK(f.jump_at(1.5) == 0.0);
  CHECK(f.is_survival());
  CHECK_FALSE(f.is_cumulative_hazard());
  CHECK_THROWS_AS(StepFunction({ 2.0, 1.0 }, { 0.5, 0.25 }, 1.0), InvalidInput);
}

TEST_CASE("kaplan_meier hand examples")
{
  const auto s1 = kaplan_meier(vec({ 1, 2, 3 }), ivec({ 1, 1, 1 }));
  CHECK(s1(0.5) == 1.0);
  CHECK(s1(1.0) == doctest::Approx(2.0 / 3));
  CHECK(s1(2.5) == doctest::Approx(1.0 / 3));
  CHECK(s1(3.0) == 0.0);

  const auto s2 = kaplan_meier(vec({ 1, 2, 3 }), ivec({ 1, 0, 1 }));
  CHECK(s2(1.0) == doctest::Approx(2.0 / 3));
  CHECK(s2(2.5) == doctest::Approx(2.0 / 3));
  CHECK(s2(3.0) == 0.0);
  CHECK(s2.jump_times().size() == 2);

  CHECK_THROWS_AS(kaplan_meier(vec({ 1 }), ivec({ 0 })), InvalidInput);
}

TEST_CASE("kaplan_meier matches the direct product on random data with ties")
{
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto data = random_censored(rng, 40, rep % 2 == 0);
    const auto km = kaplan_meier(data.y, data.d);
    CHECK(km.is_survival());
    CHECK(km.initial_value() == 1.0);
    for (double t : km.jump_times()) {
      bool is_event = false;
      for (Eigen::Index i = 0; i < data.y.size(); ++i)
        is_event |= data.y(i) == t && data.d(i) == 1;
      CHECK(is_event);
    }
    for (Eigen::Index i = 0; i < data.y.size(); ++i)
      CHECK(km(data.y(i)) == doctest::Approx(oracle::kaplan_meier_at(data.y, data.d, data.y(i))).epsilon(1e-13));
  }
}

TEST_CASE("epanechnikov kernel values, symmetry and mass")
{
  CHECK(epanechnikov(0.0) == 0.75);
  CHECK(epanechnikov(1.0) == 0.0);
  CHECK(epanechnikov(-0.5) == 0.5625);
  CHECK(epanechnikov(1.5) == 0.0);

  for (const auto& k : { Kernel::epanechnikov(), Kernel::epanechnikov_unit_variance() }) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 10000; ++i) {
      const double v = u(rng);
      REQUIRE(k(v) == k(-v));
      if (std::abs(v) > k.support_radius())
        REQUIRE(k(v) == 0.0);
    }
    // Composite Simpson over the support.
    const int m = 20000;
    const double r = k.support_radius(), h = 2 * r / m;
    double integral = k(-r) + k(r);
    for (int i = 1; i < m; ++i)
      integral += (i % 2 ? 4 : 2) * k(-r + i * h);
    integral *= h / 3;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
  // Unit variance of the rescaled kernel.
  const auto k = Kernel::epanechnikov_unit_variance();
  const int m = 20000;
  const double r = k.support_radius(), h = 2 * r / m;
  double second = 0;
  for (int i = 0; i <= m; ++i) {
    const double u = -r + i * h;
    second += (i == 0 || i == m ? 1 : (i % 2 ? 4 : 2)) * u * u * k(u);
  }
  CHECK(second * h / 3 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("beran three-subject hand example")
{
  // Weights at u = 0, b = 0.6: k(0) = 3/4, k(0.5/0.6) = 11/48, k(1/0.6) = 0.
  // t = 1: 1 - (3/4) / (3/4 + 11/48) = 11/47; t = 2: 1 - 1 = 0.
  const auto s = beran_survival(vec({ 0, 0.5, 1 }), vec({ 1, 2, 3 }), ivec({ 1, 1, 0 }), 0.0, 0.6);
  CHECK(s(0.9) == 1.0);
  CHECK(s(1.0) == doctest::Approx(11.0 / 47).epsilon(1e-14));
  CHECK(s(1.9) == doctest::Approx(11.0 / 47).epsilon(1e-14));
  CHECK(s(2.0) == 0.0);
  CHECK(s(3.5) == 0.0);
}

TEST_CASE("beran with constant index equals kaplan_meier")
{
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto data = random_censored(rng, 60, rep % 3 == 0);
    const Eigen::VectorXd index = Eigen::VectorXd::Constant(60, 0.3);
    const auto km = kaplan_meier(data.y, data.d);
    const auto br = beran_survival(index, data.y, data.d, 0.3, 0.1);
    double worst = 0;
    for (Eigen::Index i = 0; i < data.y.size(); ++i)
      worst = std::max(worst, std::abs(km(data.y(i)) - br(data.y(i))));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("beran matches the direct weighted product and stays a survival function")
{
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = random_censored(rng, 50, rep % 2 == 1);
    Eigen::VectorXd index(50);
    for (auto& v : index)
      v = nd(rng);
    for (double u : { -1.0, 0.0, 0.7 }) {
      for (double b : { 0.5, 1.0, 3.0 }) {
        StepFunction s;
        try {
          s = beran_survival(index, data.y, data.d, u, b);
        } catch (const DegenerateNeighborhood&) {
          continue;
        }
        CHECK(s.is_survival());
        for (Eigen::Index i = 0; i < 50; ++i)
          CHECK(s(data.y(i)) == doctest::Approx(oracle::beran_at(index, data.y, data.d, u, b, data.y(i))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("beran degenerate window")
{
  CHECK_THROWS_AS(beran_survival(vec({ 0, 1, 2 }), vec({ 1, 2, 3 }), ivec({ 1, 1, 0 }), 50.0, 1e-9),
                  DegenerateNeighborhood);
}

TEST_CASE("nonparametric cure probability examples")
{
  const Eigen::VectorXd flat3 = Eigen::VectorXd::Zero(3);
  CHECK(nonparametric_cure_prob(flat3, vec({ 1, 2, 3 }), ivec({ 1, 1, 1 }), 0.0, 1.0) == 0.0);
  const Eigen::VectorXd flat4 = Eigen::VectorXd::Zero(4);
  CHECK(nonparametric_cure_prob(flat4, vec({ 1, 2, 3, 4 }), ivec({ 1, 1, 0, 0 }), 0.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(nonparametric_cure_prob(flat4, vec({ 1, 2, 3, 4 }), ivec({ 1, 0, 0, 0 }), 0.0, 1.0) ==
        doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("cure probability is invariant to affine index maps with rescaled bandwidth")
{
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  const auto data = random_censored(rng, 80);
  Eigen::VectorXd index(80);
  for (auto& v : index)
    v = nd(rng);
  const double a = 2.5, c = -4.0;
  const Eigen::VectorXd moved = (a * index.array() + c).matrix();
  for (Eigen::Index i = 0; i < 80; i += 7) {
    const double p1 = nonparametric_cure_prob(index, data.y, data.d, index(i), 0.8);
    const double p2 = nonparametric_cure_prob(moved, data.y, data.d, moved(i), 0.8 * a);
    CHECK(std::abs(p1 - p2) < 1e-12);
  }
}

TEST_CASE("cv bandwidth: singleton grid, tie rule, failure")
{
  std::mt19937_64 rng(1);
  const auto data = random_censored(rng, 30);
  Eigen::VectorXd index(30);
  for (Eigen::Index i = 0; i < 30; ++i)
    index(i) = static_cast<double>(i) / 29.0;
  CHECK(cv_bandwidth(index, data.y, data.d, { 0.37 }) == 0.37);

  // A constant index makes every bandwidth score the same.
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(30, 1.0);
  CHECK(cv_score(flat, data.y, data.d, 0.5) == cv_score(flat, data.y, data.d, 2.0));
  CHECK(cv_bandwidth(flat, data.y, data.d, { 2.0, 0.5, 1.0 }) == 0.5);

  // Points spaced 1 apart with b = 0.5: every leave-one-out window is empty.
  Eigen::VectorXd spread(30);
  for (Eigen::Index i = 0; i < 30; ++i)
    spread(i) = static_cast<double>(i);
  CHECK(std::isinf(cv_score(spread, data.y, data.d, 0.5)));
  CHECK_THROWS_AS(cv_bandwidth(spread, data.y, data.d, { 0.5, 0.9 }), BandwidthSelectionFailed);
}

TEST_CASE("cv bandwidth prefers heavy smoothing when the index carries no information")
{
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0, 1);
  int upper = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const auto data = random_censored(rng, 100);
    Eigen::VectorXd index(100);
    for (auto& v : index)
      v = unif(rng);
    const double range = index.maxCoeff() - index.minCoeff();
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k)
      grid.push_back(0.1 * range * k);
    const double b = cv_bandwidth(index, data.y, data.d, grid);
    upper += b > grid[9];
  }
  MESSAGE("upper-half selections: " << upper << " / " << reps);
  CHECK(upper >= 80);
}

TEST_CASE("default bandwidth grid")
{
  Eigen::VectorXd index(50);
  for (Eigen::Index i = 0; i < 50; ++i)
    index(i) = std::sin(static_cast<double>(i));
  const auto grid = default_bandwidth_grid(index);
  REQUIRE(grid.size() == 30);
  CHECK(grid.back() == doctest::Approx(index.maxCoeff() - index.minCoeff()));
  for (std::size_t k = 1; k < grid.size(); ++k)
    CHECK(grid[k] > grid[k - 1]);
  const double sd = std::sqrt((index.array() - index.mean()).square().sum() / 49.0);
  CHECK(grid.front() == doctest::Approx(0.05 * sd * std::pow(50.0, -0.2)).epsilon(1e-12));
}
