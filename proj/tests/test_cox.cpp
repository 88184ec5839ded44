#include "oracles.hpp"

#include "curemix/cox.hpp"
#include "curemix/errors.hpp"
#include "curemix/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace curemix;

namespace {

struct CoxData
{
  Eigen::VectorXd y;
  Eigen::VectorXi d;
  Eigen::MatrixXd z;
  Eigen::VectorXd w;
  Eigen::VectorXd o;
};

CoxData
random_cox(std::mt19937_64& rng, int n, int q)
{
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  CoxData c{ Eigen::VectorXd(n), Eigen::VectorXi(n), Eigen::MatrixXd(n, q), Eigen::VectorXd(n),
             Eigen::VectorXd(n) };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < q; ++j)
      c.z(i, j) = nd(rng);
    const double t = weibull_ph_draw(1.0, 1.2, 0.5 * c.z(i, 0), unif(rng));
    const double cens = 3.0 * unif(rng);
    c.y(i) = std::min(t, cens);
    c.d(i) = t <= cens ? 1 : 0;
    c.w(i) = unif(rng);
    c.o(i) = std::log(unif(rng));
  }
  c.d(0) = 1;
  return c;
}

} // namespace

TEST_CASE("partial likelihood value matches the explicit risk-set oracle")
{
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const auto c = random_cox(rng, 40, 3);
    const CoxPartialLikelihood lik(c.y, c.d, c.z, c.w, c.o);
    std::normal_distribution<double> nd;
    Eigen::VectorXd b(3);
    for (auto& v : b)
      v = nd(rng);
    CHECK(lik.value(b) == doctest::Approx(oracle::cox_log_partial(c.y, c.d, c.z, c.w, c.o, b)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient and Hessian agree with central differences")
{
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (int point = 0; point < 20; ++point) {
    const auto c = random_cox(rng, 50, 3);
    const CoxPartialLikelihood lik(c.y, c.d, c.z, c.w, c.o);
    Eigen::VectorXd b(3);
    for (auto& v : b)
      v = nd(rng);
    const auto der = lik.derivatives(b);
    const double h = 1e-6;
    Eigen::VectorXd fd(3);
    Eigen::MatrixXd fd_hess(3, 3);
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd up = b, dn = b;
      up(k) += h;
      dn(k) -= h;
      fd(k) = (lik.value(up) - lik.value(dn)) / (2 * h);
      fd_hess.col(k) = -(lik.derivatives(up).gradient - lik.derivatives(dn).gradient) / (2 * h);
    }
    const double rel = (der.gradient - fd).lpNorm<Eigen::Infinity>() /
                       std::max(1.0, der.gradient.lpNorm<Eigen::Infinity>());
    CHECK(rel < 1e-6);
    const double rel_h = (der.neg_hessian - fd_hess).lpNorm<Eigen::Infinity>() /
                         std::max(1.0, der.neg_hessian.lpNorm<Eigen::Infinity>());
    CHECK(rel_h < 1e-6);
  }
}

TEST_CASE("five-subject fit beats a brute-force grid")
{
  Eigen::VectorXd y(5), w = Eigen::VectorXd::Ones(5), o = Eigen::VectorXd::Zero(5);
  Eigen::VectorXi d(5);
  Eigen::MatrixXd z(5, 1);
  y << 1, 2, 3, 4, 5;
  d << 1, 1, 0, 1, 1;
  z << 0.5, -0.3, 1.2, 0.1, -1.0;
  const auto fit = fit_cox(y, d, z, w, o);
  CHECK(fit.converged);
  const double best = oracle::cox_log_partial(y, d, z, w, o, fit.beta);
  for (double b = -5; b <= 5; b += 0.01) {
    Eigen::VectorXd g(1);
    g << b;
    REQUIRE(best >= oracle::cox_log_partial(y, d, z, w, o, g) - 1e-12);
  }
  CHECK(fit.final_gradient_norm < 1e-8);
}

TEST_CASE("constant covariate gives beta = 0 and the weighted Nelson-Aalen baseline")
{
  Eigen::VectorXd y(6), w(6), o = Eigen::VectorXd::Zero(6);
  Eigen::VectorXi d(6);
  y << 1, 2, 2, 3, 4, 5;
  d << 1, 1, 0, 1, 0, 1;
  w << 1, 0.5, 1, 0.25, 1, 1;
  const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(6, 1, 2.0);
  const auto fit = fit_cox(y, d, z, w, o);
  CHECK(std::abs(fit.beta(0)) < 1e-12);
  // Nelson-Aalen with weights and exp(beta * 2) = 1:
  const double s = std::exp(0.0);
  const double l1 = 1.0 / (4.75 * s);
  const double l2 = l1 + 0.5 / (3.75 * s);
  const double l3 = l2 + 0.25 / (2.25 * s);
  const double l5 = l3 + 1.0 / (1.0 * s);
  const auto& L = fit.baseline_cum_hazard;
  CHECK(L(1.0) == doctest::Approx(l1).epsilon(1e-13));
  CHECK(L(2.0) == doctest::Approx(l2).epsilon(1e-13));
  CHECK(L(3.5) == doctest::Approx(l3).epsilon(1e-13));
  CHECK(L(5.0) == doctest::Approx(l5).epsilon(1e-13));
  CHECK(L.is_cumulative_hazard());
}

TEST_CASE("offset shift leaves the partial likelihood unchanged")
{
  std::mt19937_64 rng(4);
  const auto c = random_cox(rng, 60, 2);
  const CoxPartialLikelihood a(c.y, c.d, c.z, c.w, c.o);
  const CoxPartialLikelihood b(c.y, c.d, c.z, c.w, (c.o.array() + 3.7).matrix());
  Eigen::VectorXd beta(2);
  beta << 0.3, -0.8;
  CHECK(std::abs(a.value(beta) - b.value(beta)) < 1e-10);
}

TEST_CASE("doubling case weights leaves beta unchanged")
{
  std::mt19937_64 rng(6);
  const auto c = random_cox(rng, 80, 2);
  const auto f1 = fit_cox(c.y, c.d, c.z, c.w, c.o);
  const auto f2 = fit_cox(c.y, c.d, c.z, (2.0 * c.w).eval(), c.o);
  REQUIRE(f1.converged);
  CHECK((f1.beta - f2.beta).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("zero-weight subjects are dropped from risk sets")
{
  std::mt19937_64 rng(12);
  auto c = random_cox(rng, 40, 2);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(40);
  w(5) = 0.0;
  w(9) = 0.0;
  const auto full = fit_cox(c.y, c.d, c.z, w, Eigen::VectorXd::Zero(40));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < 40; ++i)
    if (i != 5 && i != 9)
      keep.push_back(i);
  Eigen::VectorXd y(38);
  Eigen::VectorXi d(38);
  Eigen::MatrixXd z(38, 2);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(keep[k]);
    y(static_cast<Eigen::Index>(k)) = c.y(i);
    d(static_cast<Eigen::Index>(k)) = c.d(i);
    z.row(static_cast<Eigen::Index>(k)) = c.z.row(i);
  }
  const auto reduced = fit_cox(y, d, z, Eigen::VectorXd::Ones(38), Eigen::VectorXd::Zero(38));
  CHECK((full.beta - reduced.beta).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("separation is flagged")
{
  // Later times have larger z: the likelihood increases without bound as beta -> -inf.
  Eigen::VectorXd y(6);
  Eigen::VectorXi d = Eigen::VectorXi::Ones(6);
  Eigen::MatrixXd z(6, 1);
  y << 1, 2, 3, 4, 5, 6;
  z << 0, 1, 2, 3, 4, 5;
  const auto fit = fit_cox(y, d, z, Eigen::VectorXd::Ones(6), Eigen::VectorXd::Zero(6));
  CHECK(fit.separation_warning);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("uncured survival with zero tail")
{
  const StepFunction L({ 1.0, 2.0 }, { std::log(2.0), 1.0 }, 0.0);
  CHECK(latency_survival(L, 0.0, 0.0) == 1.0);
  CHECK(latency_survival(L, 0.0, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(latency_survival(L, 0.0, 2.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(latency_survival(L, 0.0, 2.0001) == 0.0);
  CHECK(latency_survival(L, std::log(3.0), 1.5) == doctest::Approx(0.125));

  CoxFit fit;
  fit.beta = Eigen::VectorXd::Zero(1);
  fit.baseline_cum_hazard = L;
  CHECK(uncured_survival(fit, 1.2, Eigen::VectorXd::Ones(1)) == doctest::Approx(0.5));
  CHECK(uncured_survival(fit, 0.0, Eigen::VectorXd::Ones(1)) == 1.0);
  CHECK(uncured_survival(fit, 9.0, Eigen::VectorXd::Ones(1)) == 0.0);
}

TEST_CASE("consistency on Weibull proportional hazards latency")
{
  // Uncured-only subjects from the Model 1 latency, Model 1 censoring (rate 0.4, tau 17).
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(1e-12, 1.0);
  const int n = 500;
  Eigen::VectorXd y(n);
  Eigen::VectorXi d(n);
  Eigen::MatrixXd z(n, 2);
  for (int i = 0; i < n; ++i) {
    z(i, 0) = nd(rng);
    z(i, 1) = 2 * unif(rng) - 1;
    const double t = std::min(weibull_ph_draw(1.5, 0.75, 0.5 * z(i, 0) + 0.3 * z(i, 1), unif(rng)), 15.0);
    const double c = std::min(-std::log(unif(rng)) / 0.4, 17.0);
    y(i) = std::min(t, c);
    d(i) = t <= c ? 1 : 0;
  }
  const auto fit = fit_cox(y, d, z, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n));
  REQUIRE(fit.converged);
  const CoxPartialLikelihood lik(y, d, z, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n));
  const Eigen::MatrixXd cov = lik.derivatives(fit.beta).neg_hessian.inverse();
  CHECK(std::abs(fit.beta(0) - 0.5) < 3 * std::sqrt(cov(0, 0)));
  CHECK(std::abs(fit.beta(1) - 0.3) < 3 * std::sqrt(cov(1, 1)));
}

TEST_CASE("fit_cox input checks")
{
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  Eigen::VectorXi d(3);
  d << 1, 0, 0;
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(fit_cox(y, d, z, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(3)), InvalidInput);
  Eigen::VectorXd w(3);
  w << 0, 1, 1;
  CHECK_THROWS_AS(fit_cox(y, d, z, w, Eigen::VectorXd::Zero(3)), InvalidInput);
}

TEST_CASE("fit invariants on random data")
{
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int rep = 0; rep < 30; ++rep) {
    auto c = random_cox(rng, 70, 2);
    // Some zero weights, and ties on a coarse time grid.
    for (Eigen::Index i = 0; i < 70; ++i) {
      c.y(i) = std::ceil(c.y(i) * 5.0) / 5.0;
      if (i > 0 && unif(rng) < 0.1)
        c.w(i) = 0.0;
    }
    const auto fit = fit_cox(c.y, c.d, c.z, c.w, c.o);
    if (fit.converged)
      CHECK(fit.final_gradient_norm < 1e-8);
    const auto& L = fit.baseline_cum_hazard;
    CHECK(L.is_cumulative_hazard());
    std::vector<double> expected;
    for (Eigen::Index i = 0; i < 70; ++i)
      if (c.d(i) == 1 && c.w(i) > 0.0)
        expected.push_back(c.y(i));
    std::sort(expected.begin(), expected.end());
    expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
    CHECK(L.jump_times() == expected);
  }
}
