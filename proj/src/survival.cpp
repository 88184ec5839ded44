#include "curemix/survival.hpp"

#include "curemix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace curemix {

namespace {

void
check_sample(const Eigen::VectorXd& times, const Eigen::VectorXi& events)
{
  if (times.size() == 0)
    throw InvalidInput("sample is empty");
  if (events.size() != times.size())
    throw InvalidInput("times and events differ in length");
  if (events.sum() == 0)
    throw InvalidInput("sample has no observed event");
}

std::vector<std::size_t>
time_order(const Eigen::VectorXd& times)
{
  std::vector<std::size_t> order(static_cast<std::size_t>(times.size()));
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times(static_cast<Eigen::Index>(a)) < times(static_cast<Eigen::Index>(b));
  });
  return order;
}

} // namespace

StepFunction
kaplan_meier(const Dataset& dataset)
{
  return kaplan_meier(dataset.time(), dataset.event());
}

StepFunction
kaplan_meier(const Eigen::VectorXd& times, const Eigen::VectorXi& events)
{
  check_sample(times, events);
  const auto order = time_order(times);
  const std::size_t n = order.size();
  std::vector<double> jumps, values;
  double surv = 1.0;
  std::size_t k = 0;
  while (k < n) {
    const double t = times(static_cast<Eigen::Index>(order[k]));
    const std::size_t at_risk = n - k;
    std::size_t deaths = 0, end = k;
    while (end < n && times(static_cast<Eigen::Index>(order[end])) == t) {
      deaths += static_cast<std::size_t>(events(static_cast<Eigen::Index>(order[end])));
      ++end;
    }
    if (deaths > 0) {
      surv *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      jumps.push_back(t);
      values.push_back(surv);
    }
    k = end;
  }
  return StepFunction(std::move(jumps), std::move(values), 1.0);
}

ConditionalProductLimit::ConditionalProductLimit(Eigen::VectorXd index,
                                                 const Eigen::VectorXd& times,
                                                 const Eigen::VectorXi& events,
                                                 Kernel kernel)
  : index_(std::move(index))
  , kernel_(kernel)
{
  check_sample(times, events);
  if (index_.size() != times.size())
    throw InvalidInput("index and times differ in length");
  if (!index_.allFinite())
    throw InvalidInput("index values must be finite");
  const auto order = time_order(times);
  const std::size_t n = order.size();
  member_.reserve(n);
  member_event_.reserve(n);
  std::size_t k = 0;
  while (k < n) {
    const double t = times(static_cast<Eigen::Index>(order[k]));
    group_time_.push_back(t);
    group_begin_.push_back(member_.size());
    bool has_event = false;
    while (k < n && times(static_cast<Eigen::Index>(order[k])) == t) {
      const int e = events(static_cast<Eigen::Index>(order[k]));
      member_.push_back(order[k]);
      member_event_.push_back(e);
      has_event = has_event || e == 1;
      ++k;
    }
    group_has_event_.push_back(has_event);
    if (has_event)
      last_event_group_ = group_time_.size() - 1;
  }
  group_begin_.push_back(member_.size());
  group_weight_.resize(group_time_.size());
  event_weight_.resize(group_time_.size());
}

double
ConditionalProductLimit::last_event_time() const
{
  return group_time_[last_event_group_];
}

double
ConditionalProductLimit::accumulate(double u, double bandwidth) const
{
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw InvalidInput("bandwidth must be positive and finite");
  // Normalising constants cancel in the hazard ratios, so raw kernel
  // values are used as weights.
  double total = 0.0;
  for (std::size_t g = 0; g + 1 < group_begin_.size(); ++g) {
    double gw = 0.0, ew = 0.0;
    for (std::size_t m = group_begin_[g]; m < group_begin_[g + 1]; ++m) {
      const double w = kernel_((index_(static_cast<Eigen::Index>(member_[m])) - u) / bandwidth);
      gw += w;
      if (member_event_[m] == 1)
        ew += w;
    }
    group_weight_[g] = gw;
    event_weight_[g] = ew;
    total += gw;
  }
  if (!(total > 0.0))
    throw DegenerateNeighborhood("all kernel weights vanish at u = " + std::to_string(u) +
                                 " with bandwidth " + std::to_string(bandwidth));
  return total;
}

StepFunction
ConditionalProductLimit::survival(double u, double bandwidth) const
{
  accumulate(u, bandwidth);
  const std::size_t groups = group_time_.size();
  std::vector<double> risk(groups + 1, 0.0);
  for (std::size_t g = groups; g-- > 0;)
    risk[g] = risk[g + 1] + group_weight_[g];
  std::vector<double> jumps, values;
  double surv = 1.0;
  for (std::size_t g = 0; g < groups; ++g) {
    if (!group_has_event_[g])
      continue;
    if (risk[g] > 0.0)
      surv *= std::max(0.0, 1.0 - event_weight_[g] / risk[g]);
    jumps.push_back(group_time_[g]);
    values.push_back(surv);
  }
  return StepFunction(std::move(jumps), std::move(values), 1.0);
}

double
ConditionalProductLimit::cure_probability(double u, double bandwidth) const
{
  accumulate(u, bandwidth);
  double risk = 0.0;
  for (std::size_t g = group_time_.size(); g-- > last_event_group_ + 1;)
    risk += group_weight_[g];
  // Walk backwards accumulating the risk set, multiply forwards afterwards
  // so the product order matches survival().
  std::vector<double> factor;
  factor.reserve(last_event_group_ + 1);
  for (std::size_t g = last_event_group_ + 1; g-- > 0;) {
    risk += group_weight_[g];
    if (group_has_event_[g])
      factor.push_back(risk > 0.0 ? std::max(0.0, 1.0 - event_weight_[g] / risk) : 1.0);
  }
  double surv = 1.0;
  for (auto it = factor.rbegin(); it != factor.rend(); ++it)
    surv *= *it;
  return std::clamp(surv, 0.0, 1.0);
}

StepFunction
beran_survival(const Eigen::VectorXd& index_values,
               const Eigen::VectorXd& times,
               const Eigen::VectorXi& events,
               double u,
               double bandwidth,
               const Kernel& kernel)
{
  return ConditionalProductLimit(index_values, times, events, kernel).survival(u, bandwidth);
}

double
nonparametric_cure_prob(const Eigen::VectorXd& index_values,
                        const Eigen::VectorXd& times,
                        const Eigen::VectorXi& events,
                        double u,
                        double bandwidth,
                        const Kernel& kernel)
{
  return ConditionalProductLimit(index_values, times, events, kernel)
    .cure_probability(u, bandwidth);
}

namespace {

// Sample sorted by time with the distinct event times, shared by all grid
// evaluations of the CV criterion.
struct CvSample
{
  std::vector<double> index;
  std::vector<double> time;
  std::vector<double> event_times;
};

CvSample
make_cv_sample(const Eigen::VectorXd& index_values,
               const Eigen::VectorXd& times,
               const Eigen::VectorXi& events)
{
  check_sample(times, events);
  if (index_values.size() != times.size())
    throw InvalidInput("index and times differ in length");
  CvSample s;
  const auto order = time_order(times);
  for (std::size_t k : order) {
    const auto r = static_cast<Eigen::Index>(k);
    s.index.push_back(index_values(r));
    s.time.push_back(times(r));
    if (events(r) == 1 && (s.event_times.empty() || s.event_times.back() != times(r)))
      s.event_times.push_back(times(r));
  }
  return s;
}

double
cv_score_sorted(const CvSample& s, double bandwidth, const Kernel& kernel, std::vector<double>& w)
{
  const std::size_t n = s.time.size();
  const std::size_t m = s.event_times.size();
  w.resize(n);
  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = j == i ? 0.0 : kernel((s.index[j] - s.index[i]) / bandwidth);
      total += w[j];
    }
    if (!(total > 0.0))
      return std::numeric_limits<double>::infinity();
    double cum = 0.0;
    std::size_t j = 0;
    for (std::size_t e = 0; e < m; ++e) {
      const double t = s.event_times[e];
      while (j < n && s.time[j] <= t)
        cum += w[j++];
      const double d = (s.time[i] <= t ? 1.0 : 0.0) - cum / total;
      score += d * d;
    }
  }
  return score;
}

} // namespace

double
cv_score(const Eigen::VectorXd& index_values,
         const Eigen::VectorXd& times,
         const Eigen::VectorXi& events,
         double bandwidth,
         const Kernel& kernel)
{
  if (!(bandwidth > 0.0))
    throw InvalidInput("bandwidth must be positive");
  const auto sample = make_cv_sample(index_values, times, events);
  std::vector<double> w;
  return cv_score_sorted(sample, bandwidth, kernel, w);
}

double
cv_bandwidth(const Eigen::VectorXd& index_values,
             const Eigen::VectorXd& times,
             const Eigen::VectorXi& events,
             const std::vector<double>& grid,
             const Kernel& kernel)
{
  if (grid.empty())
    throw InvalidInput("bandwidth grid is empty");
  for (double b : grid)
    if (!(b > 0.0) || !std::isfinite(b))
      throw InvalidInput("bandwidth grid values must be positive and finite");
  const auto sample = make_cv_sample(index_values, times, events);
  std::vector<double> w;
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_score = std::numeric_limits<double>::infinity();
  for (double b : grid) {
    const double score = cv_score_sorted(sample, b, kernel, w);
    if (!std::isfinite(score))
      continue;
    if (score < best_score || (score == best_score && b < best)) {
      best = b;
      best_score = score;
    }
  }
  if (std::isnan(best))
    throw BandwidthSelectionFailed("every grid bandwidth leaves some subject with an empty "
                                   "leave-one-out kernel window");
  return best;
}

std::vector<double>
default_bandwidth_grid(const Eigen::VectorXd& index_values, std::size_t count)
{
  if (index_values.size() == 0)
    throw InvalidInput("index is empty");
  if (count == 0)
    throw InvalidInput("grid size must be positive");
  const double n = static_cast<double>(index_values.size());
  const double range = index_values.maxCoeff() - index_values.minCoeff();
  if (!(range > 0.0))
    return { 1.0 };
  const double mean = index_values.mean();
  const double sd =
    n > 1 ? std::sqrt((index_values.array() - mean).square().sum() / (n - 1.0)) : 0.0;
  const double lo = 0.05 * sd * std::pow(n, -0.2);
  if (!(lo > 0.0) || lo >= range || count == 1)
    return { range };
  std::vector<double> grid(count);
  const double step = std::log(range / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    grid[k] = lo * std::exp(step * static_cast<double>(k));
  grid.back() = range;
  return grid;
}

} // namespace curemix
