#include "dpmpc/validation.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>

namespace dpmpc {

void Histogram::merge(const Histogram& o) {
  if (!(spec == o.spec)) throw SupportMismatch("histograms over different grids");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  total += o.total;
}

std::vector<long double> Histogram::frequencies() const {
  std::vector<long double> f(counts.size(), 0.0L);
  if (total == 0) return f;
  for (size_t i = 0; i < counts.size(); ++i) f[i] = static_cast<long double>(counts[i]) / total;
  return f;
}

nlohmann::json Histogram::to_json() const {
  nlohmann::json bins = nlohmann::json::array();
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i]) bins.push_back({{"bin", spec.value_of(static_cast<int64_t>(i))}, {"count", counts[i]}});
  return {{"grid", {{"p", spec.p()}, {"B", spec.bound()}, {"half_open", spec.half_open()}}},
          {"total", total},
          {"bins", bins}};
}

nlohmann::json FitReport::to_json() const {
  return {{"tv", tv},
          {"chi2", {{"statistic", chi2.statistic}, {"dof", chi2.dof}, {"p_value", chi2.p_value}, {"bins", chi2.bins}}},
          {"max_rel_dev", max_rel_dev}};
}

long double tv_distance(const std::vector<long double>& p, const std::vector<long double>& q) {
  if (p.size() != q.size()) throw SupportMismatch("distributions of different length");
  long double s = 0;
  for (size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return s / 2;
}

long double tv_distance(const Histogram& h, const std::vector<long double>& masses) {
  return tv_distance(h.frequencies(), masses);
}

long double tv_distance(const Histogram& h, const ExactPmf& f) {
  if (!(h.spec == f.spec)) throw SupportMismatch("histogram and PMF supports differ");
  return tv_distance(h.frequencies(), f.masses);
}

long double tv_distance_padded(const Histogram& h, const ExactPmf& f) {
  if (h.spec.p() != f.spec.p()) throw SupportMismatch("supports at different precisions");
  auto top = [](const GridSpec& g) { return g.half_open() ? g.bound_steps() - 1 : g.bound_steps(); };
  const int64_t lo = std::min(-h.spec.bound_steps(), -f.spec.bound_steps());
  const int64_t hi = std::max(top(h.spec), top(f.spec));
  std::vector<long double> fh = h.frequencies();
  long double s = 0;
  for (int64_t k = lo; k <= hi; ++k) {
    long double a = 0, b = 0;
    if (k >= -h.spec.bound_steps() && k <= top(h.spec)) a = fh[h.spec.index_of_steps(k)];
    if (k >= -f.spec.bound_steps() && k <= top(f.spec)) b = f.masses[f.spec.index_of_steps(k)];
    s += std::fabs(a - b);
  }
  return s / 2;
}

double chi_square_sf(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared_distribution<double> d(dof);
  return boost::math::cdf(boost::math::complement(d, std::max(0.0, statistic)));
}

ChiSquare chi_square(const std::vector<uint64_t>& counts, const std::vector<long double>& probs, double min_expected) {
  if (counts.size() != probs.size()) throw SupportMismatch("counts and probabilities differ in length");
  long double N = 0;
  for (uint64_t c : counts) N += c;
  std::vector<long double> obs, exp;
  long double co = 0, ce = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    co += counts[i];
    ce += probs[i] * N;
    if (ce >= min_expected) {
      obs.push_back(co);
      exp.push_back(ce);
      co = ce = 0;
    }
  }
  if (ce > 0 || co > 0) {
    if (exp.empty()) {
      obs.push_back(co);
      exp.push_back(ce);
    } else {
      obs.back() += co;
      exp.back() += ce;
    }
  }
  ChiSquare r;
  r.bins = static_cast<int>(exp.size());
  long double stat = 0;
  for (size_t i = 0; i < exp.size(); ++i) {
    if (exp[i] > 0) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    else if (obs[i] > 0) stat = INFINITY;
  }
  r.statistic = static_cast<double>(stat);
  r.dof = r.bins - 1;
  r.p_value = std::isfinite(r.statistic) ? chi_square_sf(r.statistic, r.dof) : 0.0;
  return r;
}

FitReport fit_report(const Histogram& h, const std::vector<long double>& masses) {
  FitReport r;
  r.tv = static_cast<double>(tv_distance(h, masses));
  r.chi2 = chi_square(h.counts, masses);
  std::vector<long double> f = h.frequencies();
  for (size_t i = 0; i < f.size(); ++i)
    if (masses[i] > 0) r.max_rel_dev = std::max(r.max_rel_dev, static_cast<double>(std::fabs(f[i] / masses[i] - 1)));
  return r;
}

long double empirical_privacy_ratio(const Histogram& h1, const Histogram& h2, uint64_t min_count) {
  if (!(h1.spec == h2.spec)) throw SupportMismatch("histograms over different grids");
  long double best = -1;
  for (size_t i = 0; i < h1.counts.size(); ++i) {
    if (h1.counts[i] < min_count || h2.counts[i] < min_count) continue;
    long double r = (static_cast<long double>(h1.counts[i]) / h1.total) / (static_cast<long double>(h2.counts[i]) / h2.total);
    best = std::max(best, r);
  }
  if (best < 0) throw std::runtime_error("no bins qualify for the privacy ratio");
  return best;
}

Moments empirical_moments(const Histogram& h, double x) {
  long double mean = 0, mse = 0;
  for (size_t i = 0; i < h.counts.size(); ++i) {
    if (!h.counts[i]) continue;
    long double y = h.spec.value_of(static_cast<int64_t>(i));
    mean += y * h.counts[i];
    mse += (y - x) * (y - x) * h.counts[i];
  }
  return {mean / h.total, mse / h.total};
}

long double expected_sampling_tv(const std::vector<long double>& masses, uint64_t N) {
  long double s = 0;
  for (long double m : masses) s += std::sqrt(2 * m * (1 - m) / (std::numbers::pi_v<long double> * N));
  return s / 2;
}

}  // namespace dpmpc
