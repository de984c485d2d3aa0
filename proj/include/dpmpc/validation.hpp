#pragma once

#include <cstdint>
#include <vector>

#include "dpmpc/mechanisms.hpp"
#include "json.hpp"

namespace dpmpc {

class SupportMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Histogram {
  GridSpec spec;
  std::vector<uint64_t> counts;
  uint64_t total = 0;

  explicit Histogram(const GridSpec& g) : spec(g), counts(g.count(), 0) {}
  void add(double y) { add_steps(to_steps(y, spec.p())); }
  void add_steps(int64_t k) {
    ++counts[spec.index_of_steps(k)];
    ++total;
  }
  void merge(const Histogram& o);
  std::vector<long double> frequencies() const;
  nlohmann::json to_json() const;
};

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
  int bins = 0;  // after merging
};

struct FitReport {
  double tv = 0;
  ChiSquare chi2;
  double max_rel_dev = 0;
  nlohmann::json to_json() const;
};

// 1/2 sum |p_i - q_i| over equal-length vectors.
long double tv_distance(const std::vector<long double>& p, const std::vector<long double>& q);
long double tv_distance(const Histogram& h, const std::vector<long double>& masses);
// Supports must coincide.
long double tv_distance(const Histogram& h, const ExactPmf& f);
// Supports at the same precision are padded to their union.
long double tv_distance_padded(const Histogram& h, const ExactPmf& f);

// Pearson chi-square against expected probabilities; adjacent bins are merged
// left to right until each expected count reaches min_expected.
ChiSquare chi_square(const std::vector<uint64_t>& counts, const std::vector<long double>& probs,
                     double min_expected = 5.0);
// p-value of a statistic with the given degrees of freedom.
double chi_square_sf(double statistic, int dof);

FitReport fit_report(const Histogram& h, const std::vector<long double>& masses);

// max over bins with both counts >= min_count of (c1/N1)/(c2/N2).
long double empirical_privacy_ratio(const Histogram& h1, const Histogram& h2, uint64_t min_count);

Moments empirical_moments(const Histogram& h, double x);

// Expected empirical TV of an exact sampler with N draws (normal approximation
// of each |count/N - m|).
long double expected_sampling_tv(const std::vector<long double>& masses, uint64_t N);

}  // namespace dpmpc
