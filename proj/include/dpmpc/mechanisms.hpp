#pragma once

#include <string>
#include <vector>

#include "dpmpc/grid.hpp"

namespace dpmpc {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Mechanism { Lap, Tdl, Tcl };
enum class Regime { EpsilonDp, DChi };

Mechanism parse_mechanism(const std::string& s);
Regime parse_regime(const std::string& s);
std::string to_string(Mechanism m);
std::string to_string(Regime r);

struct MechanismParams {
  double E = 0;
  double L = 0;
  double sigma = 0;
  int p = 0;

  MechanismParams() = default;
  MechanismParams(double E, double L, double sigma, int p);

  // Privacy budget for epsilon-DP, L / sigma.
  double epsilon() const { return L / sigma; }
  GridSpec input_grid() const { return GridSpec(p, E, false); }
};

struct ExactPmf {
  GridSpec spec;
  std::vector<long double> masses;
  long double lambda;
  double center;

  double value(int64_t i) const { return spec.value_of(i); }
  long double mass_at(double y) const { return masses[spec.index_of(y)]; }
  long double total() const;
};

struct Moments {
  long double mean;
  long double mse;
};

struct LapMoments {
  long double mean;
  // Closed-form bound from the accuracy proposition.
  long double mse_bound;
  // Exact E[(y-x)^2] of the truncated continuous mechanism.
  long double mse_exact;
  // Whether E/sigma lies below the k* root, the regime in which the bound holds.
  bool bound_valid;
};

struct CalibrationResult {
  double sigma;
  double kstar;
  Mechanism mechanism;
  Regime regime;
  double epsilon;
  // For the continuous mechanism: sigma = E / k* and L = epsilon * sigma.
  double kstar_sigma = 0;
  double kstar_L = 0;
};

// exp(v) with arguments below -700 flushed to 0.
long double safe_exp(long double v);

long double lambda_lap(double E, double L, double sigma);
long double lambda_dlap(double E, double L, double sigma, int p);
long double lambda_clap(double E, double L, double sigma);

// Normalizer of the centered discrete Laplace on [-L, L] ∩ 2^-p Z.
long double lambda_dlap_inner(double L, double sigma, int p);
// Normalizer of the centered cumulative Laplace on [-L, L) (integral of the kernel).
long double lambda_clap_inner(double L, double sigma);

// Integral of exp(-min(|r|, L)/sigma) over [u, v].
long double kernel_integral(long double u, long double v, double L, double sigma);

ExactPmf pmf_tdl(double x, const MechanismParams& prm);
ExactPmf pmf_tcl(double x, const MechanismParams& prm);
// Inner laws g^(D,L) on A_{p,L} and g^(C,L) on B_{p,L}.
ExactPmf pmf_dlap_centered(double L, double sigma, int p);
ExactPmf pmf_clap_centered(double L, double sigma, int p);

LapMoments moments_lap(double x, const MechanismParams& prm);
Moments moments_tdl(double x, const MechanismParams& prm);
Moments moments_tcl(double x, const MechanismParams& prm);
// Moments of an exact PMF by direct summation, E[y] and E[(y-x)^2].
Moments pmf_moments(const ExactPmf& f, double x);

CalibrationResult calibrate(double epsilon, Mechanism m, Regime r, double E, double L, int p);

// f(k) = k^3/3 + eps k^2 + eps^2 k - (eps^2 + 2 eps + 2).
long double kstar_poly(long double k, long double eps);
double find_kstar(double epsilon);

// Attained maximum of f_{x1}(y) / f_{x2}(y).
long double max_privacy_ratio(Mechanism m, const MechanismParams& prm);

}  // namespace dpmpc
