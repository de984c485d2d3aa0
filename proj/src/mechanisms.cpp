#include "dpmpc/mechanisms.hpp"

#include <algorithm>
#include <cmath>

namespace dpmpc {

Mechanism parse_mechanism(const std::string& s) {
  if (s == "lap") return Mechanism::Lap;
  if (s == "tdl") return Mechanism::Tdl;
  if (s == "tcl") return Mechanism::Tcl;
  throw ParameterError("unknown mechanism '" + s + "' (expected lap|tdl|tcl)");
}

Regime parse_regime(const std::string& s) {
  if (s == "eps-dp" || s == "epsilon-dp" || s == "dp") return Regime::EpsilonDp;
  if (s == "dchi" || s == "d_chi") return Regime::DChi;
  throw ParameterError("unknown regime '" + s + "' (expected eps-dp|dchi)");
}

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Lap: return "lap";
    case Mechanism::Tdl: return "tdl";
    case Mechanism::Tcl: return "tcl";
  }
  return "?";
}

std::string to_string(Regime r) { return r == Regime::EpsilonDp ? "eps-dp" : "dchi"; }

MechanismParams::MechanismParams(double E_, double L_, double sigma_, int p_)
    : E(E_), L(L_), sigma(sigma_), p(p_) {
  if (!(E > 0) || !(L > 0) || !(sigma > 0) || !std::isfinite(sigma))
    throw DomainError("E, L and sigma must be positive");
  if (p < 0 || p > 40) throw DomainError("precision p must lie in [0, 40]");
  if (!on_grid(E, p) || !on_grid(L, p)) throw ParameterError("E and L must be multiples of 2^-p");
}

long double ExactPmf::total() const {
  long double s = 0;
  for (long double m : masses) s += m;
  return s;
}

long double safe_exp(long double v) { return v < -700.0L ? 0.0L : std::exp(v); }

namespace {

void check_positive(double E, double L, double sigma) {
  if (!(E > 0) || !(L > 0) || !(sigma > 0)) throw DomainError("E, L and sigma must be positive");
}

struct Consts {
  long double a;    // e^{-L/sigma}
  long double h;    // 2^-p
  long double bm1;  // e^{h/sigma} - 1
  long double b;
  long double P;    // 2^p
};

Consts consts(double L, double sigma, int p) {
  Consts c;
  c.a = safe_exp(-static_cast<long double>(L) / sigma);
  c.h = std::ldexp(1.0L, -p);
  c.bm1 = std::expm1(c.h / sigma);
  c.b = 1 + c.bm1;
  c.P = std::ldexp(1.0L, p);
  return c;
}

}  // namespace

long double lambda_lap(double E, double L, double sigma) {
  check_positive(E, L, sigma);
  long double a = safe_exp(-static_cast<long double>(L) / sigma);
  return 2 * (sigma + (static_cast<long double>(E) - sigma) * a);
}

long double lambda_dlap(double E, double L, double sigma, int p) {
  check_positive(E, L, sigma);
  Consts c = consts(L, sigma, p);
  return 2 * c.P * E * c.a + lambda_dlap_inner(L, sigma, p);
}

long double lambda_dlap_inner(double L, double sigma, int p) {
  if (!(L > 0) || !(sigma > 0)) throw DomainError("L and sigma must be positive");
  Consts c = consts(L, sigma, p);
  return 1 + 2 * (1 - c.a) / c.bm1;
}

long double lambda_clap(double E, double L, double sigma) {
  check_positive(E, L, sigma);
  long double a = safe_exp(-static_cast<long double>(L) / sigma);
  return 2 * (-sigma * std::expm1(-static_cast<long double>(L) / sigma) + a * E);
}

long double lambda_clap_inner(double L, double sigma) {
  if (!(L > 0) || !(sigma > 0)) throw DomainError("L and sigma must be positive");
  return -2 * sigma * std::expm1(-static_cast<long double>(L) / sigma);
}

namespace {

// Antiderivative of exp(-min(|r|, L)/sigma), odd, zero at the origin.
long double kernel_F(long double t, double L, double sigma) {
  long double at = std::fabs(t);
  long double v;
  if (at <= L) {
    v = -sigma * std::expm1(-at / sigma);
  } else {
    v = -sigma * std::expm1(-static_cast<long double>(L) / sigma) +
        (at - L) * safe_exp(-static_cast<long double>(L) / sigma);
  }
  return t < 0 ? -v : v;
}

void check_input(double x, const MechanismParams& prm) {
  if (!on_grid(x, prm.p)) throw ParameterError("input x must lie on the 2^-p grid");
  if (std::fabs(x) > prm.E) throw RangeError("input x must lie in [-E, E]");
}

}  // namespace

long double kernel_integral(long double u, long double v, double L, double sigma) {
  return kernel_F(v, L, sigma) - kernel_F(u, L, sigma);
}

ExactPmf pmf_tdl(double x, const MechanismParams& prm) {
  check_input(x, prm);
  GridSpec g(prm.p, prm.E + prm.L, false);
  long double lam = lambda_dlap(prm.E, prm.L, prm.sigma, prm.p);
  int64_t xs = to_steps(x, prm.p);
  int64_t Ls = to_steps(prm.L, prm.p);
  long double h = std::ldexp(1.0L, -prm.p);
  std::vector<long double> m(g.count());
  for (int64_t i = 0; i < g.count(); ++i) {
    int64_t d = std::min<int64_t>(std::llabs(g.steps_of(i) - xs), Ls);
    m[i] = safe_exp(-(d * h) / prm.sigma) / lam;
  }
  return ExactPmf{g, std::move(m), lam, x};
}

ExactPmf pmf_tcl(double x, const MechanismParams& prm) {
  check_input(x, prm);
  GridSpec g(prm.p, prm.E + prm.L, true);
  long double lam = lambda_clap(prm.E, prm.L, prm.sigma);
  int64_t xs = to_steps(x, prm.p);
  long double h = std::ldexp(1.0L, -prm.p);
  std::vector<long double> m(g.count());
  for (int64_t i = 0; i < g.count(); ++i) {
    long double u = (g.steps_of(i) - xs) * h;
    m[i] = kernel_integral(u, u + h, prm.L, prm.sigma) / lam;
  }
  return ExactPmf{g, std::move(m), lam, x};
}

ExactPmf pmf_dlap_centered(double L, double sigma, int p) {
  GridSpec g(p, L, false);
  long double lam = lambda_dlap_inner(L, sigma, p);
  long double h = std::ldexp(1.0L, -p);
  std::vector<long double> m(g.count());
  for (int64_t i = 0; i < g.count(); ++i) m[i] = safe_exp(-(std::llabs(g.steps_of(i)) * h) / sigma) / lam;
  return ExactPmf{g, std::move(m), lam, 0.0};
}

ExactPmf pmf_clap_centered(double L, double sigma, int p) {
  GridSpec g(p, L, true);
  long double lam = lambda_clap_inner(L, sigma);
  long double h = std::ldexp(1.0L, -p);
  std::vector<long double> m(g.count());
  for (int64_t i = 0; i < g.count(); ++i) {
    long double u = g.steps_of(i) * h;
    m[i] = kernel_integral(u, u + h, L, sigma) / lam;
  }
  return ExactPmf{g, std::move(m), lam, 0.0};
}

LapMoments moments_lap(double x, const MechanismParams& prm) {
  if (std::fabs(x) > prm.E) throw RangeError("input x must lie in [-E, E]");
  const long double s = prm.sigma, E = prm.E, L = prm.L, X = x;
  const long double eps = L / s;
  const long double a = safe_exp(-eps);
  const long double den = 1 - (1 - E / s) * a;
  LapMoments r;
  r.mean = X * (1 - (1 + eps) * a) / den;
  r.mse_bound = (2 * s * s + X * X * a * (eps + E / s)) / den;
  // Inner part: 2 int_0^L u^2 e^{-u/s} du; outer tails contribute a (y-x)^2 over |y-x| > L.
  const long double inner = 4 * s * s * s - 2 * a * (s * L * L + 2 * s * s * L + 2 * s * s * s);
  const long double outer = a * (2 * std::pow(E + L, 3.0L) + 6 * (E + L) * X * X - 2 * L * L * L) / 3;
  r.mse_exact = (inner + outer) / lambda_lap(prm.E, prm.L, prm.sigma);
  r.bound_valid = kstar_poly(E / s, eps) < 0;
  return r;
}

Moments moments_tdl(double x, const MechanismParams& prm) {
  check_input(x, prm);
  Consts c = consts(prm.L, prm.sigma, prm.p);
  const long double a = c.a, b = c.b, bm1 = c.bm1, h = c.h, P = c.P;
  const long double E = prm.E, L = prm.L, X = x;
  Moments m;
  m.mean = X * ((1 - a) * (1 + b) - 2 * a * P * L * bm1) / ((1 - a) * (b + 1) + a * bm1 * (1 + 2 * P * E));
  const long double D = (1 - a) * (1 + b) / bm1 + a * (1 + 2 * P * E);
  const long double t1 = X * X * a * (1 + 2 * P * (E + L)) / D;
  const long double t2 = a * (2 * P * (L * L * E + L * E * E + E * E * E / 3) + (E * E + 2 * L * E - 2 * L * L / bm1)) / D;
  const long double t3 = a * h * (E / 3 - 4 * L * b / (bm1 * bm1)) / D;
  const long double t4 = 2 * h * h * (1 - a) * (b * b + b) / (bm1 * bm1 * bm1) / D;
  m.mse = t1 + t2 + t3 + t4;
  return m;
}

Moments moments_tcl(double x, const MechanismParams& prm) {
  check_input(x, prm);
  Consts c = consts(prm.L, prm.sigma, prm.p);
  const long double a = c.a, b = c.b, bm1 = c.bm1, h = c.h;
  const long double E = prm.E, L = prm.L, s = prm.sigma, X = x;
  const long double oma = -std::expm1(-L / s);
  const long double den = s * oma + a * E;
  Moments m;
  m.mean = X * (s * oma - a * L) / den - h / 2;
  const long double C = a * (2 * L * L * E + 2 * E * E * L + 2 * E * E * E / 3 + h * h * E / 3) - 2 * s * L * L * a -
                        2 * s * h * L * a * (b + 1) / bm1 + s * h * h * oma * (b + 1) * (b + 1) / (bm1 * bm1);
  m.mse = (X * X + h * X) * a * (E + L) / den + C / (2 * den);
  return m;
}

Moments pmf_moments(const ExactPmf& f, double x) {
  long double mean = 0, mse = 0;
  for (int64_t i = 0; i < f.spec.count(); ++i) {
    long double y = f.spec.value_of(i);
    mean += y * f.masses[i];
    mse += (y - x) * (y - x) * f.masses[i];
  }
  return {mean, mse};
}

long double kstar_poly(long double k, long double eps) {
  return k * k * k / 3 + eps * k * k + eps * eps * k - (eps * eps + 2 * eps + 2);
}

double find_kstar(double epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  long double lo = 1, hi = 2;
  while (hi - lo > 1e-10L) {
    long double mid = (lo + hi) / 2;
    if (kstar_poly(mid, epsilon) < 0) lo = mid; else hi = mid;
  }
  return static_cast<double>((lo + hi) / 2);
}

CalibrationResult calibrate(double epsilon, Mechanism m, Regime r, double E, double L, int p) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  CalibrationResult c{0, 0, m, r, epsilon};
  if (r == Regime::EpsilonDp) {
    if (!(L > 0)) throw DomainError("L must be positive");
    c.sigma = L / epsilon;
    if (m == Mechanism::Lap) {
      c.kstar = find_kstar(epsilon);
      if (E > 0) {
        c.kstar_sigma = E / c.kstar;
        c.kstar_L = epsilon * c.kstar_sigma;
      }
    }
    return c;
  }
  switch (m) {
    case Mechanism::Tdl: c.sigma = 1 / epsilon; break;
    case Mechanism::Tcl: c.sigma = std::max(2 / epsilon, std::ldexp(1.0, -p)); break;
    case Mechanism::Lap: throw DomainError("d_chi calibration is defined for tdl and tcl only");
  }
  return c;
}

long double max_privacy_ratio(Mechanism m, const MechanismParams& prm) {
  const long double r = std::exp(static_cast<long double>(prm.L) / prm.sigma);
  if (m != Mechanism::Tcl) return r;
  const long double h = std::ldexp(1.0L, -prm.p);
  return r * (-prm.sigma * std::expm1(-h / prm.sigma)) / h;
}

}  // namespace dpmpc
