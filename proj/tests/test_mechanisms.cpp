#include <cmath>

#include "doctest.h"
#include "dpmpc/mechanisms.hpp"
#include "oracles.hpp"

using namespace dpmpc;

namespace {

std::vector<double> inputs(double E, int p) {
  GridSpec g(p, E, false);
  std::vector<double> xs;
  for (int64_t i = 0; i < g.count(); ++i) xs.push_back(g.value_of(i));
  return xs;
}

long double rel(long double a, long double b) { return std::fabs(a - b) / std::fabs(b); }

// Summation over A_{p,L+E} of the TDL kernel.
long double tdl_sum(double x, const MechanismParams& m) {
  GridSpec g(m.p, m.E + m.L, false);
  long double s = 0;
  for (int64_t i = 0; i < g.count(); ++i) s += oracle::kernel(g.value_of(i), x, m.L, m.sigma);
  return s;
}

}  // namespace

TEST_CASE("continuous normalizer") {
  long double lam = lambda_lap(64, 32, 8);
  CHECK(std::fabs(lam - 18.05135L) < 1e-5);
  for (double x : {0.0, 40.0})
    CHECK(rel(oracle::kernel_integral(-96, 96, x, 32, 8), lam) < 1e-12);
  CHECK(rel(lambda_lap(3, 5, 3), 6) < 1e-15);
  CHECK(rel(lambda_lap(7, 800, 8), 16) < 1e-9);
  CHECK_THROWS_AS(lambda_lap(0, 1, 1), DomainError);
  CHECK_THROWS_AS(lambda_lap(1, 1, -1), DomainError);
}

TEST_CASE("discrete normalizer") {
  MechanismParams m0(64, 32, 8, 0);
  long double lam = lambda_dlap(64, 32, 8, 0);
  CHECK(std::fabs(lam - 18.0901L) < 1e-4);
  for (double x : {-64.0, 0.0, 17.0}) CHECK(rel(tdl_sum(x, m0), lam) < 1e-12);
  CHECK(rel(lambda_dlap(64, 32, 1e6, 0), 193) < 1e-3);
  CHECK(rel(lambda_dlap(4, 2, 1e6, 2), 2 * 4 * 6 + 1) < 1e-3);
  MechanismParams m2(64, 32, 8, 2);
  CHECK(rel(tdl_sum(-13.25, m2), lambda_dlap(64, 32, 8, 2)) < 1e-12);
}

TEST_CASE("cumulative normalizer equals the continuous one") {
  CHECK(rel(lambda_clap(64, 32, 8), lambda_lap(64, 32, 8)) < 1e-15);
  // Sum of cell integrals over B_{p,96}.
  for (int p : {0, 2}) {
    GridSpec g(p, 96, true);
    long double s = 0;
    for (int64_t i = 0; i < g.count(); ++i)
      s += kernel_integral(g.value_of(i) - 5, g.value_of(i) - 5 + g.step(), 32, 8);
    CHECK(rel(s, lambda_clap(64, 32, 8)) < 1e-12);
  }
  CHECK(rel(lambda_clap(4, 400, 2), 4) < 1e-9);
}

TEST_CASE("kernel integral matches quadrature") {
  for (auto [u, v] : {std::pair{-10.0, 3.0}, {-1.5, -0.25}, {2.0, 40.0}, {-0.3, 0.7}})
    CHECK(rel(kernel_integral(u, v, 2, 1.5), oracle::kernel_integral(u, v, 0, 2, 1.5)) < 1e-12);
}

TEST_CASE("TDL mass structure") {
  MechanismParams m(64, 32, 8, 0);
  for (double x : {-64.0, -3.0, 0.0, 50.0}) {
    ExactPmf f = pmf_tdl(x, m);
    CHECK(f.spec.count() == 193);
    for (double y : {-96.0, 96.0, x + 32, x - 40})
      if (std::fabs(y) <= 96) CHECK(rel(f.mass_at(x) / f.mass_at(y), std::exp(4.0L)) < 1e-14);
  }
  // The mass table of the overlay configuration, by direct evaluation.
  MechanismParams m2(64, 32, 8, 2);
  ExactPmf f = pmf_tdl(-32, m2);
  CHECK(f.spec.count() == 769);
  long double lam = tdl_sum(-32, m2);
  for (int64_t i = 0; i < f.spec.count(); ++i)
    REQUIRE(rel(f.masses[i], oracle::kernel(f.value(i), -32, 32, 8) / lam) < 1e-13);
  CHECK_THROWS_AS(pmf_tdl(0.3, m), ParameterError);
  CHECK_THROWS_AS(pmf_tdl(65, m), RangeError);
}

TEST_CASE("TCL masses match quadrature cell by cell") {
  MechanismParams m(4, 2, 1, 0);
  ExactPmf f = pmf_tcl(0, m);
  CHECK(f.spec.count() == 12);
  CHECK(f.spec.half_open());
  long double lam = oracle::kernel_integral(-6, 6, 0, 2, 1);
  for (int64_t i = 0; i < f.spec.count(); ++i) {
    long double y = f.value(i);
    REQUIRE(std::fabs(f.masses[i] - oracle::kernel_integral(y, y + 1, 0, 2, 1) / lam) < 1e-12);
  }
}

TEST_CASE("TCL flank pairing") {
  for (int p : {0, 1, 2}) {
    MechanismParams m(4, 2, 1, p);
    const double h = pow2(-p);
    for (double x : inputs(4, p)) {
      ExactPmf f = pmf_tcl(x, m);
      for (int i = 1; i <= static_cast<int>(2 * pow2(p)); ++i)
        REQUIRE(rel(f.mass_at(x - i * h), f.mass_at(x + (i - 1) * h)) < 1e-12);
    }
  }
}

TEST_CASE("normalization over the parameter lattice") {
  for (double E : {2.0, 4.0, 64.0})
    for (double L : {1.0, 2.0, 32.0})
      for (double s : {0.5, 1.0, 8.0})
        for (int p : {0, 1, 2}) {
          MechanismParams m(E, L, s, p);
          std::vector<double> xs = inputs(E, p);
          const size_t stride = xs.size() > 40 ? 7 : 1;
          for (size_t k = 0; k < xs.size(); k += stride) {
            for (const ExactPmf& f : {pmf_tdl(xs[k], m), pmf_tcl(xs[k], m)}) {
              long double tot = 0;
              for (long double v : f.masses) {
                REQUIRE(v >= 0);
                tot += v;
              }
              REQUIRE(std::fabs(tot - 1) < 1e-12);
            }
          }
        }
}

TEST_CASE("normalizers do not depend on x") {
  for (double E : {2.0, 4.0})
    for (double L : {1.0, 2.0})
      for (double s : {0.5, 1.0, 8.0})
        for (int p : {0, 1, 2}) {
          MechanismParams m(E, L, s, p);
          for (double x : {-E, pow2(-p) * std::floor(E * pow2(p) / 3), E}) {
            CHECK(rel(tdl_sum(x, m), lambda_dlap(E, L, s, p)) < 1e-10);
            GridSpec g(p, E + L, true);
            long double c = 0;
            for (int64_t i = 0; i < g.count(); ++i)
              c += oracle::kernel_integral(g.value_of(i), g.value_of(i) + g.step(), x, L, s);
            CHECK(rel(c, lambda_clap(E, L, s)) < 1e-10);
          }
        }
}

TEST_CASE("epsilon-DP certificates by exhaustive scan") {
  for (int p : {0, 1})
    for (double eps : {0.25, 1.0, 3.0}) {
      MechanismParams m(4, 2, 2 / eps, p);
      long double best_d = 0, best_c = 0;
      std::vector<double> xs = inputs(4, p);
      std::vector<ExactPmf> fd, fc;
      for (double x : xs) {
        fd.push_back(pmf_tdl(x, m));
        fc.push_back(pmf_tcl(x, m));
      }
      for (size_t a = 0; a < xs.size(); ++a)
        for (size_t b = 0; b < xs.size(); ++b)
          for (size_t y = 0; y < fd[a].masses.size(); ++y) {
            best_d = std::max(best_d, fd[a].masses[y] / fd[b].masses[y]);
            if (y < fc[a].masses.size()) best_c = std::max(best_c, fc[a].masses[y] / fc[b].masses[y]);
          }
      CHECK(rel(best_d, std::exp(static_cast<long double>(eps))) < 1e-10);
      CHECK(best_c <= std::exp(static_cast<long double>(eps)) * (1 + 1e-10L));
      CHECK(rel(best_d, max_privacy_ratio(Mechanism::Tdl, m)) < 1e-10);
      CHECK(rel(best_c, max_privacy_ratio(Mechanism::Tcl, m)) < 1e-10);
    }
}

TEST_CASE("d_chi certificates by exhaustive scan") {
  for (int p : {0, 1, 2})
    for (double eps : {0.3, 1.0, 2.5})
      for (Mechanism mech : {Mechanism::Tdl, Mechanism::Tcl}) {
        CalibrationResult c = calibrate(eps, mech, Regime::DChi, 4, 2, p);
        MechanismParams m(4, 2, c.sigma, p);
        std::vector<double> xs = inputs(4, p);
        std::vector<ExactPmf> f;
        for (double x : xs) f.push_back(mech == Mechanism::Tdl ? pmf_tdl(x, m) : pmf_tcl(x, m));
        for (size_t a = 0; a < xs.size(); ++a)
          for (size_t b = 0; b < xs.size(); ++b) {
            long double bound = std::exp(static_cast<long double>(eps) * std::fabs(xs[a] - xs[b])) * (1 + 1e-12L);
            for (size_t y = 0; y < f[a].masses.size(); ++y) REQUIRE(f[a].masses[y] <= bound * f[b].masses[y]);
          }
      }
}

TEST_CASE("published accuracy predictions") {
  struct Cell { int p; double x, mean, mse; };
  const Cell cells[] = {{0, 0, 0.00, 670.66},    {0, -32, -25.75, 870.75}, {0, 64, 51.49, 1471.04},
                        {2, 0, 0.00, 664.86},    {2, -32, -25.76, 864.54}, {2, 64, 51.52, 1463.58}};
  for (const Cell& c : cells) {
    Moments mo = moments_tdl(c.x, MechanismParams(64, 32, 8, c.p));
    CHECK(std::fabs(static_cast<double>(mo.mean) - c.mean) <= 0.01);
    CHECK(std::fabs(static_cast<double>(mo.mse) - c.mse) <= 0.01);
  }
}

TEST_CASE("TDL and TCL moment formulas against exact summation") {
  for (double E : {2.0, 4.0, 64.0})
    for (double L : {1.0, 2.0, 32.0})
      for (double s : {0.5, 1.0, 8.0})
        for (int p : {0, 1, 2}) {
          MechanismParams m(E, L, s, p);
          for (double x : {-E, -E / 2, 0.0, pow2(-p), E}) {
            Moments fd = moments_tdl(x, m), od = pmf_moments(pmf_tdl(x, m), x);
            Moments fc = moments_tcl(x, m), oc = pmf_moments(pmf_tcl(x, m), x);
            if (std::fabs(od.mean) > 1e-9) REQUIRE(rel(fd.mean, od.mean) < 1e-9);
            else REQUIRE(std::fabs(fd.mean) < 1e-9);
            REQUIRE(rel(fd.mse, od.mse) < 1e-9);
            REQUIRE(std::fabs(fc.mean - oc.mean) < 1e-9 * std::max(1.0L, std::fabs(oc.mean)));
            REQUIRE(rel(fc.mse, oc.mse) < 1e-9);
          }
        }
}

TEST_CASE("TCL moments: offset and continuous limit") {
  for (int p : {0, 1, 3}) CHECK(std::fabs(moments_tcl(0, MechanismParams(4, 2, 1, p)).mean + pow2(-p) / 2) < 1e-15);
  Moments o = pmf_moments(pmf_tcl(1, MechanismParams(4, 2, 1, 0)), 1);
  Moments f = moments_tcl(1, MechanismParams(4, 2, 1, 0));
  CHECK(rel(f.mean, o.mean) < 1e-12);
  CHECK(rel(f.mse, o.mse) < 1e-12);
  MechanismParams fine(4, 2, 1, 20);
  CHECK(std::fabs(moments_tcl(3, fine).mean - moments_lap(3, fine).mean) < 1e-4);
}

TEST_CASE("continuous moments against quadrature") {
  auto quad = [](double x, double E, double L, double s) {
    long double lam = oracle::kernel_integral(-E - L, E + L, x, L, s);
    auto k = [&](long double y) { return oracle::kernel(y, x, L, s); };
    long double m1 = oracle::integrate([&](long double y) { return y * k(y); }, -E - L, E + L, {x - L, x, x + L});
    long double m2 = oracle::integrate([&](long double y) { return (y - x) * (y - x) * k(y); }, -E - L, E + L,
                                       {x - L, x, x + L});
    return Moments{m1 / lam, m2 / lam};
  };
  CHECK(std::fabs(moments_lap(0, MechanismParams(64, 32, 8, 0)).mean) < 1e-15);

  Moments o = quad(32, 64, 32, 8);
  LapMoments lm = moments_lap(32, MechanismParams(64, 32, 8, 0));
  CHECK(rel(lm.mean, o.mean) < 1e-12);
  CHECK(rel(lm.mse_exact, o.mse) < 1e-12);
  CHECK(std::fabs(lm.mse_exact - 862.2L) < 0.05);
  CHECK_FALSE(lm.bound_valid);

  // Inside the regime E / sigma < k*, the closed form bounds the exact value.
  int valid = 0;
  for (double E : {4.0, 8.0})
    for (double s : {4.0, 6.0, 8.0})
      for (double L : {2.0, 6.0, 8.0, 16.0}) {
        MechanismParams m(E, L, s, 0);
        for (double x : {-E, 0.0, E / 2, E}) {
          LapMoments r = moments_lap(x, m);
          Moments q = quad(x, E, L, s);
          REQUIRE(rel(r.mse_exact, q.mse) < 1e-12);
          if (std::fabs(q.mean) > 1e-12) REQUIRE(rel(r.mean, q.mean) < 1e-12);
          if (r.bound_valid) {
            ++valid;
            REQUIRE(r.mse_bound >= q.mse * (1 - 1e-12L));
          }
        }
      }
  CHECK(valid > 10);

  // Large epsilon: the mean approaches x.
  CHECK(std::fabs(moments_lap(2, MechanismParams(4, 50, 1, 0)).mean - 2) < 1e-9);
}

TEST_CASE("calibration") {
  CHECK(calibrate(4, Mechanism::Tdl, Regime::EpsilonDp, 64, 32, 0).sigma == 8);
  double s = calibrate(1.3, Mechanism::Tdl, Regime::EpsilonDp, 64, 64, 0).sigma;
  CHECK(s >= 49.2);
  CHECK(s <= 49.3);
  CHECK(calibrate(1, Mechanism::Tcl, Regime::DChi, 4, 2, 2).sigma == 2);
  CHECK(calibrate(100, Mechanism::Tcl, Regime::DChi, 4, 2, 2).sigma == 0.25);
  CHECK(calibrate(0.5, Mechanism::Tdl, Regime::DChi, 4, 2, 2).sigma == 2);
  CHECK_THROWS_AS(calibrate(0, Mechanism::Tdl, Regime::EpsilonDp, 4, 2, 0), DomainError);
  CHECK_THROWS_AS(calibrate(-1, Mechanism::Tcl, Regime::DChi, 4, 2, 0), DomainError);
  for (double eps : {0.1, 0.7, 1.3, 5.0})
    for (Mechanism mech : {Mechanism::Lap, Mechanism::Tdl, Mechanism::Tcl}) {
      CalibrationResult c = calibrate(eps, mech, Regime::EpsilonDp, 8, 4, 1);
      CHECK(c.sigma >= 4 / eps * (1 - 1e-15));
    }
  CalibrationResult lap = calibrate(1, Mechanism::Lap, Regime::EpsilonDp, 64, 32, 0);
  CHECK(lap.kstar > 1);
  CHECK(lap.kstar < 2);
  CHECK(std::fabs(lap.kstar_sigma - 64 / lap.kstar) < 1e-9);
}

TEST_CASE("k* root") {
  CHECK(std::fabs(find_kstar(1) - (std::cbrt(16.0) - 1)) < 1e-9);
  for (double eps : {0.01, 0.5, 1.0, 2.0, 10.0}) {
    double k = find_kstar(eps);
    CHECK(k > 1);
    CHECK(k < 2);
  }
}

TEST_CASE("privacy ratio closed form") {
  CHECK(rel(max_privacy_ratio(Mechanism::Tdl, MechanismParams(64, 32, 8, 0)), std::exp(4.0L)) < 1e-15);
  MechanismParams m(4, 2, 1, 0);
  long double best = 0;
  for (double a : inputs(4, 0))
    for (double b : inputs(4, 0)) {
      ExactPmf fa = pmf_tdl(a, m), fb = pmf_tdl(b, m);
      for (size_t y = 0; y < fa.masses.size(); ++y) best = std::max(best, fa.masses[y] / fb.masses[y]);
    }
  CHECK(rel(best, std::exp(2.0L)) < 1e-12);
}

TEST_CASE("mean squared error scales with sigma squared") {
  std::vector<long double> ratios;
  for (double s : {4.0, 8.0, 16.0, 32.0}) {
    MechanismParams m(s, s, s, 0);  // epsilon = 1, L = E
    long double worst = 0;
    for (double x : {-s, 0.0, s}) worst = std::max(worst, moments_tdl(x, m).mse);
    ratios.push_back(worst / (s * s));
  }
  for (long double r : ratios) {
    CHECK(r < 3);
    CHECK(rel(r, ratios.back()) < 0.1);
  }
}

TEST_CASE("parameters are validated") {
  CHECK_THROWS_AS(MechanismParams(4, 2.5, 1, 0), ParameterError);
  CHECK_NOTHROW(MechanismParams(4, 2.5, 1, 1));
  CHECK_THROWS_AS(MechanismParams(4, 2, 0, 0), DomainError);
  CHECK(parse_mechanism("tcl") == Mechanism::Tcl);
  CHECK(parse_regime("dchi") == Regime::DChi);
  CHECK_THROWS_AS(parse_mechanism("gauss"), ParameterError);
}
