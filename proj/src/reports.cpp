#include "dpmpc/reports.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dpmpc/acceptance_config.hpp"

namespace dpmpc {

namespace acc = acceptance;

Histogram sample_histogram(const NoisePlan& plan, double x, uint64_t N, uint64_t seed) {
  Histogram h(plan.output_grid());
  RandomTape tape(seed);
  const int64_t xs = to_steps(x, plan.params.p);
  for (uint64_t j = 0; j < N; ++j) {
    NoisePair pr = noise(plan, tape);
    h.add_steps(plan.mechanism == Mechanism::Tdl ? perturb_d_steps(xs, pr, plan.params)
                                                 : perturb_c_steps(xs, pr, plan.params));
  }
  return h;
}

std::vector<AccuracyCell> accuracy_cells() {
  // sigma = 8, E = 64, L = 32.
  std::vector<AccuracyCell> cells = {
      {0, 0.0, 0.00, 670.66},  {0, -32.0, -25.75, 870.75}, {0, 64.0, 51.49, 1471.04},
      {2, 0.0, 0.00, 664.86},  {2, -32.0, -25.76, 864.54}, {2, 64.0, 51.52, 1463.58},
  };
  for (AccuracyCell& c : cells) c.theory = moments_tdl(c.x, MechanismParams(64, 32, 8, c.p));
  return cells;
}

void accuracy_fill_empirical(std::vector<AccuracyCell>& cells, uint64_t N, uint64_t seed) {
  for (size_t k = 0; k < cells.size(); ++k) {
    MechanismParams prm(64, 32, 8, cells[k].p);
    NoisePlan plan = NoisePlan::make(Mechanism::Tdl, prm);
    Histogram h = sample_histogram(plan, cells[k].x, N, derive_seed(seed, 100 + k));
    cells[k].empirical = empirical_moments(h, cells[k].x);
    cells[k].has_empirical = true;
  }
}

nlohmann::json accuracy_json(const std::vector<AccuracyCell>& cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const AccuracyCell& c : cells) {
    nlohmann::json j = {{"sigma", 8}, {"E", 64}, {"L", 32}, {"p", c.p}, {"x", c.x},
                        {"published_mean", c.published_mean}, {"published_mse", c.published_mse},
                        {"theory_mean", static_cast<double>(c.theory.mean)},
                        {"theory_mse", static_cast<double>(c.theory.mse)}};
    if (c.has_empirical) {
      j["empirical_mean"] = static_cast<double>(c.empirical.mean);
      j["empirical_mse"] = static_cast<double>(c.empirical.mse);
    }
    out.push_back(j);
  }
  return out;
}

OverlaySeries overlay_series(const MechanismParams& prm, double x, uint64_t N, uint64_t seed) {
  NoisePlan plan = NoisePlan::make(Mechanism::Tdl, prm);
  ExactPmf f = pmf_tdl(x, prm);
  Histogram h = sample_histogram(plan, x, N, seed);
  OverlaySeries s{x, f, h, tv_distance(h, f), expected_sampling_tv(f.masses, N), chi_square(h.counts, f.masses)};
  return s;
}

void write_overlay_csv(std::ostream& os, const OverlaySeries& s) {
  os << "y,theoretical,empirical\n";
  os << std::setprecision(12);
  std::vector<long double> fr = s.hist.frequencies();
  for (int64_t i = 0; i < s.pmf.spec.count(); ++i)
    os << s.pmf.spec.value_of(i) << ',' << static_cast<double>(s.pmf.masses[i]) << ',' << static_cast<double>(fr[i]) << '\n';
}

size_t pair_index(const ProtocolSetup& setup, const NoisePair& pair) {
  if (pair.branch == 0) return static_cast<size_t>(pair.payload);
  return static_cast<size_t>(setup.plan.M + pair.payload + setup.L_steps());
}

std::vector<long double> pair_law(const ProtocolSetup& setup) {
  const size_t n = setup.plan.M + 2 * setup.L_steps() + (setup.plan.mechanism == Mechanism::Tdl ? 1 : 0);
  std::vector<long double> law(n, 0.0L);
  for (const NoiseOutcome& o : noise_law(setup.plan)) law[pair_index(setup, o.pair)] += o.prob;
  return law;
}

nlohmann::json MpcBatch::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (size_t k = 0; k < xs.size(); ++k) outs.push_back({{"x", xs[k]}, {"histogram", outputs[k].to_json()}});
  return {{"mechanism", to_string(setup.plan.mechanism)},
          {"params", {{"E", setup.plan.params.E}, {"L", setup.plan.params.L}, {"sigma", setup.plan.params.sigma}, {"p", setup.plan.params.p}}},
          {"gamma", setup.plan.gamma},
          {"q", std::to_string(setup.field.q)},
          {"sessions", sessions},
          {"outputs", outs},
          {"ledger",
           {{"noise_total", noise_total.to_json()},
            {"perturb_total", perturb_total.to_json()},
            {"perturb_per_call", perturb_first.to_json()},
            {"perturb_cost_constant", perturb_cost_constant},
            {"offline_taint_violations", offline_taint_violations}}}};
}

MpcBatch run_mpc_batch(const ProtocolSetup& setup, const std::vector<double>& xs, uint64_t N, uint64_t seed,
                       const std::function<void(uint64_t)>& progress) {
  MpcBatch b;
  b.setup = setup;
  b.xs = xs;
  for (size_t k = 0; k < xs.size(); ++k) b.outputs.emplace_back(setup.plan.output_grid());
  b.pair_counts.assign(pair_law(setup).size(), 0);
  bool first = true;
  for (uint64_t i = 0; i < N; ++i) {
    mpc::Session s(setup.field, session_seed(seed, i, 0), session_seed(seed, i, 1));
    SharedNoisePair pair = pi_noise(s, setup);
    b.noise_total += s.ledger();
    for (size_t k = 0; k < xs.size(); ++k) {
      mpc::Shared xsh = share_input(s, xs[k], setup);
      mpc::CostLedger before = s.ledger();
      mpc::Shared z = pi_perturb(s, xsh, pair, setup);
      mpc::CostLedger delta = s.ledger() - before;
      b.perturb_total += delta;
      if (first) {
        b.perturb_first = delta;
        first = false;
      } else if (!(delta == b.perturb_first)) {
        b.perturb_cost_constant = false;
      }
      b.outputs[k].add(open_output(s, z, setup));
    }
    ++b.pair_counts[pair_index(setup, open_pair(s, pair))];
    b.offline_taint_violations += s.offline_taint_violations();
    ++b.sessions;
    if (progress && (i + 1) % 50000 == 0) progress(i + 1);
  }
  return b;
}

nlohmann::json Equivalence::to_json() const {
  return {{"sessions", sessions},
          {"noise_mismatches", noise_mismatches},
          {"perturb_mismatches", perturb_mismatches},
          {"inner_mismatches", inner_mismatches},
          {"inner_rejections", inner_rejections}};
}

Equivalence check_equivalence(const ProtocolSetup& setup, const std::vector<double>& xs, uint64_t N, uint64_t seed) {
  Equivalence eq;
  const NoisePlan& plan = setup.plan;
  for (uint64_t i = 0; i < N; ++i) {
    const uint64_t s0 = session_seed(seed, i, 0), s1 = session_seed(seed, i, 1);
    {
      mpc::Session s(setup.field, s0, s1);
      SharedNoisePair pair = pi_noise(s, setup);
      std::vector<double> zs;
      for (double x : xs) zs.push_back(open_output(s, pi_perturb(s, share_input(s, x, setup), pair, setup), setup));
      NoisePair opened = open_pair(s, pair);

      RandomTape a(s0, 1), b(s1, 1);
      XorSource src(a, b);
      NoisePair ref = noise(plan, src);
      if (ref.branch != opened.branch || ref.payload != opened.payload) ++eq.noise_mismatches;
      for (size_t k = 0; k < xs.size(); ++k)
        if (perturb(plan, xs[k], ref) != zs[k]) ++eq.perturb_mismatches;
    }
    {
      // The inner sampler on its own.
      const uint64_t t0 = session_seed(seed ^ 0x5bd1e995ull, i, 0), t1 = session_seed(seed ^ 0x5bd1e995ull, i, 1);
      mpc::Session s(setup.field, t0, t1);
      RandomTape a(t0, 1), b(t1, 1);
      XorSource src(a, b);
      int64_t got, want;
      if (plan.mechanism == Mechanism::Tdl) {
        got = s.open_balanced(pi_dl(s, plan.dl));
        want = sample_dlap_centered_steps(plan.dl, src);
      } else {
        int rej = 0;
        got = s.open_balanced(pi_cl(s, plan.cl, &rej));
        want = sample_clap_centered_steps(plan.cl, src);
        eq.inner_rejections += rej;
      }
      if (got != want) ++eq.inner_mismatches;
    }
    ++eq.sessions;
  }
  return eq;
}

std::string format_criterion(const CriterionResult& r) {
  return std::string(r.pass ? "[PASS] " : "[FAIL] ") + r.name + ": " + r.detail;
}

namespace {

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::vector<double> grid_values(double E, int p) {
  GridSpec g(p, E, false);
  std::vector<double> xs;
  for (int64_t i = 0; i < g.count(); ++i) xs.push_back(g.value_of(i));
  return xs;
}

CriterionResult accuracy_theoretical() {
  std::vector<AccuracyCell> cells = accuracy_cells();
  bool ok = true;
  double worst = 0, worst_oracle = 0;
  for (const AccuracyCell& c : cells) {
    double dm = std::fabs(static_cast<double>(c.theory.mean) - c.published_mean);
    double dx = std::fabs(static_cast<double>(c.theory.mse) - c.published_mse);
    worst = std::max({worst, dm, dx});
    ok = ok && dm <= acc::kAccuracyTheoryAbsTol && dx <= acc::kAccuracyTheoryAbsTol;
    Moments o = pmf_moments(pmf_tdl(c.x, MechanismParams(64, 32, 8, c.p)), c.x);
    worst_oracle = std::max(worst_oracle, static_cast<double>(std::fabs(o.mse - c.theory.mse) / o.mse));
  }
  return {"ACCURACY_THEORETICAL", ok,
          "12 cells, max |formula - published| = " + fmt(worst, 3) + " (tol " + fmt(acc::kAccuracyTheoryAbsTol) +
              "); max rel. deviation from exact summation = " + fmt(worst_oracle, 3),
          accuracy_json(cells)};
}

CriterionResult accuracy_empirical(const AcceptanceOptions& opt) {
  std::vector<AccuracyCell> cells = accuracy_cells();
  const uint64_t N = opt.quick ? acc::kAccuracyDraws / 10 : acc::kAccuracyDraws;
  accuracy_fill_empirical(cells, N, opt.seed);
  bool ok = true;
  double worst_mean = 0, worst_mse = 0;
  for (const AccuracyCell& c : cells) {
    double dm = std::fabs(static_cast<double>(c.empirical.mean - c.theory.mean));
    double dr = std::fabs(static_cast<double>(c.empirical.mse / c.theory.mse - 1));
    worst_mean = std::max(worst_mean, dm);
    worst_mse = std::max(worst_mse, dr);
    ok = ok && dm <= acc::kAccuracyMeanAbsTol && dr <= acc::kAccuracyMseRelTol;
  }
  return {"ACCURACY_EMPIRICAL", ok,
          std::to_string(N) + " draws/cell, max |mean dev| = " + fmt(worst_mean, 3) + " (tol " +
              fmt(acc::kAccuracyMeanAbsTol) + "), max MSE rel. dev = " + fmt(100 * worst_mse, 3) + "% (tol " +
              fmt(100 * acc::kAccuracyMseRelTol) + "%)",
          accuracy_json(cells)};
}

CriterionResult overlay(const AcceptanceOptions& opt) {
  const uint64_t N = opt.quick ? acc::kOverlayDraws / 10 : acc::kOverlayDraws;
  MechanismParams prm(64, 32, 8, 2);
  bool ok = true;
  std::string detail;
  nlohmann::json data = nlohmann::json::array();
  int k = 0;
  for (double x : {64.0, -32.0}) {
    OverlaySeries s = overlay_series(prm, x, N, derive_seed(opt.seed, 200 + k++));
    ok = ok && s.tv < acc::kOverlayMaxTv;
    detail += (detail.empty() ? "" : "; ") + std::string("x=") + fmt(x) + ": TV " + fmt(static_cast<double>(s.tv), 3) +
              " (exact-sampler expectation " + fmt(static_cast<double>(s.expected_tv), 3) + ", chi2 p " +
              fmt(s.chi2.p_value, 3) + ")";
    data.push_back({{"x", x}, {"tv", static_cast<double>(s.tv)}, {"expected_tv", static_cast<double>(s.expected_tv)},
                    {"chi2_p", s.chi2.p_value}, {"draws", N}, {"support", s.pmf.spec.count()}});
    if (!opt.out_dir.empty()) {
      std::ofstream f(opt.out_dir + "/overlay_x" + fmt(x) + ".csv");
      write_overlay_csv(f, s);
    }
  }
  detail += "; limit TV < " + fmt(acc::kOverlayMaxTv) + " over 769 points at " + std::to_string(N) + " draws";
  return {"DISTRIBUTION_OVERLAY", ok, detail, data};
}

CriterionResult calibration() {
  CalibrationResult c = calibrate(1.3, Mechanism::Tdl, Regime::EpsilonDp, 64, 64, 0);
  bool ok = c.sigma >= acc::kCalibrationLo && c.sigma <= acc::kCalibrationHi;
  return {"CALIBRATION_SIGMA", ok,
          "sigma = " + fmt(c.sigma, 6) + " for eps=1.3, L=64 (range [" + fmt(acc::kCalibrationLo) + ", " +
              fmt(acc::kCalibrationHi) + "])",
          {{"sigma", c.sigma}}};
}

struct RatioScan {
  long double max_ratio = 0;
  long double worst_dchi = 0;  // max of ratio / e^{eps |x1 - x2|}
};

RatioScan scan(Mechanism m, const MechanismParams& prm, double eps_dchi) {
  std::vector<double> xs = grid_values(prm.E, prm.p);
  std::vector<ExactPmf> f;
  for (double x : xs) f.push_back(m == Mechanism::Tdl ? pmf_tdl(x, prm) : pmf_tcl(x, prm));
  RatioScan r;
  for (size_t a = 0; a < xs.size(); ++a)
    for (size_t b = 0; b < xs.size(); ++b)
      for (size_t y = 0; y < f[a].masses.size(); ++y) {
        long double ratio = f[a].masses[y] / f[b].masses[y];
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (eps_dchi > 0)
          r.worst_dchi = std::max(r.worst_dchi, ratio / std::exp(static_cast<long double>(eps_dchi) * std::fabs(xs[a] - xs[b])));
      }
  return r;
}

CriterionResult certificates() {
  bool ok = true;
  long double worst_tdl = 0, worst_tcl_excess = 0, worst_tcl_closed = 0, worst_dchi = 0;
  int scans = 0;
  for (int p : {0, 1}) {
    for (double eps : {0.5, 1.0, 2.0, 4.0}) {
      MechanismParams prm(4, 2, 2 / eps, p);
      long double e = std::exp(static_cast<long double>(eps));
      RatioScan d = scan(Mechanism::Tdl, prm, 0);
      RatioScan c = scan(Mechanism::Tcl, prm, 0);
      worst_tdl = std::max(worst_tdl, std::fabs(d.max_ratio / e - 1));
      worst_tcl_excess = std::max(worst_tcl_excess, c.max_ratio / e - 1);
      worst_tcl_closed = std::max(worst_tcl_closed, std::fabs(c.max_ratio / max_privacy_ratio(Mechanism::Tcl, prm) - 1));
      scans += 2;
      // d_chi calibrations.
      MechanismParams pd(4, 2, calibrate(eps, Mechanism::Tdl, Regime::DChi, 4, 2, p).sigma, p);
      MechanismParams pc(4, 2, calibrate(eps, Mechanism::Tcl, Regime::DChi, 4, 2, p).sigma, p);
      worst_dchi = std::max({worst_dchi, scan(Mechanism::Tdl, pd, eps).worst_dchi, scan(Mechanism::Tcl, pc, eps).worst_dchi});
      scans += 2;
    }
  }
  ok = worst_tdl <= acc::kCertificateTol && worst_tcl_excess <= acc::kCertificateTol &&
       worst_tcl_closed <= acc::kCertificateTol && worst_dchi <= 1 + acc::kCertificateTol;
  return {"PRIVACY_CERTIFICATES", ok,
          std::to_string(scans) + " exhaustive scans on E=4, L=2, p in {0,1}: TDL |max/e^eps - 1| = " +
              fmt(static_cast<double>(worst_tdl), 3) + ", TCL max/e^eps - 1 = " +
              fmt(static_cast<double>(worst_tcl_excess), 3) + " (closed-form gap " +
              fmt(static_cast<double>(worst_tcl_closed), 3) + "), d_chi worst ratio/bound = " +
              fmt(static_cast<double>(worst_dchi), 12),
          {}};
}

CriterionResult inner_sampler_exact() {
  struct Inst { double L, sigma; int p; };
  const Inst insts[] = {{1, 1, 0}, {2, 1, 0}, {2, 0.5, 1}, {4, 2, 1}, {8, 3, 1}, {16, 8, 1}, {16, 5, 2}, {64, 8, 0}, {32, 0.7, 1}};
  long double worst = 0;
  std::string kappas;
  for (const Inst& in : insts) {
    DlapPlan plan = DlapPlan::make(in.L, in.sigma, in.p);
    std::vector<long double> law = dlap_outcome_law(plan);
    ExactPmf f = pmf_dlap_centered(in.L, in.sigma, in.p);
    for (size_t i = 0; i < law.size(); ++i) worst = std::max(worst, std::fabs(law[i] - f.masses[i]));
    kappas += (kappas.empty() ? "" : ",") + std::to_string(plan.kappa());
  }
  return {"INNER_SAMPLER_EXACT", worst <= acc::kPointwiseTol,
          "enumeration vs centered discrete Laplace, kappa in {" + kappas + "}: max pointwise gap " +
              fmt(static_cast<double>(worst), 3) + " (tol " + fmt(acc::kPointwiseTol) + ")",
          {}};
}

CriterionResult composite() {
  struct Inst { double E, L, sigma; int p; };
  const Inst insts[] = {{4, 2, 1, 0}, {4, 2, 1, 1}, {8, 4, 2, 1}, {2, 1, 0.5, 2}, {4, 3, 1.5, 0}};
  long double worst_d = 0, worst_c = 0, approx_c = 0;
  for (const Inst& in : insts) {
    MechanismParams prm(in.E, in.L, in.sigma, in.p);
    NoisePlan d = NoisePlan::make(Mechanism::Tdl, prm);
    NoisePlan c = NoisePlan::make(Mechanism::Tcl, prm, acc::kDefaultGamma, InnerMethod::Table);
    for (double x : grid_values(in.E, in.p)) {
      std::vector<long double> ld = composite_law(d, x), lc = composite_law(c, x);
      ExactPmf fd = pmf_tdl(x, prm), fc = pmf_tcl(x, prm);
      for (size_t i = 0; i < ld.size(); ++i) worst_d = std::max(worst_d, std::fabs(ld[i] - fd.masses[i]));
      for (size_t i = 0; i < lc.size(); ++i) worst_c = std::max(worst_c, std::fabs(lc[i] - fc.masses[i]));
      if (is_power_of_two_steps(in.L, in.p)) {
        NoisePlan cb = NoisePlan::make(Mechanism::Tcl, prm, acc::kDefaultGamma, InnerMethod::Bitwise);
        approx_c = std::max(approx_c, tv_distance(composite_law(cb, x), fc.masses));
      }
    }
  }
  bool ok = worst_d <= acc::kPointwiseTol && worst_c <= acc::kPointwiseTol;
  return {"COMPOSITE_LAW_EXACT", ok,
          "perturb(noise) enumeration vs exact PMF: TDL max gap " + fmt(static_cast<double>(worst_d), 3) +
              ", TCL (exact inner table) max gap " + fmt(static_cast<double>(worst_c), 3) + " (tol " +
              fmt(acc::kPointwiseTol) + "); TCL with gamma=" + std::to_string(acc::kDefaultGamma) +
              " fine-lattice inner sampler: exact TV " + fmt(static_cast<double>(approx_c), 3),
          {}};
}

struct MpcRuns {
  MpcBatch d, c;
};

CriterionResult mpc_equivalence(const AcceptanceOptions& opt, MpcRuns& runs) {
  MechanismParams prm(4, 2, 1, 0);
  ProtocolSetup sd = ProtocolSetup::make(Mechanism::Tdl, prm, acc::kDefaultGamma);
  ProtocolSetup sc = ProtocolSetup::make(Mechanism::Tcl, prm, acc::kDefaultGamma);
  std::vector<double> xs = grid_values(4, 0);
  const uint64_t neq = opt.quick ? acc::kEquivalenceSessions / 10 : acc::kEquivalenceSessions;
  Equivalence ed = check_equivalence(sd, xs, neq, derive_seed(opt.seed, 300));
  Equivalence ec = check_equivalence(sc, xs, neq, derive_seed(opt.seed, 301));
  const uint64_t nd = opt.quick ? acc::kMpcSessionsD / 20 : acc::kMpcSessionsD;
  const uint64_t nc = opt.quick ? acc::kMpcSessionsC / 20 : acc::kMpcSessionsC;
  if (opt.log) opt.log("running " + std::to_string(nd) + " TDL and " + std::to_string(nc) + " TCL sessions");
  runs.d = run_mpc_batch(sd, xs, nd, derive_seed(opt.seed, 310));
  runs.c = run_mpc_batch(sc, xs, nc, derive_seed(opt.seed, 311));
  long double tvd = 0, tvc = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    tvd = std::max(tvd, tv_distance(runs.d.outputs[k], pmf_tdl(xs[k], prm)));
    tvc = std::max(tvc, tv_distance(runs.c.outputs[k], pmf_tcl(xs[k], prm)));
  }
  auto pair_tv = [](const MpcBatch& b) {
    std::vector<long double> law = pair_law(b.setup);
    std::vector<long double> fr(law.size());
    for (size_t i = 0; i < law.size(); ++i) fr[i] = static_cast<long double>(b.pair_counts[i]) / b.sessions;
    return tv_distance(fr, law);
  };
  uint64_t mism = ed.noise_mismatches + ed.perturb_mismatches + ed.inner_mismatches + ec.noise_mismatches +
                  ec.perturb_mismatches + ec.inner_mismatches;
  bool ok = mism == 0 && tvd < acc::kMpcMaxTvD && tvc < acc::kMpcMaxTvC;
  std::string detail = "bit-for-bit: " + std::to_string(mism) + " mismatches over " + std::to_string(neq) +
                       " TDL + " + std::to_string(neq) + " TCL sessions (noise pair, 9 perturbed outputs, inner sampler); "
                       "free-randomness max TV over x in A_{0,4}: TDL " + fmt(static_cast<double>(tvd), 3) + " at " +
                       std::to_string(nd) + " sessions (limit " + fmt(acc::kMpcMaxTvD) + "), TCL " +
                       fmt(static_cast<double>(tvc), 3) + " at " + std::to_string(nc) + " sessions (limit " +
                       fmt(acc::kMpcMaxTvC) + "); noise-pair TV " + fmt(static_cast<double>(pair_tv(runs.d)), 3) +
                       " / " + fmt(static_cast<double>(pair_tv(runs.c)), 3);
  return {"MPC_ORACLE_EQUIVALENCE", ok, detail,
          {{"equivalence_tdl", ed.to_json()}, {"equivalence_tcl", ec.to_json()}, {"tv_tdl", static_cast<double>(tvd)},
           {"tv_tcl", static_cast<double>(tvc)}}};
}

CriterionResult offline_online(const AcceptanceOptions& opt, const MpcRuns& runs) {
  // Per-call online cost across parameter sets.
  struct Inst { double E, L, sigma; int p; };
  const Inst insts[] = {{4, 2, 1, 0}, {64, 32, 8, 0}, {64, 32, 8, 2}, {8, 4, 0.5, 1}, {2, 1, 3, 3}};
  bool independent = true;
  uint64_t cmp = runs.d.perturb_first.comparisons, mul = runs.d.perturb_first.multiplications;
  bool constant = runs.d.perturb_cost_constant && runs.c.perturb_cost_constant;
  for (const Inst& in : insts) {
    for (Mechanism m : {Mechanism::Tdl, Mechanism::Tcl}) {
      ProtocolSetup st = ProtocolSetup::make(m, MechanismParams(in.E, in.L, in.sigma, in.p), 4);
      mpc::Session s(st.field, derive_seed(opt.seed, 400), derive_seed(opt.seed, 401));
      SharedNoisePair pair = pi_noise(s, st);
      mpc::Shared x = share_input(s, in.E / 2, st);
      mpc::CostLedger before = s.ledger();
      pi_perturb(s, x, pair, st);
      mpc::CostLedger d = s.ledger() - before;
      if (d.comparisons != cmp || d.multiplications != mul) independent = false;
    }
  }
  // Transcript audit: [x] shared before the offline phase; noise outputs must not depend on it
  // and no offline message may derive from it.
  uint64_t violations = runs.d.offline_taint_violations + runs.c.offline_taint_violations;
  uint64_t diverging = 0;
  for (Mechanism m : {Mechanism::Tdl, Mechanism::Tcl}) {
    ProtocolSetup st = ProtocolSetup::make(m, MechanismParams(4, 2, 1, 0), acc::kDefaultGamma);
    for (uint64_t i = 0; i < 200; ++i) {
      NoisePair ref{};
      for (double x : {-4.0, 4.0}) {
        mpc::SessionOptions so;
        so.record_transcript = true;
        mpc::Session s(st.field, session_seed(opt.seed + 7, i, 0), session_seed(opt.seed + 7, i, 1), so);
        mpc::Shared xs = share_input(s, x, st);
        SharedNoisePair pair = pi_noise(s, st);
        for (int party = 0; party < 2; ++party)
          for (const mpc::Message& msg : s.view(party))
            if (msg.phase == mpc::Phase::Offline && msg.tainted) ++violations;
        pi_perturb(s, xs, pair, st);
        NoisePair o = open_pair(s, pair);
        if (x < 0) ref = o;
        else if (o.branch != ref.branch || o.payload != ref.payload) ++diverging;
      }
    }
  }
  bool count_ok = cmp == acc::kPerturbComparisons && mul == acc::kPerturbMultiplications;
  bool ok = count_ok && independent && constant && violations == 0 && diverging == 0;
  std::string detail = "perturb online cost = " + std::to_string(cmp) + " comparison + " + std::to_string(mul) +
                       " multiplication (required " + std::to_string(acc::kPerturbComparisons) + " + " +
                       std::to_string(acc::kPerturbMultiplications) + "); identical across " +
                       std::to_string(2 * std::size(insts)) + " parameter sets: " + (independent ? "yes" : "no") +
                       "; constant over all batch calls: " + (constant ? "yes" : "no") +
                       "; offline messages derived from [x]: " + std::to_string(violations) +
                       "; noise outputs depending on [x]: " + std::to_string(diverging);
  return {"OFFLINE_ONLINE_SPLIT", ok, detail,
          {{"perturb_per_call", runs.d.perturb_first.to_json()},
           {"noise_per_session_avg_tdl_multiplications",
            static_cast<double>(runs.d.noise_total.multiplications) / std::max<uint64_t>(1, runs.d.sessions)}}};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  auto log = [&](const std::string& s) {
    if (opt.log) opt.log(s);
  };
  if (!opt.out_dir.empty()) std::filesystem::create_directories(opt.out_dir);
  std::vector<CriterionResult> out;
  log("accuracy table (theoretical)");
  out.push_back(accuracy_theoretical());
  log("accuracy table (empirical)");
  out.push_back(accuracy_empirical(opt));
  log("distribution overlay");
  out.push_back(overlay(opt));
  out.push_back(calibration());
  log("privacy certificates");
  out.push_back(certificates());
  out.push_back(inner_sampler_exact());
  log("composite laws");
  out.push_back(composite());
  log("MPC equivalence and statistics");
  MpcRuns runs;
  out.push_back(mpc_equivalence(opt, runs));
  log("offline/online split");
  out.push_back(offline_online(opt, runs));
  if (!opt.out_dir.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const CriterionResult& r : out) j.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"data", r.data}});
    std::ofstream(opt.out_dir + "/acceptance.json") << j.dump(2) << '\n';
    std::ofstream(opt.out_dir + "/mpc_tdl_batch.json") << runs.d.to_json().dump(2) << '\n';
    std::ofstream(opt.out_dir + "/mpc_tcl_batch.json") << runs.c.to_json().dump(2) << '\n';
  }
  return out;
}

}  // namespace dpmpc
