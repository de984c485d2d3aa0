#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dpmpc/acceptance_config.hpp"
#include "dpmpc/reports.hpp"

using namespace dpmpc;
namespace acc = dpmpc::acceptance;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFailed = 2;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string mechanism = "tdl";
  std::optional<double> E, L, sigma, epsilon;
  std::optional<std::string> regime;
  int p = 0;
  std::vector<double> xs;
  uint64_t n = 0;
  uint64_t seed = acc::kSeed;
  int gamma = acc::kDefaultGamma;
  std::string out;
  std::string format = "json";

  Mechanism mech() const { return parse_mechanism(mechanism); }

  double require(const std::optional<double>& v, const char* flag) const {
    if (!v) throw UsageError(std::string("missing ") + flag);
    return *v;
  }

  // Exactly one of --sigma and (--epsilon, --regime).
  double resolve_sigma() const {
    if (sigma && (epsilon || regime)) throw UsageError("give either --sigma or --epsilon with --regime, not both");
    if (sigma) return *sigma;
    if (!epsilon) throw UsageError("missing --sigma or --epsilon with --regime");
    if (!regime) throw UsageError("--epsilon needs --regime (eps-dp|dchi)");
    return calibrate(*epsilon, mech(), parse_regime(*regime), E.value_or(0), require(L, "--L"), p).sigma;
  }

  MechanismParams params() const {
    return MechanismParams(require(E, "--E"), require(L, "--L"), resolve_sigma(), p);
  }

  double single_x() const {
    if (xs.size() != 1) throw UsageError("expected exactly one --x");
    return xs.front();
  }
};

// Shortest round-trip form.
std::string num(long double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<double>(v));
  return std::string(buf, end);
}

nlohmann::json params_json(const MechanismParams& prm) {
  return {{"E", prm.E}, {"L", prm.L}, {"sigma", prm.sigma}, {"p", prm.p}};
}

void require_discrete(Mechanism m) {
  if (m == Mechanism::Lap) throw UsageError("this subcommand supports --mechanism tdl|tcl");
}

int cmd_calibrate(const RunConfig& c, std::ostream& os) {
  if (c.sigma) throw UsageError("calibrate takes --epsilon and --regime, not --sigma");
  if (!c.epsilon || !c.regime) throw UsageError("calibrate needs --epsilon and --regime");
  CalibrationResult r = calibrate(*c.epsilon, c.mech(), parse_regime(*c.regime), c.E.value_or(0), c.require(c.L, "--L"), c.p);
  if (c.format == "csv") {
    os << "mechanism,regime,epsilon,sigma,kstar\n";
    os << to_string(r.mechanism) << ',' << to_string(r.regime) << ',' << num(r.epsilon) << ',' << num(r.sigma) << ','
       << num(r.kstar) << '\n';
    return 0;
  }
  nlohmann::json j = {{"mechanism", to_string(r.mechanism)}, {"regime", to_string(r.regime)},
                      {"epsilon", r.epsilon},                 {"sigma", r.sigma}};
  if (r.kstar > 0) j["kstar"] = {{"k", r.kstar}, {"sigma", r.kstar_sigma}, {"L", r.kstar_L}};
  os << j.dump(2) << '\n';
  return 0;
}

int cmd_pmf(const RunConfig& c, std::ostream& os) {
  require_discrete(c.mech());
  MechanismParams prm = c.params();
  const double x = c.single_x();
  ExactPmf f = c.mech() == Mechanism::Tdl ? pmf_tdl(x, prm) : pmf_tcl(x, prm);
  if (c.format == "csv") {
    os << "y,mass\n";
    for (size_t i = 0; i < f.masses.size(); ++i) os << num(f.value(i)) << ',' << num(f.masses[i]) << '\n';
    return 0;
  }
  nlohmann::json ys = nlohmann::json::array(), ms = nlohmann::json::array();
  for (size_t i = 0; i < f.masses.size(); ++i) {
    ys.push_back(f.value(i));
    ms.push_back(static_cast<double>(f.masses[i]));
  }
  os << nlohmann::json{{"mechanism", c.mechanism}, {"params", params_json(prm)}, {"x", x},
                       {"lambda", static_cast<double>(f.lambda)}, {"y", ys}, {"mass", ms}}.dump(2)
     << '\n';
  return 0;
}

int cmd_moments(const RunConfig& c, std::ostream& os) {
  MechanismParams prm = c.params();
  if (c.xs.empty()) throw UsageError("moments needs at least one --x");
  const Mechanism m = c.mech();
  nlohmann::json rows = nlohmann::json::array();
  if (c.format == "csv") os << "x,mean,mse\n";
  for (double x : c.xs) {
    long double mean, mse;
    if (m == Mechanism::Lap) {
      LapMoments lm = moments_lap(x, prm);
      mean = lm.mean;
      mse = lm.mse_exact;
      rows.push_back({{"x", x}, {"mean", static_cast<double>(mean)}, {"mse", static_cast<double>(mse)},
                      {"mse_bound", static_cast<double>(lm.mse_bound)}, {"bound_valid", lm.bound_valid}});
    } else {
      Moments mo = m == Mechanism::Tdl ? moments_tdl(x, prm) : moments_tcl(x, prm);
      mean = mo.mean;
      mse = mo.mse;
      rows.push_back({{"x", x}, {"mean", static_cast<double>(mean)}, {"mse", static_cast<double>(mse)}});
    }
    if (c.format == "csv") os << num(x) << ',' << num(mean) << ',' << num(mse) << '\n';
  }
  if (c.format == "json")
    os << nlohmann::json{{"mechanism", c.mechanism}, {"params", params_json(prm)}, {"moments", rows}}.dump(2) << '\n';
  return 0;
}

int cmd_sample(const RunConfig& c, std::ostream& os) {
  require_discrete(c.mech());
  MechanismParams prm = c.params();
  const double x = c.single_x();
  NoisePlan plan = NoisePlan::make(c.mech(), prm, c.gamma);
  RandomTape tape(c.seed);
  if (c.format == "csv") {
    os << "i,y\n";
    for (uint64_t i = 0; i < c.n; ++i) os << i << ',' << num(sample_mechanism(plan, x, tape)) << '\n';
    return 0;
  }
  nlohmann::json ys = nlohmann::json::array();
  for (uint64_t i = 0; i < c.n; ++i) ys.push_back(sample_mechanism(plan, x, tape));
  os << nlohmann::json{{"mechanism", c.mechanism}, {"params", params_json(prm)}, {"x", x},
                       {"seed", c.seed},           {"n", c.n},                   {"samples", ys}}.dump(2)
     << '\n';
  return 0;
}

int cmd_mpc(const RunConfig& c, std::ostream& os) {
  require_discrete(c.mech());
  if (c.xs.empty()) throw UsageError("mpc needs at least one --x");
  ProtocolSetup setup = ProtocolSetup::make(c.mech(), c.params(), c.gamma);
  MpcBatch b = run_mpc_batch(setup, c.xs, c.n, c.seed);
  if (c.format == "csv") {
    os << "x,y,count\n";
    for (size_t k = 0; k < b.xs.size(); ++k) {
      const Histogram& h = b.outputs[k];
      for (size_t i = 0; i < h.counts.size(); ++i)
        os << num(b.xs[k]) << ',' << num(h.spec.value_of(static_cast<int64_t>(i))) << ',' << h.counts[i] << '\n';
    }
    return 0;
  }
  nlohmann::json j = b.to_json();
  j["seed"] = c.seed;
  os << j.dump(2) << '\n';
  return 0;
}

bool within(long double got, double want, double tol) { return std::fabs(static_cast<double>(got) - want) <= tol; }

int cmd_validate(const RunConfig& c, std::ostream& os) {
  std::vector<AccuracyCell> cells = accuracy_cells();
  if (c.n > 0) accuracy_fill_empirical(cells, c.n, c.seed);
  bool ok = true;
  for (const AccuracyCell& cell : cells) {
    ok = ok && within(cell.theory.mean, cell.published_mean, acc::kAccuracyTheoryAbsTol) &&
         within(cell.theory.mse, cell.published_mse, acc::kAccuracyTheoryAbsTol);
    if (cell.has_empirical)
      ok = ok && within(cell.empirical.mean, static_cast<double>(cell.theory.mean), acc::kAccuracyMeanAbsTol) &&
           std::fabs(static_cast<double>(cell.empirical.mse / cell.theory.mse) - 1) <= acc::kAccuracyMseRelTol;
  }
  if (c.format == "csv") {
    os << "p,x,published_mean,theory_mean,published_mse,theory_mse,empirical_mean,empirical_mse\n";
    for (const AccuracyCell& cell : cells)
      os << cell.p << ',' << num(cell.x) << ',' << num(cell.published_mean) << ',' << num(cell.theory.mean) << ','
         << num(cell.published_mse) << ',' << num(cell.theory.mse) << ','
         << (cell.has_empirical ? num(cell.empirical.mean) : "") << ','
         << (cell.has_empirical ? num(cell.empirical.mse) : "") << '\n';
  } else {
    nlohmann::json j = accuracy_json(cells);
    os << nlohmann::json{{"draws", c.n}, {"seed", c.seed}, {"pass", ok}, {"cells", j}}.dump(2) << '\n';
  }
  if (!ok) std::cerr << "validate: accuracy check failed\n";
  return ok ? 0 : kExitFailed;
}

int cmd_bench(const RunConfig& c, std::ostream& os) {
  MechanismParams prm = c.params();
  std::vector<Mechanism> mechs;
  if (c.mech() == Mechanism::Lap) mechs = {Mechanism::Tdl, Mechanism::Tcl};
  else mechs = {c.mech()};
  const std::vector<double> xs = c.xs.empty() ? std::vector<double>{0.0} : c.xs;
  const uint64_t n = c.n ? c.n : 1;
  nlohmann::json rows = nlohmann::json::array();
  if (c.format == "csv")
    os << "mechanism,phase,multiplications,gadget_multiplications,comparisons,bernoulli_draws,uniform_draws,"
          "rounds,field_elements,triples\n";
  for (Mechanism m : mechs) {
    ProtocolSetup setup = ProtocolSetup::make(m, prm, c.gamma);
    MpcBatch b = run_mpc_batch(setup, xs, n, c.seed);
    mpc::CostLedger noise = b.noise_total, perturb = b.perturb_first;
    if (c.format == "csv") {
      for (auto [phase, l] : {std::pair<const char*, const mpc::CostLedger*>{"noise_total", &noise},
                              std::pair<const char*, const mpc::CostLedger*>{"perturb_one", &perturb}})
        os << to_string(m) << ',' << phase << ',' << l->multiplications << ',' << l->gadget_multiplications << ','
           << l->comparisons << ',' << l->bernoulli_draws << ',' << l->uniform_draws << ',' << l->rounds << ','
           << l->field_elements << ',' << l->triples << '\n';
    } else {
      rows.push_back({{"mechanism", to_string(m)},
                      {"field_q", setup.field.q},
                      {"sessions", n},
                      {"noise_total", noise.to_json()},
                      {"perturb_one", perturb.to_json()},
                      {"perturb_cost_constant", b.perturb_cost_constant}});
    }
  }
  if (c.format == "json") os << nlohmann::json{{"params", params_json(prm)}, {"costs", rows}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded discrete Laplace mechanisms: exact laws, sampling and two-party protocols"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&cfg](CLI::App* sub) {
    sub->add_option("--mechanism", cfg.mechanism, "lap|tdl|tcl")->check(CLI::IsMember({"lap", "tdl", "tcl"}));
    sub->add_option("--E", cfg.E, "input bound E");
    sub->add_option("--L", cfg.L, "noise bound L");
    sub->add_option("--sigma", cfg.sigma, "scale parameter");
    sub->add_option("--epsilon", cfg.epsilon, "privacy budget (with --regime)");
    sub->add_option("--regime", cfg.regime, "eps-dp|dchi");
    sub->add_option("--p", cfg.p, "fractional bits of the grid");
    sub->add_option("--x", cfg.xs, "input value (repeatable where allowed)");
    sub->add_option("--n", cfg.n, "number of draws or sessions");
    sub->add_option("--seed", cfg.seed, "seed");
    sub->add_option("--gamma", cfg.gamma, "extra fine-lattice bits for tcl");
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--format", cfg.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  };

  using Handler = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"calibrate", "sigma for a privacy budget", cmd_calibrate},
      {"pmf", "exact output law at one input", cmd_pmf},
      {"moments", "mean and mean squared error per input", cmd_moments},
      {"sample", "plaintext draws from one seed", cmd_sample},
      {"mpc", "two-party sessions: output histograms and cost ledgers", cmd_mpc},
      {"validate", "accuracy table report; exit 2 on a failed check", cmd_validate},
      {"bench", "protocol cost ledger per mechanism", cmd_bench},
  };
  Handler chosen = nullptr;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    sub->callback([&chosen, fn = fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cfg.out.empty()) return chosen(cfg, std::cout);
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) throw UsageError("cannot open " + cfg.out);
    int rc = chosen(cfg, file);
    file.close();
    if (!file) throw std::runtime_error("write to " + cfg.out + " failed");
    return rc;
  } catch (const std::invalid_argument& e) {  // usage, parameter and encoding errors
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}
