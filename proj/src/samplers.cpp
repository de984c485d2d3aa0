#include "dpmpc/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace dpmpc {

bool is_power_of_two_steps(double L, int p) {
  if (!on_grid(L, p) || !(L > 0)) return false;
  int64_t s = to_steps(L, p);
  return s > 0 && (s & (s - 1)) == 0;
}

GeoSamplerParams GeoSamplerParams::make(double L, double sigma, int p) {
  if (!(sigma > 0)) throw DomainError("sigma must be positive");
  if (!is_power_of_two_steps(L, p))
    throw ParameterError("bitwise sampling needs 2^p L to be a power of two");
  GeoSamplerParams g;
  int64_t s = to_steps(L, p);
  g.kappa = 0;
  while ((int64_t{1} << g.kappa) < s) ++g.kappa;
  g.t = std::ldexp(static_cast<long double>(sigma), p);
  g.rho = std::exp(-1.0L / g.t);
  return g;
}

long double GeoSamplerParams::bit_probability(int i) const {
  // rho^{2^i} / (1 + rho^{2^i}) = 1 / (1 + e^{2^i / t})
  long double r = safe_exp(-std::ldexp(1.0L, i) / t);
  return r / (1 + r);
}

DlapPlan DlapPlan::make(double L, double sigma, int p) {
  DlapPlan d;
  d.p = p;
  d.L = L;
  d.sigma = sigma;
  d.geo = GeoSamplerParams::make(L, sigma, p);
  d.c0 = 1 / lambda_dlap_inner(L, sigma, p);
  d.zero = Threshold::from_probability(d.c0);
  for (int i = 0; i < d.geo.kappa; ++i) d.bits.push_back(Threshold::from_probability(d.geo.bit_probability(i)));
  d.sign = Threshold::from_probability(0.5L);
  return d;
}

TableSampler::TableSampler(const ExactPmf& f) : spec_(f.spec) {
  long double run = 0;
  cum_.reserve(f.masses.size());
  for (size_t i = 0; i < f.masses.size(); ++i) {
    run += f.masses[i];
    cum_.push_back(Threshold::from_probability(std::min(run, 1.0L)));
  }
  cum_.back().full = true;
}

int64_t TableSampler::draw_index(WordSource& src) const {
  uint64_t w = src.next();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), w,
                             [](uint64_t v, const Threshold& t) { return t.test(v); });
  return it - cum_.begin();
}

std::vector<long double> TableSampler::realized_law() const {
  std::vector<long double> law(cum_.size());
  long double prev = 0;
  for (size_t i = 0; i < cum_.size(); ++i) {
    long double c = cum_[i].realized();
    law[i] = std::max(0.0L, c - prev);
    prev = std::max(prev, c);
  }
  return law;
}

uint64_t sample_geometric_bitwise(const GeoSamplerParams& gp, WordSource& src) {
  uint64_t x = 0;
  for (int i = 0; i < gp.kappa; ++i)
    if (draw_bernoulli(src, Threshold::from_probability(gp.bit_probability(i)))) x |= uint64_t{1} << i;
  return x;
}

uint64_t sample_geometric_bitwise(const DlapPlan& plan, WordSource& src) {
  uint64_t x = 0;
  for (int i = 0; i < plan.kappa(); ++i)
    if (draw_bernoulli(src, plan.bits[i])) x |= uint64_t{1} << i;
  return x;
}

int64_t sample_dlap_centered_steps(const DlapPlan& plan, WordSource& src) {
  bool zero = draw_bernoulli(src, plan.zero);
  int64_t mag = static_cast<int64_t>(sample_geometric_bitwise(plan, src)) + 1;
  bool positive = draw_bernoulli(src, plan.sign);
  if (zero) return 0;
  return positive ? mag : -mag;
}

double sample_dlap_centered(double L, double sigma, int p, WordSource& src) {
  return std::ldexp(static_cast<double>(sample_dlap_centered_steps(DlapPlan::make(L, sigma, p), src)), -p);
}

int64_t floor_shift(int64_t k, int g) {
  int64_t d = int64_t{1} << g;
  int64_t q = k / d;
  if (k % d != 0 && k < 0) --q;
  return q;
}

ClapPlan ClapPlan::make(double L, double sigma, int p, int gamma) {
  if (gamma < 0 || gamma > 30) throw ParameterError("gamma must lie in [0, 30]");
  ClapPlan c;
  c.p = p;
  c.gamma = gamma;
  c.fine = DlapPlan::make(L, sigma, p + gamma);
  return c;
}

int64_t sample_clap_centered_steps(const ClapPlan& plan, WordSource& src, int* rejections) {
  if (rejections) *rejections = 0;
  for (;;) {
    int64_t k = sample_dlap_centered_steps(plan.fine, src);
    if (k == plan.fine.half_width()) {
      if (rejections) ++*rejections;
      continue;
    }
    return floor_shift(k, plan.gamma);
  }
}

double sample_clap_centered(double L, double sigma, int p, int gamma, WordSource& src) {
  return std::ldexp(static_cast<double>(sample_clap_centered_steps(ClapPlan::make(L, sigma, p, gamma), src)), -p);
}

NoisePlan NoisePlan::make(Mechanism m, const MechanismParams& prm, int gamma, InnerMethod inner) {
  if (m == Mechanism::Lap) throw ParameterError("noise plans exist for tdl and tcl only");
  NoisePlan n;
  n.mechanism = m;
  n.params = prm;
  n.gamma = gamma;
  const long double a = safe_exp(-static_cast<long double>(prm.L) / prm.sigma);
  const int64_t Es = to_steps(prm.E, prm.p);
  n.M = static_cast<uint64_t>(2 * Es);
  if (m == Mechanism::Tdl)
    n.branch_probability = 1 - 2 * static_cast<long double>(Es) * a / lambda_dlap(prm.E, prm.L, prm.sigma, prm.p);
  else
    n.branch_probability = 1 - 2 * static_cast<long double>(prm.E) * a / lambda_clap(prm.E, prm.L, prm.sigma);
  n.branch = Threshold::from_probability(std::clamp(n.branch_probability, 0.0L, 1.0L));
  if (inner == InnerMethod::Auto)
    inner = is_power_of_two_steps(prm.L, prm.p) ? InnerMethod::Bitwise : InnerMethod::Table;
  n.inner = inner;
  if (inner == InnerMethod::Bitwise) {
    if (m == Mechanism::Tdl) n.dl = DlapPlan::make(prm.L, prm.sigma, prm.p);
    else n.cl = ClapPlan::make(prm.L, prm.sigma, prm.p, gamma);
  } else {
    n.table = TableSampler(m == Mechanism::Tdl ? pmf_dlap_centered(prm.L, prm.sigma, prm.p)
                                               : pmf_clap_centered(prm.L, prm.sigma, prm.p));
  }
  return n;
}

GridSpec NoisePlan::output_grid() const {
  return GridSpec(params.p, params.E + params.L, mechanism == Mechanism::Tcl);
}

NoisePair noise(const NoisePlan& plan, WordSource& src) {
  bool inner_branch = draw_bernoulli(src, plan.branch);
  int64_t u = static_cast<int64_t>(draw_uniform(src, plan.M));
  int64_t v;
  if (plan.inner == InnerMethod::Table) {
    v = plan.table.spec().steps_of(plan.table.draw_index(src));
  } else if (plan.mechanism == Mechanism::Tdl) {
    v = sample_dlap_centered_steps(plan.dl, src);
  } else {
    v = sample_clap_centered_steps(plan.cl, src);
  }
  return inner_branch ? NoisePair{1, v} : NoisePair{0, u};
}

NoisePair noise_d(const NoisePlan& plan, WordSource& src) {
  if (plan.mechanism != Mechanism::Tdl) throw ParameterError("noise_d needs a tdl plan");
  return noise(plan, src);
}

NoisePair noise_c(const NoisePlan& plan, WordSource& src) {
  if (plan.mechanism != Mechanism::Tcl) throw ParameterError("noise_c needs a tcl plan");
  return noise(plan, src);
}

namespace {

void check_perturb_args(int64_t xs, const NoisePair& pair, int64_t Es, int64_t Ls, bool half_open) {
  if (xs < -Es || xs > Es) throw RangeError("input x must lie in [-E, E]");
  if (pair.branch == 0) {
    if (pair.payload < 0 || pair.payload >= 2 * Es) throw RangeError("uniform payload out of range");
  } else if (pair.branch == 1) {
    if (pair.payload < -Ls || pair.payload > (half_open ? Ls - 1 : Ls)) throw RangeError("noise payload out of range");
  } else {
    throw RangeError("branch must be 0 or 1");
  }
}

}  // namespace

int64_t perturb_d_steps(int64_t xs, const NoisePair& pair, const MechanismParams& prm) {
  const int64_t Es = to_steps(prm.E, prm.p), Ls = to_steps(prm.L, prm.p);
  check_perturb_args(xs, pair, Es, Ls, false);
  if (pair.branch == 1) return xs + pair.payload;
  const int64_t y = pair.payload;
  if (y <= Es + xs - 1) return -Ls - Es + y;
  return Ls - Es + y + 1;
}

int64_t perturb_c_steps(int64_t xs, const NoisePair& pair, const MechanismParams& prm) {
  const int64_t Es = to_steps(prm.E, prm.p), Ls = to_steps(prm.L, prm.p);
  check_perturb_args(xs, pair, Es, Ls, true);
  if (pair.branch == 1) return xs + pair.payload;
  const int64_t y = pair.payload;
  if (y <= Es + xs - 1) return -Ls - Es + y;
  return Ls - Es + y;
}

double perturb_d(double x, const NoisePair& pair, const MechanismParams& prm) {
  return std::ldexp(static_cast<double>(perturb_d_steps(to_steps(x, prm.p), pair, prm)), -prm.p);
}

double perturb_c(double x, const NoisePair& pair, const MechanismParams& prm) {
  return std::ldexp(static_cast<double>(perturb_c_steps(to_steps(x, prm.p), pair, prm)), -prm.p);
}

double perturb(const NoisePlan& plan, double x, const NoisePair& pair) {
  return plan.mechanism == Mechanism::Tdl ? perturb_d(x, pair, plan.params) : perturb_c(x, pair, plan.params);
}

double sample_mechanism(const NoisePlan& plan, double x, WordSource& src) {
  return perturb(plan, x, noise(plan, src));
}

std::vector<long double> geometric_law(const DlapPlan& plan) {
  const int k = plan.kappa();
  std::vector<long double> law(size_t{1} << k);
  for (uint64_t x = 0; x < law.size(); ++x) {
    long double pr = 1;
    for (int i = 0; i < k; ++i) {
      long double pi = plan.bits[i].realized();
      pr *= ((x >> i) & 1) ? pi : 1 - pi;
    }
    law[x] = pr;
  }
  return law;
}

std::vector<long double> dlap_outcome_law(const DlapPlan& plan) {
  const int64_t H = plan.half_width();
  std::vector<long double> law(2 * H + 1, 0.0L);
  const std::vector<long double> geo = geometric_law(plan);
  const long double c0 = plan.zero.realized(), half = plan.sign.realized();
  for (int z = 0; z < 2; ++z) {
    for (uint64_t x = 0; x < geo.size(); ++x) {
      for (int s = 0; s < 2; ++s) {
        long double pr = (z ? c0 : 1 - c0) * geo[x] * (s ? half : 1 - half);
        int64_t mag = static_cast<int64_t>(x) + 1;
        int64_t v = z ? 0 : (s ? mag : -mag);
        law[v + H] += pr;
      }
    }
  }
  return law;
}

namespace {

std::vector<long double> floor_push(const std::vector<long double>& fine, int64_t H, int gamma, int64_t coarse_half) {
  // fine indexed by k + H, k in [-H, H]; the top point +H is dropped and the rest renormalized.
  std::vector<long double> out(2 * coarse_half, 0.0L);
  long double keep = 0;
  for (int64_t k = -H; k < H; ++k) keep += fine[k + H];
  for (int64_t k = -H; k < H; ++k) out[floor_shift(k, gamma) + coarse_half] += fine[k + H] / keep;
  return out;
}

}  // namespace

std::vector<long double> clap_fine_law(double L, double sigma, int p, int gamma) {
  ExactPmf f = pmf_dlap_centered(L, sigma, p + gamma);
  return floor_push(f.masses, f.spec.bound_steps(), gamma, to_steps(L, p));
}

std::vector<NoiseOutcome> noise_law(const NoisePlan& plan) {
  std::vector<NoiseOutcome> out;
  const long double pi = plan.branch.realized();
  for (uint64_t u = 0; u < plan.M; ++u)
    out.push_back({{0, static_cast<int64_t>(u)}, (1 - pi) / static_cast<long double>(plan.M)});
  if (plan.inner == InnerMethod::Table) {
    std::vector<long double> law = plan.table.realized_law();
    for (size_t i = 0; i < law.size(); ++i)
      out.push_back({{1, plan.table.spec().steps_of(static_cast<int64_t>(i))}, pi * law[i]});
  } else if (plan.mechanism == Mechanism::Tdl) {
    std::vector<long double> law = dlap_outcome_law(plan.dl);
    const int64_t H = plan.dl.half_width();
    for (int64_t k = -H; k <= H; ++k) out.push_back({{1, k}, pi * law[k + H]});
  } else {
    const int64_t Ls = to_steps(plan.params.L, plan.params.p);
    std::vector<long double> law =
        floor_push(dlap_outcome_law(plan.cl.fine), plan.cl.fine.half_width(), plan.gamma, Ls);
    for (int64_t k = -Ls; k < Ls; ++k) out.push_back({{1, k}, pi * law[k + Ls]});
  }
  return out;
}

std::vector<long double> composite_law(const NoisePlan& plan, double x) {
  GridSpec g = plan.output_grid();
  std::vector<long double> law(g.count(), 0.0L);
  const int64_t xs = to_steps(x, plan.params.p);
  for (const NoiseOutcome& o : noise_law(plan)) {
    int64_t z = plan.mechanism == Mechanism::Tdl ? perturb_d_steps(xs, o.pair, plan.params)
                                                 : perturb_c_steps(xs, o.pair, plan.params);
    law[g.index_of_steps(z)] += o.prob;
  }
  return law;
}

}  // namespace dpmpc
