#include "dpmpc/protocols.hpp"

#include <cmath>

namespace dpmpc {

using mpc::Session;
using mpc::Shared;

ProtocolSetup ProtocolSetup::make(Mechanism m, const MechanismParams& prm, int gamma) {
  ProtocolSetup s;
  s.plan = NoisePlan::make(m, prm, gamma, InnerMethod::Bitwise);
  int kappa = m == Mechanism::Tdl ? s.plan.dl.kappa() : s.plan.cl.fine.kappa();
  s.field = protocol_field(prm.E, prm.L, prm.p, kappa + 2);
  return s;
}

namespace {

std::vector<Threshold> dlap_thresholds(const DlapPlan& plan) {
  std::vector<Threshold> ts;
  ts.reserve(plan.kappa() + 2);
  ts.push_back(plan.zero);
  ts.insert(ts.end(), plan.bits.begin(), plan.bits.end());
  ts.push_back(plan.sign);
  return ts;
}

}  // namespace

Shared pi_dl(Session& s, const DlapPlan& plan) {
  const int k = plan.kappa();
  std::vector<Shared> bs = s.bersample_batch(dlap_thresholds(plan));
  const Shared& b = bs[0];
  const Shared& d = bs[k + 1];
  Shared m = s.constant(1);
  for (int i = 0; i < k; ++i) m = s.add(m, s.scale(bs[1 + i], int64_t{1} << i));
  // z = (2d - 1)(X + 1), then zeroed when b = 1.
  Shared z = s.sub(s.scale(s.mul(d, m), 2), m);
  return s.sub(z, s.mul(b, z));
}

Shared pi_cl(Session& s, const ClapPlan& plan, int* rejections) {
  const int kf = plan.fine.kappa();
  const int g = plan.gamma;
  if (rejections) *rejections = 0;
  const std::vector<Threshold> ts = dlap_thresholds(plan.fine);
  for (;;) {
    std::vector<Shared> bs = s.bersample_batch(ts);
    const Shared& b = bs[0];
    const Shared& d = bs[kf + 1];
    std::vector<Shared> low(bs.begin() + 1, bs.begin() + 1 + g);
    std::vector<Shared> high(bs.begin() + 1 + g, bs.begin() + 1 + kf);
    // H = floor(X / 2^g); A_low = [X mod 2^g = 2^g - 1].
    Shared H = s.constant(0);
    for (int i = 0; i < kf - g; ++i) H = s.add(H, s.scale(high[i], int64_t{1} << i));
    std::vector<Shared> ands = s.and_all_batch({low, high});
    const Shared& a_low = ands[0];
    std::vector<Shared> r1 = s.mul_batch({a_low, b}, {ands[1], d});
    Shared positive_nonzero = s.sub(d, r1[1]);
    // floor((2d-1)(X+1) / 2^g) = d (2H + A_low + 1) - H - 1
    Shared lin = s.add_const(s.add(s.scale(H, 2), a_low), 1);
    std::vector<Shared> r2 = s.mul_batch({positive_nonzero, d}, {r1[0], lin});
    // r2[0] flags the fine sample +L, which lies outside [-L, L).
    if (s.open(r2[0]) == 1) {
      if (rejections) ++*rejections;
      continue;
    }
    Shared fl = s.sub(s.add_const(r2[1], -1), H);
    return s.sub(fl, s.mul(b, fl));
  }
}

SharedNoisePair pi_noise(Session& s, const ProtocolSetup& setup) {
  s.set_phase(mpc::Phase::Offline);
  const NoisePlan& plan = setup.plan;
  Shared i = s.bersample(plan.branch);
  Shared u = s.uni(plan.M);
  Shared y = plan.mechanism == Mechanism::Tdl ? pi_dl(s, plan.dl) : pi_cl(s, plan.cl);
  return {i, s.mux(i, u, y)};
}

SharedNoisePair pi_d_noise(Session& s, const ProtocolSetup& setup) {
  if (setup.plan.mechanism != Mechanism::Tdl) throw ParameterError("pi_d_noise needs a tdl setup");
  return pi_noise(s, setup);
}

SharedNoisePair pi_c_noise(Session& s, const ProtocolSetup& setup) {
  if (setup.plan.mechanism != Mechanism::Tcl) throw ParameterError("pi_c_noise needs a tcl setup");
  return pi_noise(s, setup);
}

Shared pi_perturb(Session& s, const Shared& x, const SharedNoisePair& pair, const ProtocolSetup& setup) {
  s.set_phase(mpc::Phase::Online);
  const int64_t Es = setup.E_steps(), Ls = setup.L_steps();
  const Shared& y = pair.payload;
  Shared b = s.ge(s.add_const(s.sub(y, x), -Es));
  // Branch 0 tails: (2b - 1)L - E + y (+ b for the closed grid), all in grid steps.
  Shared z0 = s.add_const(s.add(s.scale(b, 2 * Ls), y), -Ls - Es);
  if (setup.plan.mechanism == Mechanism::Tdl) z0 = s.add(z0, b);
  Shared z1 = s.add(x, y);
  return s.mux(pair.branch, z0, z1);
}

Shared pi_d_perturb(Session& s, const Shared& x, const SharedNoisePair& pair, const ProtocolSetup& setup) {
  if (setup.plan.mechanism != Mechanism::Tdl) throw ParameterError("pi_d_perturb needs a tdl setup");
  return pi_perturb(s, x, pair, setup);
}

Shared pi_c_perturb(Session& s, const Shared& x, const SharedNoisePair& pair, const ProtocolSetup& setup) {
  if (setup.plan.mechanism != Mechanism::Tcl) throw ParameterError("pi_c_perturb needs a tcl setup");
  return pi_perturb(s, x, pair, setup);
}

Shared share_input(Session& s, double x, const ProtocolSetup& setup) {
  const int64_t xs = to_steps(x, setup.plan.params.p);
  if (xs < -setup.E_steps() || xs > setup.E_steps()) throw RangeError("input x must lie in [-E, E]");
  s.set_phase(mpc::Phase::Online);
  return s.input(0, xs, true);
}

double open_output(Session& s, const Shared& z, const ProtocolSetup& setup) {
  return std::ldexp(static_cast<double>(decode_steps(s.open_balanced(z), setup.field)), -setup.plan.params.p);
}

NoisePair open_pair(Session& s, const SharedNoisePair& pair) {
  std::vector<uint64_t> v = s.open_batch({pair.branch, pair.payload});
  return {static_cast<int>(balance(v[0], s.q())), balance(v[1], s.q())};
}

uint64_t session_seed(uint64_t seed, uint64_t session, int party) {
  return derive_seed(seed, 2 * session + static_cast<uint64_t>(party));
}

}  // namespace dpmpc
