#pragma once

#include "dpmpc/mpc.hpp"
#include "dpmpc/samplers.hpp"

namespace dpmpc {

struct SharedNoisePair {
  mpc::Shared branch;
  mpc::Shared payload;
};

// Public setup shared by both parties: the noise plan (thresholds, M, inner
// sampler) and a field large enough for every intermediate value.
struct ProtocolSetup {
  NoisePlan plan;
  FieldConfig field;

  static ProtocolSetup make(Mechanism m, const MechanismParams& prm, int gamma = 8);
  int64_t E_steps() const { return to_steps(plan.params.E, plan.params.p); }
  int64_t L_steps() const { return to_steps(plan.params.L, plan.params.p); }
};

// Centered discrete Laplace in grid steps of the plan's precision; the 2^-p
// rescale happens at decode time.
mpc::Shared pi_dl(mpc::Session& s, const DlapPlan& plan);

// Fine-lattice sample at precision p + gamma, redrawn when it equals +L
// (only the redraw bit is opened), floored to the 2^-p grid.
mpc::Shared pi_cl(mpc::Session& s, const ClapPlan& plan, int* rejections = nullptr);

// Offline phase; neither takes [x].
SharedNoisePair pi_d_noise(mpc::Session& s, const ProtocolSetup& setup);
SharedNoisePair pi_c_noise(mpc::Session& s, const ProtocolSetup& setup);
SharedNoisePair pi_noise(mpc::Session& s, const ProtocolSetup& setup);

// Online phase: one comparison and the final selection product.
mpc::Shared pi_d_perturb(mpc::Session& s, const mpc::Shared& x, const SharedNoisePair& pair, const ProtocolSetup& setup);
mpc::Shared pi_c_perturb(mpc::Session& s, const mpc::Shared& x, const SharedNoisePair& pair, const ProtocolSetup& setup);
mpc::Shared pi_perturb(mpc::Session& s, const mpc::Shared& x, const SharedNoisePair& pair, const ProtocolSetup& setup);

// Party 0 shares its input x (grid value) for the online phase.
mpc::Shared share_input(mpc::Session& s, double x, const ProtocolSetup& setup);
// Opens a perturbed output and decodes it to a grid value.
double open_output(mpc::Session& s, const mpc::Shared& z, const ProtocolSetup& setup);
NoisePair open_pair(mpc::Session& s, const SharedNoisePair& pair);

// Per-session seeds for batch runs.
uint64_t session_seed(uint64_t seed, uint64_t session, int party);

}  // namespace dpmpc
