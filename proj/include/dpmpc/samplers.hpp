#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpmpc/mechanisms.hpp"
#include "dpmpc/random.hpp"

namespace dpmpc {

// True when 2^p L is a power of two, the shape the bitwise sampler needs.
bool is_power_of_two_steps(double L, int p);

struct GeoSamplerParams {
  int kappa;
  long double rho;
  long double t;

  // t = 2^p sigma, rho = e^{-1/t}, 2^kappa = 2^p L.
  static GeoSamplerParams make(double L, double sigma, int p);
  // Success probability of bit i, rho^{2^i} / (1 + rho^{2^i}).
  long double bit_probability(int i) const;
};

// Public constants of the three-step centered discrete Laplace sampler.
// Plaintext and shared samplers are built from the same plan so both parties
// and the reference agree on every threshold bit for bit.
struct DlapPlan {
  int p = 0;
  double L = 0;
  double sigma = 0;
  GeoSamplerParams geo{};
  long double c0 = 0;
  Threshold zero;
  std::vector<Threshold> bits;
  Threshold sign;

  static DlapPlan make(double L, double sigma, int p);
  int kappa() const { return geo.kappa; }
  int64_t half_width() const { return int64_t{1} << geo.kappa; }
};

// Inverse-CDF sampler over an exact PMF using one 64-bit word per draw.
class TableSampler {
 public:
  TableSampler() = default;
  explicit TableSampler(const ExactPmf& f);
  // Index into the PMF's support.
  int64_t draw_index(WordSource& src) const;
  // Realized law, differences of the 64-bit cumulative thresholds.
  std::vector<long double> realized_law() const;
  const GridSpec& spec() const { return *spec_; }
  bool empty() const { return cum_.empty(); }

 private:
  std::vector<Threshold> cum_;
  std::optional<GridSpec> spec_;
};

uint64_t sample_geometric_bitwise(const GeoSamplerParams& gp, WordSource& src);
uint64_t sample_geometric_bitwise(const DlapPlan& plan, WordSource& src);

// Centered discrete Laplace in grid steps, in [-2^p L, 2^p L]. All kappa + 2
// words are consumed regardless of the outcome.
int64_t sample_dlap_centered_steps(const DlapPlan& plan, WordSource& src);
double sample_dlap_centered(double L, double sigma, int p, WordSource& src);

// floor(k / 2^g) for signed k.
int64_t floor_shift(int64_t k, int g);

struct ClapPlan {
  int p = 0;
  int gamma = 0;
  DlapPlan fine;

  static ClapPlan make(double L, double sigma, int p, int gamma);
};

// Fine-lattice sample at precision p + gamma, redrawn when it equals +L,
// floored to the 2^-p grid. Result in grid steps, in [-2^p L, 2^p L).
int64_t sample_clap_centered_steps(const ClapPlan& plan, WordSource& src, int* rejections = nullptr);
double sample_clap_centered(double L, double sigma, int p, int gamma, WordSource& src);

enum class InnerMethod { Auto, Bitwise, Table };

struct NoisePair {
  int branch;       // 0 outer uniform, 1 inner Laplace
  int64_t payload;  // uniform index on branch 0, noise in grid steps on branch 1
};

struct NoisePlan {
  Mechanism mechanism = Mechanism::Tdl;
  MechanismParams params;
  long double branch_probability = 0;  // Pr[branch = 1]
  Threshold branch;
  uint64_t M = 0;  // 2 * 2^p * E outer points
  InnerMethod inner = InnerMethod::Bitwise;
  int gamma = 0;
  DlapPlan dl;
  ClapPlan cl;
  TableSampler table;

  static NoisePlan make(Mechanism m, const MechanismParams& prm, int gamma = 8,
                        InnerMethod inner = InnerMethod::Auto);
  GridSpec output_grid() const;
};

// Draw order: branch word, uniform payload, inner sample. Both branches are
// always sampled and the branch bit selects between them.
NoisePair noise(const NoisePlan& plan, WordSource& src);
NoisePair noise_d(const NoisePlan& plan, WordSource& src);
NoisePair noise_c(const NoisePlan& plan, WordSource& src);

int64_t perturb_d_steps(int64_t x_steps, const NoisePair& pair, const MechanismParams& prm);
int64_t perturb_c_steps(int64_t x_steps, const NoisePair& pair, const MechanismParams& prm);
double perturb_d(double x, const NoisePair& pair, const MechanismParams& prm);
double perturb_c(double x, const NoisePair& pair, const MechanismParams& prm);
double perturb(const NoisePlan& plan, double x, const NoisePair& pair);

// One draw of the full mechanism (noise then perturb).
double sample_mechanism(const NoisePlan& plan, double x, WordSource& src);

// Exact laws by outcome enumeration. Outcome probabilities are the realized
// 64-bit thresholds, so these describe the samplers as implemented.
std::vector<long double> geometric_law(const DlapPlan& plan);
// Indexed by steps + 2^kappa.
std::vector<long double> dlap_outcome_law(const DlapPlan& plan);
// Coarse law of the fine-lattice sampler indexed by steps + 2^p L (length 2 * 2^p L),
// computed analytically from the fine PMF pushed through the floor map.
std::vector<long double> clap_fine_law(double L, double sigma, int p, int gamma);

struct NoiseOutcome {
  NoisePair pair;
  long double prob;
};
std::vector<NoiseOutcome> noise_law(const NoisePlan& plan);
// Exact output law of perturb(noise()) over plan.output_grid().
std::vector<long double> composite_law(const NoisePlan& plan, double x);

}  // namespace dpmpc
