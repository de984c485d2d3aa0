#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dpmpc/protocols.hpp"
#include "dpmpc/validation.hpp"

namespace dpmpc {

// Plaintext sampling of the full mechanism from one seeded tape.
Histogram sample_histogram(const NoisePlan& plan, double x, uint64_t N, uint64_t seed);

struct AccuracyCell {
  int p;
  double x;
  double published_mean;
  double published_mse;
  Moments theory{};
  Moments empirical{};
  bool has_empirical = false;
};

// The six (p, x) cells of the accuracy table with the published predictions.
std::vector<AccuracyCell> accuracy_cells();
void accuracy_fill_empirical(std::vector<AccuracyCell>& cells, uint64_t N, uint64_t seed);
nlohmann::json accuracy_json(const std::vector<AccuracyCell>& cells);

struct OverlaySeries {
  double x;
  ExactPmf pmf;
  Histogram hist;
  long double tv;
  long double expected_tv;
  ChiSquare chi2;
};

OverlaySeries overlay_series(const MechanismParams& prm, double x, uint64_t N, uint64_t seed);
void write_overlay_csv(std::ostream& os, const OverlaySeries& s);

struct MpcBatch {
  ProtocolSetup setup;
  std::vector<double> xs;
  std::vector<Histogram> outputs;
  std::vector<uint64_t> pair_counts;  // joint (branch, payload) index, see pair_index
  uint64_t sessions = 0;
  mpc::CostLedger noise_total;
  mpc::CostLedger perturb_total;
  mpc::CostLedger perturb_first;
  bool perturb_cost_constant = true;
  uint64_t offline_taint_violations = 0;

  nlohmann::json to_json() const;
};

// Index of a noise pair in the joint law: branch 0 payloads first, then branch 1
// noise values in increasing order.
size_t pair_index(const ProtocolSetup& setup, const NoisePair& pair);
std::vector<long double> pair_law(const ProtocolSetup& setup);

// Runs N independent sessions; each session generates one noise pair offline
// and perturbs every x in xs with it.
MpcBatch run_mpc_batch(const ProtocolSetup& setup, const std::vector<double>& xs, uint64_t N, uint64_t seed,
                       const std::function<void(uint64_t)>& progress = {});

struct Equivalence {
  uint64_t sessions = 0;
  uint64_t noise_mismatches = 0;
  uint64_t perturb_mismatches = 0;
  uint64_t inner_mismatches = 0;
  uint64_t inner_rejections = 0;
  nlohmann::json to_json() const;
};

// MPC outputs against the plaintext functionalities fed with the XOR of the
// two parties' contribution streams.
Equivalence check_equivalence(const ProtocolSetup& setup, const std::vector<double>& xs, uint64_t N, uint64_t seed);

struct CriterionResult {
  std::string name;
  bool pass;
  std::string detail;
  nlohmann::json data;
};

struct AcceptanceOptions {
  uint64_t seed;
  bool quick = false;  // reduced draw counts, for smoke runs only
  std::string out_dir;  // overlay CSVs and the JSON report go here when set
  std::function<void(const std::string&)> log;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);
std::string format_criterion(const CriterionResult& r);

}  // namespace dpmpc
