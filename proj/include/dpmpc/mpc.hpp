#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpmpc/grid.hpp"
#include "dpmpc/random.hpp"
#include "json.hpp"

namespace dpmpc::mpc {

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Additive sharing over F_q: s0 + s1 = v (mod q). Both parties' shares are
// held by the simulator; a real party would only ever see its own.
struct Shared {
  uint64_t s0 = 0;
  uint64_t s1 = 0;
  // Derived from the private input [x]; used by the offline-phase audit.
  bool tainted = false;
};

struct CostLedger {
  // Online.
  uint64_t multiplications = 0;         // protocol-level secure products
  uint64_t gadget_multiplications = 0;  // products inside bersample/uni/ge
  uint64_t comparisons = 0;
  uint64_t bernoulli_draws = 0;
  uint64_t uniform_draws = 0;
  uint64_t uniform_attempts = 0;
  uint64_t reveals = 0;  // opened accept/reject bits
  uint64_t rounds = 0;
  uint64_t field_elements = 0;
  // Offline, dealer side.
  uint64_t triples = 0;
  uint64_t dealer_bit_masks = 0;
  uint64_t dealer_elements = 0;

  CostLedger operator-(const CostLedger& o) const;
  CostLedger& operator+=(const CostLedger& o);
  bool operator==(const CostLedger& o) const = default;
  nlohmann::json to_json() const;
};

enum class Phase { Setup, Offline, Online };

struct Message {
  uint32_t round;
  uint64_t value;
  bool tainted;
  Phase phase;
};

struct SessionOptions {
  bool record_transcript = false;
  // Largest |balanced value| accepted by ge; 0 selects the field's S_{e+ell,p} bound.
  int64_t ge_bound = 0;
};

// Two semi-honest parties with a trusted dealer, simulated in one process.
// Party j draws protocol randomness ("contributions") from stream 1 of seed_j
// and sharing masks from stream 2, so opened outputs depend on the
// contribution streams only.
class Session {
 public:
  Session(const FieldConfig& field, uint64_t seed0, uint64_t seed1, SessionOptions opts = {});

  const FieldConfig& field() const { return field_; }
  uint64_t q() const { return q_; }

  // Field arithmetic on canonical representatives in [0, q).
  uint64_t fadd(uint64_t a, uint64_t b) const { uint64_t s = a + b; return s >= q_ ? s - q_ : s; }
  uint64_t fsub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + q_ - b; }
  uint64_t fmul(uint64_t a, uint64_t b) const;
  uint64_t from_int(int64_t v) const { return unbalance(v, q_); }

  // Owner secret-shares v with a fresh mask (one element sent).
  Shared input(int owner, int64_t v, bool tainted = false);
  Shared input_field(int owner, uint64_t v, bool tainted = false);
  // Public constant, no communication.
  Shared constant(int64_t v) const;

  uint64_t open(const Shared& x);
  int64_t open_balanced(const Shared& x) { return balance(open(x), q_); }
  std::vector<uint64_t> open_batch(const std::vector<Shared>& xs);

  // Local linear operations.
  Shared add(const Shared& a, const Shared& b) const;
  Shared sub(const Shared& a, const Shared& b) const;
  Shared add_const(const Shared& a, int64_t c) const;
  Shared scale(const Shared& a, int64_t c) const;
  // c - a
  Shared rsub_const(int64_t c, const Shared& a) const;

  // Beaver multiplication: one triple, one round, four elements.
  Shared mul(const Shared& a, const Shared& b);
  std::vector<Shared> mul_batch(const std::vector<Shared>& a, const std::vector<Shared>& b);

  // a + i (b - a), one multiplication.
  Shared mux(const Shared& i, const Shared& a, const Shared& b);

  // Shared bit equal to 1 with probability t.realized(). Each party draws one
  // 64-bit word; the XOR of the words is compared with the threshold.
  Shared bersample(const Threshold& t);
  Shared bersample(long double prob) { return bersample(Threshold::from_probability(prob)); }
  // Independent draws evaluated in parallel; words are drawn in list order.
  std::vector<Shared> bersample_batch(const std::vector<Threshold>& ts);

  // Uniform in [0, M); non-powers of two reject on the next power of two and
  // reveal only the accept bit.
  Shared uni(uint64_t M);

  // [x >= 0] for the balanced value of x.
  Shared ge(const Shared& x);

  // Inclusive prefix-OR of shared bits, index 0 first (Brent-Kung schedule).
  std::vector<std::vector<Shared>> prefix_or_batch(std::vector<std::vector<Shared>> vs);
  // AND of all bits by a balanced tree; the empty AND is 1.
  std::vector<Shared> and_all_batch(const std::vector<std::vector<Shared>>& vs);
  // [value(bits) < T] for public T; bits most significant first.
  std::vector<Shared> lt_public_batch(const std::vector<std::vector<Shared>>& bits_msb,
                                      const std::vector<uint64_t>& T);

  WordSource& contributions(int party) { return party == 0 ? contrib0_ : contrib1_; }

  const CostLedger& ledger() const { return ledger_; }
  void reset_ledger() { ledger_ = CostLedger{}; }

  void set_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }
  // Messages derived from [x] that were sent during the offline phase.
  uint64_t offline_taint_violations() const { return taint_violations_; }
  const std::vector<Message>& view(int party) const { return views_[party]; }

  // Simulator-only reconstruction for contract checks and tests; not a protocol message.
  int64_t peek(const Shared& x) const { return balance(fadd(x.s0, x.s1), q_); }

  // Enters/leaves a gadget; products inside count as gadget multiplications.
  struct GadgetScope {
    explicit GadgetScope(Session& s) : s_(s) { ++s_.gadget_depth_; }
    ~GadgetScope() { --s_.gadget_depth_; }
    Session& s_;
  };

 private:
  uint64_t random_element(WordSource& src) const;
  void send(int to, uint64_t value, bool tainted);
  void next_round() { ++ledger_.rounds; ++round_; }
  std::vector<Shared> xor_contribution_bits(const std::vector<std::pair<uint64_t, uint64_t>>& words,
                                            const std::vector<int>& nbits);

  FieldConfig field_;
  uint64_t q_;
  int64_t ge_bound_;
  bool record_;
  RandomTape contrib0_, contrib1_, mask0_, mask1_, dealer_;
  CostLedger ledger_;
  Phase phase_ = Phase::Setup;
  uint64_t taint_violations_ = 0;
  uint32_t round_ = 0;
  int gadget_depth_ = 0;
  std::vector<Message> views_[2];
};

// Brent-Kung layers for an inclusive scan of length n: pairs (i, j) meaning
// a[i] = a[i] op a[j]; pairs within a layer are independent.
std::vector<std::vector<std::pair<int, int>>> brent_kung_layers(int n);

}  // namespace dpmpc::mpc
