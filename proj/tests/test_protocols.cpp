#include <cmath>

#include "doctest.h"
#include "dpmpc/acceptance_config.hpp"
#include "dpmpc/protocols.hpp"
#include "dpmpc/reports.hpp"
#include "oracles.hpp"

using namespace dpmpc;
using mpc::Session;
using mpc::Shared;
namespace acc = dpmpc::acceptance;

namespace {

std::vector<double> inputs(double E, int p) {
  GridSpec g(p, E, false);
  std::vector<double> xs;
  for (int64_t i = 0; i < g.count(); ++i) xs.push_back(g.value_of(i));
  return xs;
}

Session session(const ProtocolSetup& st, uint64_t seed, uint64_t i) {
  return Session(st.field, session_seed(seed, i, 0), session_seed(seed, i, 1));
}

}  // namespace

TEST_CASE("bit-for-bit agreement with the plaintext functionalities") {
  struct Inst { double E, L, sigma; int p, gamma; };
  for (Inst in : {Inst{4, 2, 1, 0, 8}, {4, 2, 1, 1, 3}, {2, 4, 0.7, 1, 0}, {8, 1, 2, 2, 5}}) {
    MechanismParams m(in.E, in.L, in.sigma, in.p);
    for (Mechanism mech : {Mechanism::Tdl, Mechanism::Tcl}) {
      ProtocolSetup st = ProtocolSetup::make(mech, m, in.gamma);
      Equivalence eq = check_equivalence(st, inputs(in.E, in.p), 500, 31);
      CHECK(eq.sessions == 500);
      CHECK(eq.noise_mismatches == 0);
      CHECK(eq.perturb_mismatches == 0);
      CHECK(eq.inner_mismatches == 0);
    }
  }
}

TEST_CASE("agreement spelled out for one session") {
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tdl, MechanismParams(4, 2, 1, 0));
  for (uint64_t i = 0; i < 200; ++i) {
    const uint64_t a = 1000 + i, b = 5000 + 3 * i;
    Session s(st.field, a, b);
    SharedNoisePair pair = pi_d_noise(s, st);
    double z = open_output(s, pi_d_perturb(s, share_input(s, -3, st), pair, st), st);
    RandomTape ta(a, 1), tb(b, 1);
    XorSource src(ta, tb);
    NoisePair ref = noise_d(st.plan, src);
    NoisePair got = open_pair(s, pair);
    REQUIRE(got.branch == ref.branch);
    REQUIRE(got.payload == ref.payload);
    REQUIRE(z == perturb_d(-3, ref, st.plan.params));
  }
}

TEST_CASE("perturbation on forged pairs, exhaustively") {
  for (int p : {0, 1}) {
    MechanismParams m(4, 2, 1, p);
    for (Mechanism mech : {Mechanism::Tdl, Mechanism::Tcl}) {
      ProtocolSetup st = ProtocolSetup::make(mech, m);
      const int64_t Es = st.E_steps(), Ls = st.L_steps();
      Session s(st.field, 41, 42);
      for (double x : inputs(4, p)) {
        for (int64_t y = 0; y < 2 * Es; ++y) {
          SharedNoisePair pair{s.input(1, 0), s.input(1, y)};
          REQUIRE(open_output(s, pi_perturb(s, share_input(s, x, st), pair, st), st) == perturb(st.plan, x, {0, y}));
        }
        const int64_t top = mech == Mechanism::Tdl ? Ls : Ls - 1;
        for (int64_t y = -Ls; y <= top; ++y) {
          SharedNoisePair pair{s.input(1, 1), s.input(1, y)};
          REQUIRE(open_output(s, pi_perturb(s, share_input(s, x, st), pair, st), st) == x + y * pow2(-p));
        }
      }
    }
  }
}

TEST_CASE("tail boundaries") {
  MechanismParams m(4, 2, 1, 1);
  ProtocolSetup d = ProtocolSetup::make(Mechanism::Tdl, m), c = ProtocolSetup::make(Mechanism::Tcl, m);
  Session s(d.field, 43, 44);
  for (double x : {-3.5, 0.0, 2.5}) {
    const int64_t first_high = static_cast<int64_t>(2 * (4 + x));
    auto run = [&](const ProtocolSetup& st, int64_t y) {
      return open_output(s, pi_perturb(s, share_input(s, x, st), {s.input(1, 0), s.input(1, y)}, st), st);
    };
    CHECK(run(d, first_high - 1) == x - 2 - 0.5);
    CHECK(run(d, first_high) == x + 2 + 0.5);
    CHECK(run(c, first_high) == x + 2);
    CHECK(run(c, first_high - 1) == x - 2 - 0.5);
  }
}

TEST_CASE("forced branches") {
  MechanismParams m(4, 2, 1, 0);
  for (Mechanism mech : {Mechanism::Tdl, Mechanism::Tcl}) {
    ProtocolSetup st = ProtocolSetup::make(mech, m);
    st.plan.branch = Threshold::from_probability(0);
    std::vector<uint64_t> c(8, 0);
    for (uint64_t i = 0; i < 20000; ++i) {
      Session s = session(st, 51, i);
      NoisePair pr = open_pair(s, pi_noise(s, st));
      REQUIRE(pr.branch == 0);
      ++c[pr.payload];
    }
    CHECK(chi_square(c, std::vector<long double>(8, 0.125L)).p_value > acc::kMinPValue);

    st.plan.branch = Threshold::from_probability(1);
    for (uint64_t i = 0; i < 2000; ++i) {
      Session s = session(st, 52, i);
      SharedNoisePair pair = pi_noise(s, st);
      Shared x = share_input(s, 1, st);
      double z = open_output(s, pi_perturb(s, x, pair, st), st);
      NoisePair pr = open_pair(s, pair);
      REQUIRE(pr.branch == 1);
      REQUIRE(z == 1 + pr.payload);
    }
  }
}

TEST_CASE("shared discrete Laplace") {
  DlapPlan plan = DlapPlan::make(2, 1, 0);
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tdl, MechanismParams(4, 2, 1, 0));
  ExactPmf f = pmf_dlap_centered(2, 1, 0);
  std::vector<uint64_t> c(5, 0);
  const int N = 100000;
  mpc::CostLedger cost;
  for (int i = 0; i < N; ++i) {
    Session s = session(st, 61, i);
    Shared z = pi_dl(s, plan);
    if (i == 0) cost = s.ledger();
    ++c[s.open_balanced(z) + 2];
  }
  std::vector<long double> fr(5);
  for (int k = 0; k < 5; ++k) fr[k] = static_cast<long double>(c[k]) / N;
  CHECK(tv_distance(fr, f.masses) < acc::kMpcMaxTvD);
  const long double c0 = f.masses[2];
  CHECK(std::fabs(fr[2] - c0) < acc::kStdErrors * std::sqrt(c0 * (1 - c0) / N));
  CHECK(cost.bernoulli_draws == static_cast<uint64_t>(plan.kappa() + 2));
  CHECK(cost.multiplications == 2);
}

TEST_CASE("shared fine-lattice sampler") {
  SUBCASE("gamma = 0 reproduces the discrete sampler away from +L") {
    ProtocolSetup st = ProtocolSetup::make(Mechanism::Tdl, MechanismParams(4, 2, 1, 0));
    DlapPlan dl = DlapPlan::make(2, 1, 0);
    ClapPlan cl = ClapPlan::make(2, 1, 0, 0);
    int compared = 0;
    for (uint64_t i = 0; i < 3000; ++i) {
      Session a = session(st, 71, i), b = session(st, 71, i);
      int64_t zd = a.open_balanced(pi_dl(a, dl));
      int rej = 0;
      int64_t zc = b.open_balanced(pi_cl(b, cl, &rej));
      if (rej == 0) {
        REQUIRE(zd == zc);
        ++compared;
      } else {
        REQUIRE(zd == 2);
      }
    }
    CHECK(compared > 2000);
  }
  SUBCASE("floor semantics on every fine point") {
    // A degenerate plan whose fine sample is forced: zero flag off, sign and
    // bits fixed, then check the coarse output against floor_shift.
    for (int g : {1, 2, 3}) {
      ClapPlan plan = ClapPlan::make(2, 1, 0, g);
      ProtocolSetup st = ProtocolSetup::make(Mechanism::Tcl, MechanismParams(4, 2, 1, 0), g);
      const int kf = plan.fine.kappa();
      for (int sign = 0; sign < 2; ++sign)
        for (int64_t X = 0; X < (int64_t{1} << kf); ++X) {
          ClapPlan forced = plan;
          forced.fine.zero = Threshold::from_probability(0);
          forced.fine.sign = Threshold::from_probability(sign);
          for (int i = 0; i < kf; ++i) forced.fine.bits[i] = Threshold::from_probability((X >> i) & 1);
          const int64_t fine = (sign ? 1 : -1) * (X + 1);
          Session s(st.field, 81, 82 + X);
          int rej = 0;
          if (fine == (int64_t{1} << kf)) continue;  // +L is rejected and redrawn forever
          REQUIRE(s.open_balanced(pi_cl(s, forced, &rej)) == floor_shift(fine, g));
          REQUIRE(rej == 0);
        }
    }
  }
  SUBCASE("law at gamma = 6") {
    ClapPlan plan = ClapPlan::make(2, 1, 0, 6);
    ProtocolSetup st = ProtocolSetup::make(Mechanism::Tcl, MechanismParams(4, 2, 1, 0), 6);
    std::vector<long double> exact = oracle::centered_cells(2, 1, 1);
    std::vector<uint64_t> c(4, 0);
    const int N = 50000;
    for (int i = 0; i < N; ++i) {
      Session s = session(st, 91, i);
      ++c[s.open_balanced(pi_cl(s, plan)) + 2];
    }
    std::vector<long double> fr(4);
    for (int k = 0; k < 4; ++k) fr[k] = static_cast<long double>(c[k]) / N;
    CHECK(tv_distance(fr, exact) < acc::kClapMaxTv);
  }
}

TEST_CASE("noise generation statistics") {
  MechanismParams m(4, 2, 1, 0);
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tcl, m);
  const int N = 100000;
  uint64_t ones = 0;
  std::vector<uint64_t> c(8, 0);
  for (int i = 0; i < N; ++i) {
    Session s = session(st, 101, i);
    NoisePair pr = open_pair(s, pi_c_noise(s, st));
    ones += pr.branch;
    if (pr.branch == 0) ++c[pr.payload];
  }
  const long double p = 1 - 2 * 4 * std::exp(-2.0L) / lambda_clap(4, 2, 1);
  CHECK(std::fabs(static_cast<long double>(ones) / N - p) < acc::kStdErrors * std::sqrt(p * (1 - p) / N));
  CHECK(chi_square(c, std::vector<long double>(8, 0.125L)).p_value > acc::kMinPValue);
}

TEST_CASE("noise cost") {
  MechanismParams m(4, 2, 1, 0);
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tdl, m);
  Session s = session(st, 111, 0);
  pi_d_noise(s, st);
  const mpc::CostLedger& l = s.ledger();
  CHECK(l.bernoulli_draws == static_cast<uint64_t>(1 + st.plan.dl.kappa() + 2));
  CHECK(l.uniform_draws == 1);
  CHECK(l.multiplications == 2 + 1);  // inner sampler, then the branch mux
  CHECK(l.comparisons == 0);
  CHECK_THROWS_AS(pi_c_noise(s, st), ParameterError);
}

TEST_CASE("online cost of perturbation") {
  for (auto [E, L, sigma, p] : {std::tuple{4.0, 2.0, 1.0, 0}, {64.0, 32.0, 8.0, 2}, {2.0, 8.0, 0.5, 3}}) {
    for (Mechanism mech : {Mechanism::Tdl, Mechanism::Tcl}) {
      ProtocolSetup st = ProtocolSetup::make(mech, MechanismParams(E, L, sigma, p));
      Session s = session(st, 121, 0);
      SharedNoisePair pair = pi_noise(s, st);
      for (double x : {-E, 0.0, E}) {
        Shared xs = share_input(s, x, st);
        mpc::CostLedger before = s.ledger();
        pi_perturb(s, xs, pair, st);
        mpc::CostLedger d = s.ledger() - before;
        CHECK(d.comparisons == 1);
        CHECK(d.multiplications == 1);
        CHECK(d.bernoulli_draws == 0);
        CHECK(d.uniform_draws == 0);
      }
    }
  }
}

TEST_CASE("the offline phase never sees the input") {
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tcl, MechanismParams(4, 2, 1, 0));
  for (uint64_t i = 0; i < 100; ++i) {
    mpc::SessionOptions o;
    o.record_transcript = true;
    Session s(st.field, session_seed(131, i, 0), session_seed(131, i, 1), o);
    Shared x = share_input(s, 3, st);
    SharedNoisePair pair = pi_noise(s, st);
    pi_perturb(s, x, pair, st);
    CHECK(s.offline_taint_violations() == 0);
    bool online_tainted = false;
    for (const mpc::Message& msg : s.view(1)) {
      REQUIRE(!(msg.phase == mpc::Phase::Offline && msg.tainted));
      online_tainted = online_tainted || (msg.phase == mpc::Phase::Online && msg.tainted);
    }
    CHECK(online_tainted);
  }
}

TEST_CASE("range violations") {
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tdl, MechanismParams(4, 2, 1, 0));
  Session s = session(st, 141, 0);
  CHECK_THROWS_AS(share_input(s, 5, st), RangeError);
  CHECK_THROWS_AS(share_input(s, 0.5, st), EncodingError);
  SharedNoisePair forged{s.input(1, 0), s.input(1, st.field.max_steps() + 1)};
  CHECK_THROWS_AS(pi_perturb(s, share_input(s, -4, st), forged, st), mpc::ContractViolation);
}

TEST_CASE("batch driver") {
  ProtocolSetup st = ProtocolSetup::make(Mechanism::Tdl, MechanismParams(4, 2, 1, 0));
  MpcBatch b = run_mpc_batch(st, {-4, 0, 4}, 300, 151);
  CHECK(b.sessions == 300);
  CHECK(b.outputs.size() == 3);
  for (const Histogram& h : b.outputs) CHECK(h.total == 300);
  uint64_t pairs = 0;
  for (uint64_t v : b.pair_counts) pairs += v;
  CHECK(pairs == 300);
  CHECK(b.perturb_cost_constant);
  CHECK(b.offline_taint_violations == 0);
  CHECK(b.perturb_first.comparisons == 1);
  nlohmann::json j = b.to_json();
  CHECK(j["sessions"] == 300);
  CHECK(j["ledger"]["perturb_per_call"]["online"]["comparisons"] == 1);
  // Same seed, same batch.
  CHECK(run_mpc_batch(st, {-4, 0, 4}, 300, 151).to_json() == j);
  // The pair law sums to one and has one slot per outcome.
  long double tot = 0;
  for (long double v : pair_law(st)) tot += v;
  CHECK(std::fabs(tot - 1) < 1e-15);
}
