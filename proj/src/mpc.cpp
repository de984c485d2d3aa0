#include "dpmpc/mpc.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace dpmpc::mpc {

CostLedger CostLedger::operator-(const CostLedger& o) const {
  CostLedger d;
  d.multiplications = multiplications - o.multiplications;
  d.gadget_multiplications = gadget_multiplications - o.gadget_multiplications;
  d.comparisons = comparisons - o.comparisons;
  d.bernoulli_draws = bernoulli_draws - o.bernoulli_draws;
  d.uniform_draws = uniform_draws - o.uniform_draws;
  d.uniform_attempts = uniform_attempts - o.uniform_attempts;
  d.reveals = reveals - o.reveals;
  d.rounds = rounds - o.rounds;
  d.field_elements = field_elements - o.field_elements;
  d.triples = triples - o.triples;
  d.dealer_bit_masks = dealer_bit_masks - o.dealer_bit_masks;
  d.dealer_elements = dealer_elements - o.dealer_elements;
  return d;
}

CostLedger& CostLedger::operator+=(const CostLedger& o) {
  multiplications += o.multiplications;
  gadget_multiplications += o.gadget_multiplications;
  comparisons += o.comparisons;
  bernoulli_draws += o.bernoulli_draws;
  uniform_draws += o.uniform_draws;
  uniform_attempts += o.uniform_attempts;
  reveals += o.reveals;
  rounds += o.rounds;
  field_elements += o.field_elements;
  triples += o.triples;
  dealer_bit_masks += o.dealer_bit_masks;
  dealer_elements += o.dealer_elements;
  return *this;
}

nlohmann::json CostLedger::to_json() const {
  return {{"online",
           {{"multiplications", multiplications},
            {"gadget_multiplications", gadget_multiplications},
            {"comparisons", comparisons},
            {"bernoulli_draws", bernoulli_draws},
            {"uniform_draws", uniform_draws},
            {"uniform_attempts", uniform_attempts},
            {"reveals", reveals},
            {"rounds", rounds},
            {"field_elements_exchanged", field_elements}}},
          {"offline", {{"triples", triples}, {"dealer_bit_masks", dealer_bit_masks}, {"dealer_elements", dealer_elements}}}};
}

std::vector<std::vector<std::pair<int, int>>> brent_kung_layers(int n) {
  std::vector<std::vector<std::pair<int, int>>> layers;
  for (int d = 1; d < n; d *= 2) {
    std::vector<std::pair<int, int>> l;
    for (int i = 2 * d - 1; i < n; i += 2 * d) l.emplace_back(i, i - d);
    if (!l.empty()) layers.push_back(std::move(l));
  }
  int d = 1;
  while (3 * (2 * d) - 1 < n) d *= 2;
  for (; d >= 1; d /= 2) {
    std::vector<std::pair<int, int>> l;
    for (int i = 3 * d - 1; i < n; i += 2 * d) l.emplace_back(i, i - d);
    if (!l.empty()) layers.push_back(std::move(l));
  }
  return layers;
}

namespace {

const std::vector<std::vector<std::pair<int, int>>>& cached_layers(int n) {
  static thread_local std::map<int, std::vector<std::vector<std::pair<int, int>>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, brent_kung_layers(n)).first;
  return it->second;
}

}  // namespace

Session::Session(const FieldConfig& field, uint64_t seed0, uint64_t seed1, SessionOptions opts)
    : field_(field),
      q_(field.q),
      ge_bound_(opts.ge_bound > 0 ? opts.ge_bound : field.max_steps()),
      record_(opts.record_transcript),
      contrib0_(seed0, 1),
      contrib1_(seed1, 1),
      mask0_(seed0, 2),
      mask1_(seed1, 2),
      dealer_(derive_seed(seed0 ^ std::rotl(seed1, 29), 3), 3) {}

uint64_t Session::fmul(uint64_t a, uint64_t b) const {
  if (q_ < (uint64_t{1} << 32)) return a * b % q_;
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % q_);
}

uint64_t Session::random_element(WordSource& src) const {
  const int k = bits_for(q_);
  const uint64_t mask = (uint64_t{1} << k) - 1;
  for (;;) {
    uint64_t u = src.next() & mask;
    if (u < q_) return u;
  }
}

void Session::send(int to, uint64_t value, bool tainted) {
  ++ledger_.field_elements;
  if (tainted && phase_ == Phase::Offline) ++taint_violations_;
  if (record_) views_[to].push_back({round_, value, tainted, phase_});
}

Shared Session::input_field(int owner, uint64_t v, bool tainted) {
  RandomTape& mask = owner == 0 ? mask0_ : mask1_;
  uint64_t m = random_element(mask);
  Shared s;
  if (owner == 0) {
    s.s0 = fsub(v % q_, m);
    s.s1 = m;
  } else {
    s.s1 = fsub(v % q_, m);
    s.s0 = m;
  }
  s.tainted = tainted;
  next_round();
  send(1 - owner, m, tainted);
  return s;
}

Shared Session::input(int owner, int64_t v, bool tainted) { return input_field(owner, from_int(v), tainted); }

Shared Session::constant(int64_t v) const { return Shared{from_int(v), 0, false}; }

uint64_t Session::open(const Shared& x) { return open_batch({x})[0]; }

std::vector<uint64_t> Session::open_batch(const std::vector<Shared>& xs) {
  std::vector<uint64_t> out(xs.size());
  if (xs.empty()) return out;
  next_round();
  for (size_t k = 0; k < xs.size(); ++k) {
    send(1, xs[k].s0, xs[k].tainted);
    send(0, xs[k].s1, xs[k].tainted);
    out[k] = fadd(xs[k].s0, xs[k].s1);
  }
  return out;
}

Shared Session::add(const Shared& a, const Shared& b) const {
  return {fadd(a.s0, b.s0), fadd(a.s1, b.s1), a.tainted || b.tainted};
}

Shared Session::sub(const Shared& a, const Shared& b) const {
  return {fsub(a.s0, b.s0), fsub(a.s1, b.s1), a.tainted || b.tainted};
}

Shared Session::add_const(const Shared& a, int64_t c) const { return {fadd(a.s0, from_int(c)), a.s1, a.tainted}; }

Shared Session::scale(const Shared& a, int64_t c) const {
  uint64_t k = from_int(c);
  return {fmul(a.s0, k), fmul(a.s1, k), a.tainted};
}

Shared Session::rsub_const(int64_t c, const Shared& a) const { return add_const(scale(a, -1), c); }

Shared Session::mul(const Shared& a, const Shared& b) { return mul_batch({a}, {b})[0]; }

std::vector<Shared> Session::mul_batch(const std::vector<Shared>& x, const std::vector<Shared>& y) {
  const size_t n = x.size();
  std::vector<Shared> z(n);
  if (n == 0) return z;
  next_round();
  for (size_t k = 0; k < n; ++k) {
    // Dealer triple (offline).
    uint64_t a = random_element(dealer_), b = random_element(dealer_);
    uint64_t c = fmul(a, b);
    uint64_t a0 = random_element(dealer_), b0 = random_element(dealer_), c0 = random_element(dealer_);
    uint64_t a1 = fsub(a, a0), b1 = fsub(b, b0), c1 = fsub(c, c0);
    ++ledger_.triples;
    ledger_.dealer_elements += 6;
    // Online: open d = x - a and e = y - b.
    uint64_t d0 = fsub(x[k].s0, a0), d1 = fsub(x[k].s1, a1);
    uint64_t e0 = fsub(y[k].s0, b0), e1 = fsub(y[k].s1, b1);
    bool t = x[k].tainted || y[k].tainted;
    send(1, d0, t);
    send(1, e0, t);
    send(0, d1, t);
    send(0, e1, t);
    uint64_t d = fadd(d0, d1), e = fadd(e0, e1);
    z[k].s0 = fadd(fadd(c0, fmul(d, b0)), fadd(fmul(e, a0), fmul(d, e)));
    z[k].s1 = fadd(c1, fadd(fmul(d, b1), fmul(e, a1)));
    z[k].tainted = t;
  }
  if (gadget_depth_ > 0) ledger_.gadget_multiplications += n;
  else ledger_.multiplications += n;
  return z;
}

Shared Session::mux(const Shared& i, const Shared& a, const Shared& b) {
  int64_t iv = peek(i);
  if (iv != 0 && iv != 1) throw ContractViolation("mux selector is not a bit");
  return add(a, mul(i, sub(b, a)));
}

std::vector<std::vector<Shared>> Session::prefix_or_batch(std::vector<std::vector<Shared>> vs) {
  size_t depth = 0;
  for (const auto& v : vs) depth = std::max(depth, cached_layers(static_cast<int>(v.size())).size());
  for (size_t l = 0; l < depth; ++l) {
    std::vector<Shared> lhs, rhs;
    std::vector<std::pair<size_t, int>> where;
    for (size_t k = 0; k < vs.size(); ++k) {
      const auto& layers = cached_layers(static_cast<int>(vs[k].size()));
      if (l >= layers.size()) continue;
      for (auto [i, j] : layers[l]) {
        lhs.push_back(vs[k][i]);
        rhs.push_back(vs[k][j]);
        where.emplace_back(k, i);
      }
    }
    std::vector<Shared> prod = mul_batch(lhs, rhs);
    for (size_t m = 0; m < where.size(); ++m) {
      // a OR b = a + b - ab
      Shared& dst = vs[where[m].first][where[m].second];
      dst = sub(add(lhs[m], rhs[m]), prod[m]);
    }
  }
  return vs;
}

std::vector<Shared> Session::and_all_batch(const std::vector<std::vector<Shared>>& vs) {
  std::vector<std::vector<Shared>> cur = vs;
  for (;;) {
    std::vector<Shared> lhs, rhs;
    std::vector<size_t> owner;
    for (size_t k = 0; k < cur.size(); ++k)
      for (size_t i = 0; i + 1 < cur[k].size(); i += 2) {
        lhs.push_back(cur[k][i]);
        rhs.push_back(cur[k][i + 1]);
        owner.push_back(k);
      }
    if (lhs.empty()) break;
    std::vector<Shared> prod = mul_batch(lhs, rhs);
    std::vector<std::vector<Shared>> next(cur.size());
    size_t m = 0;
    for (size_t k = 0; k < cur.size(); ++k) {
      for (size_t i = 0; i + 1 < cur[k].size(); i += 2) next[k].push_back(prod[m++]);
      if (cur[k].size() % 2 == 1) next[k].push_back(cur[k].back());
    }
    cur = std::move(next);
  }
  std::vector<Shared> out;
  for (auto& v : cur) out.push_back(v.empty() ? constant(1) : v[0]);
  return out;
}

std::vector<Shared> Session::lt_public_batch(const std::vector<std::vector<Shared>>& bits_msb,
                                             const std::vector<uint64_t>& T) {
  std::vector<std::vector<Shared>> diff(bits_msb.size());
  for (size_t k = 0; k < bits_msb.size(); ++k) {
    const size_t n = bits_msb[k].size();
    for (size_t i = 0; i < n; ++i) {
      bool ti = (T[k] >> (n - 1 - i)) & 1;
      diff[k].push_back(ti ? rsub_const(1, bits_msb[k][i]) : bits_msb[k][i]);
    }
  }
  std::vector<std::vector<Shared>> pre = prefix_or_batch(std::move(diff));
  std::vector<Shared> out;
  for (size_t k = 0; k < pre.size(); ++k) {
    const size_t n = pre[k].size();
    if (n < 64 && (T[k] >> n) != 0) {
      out.push_back(constant(1));  // T exceeds every n-bit value
      continue;
    }
    Shared acc = constant(0);
    for (size_t i = 0; i < n; ++i) {
      if (!((T[k] >> (n - 1 - i)) & 1)) continue;
      // The first differing position decides; there T has a 1 and the bits a 0.
      Shared first = i == 0 ? pre[k][0] : sub(pre[k][i], pre[k][i - 1]);
      acc = add(acc, first);
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<Shared> Session::xor_contribution_bits(const std::vector<std::pair<uint64_t, uint64_t>>& words,
                                                   const std::vector<int>& nbits) {
  // words[k] holds the two parties' words; the top nbits[k] bits of the
  // low-aligned field are shared most significant first.
  std::vector<Shared> lhs, rhs;
  next_round();
  for (size_t k = 0; k < words.size(); ++k) {
    for (int i = nbits[k] - 1; i >= 0; --i) {
      for (int party = 0; party < 2; ++party) {
        uint64_t bit = ((party == 0 ? words[k].first : words[k].second) >> i) & 1;
        RandomTape& mask = party == 0 ? mask0_ : mask1_;
        uint64_t m = random_element(mask);
        Shared s;
        if (party == 0) { s.s0 = fsub(bit, m); s.s1 = m; }
        else { s.s1 = fsub(bit, m); s.s0 = m; }
        send(1 - party, m, false);
        (party == 0 ? lhs : rhs).push_back(s);
      }
    }
  }
  std::vector<Shared> prod = mul_batch(lhs, rhs);
  std::vector<Shared> out(lhs.size());
  for (size_t m = 0; m < lhs.size(); ++m) out[m] = sub(add(lhs[m], rhs[m]), scale(prod[m], 2));
  return out;
}

std::vector<Shared> Session::bersample_batch(const std::vector<Threshold>& ts) {
  GadgetScope scope(*this);
  ledger_.bernoulli_draws += ts.size();
  std::vector<Shared> out(ts.size());
  std::vector<std::pair<uint64_t, uint64_t>> words;
  std::vector<int> nbits;
  std::vector<size_t> slot;
  std::vector<uint64_t> tops;
  for (size_t k = 0; k < ts.size(); ++k) {
    uint64_t w0 = contrib0_.next(), w1 = contrib1_.next();
    if (ts[k].full) { out[k] = constant(1); continue; }
    if (ts[k].value == 0) { out[k] = constant(0); continue; }
    // Bits below the lowest set bit of T never decide w < T.
    int n = 64 - std::countr_zero(ts[k].value);
    words.emplace_back(w0 >> (64 - n), w1 >> (64 - n));
    nbits.push_back(n);
    slot.push_back(k);
    tops.push_back(ts[k].value >> (64 - n));
  }
  if (words.empty()) return out;
  std::vector<Shared> flat = xor_contribution_bits(words, nbits);
  std::vector<std::vector<Shared>> bits(words.size());
  size_t m = 0;
  for (size_t k = 0; k < words.size(); ++k)
    for (int i = 0; i < nbits[k]; ++i) bits[k].push_back(flat[m++]);
  std::vector<Shared> lt = lt_public_batch(bits, tops);
  for (size_t k = 0; k < slot.size(); ++k) out[slot[k]] = lt[k];
  return out;
}

Shared Session::bersample(const Threshold& t) { return bersample_batch({t})[0]; }

Shared Session::uni(uint64_t M) {
  if (M == 0) throw ContractViolation("uniform range must be non-empty");
  GadgetScope scope(*this);
  ++ledger_.uniform_draws;
  if (M == 1) return constant(0);
  const int k = bits_for(M);
  const bool pow2 = (M & (M - 1)) == 0;
  for (;;) {
    ++ledger_.uniform_attempts;
    uint64_t w0 = contrib0_.next(), w1 = contrib1_.next();
    uint64_t mask = k == 64 ? ~uint64_t{0} : (uint64_t{1} << k) - 1;
    std::vector<Shared> bits = xor_contribution_bits({{w0 & mask, w1 & mask}}, {k});
    Shared u = constant(0);
    for (int i = 0; i < k; ++i) u = add(u, scale(bits[i], int64_t{1} << (k - 1 - i)));
    if (pow2) return u;
    Shared accept = lt_public_batch({bits}, {M})[0];
    ++ledger_.reveals;
    if (open(accept) == 1) return u;
  }
}

Shared Session::ge(const Shared& x) {
  int64_t v = peek(x);
  if (v > ge_bound_ || v < -ge_bound_)
    throw ContractViolation("comparison input " + std::to_string(v) + " outside the safe range");
  GadgetScope scope(*this);
  ++ledger_.comparisons;
  // Dealer mask r uniform in F_q with shared bits.
  const int nb = bits_for(q_);
  uint64_t r = random_element(dealer_);
  std::vector<Shared> rbits(nb);  // most significant first
  Shared rs = constant(0);
  for (int i = 0; i < nb; ++i) {
    uint64_t bit = (r >> (nb - 1 - i)) & 1;
    uint64_t s0 = random_element(dealer_);
    rbits[i] = Shared{s0, fsub(bit, s0), false};
    rs = add(rs, scale(rbits[i], int64_t{1} << (nb - 1 - i)));
  }
  ++ledger_.dealer_bit_masks;
  ledger_.dealer_elements += 2 * nb;
  // For balanced x, 2x mod q is even iff x >= 0. Its parity is c0 ^ r0 ^ [c < r].
  Shared a = scale(x, 2);
  Shared masked = add(a, rs);
  masked.tainted = x.tainted;
  uint64_t c = open(masked);
  std::vector<Shared> diff(nb);
  for (int i = 0; i < nb; ++i) {
    bool ci = (c >> (nb - 1 - i)) & 1;
    diff[i] = ci ? rsub_const(1, rbits[i]) : rbits[i];
  }
  std::vector<Shared> pre = prefix_or_batch({diff})[0];
  Shared wrap = constant(0);
  for (int i = 0; i < nb; ++i) {
    if ((c >> (nb - 1 - i)) & 1) continue;
    wrap = add(wrap, i == 0 ? pre[0] : sub(pre[i], pre[i - 1]));
  }
  Shared t = (c & 1) ? rsub_const(1, rbits[nb - 1]) : rbits[nb - 1];
  Shared tw = mul(t, wrap);
  Shared lsb = sub(add(t, wrap), scale(tw, 2));
  Shared out = rsub_const(1, lsb);
  out.tainted = x.tainted;
  return out;
}

}  // namespace dpmpc::mpc
