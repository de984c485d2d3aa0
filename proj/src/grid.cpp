#include "dpmpc/grid.hpp"

#include <cmath>
#include <limits>

namespace dpmpc {

double pow2(int p) { return std::ldexp(1.0, p); }

bool on_grid(double v, int p) {
  double s = std::ldexp(v, p);
  return std::isfinite(s) && std::floor(s) == s;
}

int64_t to_steps(double v, int p) {
  double s = std::ldexp(v, p);
  if (!std::isfinite(s) || std::floor(s) != s)
    throw EncodingError("value " + std::to_string(v) + " is not on the 2^-" + std::to_string(p) + " grid");
  if (std::fabs(s) > 9.0e15) throw RangeError("value too large for exact grid arithmetic");
  return static_cast<int64_t>(s);
}

GridSpec::GridSpec(int p, double B, bool half_open) : p_(p), B_(B), half_open_(half_open) {
  if (p < 0 || p > 40) throw ParameterError("precision p must lie in [0, 40]");
  if (!(B > 0)) throw ParameterError("grid bound must be positive");
  if (!on_grid(B, p)) throw ParameterError("grid bound must be a multiple of 2^-p");
  step_ = std::ldexp(1.0, -p);
  n_ = to_steps(B, p);
}

double GridSpec::value_of(int64_t i) const {
  if (i < 0 || i >= count()) throw RangeError("grid index out of range");
  return std::ldexp(static_cast<double>(i - n_), -p_);
}

int64_t GridSpec::index_of(double y) const { return index_of_steps(to_steps(y, p_)); }

int64_t GridSpec::index_of_steps(int64_t k) const {
  int64_t i = k + n_;
  if (i < 0 || i >= count()) throw RangeError("grid point outside the support");
  return i;
}

double quantize(double x, int p, int e) {
  if (!(std::fabs(x) < std::ldexp(1.0, e - 1)))
    throw RangeError("|x| must be below 2^(e-1) for quantization");
  return quantize(x, p);
}

double quantize(double x, int p) {
  if (!std::isfinite(x)) throw RangeError("quantize requires a finite value");
  return std::ldexp(std::floor(std::ldexp(x, p)), -p);
}

FieldConfig::FieldConfig(uint64_t q_, int e_, int p_, int ell_) : q(q_), e(e_), p(p_), ell(ell_) {
  if (q < 3 || q % 2 == 0 || !is_prime(q)) throw ParameterError("q must be an odd prime");
  if (q >= (uint64_t{1} << 62)) throw ParameterError("moduli of 62 bits or more are not supported");
  if (e < 1 || p < 0 || ell < 0) throw ParameterError("invalid (e, p, ell)");
  if (p + e >= 62 || static_cast<long double>(q) <= std::ldexp(1.0L, p + e))
    throw ParameterError("q must exceed 2^(p+e)");
}

int64_t FieldConfig::max_steps() const {
  // |x| < 2^(e-1+ell) on the 2^-p grid, clipped to the balanced range.
  int k = e - 1 + ell + p;
  int64_t lim = k >= 62 ? std::numeric_limits<int64_t>::max() : (int64_t{1} << k) - 1;
  return lim < half() ? lim : half();
}

int FieldConfig::bits() const {
  int b = 0;
  for (uint64_t v = q; v; v >>= 1) ++b;
  return b;
}

namespace {

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t powmod(uint64_t a, uint64_t d, uint64_t m) {
  uint64_t r = 1;
  a %= m;
  while (d) {
    if (d & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    d >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t sp : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % sp == 0) return n == sp;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic Miller-Rabin bases for all 64-bit n.
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

uint64_t next_prime_above(uint64_t n) {
  uint64_t c = n + 1;
  while (!is_prime(c)) ++c;
  return c;
}

int64_t balance(uint64_t v, uint64_t q) {
  v %= q;
  return v > (q - 1) / 2 ? static_cast<int64_t>(v) - static_cast<int64_t>(q) : static_cast<int64_t>(v);
}

uint64_t unbalance(int64_t v, uint64_t q) {
  int64_t m = v % static_cast<int64_t>(q);
  return static_cast<uint64_t>(m < 0 ? m + static_cast<int64_t>(q) : m);
}

int64_t encode(double x, const FieldConfig& cfg) { return encode_steps(to_steps(x, cfg.p), cfg); }

int64_t encode_steps(int64_t steps, const FieldConfig& cfg) {
  if (steps > cfg.max_steps() || steps < -cfg.max_steps())
    throw EncodingError("value outside the encodable range S_{e+ell,p}");
  return balance(unbalance(steps, cfg.q), cfg.q);
}

int64_t decode_steps(int64_t v, const FieldConfig& cfg) {
  int64_t b = v < 0 ? balance(unbalance(v, cfg.q), cfg.q) : balance(static_cast<uint64_t>(v), cfg.q);
  if (b > cfg.max_steps() || b < -cfg.max_steps())
    throw EncodingError("field element does not represent a value of S_{e+ell,p}");
  return b;
}

double decode(int64_t v, const FieldConfig& cfg) {
  return std::ldexp(static_cast<double>(decode_steps(v, cfg)), -cfg.p);
}

FieldConfig protocol_field(double E, double L, int p, int min_bits) {
  if (!(E > 0) || !(L > 0)) throw ParameterError("E and L must be positive");
  int e = 1;
  while (std::ldexp(1.0, e - 1) < E) ++e;
  int ell = 0;
  while (std::ldexp(1.0, e - 1 + ell) < 2 * E + 2 * L) ++ell;
  int bits = p + e + ell;
  if (min_bits > bits) bits = min_bits;
  if (bits >= 61) throw ParameterError("parameters need a field of 61 bits or more");
  uint64_t q = next_prime_above(uint64_t{1} << bits);
  FieldConfig cfg(q, e, p, ell);
  return cfg;
}

std::string to_string(const GridSpec& g) {
  return std::string(g.half_open() ? "B" : "A") + "_{" + std::to_string(g.p()) + "," +
         std::to_string(g.bound()) + "}";
}

}  // namespace dpmpc
