#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dpmpc {

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// 2^p as an exact floating value.
double pow2(int p);

// True when v * 2^p is an integer (v lies on the 2^-p grid).
bool on_grid(double v, int p);

// Grid value v expressed in grid steps, v * 2^p. Throws EncodingError off-grid.
int64_t to_steps(double v, int p);

// Fixed-point grid [-B, B] ∩ 2^-p Z, optionally with the top point removed.
class GridSpec {
 public:
  GridSpec(int p, double B, bool half_open);

  int p() const { return p_; }
  double bound() const { return B_; }
  bool half_open() const { return half_open_; }
  double step() const { return step_; }
  int64_t bound_steps() const { return n_; }
  int64_t count() const { return half_open_ ? 2 * n_ : 2 * n_ + 1; }

  double value_of(int64_t i) const;
  int64_t index_of(double y) const;
  // Index of a point given in grid steps (y * 2^p).
  int64_t index_of_steps(int64_t k) const;
  int64_t steps_of(int64_t i) const { return i - n_; }

  bool operator==(const GridSpec& o) const {
    return p_ == o.p_ && n_ == o.n_ && half_open_ == o.half_open_;
  }

 private:
  int p_;
  double B_;
  bool half_open_;
  double step_;
  int64_t n_;
};

// 2^-p floor(x 2^p); requires |x| < 2^(e-1).
double quantize(double x, int p, int e);
double quantize(double x, int p);

// Prime field used for the fixed-point encoding. Values of S_{e+ell,p}
// (|x| < 2^(e-1+ell) on the 2^-p grid) encode injectively.
struct FieldConfig {
  uint64_t q = 0;
  int e = 0;
  int p = 0;
  int ell = 0;

  FieldConfig() = default;
  FieldConfig(uint64_t q, int e, int p, int ell = 0);

  int64_t half() const { return static_cast<int64_t>((q - 1) / 2); }
  // Largest grid-step magnitude accepted by encode/decode.
  int64_t max_steps() const;
  int bits() const;
};

bool is_prime(uint64_t n);
uint64_t next_prime_above(uint64_t n);

// Balanced representative of v mod q in [-(q-1)/2, (q-1)/2].
int64_t balance(uint64_t v, uint64_t q);
uint64_t unbalance(int64_t v, uint64_t q);

// 2^p x mod q, balanced.
int64_t encode(double x, const FieldConfig& cfg);
int64_t encode_steps(int64_t steps, const FieldConfig& cfg);
// Inverse of encode; accepts balanced or unbalanced input.
double decode(int64_t v, const FieldConfig& cfg);
int64_t decode_steps(int64_t v, const FieldConfig& cfg);

// Field for the protocols on (E, L, p): e = ceil(log2 E) + 1, headroom ell
// such that 2^(e-1+ell) >= 2E + 2L, and q the smallest prime above
// 2^max(p+e+ell, min_bits).
FieldConfig protocol_field(double E, double L, int p, int min_bits = 0);

std::string to_string(const GridSpec& g);

}  // namespace dpmpc
