#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dpmpc {

// Source of uniform 64-bit words. Every sampler consumes randomness only
// through this interface so that tapes can be replayed or injected.
class WordSource {
 public:
  virtual ~WordSource() = default;
  virtual uint64_t next() = 0;
};

// Seeded mt19937_64 stream with an optional log of every word drawn.
class RandomTape : public WordSource {
 public:
  explicit RandomTape(uint64_t seed, uint64_t stream = 0, bool keep_log = false);

  uint64_t next() override;

  uint64_t seed() const { return seed_; }
  uint64_t draws() const { return draws_; }
  const std::vector<uint64_t>& log() const { return log_; }

 private:
  std::mt19937_64 eng_;
  uint64_t seed_;
  uint64_t draws_ = 0;
  bool keep_log_;
  std::vector<uint64_t> log_;
};

// Word-wise XOR of two sources, the plaintext image of two parties'
// combined contributions.
class XorSource : public WordSource {
 public:
  XorSource(WordSource& a, WordSource& b) : a_(a), b_(b) {}
  uint64_t next() override { return a_.next() ^ b_.next(); }

 private:
  WordSource& a_;
  WordSource& b_;
};

// Replays a fixed list of words; throws when exhausted.
class ReplaySource : public WordSource {
 public:
  explicit ReplaySource(std::vector<uint64_t> words) : words_(std::move(words)) {}
  uint64_t next() override;
  size_t remaining() const { return words_.size() - pos_; }

 private:
  std::vector<uint64_t> words_;
  size_t pos_ = 0;
};

// 64-bit fixed-point Bernoulli threshold: a draw w succeeds iff w < value,
// or always when full is set (probability 1).
struct Threshold {
  uint64_t value = 0;
  bool full = false;

  static Threshold from_probability(long double prob);
  // Probability actually realized, value / 2^64.
  long double realized() const;
  bool test(uint64_t w) const { return full || w < value; }
};

bool draw_bernoulli(WordSource& src, const Threshold& t);

// Number of bits needed for values in [0, m).
int bits_for(uint64_t m);

// Uniform integer in [0, m): low bits of one word per attempt, redrawn when
// the value reaches m. Reports the number of attempts.
uint64_t draw_uniform(WordSource& src, uint64_t m, int* attempts = nullptr);

// Independent seed for a named sub-stream.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

}  // namespace dpmpc
