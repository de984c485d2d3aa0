#include "dpmpc/random.hpp"

#include <cmath>
#include <stdexcept>

namespace dpmpc {

namespace {

std::mt19937_64 make_engine(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomTape::RandomTape(uint64_t seed, uint64_t stream, bool keep_log)
    : eng_(make_engine(seed, stream)), seed_(seed), keep_log_(keep_log) {}

uint64_t RandomTape::next() {
  uint64_t w = eng_();
  ++draws_;
  if (keep_log_) log_.push_back(w);
  return w;
}

uint64_t ReplaySource::next() {
  if (pos_ >= words_.size()) throw std::out_of_range("replay tape exhausted");
  return words_[pos_++];
}

Threshold Threshold::from_probability(long double prob) {
  if (!(prob >= 0 && prob <= 1)) throw std::domain_error("probability must lie in [0, 1]");
  Threshold t;
  long double scaled = std::floor(std::ldexp(prob, 64));
  if (scaled >= std::ldexp(1.0L, 64)) {
    t.full = true;
    return t;
  }
  t.value = static_cast<uint64_t>(scaled);
  return t;
}

long double Threshold::realized() const {
  return full ? 1.0L : std::ldexp(static_cast<long double>(value), -64);
}

bool draw_bernoulli(WordSource& src, const Threshold& t) { return t.test(src.next()); }

int bits_for(uint64_t m) {
  int k = 0;
  while (k < 64 && (uint64_t{1} << k) < m) ++k;
  return k;
}

uint64_t draw_uniform(WordSource& src, uint64_t m, int* attempts) {
  if (m == 0) throw std::domain_error("uniform range must be non-empty");
  if (attempts) *attempts = 0;
  if (m == 1) return 0;
  int k = bits_for(m);
  uint64_t mask = k == 64 ? ~uint64_t{0} : (uint64_t{1} << k) - 1;
  for (;;) {
    if (attempts) ++*attempts;
    uint64_t u = src.next() & mask;
    if (u < m) return u;
  }
}

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  std::mt19937_64 e = make_engine(seed, stream ^ 0x9e3779b97f4a7c15ull);
  return e();
}

}  // namespace dpmpc
