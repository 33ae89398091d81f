#pragma once

#include "bois/common.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>

namespace bois {

// All randomness in the library flows through explicit seeds. Streams are
// derived by mixing, never by sharing generator state, so results do not
// depend on evaluation order or thread scheduling.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

// Mixes the raw bytes of a point into a seed. Keying Monte Carlo draws on the
// query point keeps moment estimates reproducible under any evaluation order.
inline std::uint64_t hash_point(std::uint64_t base, const Vec& x) {
  std::uint64_t h = derive_seed(base, static_cast<std::uint64_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x[i], sizeof(double));
    h = derive_seed(h, bits);
  }
  return h;
}

// Deterministic generator: mt19937_64 (fully specified by the standard) with
// hand-rolled uniform/normal transforms, so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one spare value cached between calls.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double two_pi_u2 = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(two_pi_u2);
    has_spare_ = true;
    return mag * std::cos(two_pi_u2);
  }

  Vec normal_vec(Eigen::Index n) {
    Vec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  Vec uniform_in(const BoxDomain& box) {
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = uniform(box.lower[i], box.upper[i]);
    return x;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bois
