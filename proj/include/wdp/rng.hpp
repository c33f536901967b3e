#pragma once

// Reproducible random number generation for parallel Monte Carlo.
//
// Seed derivation is counter-based so ensembles are order-independent:
//   path_seed(master, i) = splitmix64(splitmix64(master) + (i+1) * GOLDEN)
// with GOLDEN = 0x9E3779B97F4A7C15. The derived seed feeds a std::mt19937_64,
// whose output sequence is fixed by the C++ standard. Uniform doubles take
// the top 53 bits; normals use Box-Muller; exponentials use inversion. All
// of this is pinned by golden-value tests, so any change is an interface
// break.

#include <cmath>
#include <cstdint>
#include <random>

namespace wdp {

inline constexpr std::uint64_t kSeedGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for path index i in an ensemble keyed by master_seed.
inline std::uint64_t derive_path_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) + (index + 1) * kSeedGolden);
}

// Deterministic stream of uniforms / normals / exponentials.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one spare value is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // in (0,1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Exponential with given rate, by inversion.
  double exponential(double rate) { return -std::log(1.0 - uniform01()) / rate; }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wdp
