#pragma once

#include <cstdint>
#include <random>

namespace fracdrift {

/// mt19937_64 has a fully specified output sequence, so draws are portable.
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of stream `stream` under master seed `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

inline Engine make_engine(std::uint64_t master, std::uint64_t stream) {
  return Engine(derive_seed(master, stream));
}

/// Standard normals from an engine via the Box-Muller transform.
///
/// Each pair of 64-bit draws yields two normals: u1, u2 are the top 53 bits scaled
/// to [0, 1), and the pair is (r cos(2πu2), r sin(2πu2)) with r = sqrt(-2 ln(1 - u1)).
/// std::normal_distribution is not used because its algorithm is
/// implementation-defined.
class NormalSource {
public:
  explicit NormalSource(Engine& engine) : engine_(&engine) {}

  double operator()();

private:
  Engine* engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fracdrift
