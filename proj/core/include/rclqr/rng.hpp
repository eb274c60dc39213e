#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>

namespace rclqr {

/// Mixes a 64-bit value through the splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from (base seed, purpose tag, index).
/// Distinct (purpose, index) pairs give statistically independent streams, so
/// parallel trials can each own a generator without coordination.
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose, std::uint64_t index = 0);

/// Deterministic random stream. Wraps mt19937_64 with hand-rolled normal and
/// sphere samplers so output is identical across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1).
  double uniform();

  /// Standard normal via Box-Muller (one cached value).
  double normal();

  /// Vector of iid standard normals.
  Eigen::VectorXd normal_vector(int n);

  /// Uniform draw from the unit sphere in R^n (Frobenius/2-norm 1).
  Eigen::VectorXd unit_sphere(int n);

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace rclqr
