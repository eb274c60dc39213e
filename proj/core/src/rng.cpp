#include "rclqr/rng.hpp"

#include <cmath>
#include <numbers>

namespace rclqr {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose, std::uint64_t index) {
  std::uint64_t h = splitmix64(base);
  for (unsigned char c : purpose) {
    h = splitmix64(h ^ c);
  }
  return splitmix64(h ^ index);
}

double RngStream::uniform() {
  // 53-bit mantissa fill; engine output is fully specified by the standard.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd RngStream::normal_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd RngStream::unit_sphere(int n) {
  Eigen::VectorXd v = normal_vector(n);
  double norm = v.norm();
  while (norm < 1e-300) {
    v = normal_vector(n);
    norm = v.norm();
  }
  return v / norm;
}

}  // namespace rclqr
