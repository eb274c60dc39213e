#pragma once

#include "rclqr/model.hpp"
#include "rclqr/simulator.hpp"

namespace rclqr {

/// The benchmark double-integrator pair used throughout the experiments:
/// two decoupled position/velocity chains with coupled risk through the
/// mixed-Gaussian noise on the first chain.
///
/// A = [1 .5 0 0; 0 1 0 0; 0 0 1 .5; 0 0 0 1], B = [.125 0; .5 0; 0 .125; 0 .5],
/// Q = diag(1, .1, 2, .2), R = I, rho_bar = 15. Noise statistics are
/// Monte-Carlo estimates from the clipped mixed-Gaussian sampler with a fixed
/// seed, so the preset is fully deterministic.
const ProblemData& paper_problem();

/// The clipped mixed-Gaussian noise model driving the preset.
const NoiseSampler& paper_noise_sampler();

/// Stabilizing initial policy for the open-loop-unstable preset:
/// K0 = [.5 .5 0 0; 0 0 .5 .5], l0 = [-6, 0].
Policy paper_initial_policy();

/// Seed and sample count used for the preset's noise-statistics estimate.
inline constexpr std::uint64_t kPaperStatsSeed = 90210;
inline constexpr int kPaperStatsSamples = 1000000;

/// Names accepted wherever a config allows a problem preset.
bool is_known_preset(const std::string& name);

}  // namespace rclqr
