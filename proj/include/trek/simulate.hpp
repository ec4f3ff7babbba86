#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "trek/smoother.hpp"

namespace trek {

enum class ProcessType { BrownianMotion, BrownianBridge, IntegratedBrownianMotion, OrnsteinUhlenbeck };

struct Process {
  ProcessType type = ProcessType::BrownianMotion;
  double ou_theta = 1.0;
  double ou_sigma = 1.0;
};

/// Parses `bm`, `bb`, `ibm`, `ou:theta:sigma`.
Process parse_process(std::string_view spec);
std::string format_process(const Process& process);

/// Closed-form second moment E[Y(z1) Y(z2)] of the zero-mean process.
double true_second_moment(const Process& process, double z1, double z2);

struct ProcessSpec {
  Process process;
  double noise = 0.3;           // observation noise sd
  int functions = 20;           // n
  std::vector<int> counts;      // r_i, one entry per function
  std::uint64_t seed = 0;

  static ProcessSpec uniform(Process process, int functions, int count, double noise,
                             std::uint64_t seed);
};

/// Jointly Gaussian path values at the given locations plus iid N(0, noise^2)
/// perturbations, drawn from rng. Exact duplicate locations share one path
/// value; locations where the process variance vanishes are pinned at zero.
/// Path correlation comes from a Cholesky factor of the covariance matrix,
/// retried once with 1e-12 diagonal jitter; throws if that still fails.
std::vector<double> sample_values(const Process& process, const std::vector<double>& locations,
                                  double noise, std::mt19937_64& rng);

/// Locations iid Uniform[0,1], sorted within each function; values from
/// sample_values. Function i uses its own generator seeded from (seed, i),
/// so changing the number of functions does not reshuffle earlier ones. A
/// function whose covariance cannot be factorized resamples its locations
/// once before giving up.
FunctionalDataset sample_dataset(const ProcessSpec& spec);

}  // namespace trek
