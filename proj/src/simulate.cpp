#include "trek/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace trek {

Process parse_process(std::string_view spec) {
  if (spec == "bm") return Process{ProcessType::BrownianMotion, 1.0, 1.0};
  if (spec == "bb") return Process{ProcessType::BrownianBridge, 1.0, 1.0};
  if (spec == "ibm") return Process{ProcessType::IntegratedBrownianMotion, 1.0, 1.0};
  if (spec.substr(0, 3) == "ou:") {
    double theta = 0.0, sigma = 0.0;
    const std::string buf(spec);
    if (std::sscanf(buf.c_str(), "ou:%lf:%lf", &theta, &sigma) != 2) {
      throw std::invalid_argument("process spec: expected 'ou:theta:sigma', got '" + buf + "'");
    }
    if (!(theta > 0.0) || !(sigma > 0.0)) {
      throw std::invalid_argument("process spec: OU parameters must be > 0");
    }
    return Process{ProcessType::OrnsteinUhlenbeck, theta, sigma};
  }
  throw std::invalid_argument("process spec: unknown process '" + std::string(spec) + "'");
}

std::string format_process(const Process& process) {
  switch (process.type) {
    case ProcessType::BrownianMotion: return "bm";
    case ProcessType::BrownianBridge: return "bb";
    case ProcessType::IntegratedBrownianMotion: return "ibm";
    case ProcessType::OrnsteinUhlenbeck: {
      const auto shortest = [](double v) {
        char buf[64];
        if (v == std::floor(v) && std::abs(v) < 1e15) {
          std::snprintf(buf, sizeof(buf), "%.0f", v);
          return std::string(buf);
        }
        for (int precision = 1; precision <= 17; ++precision) {
          std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
          if (std::strtod(buf, nullptr) == v) break;
        }
        return std::string(buf);
      };
      return "ou:" + shortest(process.ou_theta) + ":" + shortest(process.ou_sigma);
    }
  }
  throw std::logic_error("format_process: unknown process type");
}

double true_second_moment(const Process& process, double z1, double z2) {
  const double lo = std::min(z1, z2);
  const double hi = std::max(z1, z2);
  switch (process.type) {
    case ProcessType::BrownianMotion:
      return lo;
    case ProcessType::BrownianBridge:
      return lo - z1 * z2;
    case ProcessType::IntegratedBrownianMotion:
      return hi * lo * lo / 2.0 - lo * lo * lo / 6.0;
    case ProcessType::OrnsteinUhlenbeck: {
      const double theta = process.ou_theta;
      const double s2 = process.ou_sigma * process.ou_sigma;
      return s2 * (std::exp(-theta * (hi - lo)) - std::exp(-theta * (z1 + z2))) / (2.0 * theta);
    }
  }
  throw std::logic_error("true_second_moment: unknown process type");
}

ProcessSpec ProcessSpec::uniform(Process process, int functions, int count, double noise,
                                 std::uint64_t seed) {
  ProcessSpec spec;
  spec.process = process;
  spec.functions = functions;
  spec.counts.assign(static_cast<std::size_t>(functions), count);
  spec.noise = noise;
  spec.seed = seed;
  return spec;
}

namespace {

void validate(const Process& process, double noise) {
  if (process.type == ProcessType::OrnsteinUhlenbeck &&
      (!(process.ou_theta > 0.0) || !(process.ou_sigma > 0.0))) {
    throw std::invalid_argument("sample: OU parameters must be > 0");
  }
  if (noise < 0.0) throw std::invalid_argument("sample: noise sd must be >= 0");
}

std::mt19937_64 function_rng(std::uint64_t seed, int function_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(function_index)};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<double> sample_values(const Process& process, const std::vector<double>& locations,
                                  double noise, std::mt19937_64& rng) {
  validate(process, noise);
  const auto m = locations.size();

  // Map each observation to a unique location so exact repeats share one
  // path value; drop zero-variance locations, where the path is pinned at 0.
  std::map<double, int> unique_index;
  std::vector<int> obs_to_active(m, -1);
  std::vector<double> active;
  for (std::size_t j = 0; j < m; ++j) {
    const double z = locations[j];
    auto found = unique_index.find(z);
    if (found == unique_index.end()) {
      int idx = -1;
      if (true_second_moment(process, z, z) > 0.0) {
        idx = static_cast<int>(active.size());
        active.push_back(z);
      }
      found = unique_index.emplace(z, idx).first;
    }
    obs_to_active[j] = found->second;
  }

  const auto a = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd path = Eigen::VectorXd::Zero(a);
  if (a > 0) {
    Eigen::MatrixXd cov(a, a);
    for (Eigen::Index j = 0; j < a; ++j) {
      for (Eigen::Index k = j; k < a; ++k) {
        cov(j, k) = true_second_moment(process, active[static_cast<std::size_t>(j)],
                                       active[static_cast<std::size_t>(k)]);
        cov(k, j) = cov(j, k);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> chol(cov);
    if (chol.info() != Eigen::Success) {
      cov.diagonal().array() += 1e-12;
      chol.compute(cov);
      if (chol.info() != Eigen::Success) {
        throw std::runtime_error("sample_values: covariance factorization failed even with jitter");
      }
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(a);
    for (Eigen::Index j = 0; j < a; ++j) z[j] = gauss(rng);
    path = chol.matrixL() * z;
  }

  std::vector<double> out(m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double value = obs_to_active[j] >= 0 ? path[obs_to_active[j]] : 0.0;
    out[j] = value + (noise > 0.0 ? noise * gauss(rng) : 0.0);
  }
  return out;
}

FunctionalDataset sample_dataset(const ProcessSpec& spec) {
  validate(spec.process, spec.noise);
  if (spec.functions < 1) throw std::invalid_argument("sample_dataset: need at least one function");
  if (static_cast<int>(spec.counts.size()) != spec.functions) {
    throw std::invalid_argument("sample_dataset: counts size " + std::to_string(spec.counts.size()) +
                                " does not match function count " + std::to_string(spec.functions));
  }
  std::vector<std::vector<double>> locations(static_cast<std::size_t>(spec.functions));
  std::vector<std::vector<double>> values(static_cast<std::size_t>(spec.functions));
  for (int i = 0; i < spec.functions; ++i) {
    const int r = spec.counts[static_cast<std::size_t>(i)];
    if (r < 1) throw std::invalid_argument("sample_dataset: counts must be >= 1");
    auto rng = function_rng(spec.seed, i);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    auto draw_locations = [&] {
      std::vector<double> x(static_cast<std::size_t>(r));
      for (auto& v : x) v = uniform(rng);
      std::sort(x.begin(), x.end());
      return x;
    };
    auto& xi = locations[static_cast<std::size_t>(i)];
    xi = draw_locations();
    try {
      values[static_cast<std::size_t>(i)] = sample_values(spec.process, xi, spec.noise, rng);
    } catch (const std::runtime_error&) {
      xi = draw_locations();  // one retry with fresh locations
      values[static_cast<std::size_t>(i)] = sample_values(spec.process, xi, spec.noise, rng);
    }
  }
  return FunctionalDataset(std::move(locations), std::move(values));
}

}  // namespace trek
