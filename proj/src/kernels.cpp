#include "trek/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "trek/threading.hpp"

namespace trek {

Kernel make_gaussian(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gaussian kernel: gamma must be > 0");
  return GaussianKernel{gamma};
}

Kernel make_laplacian(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("laplacian kernel: gamma must be > 0");
  return LaplacianKernel{gamma};
}

Kernel make_linear() { return LinearKernel{}; }

Kernel make_polynomial(int degree, double offset) {
  if (degree < 1) throw std::invalid_argument("polynomial kernel: degree must be >= 1");
  return PolynomialKernel{degree, offset};
}

Kernel make_frame_kernel(std::function<Eigen::VectorXd(double)> basis, Eigen::MatrixXd penalty_pinv) {
  if (!basis) throw std::invalid_argument("frame kernel: basis callable is empty");
  if (penalty_pinv.rows() != penalty_pinv.cols()) {
    throw std::invalid_argument("frame kernel: penalty pseudo-inverse must be square");
  }
  penalty_pinv = ((penalty_pinv + penalty_pinv.transpose()) / 2.0).eval();
  return FrameKernel{std::move(basis), std::move(penalty_pinv)};
}

namespace {

double parse_positive_real(std::string_view text, const char* what) {
  char* end = nullptr;
  const std::string buf(text);
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty()) {
    throw std::invalid_argument(std::string("kernel spec: cannot parse ") + what + " from '" + buf + "'");
  }
  return value;
}

}  // namespace

Kernel parse_kernel(std::string_view spec) {
  const auto split = [](std::string_view s) {
    std::vector<std::string_view> parts;
    while (!s.empty()) {
      const auto pos = s.find(':');
      parts.push_back(s.substr(0, pos));
      if (pos == std::string_view::npos) break;
      s.remove_prefix(pos + 1);
    }
    return parts;
  };
  const auto parts = split(spec);
  if (parts.empty()) throw std::invalid_argument("kernel spec: empty string");
  const std::string_view name = parts[0];
  if (name == "linear") {
    if (parts.size() != 1) throw std::invalid_argument("kernel spec: linear takes no parameters");
    return make_linear();
  }
  if (name == "gaussian" || name == "laplacian") {
    if (parts.size() != 2) {
      throw std::invalid_argument(std::string("kernel spec: expected '") + std::string(name) + ":gamma'");
    }
    const double gamma = parse_positive_real(parts[1], "gamma");
    return name == "gaussian" ? make_gaussian(gamma) : make_laplacian(gamma);
  }
  if (name == "poly") {
    if (parts.size() != 3) throw std::invalid_argument("kernel spec: expected 'poly:degree:offset'");
    const double d = parse_positive_real(parts[1], "degree");
    const double c = parse_positive_real(parts[2], "offset");
    if (d != static_cast<int>(d)) throw std::invalid_argument("kernel spec: degree must be an integer");
    return make_polynomial(static_cast<int>(d), c);
  }
  throw std::invalid_argument("kernel spec: unknown kernel '" + std::string(name) + "'");
}

std::string format_kernel(const Kernel& kernel) {
  struct Visitor {
    std::string operator()(const GaussianKernel& k) const { return "gaussian:" + trim(k.gamma); }
    std::string operator()(const LaplacianKernel& k) const { return "laplacian:" + trim(k.gamma); }
    std::string operator()(const LinearKernel&) const { return "linear"; }
    std::string operator()(const PolynomialKernel& k) const {
      return "poly:" + std::to_string(k.degree) + ":" + trim(k.offset);
    }
    std::string operator()(const FrameKernel&) const {
      throw std::invalid_argument("frame kernel has no string form");
    }
    static std::string trim(double v) {
      // Shortest representation that parses back to the same double.
      char buf[64];
      if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
      }
      for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
      }
      return buf;
    }
  };
  return std::visit(Visitor{}, kernel);
}

double eval(const Kernel& kernel, double z1, double z2) {
  struct Visitor {
    double z1, z2;
    double operator()(const GaussianKernel& k) const {
      const double d = z1 - z2;
      return std::exp(-k.gamma * d * d);
    }
    double operator()(const LaplacianKernel& k) const { return std::exp(-k.gamma * std::abs(z1 - z2)); }
    double operator()(const LinearKernel&) const { return z1 * z2; }
    double operator()(const PolynomialKernel& k) const { return std::pow(z1 * z2 + k.offset, k.degree); }
    double operator()(const FrameKernel& k) const {
      const Eigen::VectorXd f1 = k.basis(z1);
      const Eigen::VectorXd f2 = k.basis(z2);
      return f1.dot(k.penalty_pinv * f2);
    }
  };
  return std::visit(Visitor{z1, z2}, kernel);
}

namespace {

void check_locations(const BlockLayout& layout, const std::vector<std::vector<double>>& locations,
                     const char* where) {
  if (static_cast<int>(locations.size()) != layout.blocks()) {
    throw std::invalid_argument(std::string(where) + ": got " + std::to_string(locations.size()) +
                                " location blocks, layout expects " + std::to_string(layout.blocks()));
  }
  for (int i = 0; i < layout.blocks(); ++i) {
    if (static_cast<int>(locations[i].size()) != layout.count(i)) {
      throw std::invalid_argument(std::string(where) + ": block " + std::to_string(i) + " has " +
                                  std::to_string(locations[i].size()) + " locations, layout expects " +
                                  std::to_string(layout.count(i)));
    }
  }
}

std::vector<double> flatten(const std::vector<std::vector<double>>& locations, long long total) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(total));
  for (const auto& block : locations) flat.insert(flat.end(), block.begin(), block.end());
  return flat;
}

}  // namespace

GramMatrix gram(const Kernel& kernel, const BlockLayout& layout,
                const std::vector<std::vector<double>>& locations) {
  check_locations(layout, locations, "gram");
  const auto flat = flatten(locations, layout.total());
  const auto R = static_cast<Eigen::Index>(flat.size());
  Eigen::MatrixXd values(R, R);
  detail::parallel_for(0, static_cast<int>(R), [&](int row) {
    for (Eigen::Index col = row; col < R; ++col) {
      values(row, col) = eval(kernel, flat[static_cast<std::size_t>(row)], flat[static_cast<std::size_t>(col)]);
    }
  });
  // Mirror the upper triangle so symmetry holds exactly.
  for (Eigen::Index col = 0; col < R; ++col)
    for (Eigen::Index row = col + 1; row < R; ++row) values(row, col) = values(col, row);
  return GramMatrix{layout, std::move(values)};
}

Eigen::MatrixXd frame(const Kernel& kernel, const BlockLayout& layout,
                      const std::vector<std::vector<double>>& locations,
                      const std::vector<double>& grid) {
  check_locations(layout, locations, "frame");
  if (grid.empty()) throw std::invalid_argument("frame: grid is empty");
  const auto flat = flatten(locations, layout.total());
  const auto R = static_cast<Eigen::Index>(flat.size());
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd values(R, m);
  detail::parallel_for(0, static_cast<int>(m), [&](int k) {
    for (Eigen::Index row = 0; row < R; ++row) {
      values(row, k) = eval(kernel, grid[static_cast<std::size_t>(k)], flat[static_cast<std::size_t>(row)]);
    }
  });
  return values;
}

}  // namespace trek
