#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trek/block_layout.hpp"

namespace trek {

struct GaussianKernel {
  double gamma;  // K(z1,z2) = exp(-gamma*(z1-z2)^2)
};

struct LaplacianKernel {
  double gamma;  // K(z1,z2) = exp(-gamma*|z1-z2|)
};

struct LinearKernel {};  // K(z1,z2) = z1*z2

struct PolynomialKernel {
  int degree;     // d >= 1
  double offset;  // K(z1,z2) = (z1*z2 + offset)^d
};

/// Kernel induced by a finite frame phi_1..phi_p with penalty pseudo-inverse:
/// K(z1,z2) = phi(z1)^T P phi(z2). The caller supplies P (already
/// pseudo-inverted); it is symmetrized on construction.
struct FrameKernel {
  std::function<Eigen::VectorXd(double)> basis;
  Eigen::MatrixXd penalty_pinv;
};

using Kernel = std::variant<GaussianKernel, LaplacianKernel, LinearKernel, PolynomialKernel, FrameKernel>;

Kernel make_gaussian(double gamma);
Kernel make_laplacian(double gamma);
Kernel make_linear();
Kernel make_polynomial(int degree, double offset);
Kernel make_frame_kernel(std::function<Eigen::VectorXd(double)> basis, Eigen::MatrixXd penalty_pinv);

/// Parses `gaussian:g`, `laplacian:g`, `linear`, `poly:d:c`.
Kernel parse_kernel(std::string_view spec);
/// Inverse of parse_kernel; throws for FrameKernel, which has no string form.
std::string format_kernel(const Kernel& kernel);

double eval(const Kernel& kernel, double z1, double z2);

/// Dense symmetric Gram matrix over all measurement locations, partitioned by
/// the layout. Symmetry is exact: the upper triangle is computed and mirrored.
struct GramMatrix {
  BlockLayout layout;
  Eigen::MatrixXd values;  // R x R

  Eigen::Block<const Eigen::MatrixXd> block(int i1, int i2) const {
    return values.block(layout.offset(i1), layout.offset(i2), layout.count(i1), layout.count(i2));
  }
};

GramMatrix gram(const Kernel& kernel, const BlockLayout& layout,
                const std::vector<std::vector<double>>& locations);

/// Frame matrix F with F(flat(i,j), k) = K(grid[k], X_ij); column k is the
/// frame vector f(grid[k]).
Eigen::MatrixXd frame(const Kernel& kernel, const BlockLayout& layout,
                      const std::vector<std::vector<double>>& locations,
                      const std::vector<double>& grid);

}  // namespace trek
