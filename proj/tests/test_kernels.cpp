#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "trek/kernels.hpp"

using trek::BlockLayout;
using trek::Kernel;

TEST_CASE("kernel closed forms") {
  CHECK(trek::eval(trek::make_gaussian(200.0), 0.4, 0.4) == 1.0);
  CHECK(trek::eval(trek::make_linear(), 2.0, 3.0) == 6.0);
  CHECK(trek::eval(trek::make_laplacian(20.0), 0.0, 0.1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(trek::eval(trek::make_polynomial(10, 0.2), 0.5, 0.5) ==
        doctest::Approx(std::pow(0.45, 10)).epsilon(1e-15));
}

TEST_CASE("kernel parameter validation") {
  CHECK_THROWS_AS(trek::make_gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(trek::make_gaussian(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(trek::make_laplacian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(trek::make_polynomial(0, 0.2), std::invalid_argument);
}

TEST_CASE("kernel spec strings") {
  CHECK(trek::format_kernel(trek::parse_kernel("gaussian:200")) == "gaussian:200");
  CHECK(trek::format_kernel(trek::parse_kernel("laplacian:20")) == "laplacian:20");
  CHECK(trek::format_kernel(trek::parse_kernel("linear")) == "linear");
  CHECK(trek::format_kernel(trek::parse_kernel("poly:10:0.2")) == "poly:10:0.2");
  CHECK(trek::eval(trek::parse_kernel("poly:10:0.2"), 1.0, 1.0) ==
        doctest::Approx(std::pow(1.2, 10)).epsilon(1e-15));
  CHECK_THROWS_AS(trek::parse_kernel("gaussian"), std::invalid_argument);
  CHECK_THROWS_AS(trek::parse_kernel("rbf:1"), std::invalid_argument);
  CHECK_THROWS_AS(trek::parse_kernel("poly:2.5:0"), std::invalid_argument);
}

TEST_CASE("eval symmetry is exact for closed forms") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const Kernel kernels[] = {trek::make_gaussian(3.0), trek::make_laplacian(0.7), trek::make_linear(),
                            trek::make_polynomial(5, 0.3)};
  for (const auto& kernel : kernels) {
    for (int trial = 0; trial < 1000; ++trial) {
      const double z1 = unif(rng), z2 = unif(rng);
      CHECK(trek::eval(kernel, z1, z2) == trek::eval(kernel, z2, z1));
    }
  }
}

TEST_CASE("precomputed frame kernel") {
  // Orthonormal features with identity penalty reduce to their dot product.
  const auto basis = [](double z) {
    Eigen::VectorXd phi(3);
    phi << 1.0, std::sqrt(2.0) * std::sin(M_PI * z), std::sqrt(2.0) * std::cos(M_PI * z);
    return phi;
  };
  const Kernel kernel = trek::make_frame_kernel(basis, Eigen::MatrixXd::Identity(3, 3));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double z1 = unif(rng), z2 = unif(rng);
    CHECK(trek::eval(kernel, z1, z2) == doctest::Approx(basis(z1).dot(basis(z2))).epsilon(1e-14));
    CHECK(trek::eval(kernel, z1, z2) == doctest::Approx(trek::eval(kernel, z2, z1)).epsilon(1e-14));
  }
  // The penalty pseudo-inverse is symmetrized on intake.
  Eigen::MatrixXd skew(2, 2);
  skew << 1.0, 0.5, 0.1, 2.0;
  const auto pair_basis = [](double z) { return (Eigen::VectorXd(2) << z, z * z).finished(); };
  const Kernel frame = trek::make_frame_kernel(pair_basis, skew);
  CHECK(std::get<trek::FrameKernel>(frame).penalty_pinv(0, 1) == doctest::Approx(0.3));
  CHECK(std::get<trek::FrameKernel>(frame).penalty_pinv(1, 0) == doctest::Approx(0.3));
}

TEST_CASE("gram examples") {
  SUBCASE("linear kernel outer product") {
    const auto g = trek::gram(trek::make_linear(), BlockLayout({2}), {{1.0, 2.0}});
    Eigen::MatrixXd expected(2, 2);
    expected << 1, 2, 2, 4;
    CHECK((g.values - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single point") {
    const auto g = trek::gram(trek::make_laplacian(2.0), BlockLayout({1}), {{0.3}});
    CHECK(g.values.rows() == 1);
    CHECK(g.values(0, 0) == 1.0);
  }
  SUBCASE("gaussian two points") {
    const auto g = trek::gram(trek::make_gaussian(1.0), BlockLayout({2}), {{0.0, 1.0}});
    CHECK(g.values(0, 0) == 1.0);
    CHECK(g.values(1, 1) == 1.0);
    CHECK(g.values(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(g.values(0, 1) == g.values(1, 0));
  }
}

TEST_CASE("gram rejects mismatched location lists") {
  const BlockLayout layout({2, 3});
  CHECK_THROWS_WITH_AS(trek::gram(trek::make_linear(), layout, {{1.0, 2.0}, {1.0}}),
                       doctest::Contains("block 1"), std::invalid_argument);
  CHECK_THROWS_AS(trek::gram(trek::make_linear(), layout, {{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("gram is exactly symmetric and psd up to numerical rank") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Kernel kernels[] = {trek::make_gaussian(50.0), trek::make_laplacian(5.0), trek::make_linear(),
                            trek::make_polynomial(4, 0.2)};
  for (const auto& kernel : kernels) {
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 5);
      std::vector<int> counts;
      std::vector<std::vector<double>> locations;
      int total = 0;
      for (int i = 0; i < n; ++i) {
        const int r = 1 + static_cast<int>(rng() % 10);
        if (total + r > 50) break;
        total += r;
        counts.push_back(r);
        std::vector<double> x(static_cast<std::size_t>(r));
        for (auto& v : x) v = unif(rng);
        locations.push_back(std::move(x));
      }
      if (counts.empty()) continue;
      const auto g = trek::gram(kernel, BlockLayout(counts), locations);
      CHECK((g.values - g.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.values);
      const double max_eig = eig.eigenvalues().maxCoeff();
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * std::max(max_eig, 1.0));
    }
  }
}

TEST_CASE("frame examples") {
  SUBCASE("linear kernel row") {
    const auto f = trek::frame(trek::make_linear(), BlockLayout({1}), {{2.0}}, {0.0, 1.0, 3.0});
    CHECK(f.rows() == 1);
    CHECK(f(0, 0) == 0.0);
    CHECK(f(0, 1) == 2.0);
    CHECK(f(0, 2) == 6.0);
  }
  SUBCASE("gaussian single entry") {
    const auto f = trek::frame(trek::make_gaussian(1.0), BlockLayout({1}), {{0.0}}, {1.0});
    CHECK(f(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  }
  SUBCASE("grid equal to flattened locations reproduces the gram") {
    const std::vector<std::vector<double>> locations = {{0.1, 0.4}, {0.2, 0.9, 0.5}};
    const BlockLayout layout({2, 3});
    const auto kernel = trek::make_gaussian(3.0);
    const auto g = trek::gram(kernel, layout, locations);
    const auto f = trek::frame(kernel, layout, locations, {0.1, 0.4, 0.2, 0.9, 0.5});
    CHECK((f - g.values).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("empty grid rejected") {
    CHECK_THROWS_AS(trek::frame(trek::make_linear(), BlockLayout({1}), {{1.0}}, {}),
                    std::invalid_argument);
  }
}
