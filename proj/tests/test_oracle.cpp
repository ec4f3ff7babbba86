#include <doctest.h>

#include <random>

#include "support/oracle.hpp"
#include "trek/block_diag.hpp"

using trek::BlockLayout;
namespace oracle = trek::oracle;

TEST_CASE("effective pair enumeration") {
  // (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ...
  CHECK(oracle::effective_index(0, 1) == 0);
  CHECK(oracle::effective_index(0, 2) == 1);
  CHECK(oracle::effective_index(1, 2) == 2);
  CHECK(oracle::effective_index(0, 3) == 3);
  CHECK(oracle::effective_index(2, 3) == 5);
}

TEST_CASE("elimination matrices") {
  SUBCASE("r = 2") {
    const Eigen::MatrixXd e = oracle::build_elimination(2);
    REQUIRE(e.rows() == 1);
    REQUIRE(e.cols() == 4);
    CHECK(e(0, 0) == 0.0);
    CHECK(e(0, 1) == 1.0);
    CHECK(e(0, 2) == 1.0);
    CHECK(e(0, 3) == 0.0);
  }
  SUBCASE("r = 3 rows follow the pair order") {
    const Eigen::MatrixXd e = oracle::build_elimination(3);
    REQUIRE(e.rows() == 3);
    REQUIRE(e.cols() == 9);
    // row 0 = pair (0,1): columns 3 (=0+1*3) and 1 (=1+0*3)
    CHECK(e(0, 3) == 1.0);
    CHECK(e(0, 1) == 1.0);
    // row 1 = pair (0,2): columns 6 and 2
    CHECK(e(1, 6) == 1.0);
    CHECK(e(1, 2) == 1.0);
    // row 2 = pair (1,2): columns 7 and 5
    CHECK(e(2, 7) == 1.0);
    CHECK(e(2, 5) == 1.0);
    CHECK(e.sum() == 6.0);
  }
  SUBCASE("E E^T = 2I exactly") {
    for (const int r : {2, 3, 4, 5, 7}) {
      const Eigen::MatrixXd e = oracle::build_elimination(r);
      const Eigen::MatrixXd gram = e * e.transpose();
      const long long pairs = static_cast<long long>(r) * (r - 1) / 2;
      CHECK((gram - 2.0 * Eigen::MatrixXd::Identity(pairs, pairs)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("r < 2 rejected") { CHECK_THROWS_AS(oracle::build_elimination(1), std::invalid_argument); }
  SUBCASE("projector E^T E / 2 is idempotent") {
    for (const int r : {2, 4}) {
      const Eigen::MatrixXd e = oracle::build_elimination(r);
      const Eigen::MatrixXd pi = 0.5 * e.transpose() * e;
      CHECK((pi * pi - pi).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK((pi - pi.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("dense khatri") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SUBCASE("1x1 blocks give elementwise squares") {
    const BlockLayout layout({1, 1, 1});
    Eigen::MatrixXd k(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) k(i, j) = unif(rng);
    k = ((k + k.transpose()) / 2.0).eval();
    const Eigen::MatrixXd dense = oracle::dense_khatri(trek::GramMatrix{layout, k});
    const Eigen::MatrixXd expected = k.cwiseProduct(k);
    CHECK((dense - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single block gives the plain Kronecker square") {
    const BlockLayout layout({2});
    Eigen::MatrixXd k(2, 2);
    k << 1.0, 2.0, 2.0, 5.0;
    const Eigen::MatrixXd dense = oracle::dense_khatri(trek::GramMatrix{layout, k});
    REQUIRE(dense.rows() == 4);
    CHECK(dense(0, 0) == 1.0);   // k00*k00
    CHECK(dense(0, 3) == 4.0);   // k01*k01
    CHECK(dense(3, 0) == 4.0);   // k10*k10
    CHECK(dense(1, 2) == 4.0);   // k01*k10
    CHECK(dense(3, 3) == 25.0);  // k11*k11
  }
  SUBCASE("size guard") {
    const BlockLayout layout({25});  // 625 > 400
    CHECK_THROWS_AS(oracle::dense_khatri(trek::GramMatrix{layout, Eigen::MatrixXd::Identity(25, 25)}),
                    std::invalid_argument);
  }
}

TEST_CASE("dense effective solve") {
  SUBCASE("zero data gives zero coefficients") {
    const BlockLayout layout({3, 2});
    const auto k = trek::gram(trek::make_gaussian(1.0), layout, {{0.1, 0.5, 0.9}, {0.3, 0.7}});
    const Eigen::VectorXd a = oracle::dense_solve_effective(k, 0.05, {{0, 0, 0}, {0, 0}});
    CHECK(a.size() == layout.total_pairs());
    CHECK(a.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identity gram, one pair: a = 2uv/(1+eta)") {
    const BlockLayout layout({2});
    const trek::GramMatrix k{layout, Eigen::MatrixXd::Identity(2, 2)};
    const double u = 1.7, v = -0.6, eta = 0.05;
    const Eigen::VectorXd a = oracle::dense_solve_effective(k, eta, {{u, v}});
    REQUIRE(a.size() == 1);
    CHECK(a(0) == doctest::Approx(2.0 * u * v / (1.0 + eta)).epsilon(1e-12));
  }
}
