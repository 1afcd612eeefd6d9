#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fadecv/gaussian.hpp"
#include "oracles.hpp"

using namespace fadecv;
using Catch::Approx;

TEST_CASE("two-mode squeezed vacuum construction", "[gaussian]") {
  SECTION("v = 1 is two vacua") {
    REQUIRE(tmsv_state(1.0).matrix().isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-15));
  }
  SECTION("off-diagonal magnitude is sqrt(v^2 - 1)") {
    const auto g = tmsv_state(10.0);
    REQUIRE(g(0, 2) == Approx(std::sqrt(99.0)).epsilon(1e-14));
    REQUIRE(g(1, 3) == Approx(-std::sqrt(99.0)).epsilon(1e-14));
    REQUIRE(g(0, 0) == 10.0);
  }
  SECTION("pure for any v") {
    for (const double v : {1.0, 2.5, 10.0, 100.0}) {
      const auto nu = symplectic_eigenvalues(tmsv_state(v));
      REQUIRE(nu[0] == Approx(1.0).margin(1e-9));
      REQUIRE(nu[1] == Approx(1.0).margin(1e-9));
    }
  }
  SECTION("v below 1 is rejected") {
    REQUIRE_THROWS_AS(tmsv_state(0.99), std::domain_error);
  }
}

TEST_CASE("loss channel on one mode", "[gaussian]") {
  SECTION("identity channel leaves the state untouched") {
    const auto g = tmsv_state(7.0);
    REQUIRE(apply_loss_channel(g, 1, 1.0, 0.0).matrix().isApprox(g.matrix(), 1e-12));
  }
  SECTION("full loss leaves vacuum in mode B") {
    const auto g = apply_loss_channel(tmsv_state(5.0), 1, 0.0, 0.0);
    REQUIRE(g.block(1, 1).isApprox(Eigen::Matrix2d::Identity(), 1e-14));
    REQUIRE(g.block(0, 1).cwiseAbs().maxCoeff() == Approx(0.0).margin(1e-14));
    REQUIRE(g.block(0, 0).isApprox(5.0 * Eigen::Matrix2d::Identity(), 1e-14));
  }
  SECTION("half transmittance of tmsv(3)") {
    const auto g = apply_loss_channel(tmsv_state(3.0), 1, 0.5, 0.0);
    REQUIRE(g.block(1, 1).isApprox(2.0 * Eigen::Matrix2d::Identity(), 1e-14));
    const double off = std::sqrt(0.5) * std::sqrt(8.0);
    REQUIRE(g(0, 2) == Approx(off).epsilon(1e-14));
    REQUIRE(g(1, 3) == Approx(-off).epsilon(1e-14));
  }
  SECTION("excess noise adds to the lossy mode only") {
    const auto g = apply_loss_channel(tmsv_state(3.0), 1, 0.5, 0.25);
    REQUIRE(g(2, 2) == Approx(2.25).epsilon(1e-14));
    REQUIRE(g(0, 0) == Approx(3.0).epsilon(1e-14));
  }
  SECTION("transmittance outside [0,1] is rejected") {
    REQUIRE_THROWS_AS(apply_loss_channel(tmsv_state(3.0), 1, 1.2, 0.0), std::domain_error);
    REQUIRE_THROWS_AS(apply_loss_channel(tmsv_state(3.0), 1, -0.1, 0.0), std::domain_error);
  }
}

TEST_CASE("symplectic spectra", "[gaussian]") {
  SECTION("vacuum") {
    const auto nu = symplectic_eigenvalues(CovarianceMatrix::vacuum(2));
    REQUIRE(nu == std::vector<double>{1.0, 1.0});
  }
  SECTION("lossy state matches the complex eigensolver oracle") {
    const auto g = apply_loss_channel(tmsv_state(10.0), 1, 0.5, 0.0);
    const auto nu = symplectic_eigenvalues(g);
    const auto ref = oracle::symplectic_eigenvalues_complex(g);
    REQUIRE(nu[0] == Approx(ref[0]).epsilon(1e-10));
    REQUIRE(nu[1] == Approx(ref[1]).epsilon(1e-10));
    const auto [r1, r2] = oracle::symplectic_eigenvalues_invariants(g);
    REQUIRE(nu[0] == Approx(r1).epsilon(1e-10));
    REQUIRE(nu[1] == Approx(r2).epsilon(1e-10));
  }
  SECTION("odd-dimension input is rejected") {
    REQUIRE_THROWS_AS(CovarianceMatrix(Eigen::MatrixXd::Identity(3, 3)),
                      std::invalid_argument);
  }
}

TEST_CASE("logarithmic negativity", "[gaussian]") {
  SECTION("uncorrelated vacua carry none") {
    REQUIRE(log_negativity(CovarianceMatrix::vacuum(2)) == 0.0);
  }
  SECTION("tmsv value ln(v + sqrt(v^2-1)) against the partial-transpose oracle") {
    const double v = 10.0;
    const auto g = tmsv_state(v);
    const double expected = -std::log(oracle::pt_min_eigenvalue_invariants(g));
    REQUIRE(expected == Approx(std::log(v + std::sqrt(v * v - 1.0))).epsilon(1e-12));
    REQUIRE(log_negativity(g) == Approx(expected).epsilon(1e-10));
    REQUIRE(log_negativity(g) == Approx(2.9932228461263808).epsilon(1e-10));
  }
  SECTION("fading beyond the breaking variance yields zero") {
    // mean_sqrt = 0.3, Var = 0.1 exceeds 2 * 0.09 / (3 - 1) = 0.09
    const auto d = two_point_from_moments(0.3, 0.1);
    REQUIRE(log_negativity(evolve_tmsv(d, 3.0)) == 0.0);
    const auto d2 = two_point_from_moments(0.3, 0.08);
    REQUIRE(log_negativity(evolve_tmsv(d2, 3.0)) > 0.0);
  }
}

TEST_CASE("purity", "[gaussian]") {
  SECTION("pure for tmsv") {
    for (const double v : {1.0, 3.0, 42.0}) {
      REQUIRE(purity(tmsv_state(v)) == Approx(1.0).epsilon(1e-9));
    }
  }
  SECTION("strongest fading gives 4/(v+1)^2") {
    // equiprobable transmittance 0 and 1: Var(sqrt(eta)) = 1/4
    const TransmittanceDistribution d({{0.0, 0.5}, {1.0, 0.5}}, 1e-3, Provenance::model);
    REQUIRE(purity(evolve_tmsv(d, 3.0)) == Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("von Neumann entropy", "[gaussian]") {
  SECTION("vacuum has none") {
    REQUIRE(von_neumann_entropy(CovarianceMatrix::vacuum(1)) == 0.0);
    REQUIRE(von_neumann_entropy(CovarianceMatrix::vacuum(2)) == 0.0);
  }
  SECTION("thermal eigenvalue 3 gives G(1) = 2 bits") {
    REQUIRE(von_neumann_entropy(CovarianceMatrix(3.0 * Eigen::MatrixXd::Identity(2, 2))) ==
            Approx(2.0).epsilon(1e-12));
  }
  SECTION("reduced tmsv mode") {
    const double v = 10.0;
    const int keep[] = {0};
    REQUIRE(von_neumann_entropy(tmsv_state(v).reduced(keep)) ==
            Approx(bosonic_entropy((v - 1.0) / 2.0)).epsilon(1e-12));
  }
  SECTION("unphysical spectrum is rejected") {
    REQUIRE_THROWS_AS(von_neumann_entropy(CovarianceMatrix(0.5 * Eigen::MatrixXd::Identity(2, 2))),
                      unphysical_error);
  }
  SECTION("eigenvalues within tolerance of 1 clamp") {
    const auto g = CovarianceMatrix((1.0 - 5e-10) * Eigen::MatrixXd::Identity(2, 2));
    REQUIRE(von_neumann_entropy(g) == 0.0);
  }
}

TEST_CASE("conditional state after x homodyne on B", "[gaussian]") {
  SECTION("uninformative measurement keeps the reduced state") {
    const auto g = apply_loss_channel(tmsv_state(4.0), 1, 0.0, 0.0);
    REQUIRE(conditional_after_homodyne_x(g).matrix().isApprox(
        4.0 * Eigen::Matrix2d::Identity(), 1e-14));
  }
  SECTION("lossless case gives diag(1/v, v)") {
    const double v = 6.0;
    const auto cond = conditional_after_homodyne_x(tmsv_state(v));
    REQUIRE(cond(0, 0) == Approx(1.0 / v).epsilon(1e-12));
    REQUIRE(cond(1, 1) == Approx(v).epsilon(1e-12));
    REQUIRE(symplectic_eigenvalues(cond)[0] == Approx(1.0).margin(1e-10));
  }
  SECTION("half transmittance of tmsv(3) gives diag(1, 3)") {
    const auto cond =
        conditional_after_homodyne_x(apply_loss_channel(tmsv_state(3.0), 1, 0.5, 0.0));
    REQUIRE(cond(0, 0) == Approx(1.0).epsilon(1e-12));
    REQUIRE(cond(1, 1) == Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("distillable entanglement lower bound", "[gaussian]") {
  SECTION("pure tmsv: bound is the reduced entropy") {
    const double v = 8.0;
    REQUIRE(distillable_entanglement_lower_bound(tmsv_state(v)) ==
            Approx(bosonic_entropy((v - 1.0) / 2.0)).epsilon(1e-9));
  }
  SECTION("two vacua: zero") {
    REQUIRE(distillable_entanglement_lower_bound(CovarianceMatrix::vacuum(2)) ==
            Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("symplectic spectrum invariance under beamsplitter chains", "[gaussian][properties]") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
    for (int k = 0; k < 3; ++k) m.block<2, 2>(2 * k, 2 * k) = oracle::random_single_mode(rng);
    CovarianceMatrix g(m);
    const auto before = symplectic_eigenvalues(g);
    for (int step = 0; step < 4; ++step) {
      const int a = static_cast<int>(u(rng) * 3.0) % 3;
      const int b = (a + 1 + static_cast<int>(u(rng) * 2.0) % 2) % 3;
      g = apply_symplectic(g, beamsplitter(3, a, b, u(rng)));
    }
    const auto after = symplectic_eigenvalues(g);
    for (int k = 0; k < 3; ++k) REQUIRE(after[k] == Approx(before[k]).margin(1e-9));
  }
}

TEST_CASE("purity equals the inverse product of symplectic eigenvalues",
          "[gaussian][properties]") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = oracle::random_distribution(rng);
    std::uniform_real_distribution<double> u(1.0, 20.0);
    const auto g = evolve_tmsv(d, u(rng), 0.05 * trial);
    const auto nu = symplectic_eigenvalues(g);
    REQUIRE(purity(g) == Approx(1.0 / (nu[0] * nu[1])).epsilon(1e-9));
  }
}

TEST_CASE("loss channels preserve physicality", "[gaussian][properties]") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double v = 1.0 + 30.0 * u(rng);
    CovarianceMatrix g = tmsv_state(v);
    for (int step = 0; step < 3; ++step) {
      g = apply_loss_channel(g, static_cast<int>(u(rng) * 2.0) % 2, u(rng), 0.1 * u(rng));
      REQUIRE(is_physical(g));
    }
  }
}

TEST_CASE("separable product states have no negativity", "[gaussian][properties]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.topLeftCorner<2, 2>() = oracle::random_single_mode(rng);
    m.bottomRightCorner<2, 2>() = oracle::random_single_mode(rng);
    const CovarianceMatrix g(m);
    REQUIRE(pt_min_symplectic_eigenvalue(g) >= 1.0 - 1e-9);
    REQUIRE(log_negativity(g) == 0.0);
  }
}

TEST_CASE("conditioning never increases the reduced state", "[gaussian][properties]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = oracle::random_distribution(rng);
    const auto g = evolve_tmsv(d, 1.0 + 20.0 * u(rng), 0.2 * u(rng));
    const auto cond = conditional_after_homodyne_x(g);
    REQUIRE(symplectic_eigenvalues(cond)[0] >= 1.0 - 1e-9);
    const Eigen::Matrix2d gap = g.block(0, 0) - cond.matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gap);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-9);
  }
}
