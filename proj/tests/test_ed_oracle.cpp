#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "qbring/dephasing.hpp"
#include "qbring/ed.hpp"
#include "qbring/spectrum.hpp"

using namespace qbring;

TEST_CASE("build_ising classical limits") {
  {
    const MatrixXd h = build_ising({-1.0, 0.0, 3});
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    CHECK(es.eigenvalues()(0) == Catch::Approx(-3.0));
  }
  {
    const MatrixXd h = build_ising({1.0, 0.0, 3});
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    CHECK(es.eigenvalues()(0) == Catch::Approx(-1.0));
  }
  const MatrixXd h = build_ising({1.0, 0.7, 5});
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(build_ising({1.0, 0.5, 17}), CapacityError);
}

TEST_CASE("symmetry labels: parity, momentum, reachable dimension") {
  SpinEigensystem sys = diagonalize_ising({-1.0, 0.5, 5});
  label_symmetries(sys);
  for (double p : sys.labels.parity) CHECK(std::abs(std::abs(p) - 1.0) < 1e-12);
  for (const Complex& t : sys.labels.translation)
    CHECK(std::abs(std::abs(t) - 1.0) < 1e-9);
  // translation-invariant ground state
  CHECK(std::abs(sys.labels.translation[0] - Complex(1.0, 0.0)) < 1e-9);

  const double parity =
      (ground_level({-1.0, 0.5, 5}).pattern.sector == Sector::Even) ? 1.0 : -1.0;
  const auto idx = reachable_sector_indices(sys, parity);
  CHECK(idx.size() == reachable_count(5));

  // rotated eigenvectors still diagonalize H
  double worst = 0.0;
  for (Eigen::Index c = 0; c < sys.evecs.cols(); ++c)
    worst = std::max(worst, (build_ising({-1.0, 0.5, 5}).cast<Complex>() *
                                 sys.evecs.col(c) -
                             sys.evals(c) * sys.evecs.col(c))
                                .cwiseAbs()
                                .maxCoeff());
  CHECK(worst < 1e-9);
}

TEST_CASE("calibrated free-fermion spectra match the oracle reachable sector") {
  for (double J : {1.0, -1.0})
    for (double h : {0.0, 0.1, 0.5, 0.9})
      for (int n : {3, 5, 7}) {
        const ModelParams p{J, h, n};
        const auto levels = enumerate_levels(p);
        SpinEigensystem sys = diagonalize_ising(p);
        const double parity =
            (ground_level(p).pattern.sector == Sector::Even) ? 1.0 : -1.0;
        const auto idx = reachable_sector_indices(sys, parity);
        REQUIRE(idx.size() == levels.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
          CHECK(sys.evals(idx[i]) - sys.evals(idx[0]) ==
                Catch::Approx(levels[i].energy - levels[0].energy).margin(1e-10));
        // absolute energies agree too under the calibrated convention
        CHECK(sys.evals(idx[0]) == Catch::Approx(levels[0].energy).margin(1e-9));
      }
}

TEST_CASE("propagation is unitary and spectral") {
  SpinEigensystem sys = diagonalize_ising({1.0, 0.4, 7});
  VectorXcd psi = VectorXcd::Zero(sys.evals.size());
  psi(3) = Complex(0.6, 0.0);
  psi(17) = Complex(0.0, 0.8);
  psi = sys.evecs * psi;
  CHECK((propagate(psi, sys, 0.0) - psi).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(propagate(psi, sys, 100.0).norm() - 1.0) < 1e-12);
}

TEST_CASE("quench propagation stays in the zero-momentum ground-parity sector") {
  const ModelParams p0{1.0, 0.1, 7};
  const ModelParams p1{1.0, 0.8, 7};
  SpinEigensystem s0 = diagonalize_ising(p0);
  SpinEigensystem s1 = diagonalize_ising(p1);
  const double parity =
      (ground_level(p0).pattern.sector == Sector::Even) ? 1.0 : -1.0;
  const auto idx = reachable_sector_indices(s0, parity);
  const VectorXcd psi = propagate(s0.evecs.col(0), s1, 2.3);
  double inside = 0.0;
  for (auto i : idx) inside += std::norm(s0.evecs.col(i).dot(psi));
  CHECK(1.0 - inside < 1e-12);
}

TEST_CASE("parity doubling and the frustrated low band") {
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(build_ising({-1.0, 0.5, 9}));
    CHECK(es.eigenvalues()(1) - es.eigenvalues()(0) < 1e-3);
  }
  {
    // J = +1: the 2N-state band sits below the pair-excitation scale
    const int n = 9;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(build_ising({1.0, 0.2, n}));
    const VectorXd e = es.eigenvalues();
    int in_band = 0;
    const double band_top = e(0) + kEnergyScale * 2.0 * 0.2 * 1.2 + 1e-9;
    for (Eigen::Index i = 0; i < e.size(); ++i)
      if (e(i) < band_top) ++in_band;
    CHECK(in_band >= 2 * n - 1);
    CHECK(in_band <= 2 * n);
  }
}

TEST_CASE("projector closed form: fixed points and long-time limit") {
  SpinEigensystem sys = diagonalize_ising({-1.0, 0.3, 5});
  const auto dim = sys.evals.size();

  // commuting rho (diagonal in the eigenbasis) is stationary
  VectorXd pops = VectorXd::Zero(dim);
  pops(0) = 0.5;
  pops(4) = 0.5;
  const MatrixXcd rho_diag =
      sys.evecs * pops.asDiagonal().toDenseMatrix().cast<Complex>() *
      sys.evecs.adjoint();
  const MatrixXcd evolved = integrate_milburn_reference(rho_diag, sys, 0.7, 3.0);
  CHECK((evolved - rho_diag).cwiseAbs().maxCoeff() < 1e-12);

  // generic state: long-time limit is the projective dephasing map
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  v.normalize();
  const MatrixXcd rho = v * v.adjoint();
  const MatrixXcd late = integrate_milburn_reference(rho, sys, 0.05, 1e7);
  const MatrixXcd dephased = dephasing_map(rho, sys.evals, sys.evecs);
  CHECK((late - dephased).cwiseAbs().maxCoeff() < 1e-7);

  // trace and Hermiticity preserved at intermediate times
  const MatrixXcd mid = integrate_milburn_reference(rho, sys, 0.5, 2.0);
  CHECK(std::abs(mid.trace() - 1.0) < 1e-12);
  CHECK(hermiticity_defect(mid) < 1e-12);
}

namespace {

// Jordan-Wigner fermion annihilation operator psi_j (site j, 0-based) as a
// dense matrix: kills the fermion on spin-down site j with the sigma^z
// string sign of the sites below it.
MatrixXcd jw_annihilator(int N, int j) {
  const auto dim = static_cast<Eigen::Index>(dense_dim(N));
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (std::size_t s = 0; s < dense_dim(N); ++s) {
    if (!(s >> j & 1u)) continue;  // no fermion to kill
    int downs_below = 0;
    for (int l = 0; l < j; ++l) downs_below += (s >> l) & 1u;
    const std::size_t t = s & ~(std::size_t{1} << j);
    m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) =
        (downs_below % 2 == 0) ? 1.0 : -1.0;
  }
  return m;
}

MatrixXcd jw_mode(int N, double q) {
  const auto dim = static_cast<Eigen::Index>(dense_dim(N));
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  const Complex phase0 = std::exp(Complex(0.0, -kPi / 4)) / std::sqrt(double(N));
  for (int j = 0; j < N; ++j)
    m += phase0 * std::exp(Complex(0.0, -q * (j + 1))) * jw_annihilator(N, j);
  return m;
}

}  // namespace

TEST_CASE("Bogoliubov vacuum annihilation fixes the angle convention") {
  // b_q = cos(theta_q) psi_q + sin(theta_q) psi^+_{-q} must annihilate the
  // even-sector vacuum, which is the dense ground state for 0 < h < 1.
  for (double J : {1.0, -1.0})
    for (double h : {0.1, 0.5}) {
      for (int n : {3, 5}) {
        const ModelParams p{J, h, n};
        REQUIRE(ground_level(p).pattern.sector == Sector::Even);
        SpinEigensystem sys = diagonalize_ising(p);
        const VectorXcd gs = sys.evecs.col(0);
        for (double q : momentum_grid(n, Sector::Even)) {
          const double mq = std::fmod(2.0 * kPi - q, 2.0 * kPi);
          const double th = bogoliubov_angle(q, p);
          const MatrixXcd bq = std::cos(th) * jw_mode(n, q) +
                               std::sin(th) * jw_mode(n, mq).adjoint();
          CHECK((bq * gs).norm() < 1e-8);
        }
      }
    }
}
