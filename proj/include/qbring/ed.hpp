#pragma once

// Brute-force reference: the spin Hamiltonian as a dense matrix in the
// computational basis, its symmetry labels (parity of the sigma^z string,
// momentum under cyclic translation), spectral propagation, and an
// independent projector-sum implementation of the Milburn closed form.
//
// Basis convention: basis index bit l = 1 means spin l points down
// (sigma^z eigenvalue -1). Site l+1 sits one bit above site l; translation
// moves spin l to spin l+1 cyclically.
//
// Deliberately naive: everything is dense and unoptimized, capacity
// N <= 15. Correctness of the analytic modules is measured against this.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbring/dense.hpp"
#include "qbring/errors.hpp"
#include "qbring/model.hpp"

namespace qbring {

inline constexpr int kDenseMaxN = 15;

inline std::size_t dense_dim(int N) { return std::size_t{1} << N; }

// H = J sum sigma^x_l sigma^x_{l+1} - h sum sigma^z_l, periodic.
inline MatrixXd build_ising(const ModelParams& p) {
  p.validate();
  if (p.N > kDenseMaxN)
    throw CapacityError("build_ising: N = " + std::to_string(p.N) +
                        " exceeds the dense limit N <= " +
                        std::to_string(kDenseMaxN));
  const std::size_t dim = dense_dim(p.N);
  MatrixXd h = MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                              static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int l = 0; l < p.N; ++l) diag -= p.h * ((s >> l & 1u) ? -1.0 : 1.0);
    h(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += diag;
    for (int l = 0; l < p.N; ++l) {
      const int lp = (l + 1) % p.N;
      const std::size_t flipped = s ^ (std::size_t{1} << l) ^ (std::size_t{1} << lp);
      h(static_cast<Eigen::Index>(flipped), static_cast<Eigen::Index>(s)) += p.J;
    }
  }
  return h;
}

// sigma^z string eigenvalue per basis state: (-1)^{number of down spins}.
inline VectorXd parity_diagonal(int N) {
  const std::size_t dim = dense_dim(N);
  VectorXd d(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s)
    d(static_cast<Eigen::Index>(s)) = (__builtin_popcountll(s) % 2 == 0) ? 1.0 : -1.0;
  return d;
}

// Basis image under the one-site cyclic shift l -> l+1.
inline std::vector<std::size_t> translation_images(int N) {
  const std::size_t dim = dense_dim(N);
  std::vector<std::size_t> img(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    std::size_t t = 0;
    for (int l = 0; l < N; ++l)
      if (s >> l & 1u) t |= std::size_t{1} << ((l + 1) % N);
    img[s] = t;
  }
  return img;
}

struct SymmetryLabels {
  std::vector<double> parity;           // +1 / -1
  std::vector<Complex> translation;     // on the unit circle
  std::vector<double> momentum;         // principal arg of the above
};

struct SpinEigensystem {
  ModelParams params;
  VectorXd evals;
  MatrixXcd evecs;  // symmetry-adapted after label_symmetries()
  SymmetryLabels labels;
  bool labelled = false;
};

inline SpinEigensystem diagonalize_ising(const ModelParams& p) {
  SpinEigensystem sys;
  sys.params = p;
  const MatrixXd h = build_ising(p);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("diagonalize_ising: eigensolver failed");
  sys.evals = es.eigenvalues();
  sys.evecs = es.eigenvectors().cast<Complex>();
  return sys;
}

// Rotates every degenerate energy cluster to a joint eigenbasis of the
// parity string and the translation operator, then records both labels per
// eigenvector. Both symmetries commute with H and with each other for the
// periodic ring, so the rotation always exists; a failure to diagonalize
// within clusters raises NumericError.
inline void label_symmetries(SpinEigensystem& sys) {
  if (sys.labelled) return;
  const auto n = sys.evals.size();
  const VectorXd par = parity_diagonal(sys.params.N);
  const auto timg = translation_images(sys.params.N);

  auto apply_translation = [&](const MatrixXcd& block) {
    MatrixXcd out(block.rows(), block.cols());
    for (Eigen::Index c = 0; c < block.cols(); ++c)
      for (Eigen::Index r = 0; r < block.rows(); ++r)
        out(static_cast<Eigen::Index>(timg[static_cast<std::size_t>(r)]), c) =
            block(r, c);
    return out;
  };

  sys.labels.parity.assign(static_cast<std::size_t>(n), 0.0);
  sys.labels.translation.assign(static_cast<std::size_t>(n), Complex(1.0, 0.0));
  sys.labels.momentum.assign(static_cast<std::size_t>(n), 0.0);

  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo + 1;
    const double tol = 1e-9 * std::max(1.0, std::abs(sys.evals(lo)));
    while (hi < n && std::abs(sys.evals(hi) - sys.evals(lo)) <= tol) ++hi;
    const Eigen::Index k = hi - lo;
    MatrixXcd block = sys.evecs.middleCols(lo, k);

    // parity first: Hermitian, eigenvalues +-1
    MatrixXcd pblock = par.asDiagonal().toDenseMatrix().cast<Complex>() * block;
    MatrixXcd pk = block.adjoint() * pblock;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> pes(pk);
    if (pes.info() != Eigen::Success)
      throw NumericError("label_symmetries: parity rotation failed");
    block = block * pes.eigenvectors();
    const VectorXd pvals = pes.eigenvalues();

    // translation within each parity eigenspace: unitary, normal
    Eigen::Index plo = 0;
    while (plo < k) {
      Eigen::Index phi = plo + 1;
      while (phi < k && std::abs(pvals(phi) - pvals(plo)) < 1e-6) ++phi;
      MatrixXcd sub = block.middleCols(plo, phi - plo);
      MatrixXcd tk = sub.adjoint() * apply_translation(sub);
      Eigen::ComplexEigenSolver<MatrixXcd> tes(tk);
      if (tes.info() != Eigen::Success)
        throw NumericError("label_symmetries: translation rotation failed");
      block.middleCols(plo, phi - plo) = sub * tes.eigenvectors();
      for (Eigen::Index c = plo; c < phi; ++c) {
        const Complex ev = tes.eigenvalues()(c - plo);
        if (std::abs(std::abs(ev) - 1.0) > 1e-6)
          throw NumericError("label_symmetries: translation eigenvalue off the "
                             "unit circle; symmetries do not commute here");
        sys.labels.translation[static_cast<std::size_t>(lo + c)] = ev;
        sys.labels.momentum[static_cast<std::size_t>(lo + c)] = std::arg(ev);
      }
      plo = phi;
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      const double pv = pvals(c);
      if (std::abs(std::abs(pv) - 1.0) > 1e-9)
        throw NumericError("label_symmetries: parity eigenvalue not +-1");
      sys.labels.parity[static_cast<std::size_t>(lo + c)] = (pv > 0) ? 1.0 : -1.0;
    }
    sys.evecs.middleCols(lo, k) = block;
    lo = hi;
  }
  sys.labelled = true;
}

// Indices of the zero-momentum eigenstates with the requested parity,
// ascending in energy. This is the sector a parity- and translation-
// preserving quench can reach from a zero-momentum ground state.
inline std::vector<Eigen::Index> reachable_sector_indices(SpinEigensystem& sys,
                                                          double parity) {
  label_symmetries(sys);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < sys.evals.size(); ++i)
    if (sys.labels.parity[static_cast<std::size_t>(i)] == parity &&
        std::abs(sys.labels.momentum[static_cast<std::size_t>(i)]) < 1e-7)
      idx.push_back(i);
  return idx;
}

// Spectral propagation |psi(t)> = e^{-iHt} |psi>.
inline VectorXcd propagate(const VectorXcd& psi, const SpinEigensystem& sys, double t) {
  VectorXcd c = sys.evecs.adjoint() * psi;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    c(i) *= std::exp(Complex(0.0, -sys.evals(i) * t));
  return sys.evecs * c;
}

inline MatrixXcd propagate_density(const MatrixXcd& rho, const SpinEigensystem& sys,
                                   double t) {
  MatrixXcd a = sys.evecs.adjoint() * rho * sys.evecs;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      a(i, j) *= std::exp(Complex(0.0, -(sys.evals(i) - sys.evals(j)) * t));
  return sys.evecs * a * sys.evecs.adjoint();
}

// Milburn closed form as an explicit sum over eigenspace projectors,
//   sum_{e,e'} P_e rho P_e' exp[-(e-e')^2 t / (2 nu) - i (e-e') t].
// Independent code path from dephase_evolve: projectors are materialized
// from energy clusters rather than working entry-wise in the eigenbasis.
inline MatrixXcd integrate_milburn_reference(const MatrixXcd& rho0,
                                             const SpinEigensystem& sys, double nu,
                                             double t) {
  // cluster boundaries
  std::vector<Eigen::Index> starts{0};
  for (Eigen::Index i = 1; i < sys.evals.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(sys.evals(i)));
    if (std::abs(sys.evals(i) - sys.evals(i - 1)) > tol) starts.push_back(i);
  }
  starts.push_back(sys.evals.size());

  const auto nclusters = starts.size() - 1;
  std::vector<MatrixXcd> proj(nclusters);
  std::vector<double> energy(nclusters);
  for (std::size_t c = 0; c < nclusters; ++c) {
    const Eigen::Index lo = starts[c], k = starts[c + 1] - starts[c];
    proj[c] = sys.evecs.middleCols(lo, k) * sys.evecs.middleCols(lo, k).adjoint();
    energy[c] = sys.evals.segment(lo, k).mean();
  }

  MatrixXcd out = MatrixXcd::Zero(rho0.rows(), rho0.cols());
  for (std::size_t a = 0; a < nclusters; ++a)
    for (std::size_t b = 0; b < nclusters; ++b) {
      const double de = energy[a] - energy[b];
      Complex f(1.0, 0.0);
      if (a != b) {
        double damp = 0.0;
        if (nu == kInstantDephase)
          damp = (t > 0.0) ? -std::numeric_limits<double>::infinity() : 0.0;
        else if (nu != kUnitary)
          damp = -de * de * t / (2.0 * nu);
        f = std::exp(Complex(damp, -de * t));
      }
      out += f * (proj[a] * rho0 * proj[b]);
    }
  return out;
}

}  // namespace qbring
