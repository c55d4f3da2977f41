#pragma once

// Transverse-field Ising ring with an odd number of spins,
//
//   H(J,h) = J sum_l sigma^x_l sigma^x_{l+1} - h sum_l sigma^z_l ,
//
// periodic boundary conditions, |J| = 1. J = +1 is the frustrated
// antiferromagnetic ring, J = -1 the ferromagnetic one.
//
// The free-fermion solution splits into two parity sectors of the sigma^z
// string. Each sector carries its own momentum quantization:
//
//   odd  sector (string = -1):  q = 2 pi n / N          (contains q = 0)
//   even sector (string = +1):  q = 2 pi (n + 1/2) / N  (contains q = pi)
//
// Mode-level quantities here (dispersion, Bogoliubov angles, the signed
// energies of the unpaired 0 and pi modes) are single-fermion expressions.
// Spin-matrix energies are exactly twice those: kEnergyScale below. The
// factor is fixed once by matching the full spectrum of the spin Hamiltonian
// at small N (see the oracle tests); every level energy and every dynamical
// phase in this library uses the scaled convention.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbring/errors.hpp"

namespace qbring {

inline constexpr double kPi = 3.14159265358979323846;

// Spin-spectrum units per single-fermion unit.
inline constexpr double kEnergyScale = 2.0;

// Distinguished decoherence rates: nu = infinity means unitary evolution,
// nu = 0 the instant-dephasing limit where off-diagonal contributions are
// removed outright (plugging 0 into the decay exponent is never valid).
inline constexpr double kUnitary = std::numeric_limits<double>::infinity();
inline constexpr double kInstantDephase = 0.0;

// Parity sector of the sigma^z string. Physical states in the even sector
// hold an even number of fermions, the odd sector an odd number.
enum class Sector { Even, Odd };

inline const char* sector_name(Sector s) {
  return s == Sector::Even ? "even" : "odd";
}

struct ModelParams {
  double J = 1.0;  // +1 frustrated AFM, -1 non-frustrated FM
  double h = 0.0;  // transverse field, units of |J|
  int N = 3;       // odd, >= 3

  bool frustrated() const { return J > 0.0; }

  void validate() const {
    if (J != 1.0 && J != -1.0)
      throw std::invalid_argument("ModelParams: J must be +1 or -1, got " +
                                  std::to_string(J));
    if (N < 3 || N % 2 == 0)
      throw std::invalid_argument("ModelParams: N must be odd and >= 3, got " +
                                  std::to_string(N));
  }
};

inline bool is_special_mode(double q) {
  return std::abs(q) < 1e-12 || std::abs(q - kPi) < 1e-12;
}

// All N momenta of a sector, ascending in [0, 2 pi).
inline std::vector<double> momentum_grid(int N, Sector sector) {
  if (N < 3 || N % 2 == 0)
    throw std::invalid_argument("momentum_grid: N must be odd and >= 3, got " +
                                std::to_string(N));
  std::vector<double> q(static_cast<std::size_t>(N));
  const double step = 2.0 * kPi / N;
  const double off = (sector == Sector::Even) ? 0.5 : 0.0;
  for (int n = 0; n < N; ++n) q[static_cast<std::size_t>(n)] = step * (n + off);
  return q;
}

// Momenta of a sector restricted to (0, pi): one representative per (q, -q)
// pair, ascending. There are (N-1)/2 of them in either sector.
inline std::vector<double> pair_momenta(int N, Sector sector) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((N - 1) / 2));
  for (double q : momentum_grid(N, sector))
    if (q > 1e-12 && q < kPi - 1e-12) out.push_back(q);
  return out;
}

// Single-fermion dispersion Lambda(q) = sqrt((h + J cos q)^2 + sin^2 q) >= 0.
inline double dispersion(double q, const ModelParams& p) {
  const double a = p.h + p.J * std::cos(q);
  const double b = std::sin(q);
  return std::sqrt(a * a + b * b);
}

// Signed energies of the unpaired modes: (eps(0), eps(pi)) = (h + J, h - J).
// q = 0 lives in the odd sector, q = pi in the even one.
inline std::pair<double, double> special_mode_energy(const ModelParams& p) {
  return {p.h + p.J, p.h - p.J};
}

// Bogoliubov angle. The two-argument arctangent keeps Lambda(q) >= 0 also
// when h + J cos q < 0, so the construction stays valid across the critical
// point (quench targets h > 1 included). theta_0 = theta_pi = 0.
inline double bogoliubov_angle(double q, const ModelParams& p) {
  if (is_special_mode(q)) return 0.0;
  return 0.5 * std::atan2(std::sin(q), p.h + p.J * std::cos(q));
}

}  // namespace qbring
