#pragma once

// Eigenstate bookkeeping for the Ising ring.
//
// Zero-momentum, fixed-parity eigenstates are labelled by which (q, -q) pairs
// are occupied on top of the sector vacuum; the unpaired 0 / pi mode is a
// quench spectator (its Bogoliubov angle vanishes at every field), so its
// occupation is frozen to the ground-state value. A field quench reaches
// exactly the M = 2^{(N-1)/2} pair patterns of the ground sector.
//
// Energies returned here are spin-spectrum (calibrated) energies; see
// model.hpp for the convention.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "qbring/model.hpp"

namespace qbring {

struct OccupationPattern {
  Sector sector = Sector::Even;
  std::uint32_t pairs = 0;        // bit i: i-th pair momentum (ascending) occupied
  bool special_occupied = false;  // 0-mode (odd sector) or pi-mode (even sector)
};

struct EigenLevel {
  OccupationPattern pattern;
  double energy = 0.0;  // calibrated, absolute
};

inline int pair_mode_count(int N) { return (N - 1) / 2; }

// M = 2^{(N-1)/2}, the number of states reachable from the ground state.
inline std::size_t reachable_count(int N) {
  return std::size_t{1} << pair_mode_count(N);
}

// Fermion-count parity of a pattern must match its sector: even sector needs
// an even count, odd sector an odd one. Pair occupations are always even, so
// the special mode settles it alone.
inline void validate_pattern(const OccupationPattern& pat, const ModelParams& p) {
  p.validate();
  const std::uint32_t limit = std::uint32_t{1} << pair_mode_count(p.N);
  if (pat.pairs >= limit)
    throw std::invalid_argument("OccupationPattern: pair bitmask out of range");
  const bool want_odd_count = (pat.sector == Sector::Odd);
  if (pat.special_occupied != want_odd_count)
    throw std::invalid_argument(
        "OccupationPattern: special-mode occupation breaks sector parity");
}

// Sector vacuum energy (all Bogoliubov modes empty), calibrated:
//   -(1/2) [ sum_{q paired} Lambda(q) + eps(special) ] * kEnergyScale.
inline double sector_vacuum_energy(const ModelParams& p, Sector sector) {
  const auto [eps0, epspi] = special_mode_energy(p);
  double sum = (sector == Sector::Odd) ? eps0 : epspi;
  for (double q : momentum_grid(p.N, sector))
    if (!is_special_mode(q)) sum += dispersion(q, p);
  return -0.5 * kEnergyScale * sum;
}

// Calibrated energy of a pattern: vacuum + 2 Lambda(p) per occupied pair
// + the signed special-mode energy if occupied (all times kEnergyScale).
inline double level_energy(const OccupationPattern& pat, const ModelParams& p) {
  validate_pattern(pat, p);
  double e = sector_vacuum_energy(p, pat.sector);
  const auto pm = pair_momenta(p.N, pat.sector);
  for (std::size_t i = 0; i < pm.size(); ++i)
    if (pat.pairs >> i & 1u) e += kEnergyScale * 2.0 * dispersion(pm[i], p);
  if (pat.special_occupied) {
    const auto [eps0, epspi] = special_mode_energy(p);
    e += kEnergyScale * ((pat.sector == Sector::Odd) ? eps0 : epspi);
  }
  return e;
}

// The two ground-state candidates: the even-sector vacuum and the odd-sector
// state with the 0-mode filled. Ground identification is restricted to
// 0 <= h < 1; the globally lower candidate wins, ties go to the even sector.
inline EigenLevel ground_level(const ModelParams& p) {
  p.validate();
  if (p.h < 0.0 || p.h >= 1.0)
    throw std::invalid_argument(
        "ground_level: ground identification requires 0 <= h < 1, got h = " +
        std::to_string(p.h));
  EigenLevel even{{Sector::Even, 0, false}, 0.0};
  even.energy = level_energy(even.pattern, p);
  EigenLevel odd{{Sector::Odd, 0, true}, 0.0};
  odd.energy = level_energy(odd.pattern, p);
  return (odd.energy < even.energy) ? odd : even;
}

// All pair patterns of one sector with a fixed special-mode occupation,
// sorted by energy (ties: ascending pair bitmask). Valid at any field; this
// is what diagonalizes the sector Hamiltonian also for quench targets h > 1.
inline std::vector<EigenLevel> enumerate_levels_sector(const ModelParams& p,
                                                       Sector sector,
                                                       bool special_occupied) {
  p.validate();
  const auto pm = pair_momenta(p.N, sector);
  const std::size_t m = std::size_t{1} << pm.size();

  double base = sector_vacuum_energy(p, sector);
  if (special_occupied) {
    const auto [eps0, epspi] = special_mode_energy(p);
    base += kEnergyScale * ((sector == Sector::Odd) ? eps0 : epspi);
  }
  std::vector<double> pair_cost(pm.size());
  for (std::size_t i = 0; i < pm.size(); ++i)
    pair_cost[i] = kEnergyScale * 2.0 * dispersion(pm[i], p);

  std::vector<EigenLevel> levels(m);
  for (std::size_t bits = 0; bits < m; ++bits) {
    double e = base;
    for (std::size_t i = 0; i < pm.size(); ++i)
      if (bits >> i & 1u) e += pair_cost[i];
    levels[bits] = {{sector, static_cast<std::uint32_t>(bits), special_occupied}, e};
  }
  std::sort(levels.begin(), levels.end(), [](const EigenLevel& a, const EigenLevel& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.pattern.pairs < b.pattern.pairs;
  });
  return levels;
}

// The M quench-reachable levels: pair patterns of the ground sector with the
// special mode frozen to its ground-state value. Ascending energy.
inline std::vector<EigenLevel> enumerate_levels(const ModelParams& p) {
  const EigenLevel g = ground_level(p);
  return enumerate_levels_sector(p, g.pattern.sector, g.pattern.special_occupied);
}

// Leading-order frustrated gap (2|h|/(1-|h|)) pi^2 / N^2, in single-fermion
// units: the offset of the first even-sector excitation above the vacuum.
inline double gap_leading_order(double h, int N) {
  if (N < 3 || N % 2 == 0)
    throw std::invalid_argument("gap_leading_order: N must be odd and >= 3");
  const double ah = std::abs(h);
  if (ah >= 1.0)
    throw std::invalid_argument("gap_leading_order: requires |h| < 1, got " +
                                std::to_string(h));
  return (2.0 * ah / (1.0 - ah)) * kPi * kPi / (static_cast<double>(N) * N);
}

namespace detail {

// k smallest energies of one parity sector. Mode energies are made
// nonnegative by occupying every negative mode up front; states are then
// flip sets over the sorted |energy| list, enumerated best-first. A flip set
// is admissible when (base occupation + flips) has the sector's parity.
inline void sector_lowest_energies(const ModelParams& p, Sector sector,
                                   std::size_t k, std::vector<double>& out) {
  const auto grid = momentum_grid(p.N, sector);
  const auto [eps0, epspi] = special_mode_energy(p);

  double base = sector_vacuum_energy(p, sector);
  int base_count = 0;
  std::vector<double> w;  // flip costs
  w.reserve(grid.size());
  for (double q : grid) {
    double e;
    if (is_special_mode(q))
      e = kEnergyScale * ((sector == Sector::Odd) ? eps0 : epspi);
    else
      e = kEnergyScale * dispersion(q, p);
    if (e < 0.0) {
      base += e;
      ++base_count;
    }
    w.push_back(std::abs(e));
  }
  std::sort(w.begin(), w.end());

  const int want_parity = (sector == Sector::Odd) ? 1 : 0;

  struct Node {
    double cost;
    std::int32_t last;  // index of the largest flipped mode, -1 for none
    std::int32_t size;
    bool operator>(const Node& o) const { return cost > o.cost; }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
  heap.push({0.0, -1, 0});
  const auto nmodes = static_cast<std::int32_t>(w.size());
  while (!heap.empty() && out.size() < k) {
    Node nd = heap.top();
    heap.pop();
    if (((base_count + nd.size) & 1) == want_parity) out.push_back(base + nd.cost);
    const std::int32_t next = nd.last + 1;
    if (next < nmodes) {
      heap.push({nd.cost + w[static_cast<std::size_t>(next)], next, nd.size + 1});
      if (nd.last >= 0)
        heap.push({nd.cost - w[static_cast<std::size_t>(nd.last)] +
                       w[static_cast<std::size_t>(next)],
                   next, nd.size});
    }
  }
}

}  // namespace detail

// The `count` lowest energies of the full spin spectrum (both sectors,
// every momentum), ascending, calibrated. This is the passive-state energy
// ladder used for work extraction; it scales to N = 45 where dense
// diagonalization cannot go.
inline std::vector<double> lowest_energies(const ModelParams& p, std::size_t count) {
  p.validate();
  std::vector<double> even, odd;
  detail::sector_lowest_energies(p, Sector::Even, count, even);
  detail::sector_lowest_energies(p, Sector::Odd, count, odd);
  std::vector<double> out;
  out.reserve(count);
  std::size_t i = 0, j = 0;
  while (out.size() < count && (i < even.size() || j < odd.size())) {
    if (j >= odd.size() || (i < even.size() && even[i] <= odd[j]))
      out.push_back(even[i++]);
    else
      out.push_back(odd[j++]);
  }
  return out;
}

}  // namespace qbring
