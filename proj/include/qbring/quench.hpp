#pragma once

// Charging dynamics of the battery after a sudden global field quench
// h0 -> h1 (same J, same N).
//
// The quench acts independently inside every two-dimensional (q, -q) pair
// subspace, so post-quench amplitudes factorize over pair momenta. The
// excitation probability of pair q after evolving for tau under H1 is
//
//   p_q(tau) = sin^2(2 Delta_q) sin^2(2 Lambda_1(q) tau),
//
// Delta_q = theta_q(h1) - theta_q(h0), and the full population of a pattern
// is the product of p_q / (1 - p_q) factors. That brings the cost of the
// whole distribution to O(M) per time point and O(N) per energy moment,
// which is what makes N = 45 scans tractable. The factorization is checked
// against brute-force propagation of the spin Hamiltonian in the tests.
//
// Dephased (slow) charging keeps the full double sum over the eigenbasis of
// H1 and is therefore capped at N = 15.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbring/model.hpp"
#include "qbring/spectrum.hpp"

namespace qbring {

// Dense double sums over the H1 eigenbasis stop being affordable past this.
inline constexpr int kSlowChargeMaxN = 15;

struct ChargingProtocol {
  ModelParams before;       // H0 = H(J, h0)
  ModelParams after;        // H1 = H(J, h1); h1 may exceed 1
  double tau = 0.0;         // charging duration, units 1/|J|
  double nu = kUnitary;     // Milburn rate; kUnitary / kInstantDephase special
  bool dephase_limit = true;  // the wait T >> tau_2 has elapsed

  void validate() const {
    before.validate();
    if (after.J != before.J || after.N != before.N)
      throw std::invalid_argument("ChargingProtocol: quench must keep J and N");
    if (after.h < 0.0)
      throw std::invalid_argument("ChargingProtocol: h1 must be >= 0");
    if (!(tau >= 0.0))
      throw std::invalid_argument("ChargingProtocol: tau must be >= 0");
    if (std::isnan(nu) || nu < 0.0)
      throw std::invalid_argument("ChargingProtocol: nu must be >= 0 or infinity");
  }

  double dh() const { return after.h - before.h; }
};

// 2x2 rotation connecting the pre- and post-quench pair bases of one mode:
//   [ <vac1|vac0>   <vac1|pair0> ]   [ cos D  -sin D ]
//   [ <pair1|vac0> <pair1|pair0> ] = [ sin D   cos D ],  D = Delta_q.
struct ModeOverlapBlock {
  double q = 0.0;
  double delta = 0.0;
  double block[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
};

inline ModeOverlapBlock mode_overlap_block(double q, double h0, double h1, double J) {
  if (is_special_mode(q))
    throw std::invalid_argument(
        "mode_overlap_block: q = 0, pi are quench spectators, no pair block");
  ModelParams p0{J, h0, 3}, p1{J, h1, 3};  // N unused by the angle
  const double d = bogoliubov_angle(q, p1) - bogoliubov_angle(q, p0);
  ModeOverlapBlock b;
  b.q = q;
  b.delta = d;
  const double c = std::cos(d), s = std::sin(d);
  b.block[0][0] = c;
  b.block[0][1] = -s;
  b.block[1][0] = s;
  b.block[1][1] = c;
  return b;
}

// <Q1|P0>: product over pair momenta of the block entry selected by the two
// occupations. Both patterns must live in the same sector with the same
// special-mode occupation.
inline double state_overlap(const OccupationPattern& p0, const OccupationPattern& q1,
                            const std::vector<ModeOverlapBlock>& blocks) {
  if (p0.sector != q1.sector || p0.special_occupied != q1.special_occupied)
    throw std::invalid_argument("state_overlap: sector mismatch");
  double prod = 1.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const int in0 = p0.pairs >> i & 1u;
    const int in1 = q1.pairs >> i & 1u;
    prod *= blocks[i].block[in1][in0];
  }
  return prod;
}

// Precomputed per-mode quench data for one (J, N, h0, h1).
struct ModeQuenchData {
  ModelParams before, after;
  Sector sector = Sector::Even;
  bool special_occupied = false;
  std::vector<double> momenta;      // pair momenta of the ground sector
  std::vector<double> sin2_2delta;  // sin^2(2 Delta_q)
  std::vector<double> lambda1;      // Lambda(q) at h1 (single-fermion units)
  std::vector<double> pair_cost0;   // calibrated pair excitation energy at h0
  double ground_energy = 0.0;       // calibrated E(ground of H0)

  std::size_t pattern_count() const { return std::size_t{1} << momenta.size(); }
};

inline ModeQuenchData make_mode_quench_data(const ChargingProtocol& proto) {
  proto.validate();
  ModeQuenchData d;
  d.before = proto.before;
  d.after = proto.after;
  const EigenLevel g = ground_level(proto.before);
  d.sector = g.pattern.sector;
  d.special_occupied = g.pattern.special_occupied;
  d.ground_energy = g.energy;
  d.momenta = pair_momenta(proto.before.N, d.sector);
  d.sin2_2delta.reserve(d.momenta.size());
  d.lambda1.reserve(d.momenta.size());
  d.pair_cost0.reserve(d.momenta.size());
  for (double q : d.momenta) {
    const double delta =
        bogoliubov_angle(q, proto.after) - bogoliubov_angle(q, proto.before);
    const double s = std::sin(2.0 * delta);
    d.sin2_2delta.push_back(s * s);
    d.lambda1.push_back(dispersion(q, proto.after));
    d.pair_cost0.push_back(kEnergyScale * 2.0 * dispersion(q, proto.before));
  }
  return d;
}

// p_q(tau) for every pair mode.
inline void mode_excitation_probs(const ModeQuenchData& d, double tau,
                                  std::vector<double>& out) {
  out.resize(d.momenta.size());
  for (std::size_t i = 0; i < d.momenta.size(); ++i) {
    const double osc = std::sin(kEnergyScale * d.lambda1[i] * tau);
    out[i] = d.sin2_2delta[i] * osc * osc;
  }
}

// Stored energy without touching the full distribution:
//   E_in(tau) = sum_q p_q(tau) * pair_cost0(q).
inline double stored_energy_at(const ModeQuenchData& d, double tau) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.momenta.size(); ++i) {
    const double osc = std::sin(kEnergyScale * d.lambda1[i] * tau);
    e += d.sin2_2delta[i] * osc * osc * d.pair_cost0[i];
  }
  return e;
}

// Pattern probabilities in bitmask order: out[bits] = prod_q p or (1 - p).
inline void product_probabilities(const std::vector<double>& p,
                                  std::vector<double>& out) {
  out.assign(std::size_t{1} << p.size(), 0.0);
  out[0] = 1.0;
  std::size_t filled = 1;
  for (double pq : p) {
    for (std::size_t k = 0; k < filled; ++k) {
      out[filled + k] = out[k] * pq;
      out[k] *= 1.0 - pq;
    }
    filled *= 2;
  }
}

// Populations over the reachable H0 levels, plus the global passive energy
// ladder that work extraction pairs them with.
struct PopulationDistribution {
  std::vector<EigenLevel> levels;        // ascending energy, reachable sector
  std::vector<double> probs;             // aligned with levels, sums to 1
  std::vector<double> passive_energies;  // lowest M energies of the full
                                         // spectrum, ascending; empty means
                                         // "use the levels themselves"
};

inline void attach_passive_ladder(PopulationDistribution& dist,
                                  const ModelParams& p) {
  dist.passive_energies = lowest_energies(p, dist.levels.size());
}

// Fast (unitary) charging, Eq.-(4)-style populations evaluated through the
// factorized product. Requires nu = kUnitary.
inline PopulationDistribution populations_fast(const ChargingProtocol& proto) {
  proto.validate();
  if (proto.nu != kUnitary)
    throw std::invalid_argument("populations_fast: protocol must be unitary");
  const ModeQuenchData d = make_mode_quench_data(proto);

  std::vector<double> p;
  mode_excitation_probs(d, proto.tau, p);
  std::vector<double> bybits;
  product_probabilities(p, bybits);

  PopulationDistribution dist;
  dist.levels = enumerate_levels(proto.before);
  dist.probs.resize(dist.levels.size());
  for (std::size_t i = 0; i < dist.levels.size(); ++i)
    dist.probs[i] = bybits[dist.levels[i].pattern.pairs];
  attach_passive_ladder(dist, proto.before);
  return dist;
}

// Real orthogonal overlap matrix O[k][l] = <mu_k | eps_l> between the pair
// patterns of H1 (rows) and H0 (columns), both in bitmask order. Built as an
// iterated Kronecker product of the per-mode rotations.
inline Eigen::MatrixXd overlap_matrix(const ChargingProtocol& proto) {
  proto.validate();
  const ModeQuenchData d = make_mode_quench_data(proto);
  Eigen::MatrixXd O = Eigen::MatrixXd::Ones(1, 1);
  for (std::size_t i = 0; i < d.momenta.size(); ++i) {
    const auto b =
        mode_overlap_block(d.momenta[i], proto.before.h, proto.after.h, proto.before.J);
    Eigen::MatrixXd R(2, 2);
    R << b.block[0][0], b.block[0][1], b.block[1][0], b.block[1][1];
    Eigen::MatrixXd next(O.rows() * 2, O.cols() * 2);
    // bit i is the most significant so far; block index = occupation of mode i
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) next.block(r * O.rows(), c * O.cols(), O.rows(), O.cols()) = R(r, c) * O;
    O = std::move(next);
  }
  return O;
}

// Everything tau-independent of the dephased-charging double sum, so that
// scans over tau reuse it.
struct SlowQuenchContext {
  ModeQuenchData data;
  Eigen::MatrixXd B;   // B(l, k) = <eps_l|mu_k><mu_k|eps_0>, bitmask order
  Eigen::VectorXd mu;  // H1 level energies by bitmask
  std::vector<EigenLevel> levels;  // H0 levels, ascending
  std::vector<double> ladder;      // global passive energies
};

inline SlowQuenchContext make_slow_context(const ChargingProtocol& proto) {
  proto.validate();
  if (proto.before.N > kSlowChargeMaxN)
    throw CapacityError("slow charging: N = " + std::to_string(proto.before.N) +
                        " exceeds the documented N <= " +
                        std::to_string(kSlowChargeMaxN) + " limit");
  SlowQuenchContext ctx;
  ctx.data = make_mode_quench_data(proto);
  const auto m = static_cast<Eigen::Index>(ctx.data.pattern_count());

  const Eigen::MatrixXd O = overlap_matrix(proto);  // O(k, l) = <mu_k|eps_l>
  const Eigen::VectorXd v = O.col(0);               // ground has bitmask 0
  ctx.B = O.transpose() * v.asDiagonal();

  const auto mu_levels =
      enumerate_levels_sector(proto.after, ctx.data.sector, ctx.data.special_occupied);
  ctx.mu.resize(m);
  for (const auto& lv : mu_levels) ctx.mu(lv.pattern.pairs) = lv.energy;

  ctx.levels = enumerate_levels(proto.before);
  ctx.ladder = lowest_energies(proto.before, ctx.levels.size());
  return ctx;
}

// P'_l(tau) in bitmask order for one (tau, nu).
inline Eigen::VectorXd slow_populations_at(const SlowQuenchContext& ctx, double tau,
                                           double nu) {
  const auto m = ctx.B.rows();
  Eigen::VectorXd pr(m);
  if (nu == kInstantDephase) {
    pr = ctx.B.array().square().rowwise().sum();
  } else if (nu == kUnitary) {
    Eigen::VectorXcd phases(m);
    for (Eigen::Index k = 0; k < m; ++k)
      phases(k) = std::exp(std::complex<double>(0.0, -ctx.mu(k) * tau));
    Eigen::VectorXcd amp = ctx.B.cast<std::complex<double>>() * phases;
    pr = amp.array().abs2();
  } else {
    Eigen::MatrixXd G(m, m);
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index kp = 0; kp < m; ++kp) {
        const double de = ctx.mu(k) - ctx.mu(kp);
        G(k, kp) = std::exp(-de * de * tau / (2.0 * nu)) * std::cos(de * tau);
      }
    pr = ((ctx.B * G).array() * ctx.B.array()).rowwise().sum();
  }
  return pr;
}

// Slow (dephased) charging: populations after the post-charge wait,
//
//   P'_l(tau) = sum_{k,k'} <eps_l|mu_k><mu_k|eps_0><eps_0|mu_k'><mu_k'|eps_l>
//               * exp[-(mu_k - mu_k')^2 tau / (2 nu)] cos[(mu_k - mu_k') tau].
//
// nu = kInstantDephase keeps only k = k' (tau drops out entirely);
// nu = kUnitary recovers populations_fast. Cost O(M^3); capped at N = 15.
inline PopulationDistribution populations_slow(const ChargingProtocol& proto) {
  const SlowQuenchContext ctx = make_slow_context(proto);
  const Eigen::VectorXd pr = slow_populations_at(ctx, proto.tau, proto.nu);

  PopulationDistribution dist;
  dist.levels = ctx.levels;
  dist.passive_energies = ctx.ladder;
  dist.probs.resize(static_cast<std::size_t>(pr.size()));
  for (std::size_t i = 0; i < dist.levels.size(); ++i)
    dist.probs[i] = pr(dist.levels[i].pattern.pairs);
  return dist;
}

// E_in = sum_l P_l (eps_l - eps_0).
inline double stored_energy(const PopulationDistribution& dist) {
  if (dist.levels.empty()) return 0.0;
  const double e0 = dist.levels.front().energy;
  double e = 0.0;
  for (std::size_t i = 0; i < dist.levels.size(); ++i)
    e += dist.probs[i] * (dist.levels[i].energy - e0);
  return e;
}

}  // namespace qbring
