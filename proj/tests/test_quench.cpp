#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qbring/dephasing.hpp"
#include "qbring/ed.hpp"
#include "qbring/ergotropy.hpp"
#include "qbring/quench.hpp"

using namespace qbring;

namespace {

ChargingProtocol proto_of(double J, double h0, double h1, int n, double tau,
                          double nu = kUnitary) {
  ChargingProtocol p;
  p.before = ModelParams{J, h0, n};
  p.after = ModelParams{J, h1, n};
  p.tau = tau;
  p.nu = nu;
  return p;
}

}  // namespace

TEST_CASE("mode overlap blocks are rotations with the right degenerate limits") {
  const auto id = mode_overlap_block(2.0 * kPi / 5, 0.3, 0.3, 1.0);
  CHECK(id.block[0][0] == Catch::Approx(1.0));
  CHECK(id.block[0][1] == Catch::Approx(0.0).margin(1e-15));

  const auto b = mode_overlap_block(3.0 * kPi / 5, 0.1, 0.8, 1.0);
  // orthonormal rows
  CHECK(b.block[0][0] * b.block[0][0] + b.block[0][1] * b.block[0][1] ==
        Catch::Approx(1.0).margin(1e-12));
  CHECK(b.block[0][0] * b.block[1][0] + b.block[0][1] * b.block[1][1] ==
        Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(mode_overlap_block(0.0, 0.1, 0.8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mode_overlap_block(kPi, 0.1, 0.8, 1.0), std::invalid_argument);
}

TEST_CASE("overlap matrix matches brute-force eigenvector inner products") {
  // <mu_k|eps_l> from dense eigenvectors, with per-vector sign freedom fixed
  // against the analytic matrix through the first column and row.
  const ChargingProtocol proto = proto_of(1.0, 0.1, 0.8, 5, 0.0);
  const Eigen::MatrixXd O = overlap_matrix(proto);

  SpinEigensystem s0 = diagonalize_ising(proto.before);
  SpinEigensystem s1 = diagonalize_ising(proto.after);
  const double parity =
      (ground_level(proto.before).pattern.sector == Sector::Even) ? 1.0 : -1.0;
  const auto i0 = reachable_sector_indices(s0, parity);
  const auto i1 = reachable_sector_indices(s1, parity);
  REQUIRE(i0.size() == 4);
  REQUIRE(i1.size() == 4);

  // map analytic bitmask order onto energy order
  const auto lev0 = enumerate_levels(proto.before);
  const auto g = ground_level(proto.before);
  const auto lev1 =
      enumerate_levels_sector(proto.after, g.pattern.sector, g.pattern.special_occupied);

  Eigen::MatrixXd ed(4, 4), an(4, 4);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 4; ++l) {
      ed(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
          s1.evecs.col(i1[k]).dot(s0.evecs.col(i0[l]).eval()).real();
      an(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
          O(lev1[k].pattern.pairs, lev0[l].pattern.pairs);
    }
  // fix arbitrary eigenvector signs
  for (Eigen::Index k = 0; k < 4; ++k)
    if (ed(k, 0) * an(k, 0) < 0) ed.row(k) *= -1.0;
  for (Eigen::Index l = 1; l < 4; ++l)
    if (ed(0, l) * an(0, l) < 0) ed.col(l) *= -1.0;
  CHECK((ed - an).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("state_overlap follows the appendix product structure") {
  const double h0 = 0.15, h1 = 0.95, J = 1.0;
  const int n = 7;
  const auto g = ground_level({J, h0, n});
  const auto pm = pair_momenta(n, g.pattern.sector);
  std::vector<ModeOverlapBlock> blocks;
  for (double q : pm) blocks.push_back(mode_overlap_block(q, h0, h1, J));

  OccupationPattern vac = g.pattern;
  CHECK(state_overlap(vac, vac, blocks) ==
        Catch::Approx(std::cos(blocks[0].delta) * std::cos(blocks[1].delta) *
                      std::cos(blocks[2].delta)));

  OccupationPattern one = vac;
  one.pairs = 1u << 1;
  const double expect = std::cos(blocks[0].delta) * std::sin(blocks[1].delta) *
                        std::cos(blocks[2].delta);
  CHECK(state_overlap(one, vac, blocks) == Catch::Approx(-expect));
  CHECK(state_overlap(vac, one, blocks) == Catch::Approx(expect));

  // completeness over all final patterns
  double total = 0.0;
  for (std::uint32_t bits = 0; bits < 8; ++bits) {
    OccupationPattern q1 = vac;
    q1.pairs = bits;
    const double ov = state_overlap(one, q1, blocks);
    total += ov * ov;
  }
  CHECK(total == Catch::Approx(1.0).margin(1e-12));

  OccupationPattern other{g.pattern.sector == Sector::Even ? Sector::Odd
                                                           : Sector::Even,
                          0, !g.pattern.special_occupied};
  CHECK_THROWS_AS(state_overlap(vac, other, blocks), std::invalid_argument);
}

TEST_CASE("populations_fast trivial limits and normalization") {
  {
    const auto dist = populations_fast(proto_of(1.0, 0.1, 0.1, 7, 3.7));
    CHECK(dist.probs[0] == Catch::Approx(1.0).margin(1e-14));
  }
  {
    const auto dist = populations_fast(proto_of(-1.0, 0.2, 0.9, 7, 0.0));
    CHECK(dist.probs[0] == Catch::Approx(1.0).margin(1e-14));
  }
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> taud(0.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    const auto dist =
        populations_fast(proto_of((i % 2) ? 1.0 : -1.0, 0.05, 1.4, 9, taud(rng)));
    double sum = 0.0;
    for (double p : dist.probs) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0 + 1e-15);
      sum += p;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("populations_fast against an externally computed reference") {
  // Frozen from an independent dense-diagonalization run (numpy eigh +
  // matrix exponential propagation), N = 5, h0 = 0.1, h1 = 0.8, tau = 1.
  {
    const auto dist = populations_fast(proto_of(1.0, 0.1, 0.8, 5, 1.0));
    const double e0 = dist.levels[0].energy;
    const double energies[4] = {0.0, 3.89501548, 4.32999473, 8.22501022};
    const double probs[4] = {0.7079747766, 0.2881482171, 0.0027555057,
                             0.0011215005};
    for (int i = 0; i < 4; ++i) {
      CHECK(dist.levels[static_cast<std::size_t>(i)].energy - e0 ==
            Catch::Approx(energies[i]).margin(1e-7));
      CHECK(dist.probs[static_cast<std::size_t>(i)] ==
            Catch::Approx(probs[i]).margin(1e-9));
    }
  }
  {
    const auto dist = populations_fast(proto_of(-1.0, 0.1, 0.8, 5, 1.0));
    const double e0 = dist.levels[0].energy;
    const double energies[4] = {0.0, 3.68390358, 4.14111753, 7.82502111};
    const double probs[4] = {0.5033264586, 0.4874752796, 0.0046727093,
                             0.0045255524};
    for (int i = 0; i < 4; ++i) {
      CHECK(dist.levels[static_cast<std::size_t>(i)].energy - e0 ==
            Catch::Approx(energies[i]).margin(1e-7));
      CHECK(dist.probs[static_cast<std::size_t>(i)] ==
            Catch::Approx(probs[i]).margin(1e-9));
    }
    CHECK(stored_energy(dist) == Catch::Approx(1.8505747117226408).margin(1e-8));
  }
}

TEST_CASE("populations_fast equals dense propagation on random draws") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> h0d(0.0, 0.9), h1d(0.05, 3.0),
      taud(0.0, 10.0);
  for (int n : {3, 5}) {
    for (int rep = 0; rep < 6; ++rep) {
      const double J = (rep % 2) ? 1.0 : -1.0;
      const auto proto = proto_of(J, h0d(rng), h1d(rng), n, taud(rng));
      const auto dist = populations_fast(proto);

      SpinEigensystem s0 = diagonalize_ising(proto.before);
      SpinEigensystem s1 = diagonalize_ising(proto.after);
      const double parity =
          (ground_level(proto.before).pattern.sector == Sector::Even) ? 1.0 : -1.0;
      const auto idx = reachable_sector_indices(s0, parity);
      const VectorXcd psi = propagate(s0.evecs.col(0), s1, proto.tau);
      for (std::size_t i = 0; i < idx.size(); ++i)
        CHECK(std::norm(s0.evecs.col(idx[i]).dot(psi)) ==
              Catch::Approx(dist.probs[i]).margin(1e-8));
    }
  }
}

TEST_CASE("stored energy: two-level arithmetic and mode route") {
  PopulationDistribution toy;
  toy.levels = {{OccupationPattern{}, 1.0}, {OccupationPattern{}, 3.0}};
  toy.probs = {0.5, 0.5};
  CHECK(stored_energy(toy) == Catch::Approx(1.0));

  const auto proto = proto_of(1.0, 0.05, 1.2, 11, 2.5);
  const auto dist = populations_fast(proto);
  const auto data = make_mode_quench_data(proto);
  CHECK(stored_energy(dist) ==
        Catch::Approx(stored_energy_at(data, proto.tau)).margin(1e-10));
}

TEST_CASE("populations_slow limits") {
  // nu -> infinity reduces to the unitary populations. The protocol is kept
  // small so the neglected decay exponents stay below the tolerance.
  {
    const auto slow = populations_slow(proto_of(1.0, 0.1, 0.6, 3, 0.5, 1e6));
    const auto fast = populations_fast(proto_of(1.0, 0.1, 0.6, 3, 0.5));
    for (std::size_t i = 0; i < slow.probs.size(); ++i)
      CHECK(slow.probs[i] == Catch::Approx(fast.probs[i]).margin(1e-6));
  }
  // the instant-dephasing limit equals the diagonal-only double sum,
  // assembled here from individual state overlaps
  {
    const auto proto = proto_of(-1.0, 0.2, 1.1, 7, 2.0, kInstantDephase);
    const auto dist = populations_slow(proto);
    const auto g = ground_level(proto.before);
    const auto pm = pair_momenta(proto.before.N, g.pattern.sector);
    std::vector<ModeOverlapBlock> blocks;
    for (double q : pm)
      blocks.push_back(mode_overlap_block(q, proto.before.h, proto.after.h,
                                          proto.before.J));
    for (std::size_t l = 0; l < dist.levels.size(); ++l) {
      double expect = 0.0;
      for (std::uint32_t k = 0; k < 8; ++k) {
        OccupationPattern mu = g.pattern;
        mu.pairs = k;
        const double a = state_overlap(dist.levels[l].pattern, mu, blocks);
        const double b = state_overlap(g.pattern, mu, blocks);
        expect += a * a * b * b;
      }
      CHECK(dist.probs[l] == Catch::Approx(expect).margin(1e-12));
    }
    // tau must not matter in this limit
    const auto dist2 = populations_slow(proto_of(-1.0, 0.2, 1.1, 7, 9.0,
                                                 kInstantDephase));
    for (std::size_t i = 0; i < dist.probs.size(); ++i)
      CHECK(dist.probs[i] == Catch::Approx(dist2.probs[i]).margin(1e-14));
  }
  CHECK_THROWS_AS(populations_slow(proto_of(1.0, 0.1, 0.6, 17, 1.0, 1.0)),
                  CapacityError);
}

TEST_CASE("populations_slow equals Milburn integration plus readout") {
  const auto proto = proto_of(1.0, 0.001, 0.5, 7, 2.0, 1.0);
  const auto dist = populations_slow(proto);

  // independent route: integrate the master equation in the H1 eigenbasis,
  // then read out diagonal weights in the H0 pattern basis
  const SlowQuenchContext ctx = make_slow_context(proto);
  const auto m = ctx.B.rows();
  const Eigen::MatrixXd O = overlap_matrix(proto);
  const Eigen::VectorXd v = O.col(0);
  const MatrixXcd rho0 = (v * v.transpose()).cast<Complex>();
  MatrixXcd h1 = MatrixXcd::Zero(m, m);
  for (Eigen::Index k = 0; k < m; ++k) h1(k, k) = ctx.mu(k);
  MilburnOptions opt;
  opt.dt = 5e-4;
  const MatrixXcd rho_tau = integrate_milburn(rho0, {{h1, proto.tau}}, proto.nu, opt);
  const MatrixXcd rho_eps = O.cast<Complex>().transpose() * rho_tau * O.cast<Complex>();
  for (std::size_t l = 0; l < dist.levels.size(); ++l) {
    const auto bits = dist.levels[l].pattern.pairs;
    CHECK(rho_eps(bits, bits).real() == Catch::Approx(dist.probs[l]).margin(1e-6));
  }
}
