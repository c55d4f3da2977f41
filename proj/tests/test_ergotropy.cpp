#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qbring/ergotropy.hpp"
#include "qbring/sort_util.hpp"

using namespace qbring;

namespace {

PopulationDistribution toy(std::vector<double> energies, std::vector<double> probs) {
  PopulationDistribution d;
  for (double e : energies) d.levels.push_back({OccupationPattern{}, e});
  d.probs = std::move(probs);
  return d;
}

}  // namespace

TEST_CASE("passive rearrangement") {
  auto d = toy({0.0, 1.0}, {0.1, 0.9});
  auto p = passive_populations(d);
  CHECK(p.probs[0] == Catch::Approx(0.9));
  CHECK(p.probs[1] == Catch::Approx(0.1));
  auto pp = passive_populations(p);
  CHECK(pp.probs == p.probs);

  // stable under exact ties
  auto t = passive_populations(toy({0, 1, 2}, {0.4, 0.2, 0.4}));
  CHECK(t.probs[0] == Catch::Approx(0.4));
  CHECK(t.probs[1] == Catch::Approx(0.4));
  CHECK(t.probs[2] == Catch::Approx(0.2));
}

TEST_CASE("ergotropy arithmetic") {
  {
    const auto rep = ergotropy_report(toy({0.0, 2.0}, {0.9, 0.1}));
    CHECK(rep.w == Catch::Approx(0.0).margin(1e-14));
    CHECK(rep.eta == Catch::Approx(0.0).margin(1e-14));
  }
  {
    const double g = 1.7;
    const auto rep = ergotropy_report(toy({0.0, g}, {0.2, 0.8}));
    CHECK(rep.w == Catch::Approx(0.6 * g));
    CHECK(rep.e_in == Catch::Approx(0.8 * g));
    CHECK(rep.e_loss == Catch::Approx(0.2 * g));
    CHECK(rep.eta == Catch::Approx(0.75));
  }
  {
    // unexcited battery: no division error
    const auto rep = ergotropy_report(toy({0.0, 1.0}, {1.0, 0.0}));
    CHECK(rep.e_in == 0.0);
    CHECK(rep.eta == 0.0);
  }
}

TEST_CASE("ergotropy invariants on randomized inputs") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(u(rng) * 7);
    std::vector<double> e(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    double esum = 0.0, psum = 0.0;
    for (auto& x : e) {
      esum += u(rng) * 2.0;
      x = esum;
    }
    for (auto& x : p) {
      x = u(rng);
      psum += x;
    }
    for (auto& x : p) x /= psum;
    const auto d = toy(e, p);
    const auto r = ergotropy_report(d);
    CHECK(r.e_in == Catch::Approx(r.w + r.e_loss).margin(1e-10));
    CHECK(r.w >= -1e-12);
    CHECK(r.w <= r.e_in + 1e-12);
    CHECK(r.eta >= 0.0);
    CHECK(r.eta <= 1.0 + 1e-12);

    // passivity is optimal among all permutations (exhaustive search)
    std::vector<std::size_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) cost += p[perm[i]] * e[i];
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(r.e_loss == Catch::Approx(best - e[0]).margin(1e-10));

    // uniform shift invariance
    auto shifted = d;
    for (auto& lv : shifted.levels) lv.energy += 3.7;
    const auto rs = ergotropy_report(shifted);
    CHECK(rs.w == Catch::Approx(r.w).margin(1e-10));
    CHECK(rs.e_in == Catch::Approx(r.e_in).margin(1e-10));
    CHECK(rs.eta == Catch::Approx(r.eta).margin(1e-10));
  }
}

TEST_CASE("battery distributions: global ladder never exceeds own levels") {
  for (double J : {1.0, -1.0}) {
    ChargingProtocol proto;
    proto.before = ModelParams{J, 0.2, 9};
    proto.after = ModelParams{J, 1.0, 9};
    proto.tau = 1.3;
    const auto dist = populations_fast(proto);
    REQUIRE(dist.passive_energies.size() == dist.levels.size());
    for (std::size_t i = 0; i < dist.levels.size(); ++i)
      CHECK(dist.passive_energies[i] <= dist.levels[i].energy + 1e-12);
    const auto rep = ergotropy_report(dist);
    CHECK(rep.w >= -1e-12);
    CHECK(rep.e_in == Catch::Approx(rep.w + rep.e_loss).margin(1e-10));
  }
}

TEST_CASE("first_local_max on synthetic series") {
  std::vector<double> xs, ys;
  for (double x = 0.0; x <= 10.0; x += 0.01) {
    xs.push_back(x);
    ys.push_back(std::sin(x));
  }
  const auto peak = first_local_max(xs, ys);
  REQUIRE(peak.found);
  CHECK(peak.x == Catch::Approx(kPi / 2).margin(1e-3));
  CHECK(peak.y == Catch::Approx(1.0).margin(1e-5));

  std::vector<double> mono;
  for (double x : xs) mono.push_back(x * 0.5);
  CHECK_FALSE(first_local_max(xs, mono).found);
}

TEST_CASE("radix sort agrees with std::sort") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 5000);
    std::vector<double> v(n), scratch;
    for (auto& x : v) {
      x = std::pow(u(rng), 8.0);  // heavy tie/denormal-ish spread
      if (u(rng) < 0.05) x = 0.0;
    }
    std::vector<double> ref = v;
    std::sort(ref.begin(), ref.end());
    radix_sort_nonneg(v, scratch);
    CHECK(v == ref);
  }
}

TEST_CASE("fast eta path equals the report assembled from full populations") {
  ChargingProtocol proto;
  proto.before = ModelParams{1.0, 0.05, 9};
  proto.after = ModelParams{1.0, 0.65, 9};
  const ModeQuenchData data = make_mode_quench_data(proto);
  const auto ladder = lowest_energies(proto.before, data.pattern_count());
  EtaScratch scratch;
  for (double tau : {0.3, 1.7, 9.4}) {
    const ErgotropyReport fast = eta_at_tau(data, ladder, tau, scratch);
    ChargingProtocol at = proto;
    at.tau = tau;
    const ErgotropyReport full = ergotropy_report(populations_fast(at));
    CHECK(fast.e_in == Catch::Approx(full.e_in).margin(1e-12));
    CHECK(fast.w == Catch::Approx(full.w).margin(1e-12));
    CHECK(fast.eta == Catch::Approx(full.eta).margin(1e-12));
  }
}
