#pragma once

// Work extraction from the dephased battery state.
//
// The passive counterpart of a diagonal state pairs its populations, sorted
// in decreasing order, with the lowest energies of the full spectrum in
// increasing order. The usable work is
//
//   W = E_in - E_loss,   E_loss = sum_l Ptilde_l (eps_l - eps_0),
//
// and eta = W / E_in measures robustness to dephasing. A distribution that
// carries no passive ladder is passivized against its own levels.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "qbring/quench.hpp"
#include "qbring/sort_util.hpp"

namespace qbring {

struct ErgotropyReport {
  double e_in = 0.0;
  double w = 0.0;
  double e_loss = 0.0;
  double eta = 0.0;  // 0 when e_in = 0
};

// Probabilities rearranged in decreasing order; energies untouched.
// Stable: ties keep their original level order.
inline PopulationDistribution passive_populations(PopulationDistribution dist) {
  std::vector<std::size_t> idx(dist.probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return dist.probs[a] > dist.probs[b];
  });
  std::vector<double> sorted(dist.probs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) sorted[i] = dist.probs[idx[i]];
  dist.probs = std::move(sorted);
  return dist;
}

inline ErgotropyReport ergotropy_report(const PopulationDistribution& dist) {
  ErgotropyReport rep;
  if (dist.levels.empty()) return rep;
  const double e0 = dist.levels.front().energy;

  for (std::size_t i = 0; i < dist.levels.size(); ++i)
    rep.e_in += dist.probs[i] * (dist.levels[i].energy - e0);

  std::vector<double> sorted = dist.probs;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const std::vector<double>* ladder = &dist.passive_energies;
  std::vector<double> own;
  if (ladder->empty()) {
    own.reserve(dist.levels.size());
    for (const auto& lv : dist.levels) own.push_back(lv.energy);
    ladder = &own;
  }
  for (std::size_t i = 0; i < sorted.size(); ++i)
    rep.e_loss += sorted[i] * ((*ladder)[i] - e0);

  rep.w = rep.e_in - rep.e_loss;
  rep.eta = (rep.e_in > 0.0) ? rep.w / rep.e_in : 0.0;
  return rep;
}

struct FirstPeak {
  bool found = false;
  double x = 0.0;
  double y = 0.0;
  std::size_t index = 0;
};

// Smallest grid point that is a strict local maximum (left neighbour below,
// right neighbour not above), refined by parabolic interpolation through the
// bracketing triple. Monotone series report found = false.
inline FirstPeak first_local_max(const std::vector<double>& xs,
                                 const std::vector<double>& ys) {
  FirstPeak peak;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    if (ys[i - 1] < ys[i] && ys[i] >= ys[i + 1]) {
      peak.found = true;
      peak.index = i;
      const double denom = ys[i - 1] - 2.0 * ys[i] + ys[i + 1];
      double shift = 0.0;
      if (denom < 0.0) shift = 0.5 * (ys[i - 1] - ys[i + 1]) / denom;
      shift = std::clamp(shift, -0.5, 0.5);
      peak.x = xs[i] + shift * (xs[i + 1] - xs[i]);
      peak.y = ys[i] - 0.25 * (ys[i - 1] - ys[i + 1]) * shift;
      return peak;
    }
  }
  return peak;
}

inline std::vector<double> tau_grid(double lo, double hi, double step) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>((hi - lo) / step) + 2);
  for (double t = lo; t <= hi + 1e-12; t += step) g.push_back(t);
  return g;
}

// Reusable buffers for the large-N eta evaluation.
struct EtaScratch {
  std::vector<double> mode_probs;
  std::vector<double> probs;
  std::vector<double> sorted;
};

// E_in, W and eta of the fully dephased battery at one charging time,
// evaluated through the factorized populations: O(M) work, no level
// enumeration. `ladder` is the global passive ladder shifted to start at
// the ground energy.
inline ErgotropyReport eta_at_tau(const ModeQuenchData& data,
                                  const std::vector<double>& ladder, double tau,
                                  EtaScratch& scratch) {
  ErgotropyReport rep;
  mode_excitation_probs(data, tau, scratch.mode_probs);
  for (std::size_t i = 0; i < scratch.mode_probs.size(); ++i)
    rep.e_in += scratch.mode_probs[i] * data.pair_cost0[i];
  if (rep.e_in <= 0.0) return rep;

  product_probabilities(scratch.mode_probs, scratch.probs);
  radix_sort_nonneg(scratch.probs, scratch.sorted);  // ascending
  const std::size_t m = scratch.probs.size();
  const double e0 = ladder.front();
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    loss += scratch.probs[i] * (ladder[m - 1 - i] - e0);  // desc probs x asc ladder
  rep.e_loss = loss;
  rep.w = rep.e_in - rep.e_loss;
  rep.eta = rep.w / rep.e_in;
  return rep;
}

}  // namespace qbring
