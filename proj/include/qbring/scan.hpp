#pragma once

// Parameter scans: maximize the robustness eta over the charging time for
// both signs of J, on one scan axis (h0, dh, N, or nu). Points run on a
// small thread pool; output rows keep scan order regardless of completion
// order. Also the charging-time study (first peak of E_in as a function of
// tau) used for the fast- and slow-charging comparisons.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qbring/ergotropy.hpp"
#include "qbring/quench.hpp"

namespace qbring {

inline int default_worker_count() {
  if (const char* env = std::getenv("QBRING_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

class WorkPool {
 public:
  explicit WorkPool(int workers = default_worker_count())
      : workers_(workers < 1 ? 1 : workers) {}

  int workers() const { return workers_; }

  // fn(i) for every i in [0, n); blocks until done. The first exception
  // thrown by any worker is rethrown here.
  template <class F>
  void for_each_index(std::size_t n, F&& fn) const {
    if (n == 0) return;
    const int nthreads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers_), n));
    if (nthreads <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto body = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (err) std::rethrow_exception(err);
  }

 private:
  int workers_;
};

enum class ScanAxis { H0, Dh, N, Nu };

inline const char* axis_name(ScanAxis a) {
  switch (a) {
    case ScanAxis::H0: return "h0";
    case ScanAxis::Dh: return "dh";
    case ScanAxis::N: return "N";
    case ScanAxis::Nu: return "nu";
  }
  return "?";
}

struct ScanPlan {
  ScanAxis axis = ScanAxis::Dh;
  std::vector<double> values;  // axis values, scan order
  // protocol template; the axis value overrides the matching field
  int N = 25;
  double h0 = 0.001;
  double dh = 0.5;
  double nu = kUnitary;
  double tau_min = 0.0;   // exclusive: grid starts at tau_min + tau_step
  double tau_max = 50.0;
  double tau_step = 0.01;
};

struct EtaRow {
  double value = 0.0;    // scan-axis value
  double J = 1.0;
  double tau_star = 0.0;
  double e_in = 0.0;
  double w = 0.0;
  double eta = 0.0;
};

inline ChargingProtocol protocol_for(const ScanPlan& plan, double value, double J) {
  ChargingProtocol proto;
  int n = plan.N;
  double h0 = plan.h0, dh = plan.dh, nu = plan.nu;
  switch (plan.axis) {
    case ScanAxis::H0: h0 = value; break;
    case ScanAxis::Dh: dh = value; break;
    case ScanAxis::N: n = static_cast<int>(value); break;
    case ScanAxis::Nu: nu = value; break;
  }
  proto.before = ModelParams{J, h0, n};
  proto.after = ModelParams{J, h0 + dh, n};
  proto.nu = nu;
  return proto;
}

// Max-over-tau eta for one protocol. Unitary protocols take the factorized
// fast path; finite nu the dephased double sum; the instant-dephasing limit
// is tau-independent and needs a single evaluation.
inline EtaRow maximize_eta(const ChargingProtocol& proto, const ScanPlan& plan) {
  EtaRow row;
  row.J = proto.before.J;
  const auto taus = tau_grid(plan.tau_min + plan.tau_step, plan.tau_max, plan.tau_step);

  if (proto.nu == kUnitary) {
    const ModeQuenchData data = make_mode_quench_data(proto);
    std::vector<double> ladder = lowest_energies(proto.before, data.pattern_count());
    EtaScratch scratch;
    for (double tau : taus) {
      const ErgotropyReport rep = eta_at_tau(data, ladder, tau, scratch);
      if (rep.eta > row.eta) {
        row.eta = rep.eta;
        row.tau_star = tau;
        row.e_in = rep.e_in;
        row.w = rep.w;
      }
    }
    return row;
  }

  const SlowQuenchContext ctx = make_slow_context(proto);
  auto report_at = [&](double tau) {
    PopulationDistribution dist;
    dist.levels = ctx.levels;
    dist.passive_energies = ctx.ladder;
    const Eigen::VectorXd pr = slow_populations_at(ctx, tau, proto.nu);
    dist.probs.resize(static_cast<std::size_t>(pr.size()));
    for (std::size_t i = 0; i < dist.levels.size(); ++i)
      dist.probs[i] = pr(dist.levels[i].pattern.pairs);
    return ergotropy_report(dist);
  };

  if (proto.nu == kInstantDephase) {
    const ErgotropyReport rep = report_at(0.0);
    row.eta = rep.eta;
    row.e_in = rep.e_in;
    row.w = rep.w;
    row.tau_star = 0.0;
    return row;
  }
  for (double tau : taus) {
    const ErgotropyReport rep = report_at(tau);
    if (rep.eta > row.eta) {
      row.eta = rep.eta;
      row.tau_star = tau;
      row.e_in = rep.e_in;
      row.w = rep.w;
    }
  }
  return row;
}

// One row per (axis value, J = +1, -1), ordered by scan index then J.
inline std::vector<EtaRow> scan_eta(const ScanPlan& plan, const WorkPool& pool) {
  std::vector<EtaRow> rows(plan.values.size() * 2);
  pool.for_each_index(rows.size(), [&](std::size_t i) {
    const double value = plan.values[i / 2];
    const double J = (i % 2 == 0) ? 1.0 : -1.0;
    ChargingProtocol proto = protocol_for(plan, value, J);
    rows[i] = maximize_eta(proto, plan);
    rows[i].value = value;
  });
  return rows;
}

// Charging-time study: tau* is the first local maximum of E_in(tau); the
// reported W and eta are the dephased-state values at that tau. Rows flag
// peakless (monotone) series with tau_star = -1.
inline std::vector<EtaRow> scan_charging_time(const ScanPlan& plan,
                                              const WorkPool& pool) {
  std::vector<EtaRow> rows(plan.values.size() * 2);
  pool.for_each_index(rows.size(), [&](std::size_t i) {
    const double value = plan.values[i / 2];
    const double J = (i % 2 == 0) ? 1.0 : -1.0;
    const ChargingProtocol proto = protocol_for(plan, value, J);
    const auto taus =
        tau_grid(plan.tau_min + plan.tau_step, plan.tau_max, plan.tau_step);

    EtaRow row;
    row.value = value;
    row.J = J;
    if (proto.nu == kUnitary) {
      const ModeQuenchData data = make_mode_quench_data(proto);
      std::vector<double> ladder = lowest_energies(proto.before, data.pattern_count());
      std::vector<double> ein(taus.size());
      for (std::size_t k = 0; k < taus.size(); ++k)
        ein[k] = stored_energy_at(data, taus[k]);
      const FirstPeak peak = first_local_max(taus, ein);
      if (!peak.found) {
        row.tau_star = -1.0;
      } else {
        EtaScratch scratch;
        const ErgotropyReport rep = eta_at_tau(data, ladder, peak.x, scratch);
        row.tau_star = peak.x;
        row.e_in = rep.e_in;
        row.w = rep.w;
        row.eta = rep.eta;
      }
    } else {
      const SlowQuenchContext ctx = make_slow_context(proto);
      const double e0 = ctx.levels.front().energy;
      Eigen::VectorXd cost(ctx.B.rows());
      for (const auto& lv : ctx.levels) cost(lv.pattern.pairs) = lv.energy - e0;
      std::vector<double> ein(taus.size());
      for (std::size_t k = 0; k < taus.size(); ++k)
        ein[k] = slow_populations_at(ctx, taus[k], proto.nu).dot(cost);
      const FirstPeak peak = first_local_max(taus, ein);
      if (!peak.found) {
        row.tau_star = -1.0;
      } else {
        PopulationDistribution dist;
        dist.levels = ctx.levels;
        dist.passive_energies = ctx.ladder;
        const Eigen::VectorXd pr = slow_populations_at(ctx, peak.x, proto.nu);
        dist.probs.resize(static_cast<std::size_t>(pr.size()));
        for (std::size_t k = 0; k < dist.levels.size(); ++k)
          dist.probs[k] = pr(dist.levels[k].pattern.pairs);
        const ErgotropyReport rep = ergotropy_report(dist);
        row.tau_star = peak.x;
        row.e_in = rep.e_in;
        row.w = rep.w;
        row.eta = rep.eta;
      }
    }
    rows[i] = row;
  });
  return rows;
}

}  // namespace qbring
