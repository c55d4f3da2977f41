#pragma once

// The Milburn pure-dephasing channel
//
//   d rho / dt = -i [H, rho] - 1/(2 nu) [H, [H, rho]] ,
//
// its closed-form solution on constant-H segments,
//
//   Phi_t[rho] = sum_{e,e'} P_e rho P_e'
//                exp[-(e - e')^2 t / (2 nu) - i (e - e') t] ,
//
// a fixed-step RK4 integrator used as a cross-check, and the relative
// entropy of coherence along the evolution.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbring/dense.hpp"
#include "qbring/errors.hpp"
#include "qbring/quench.hpp"

namespace qbring {

namespace detail {

// Energy differences below this (relative) tolerance belong to the same
// eigenspace: they pick up neither decay nor phase. Keeps the channel exact
// at symmetric fields where the spectrum degenerates.
inline constexpr double kClusterTol = 1e-9;

inline bool same_cluster(double a, double b) {
  return std::abs(a - b) <= kClusterTol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Closed-form Milburn evolution for time t under the Hamiltonian whose
// eigensystem is (evals, evecs). nu = kUnitary gives plain unitary
// evolution; nu -> 0 or t -> infinity approaches the projective dephasing
// map. Preserves trace and Hermiticity by construction.
inline MatrixXcd dephase_evolve(const MatrixXcd& rho, const VectorXd& evals,
                                const MatrixXcd& evecs, double t, double nu) {
  require_hermitian(rho, 1e-8, "dephase_evolve");
  require_unit_trace(rho, 1e-8, "dephase_evolve");
  MatrixXcd a = evecs.adjoint() * rho * evecs;
  const auto n = evals.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (detail::same_cluster(evals(i), evals(j))) continue;
      const double de = evals(i) - evals(j);
      double damp = 0.0;
      if (nu == kInstantDephase)
        damp = (t > 0.0) ? -std::numeric_limits<double>::infinity() : 0.0;
      else if (nu != kUnitary)
        damp = -de * de * t / (2.0 * nu);
      a(i, j) *= std::exp(Complex(damp, -de * t));
    }
  return evecs * a * evecs.adjoint();
}

// Full projective dephasing in the eigenbasis (the t >> tau_2 limit).
inline MatrixXcd dephasing_map(const MatrixXcd& rho, const VectorXd& evals,
                               const MatrixXcd& evecs) {
  MatrixXcd a = evecs.adjoint() * rho * evecs;
  const auto n = evals.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!detail::same_cluster(evals(i), evals(j))) a(i, j) = 0.0;
  return evecs * a * evecs.adjoint();
}

// One piecewise-constant segment of a protocol schedule.
struct HamiltonianSegment {
  MatrixXcd h;
  double duration = 0.0;
};

struct MilburnOptions {
  double dt = 1e-2;         // initial step, halved on trace drift
  double trace_tol = 1e-9;  // allowed trace error per unit time
  int max_halvings = 12;
};

// Fixed-step 4th-order integration of the Milburn equation over a
// piecewise-constant schedule. The step is halved (and the segment redone)
// whenever the trace drifts faster than trace_tol per unit time; running out
// of halvings raises NumericError rather than returning silently wrong data.
inline MatrixXcd integrate_milburn(const MatrixXcd& rho0,
                                   const std::vector<HamiltonianSegment>& schedule,
                                   double nu, MilburnOptions opt = {}) {
  require_hermitian(rho0, 1e-8, "integrate_milburn");
  require_unit_trace(rho0, 1e-8, "integrate_milburn");
  if (!(nu > 0.0) || nu == kUnitary)
    throw std::invalid_argument("integrate_milburn: needs finite nu > 0");

  MatrixXcd rho = rho0;
  const Complex minus_i(0.0, -1.0);
  for (const auto& seg : schedule) {
    const MatrixXcd& h = seg.h;
    require_hermitian(h, 1e-10, "integrate_milburn (Hamiltonian)");
    auto rhs = [&](const MatrixXcd& r) -> MatrixXcd {
      MatrixXcd comm = h * r - r * h;
      MatrixXcd dcomm = h * comm - comm * h;
      return minus_i * comm - dcomm / (2.0 * nu);
    };

    double dt = opt.dt;
    int halvings = 0;
    for (;;) {
      MatrixXcd r = rho;
      double elapsed = 0.0;
      bool drifted = false;
      while (elapsed < seg.duration - 1e-15) {
        const double step = std::min(dt, seg.duration - elapsed);
        const MatrixXcd k1 = rhs(r);
        const MatrixXcd k2 = rhs(r + 0.5 * step * k1);
        const MatrixXcd k3 = rhs(r + 0.5 * step * k2);
        const MatrixXcd k4 = rhs(r + step * k3);
        r += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        elapsed += step;
        if (std::abs(r.trace() - 1.0) > opt.trace_tol * std::max(1.0, elapsed)) {
          drifted = true;
          break;
        }
      }
      if (!drifted) {
        rho = std::move(r);
        break;
      }
      if (++halvings > opt.max_halvings)
        throw NumericError(
            "integrate_milburn: trace drift persists after " +
            std::to_string(opt.max_halvings) + " step halvings (dt = " +
            std::to_string(dt) + ")");
      dt *= 0.5;
    }
  }
  return rho;
}

// Von Neumann entropy with 0 log 0 := 0, natural logarithm.
inline double entropy_from_populations(const VectorXd& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double x = p(i);
    if (x > 1e-300) s -= x * std::log(x);
  }
  return s;
}

inline double von_neumann_entropy(const MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
  VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return entropy_from_populations(ev);
}

// Relative entropy of coherence C_RE = S(rho_D) - S(rho), with rho given in
// the reference eigenbasis (rho_D = its diagonal truncation).
inline double coherence_re(const MatrixXcd& rho_in_eigenbasis) {
  const VectorXd diag = rho_in_eigenbasis.diagonal().real();
  return entropy_from_populations(diag) - von_neumann_entropy(rho_in_eigenbasis);
}

struct CoherenceTrace {
  std::vector<double> times;
  std::vector<double> values;  // C_RE(rho(t))
};

// C_RE along the Milburn evolution of the charging quench: the battery
// starts in the H0 ground state and evolves under H1 at rate nu. Everything
// happens inside the M-dimensional reachable sector, where the closed form
// evaluates rho(t) directly at each requested time; the equivalence with
// the stepped integrator is covered by the dephasing tests.
inline CoherenceTrace coherence_trace(const ChargingProtocol& proto,
                                      const std::vector<double>& times) {
  proto.validate();
  if (proto.before.N > kSlowChargeMaxN)
    throw CapacityError("coherence_trace: N = " + std::to_string(proto.before.N) +
                        " exceeds the documented N <= " +
                        std::to_string(kSlowChargeMaxN) + " limit");
  if (!(proto.nu > 0.0) || proto.nu == kUnitary)
    throw std::invalid_argument("coherence_trace: needs finite nu > 0");

  const ModeQuenchData d = make_mode_quench_data(proto);
  const auto m = static_cast<Eigen::Index>(d.pattern_count());
  const Eigen::MatrixXd O = overlap_matrix(proto);
  const Eigen::VectorXd v = O.col(0);  // ground state in the mu basis

  const auto mu_levels =
      enumerate_levels_sector(proto.after, d.sector, d.special_occupied);
  Eigen::VectorXd mu(m);
  for (const auto& lv : mu_levels) mu(lv.pattern.pairs) = lv.energy;

  const Eigen::MatrixXd rho0 = v * v.transpose();
  CoherenceTrace trace;
  trace.times = times;
  trace.values.resize(times.size());
  MatrixXcd rho(m, m);
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double t = times[it];
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const double de = mu(i) - mu(j);
        if (detail::same_cluster(mu(i), mu(j)))
          rho(i, j) = rho0(i, j);
        else
          rho(i, j) = rho0(i, j) *
                      std::exp(Complex(-de * de * t / (2.0 * proto.nu), -de * t));
      }
    trace.values[it] = coherence_re(rho);
  }
  return trace;
}

struct Timescales {
  double tau1 = 0.0;     // coherence falls below f1 * C(0)
  double tau2 = 0.0;     // coherence falls below f2 * plateau
  double plateau = 0.0;  // median of the trace on [5 tau1, 20 tau1]
};

// Threshold-crossing extraction of the fast and slow decoherence times.
// The crossing points are linearly interpolated between samples. Throws
// NumericError with a diagnostic when the trace never crosses a threshold
// or the plateau window holds no samples.
inline Timescales extract_timescales(const CoherenceTrace& trace,
                                     double f1 = 1.0 / 2.718281828459045,
                                     double f2 = 1.0 / 2.718281828459045) {
  const auto& ts = trace.times;
  const auto& cs = trace.values;
  if (ts.size() < 3) throw std::invalid_argument("extract_timescales: trace too short");

  auto first_crossing = [&](double level, std::size_t from) -> std::optional<double> {
    for (std::size_t i = from + 1; i < ts.size(); ++i) {
      if (cs[i] <= level && cs[i - 1] > level) {
        const double w = (cs[i - 1] - level) / (cs[i - 1] - cs[i]);
        return ts[i - 1] + w * (ts[i] - ts[i - 1]);
      }
    }
    return std::nullopt;
  };

  Timescales out;
  const double c0 = cs.front();
  if (!(c0 > 0.0))
    throw NumericError("extract_timescales: initial coherence is not positive");
  const auto t1 = first_crossing(f1 * c0, 0);
  if (!t1) throw NumericError("extract_timescales: no crossing of f1 * C(0)");
  out.tau1 = *t1;

  std::vector<double> window;
  std::size_t resume = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= 5.0 * out.tau1 && ts[i] <= 20.0 * out.tau1) window.push_back(cs[i]);
    if (ts[i] <= 20.0 * out.tau1) resume = i;
  }
  if (window.empty())
    throw NumericError(
        "extract_timescales: no samples in the plateau window [5 tau1, 20 tau1]; "
        "extend or refine the time grid");
  std::sort(window.begin(), window.end());
  out.plateau = window[window.size() / 2];
  if (!(out.plateau > 0.0))
    throw NumericError("extract_timescales: plateau coherence is not positive");

  const auto t2 = first_crossing(f2 * out.plateau, resume);
  if (!t2)
    throw NumericError("extract_timescales: no crossing of f2 * plateau; "
                       "trace too short to resolve the slow decay");
  out.tau2 = *t2;
  return out;
}

}  // namespace qbring
