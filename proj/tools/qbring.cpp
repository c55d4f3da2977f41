// Command-line driver. Subcommands mirror the study layout: single-quench
// population dumps, eta scans, charging-time scans, coherence traces,
// dephased charging, the ancilla discharge protocol, and a self-validation
// run against the dense oracle.
//
//   qbring <command> [--config file] [--key value ...]
//
// Exit codes: 0 success, 2 configuration, 3 capacity, 4 numerical.

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qbring/config.hpp"
#include "qbring/csv.hpp"
#include "qbring/discharge.hpp"
#include "qbring/ed.hpp"
#include "qbring/dephasing.hpp"
#include "qbring/ergotropy.hpp"
#include "qbring/scan.hpp"
#include "qbring/version.hpp"

namespace {

using namespace qbring;

struct Resolver {
  RunConfig& cfg;
  std::map<std::string, std::string>& resolved;

  double number(const std::string& key, double fallback) {
    const double v = cfg.get_double(key, fallback);
    resolved[key] = format_double(v);
    return v;
  }
  int integer(const std::string& key, int fallback) {
    const int v = cfg.get_int(key, fallback);
    resolved[key] = std::to_string(v);
    return v;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const std::string v = cfg.get_string(key, fallback);
    resolved[key] = v;
    return v;
  }
  double nu(const std::string& key, double fallback) {
    const double v = cfg.get_nu(key, fallback);
    resolved[key] = (v == kUnitary) ? "unitary"
                    : (v == kInstantDephase) ? "instant"
                                             : format_double(v);
    return v;
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const auto v = cfg.get_list(key, fallback);
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_double(v[i]);
    }
    resolved[key] = s;
    return v;
  }
};

std::vector<double> axis_values(Resolver& r) {
  if (r.cfg.has("values")) return r.list("values", {});
  const double start = r.number("start", 0.1);
  const double stop = r.number("stop", 1.0);
  const double step = r.number("step", 0.1);
  if (!(step > 0.0) || stop < start)
    throw ConfigError("axis needs start <= stop and step > 0");
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
  return out;
}

ScanAxis parse_axis(const std::string& name) {
  if (name == "h0") return ScanAxis::H0;
  if (name == "dh") return ScanAxis::Dh;
  if (name == "N") return ScanAxis::N;
  if (name == "nu") return ScanAxis::Nu;
  throw ConfigError("axis must be one of h0, dh, N, nu; got '" + name + "'");
}

int cmd_spectrum(RunConfig& cfg) {
  std::map<std::string, std::string> resolved;
  Resolver r{cfg, resolved};
  const int n = r.integer("N", 13);
  const double h = r.number("h", 0.5);
  const std::string out = r.text("out", "spectrum.csv");
  cfg.reject_unconsumed();

  CsvWriter csv(out, {"J", "index", "reachable_energy", "passive_energy"});
  for (double J : {1.0, -1.0}) {
    const ModelParams p{J, h, n};
    const auto levels = enumerate_levels(p);
    const auto ladder = lowest_energies(p, levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
      csv.row({J, static_cast<double>(i), levels[i].energy, ladder[i]});
  }
  write_metadata(out, "spectrum", resolved);
  return 0;
}

int cmd_charge(RunConfig& cfg, bool slow) {
  std::map<std::string, std::string> resolved;
  Resolver r{cfg, resolved};
  const int n = r.integer("N", 13);
  const double h0 = r.number("h0", 0.1);
  const double h1 = cfg.has("h1") ? r.number("h1", 0.0)
                                  : h0 + r.number("dh", 0.5);
  resolved["h1"] = format_double(h1);
  const double tau = r.number("tau", 1.0);
  const double nu = slow ? r.nu("nu", 1.0) : kUnitary;
  const std::string out = r.text("out", slow ? "slow_charge.csv" : "charge.csv");
  cfg.reject_unconsumed();

  CsvWriter csv(out, {"J", "index", "energy", "prob"});
  for (double J : {1.0, -1.0}) {
    ChargingProtocol proto;
    proto.before = ModelParams{J, h0, n};
    proto.after = ModelParams{J, h1, n};
    proto.tau = tau;
    proto.nu = nu;
    const PopulationDistribution dist =
        slow ? populations_slow(proto) : populations_fast(proto);
    for (std::size_t i = 0; i < dist.levels.size(); ++i)
      csv.row({J, static_cast<double>(i), dist.levels[i].energy, dist.probs[i]});
  }
  write_metadata(out, slow ? "slow-charge" : "charge", resolved);
  return 0;
}

int cmd_scan(RunConfig& cfg, bool charging_time) {
  std::map<std::string, std::string> resolved;
  Resolver r{cfg, resolved};
  ScanPlan plan;
  plan.axis = parse_axis(r.text("axis", "dh"));
  plan.values = axis_values(r);
  plan.N = r.integer("N", 25);
  plan.h0 = r.number("h0", 0.001);
  plan.dh = r.number("dh", 0.5);
  plan.nu = r.nu("nu", kUnitary);
  plan.tau_max = r.number("tau_max", 50.0);
  plan.tau_step = r.number("tau_step", 0.01);
  const int workers = r.integer("workers", default_worker_count());
  const std::string out =
      r.text("out", charging_time ? "scan_tau.csv" : "scan_eta.csv");
  cfg.reject_unconsumed();

  const WorkPool pool(workers);
  const auto rows =
      charging_time ? scan_charging_time(plan, pool) : scan_eta(plan, pool);
  CsvWriter csv(out, {axis_name(plan.axis), "J", "tau_star", "e_in", "w", "eta"});
  for (const auto& row : rows)
    csv.row({row.value, row.J, row.tau_star, row.e_in, row.w, row.eta});
  write_metadata(out, charging_time ? "scan-tau" : "scan-eta", resolved);
  return 0;
}

int cmd_coherence(RunConfig& cfg) {
  std::map<std::string, std::string> resolved;
  Resolver r{cfg, resolved};
  const int n = r.integer("N", 15);
  const double j = r.number("J", 1.0);
  const double h0 = r.number("h0", 0.1);
  const double h1 = cfg.has("h1") ? r.number("h1", 0.0)
                                  : h0 + r.number("dh", 0.5);
  resolved["h1"] = format_double(h1);
  const double nu = r.nu("nu", 1.0);
  const double t_min = r.number("t_min", 1e-3);
  const double t_max = r.number("t_max", 2000.0);
  const int points = r.integer("points", 400);
  const double f1 = r.number("f1", 1.0 / 2.718281828459045);
  const double f2 = r.number("f2", 1.0 / 2.718281828459045);
  const std::string out = r.text("out", "coherence.csv");
  cfg.reject_unconsumed();
  if (points < 3 || !(t_min > 0.0) || !(t_max > t_min))
    throw ConfigError("coherence needs points >= 3 and 0 < t_min < t_max");

  ChargingProtocol proto;
  proto.before = ModelParams{j, h0, n};
  proto.after = ModelParams{j, h1, n};
  proto.nu = nu;

  std::vector<double> times(static_cast<std::size_t>(points));
  const double lr = std::log(t_max / t_min) / (points - 1);
  for (int i = 0; i < points; ++i)
    times[static_cast<std::size_t>(i)] = t_min * std::exp(lr * i);

  const CoherenceTrace trace = coherence_trace(proto, times);
  CsvWriter csv(out, {"t", "c_re"});
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    csv.row({trace.times[i], trace.values[i]});

  try {
    const Timescales ts = extract_timescales(trace, f1, f2);
    resolved["tau1"] = format_double(ts.tau1);
    resolved["tau2"] = format_double(ts.tau2);
    std::printf("tau1 = %.6g  tau2 = %.6g  plateau = %.6g\n", ts.tau1, ts.tau2,
                ts.plateau);
  } catch (const NumericError& e) {
    resolved["tau1"] = resolved["tau2"] = "nan";
    std::fprintf(stderr, "timescale extraction: %s\n", e.what());
  }
  write_metadata(out, "coherence", resolved);
  return 0;
}

int cmd_discharge(RunConfig& cfg) {
  std::map<std::string, std::string> resolved;
  Resolver r{cfg, resolved};
  const auto n_values = r.list("n_values", {5});
  const auto h1_values = r.list("h1_values", {1.72});
  const double h0 = r.number("h0", 0.02);
  const double omega = r.number("omega", 2.0);
  const double lambda = r.number("lambda", 0.02);
  const double t_max = r.number("t_max", 500.0);
  const double dt = r.number("dt", 0.5);
  const double tau_step = r.number("tau_step", 0.01);
  const double tau_max = r.number("tau_max", 50.0);
  const std::string conv = r.text("convention", "printed");
  const std::string rule = r.text("rule", "energy");
  const std::string out = r.text("out", "discharge.csv");
  const std::string traj_path = r.text("trajectories", "");
  cfg.reject_unconsumed();
  if (conv != "printed" && conv != "halved")
    throw ConfigError("convention must be 'printed' or 'halved'");
  if (rule != "energy" && rule != "eta")
    throw ConfigError("rule must be 'energy' (first E_in peak) or 'eta'");

  CsvWriter csv(out, {"N", "h1", "J", "tau_star", "kappa_max", "t_at_max"});
  std::unique_ptr<CsvWriter> traj;
  if (!traj_path.empty())
    traj = std::make_unique<CsvWriter>(
        traj_path,
        std::vector<std::string>{"N", "h1", "J", "t", "e_s", "w_s", "kappa", "e_int"});

  for (double nval : n_values)
    for (double h1 : h1_values)
      for (double J : {1.0, -1.0}) {
        DischargeSetup setup;
        setup.charge.before = ModelParams{J, h0, static_cast<int>(nval)};
        setup.charge.after = ModelParams{J, h1, static_cast<int>(nval)};
        setup.omega = omega;
        setup.lambda = lambda;
        setup.t_max = t_max;
        setup.dt = dt;
        setup.tau_step = tau_step;
        setup.tau_max = tau_max;
        setup.convention = (conv == "printed") ? HoppingConvention::Printed
                                               : HoppingConvention::Halved;
        setup.rule = (rule == "energy") ? ChargeTimeRule::StoredEnergyFirstPeak
                                        : ChargeTimeRule::EtaFirstPeak;
        const DischargeTrajectory res = evolve_and_measure(setup);
        csv.row({nval, h1, J, res.tau_star, res.kappa_max, res.t_at_max});
        if (traj)
          for (const auto& s : res.samples)
            traj->row({nval, h1, J, s.t, s.e_s, s.w_s, s.kappa, s.e_int});
      }
  write_metadata(out, "discharge", resolved);
  return 0;
}

int cmd_validate(RunConfig& cfg) {
  std::map<std::string, std::string> resolved;
  Resolver r{cfg, resolved};
  const int n = r.integer("N", 5);
  cfg.reject_unconsumed();
  if (n > kDenseMaxN)
    throw CapacityError("validate: N exceeds the dense oracle limit");

  int checks = 0;
  auto require = [&](bool ok, const std::string& what) {
    ++checks;
    std::printf("  %-60s %s\n", what.c_str(), ok ? "ok" : "FAILED");
    if (!ok) throw NumericError("validation failed: " + what);
  };

  for (double J : {1.0, -1.0})
    for (double h : {0.1, 0.5, 0.9}) {
      const ModelParams p{J, h, n};
      const auto levels = enumerate_levels(p);
      SpinEigensystem sys = diagonalize_ising(p);
      const double parity =
          (ground_level(p).pattern.sector == Sector::Even) ? 1.0 : -1.0;
      const auto idx = reachable_sector_indices(sys, parity);
      bool ok = idx.size() == levels.size();
      double worst = 0.0;
      if (ok)
        for (std::size_t i = 0; i < idx.size(); ++i)
          worst = std::max(worst,
                           std::abs((sys.evals(idx[i]) - sys.evals(idx[0])) -
                                    (levels[i].energy - levels[0].energy)));
      char label[96];
      std::snprintf(label, sizeof(label),
                    "spectrum J=%+.0f h=%.1f (worst diff %.1e)", J, h, worst);
      require(ok && worst < 1e-10, label);
    }

  for (double J : {1.0, -1.0}) {
    ChargingProtocol proto;
    proto.before = ModelParams{J, 0.1, n};
    proto.after = ModelParams{J, 0.8, n};
    proto.tau = 1.0;
    const PopulationDistribution dist = populations_fast(proto);

    SpinEigensystem s0 = diagonalize_ising(proto.before);
    SpinEigensystem s1 = diagonalize_ising(proto.after);
    const VectorXcd psi = propagate(s0.evecs.col(0), s1, proto.tau);
    const double parity =
        (ground_level(proto.before).pattern.sector == Sector::Even) ? 1.0 : -1.0;
    const auto idx = reachable_sector_indices(s0, parity);
    double worst = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double pop = std::norm(s0.evecs.col(idx[i]).dot(psi));
      worst = std::max(worst, std::abs(pop - dist.probs[i]));
    }
    char label[96];
    std::snprintf(label, sizeof(label),
                  "propagation J=%+.0f (worst population diff %.1e)", J, worst);
    require(worst < 1e-8, label);
  }

  std::printf("validate: %d checks passed (N = %d)\n", checks, n);
  return 0;
}

void usage() {
  std::printf(
      "qbring %s\n"
      "usage: qbring <command> [--config file] [--key value ...]\n"
      "commands: spectrum charge scan-eta scan-tau coherence slow-charge\n"
      "          discharge validate\n"
      "Keys come from `key = value` config files; identically named command\n"
      "line flags override them. See README.md for the per-command keys.\n",
      kVersion);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage();
    return 2;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    usage();
    return 0;
  }
  std::vector<std::string> args(argv + 2, argv + argc);
  try {
    qbring::RunConfig cfg;
    cfg.apply_flags(args);
    if (command == "spectrum") return cmd_spectrum(cfg);
    if (command == "charge") return cmd_charge(cfg, false);
    if (command == "slow-charge") return cmd_charge(cfg, true);
    if (command == "scan-eta") return cmd_scan(cfg, false);
    if (command == "scan-tau") return cmd_scan(cfg, true);
    if (command == "coherence") return cmd_coherence(cfg);
    if (command == "discharge") return cmd_discharge(cfg);
    if (command == "validate") return cmd_validate(cfg);
    std::fprintf(stderr, "unknown command '%s'\n", command.c_str());
    usage();
    return 2;
  } catch (const qbring::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qbring::CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return 3;
  } catch (const qbring::NumericError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
