#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "qtlab/acceptance.hpp"
#include "qtlab/clocks.hpp"
#include "qtlab/config.hpp"
#include "qtlab/csv.hpp"
#include "qtlab/dispersion.hpp"
#include "qtlab/scatter.hpp"
#include "qtlab/version.hpp"
#include "qtlab/wavepacket.hpp"
#include "qtlab/wkb.hpp"

namespace qtlab {

struct SweepSpec {
  std::string variable;  // E | L | omega_L | omega
  double start;
  double stop;
  long count;
  bool log_spacing;

  std::vector<double> values() const {
    std::vector<double> v(count);
    for (long i = 0; i < count; ++i) {
      const double f = (count == 1) ? 0.0 : static_cast<double>(i) / (count - 1);
      v[i] = log_spacing ? start * std::pow(stop / start, f) : start + (stop - start) * f;
    }
    return v;
  }
};

namespace detail {

// Echoes every effective (default-resolved) value for the CSV header.
struct ConfigReader {
  const ConfigMap& cfg;
  std::vector<std::pair<std::string, std::string>> effective;

  std::string s(const std::string& key, const std::string& dflt) {
    const std::string v = cfg.get_string(key, dflt);
    effective.emplace_back(key, v);
    return v;
  }
  std::string s_req(const std::string& key) {
    const std::string v = cfg.get_string(key);
    effective.emplace_back(key, v);
    return v;
  }
  double d(const std::string& key, double dflt) {
    const double v = cfg.get_double(key, dflt);
    effective.emplace_back(key, format_double(v));
    return v;
  }
  double d_req(const std::string& key) {
    const double v = cfg.get_double(key);
    effective.emplace_back(key, format_double(v));
    return v;
  }
  long l(const std::string& key, long dflt) {
    const long v = cfg.get_long(key, dflt);
    effective.emplace_back(key, std::to_string(v));
    return v;
  }
};

inline PotentialSpec build_potential(ConfigReader& r) {
  const std::string shape = r.s_req("potential.shape");
  PotentialSpec spec;
  spec.mass = r.d("potential.mass", 1.0);
  if (shape == "rectangular") {
    spec.shape = Rectangular{r.d_req("potential.v0"), r.d_req("potential.a"),
                             r.d_req("potential.b")};
  } else if (shape == "eckart") {
    spec.shape = Eckart{r.d_req("potential.v0"), r.d_req("potential.w")};
  } else if (shape == "gaussian") {
    spec.shape = Gaussian{r.d_req("potential.v0"), r.d("potential.x0", 0.0),
                          r.d_req("potential.sigma")};
  } else if (shape == "sampled") {
    const std::string path = r.s_req("potential.file");
    const auto rows = read_numeric_csv(path);
    Sampled s;
    for (const auto& row : rows) {
      if (row.size() != 2)
        throw ConfigError("potential.file: expected two columns (x, U)");
      s.x.push_back(row[0]);
      s.u.push_back(row[1]);
    }
    spec.shape = std::move(s);
  } else {
    throw ConfigError("potential.shape: unknown shape '" + shape + "'");
  }
  validate(spec);
  return spec;
}

inline SweepSpec build_sweep(ConfigReader& r, const std::vector<std::string>& allowed) {
  SweepSpec sw;
  sw.variable = r.s_req("sweep.variable");
  bool ok = false;
  for (const auto& a : allowed) ok = ok || a == sw.variable;
  if (!ok) throw ConfigError("sweep.variable: '" + sw.variable + "' not valid for this command");
  sw.start = r.d_req("sweep.start");
  sw.stop = r.d_req("sweep.stop");
  sw.count = r.l("sweep.count", 1);
  if (sw.count < 1) throw ConfigError("sweep.count: must be >= 1");
  if (!(sw.start < sw.stop)) throw ConfigError("sweep.start: must be < sweep.stop");
  const std::string spacing = r.s("sweep.spacing", "linear");
  if (spacing != "linear" && spacing != "log")
    throw ConfigError("sweep.spacing: must be 'linear' or 'log'");
  sw.log_spacing = spacing == "log";
  if (sw.log_spacing && !(sw.start > 0.0))
    throw ConfigError("sweep.start: log spacing needs a positive start");
  return sw;
}

inline SolveOptions build_solve(ConfigReader& r) {
  SolveOptions opt;
  opt.rtol = r.d("tol.scatter_rtol", opt.rtol);
  opt.n0 = r.l("tol.n0", opt.n0);
  opt.n_max = r.l("tol.n_max", opt.n_max);
  if (opt.rtol <= 0.0 || opt.n0 < 2 || opt.n_max < opt.n0)
    throw ConfigError("tol.*: invalid solver tolerances");
  return opt;
}

template <class Body>
void parallel_for(long n, int threads, Body&& body) {
  threads = static_cast<int>(std::min<long>(threads, n));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  long first_error_index = -1;
  const auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error_index < 0 || i < first_error_index) {
          first_error = std::current_exception();
          first_error_index = i;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Applies a sweep value, returning the per-point spec and energy.
inline std::pair<PotentialSpec, double> sweep_point(const PotentialSpec& base,
                                                    const SweepSpec& sw, double fixed_E,
                                                    double value) {
  if (sw.variable == "E") return {base, value};
  if (sw.variable == "L") {
    const auto* rect = std::get_if<Rectangular>(&base.shape);
    if (!rect) throw ConfigError("sweep.variable: L sweeps need a rectangular potential");
    PotentialSpec spec = base;
    spec.shape = Rectangular{rect->v0, rect->a, rect->a + value};
    return {spec, fixed_E};
  }
  throw ConfigError("sweep.variable: unsupported variable '" + sw.variable + "'");
}

inline void write_header(CsvWriter& w,
                         const std::vector<std::pair<std::string, std::string>>& effective) {
  w.comment("qtlab " + std::string(kVersion));
  for (const auto& [k, v] : effective) w.comment(k + " = " + v);
}

inline int run_transmission(ConfigReader& r, const std::string& output, int threads) {
  const PotentialSpec base = build_potential(r);
  const SweepSpec sw = build_sweep(r, {"E", "L"});
  const double fixed_E = (sw.variable == "L") ? r.d_req("energy") : 0.0;
  const SolveOptions opt = build_solve(r);
  r.cfg.reject_unknown();

  const std::vector<double> vals = sw.values();
  std::vector<std::vector<double>> rows(vals.size());
  parallel_for(static_cast<long>(vals.size()), threads, [&](long i) {
    try {
      const auto [spec, E] = sweep_point(base, sw, fixed_E, vals[i]);
      const ScatteringSolution s = scattering_amplitudes(spec, E, opt);
      rows[i] = {vals[i], s.E, s.k, s.T, s.R, 2.0 * s.log_t_mag};
    } catch (const ComputeError& e) {
      throw ComputeError("sweep point " + std::to_string(i) + " (" + sw.variable + " = " +
                         format_double(vals[i]) + "): " + e.what());
    }
  });

  CsvWriter w(output);
  write_header(w, r.effective);
  w.columns({sw.variable, "E", "k", "T", "R", "ln_T"});
  for (const auto& row : rows) w.row(row);
  w.close();
  return 0;
}

inline int run_times(ConfigReader& r, const std::string& output, int threads) {
  const PotentialSpec base = build_potential(r);
  const SweepSpec sw = build_sweep(r, {"E", "L"});
  const double fixed_E = (sw.variable == "L") ? r.d_req("energy") : 0.0;
  const SolveOptions opt = build_solve(r);
  r.cfg.reject_unknown();

  const std::vector<double> vals = sw.values();
  std::vector<std::vector<double>> rows(vals.size());
  parallel_for(static_cast<long>(vals.size()), threads, [&](long i) {
    try {
      const auto [spec, E] = sweep_point(base, sw, fixed_E, vals[i]);
      const ClockReport c = clock_report(spec, E, opt);
      rows[i] = {c.E,          c.T_exact,         c.D_wkb,     c.tau_imag_wkb,
                 c.tau_phase_delay, c.tau_phase_traversal, c.tau_dwell, c.tau_larmor_y,
                 c.tau_larmor_z};
      if (sw.variable == "L") rows[i].insert(rows[i].begin(), vals[i]);
    } catch (const ComputeError& e) {
      throw ComputeError("sweep point " + std::to_string(i) + " (" + sw.variable + " = " +
                         format_double(vals[i]) + "): " + e.what());
    }
  });

  CsvWriter w(output);
  write_header(w, r.effective);
  w.comment("D_wkb = 1 and nan clock columns indicate E at or above the barrier top");
  std::vector<std::string> cols = {"E",
                                   "T_exact",
                                   "D_wkb",
                                   "tau_imag",
                                   "tau_phase_delay",
                                   "tau_phase_traversal",
                                   "tau_dwell",
                                   "tau_larmor_y",
                                   "tau_larmor_z"};
  if (sw.variable == "L") cols.insert(cols.begin(), "L");
  w.columns(cols);
  for (const auto& row : rows) w.row(row);
  w.close();
  return 0;
}

inline int run_larmor(ConfigReader& r, const std::string& output, int threads) {
  const PotentialSpec spec = build_potential(r);
  const double E = r.d_req("energy");
  const SweepSpec sw = build_sweep(r, {"omega_L"});
  const SolveOptions opt = build_solve(r);
  r.cfg.reject_unknown();

  const std::vector<double> vals = sw.values();
  std::vector<std::vector<double>> rows(vals.size());
  parallel_for(static_cast<long>(vals.size()), threads, [&](long i) {
    try {
      const SpinChannelSolution s = larmor_amplitudes(spec, E, vals[i], opt);
      rows[i] = {vals[i], s.P_x,        s.P_y,
                 s.P_z,   -s.P_y / vals[i], s.P_z / vals[i]};
    } catch (const ComputeError& e) {
      throw ComputeError("sweep point " + std::to_string(i) + " (omega_L = " +
                         format_double(vals[i]) + "): " + e.what());
    }
  });

  CsvWriter w(output);
  write_header(w, r.effective);
  if (vals.size() >= 3) {
    std::vector<double> descending(vals.end() - 3, vals.end());
    std::reverse(descending.begin(), descending.end());
    const LarmorResult lr = larmor_times(spec, E, descending, opt);
    w.comment("tau_z_extrapolated = " + format_double(lr.tau_z) +
              " (from the three smallest omega_L)");
    w.comment("tau_y_extrapolated = " + format_double(lr.tau_y));
    w.comment("extrapolation_residual = " + format_double(lr.residual));
  }
  w.columns({"omega_L", "P_x", "P_y", "P_z", "tau_y_est", "tau_z_est"});
  for (const auto& row : rows) w.row(row);
  w.close();
  return 0;
}

inline SusceptibilitySamples build_samples(ConfigReader& r, bool* have_exact) {
  *have_exact = false;
  if (r.cfg.has("kk.input")) {
    const std::string path = r.s_req("kk.input");
    const auto rows = read_numeric_csv(path);
    SusceptibilitySamples smp;
    for (const auto& row : rows) {
      if (row.size() != 2 && row.size() != 3)
        throw ConfigError("kk.input: expected (omega, Im chi) or (omega, Re chi, Im chi)");
      smp.omega.push_back(row[0]);
      smp.chi.emplace_back(row.size() == 3 ? row[1] : 0.0, row.back());
    }
    return smp;
  }
  LorentzParams p;
  p.omega_0 = r.d("kk.omega_0", 1.0);
  p.omega_p = r.d("kk.omega_p", 0.5 * p.omega_0);
  p.gamma = r.d("kk.gamma", 0.05 * p.omega_0);
  const double wmax = r.d("kk.omega_max", 6.0 * p.omega_0);
  const long n = r.l("kk.points", 4096);
  *have_exact = true;
  return lorentz_samples(p, wmax, static_cast<std::size_t>(n));
}

inline int run_kk(ConfigReader& r, const std::string& output, int threads) {
  bool have_exact = false;
  const SusceptibilitySamples smp = build_samples(r, &have_exact);
  const bool have_re = have_exact || !r.cfg.has("kk.input") ||
                       [&] {
                         for (const auto& z : smp.chi)
                           if (z.real() != 0.0) return true;
                         return false;
                       }();

  std::optional<SweepSpec> sw;
  if (r.cfg.has("sweep.variable")) sw = build_sweep(r, {"omega"});
  r.cfg.reject_unknown();

  CsvWriter w(output);
  write_header(w, r.effective);

  if (sw) {
    const std::vector<double> vals = sw->values();
    std::vector<std::vector<double>> rows(vals.size());
    parallel_for(static_cast<long>(vals.size()), threads, [&](long i) {
      try {
        const double re_kk = kk_real_from_imag(smp, vals[i]);
        const double im_kk = have_re ? kk_imag_from_real(smp, vals[i])
                                     : std::numeric_limits<double>::quiet_NaN();
        rows[i] = {vals[i], re_kk, im_kk};
      } catch (const ComputeError& e) {
        throw ComputeError("sweep point " + std::to_string(i) + " (omega = " +
                           format_double(vals[i]) + "): " + e.what());
      }
    });
    w.columns({"omega", "re_chi_kk", "im_chi_kk"});
    for (const auto& row : rows) w.row(row);
    w.close();
    return 0;
  }

  const RefractiveProfile prof = refractive_profile(smp);
  const std::size_t N = smp.omega.size();
  std::vector<std::vector<double>> rows(N - 2);
  parallel_for(static_cast<long>(N - 2), threads, [&](long idx) {
    const std::size_t i = static_cast<std::size_t>(idx) + 1;  // interior only
    try {
      const double re_kk = kk_real_from_imag(smp, smp.omega[i]);
      const double im_kk = have_re ? kk_imag_from_real(smp, smp.omega[i])
                                   : std::numeric_limits<double>::quiet_NaN();
      rows[idx] = {smp.omega[i],       smp.chi[i].real(), smp.chi[i].imag(), re_kk,
                   im_kk,              prof.n[i].real(),  prof.n[i].imag(),  prof.v_phase[i],
                   prof.v_group[i]};
    } catch (const ComputeError& e) {
      throw ComputeError("grid point " + std::to_string(idx) + " (omega = " +
                         format_double(smp.omega[i]) + "): " + e.what());
    }
  });
  w.comment("rows cover the interior of the omega grid (KK needs interior evaluation)");
  w.columns({"omega", "re_chi_in", "im_chi_in", "re_chi_kk", "im_chi_kk", "re_n", "im_n",
             "v_phase", "v_group"});
  for (const auto& row : rows) w.row(row);
  w.close();
  return 0;
}

inline int run_wavepacket(ConfigReader& r, const std::string& output) {
  const PotentialSpec spec = build_potential(r);
  PacketSpec packet;
  packet.mass = spec.mass;
  packet.x0 = r.d_req("wavepacket.x0");
  packet.k0 = r.d_req("wavepacket.k0");
  packet.sigma_x = r.d_req("wavepacket.sigma_x");
  BoxSpec box;
  box.x_min = r.d_req("wavepacket.box_min");
  box.x_max = r.d_req("wavepacket.box_max");
  box.n = static_cast<std::size_t>(r.l("wavepacket.n", 4096));
  const double dx = (box.x_max - box.x_min) / static_cast<double>(box.n);
  const double dt = r.d("wavepacket.dt", 0.1 * packet.mass * dx * dx);
  const double t_final = r.d_req("wavepacket.t_final");
  const double detector = r.d_req("wavepacket.detector_x");
  r.cfg.reject_unknown();

  const FreeComparison cmp = compare_free(packet, spec, detector, box, dt, t_final);
  const EvolutionRun with = evolve(packet, spec, box, dt, t_final);

  const double E0 = packet.k0 * packet.k0 / (2.0 * packet.mass);
  const PhaseTimes pt = phase_time(spec, E0);
  const double predicted = packet.mass * pt.L_ref / packet.k0 - pt.tau_delay;

  CsvWriter w(output);
  write_header(w, r.effective);
  w.comment("arrival_barrier = " + format_double(cmp.arrival_barrier));
  w.comment("arrival_free = " + format_double(cmp.arrival_free));
  w.comment("peak_advance = " + format_double(cmp.advance));
  w.comment("peak_advance_predicted = " + format_double(predicted));
  w.comment("transmitted_fraction = " + format_double(cmp.transmitted_fraction));
  w.comment("snapshot of the barrier run at t_final follows");
  w.columns({"x", "re_psi", "im_psi", "density"});
  const auto& last = with.snapshots.back().psi;
  for (std::size_t j = 0; j < with.x.size(); ++j)
    w.row(std::vector<double>{with.x[j], last[j].real(), last[j].imag(), std::norm(last[j])});
  w.close();
  return 0;
}

inline int run_acceptance_command(ConfigReader& r, const std::string& output) {
  r.cfg.reject_unknown();
  const AcceptanceReport rep = run_acceptance(&std::cout);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw IoError("acceptance: cannot open '" + output + "' for writing");
  out << rep.csv_text;
  out.close();
  if (!rep.all_pass) return 3;
  return 0;
}

}

// Full command dispatch; returns the process exit code.
inline int run_command(const ConfigMap& cfg) {
  detail::ConfigReader r{cfg, {}};
  const std::string command = r.s_req("command");
  const int threads = static_cast<int>(r.l("threads", 1));
  if (threads < 1) throw ConfigError("threads: must be >= 1");
  const std::string output = r.s("output", command + ".csv");
  r.s("verbose", "false");  // accepted for schema completeness

  if (command == "transmission") return detail::run_transmission(r, output, threads);
  if (command == "times") return detail::run_times(r, output, threads);
  if (command == "larmor") return detail::run_larmor(r, output, threads);
  if (command == "kk") return detail::run_kk(r, output, threads);
  if (command == "wavepacket") return detail::run_wavepacket(r, output);
  if (command == "acceptance") return detail::run_acceptance_command(r, output);
  throw ConfigError("command: unknown command '" + command + "'");
}

}
