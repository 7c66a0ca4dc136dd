#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "qtlab/clocks.hpp"
#include "qtlab/csv.hpp"
#include "qtlab/dispersion.hpp"
#include "qtlab/quadrature.hpp"
#include "qtlab/scatter.hpp"
#include "qtlab/version.hpp"
#include "qtlab/wavepacket.hpp"
#include "qtlab/wkb.hpp"

namespace qtlab {

struct AcceptanceCheck {
  std::string label;
  double value;
  double threshold;
  bool leq;  // value <= threshold passes; otherwise value >= threshold
  bool pass() const { return leq ? value <= threshold : value >= threshold; }
};

struct CriterionResult {
  int id;
  std::string name;
  std::vector<AcceptanceCheck> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return true;
  }
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_pass;
  std::string csv_text;
};

namespace detail {

// --- criterion 1: exact-scattering oracle + unitarity sweeps ---------------

inline CriterionResult criterion_scattering_oracle() {
  CriterionResult c{1, "exact scattering oracle and unitarity", {}};
  const PotentialSpec rect{Rectangular{1.0, 0.0, 1.0}, 1.0};
  const double T = scattering_amplitudes(rect, 0.5).T;
  const double closed = 1.0 / (std::cosh(1.0) * std::cosh(1.0));
  c.checks.push_back({"rect_T_vs_closed_form_abs_err", std::abs(T - closed), 1e-8, true});

  const std::vector<std::pair<std::string, PotentialSpec>> shapes = {
      {"rectangular", rect},
      {"gaussian", PotentialSpec{Gaussian{1.0, 0.0, 1.0}, 1.0}},
      {"eckart", PotentialSpec{Eckart{1.0, 1.0}, 1.0}},
  };
  for (const auto& [name, spec] : shapes) {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double E = 0.02 + (3.0 - 0.02) * i / 199.0;
      const ScatteringSolution s = scattering_amplitudes(spec, E);
      worst = std::max(worst, std::abs(s.R + s.T - 1.0));
    }
    c.checks.push_back({"unitarity_" + name + "_max_abs_err", worst, 1e-10, true});
  }
  return c;
}

// --- criterion 2: WKB log-transmission asymptotics --------------------------

inline CriterionResult criterion_wkb_asymptotics() {
  CriterionResult c{2, "WKB transmission asymptotics", {}};
  struct Point {
    std::string label;
    PotentialSpec spec;
    double E;
  };
  const auto rect_for = [](double A, double E) {
    const double kappa = std::sqrt(2.0 * (1.0 - E));
    return PotentialSpec{Rectangular{1.0, 0.0, A / kappa}, 1.0};
  };
  const std::vector<Point> pts = {
      {"rect_A5_E0.05", rect_for(5.0, 0.05), 0.05},
      {"rect_A8_E0.05", rect_for(8.0, 0.05), 0.05},
      {"rect_A12_E0.1", rect_for(12.0, 0.1), 0.1},
      {"gauss_s6_E0.5", PotentialSpec{Gaussian{1.0, 0.0, 6.0}, 1.0}, 0.5},
      {"gauss_s6_E0.3", PotentialSpec{Gaussian{1.0, 0.0, 6.0}, 1.0}, 0.3},
      {"gauss_s8_E0.5", PotentialSpec{Gaussian{1.0, 0.0, 8.0}, 1.0}, 0.5},
  };
  for (const auto& p : pts) {
    const double lnT = 2.0 * scattering_amplitudes(p.spec, p.E).log_t_mag;
    const double lnD = -2.0 * barrier_action(p.spec, p.E);
    c.checks.push_back({"lnD_vs_lnT_rel_" + p.label, std::abs(lnD - lnT) / std::abs(lnT),
                        0.05, true});
  }
  return c;
}

// --- criterion 3: imaginary-time closed form + action-derivative identity ---

inline CriterionResult criterion_imaginary_time() {
  CriterionResult c{3, "imaginary traversal time identities", {}};
  const std::vector<std::pair<std::string, double>> energies = {{"E0.5", 0.5}, {"E0.3", 0.3}};
  for (const auto& [tag, E] : energies) {
    const PotentialSpec rect{Rectangular{1.0, 0.0, 1.0}, 1.0};
    const double tau = imaginary_traversal_time(rect, E);
    const double closed = 1.0 / std::sqrt(2.0 * (1.0 - E));
    c.checks.push_back(
        {"rect_tau_closed_form_rel_" + tag, std::abs(tau - closed) / closed, 1e-12, true});
  }
  const PotentialSpec gauss{Gaussian{1.0, 0.0, 1.0}, 1.0};
  const double E = 0.5, h = 1e-4;
  const double dAdE = (barrier_action(gauss, E + h) - barrier_action(gauss, E - h)) / (2.0 * h);
  const double tau = imaginary_traversal_time(gauss, E);
  c.checks.push_back({"gauss_dAdE_plus_tau_rel", std::abs(dAdE + tau) / tau, 1e-4, true});
  return c;
}

// --- criterion 4: Larmor clock vs imaginary time ----------------------------

inline CriterionResult criterion_larmor() {
  CriterionResult c{4, "Larmor spin-rotation time vs imaginary time", {}};
  struct Point {
    std::string label;
    PotentialSpec spec;
    double E;
  };
  const std::vector<Point> pts = {
      {"rect_L5", PotentialSpec{Rectangular{1.0, 0.0, 5.0}, 1.0}, 0.5},
      {"rect_L8", PotentialSpec{Rectangular{1.0, 0.0, 8.0}, 1.0}, 0.5},
      {"gauss_s48", PotentialSpec{Gaussian{1.0, 0.0, 48.0}, 1.0}, 0.3},
  };
  for (const auto& p : pts) {
    const LarmorResult lr = larmor_times(p.spec, p.E);
    const double tau = imaginary_traversal_time(p.spec, p.E);
    c.checks.push_back(
        {"tau_z_ratio_dev_" + p.label, std::abs(lr.tau_z / tau - 1.0), 0.10, true});
    std::vector<double> halved;
    for (double w : lr.omegas) halved.push_back(0.5 * w);
    const LarmorResult lr2 = larmor_times(p.spec, p.E, halved);
    c.checks.push_back({"tau_z_halved_omega_rel_change_" + p.label,
                        std::abs(lr2.tau_z / lr.tau_z - 1.0), 1e-3, true});
  }
  return c;
}

// --- criterion 5: Hartman saturation of the phase delay ---------------------

inline CriterionResult criterion_hartman() {
  CriterionResult c{5, "Hartman saturation of the phase-time delay", {}};
  const PotentialSpec rect8{Rectangular{1.0, 0.0, 8.0}, 1.0};
  const PotentialSpec rect16{Rectangular{1.0, 0.0, 16.0}, 1.0};
  const PhaseTimes p8 = phase_time(rect8, 0.5);
  const PhaseTimes p16 = phase_time(rect16, 0.5);
  c.checks.push_back({"delay_rel_change_kL8_to_kL16",
                      std::abs(p16.tau_delay - p8.tau_delay) / std::abs(p8.tau_delay), 0.01,
                      true});
  const double ff8 = p8.tau_traversal - p8.tau_delay;
  const double ff16 = p16.tau_traversal - p16.tau_delay;
  c.checks.push_back({"free_flight_doubling_rel_err", std::abs(ff16 / ff8 - 2.0), 1e-12, true});
  return c;
}

// --- criterion 6: Kramers-Kronig closure + refinement ------------------------

inline double kk_probe_error(const SusceptibilitySamples& smp, const LorentzParams& p) {
  double worst = 0.0;
  for (int i = 0; i < 301; ++i) {
    const double w = (0.05 + (5.5 - 0.05) * i / 300.0) * p.omega_0;
    if (std::abs(w - p.omega_0) <= 2.0 * p.gamma) continue;
    const double rec = kk_real_from_imag(smp, w);
    const double exact = lorentz_susceptibility(p, w).real();
    worst = std::max(worst, std::abs(rec - exact) / std::abs(exact));
  }
  return worst;
}

inline CriterionResult criterion_kk() {
  CriterionResult c{6, "Kramers-Kronig closure on the Lorentz model", {}};
  const LorentzParams p{0.5, 1.0, 0.05};
  const double e1 = kk_probe_error(lorentz_samples(p, 6.0, 4096), p);
  const double e2 = kk_probe_error(lorentz_samples(p, 6.0, 8192), p);
  const double e3 = kk_probe_error(lorentz_samples(p, 6.0, 16384), p);
  c.checks.push_back({"max_rel_err_outside_2gamma", e1, 0.01, true});
  c.checks.push_back({"doubling_ratio_1", e2 / e1, 1.0, true});
  c.checks.push_back({"doubling_ratio_2", e3 / e2, 1.0, true});
  return c;
}

// --- criterion 7: anomalous group velocity -----------------------------------

inline CriterionResult criterion_group_velocity() {
  CriterionResult c{7, "anomalous group velocity bands", {}};
  const LorentzParams p{0.5, 1.0, 0.05};
  const RefractiveProfile prof = refractive_profile(lorentz_samples(p, 6.0, 4096));
  double vg_max = 0.0, vg_min = 0.0;
  for (double v : prof.v_group) {
    vg_max = std::max(vg_max, v);
    vg_min = std::min(vg_min, v);
  }
  c.checks.push_back({"max_v_group", vg_max, 1.0, false});
  c.checks.push_back({"min_v_group", vg_min, 0.0, true});
  return c;
}

// --- criterion 8: wave-packet consistency -------------------------------------

// Flat-top barrier with raised-cosine shoulders.  A discontinuous edge
// sampled on the evolution grid shifts ln T by O(kappa dx), and a Gaussian
// spends too long under the turning points for the narrow-band timing check,
// so the barrier is flat over |x| <= flat/2 and rolls off smoothly over one
// shoulder width on each side.
inline PotentialSpec acceptance_barrier() {
  Sampled s;
  const double v0 = 2.0, flat = 4.5, w = 1.0;
  const double half = 0.5 * flat + w + 0.2;
  const double step = 0.02;
  for (double x = -half; x <= half + 1e-12; x += step) {
    double u = 0.0;
    const double ax = std::abs(x);
    if (ax <= 0.5 * flat) {
      u = v0;
    } else if (ax < 0.5 * flat + w) {
      const double cs = std::cos(0.5 * M_PI * (ax - 0.5 * flat) / w);
      u = v0 * cs * cs;
    }
    s.x.push_back(x);
    s.u.push_back(u);
  }
  return PotentialSpec{std::move(s), 1.0};
}

inline CriterionResult criterion_wavepacket() {
  CriterionResult c{8, "wave-packet transport consistency", {}};
  const PotentialSpec barrier = acceptance_barrier();
  const PacketSpec packet{-235.0, 0.75, 25.0 / 0.75, 1.0};
  const BoxSpec box{-1152.0, 896.0, 8192};
  const double dt = 0.00625, t_final = 520.0, detector = 12.0;

  const EvolutionRun with = evolve(packet, barrier, box, dt, t_final);
  const EvolutionRun free_run = evolve(packet, std::nullopt, box, dt, t_final);

  double norm_drift = 0.0;
  for (const EvolutionRun* r : {&with, &free_run})
    for (double nv : r->norm_history)
      norm_drift = std::max(norm_drift, std::abs(nv / r->norm_history.front() - 1.0));
  c.checks.push_back({"norm_drift_max", norm_drift, 1e-8, true});

  // free-packet center and spread laws; center error scaled by the ballistic
  // excursion |x0| + k0 t_final / m since <x> crosses zero mid-run
  const double scale = std::abs(packet.x0) + packet.k0 / packet.mass * t_final;
  double worst_center = 0.0, worst_width = 0.0;
  for (std::size_t s = 0; s < free_run.snapshots.size(); ++s) {
    const auto& snap = free_run.snapshots[s];
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    for (std::size_t j = 0; j < free_run.x.size(); ++j) {
      const double d = std::norm(snap.psi[j]);
      p0 += d;
      p1 += d * free_run.x[j];
      p2 += d * free_run.x[j] * free_run.x[j];
    }
    const double mean = p1 / p0;
    const double var = p2 / p0 - mean * mean;
    const double mean_ref = packet.x0 + packet.k0 / packet.mass * snap.time;
    const double t2 = snap.time * snap.time;
    const double var_ref = packet.sigma_x * packet.sigma_x +
                           t2 / (4.0 * packet.mass * packet.mass * packet.sigma_x *
                                 packet.sigma_x);
    worst_center = std::max(worst_center, std::abs(mean - mean_ref) / scale);
    worst_width = std::max(worst_width, std::abs(var - var_ref) / var_ref);
  }
  c.checks.push_back({"free_center_rel_err", worst_center, 1e-6, true});
  c.checks.push_back({"free_width_rel_err", worst_width, 1e-6, true});

  // transmitted fraction vs the spectral oracle
  const double frac = transmitted_fraction(with, 4.0);
  const double sk = 1.0 / (2.0 * packet.sigma_x);
  const double wnorm = std::sqrt(2.0 * packet.sigma_x * packet.sigma_x / M_PI);
  const auto integrand = [&](double k) {
    const double dk = k - packet.k0;
    const double w = wnorm * std::exp(-2.0 * packet.sigma_x * packet.sigma_x * dk * dk);
    return w * scattering_amplitudes(barrier, k * k / (2.0 * packet.mass)).T;
  };
  const QuadResult oracle =
      integrate_adaptive(integrand, packet.k0 - 8.0 * sk, packet.k0 + 8.0 * sk, 1e-9);
  c.checks.push_back(
      {"transmitted_fraction_vs_oracle_rel", std::abs(frac / oracle.value - 1.0), 0.01, true});

  // narrow-band peak advance vs the phase-time prediction
  const double arr_with = peak_arrival(with, detector);
  const double arr_free = peak_arrival(free_run, detector);
  const double advance = arr_free - arr_with;
  const PhaseTimes pt = phase_time(barrier, packet.k0 * packet.k0 / (2.0 * packet.mass));
  const double k = packet.k0;
  const double predicted = packet.mass * pt.L_ref / k - pt.tau_delay;
  c.checks.push_back(
      {"peak_advance_vs_prediction_rel", std::abs(advance / predicted - 1.0), 0.15, true});
  return c;
}

inline std::string acceptance_rows(const std::vector<CriterionResult>& criteria) {
  std::string text;
  for (const auto& cr : criteria)
    for (const auto& ch : cr.checks)
      text += std::to_string(cr.id) + "," + cr.name + "," + ch.label + "," +
              format_double(ch.value) + "," + format_double(ch.threshold) + "," +
              (ch.leq ? "le" : "ge") + "," + (ch.pass() ? "pass" : "fail") + "\n";
  return text;
}

inline std::vector<CriterionResult> run_criteria_1_to_8(std::ostream* progress) {
  std::vector<CriterionResult> out;
  const auto push = [&](CriterionResult cr) {
    if (progress)
      *progress << (cr.pass() ? "[PASS]" : "[FAIL]") << " criterion " << cr.id << ": "
                << cr.name << "\n";
    out.push_back(std::move(cr));
  };
  push(criterion_scattering_oracle());
  push(criterion_wkb_asymptotics());
  push(criterion_imaginary_time());
  push(criterion_larmor());
  push(criterion_hartman());
  push(criterion_kk());
  push(criterion_group_velocity());
  push(criterion_wavepacket());
  return out;
}

}

// Runs the full acceptance suite; criterion 9 re-runs criteria 1-8 and
// demands byte-identical result rows.
inline AcceptanceReport run_acceptance(std::ostream* progress = nullptr) {
  AcceptanceReport rep;
  rep.criteria = detail::run_criteria_1_to_8(progress);
  const std::string rows1 = detail::acceptance_rows(rep.criteria);
  const std::string rows2 = detail::acceptance_rows(detail::run_criteria_1_to_8(nullptr));
  CriterionResult det{9, "determinism of repeated acceptance runs", {}};
  det.checks.push_back({"rerun_rows_identical", rows1 == rows2 ? 1.0 : 0.0, 1.0, false});
  if (progress)
    *progress << (det.pass() ? "[PASS]" : "[FAIL]") << " criterion " << det.id << ": "
              << det.name << "\n";
  rep.criteria.push_back(det);

  rep.all_pass = true;
  for (const auto& cr : rep.criteria) rep.all_pass = rep.all_pass && cr.pass();

  rep.csv_text = "# qtlab " + std::string(kVersion) + " acceptance report\n";
  rep.csv_text += "criterion,name,check,value,threshold,comparison,status\n";
  rep.csv_text += detail::acceptance_rows(rep.criteria);
  return rep;
}

}
