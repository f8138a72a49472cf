// Copyright 2026 The cddspec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cddspec: continuous-drive qubit noise spectroscopy toolkit.
//
// Subcommands (all file based, deterministic under fixed seeds):
//   synth         PSD -> noise trajectories (+ Welch cross-check)
//   simulate      PSD + drive list -> Monte-Carlo decay curves / Omega scan
//   estimate      decay curves -> rectangular S0 + gradient-refined S(omega)
//   lln-fit       Rabi-oscillation curves near a strong tone -> tone report
//   discriminate  two transition spectra -> laser + magnetic PSDs
//   beatnote      laser PSDs -> heterodyne electrical spectrum
//   pipeline      planted spectra -> all of the above + recovery summary

#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cddspec/beatnote.hpp"
#include "cddspec/discriminator.hpp"
#include "cddspec/estimator.hpp"
#include "cddspec/filter_analytics.hpp"
#include "cddspec/io.hpp"
#include "cddspec/lln_model.hpp"
#include "cddspec/noise_synth.hpp"
#include "cddspec/psd_model.hpp"
#include "cddspec/qubit_sim.hpp"
#include "cddspec/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cddspec;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Tracks files written by the current run so a failure can clean up.
struct Run {
  std::string out_dir;
  Provenance prov;
  std::vector<std::string> files;

  std::string path(const std::string& name) const { return out_dir + "/" + name; }
  std::string track(const std::string& name) {
    files.push_back(path(name));
    return files.back();
  }
  void discard_artifacts() {
    for (const auto& f : files) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
};

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
  return base ^ fnv1a64(tag);
}

PsdModel psd_from_config(const json& node, const std::string& base_dir) {
  if (node.is_string()) {
    const std::string p = node.get<std::string>();
    const std::string full = fs::path(p).is_absolute() ? p : base_dir + "/" + p;
    if (full.size() > 4 && full.substr(full.size() - 4) == ".csv") return read_psd_csv(full);
    return read_psd_json(full);
  }
  return psd_from_json_text(node.dump());
}

std::vector<double> times_from_config(const json& node) {
  if (node.is_array()) return node.get<std::vector<double>>();
  const double start = node.at("start_s").get<double>();
  const double stop = node.at("stop_s").get<double>();
  const std::size_t count = node.at("count").get<std::size_t>();
  if (count < 2 || !(stop > start) || !(start > 0.0)) {
    throw std::invalid_argument("times: need start_s > 0, stop_s > start_s, count >= 2");
  }
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = start + (stop - start) * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return out;
}

std::vector<double> omega_list_from_config(const json& node) {
  if (node.is_array()) return node.get<std::vector<double>>();
  const double start = node.at("start_rad_s").get<double>();
  const double stop = node.at("stop_rad_s").get<double>();
  const std::size_t count = node.at("count").get<std::size_t>();
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = start + (stop - start) * static_cast<double>(j) /
                         static_cast<double>(std::max<std::size_t>(count - 1, 1));
  }
  return out;
}

Frame frame_from_config(const json& cfg) {
  const std::string f = cfg.value("frame", "rotating");
  if (f == "rotating") return Frame::kRotating;
  if (f == "lln-interaction") return Frame::kLlnInteraction;
  throw std::invalid_argument("unknown frame '" + f + "'");
}

json provenance_node(const Provenance& p) {
  return json{{"seed", p.seed}, {"config_hash", p.config_hash}, {"version", p.version}};
}

// ---------------------------------------------------------------------------
// synth

void cmd_synth(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t seed) {
  const PsdModel psd = psd_from_config(cfg.at("psd"), base_dir);
  const double dt = cfg.at("dt_s").get<double>();
  const std::size_t n = cfg.at("n").get<std::size_t>();
  const std::size_t n_traj = cfg.value("n_traj", 1);
  const bool emit = cfg.value("emit_trajectories", false);
  const std::size_t seg = cfg.value("estimate_segment_len", 0);

  PsdModel avg;
  for (std::size_t k = 0; k < n_traj; ++k) {
    const auto traj = synthesize(psd, dt, n, seed + k);
    if (emit) {
      std::string text = run.prov.comment_line() + "t_s,f_rad_s\n";
      for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        text += format_double(static_cast<double>(i) * dt) + "," +
                format_double(traj.samples[i]) + "\n";
      }
      char name[64];
      std::snprintf(name, sizeof(name), "traj_%03zu.csv", k);
      write_text_file(run.track(name), text);
    }
    if (seg > 0) {
      const auto est = estimate_psd(traj, seg);
      if (avg.grid.empty()) {
        avg = est;
      } else {
        for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] += est.values[i];
      }
    }
  }
  json summary{{"provenance", provenance_node(run.prov)},
               {"n_traj", n_traj},
               {"n", n},
               {"dt_s", dt}};
  if (seg > 0) {
    for (auto& v : avg.values) v /= static_cast<double>(n_traj);
    write_psd_csv(run.track("psd_estimate.csv"), avg, run.prov);
    summary["psd_estimate"] = "psd_estimate.csv";
  }
  write_text_file(run.track("synth_summary.json"), summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// simulate

void cmd_simulate(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t seed) {
  const PsdModel psd = psd_from_config(cfg.at("psd"), base_dir);
  const double delta_a = cfg.value("delta_a_rad_s", 0.0);

  McOptions opts;
  opts.frame = frame_from_config(cfg);
  opts.n_shots = cfg.value("n_shots", 0);
  if (cfg.contains("points_per_period")) {
    opts.points_per_period = cfg.at("points_per_period").get<double>();
  }

  json manifest{{"provenance", provenance_node(run.prov)}, {"curves", json::array()}};

  if (cfg.contains("omegas_rad_s") && cfg.contains("times_s")) {
    const auto omegas = omega_list_from_config(cfg.at("omegas_rad_s"));
    const auto times = times_from_config(cfg.at("times_s"));
    const std::size_t n_traj = cfg.at("n_traj").get<std::size_t>();
    for (std::size_t c = 0; c < omegas.size(); ++c) {
      DriveConfig drive;
      drive.omega = omegas[c];
      drive.stark_shift = delta_a;
      drive.times = times;
      const std::uint64_t curve_seed = seed + 1000003ULL * (c + 1);
      const auto curve = monte_carlo_decay(psd, drive, n_traj, curve_seed, opts);

      char name[64];
      std::snprintf(name, sizeof(name), "curve_%03zu.csv", c);
      DecayCurveMeta meta;
      meta.omega = omegas[c];
      meta.delta_a = delta_a;
      meta.n_traj = n_traj;
      meta.seed = curve_seed;
      write_decay_curve(run.track(name), curve, meta, run.prov);
      run.files.push_back(
          run.path(std::string(name).substr(0, std::string(name).size() - 4) + ".json"));
      manifest["curves"].push_back({{"path", name},
                                    {"omega_rad_s", omegas[c]},
                                    {"delta_a_rad_s", delta_a},
                                    {"n_traj", n_traj},
                                    {"seed", curve_seed}});
    }
  }

  if (cfg.contains("omega_scan")) {
    const auto& scan = cfg.at("omega_scan");
    const auto omegas = omega_list_from_config(scan.at("omegas_rad_s"));
    const double t = scan.at("t_s").get<double>();
    const std::size_t n_traj = scan.at("n_traj").get<std::size_t>();
    std::string text = run.prov.comment_line() + "omega_rad_s,p_s,stderr\n";
    for (std::size_t c = 0; c < omegas.size(); ++c) {
      DriveConfig drive;
      drive.omega = omegas[c];
      drive.stark_shift = delta_a;
      drive.times = {t};
      const auto curve = monte_carlo_decay(psd, drive, n_traj, seed + 7000003ULL * (c + 1), opts);
      text += format_double(omegas[c]) + "," + format_double(curve.p_s[0]) + "," +
              format_double(curve.stderr_[0]) + "\n";
    }
    write_text_file(run.track("scan.csv"), text);
    manifest["scan"] = {{"path", "scan.csv"}, {"t_s", t}, {"n_traj", n_traj}};
  }

  write_text_file(run.track("curves_manifest.json"), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// curve loading shared by estimate / lln-fit

std::vector<DecayCurve> load_curves(const json& cfg, const std::string& base_dir,
                                    std::vector<DecayCurveMeta>* metas) {
  std::vector<std::string> paths;
  if (cfg.contains("curves")) {
    for (const auto& p : cfg.at("curves")) paths.push_back(p.get<std::string>());
  } else if (cfg.contains("manifest")) {
    const std::string mpath = cfg.at("manifest").get<std::string>();
    const std::string full = fs::path(mpath).is_absolute() ? mpath : base_dir + "/" + mpath;
    const json manifest = json::parse(read_text_file(full));
    const std::string mdir = fs::path(full).parent_path().string();
    for (const auto& entry : manifest.at("curves")) {
      paths.push_back(mdir + "/" + entry.at("path").get<std::string>());
    }
  } else {
    throw std::invalid_argument("config needs 'curves' or 'manifest'");
  }
  std::vector<DecayCurve> curves;
  for (auto& p : paths) {
    const std::string full = fs::path(p).is_absolute() ? p : base_dir + "/" + p;
    DecayCurveMeta meta;
    curves.push_back(read_decay_curve(full, &meta));
    if (metas) metas->push_back(meta);
  }
  return curves;
}

// ---------------------------------------------------------------------------
// estimate

void cmd_estimate(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t) {
  std::vector<DecayCurveMeta> metas;
  auto curves = load_curves(cfg, base_dir, &metas);
  if (curves.empty()) throw std::invalid_argument("estimate: no curves");

  std::vector<LlnTone> tones;
  if (cfg.contains("tones")) {
    for (const auto& t : cfg.at("tones")) {
      tones.push_back(
          {t.at("omega0_rad_s").get<double>(), t.at("omega_lln_rad_s").get<double>(), 0.0});
    }
  } else if (cfg.contains("tone_report")) {
    const std::string rp = cfg.at("tone_report").get<std::string>();
    const std::string full = fs::path(rp).is_absolute() ? rp : base_dir + "/" + rp;
    const json rep = json::parse(read_text_file(full));
    tones.push_back({rep.at("pooled").at("omega0_rad_s").get<double>(),
                     rep.at("pooled").at("omega_lln_rad_s").get<double>(), 0.0});
  }

  // Rectangular stage: per-curve (S0, delta_a); contaminated curves dropped.
  json rect_rows = json::array();
  std::vector<DecayCurve> kept;
  std::vector<double> delta_a;
  std::vector<std::pair<double, double>> s0_points;  // (omega, S0)
  double t_max = 0.0, omega_lo = 1e300, omega_hi = 0.0;
  std::string rect_csv = run.prov.comment_line() +
                         "omega_rad_s,S0_rad2_per_hz,S0_sigma,delta_a_rad_s,delta_a_sigma,status\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto fit = rectangular_estimate(curves[c]);
    const char* status = fit.status == RectStatus::kOk
                             ? "ok"
                             : (fit.status == RectStatus::kToneContamination ? "tone_contamination"
                                                                             : "nonconvergence");
    rect_csv += format_double(curves[c].omega) + "," + format_double(fit.s) + "," +
                format_double(fit.s_sigma) + "," + format_double(fit.delta_a) + "," +
                format_double(fit.delta_a_sigma) + "," + status + "\n";
    rect_rows.push_back({{"omega_rad_s", curves[c].omega},
                         {"s0", fit.s},
                         {"s0_sigma", fit.s_sigma},
                         {"delta_a_rad_s", fit.delta_a},
                         {"delta_a_sigma", fit.delta_a_sigma},
                         {"chi2_red", fit.chi2_red},
                         {"status", status}});
    if (fit.status != RectStatus::kOk) continue;
    kept.push_back(curves[c]);
    delta_a.push_back(fit.delta_a);
    s0_points.push_back({curves[c].omega, fit.s});
    t_max = std::max(t_max, curves[c].times.back());
    omega_lo = std::min(omega_lo, curves[c].omega);
    omega_hi = std::max(omega_hi, curves[c].omega);
  }
  write_text_file(run.track("rectangular.csv"), rect_csv);
  if (kept.size() < 2) throw std::runtime_error("estimate: fewer than 2 usable curves");

  // Target grid: defaults derived from the usable curves.
  const json gcfg = cfg.value("grid", json::object());
  const double margin = kPi / t_max;
  const double g_lo = gcfg.value("omega_min_rad_s", std::max(omega_lo - margin, kTwoPi * 10.0));
  const double g_hi = gcfg.value("omega_max_rad_s", omega_hi + margin);
  const double knee = gcfg.value("log_knee_rad_s", kTwoPi * 2e3);
  const std::size_t lppd = gcfg.value("log_points_per_decade", 6);
  auto grid = make_reconstruction_grid(g_lo, g_hi, t_max, knee, lppd);
  if (!tones.empty()) {
    const double mask_t = cfg.value("mask_t_ref_s", t_max);
    grid = mask_tones(grid, tones, mask_t);
  }

  // Init: rectangular points interpolated onto the grid.
  std::sort(s0_points.begin(), s0_points.end());
  PsdModel init;
  for (const auto& [w, s] : s0_points) {
    if (!init.grid.empty() && w <= init.grid.back()) continue;
    init.grid.push_back(w);
    init.values.push_back(std::max(s, 0.0));
  }
  PsdModel init_on_grid;
  init_on_grid.grid = grid;
  for (double w : grid) init_on_grid.values.push_back(init.evaluate(w));

  RefineHyper hyper;
  const json hcfg = cfg.value("hyper", json::object());
  hyper.max_iter = hcfg.value("max_iter", 2000);
  hyper.tol = hcfg.value("tol", 1e-6);

  auto problem = ReconstructionProblem::build(kept, delta_a, grid, init_on_grid, hyper, tones);
  const auto result = gradient_refine(problem);

  write_psd_csv(run.track("s_refined.csv"), result.s, run.prov);
  write_psd_json(run.track("s_refined.json"), result.s, run.prov);
  write_iteration_log_csv(run.track("iterations.csv"), result.log, run.prov);

  const json summary{
      {"provenance", provenance_node(run.prov)},
      {"rectangular", rect_rows},
      {"curves_used", kept.size()},
      {"grid_size", grid.size()},
      {"iterations", result.log.size()},
      {"j_initial", result.log.front().j},
      {"j_final", result.log.back().j},
      {"status", result.status == RefineStatus::kConverged
                     ? "converged"
                     : (result.status == RefineStatus::kMaxIterations ? "max_iterations"
                                                                      : "line_search_failed")},
      {"message", result.message}};
  write_text_file(run.track("estimate_summary.json"), summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// lln-fit

void cmd_lln_fit(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t) {
  auto curves = load_curves(cfg, base_dir, nullptr);
  LlnFitOptions opts;
  opts.gamma_v_zero = cfg.value("gamma_v_zero", true);
  if (cfg.contains("chi2_red_gate")) opts.chi2_red_gate = cfg.at("chi2_red_gate").get<double>();
  const auto report = fit_lln(curves, opts);
  write_text_file(run.track("lln_report.json"), lln_report_to_json(report, run.prov));
}

// ---------------------------------------------------------------------------
// discriminate

void cmd_discriminate(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t) {
  const PsdModel s13 = psd_from_config(cfg.at("s13"), base_dir);
  const PsdModel s12 = psd_from_config(cfg.at("s12"), base_dir);
  ZeemanTransition tr13{-0.5, -2.5};
  ZeemanTransition tr12{-0.5, -0.5};
  if (cfg.contains("g_s")) tr13.g_s = tr12.g_s = cfg.at("g_s").get<double>();
  if (cfg.contains("g_d")) tr13.g_d = tr12.g_d = cfg.at("g_d").get<double>();

  const auto result = discriminate(s13, s12, tr13, tr12);
  write_psd_csv(run.track("s_laser.csv"), result.s_laser, run.prov, &result.clamped_laser);
  write_psd_csv(run.track("s_magnetic.csv"), result.s_magnetic, run.prov,
                &result.clamped_magnetic);
  write_psd_json(run.track("s_laser.json"), result.s_laser, run.prov);

  std::size_t clamped = 0;
  for (auto f : result.clamped_laser) clamped += f;
  for (auto f : result.clamped_magnetic) clamped += f;
  const json summary{{"provenance", provenance_node(run.prov)},
                     {"k12", sensitivity(tr12)},
                     {"k13", sensitivity(tr13)},
                     {"grid_size", result.s_laser.grid.size()},
                     {"clamped_points", clamped}};
  write_text_file(run.track("discriminate_summary.json"), summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// beatnote

void cmd_beatnote(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t) {
  BeatnoteConfig bn;
  bn.s1 = psd_from_config(cfg.at("s1"), base_dir);
  if (cfg.contains("s2") && !cfg.at("s2").is_null()) {
    bn.s2 = psd_from_config(cfg.at("s2"), base_dir);
  }
  bn.omega0 = cfg.value("omega0_rad_s", 0.0);
  bn.amp_product = cfg.value("amp_product", 1.0);
  bn.tau_count = cfg.value("tau_count", std::size_t{16384});
  bn.tau_max = cfg.value("tau_max_s", 0.0);
  if (bn.tau_max <= 0.0) {
    BeatnoteConfig probe = bn;
    probe.tau_max = 1.0;
    probe.omegas = {bn.omega0};
    bn.tau_max = suggest_tau_max(probe);
  }
  const auto& gcfg = cfg.at("omega_grid");
  const double center = gcfg.value("center_rad_s", bn.omega0);
  const double span = gcfg.at("span_rad_s").get<double>();
  const std::size_t count = gcfg.at("count").get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i) {
    bn.omegas.push_back(center - span +
                        2.0 * span * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  const auto spec = simulate_beatnote(bn);
  write_beatnote_csv(run.track("beatnote.csv"), spec, run.prov);
  const json summary{{"provenance", provenance_node(run.prov)},
                     {"tau_max_s", bn.tau_max},
                     {"tau_count", bn.tau_count},
                     {"points", spec.omegas.size()}};
  write_text_file(run.track("beatnote_summary.json"), summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// pipeline

struct TransitionOutputs {
  std::string name;
  PsdModel refined;
  std::vector<LlnFitReport> tone_reports;
};

double band_avg_rel_error(const PsdModel& estimate, const PsdModel& truth, double lo, double hi,
                          const std::vector<LlnTone>& skip_tones, double skip_width) {
  double err = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < 256; ++i) {
    const double w = lo + (hi - lo) * i / 255.0;
    bool skip = false;
    for (const auto& tone : skip_tones) {
      if (std::abs(w - tone.omega0) < skip_width) skip = true;
    }
    if (skip) continue;
    const double t = truth.evaluate(w);
    if (t <= 0.0) continue;
    err += std::abs(estimate.evaluate(w) - t) / t;
    ++n;
  }
  return n > 0 ? err / static_cast<double>(n) : 0.0;
}

void cmd_pipeline(Run& run, const json& cfg, const std::string& base_dir, std::uint64_t seed) {
  const PsdModel planted_laser = psd_from_config(cfg.at("planted").at("s_laser"), base_dir);
  const PsdModel planted_magnetic = psd_from_config(cfg.at("planted").at("s_magnetic"), base_dir);

  json summary{{"provenance", provenance_node(run.prov)}, {"transitions", json::array()}};
  std::vector<TransitionOutputs> outputs;

  for (const auto& trc : cfg.at("transitions")) {
    const std::string name = trc.at("name").get<std::string>();
    ZeemanTransition tr{trc.at("m_s").get<double>(), trc.at("m_d").get<double>(), 2.0, 1.2};
    const PsdModel psd_tr = compose_transition_psd(planted_laser, planted_magnetic, tr);
    const std::string dir = name;
    fs::create_directories(run.path(dir));
    const std::uint64_t tr_seed = derive_seed(seed, "transition/" + name);

    json tr_summary{{"name", name}, {"k", sensitivity(tr)}};

    // Omega scan (the fixed-t survival sweep that exposes strong tones).
    if (cfg.contains("scan")) {
      const auto& scan = cfg.at("scan");
      const auto omegas = omega_list_from_config(scan.at("omegas_rad_s"));
      const double t = scan.at("t_s").get<double>();
      const std::size_t n_traj = scan.at("n_traj").get<std::size_t>();
      std::string text = run.prov.comment_line() + "omega_rad_s,p_s,stderr\n";
      for (std::size_t c = 0; c < omegas.size(); ++c) {
        DriveConfig drive;
        drive.omega = omegas[c];
        drive.times = {t};
        const auto curve = monte_carlo_decay(psd_tr, drive, n_traj, tr_seed + 7000003ULL * (c + 1));
        text += format_double(omegas[c]) + "," + format_double(curve.p_s[0]) + "," +
                format_double(curve.stderr_[0]) + "\n";
      }
      write_text_file(run.track(dir + "/scan.csv"), text);
      tr_summary["scan"] = dir + "/scan.csv";
    }

    // Strong-tone stage: Rabi curves near each expected tone, pooled fits.
    std::vector<LlnFitReport> tone_reports;
    std::vector<LlnTone> fitted_tones;
    if (cfg.contains("lln")) {
      json tone_rows = json::array();
      std::size_t tone_idx = 0;
      for (const auto& block : cfg.at("lln")) {
        const auto omegas = omega_list_from_config(block.at("omegas_rad_s"));
        const auto times = times_from_config(block.at("times_s"));
        const std::size_t n_traj = block.at("n_traj").get<std::size_t>();
        McOptions opts;
        opts.n_shots = block.value("n_shots", 0);
        std::vector<DecayCurve> curves;
        for (std::size_t c = 0; c < omegas.size(); ++c) {
          DriveConfig drive;
          drive.omega = omegas[c];
          drive.times = times;
          curves.push_back(monte_carlo_decay(
              psd_tr, drive, n_traj,
              derive_seed(tr_seed, "lln" + std::to_string(tone_idx)) + 11ULL * c, opts));
        }
        const auto report = fit_lln(curves);
        char rp[80];
        std::snprintf(rp, sizeof(rp), "%s/lln_report_%zu.json", dir.c_str(), tone_idx);
        write_text_file(run.track(rp), lln_report_to_json(report, run.prov));
        tone_reports.push_back(report);
        if (report.n_used > 0) {
          fitted_tones.push_back({report.omega0, report.omega_lln, 0.0});
          tone_rows.push_back({{"omega0_rad_s", report.omega0},
                               {"omega0_sigma_rad_s", report.omega0_sigma},
                               {"omega_lln_rad_s", report.omega_lln},
                               {"omega_lln_sigma_rad_s", report.omega_lln_sigma},
                               {"s_pi_e0_sq", report.s_pi_e0_sq}});
        }
        ++tone_idx;
      }
      tr_summary["tones"] = tone_rows;
    }

    // Smooth-spectrum stage: decay curves away from tones, rectangular fits,
    // gradient refinement with the fitted tones masked and held fixed.
    const auto& sim = cfg.at("simulate");
    const auto omegas = omega_list_from_config(sim.at("omegas_rad_s"));
    const auto times = times_from_config(sim.at("times_s"));
    const std::size_t n_traj = sim.at("n_traj").get<std::size_t>();
    const double delta_a = sim.value("delta_a_rad_s", 0.0);
    McOptions mc_opts;
    mc_opts.n_shots = sim.value("n_shots", 0);

    std::vector<DecayCurve> curves;
    json manifest{{"provenance", provenance_node(run.prov)}, {"curves", json::array()}};
    for (std::size_t c = 0; c < omegas.size(); ++c) {
      DriveConfig drive;
      drive.omega = omegas[c];
      drive.stark_shift = delta_a;
      drive.times = times;
      const std::uint64_t curve_seed = derive_seed(tr_seed, "curve") + 1000003ULL * c;
      curves.push_back(monte_carlo_decay(psd_tr, drive, n_traj, curve_seed, mc_opts));
      char name[80];
      std::snprintf(name, sizeof(name), "%s/curve_%03zu.csv", dir.c_str(), c);
      DecayCurveMeta meta{omegas[c], delta_a, n_traj, curve_seed};
      write_decay_curve(run.track(name), curves.back(), meta, run.prov);
      run.files.push_back(
          run.path(std::string(name).substr(0, std::string(name).size() - 4) + ".json"));
      manifest["curves"].push_back({{"path", fs::path(name).filename().string()},
                                    {"omega_rad_s", omegas[c]},
                                    {"seed", curve_seed}});
    }
    write_text_file(run.track(dir + "/curves_manifest.json"), manifest.dump(2) + "\n");

    std::vector<DecayCurve> kept;
    std::vector<double> fitted_delta_a;
    std::vector<std::pair<double, double>> s0_points;
    double t_max = 0.0, omega_lo = 1e300, omega_hi = 0.0;
    std::string rect_csv =
        run.prov.comment_line() +
        "omega_rad_s,S0_rad2_per_hz,S0_sigma,delta_a_rad_s,delta_a_sigma,status\n";
    for (auto& curve : curves) {
      const auto fit = rectangular_estimate(curve);
      const char* status =
          fit.status == RectStatus::kOk
              ? "ok"
              : (fit.status == RectStatus::kToneContamination ? "tone_contamination"
                                                              : "nonconvergence");
      rect_csv += format_double(curve.omega) + "," + format_double(fit.s) + "," +
                  format_double(fit.s_sigma) + "," + format_double(fit.delta_a) + "," +
                  format_double(fit.delta_a_sigma) + "," + status + "\n";
      if (fit.status != RectStatus::kOk) continue;
      kept.push_back(curve);
      fitted_delta_a.push_back(fit.delta_a);
      s0_points.push_back({curve.omega, fit.s});
      t_max = std::max(t_max, curve.times.back());
      omega_lo = std::min(omega_lo, curve.omega);
      omega_hi = std::max(omega_hi, curve.omega);
    }
    write_text_file(run.track(dir + "/rectangular.csv"), rect_csv);
    if (kept.size() < 3) throw std::runtime_error("pipeline: too few usable curves for " + name);

    const auto est = cfg.value("estimate", json::object());
    const double margin = kPi / t_max;
    auto grid = make_reconstruction_grid(
        est.value("omega_min_rad_s", std::max(omega_lo - margin, kTwoPi * 10.0)),
        est.value("omega_max_rad_s", omega_hi + margin), t_max,
        est.value("log_knee_rad_s", kTwoPi * 2e3), est.value("log_points_per_decade", 6));
    grid = mask_tones(grid, fitted_tones, t_max);

    std::sort(s0_points.begin(), s0_points.end());
    PsdModel s0_model;
    for (const auto& [w, s] : s0_points) {
      if (!s0_model.grid.empty() && w <= s0_model.grid.back()) continue;
      s0_model.grid.push_back(w);
      s0_model.values.push_back(std::max(s, 0.0));
    }
    PsdModel init;
    init.grid = grid;
    for (double w : grid) init.values.push_back(s0_model.evaluate(w));

    RefineHyper hyper;
    hyper.max_iter = est.value("max_iter", 2000);
    hyper.tol = est.value("tol", 1e-6);
    auto problem =
        ReconstructionProblem::build(kept, fitted_delta_a, grid, init, hyper, fitted_tones);
    const auto refined = gradient_refine(problem);
    write_psd_csv(run.track(dir + "/s_refined.csv"), refined.s, run.prov);
    write_psd_json(run.track(dir + "/s_refined.json"), refined.s, run.prov);
    write_iteration_log_csv(run.track(dir + "/iterations.csv"), refined.log, run.prov);

    tr_summary["curves_used"] = kept.size();
    tr_summary["j_initial"] = refined.log.front().j;
    tr_summary["j_final"] = refined.log.back().j;
    tr_summary["rect_band_avg_rel_error_vs_planted"] = band_avg_rel_error(
        s0_model, psd_tr, omega_lo, omega_hi, fitted_tones, 3.0 * kTwoPi / t_max);
    tr_summary["refined_band_avg_rel_error_vs_planted"] = band_avg_rel_error(
        refined.s, psd_tr, omega_lo, omega_hi, fitted_tones, 3.0 * kTwoPi / t_max);
    summary["transitions"].push_back(tr_summary);
    outputs.push_back({name, refined.s, tone_reports});
  }

  if (outputs.size() >= 2) {
    // First transition listed is the low-sensitivity one by convention.
    ZeemanTransition tr12{cfg.at("transitions")[0].at("m_s").get<double>(),
                          cfg.at("transitions")[0].at("m_d").get<double>(), 2.0, 1.2};
    ZeemanTransition tr13{cfg.at("transitions")[1].at("m_s").get<double>(),
                          cfg.at("transitions")[1].at("m_d").get<double>(), 2.0, 1.2};
    const auto disc = discriminate(outputs[1].refined, outputs[0].refined, tr13, tr12);
    write_psd_csv(run.track("s_laser.csv"), disc.s_laser, run.prov, &disc.clamped_laser);
    write_psd_csv(run.track("s_magnetic.csv"), disc.s_magnetic, run.prov,
                  &disc.clamped_magnetic);

    // Tone deltas re-attached from the pooled fits of both transitions.
    PsdModel laser_with_tones = disc.s_laser;
    laser_with_tones.tones.clear();
    const std::size_t n_tones = outputs[0].tone_reports.size();
    for (std::size_t k = 0; k < n_tones; ++k) {
      double w0_num = 0.0, w0_den = 0.0, wl_num = 0.0, wl_den = 0.0;
      for (const auto& out : outputs) {
        if (k >= out.tone_reports.size()) continue;
        const auto& rep = out.tone_reports[k];
        if (rep.n_used == 0 || rep.omega0_sigma <= 0.0 || rep.omega_lln_sigma <= 0.0) continue;
        w0_num += rep.omega0 / (rep.omega0_sigma * rep.omega0_sigma);
        w0_den += 1.0 / (rep.omega0_sigma * rep.omega0_sigma);
        wl_num += rep.omega_lln / (rep.omega_lln_sigma * rep.omega_lln_sigma);
        wl_den += 1.0 / (rep.omega_lln_sigma * rep.omega_lln_sigma);
      }
      if (w0_den > 0.0 && wl_den > 0.0) {
        laser_with_tones.tones.push_back({w0_num / w0_den, wl_num / wl_den, 0.0});
      }
    }
    write_psd_json(run.track("s_laser_with_tones.json"), laser_with_tones, run.prov);

    const double lo = disc.s_laser.grid.front();
    const double hi = disc.s_laser.grid.back();
    summary["discrimination"] = {
        {"s_laser", "s_laser.csv"},
        {"s_magnetic", "s_magnetic.csv"},
        {"laser_band_avg_rel_error_vs_planted",
         band_avg_rel_error(disc.s_laser, planted_laser, lo, hi, laser_with_tones.tones,
                            3.0 * kTwoPi / 1e-3)},
        {"recovered_tones", laser_with_tones.tones.size()}};

    if (cfg.contains("beatnote")) {
      const auto& bcfg = cfg.at("beatnote");
      BeatnoteConfig bn;
      bn.s1 = laser_with_tones;
      bn.omega0 = bcfg.value("omega0_rad_s", 0.0);
      bn.amp_product = bcfg.value("amp_product", 1.0);
      bn.tau_count = bcfg.value("tau_count", std::size_t{16384});
      bn.tau_max = bcfg.value("tau_max_s", 0.0);
      if (bn.tau_max <= 0.0) {
        BeatnoteConfig probe = bn;
        probe.tau_max = 1.0;
        probe.omegas = {bn.omega0};
        bn.tau_max = suggest_tau_max(probe);
      }
      const double span = bcfg.at("span_rad_s").get<double>();
      const std::size_t count = bcfg.at("count").get<std::size_t>();
      for (std::size_t i = 0; i < count; ++i) {
        bn.omegas.push_back(bn.omega0 - span + 2.0 * span * static_cast<double>(i) /
                                                   static_cast<double>(count - 1));
      }
      const auto spec = simulate_beatnote(bn);
      write_beatnote_csv(run.track("beatnote.csv"), spec, run.prov);
      summary["beatnote"] = {{"path", "beatnote.csv"}, {"tau_max_s", bn.tau_max}};
    }
  }

  write_text_file(run.track("pipeline_summary.json"), summary.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-drive qubit noise spectroscopy toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int threads = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "synthesize noise trajectories from a PSD model"},
      {"simulate", "Monte-Carlo decay curves and Omega scans"},
      {"estimate", "reconstruct the smooth PSD from decay curves"},
      {"lln-fit", "fit strong discrete tones from Rabi-oscillation curves"},
      {"discriminate", "separate laser and magnetic PSDs from two transitions"},
      {"beatnote", "simulate the heterodyne beat-note spectrum"},
      {"pipeline", "run the full closed-loop demonstration"}};
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    auto* seed_opt = sub->add_option("--seed", seed_override, "override the config seed");
    sub->callback([seed_opt, &seed_given]() { seed_given = seed_opt->count() > 0; });
    sub->add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  Run run;
  try {
    const std::string raw = read_text_file(config_path);
    const json cfg = json::parse(raw);
    const std::uint64_t seed = seed_given ? seed_override : cfg.value("seed", 0ULL);
    std::string base_dir = fs::path(config_path).parent_path().string();
    if (base_dir.empty()) base_dir = ".";

    fs::create_directories(out_dir);
    run.out_dir = out_dir;
    run.prov = Provenance{seed, hash_hex(raw), kVersion};

    if (command == "synth") {
      cmd_synth(run, cfg, base_dir, seed);
    } else if (command == "simulate") {
      cmd_simulate(run, cfg, base_dir, seed);
    } else if (command == "estimate") {
      cmd_estimate(run, cfg, base_dir, seed);
    } else if (command == "lln-fit") {
      cmd_lln_fit(run, cfg, base_dir, seed);
    } else if (command == "discriminate") {
      cmd_discriminate(run, cfg, base_dir, seed);
    } else if (command == "beatnote") {
      cmd_beatnote(run, cfg, base_dir, seed);
    } else if (command == "pipeline") {
      cmd_pipeline(run, cfg, base_dir, seed);
    }
  } catch (const std::exception& e) {
    run.discard_artifacts();
    const json err{{"error", e.what()}, {"command", command}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}
