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

#include "cddspec/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cddspec {

namespace {

using nlohmann::json;

json provenance_json(const Provenance& prov) {
  return json{{"seed", prov.seed}, {"config_hash", prov.config_hash}, {"version", prov.version}};
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ext;
  return path.substr(0, dot) + ext;
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path, std::size_t n_cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> cols(n_cols);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const char c0 = line[first];
    if (std::isalpha(static_cast<unsigned char>(c0))) continue;  // header row
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',') && c < n_cols) {
      cols[c].push_back(std::stod(cell));
      ++c;
    }
    if (c != 0 && c < n_cols) throw std::runtime_error("short row in " + path);
  }
  return cols;
}

}  // namespace

std::string Provenance::comment_line() const {
  return "# " + provenance_json(*this).dump() + "\n";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_psd_csv(const std::string& path, const PsdModel& psd, const Provenance& prov,
                   const std::vector<std::uint8_t>* flags) {
  if (flags && flags->size() != psd.grid.size()) {
    throw std::invalid_argument("write_psd_csv: flags size mismatch");
  }
  std::ostringstream out;
  out << prov.comment_line();
  out << (flags ? "omega_rad_s,S_rad2_per_hz,clamped\n" : "omega_rad_s,S_rad2_per_hz\n");
  for (std::size_t i = 0; i < psd.grid.size(); ++i) {
    out << format_double(psd.grid[i]) << ',' << format_double(psd.values[i]);
    if (flags) out << ',' << static_cast<int>((*flags)[i]);
    out << '\n';
  }
  write_text_file(path, out.str());
}

PsdModel read_psd_csv(const std::string& path) {
  const auto cols = read_csv_columns(path, 2);
  PsdModel psd;
  psd.grid = cols[0];
  psd.values = cols[1];
  psd.validate();
  return psd;
}

void write_psd_json(const std::string& path, const PsdModel& psd, const Provenance& prov) {
  json tones = json::array();
  for (const auto& t : psd.tones) {
    tones.push_back({{"omega0_rad_s", t.omega0},
                     {"omega_lln_rad_s", t.omega_lln},
                     {"phi0_rad", t.phi0}});
  }
  const json doc{{"provenance", provenance_json(prov)},
                 {"grid_rad_s", psd.grid},
                 {"values_rad2_per_hz", psd.values},
                 {"interpolation", psd.interpolation},
                 {"tones", tones}};
  write_text_file(path, doc.dump(2) + "\n");
}

PsdModel psd_from_json_text(const std::string& text) {
  const json doc = json::parse(text);
  PsdModel psd;
  psd.grid = doc.at("grid_rad_s").get<std::vector<double>>();
  psd.values = doc.at("values_rad2_per_hz").get<std::vector<double>>();
  if (doc.contains("interpolation")) psd.interpolation = doc.at("interpolation").get<std::string>();
  if (doc.contains("tones")) {
    for (const auto& t : doc.at("tones")) {
      LlnTone tone;
      tone.omega0 = t.at("omega0_rad_s").get<double>();
      tone.omega_lln = t.at("omega_lln_rad_s").get<double>();
      if (t.contains("phi0_rad")) tone.phi0 = t.at("phi0_rad").get<double>();
      psd.tones.push_back(tone);
    }
  }
  psd.validate();
  return psd;
}

PsdModel read_psd_json(const std::string& path) { return psd_from_json_text(read_text_file(path)); }

void write_decay_curve(const std::string& csv_path, const DecayCurve& curve,
                       const DecayCurveMeta& meta, const Provenance& prov) {
  curve.validate();
  std::ostringstream out;
  out << prov.comment_line();
  out << "t_s,p_s,stderr\n";
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    out << format_double(curve.times[j]) << ',' << format_double(curve.p_s[j]) << ','
        << format_double(curve.stderr_[j]) << '\n';
  }
  write_text_file(csv_path, out.str());

  json doc{{"provenance", provenance_json(prov)},
           {"omega_rad_s", meta.omega},
           {"n_traj", meta.n_traj},
           {"seed", meta.seed}};
  if (meta.delta_a) doc["delta_a_rad_s"] = *meta.delta_a;
  write_text_file(replace_extension(csv_path, ".json"), doc.dump(2) + "\n");
}

DecayCurve read_decay_curve(const std::string& csv_path, DecayCurveMeta* meta) {
  const auto cols = read_csv_columns(csv_path, 3);
  DecayCurve curve;
  curve.times = cols[0];
  curve.p_s = cols[1];
  curve.stderr_ = cols[2];

  const json doc = json::parse(read_text_file(replace_extension(csv_path, ".json")));
  curve.omega = doc.at("omega_rad_s").get<double>();
  curve.n_traj = doc.value("n_traj", 0);
  if (meta) {
    meta->omega = curve.omega;
    meta->n_traj = curve.n_traj;
    meta->seed = doc.value("seed", 0ULL);
    if (doc.contains("delta_a_rad_s")) meta->delta_a = doc.at("delta_a_rad_s").get<double>();
  }
  curve.validate();
  return curve;
}

void write_beatnote_csv(const std::string& path, const BeatnoteSpectrum& spec,
                        const Provenance& prov, bool include_db) {
  double peak = 0.0;
  for (double v : spec.values) peak = std::max(peak, std::abs(v));
  std::ostringstream out;
  out << prov.comment_line();
  out << (include_db ? "omega_rad_s,s_i,s_i_db\n" : "omega_rad_s,s_i\n");
  for (std::size_t i = 0; i < spec.omegas.size(); ++i) {
    out << format_double(spec.omegas[i]) << ',' << format_double(spec.values[i]);
    if (include_db) {
      const double db =
          peak > 0.0 ? 10.0 * std::log10(std::max(std::abs(spec.values[i]) / peak, 1e-300)) : 0.0;
      out << ',' << format_double(db);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_iteration_log_csv(const std::string& path, const std::vector<IterLogEntry>& log,
                             const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line();
  out << "iter,J,step\n";
  for (const auto& e : log) {
    out << e.iter << ',' << format_double(e.j) << ',' << format_double(e.step) << '\n';
  }
  write_text_file(path, out.str());
}

std::string lln_report_to_json(const LlnFitReport& report, const Provenance& prov) {
  json curves = json::array();
  for (const auto& f : report.curves) {
    curves.push_back({{"drive_omega_rad_s", f.drive_omega},
                      {"omega0_rad_s", f.omega0},
                      {"omega0_sigma_rad_s", f.omega0_sigma},
                      {"omega_lln_rad_s", f.omega_lln},
                      {"omega_lln_sigma_rad_s", f.omega_lln_sigma},
                      {"gamma1_tilde", f.gamma1_tilde},
                      {"gamma1_tilde_sigma", f.gamma1_tilde_sigma},
                      {"gamma2_tilde", f.gamma2_tilde},
                      {"gamma2_tilde_sigma", f.gamma2_tilde_sigma},
                      {"s_omega_rad2_per_hz", f.s_omega},
                      {"s_is_upper_bound", f.s_is_upper_bound},
                      {"chi2_red", f.chi2_red},
                      {"converged", f.converged},
                      {"excluded", f.excluded},
                      {"message", f.message}});
  }
  const json doc{{"provenance", provenance_json(prov)},
                 {"curves", curves},
                 {"pooled",
                  {{"omega0_rad_s", report.omega0},
                   {"omega0_sigma_rad_s", report.omega0_sigma},
                   {"omega_lln_rad_s", report.omega_lln},
                   {"omega_lln_sigma_rad_s", report.omega_lln_sigma},
                   {"n_curves_used", report.n_used}}},
                 {"tone_strength",
                  {{"s_pi_e0_sq_rad2_per_hz", report.s_pi_e0_sq},
                   {"s_pi_omega_lln_sq_rad2_per_hz", report.s_pi_omega_lln_sq}}}};
  return doc.dump(2) + "\n";
}

}  // namespace cddspec
