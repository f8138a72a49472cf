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

#ifndef CDDSPEC_IO_HPP
#define CDDSPEC_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cddspec/beatnote.hpp"
#include "cddspec/estimator.hpp"
#include "cddspec/lln_model.hpp"
#include "cddspec/psd_model.hpp"
#include "cddspec/qubit_sim_types.hpp"

namespace cddspec {

/// Embedded in every artifact so re-runs are byte-comparable and traceable.
struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;

  std::string comment_line() const;  // "# {...}" JSON on one line
};

std::string format_double(double v);  // %.17g, round-trip exact

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// PSD: CSV columns omega_rad_s,S_rad2_per_hz (optional clamped flag column);
// JSON form carries tones as well.
void write_psd_csv(const std::string& path, const PsdModel& psd, const Provenance& prov,
                   const std::vector<std::uint8_t>* flags = nullptr);
PsdModel read_psd_csv(const std::string& path);
void write_psd_json(const std::string& path, const PsdModel& psd, const Provenance& prov);
PsdModel read_psd_json(const std::string& path);
PsdModel psd_from_json_text(const std::string& text);

// Decay curves: CSV columns t_s,p_s,stderr plus a sibling .json metadata
// file holding omega, delta_a (when known), n_traj and seed.
struct DecayCurveMeta {
  double omega = 0.0;
  std::optional<double> delta_a;
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
};
void write_decay_curve(const std::string& csv_path, const DecayCurve& curve,
                       const DecayCurveMeta& meta, const Provenance& prov);
DecayCurve read_decay_curve(const std::string& csv_path, DecayCurveMeta* meta = nullptr);

void write_beatnote_csv(const std::string& path, const BeatnoteSpectrum& spec,
                        const Provenance& prov, bool include_db = true);
void write_iteration_log_csv(const std::string& path, const std::vector<IterLogEntry>& log,
                             const Provenance& prov);

std::string lln_report_to_json(const LlnFitReport& report, const Provenance& prov);

}  // namespace cddspec

#endif  // CDDSPEC_IO_HPP
