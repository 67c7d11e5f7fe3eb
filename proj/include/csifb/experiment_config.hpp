#pragma once

#include <string>

#include "csifb/bench.hpp"

namespace csifb {

enum class Preset { fast, paper };
Preset parse_preset(const std::string& name);

/// Defaults of `kind` under a preset.
///
/// fast: 3 geometries, 100 upper-bound samples, 1000 zero-forcing draws, coarse grids.
/// paper: 10 geometries, 1000 upper-bound samples, 10000 zero-forcing draws, 5 dB grids.
ExperimentSpec preset_spec(ExperimentKind kind, Preset preset);

/// Applies an INI file on top of `spec`. Recognized sections and keys:
///
///   [system]      antennas subcarriers users subcarrier_spacing_hz max_delay_s
///                 coherence_symbols pilot_symbols pilot_subcarriers kappa
///   [experiment]  paths schemes snr_db beta_fb users precoders n_geometries
///                 n_realizations mc_samples upper_bound ul_snr_db seed threads
///
/// Lists are comma separated. `snr_db` also accepts "start:step:stop".
/// Unknown sections or keys raise ConfigError so typos do not pass silently.
void apply_ini_file(ExperimentSpec& spec, const std::string& path);
void apply_ini_text(ExperimentSpec& spec, const std::string& text);

std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
std::vector<SchemeId> parse_scheme_list(const std::string& text);
std::vector<Precoder> parse_precoder_list(const std::string& text);

}  // namespace csifb
