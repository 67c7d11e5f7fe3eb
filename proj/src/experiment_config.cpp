#include "csifb/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace csifb {

Preset parse_preset(const std::string& name) {
  if (name == "fast") return Preset::fast;
  if (name == "paper") return Preset::paper;
  throw ConfigError("unknown preset '" + name + "' (expected fast or paper)");
}

namespace {

std::vector<double> range_db(double start, double step, double stop) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = start + step * i;
    if (v > stop + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

int to_int(const std::string& s) { return static_cast<int>(to_integer(s)); }

bool to_bool(std::string s) {
  boost::to_lower(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  const std::string t = boost::trim_copy(text);
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    boost::split(parts, t, boost::is_any_of(":"));
    if (parts.size() != 3) throw ConfigError("range must be start:step:stop, got '" + text + "'");
    const double step = to_double(boost::trim_copy(parts[1]));
    if (!(step > 0)) throw ConfigError("range step must be positive");
    return range_db(to_double(boost::trim_copy(parts[0])), step, to_double(boost::trim_copy(parts[2])));
  }
  std::vector<double> out;
  for (const auto& p : split_list(t)) out.push_back(to_double(p));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& p : split_list(text)) out.push_back(to_int(p));
  return out;
}

std::vector<SchemeId> parse_scheme_list(const std::string& text) {
  std::vector<SchemeId> out;
  for (const auto& p : split_list(text)) out.push_back(parse_scheme(p));
  return out;
}

std::vector<Precoder> parse_precoder_list(const std::string& text) {
  std::vector<Precoder> out;
  for (const auto& p : split_list(text)) {
    if (p == "mrt")
      out.push_back(Precoder::mrt);
    else if (p == "zf")
      out.push_back(Precoder::zf);
    else
      throw ConfigError("unknown precoder '" + p + "' (expected mrt or zf)");
  }
  return out;
}

ExperimentSpec preset_spec(ExperimentKind kind, Preset preset) {
  ExperimentSpec s;
  s.kind = kind;
  const bool fast = preset == Preset::fast;
  s.n_geometries = fast ? 3 : 10;
  s.n_realizations = fast ? 100 : 1000;
  s.mc_samples = fast ? 1000 : 10000;
  s.upper_bound = true;
  switch (kind) {
    case ExperimentKind::nmse_sweep:
      s.paths = 6;
      s.beta_fb = {3, 10};
      s.snr_db = fast ? range_db(-10, 10, 40) : range_db(-10, 5, 40);
      break;
    case ExperimentKind::rate_sweep:
      s.paths = 6;
      s.beta_fb = {3};
      s.snr_db = fast ? std::vector<double>{-10, 0, 10} : range_db(-10, 5, 30);
      break;
    case ExperimentKind::user_sweep:
      s.paths = 6;
      s.beta_fb = {3};
      s.snr_db = {10};
      s.users = fast ? std::vector<int>{1, 2, 4, 8, 16, 32} : std::vector<int>{1, 2, 4, 6, 8, 12, 16, 20, 24, 28, 32};
      s.upper_bound = false;
      s.precoders = {Precoder::zf};
      break;
    case ExperimentKind::qse:
      s.paths = 6;
      s.beta_fb = {3, 10};
      s.schemes = {SchemeId::tkl};
      s.snr_db = {30, 35, 40};
      break;
    case ExperimentKind::table1:
      s.schemes = {SchemeId::tkl, SchemeId::dr, SchemeId::ljscc, SchemeId::ecsq};
      s.ul_snr_db = 100.0;
      break;
  }
  return s;
}

void apply_ini_text(ExperimentSpec& spec, const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (section != "system" && section != "experiment")
      throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string v = boost::trim_copy(node.get_value<std::string>());
      auto& sys = spec.system;
      if (section == "system") {
        if (key == "antennas") sys.antennas = to_int(v);
        else if (key == "subcarriers") sys.subcarriers = to_int(v);
        else if (key == "users") sys.users = to_int(v);
        else if (key == "subcarrier_spacing_hz") sys.subcarrier_spacing_hz = to_double(v);
        else if (key == "max_delay_s") sys.max_delay_s = to_double(v);
        else if (key == "coherence_symbols") sys.coherence_symbols = to_int(v);
        else if (key == "pilot_symbols") sys.pilot_symbols = to_int(v);
        else if (key == "pilot_subcarriers") sys.pilot_subcarriers = parse_int_list(v);
        else if (key == "kappa") sys.kappa_override = to_double(v);
        else throw ConfigError("unknown key '" + key + "' in [system]");
      } else {
        if (key == "paths") spec.paths = to_int(v);
        else if (key == "schemes") spec.schemes = parse_scheme_list(v);
        else if (key == "snr_db") spec.snr_db = parse_double_list(v);
        else if (key == "beta_fb") spec.beta_fb = parse_int_list(v);
        else if (key == "users") spec.users = parse_int_list(v);
        else if (key == "precoders") spec.precoders = parse_precoder_list(v);
        else if (key == "n_geometries") spec.n_geometries = to_int(v);
        else if (key == "n_realizations") spec.n_realizations = to_int(v);
        else if (key == "mc_samples") spec.mc_samples = to_int(v);
        else if (key == "upper_bound") spec.upper_bound = to_bool(v);
        else if (key == "ul_snr_db") spec.ul_snr_db = to_double(v);
        else if (key == "seed") spec.master_seed = std::stoull(v);
        else if (key == "threads") spec.threads = to_int(v);
        else throw ConfigError("unknown key '" + key + "' in [experiment]");
      }
    }
  }
}

void apply_ini_file(ExperimentSpec& spec, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  apply_ini_text(spec, os.str());
}

}  // namespace csifb
