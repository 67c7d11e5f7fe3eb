#include "csifb/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "csifb/errors.hpp"

namespace csifb {

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {"scheme", "L",     "beta_fb",   "K",
                                                "snr_dl_dB", "metric", "value", "std_error",
                                                "n_geometries", "seed", "note"};
  return cols;
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + name + "' (expected csv or json)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw ConfigError("malformed number '" + s + "'");
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

nlohmann::json number_or_string(double v) {
  if (std::isfinite(v)) return nlohmann::json::parse(format_double(v));
  return format_double(v);
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : records) {
    os << csv_field(r.scheme) << ',' << r.L << ',' << r.beta_fb << ',' << r.K << ','
       << format_double(r.snr_dl_dB) << ',' << csv_field(r.metric) << ',' << format_double(r.value)
       << ',' << format_double(r.std_error) << ',' << r.n_geometries << ',' << r.seed << ','
       << csv_field(r.note) << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<SweepRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    o["scheme"] = r.scheme;
    o["L"] = r.L;
    o["beta_fb"] = r.beta_fb;
    o["K"] = r.K;
    o["snr_dl_dB"] = number_or_string(r.snr_dl_dB);
    o["metric"] = r.metric;
    o["value"] = number_or_string(r.value);
    o["std_error"] = number_or_string(r.std_error);
    o["n_geometries"] = r.n_geometries;
    o["seed"] = r.seed;
    o["note"] = r.note;
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << '\n';
}

std::string to_string(const std::vector<SweepRecord>& records, OutputFormat format) {
  std::ostringstream os;
  if (format == OutputFormat::csv)
    write_csv(os, records);
  else
    write_json(os, records);
  return os.str();
}

void emit(const std::vector<SweepRecord>& records, const std::string& path, OutputFormat format) {
  const std::string text = to_string(records, format);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  f << text;
  f.close();
  if (!f) throw std::runtime_error("failed writing output file '" + path + "'");
}

std::vector<SweepRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("CSV is empty");
  const auto header = split_csv_line(line);
  if (header != record_columns()) throw ConfigError("CSV header does not match record columns");
  std::vector<SweepRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ConfigError("CSV line " + std::to_string(line_no) + " has wrong field count");
    SweepRecord r;
    r.scheme = f[0];
    r.L = std::stoi(f[1]);
    r.beta_fb = std::stoi(f[2]);
    r.K = std::stoi(f[3]);
    r.snr_dl_dB = parse_double(f[4]);
    r.metric = f[5];
    r.value = parse_double(f[6]);
    r.std_error = parse_double(f[7]);
    r.n_geometries = std::stoi(f[8]);
    r.seed = std::stoull(f[9]);
    r.note = f[10];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SweepRecord> read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  return read_csv(f);
}

}  // namespace csifb
