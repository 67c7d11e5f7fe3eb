#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace csifb {

/// One output row. Column order in CSV follows the field order.
struct SweepRecord {
  std::string scheme;
  int L = 0;
  int beta_fb = 0;
  int K = 0;
  double snr_dl_dB = 0.0;
  std::string metric;  ///< nmse_dB | uatf_mrt | uatf_zf | rate_ub_mrt | rate_ub_zf | qse_slope
  double value = 0.0;
  double std_error = 0.0;
  int n_geometries = 0;
  std::uint64_t seed = 0;
  std::string note;  ///< empty, or a machine-readable reason such as "skipped:beta_fb>beta_tr"

  bool operator==(const SweepRecord&) const = default;
};

/// Column names, in order.
const std::vector<std::string>& record_columns();

enum class OutputFormat { csv, json };
OutputFormat parse_format(const std::string& name);

/// Doubles are printed with 9 significant digits ("%.9g"); nan/inf as "nan", "inf", "-inf".
std::string format_double(double v);

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_json(std::ostream& os, const std::vector<SweepRecord>& records);
std::string to_string(const std::vector<SweepRecord>& records, OutputFormat format);

/// Writes to `path`, or to stdout when path is empty or "-". Throws
/// std::runtime_error when the file cannot be written.
void emit(const std::vector<SweepRecord>& records, const std::string& path, OutputFormat format);

/// Parses CSV produced by write_csv. Throws ConfigError on a header mismatch.
std::vector<SweepRecord> read_csv(std::istream& is);
std::vector<SweepRecord> read_csv_file(const std::string& path);

}  // namespace csifb
