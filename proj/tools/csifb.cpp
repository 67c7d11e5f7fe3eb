// Batch driver for the CSI feedback experiments.
//
//   csifb nmse-sweep --preset fast --out nmse.csv
//   csifb table1 --seed 7 --format json

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "csifb/bench.hpp"
#include "csifb/experiment_config.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string preset = "fast";
  std::string schemes;
  std::string out = "-";
  std::string format = "csv";
  std::optional<int> mc_samples;
  std::optional<int> threads;
  std::optional<int> paths;
  std::string beta_fb;
  std::string users;
  std::string snr_db;
  std::string precoders;
  std::optional<int> n_geometries;
  std::optional<int> n_realizations;
  std::optional<bool> upper_bound;
  std::optional<double> ul_snr_db;
};

void add_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "INI file with [system] and [experiment] sections");
  cmd->add_option("--seed", o.seed, "master seed (u64)");
  cmd->add_option("--preset", o.preset, "fast | paper")->check(CLI::IsMember({"fast", "paper"}));
  cmd->add_option("--schemes", o.schemes, "comma list of dr,ecsq,ljscc,tkl");
  cmd->add_option("--out", o.out, "output path, '-' for stdout");
  cmd->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--mc-samples", o.mc_samples, "zero-forcing moment draws per subcarrier");
  cmd->add_option("--threads", o.threads, "worker threads (results do not depend on it)");
  cmd->add_option("-L,--paths", o.paths, "paths per user");
  cmd->add_option("--beta-fb", o.beta_fb, "comma list of feedback dimensions");
  cmd->add_option("-K,--users", o.users, "users (a list for user-sweep)");
  cmd->add_option("--snr-db", o.snr_db, "DL SNR grid in dB: list or start:step:stop");
  cmd->add_option("--precoders", o.precoders, "comma list of mrt,zf");
  cmd->add_option("--n-geometries", o.n_geometries, "geometries averaged per grid point");
  cmd->add_option("--n-realizations", o.n_realizations, "upper-bound samples per subcarrier");
  cmd->add_option("--upper-bound", o.upper_bound, "evaluate the ergodic upper bound (true|false)");
  cmd->add_option("--ul-snr-db", o.ul_snr_db, "uplink SNR of the table1 setting");
}

csifb::ExperimentSpec build_spec(csifb::ExperimentKind kind, const Options& o) {
  using namespace csifb;
  ExperimentSpec spec = preset_spec(kind, parse_preset(o.preset));
  if (!o.config.empty()) apply_ini_file(spec, o.config);
  if (o.seed) spec.master_seed = *o.seed;
  if (!o.schemes.empty()) spec.schemes = parse_scheme_list(o.schemes);
  if (o.mc_samples) spec.mc_samples = *o.mc_samples;
  if (o.threads) spec.threads = *o.threads;
  if (o.paths) spec.paths = *o.paths;
  if (!o.beta_fb.empty()) spec.beta_fb = parse_int_list(o.beta_fb);
  if (!o.users.empty()) {
    const auto k = parse_int_list(o.users);
    if (kind == ExperimentKind::user_sweep)
      spec.users = k;
    else if (k.size() == 1)
      spec.system.users = k.front();
    else
      throw ConfigError("--users takes a single value outside user-sweep");
  }
  if (!o.snr_db.empty()) spec.snr_db = parse_double_list(o.snr_db);
  if (!o.precoders.empty()) spec.precoders = parse_precoder_list(o.precoders);
  if (o.n_geometries) spec.n_geometries = *o.n_geometries;
  if (o.n_realizations) spec.n_realizations = *o.n_realizations;
  if (o.upper_bound) spec.upper_bound = *o.upper_bound;
  if (o.ul_snr_db) spec.ul_snr_db = *o.ul_snr_db;
  spec.validate();
  return spec;
}

int fail(const std::string& kind, const std::string& message, int code) {
  nlohmann::json err = {{"error", kind}, {"message", message}};
  std::cerr << err.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI feedback simulation for multiuser multicarrier massive MIMO"};
  app.require_subcommand(1);
  Options opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"nmse-sweep", "NMSE versus DL SNR and beta_fb"},
      {"rate-sweep", "UatF and upper-bound sum rates versus DL SNR and beta_fb"},
      {"user-sweep", "NMSE and ZF sum rate versus the number of users"},
      {"qse", "high-SNR NMSE slopes"},
      {"table1", "idealized high-UL-SNR NMSE table"}};
  for (const auto& [name, help] : commands) add_options(app.add_subcommand(name, help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const auto spec = build_spec(csifb::parse_experiment(sub->get_name()), opts);
    const auto records = csifb::run_experiment(spec);
    csifb::emit(records, opts.out, csifb::parse_format(opts.format));
  } catch (const csifb::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const csifb::NumericError& e) {
    return fail("numeric", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 4);
  }
  return 0;
}
