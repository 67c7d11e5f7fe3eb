#include <doctest.h>

#include <cmath>
#include <set>

#include "csifb/bench.hpp"
#include "csifb/experiment_config.hpp"
#include "oracles.hpp"

using namespace csifb;

namespace {

ExperimentSpec small_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.system = oracle::small_config(10.0, 2);
  s.paths = 2;
  s.beta_fb = {2};
  s.snr_db = {0.0, 10.0};
  s.n_geometries = 3;
  s.n_realizations = 200;
  s.mc_samples = 200;
  s.master_seed = 5;
  return s;
}

const SweepRecord* find(const std::vector<SweepRecord>& rows, const std::string& scheme, const std::string& metric,
                        double snr_db) {
  for (const auto& r : rows)
    if (r.scheme == scheme && r.metric == metric && r.snr_dl_dB == snr_db) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("seed derivation is deterministic and path sensitive") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t g = 0; g < 20; ++g)
    for (std::uint64_t p = 0; p < 5; ++p) seen.insert(derive_seed(7, {g, p}));
  CHECK(seen.size() == 100);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
}

TEST_CASE("geometry draws do not depend on the number of users") {
  const ExperimentSpec s = small_spec(ExperimentKind::nmse_sweep);
  const GeometryDraw a = draw_geometry(s, s.system, 1, 1, 2);
  const GeometryDraw b = draw_geometry(s, s.system, 1, 3, 2);
  CHECK(a.geometries[0].paths[0].angle_rad == b.geometries[0].paths[0].angle_rad);
  CHECK(a.unit_pilot.dense() == b.unit_pilot.dense());
  const GeometryDraw c = draw_geometry(s, s.system, 2, 1, 2);
  CHECK(a.geometries[0].paths[0].angle_rad != c.geometries[0].paths[0].angle_rad);
}

TEST_CASE("qse slope on synthetic rows") {
  const std::vector<double> snr = {30, 35, 40};
  CHECK(qse_slope(snr, {-30, -35, -40}) == doctest::Approx(1.0));
  CHECK(qse_slope(snr, {-7, -7, -7}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(qse_slope({1, 2}, {1, 2}), ConfigError);

  std::vector<SweepRecord> rows;
  for (double s : {20.0, 30.0, 35.0, 40.0}) {
    SweepRecord r;
    r.scheme = "tkl";
    r.metric = "nmse_dB";
    r.snr_dl_dB = s;
    r.value = 3.0 - s;  // mse = c / snr
    rows.push_back(r);
  }
  CHECK(estimate_qse_slope(rows, 30, 40) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_qse_slope(rows, 38, 45), ConfigError);
}

TEST_CASE("nmse sweep: layout, zero budget and skip notes") {
  ExperimentSpec s = small_spec(ExperimentKind::nmse_sweep);
  const auto rows = run_nmse_sweep(s);
  CHECK(rows.size() == s.snr_db.size() * s.beta_fb.size() * s.schemes.size());
  for (const auto& r : rows) {
    CHECK(r.metric == "nmse_dB");
    CHECK(r.n_geometries == 3);
    CHECK(r.seed == 5);
    CHECK(r.value <= 1e-9);
  }
  // grid-major, scheme-minor
  CHECK(rows[0].snr_dl_dB == 0.0);
  CHECK(rows[1].snr_dl_dB == 0.0);
  CHECK(rows[0].scheme == "dr");
  CHECK(rows[1].scheme == "ecsq");

  // no feedback budget: every scheme reports the channel energy, 0 dB
  s.system.kappa_override = 0.0;
  s.schemes = {SchemeId::dr};
  for (const auto& r : run_nmse_sweep(s)) CHECK(std::abs(r.value) < 1e-9);

  // TKL cannot send more than it measures
  s = small_spec(ExperimentKind::nmse_sweep);
  s.beta_fb = {5};
  s.schemes = {SchemeId::tkl, SchemeId::dr};
  const auto skipped = run_nmse_sweep(s);
  CHECK(std::isnan(skipped[0].value));
  CHECK(skipped[0].note.rfind("skipped:", 0) == 0);
  CHECK(std::isfinite(skipped[1].value));
}

TEST_CASE("rate sweep: rows, perfect reference and bound ordering") {
  const ExperimentSpec s = small_spec(ExperimentKind::rate_sweep);
  const auto rows = run_rate_sweep(s);
  std::set<std::string> metrics;
  for (const auto& r : rows) metrics.insert(r.metric);
  CHECK(metrics == std::set<std::string>{"uatf_mrt", "uatf_zf", "rate_ub_mrt", "rate_ub_zf"});
  for (const std::string m : {"uatf_mrt", "uatf_zf"}) {
    const auto* p = find(rows, "perfect", m, 10.0);
    REQUIRE(p != nullptr);
    for (const std::string sc : {"dr", "ecsq", "ljscc", "tkl"}) {
      const auto* r = find(rows, sc, m, 10.0);
      REQUIRE(r != nullptr);
      CHECK(p->value >= r->value - 3.0 * (p->std_error + r->std_error));
    }
  }
  const auto* lo = find(rows, "tkl", "uatf_mrt", 10.0);
  const auto* hi = find(rows, "tkl", "rate_ub_mrt", 10.0);
  CHECK(hi->value >= lo->value - 3.0 * hi->std_error);
}

TEST_CASE("user sweep: kappa recomputed and full load gives nothing") {
  ExperimentSpec s = small_spec(ExperimentKind::user_sweep);
  s.users = {1, 4};
  s.snr_db = {10.0};
  s.schemes = {SchemeId::tkl};
  s.precoders = {Precoder::zf};
  s.upper_bound = false;
  const auto rows = run_user_sweep(s);
  const SweepRecord *n1 = nullptr, *n4 = nullptr, *r1 = nullptr, *r4 = nullptr;
  for (const auto& r : rows) {
    if (r.scheme != "tkl") continue;
    if (r.metric == "nmse_dB") (r.K == 1 ? n1 : n4) = &r;
    if (r.metric == "uatf_zf") (r.K == 1 ? r1 : r4) = &r;
  }
  REQUIRE(n1 != nullptr);
  REQUIRE(n4 != nullptr);
  REQUIRE(r1 != nullptr);
  REQUIRE(r4 != nullptr);
  CHECK(r1->value > 0.0);
  CHECK(std::abs(n4->value) < 1e-9);  // K = M: kappa = 0
  CHECK(r4->value == 0.0);
  CHECK(n1->value < n4->value);
}

TEST_CASE("sweeps are byte-identical across runs and thread counts") {
  ExperimentSpec s = small_spec(ExperimentKind::rate_sweep);
  s.n_realizations = 50;
  s.mc_samples = 50;
  const std::string a = to_string(run_experiment(s), OutputFormat::csv);
  s.threads = 3;
  const std::string b = to_string(run_experiment(s), OutputFormat::csv);
  CHECK(a == b);
  s.master_seed = 6;
  CHECK(to_string(run_experiment(s), OutputFormat::csv) != a);
}

TEST_CASE("spec validation") {
  ExperimentSpec s = small_spec(ExperimentKind::nmse_sweep);
  s.snr_db = {};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = small_spec(ExperimentKind::user_sweep);
  s.users = {5};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = small_spec(ExperimentKind::nmse_sweep);
  s.schemes = {SchemeId::perfect};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = small_spec(ExperimentKind::nmse_sweep);
  s.n_geometries = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("presets") {
  const ExperimentSpec f = preset_spec(ExperimentKind::nmse_sweep, Preset::fast);
  CHECK(f.n_geometries == 3);
  CHECK(f.n_realizations == 100);
  const ExperimentSpec p = preset_spec(ExperimentKind::rate_sweep, Preset::paper);
  CHECK(p.n_geometries == 10);
  CHECK(p.n_realizations == 1000);
  CHECK_NOTHROW(preset_spec(ExperimentKind::table1, Preset::fast).validate());
  CHECK(parse_experiment("qse") == ExperimentKind::qse);
  CHECK_THROWS_AS(parse_experiment("figure"), ConfigError);
}

TEST_CASE("ini config") {
  ExperimentSpec s = preset_spec(ExperimentKind::nmse_sweep, Preset::fast);
  apply_ini_text(s,
                 "[system]\nantennas = 16\nusers = 4\n"
                 "[experiment]\npaths = 3\nschemes = tkl, dr\nsnr_db = -10:5:0\nbeta_fb = 2,4\nseed = 42\n"
                 "upper_bound = false\n");
  CHECK(s.system.antennas == 16);
  CHECK(s.system.users == 4);
  CHECK(s.paths == 3);
  CHECK(s.schemes == std::vector<SchemeId>{SchemeId::tkl, SchemeId::dr});
  CHECK(s.snr_db == std::vector<double>{-10, -5, 0});
  CHECK(s.beta_fb == std::vector<int>{2, 4});
  CHECK(s.master_seed == 42);
  CHECK_FALSE(s.upper_bound);
  CHECK_THROWS_AS(apply_ini_text(s, "[experiment]\npathz = 3\n"), ConfigError);
  CHECK_THROWS_AS(apply_ini_text(s, "[plots]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(apply_ini_text(s, "[experiment]\npaths = three\n"), ConfigError);
  CHECK_THROWS_AS(apply_ini_file(s, "/nonexistent/file.ini"), ConfigError);
  CHECK(parse_double_list("1, 2.5") == std::vector<double>{1.0, 2.5});
  CHECK_THROWS_AS(parse_double_list("0:0:5"), ConfigError);
  CHECK_THROWS_AS(parse_precoder_list("mmse"), ConfigError);
}
