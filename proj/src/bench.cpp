#include "csifb/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace csifb {

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::nmse_sweep: return "nmse-sweep";
    case ExperimentKind::rate_sweep: return "rate-sweep";
    case ExperimentKind::user_sweep: return "user-sweep";
    case ExperimentKind::qse: return "qse";
    case ExperimentKind::table1: return "table1";
  }
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  if (name == "nmse-sweep") return ExperimentKind::nmse_sweep;
  if (name == "rate-sweep") return ExperimentKind::rate_sweep;
  if (name == "user-sweep") return ExperimentKind::user_sweep;
  if (name == "qse") return ExperimentKind::qse;
  if (name == "table1") return ExperimentKind::table1;
  throw ConfigError("unknown experiment '" + name + "'");
}

void ExperimentSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("invalid experiment: " + m); };
  if (paths < 1) fail("paths must be >= 1");
  if (schemes.empty()) fail("scheme list is empty");
  for (SchemeId s : schemes)
    if (s == SchemeId::perfect) fail("'perfect' is a reference row, not a selectable scheme");
  if (kind != ExperimentKind::table1) {
    if (snr_db.empty()) fail("snr grid is empty");
    if (beta_fb.empty()) fail("beta_fb grid is empty");
  }
  for (int b : beta_fb)
    if (b < 1) fail("beta_fb must be >= 1");
  if (kind == ExperimentKind::user_sweep) {
    if (users.empty()) fail("user grid is empty");
    for (int k : users)
      if (k < 1 || k > system.antennas) fail("every K must lie in [1, M]");
  }
  if (n_geometries < 1) fail("n_geometries must be >= 1");
  if (n_realizations < 0) fail("n_realizations must be >= 0");
  if (mc_samples < 0) fail("mc_samples must be >= 0");
  if (threads < 1) fail("threads must be >= 1");
  if (precoders.empty() && kind == ExperimentKind::rate_sweep) fail("precoder list is empty");
  for (double s : snr_db)
    if (!std::isfinite(s)) fail("snr values must be finite");
  SystemConfig probe = system;
  if (kind == ExperimentKind::user_sweep) probe.users = *std::max_element(users.begin(), users.end());
  probe.validate();
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t u64(SeedPurpose p) { return static_cast<std::uint64_t>(p); }
std::uint64_t u64(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }

struct Summary {
  double mean = 0.0;
  double se = 0.0;
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  std::vector<double> finite;
  for (double x : xs)
    if (std::isfinite(x)) finite.push_back(x);
  if (finite.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.se = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double n = static_cast<double>(finite.size());
  double sum = 0.0;
  for (double x : finite) sum += x;
  s.mean = sum / n;
  if (finite.size() > 1) {
    double ss = 0.0;
    for (double x : finite) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (n - 1) / n);
  }
  return s;
}

// dB of the mean, with the delta-method standard error
Summary summarize_db(const std::vector<double>& linear) {
  const Summary s = summarize(linear);
  Summary out;
  if (!(s.mean > 0.0)) {
    out.mean = s.mean == 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    out.se = 0.0;
    return out;
  }
  out.mean = linear_to_db(s.mean);
  out.se = 10.0 / std::numbers::ln10 * s.se / s.mean;
  return out;
}

std::vector<NmseTable::Point> build_grid(const ExperimentSpec& spec) {
  std::vector<NmseTable::Point> grid;
  std::vector<int> users = {spec.system.users};
  if (spec.kind == ExperimentKind::user_sweep) users = spec.users;
  for (int k : users)
    for (int b : spec.beta_fb)
      for (double s : spec.snr_db) grid.push_back({s, b, k});
  return grid;
}

int max_users(const std::vector<NmseTable::Point>& grid) {
  int k = 0;
  for (const auto& p : grid) k = std::max(k, p.users);
  return k;
}

SystemConfig point_config(const ExperimentSpec& spec, const NmseTable::Point& p) {
  SystemConfig cfg = spec.system;
  cfg.users = p.users;
  cfg.snr_dl = db_to_linear(p.snr_db);
  return cfg;
}

std::uint64_t spreading_seed(const ExperimentSpec& spec, int geometry, int user, int beta_fb, int paths) {
  return derive_seed(spec.master_seed,
                     {u64(geometry), u64(SeedPurpose::spreading), u64(user), u64(beta_fb), u64(paths)});
}

std::vector<GeometryDraw> draw_all(const ExperimentSpec& spec, const SystemConfig& cfg, int n_users,
                                   int paths) {
  std::vector<GeometryDraw> draws(static_cast<std::size_t>(spec.n_geometries));
  parallel_for(draws.size(), spec.threads, [&](std::size_t g) {
    draws[g] = draw_geometry(spec, cfg, static_cast<int>(g), n_users, paths);
  });
  return draws;
}

// Evaluates `schemes` for the first K users of a geometry. An infeasible
// scheme yields an empty vector and a note.
struct UserOutputs {
  std::vector<std::vector<SchemeOutput>> per_scheme;  // [scheme][user]
  std::vector<std::string> notes;
};

UserOutputs scheme_outputs(const ExperimentSpec& spec, const std::vector<SchemeId>& schemes,
                           const GeometryDraw& draw, const PilotMatrix& pilot, const SystemConfig& cfg,
                           int beta_fb, int paths) {
  UserOutputs out;
  out.per_scheme.resize(schemes.size());
  out.notes.resize(schemes.size());
  const FeedbackBudget budget = FeedbackBudget::from_config(cfg, beta_fb);
  for (int k = 0; k < cfg.users; ++k) {
    const ProbedChannel ch(draw.covariances[static_cast<std::size_t>(k)], pilot);
    const std::uint64_t w_seed = spreading_seed(spec, draw.index, k, beta_fb, paths);
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      if (!out.notes[s].empty() && out.notes[s].rfind("skipped", 0) == 0) continue;
      try {
        out.per_scheme[s].push_back(run_scheme(schemes[s], ch, budget, w_seed));
      } catch (const ConfigError& e) {
        out.per_scheme[s].clear();
        out.notes[s] = "skipped:" + std::string(e.what());
      }
    }
  }
  return out;
}

double mean_nmse(const std::vector<SchemeOutput>& users) {
  if (users.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const auto& u : users) s += u.nmse();
  return s / static_cast<double>(users.size());
}

void merge_note(std::string& into, const std::string& note) {
  if (note.empty() || into.find(note) != std::string::npos) return;
  into += into.empty() ? note : ";" + note;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n') c = ' ';
  return s;
}

}  // namespace

GeometryDraw draw_geometry(const ExperimentSpec& spec, const SystemConfig& cfg, int index, int n_users,
                           int paths) {
  GeometryDraw d;
  d.index = index;
  for (int k = 0; k < n_users; ++k) {
    Rng rng(derive_seed(spec.master_seed, {u64(index), u64(SeedPurpose::geometry), u64(k), u64(paths)}));
    d.geometries.push_back(sample_geometry(rng, paths, cfg));
    d.covariances.push_back(std::make_shared<const ChannelCovariance>(build_covariance(d.geometries.back(), cfg)));
  }
  SystemConfig unit = cfg;
  unit.snr_dl = 1.0;
  unit.users = std::min(std::max(n_users, 1), cfg.antennas);
  Rng prng(derive_seed(spec.master_seed, {u64(index), u64(SeedPurpose::pilot)}));
  d.unit_pilot = build_pilot_matrix(unit, prng);
  return d;
}

SchemeOutput run_scheme(SchemeId scheme, const ProbedChannel& ch, const FeedbackBudget& budget,
                        std::uint64_t w_seed) {
  switch (scheme) {
    case SchemeId::dr: return dr_output(ch, budget);
    case SchemeId::ecsq: return ecsq_output(ch, budget);
    case SchemeId::ljscc: {
      Rng rng(w_seed);
      return ljscc_build(ch, budget, rng).output();
    }
    case SchemeId::tkl: {
      if (budget.beta_fb > ch.training_dim()) throw ConfigError("beta_fb>beta_tr");
      return TklCodec(ch, budget).output();
    }
    case SchemeId::perfect: return perfect_output(ch.cov);
  }
  throw ConfigError("unknown scheme");
}

NmseTable evaluate_nmse(const ExperimentSpec& spec) {
  spec.validate();
  NmseTable t;
  t.grid = build_grid(spec);
  t.schemes = spec.schemes;
  const std::size_t n_grid = t.grid.size();
  const auto n_geo = static_cast<std::size_t>(spec.n_geometries);
  const auto draws = draw_all(spec, spec.system, max_users(t.grid), spec.paths);

  t.nmse.assign(n_grid, std::vector<std::vector<double>>(t.schemes.size(), std::vector<double>(n_geo)));
  std::vector<std::vector<std::vector<std::string>>> notes(
      n_grid, std::vector<std::vector<std::string>>(t.schemes.size(), std::vector<std::string>(n_geo)));

  parallel_for(n_grid * n_geo, spec.threads, [&](std::size_t unit) {
    const std::size_t gi = unit / n_geo;
    const std::size_t g = unit % n_geo;
    const auto& p = t.grid[gi];
    const SystemConfig cfg = point_config(spec, p);
    const PilotMatrix pilot = draws[g].unit_pilot.scaled(std::sqrt(cfg.snr_dl));
    const UserOutputs outs = scheme_outputs(spec, t.schemes, draws[g], pilot, cfg, p.beta_fb, spec.paths);
    for (std::size_t s = 0; s < t.schemes.size(); ++s) {
      t.nmse[gi][s][g] = mean_nmse(outs.per_scheme[s]);
      std::string note = outs.notes[s];
      for (const auto& o : outs.per_scheme[s]) merge_note(note, o.note);
      notes[gi][s][g] = note;
    }
  });

  t.notes.assign(n_grid, std::vector<std::string>(t.schemes.size()));
  for (std::size_t gi = 0; gi < n_grid; ++gi)
    for (std::size_t s = 0; s < t.schemes.size(); ++s)
      for (std::size_t g = 0; g < n_geo; ++g) merge_note(t.notes[gi][s], notes[gi][s][g]);
  return t;
}

RateSample evaluate_geometry_rates(const std::vector<SchemeOutput>& users, const SystemConfig& cfg,
                                   const ExperimentSpec& spec, std::uint64_t seed) {
  RateSample out;
  if (users.empty()) return out;
  const auto stats = extract_subcarrier_blocks(users);
  const int k_users = static_cast<int>(users.size());
  const int n_sub = cfg.subcarriers;
  const bool want_mrt =
      std::find(spec.precoders.begin(), spec.precoders.end(), Precoder::mrt) != spec.precoders.end();
  const bool want_zf =
      std::find(spec.precoders.begin(), spec.precoders.end(), Precoder::zf) != spec.precoders.end();

  Eigen::MatrixXd mrt = Eigen::MatrixXd::Zero(k_users, n_sub), zf = mrt, ub_mrt = mrt, ub_zf = mrt;
  Eigen::MatrixXd ub_mrt_se = mrt, ub_zf_se = mrt;
  RVector zf_se_n = RVector::Zero(n_sub);
  const double data_fraction =
      static_cast<double>(cfg.coherence_symbols - cfg.pilot_symbols) / cfg.coherence_symbols;
  RVector weight = RVector::Constant(n_sub, 1.0 / n_sub);
  for (int n : cfg.pilot_subcarriers) weight(n) = data_fraction / n_sub;

  for (int n = 0; n < n_sub; ++n) {
    const auto& s = stats[static_cast<std::size_t>(n)];
    const auto un = static_cast<std::uint64_t>(n);
    if (want_mrt) {
      mrt.col(n) = uatf_mrt(s, cfg.snr_dl);
      if (spec.upper_bound) {
        Rng rng(derive_seed(seed, {u64(SeedPurpose::upper_bound), un, 0}));
        const auto ub = rate_upper_bound(s, Precoder::mrt, cfg.snr_dl,
                                         static_cast<std::size_t>(spec.n_realizations), rng);
        ub_mrt.col(n) = ub.mean;
        ub_mrt_se.col(n) = ub.std_error;
      }
    }
    if (want_zf) {
      Rng rng(derive_seed(seed, {u64(SeedPurpose::zf_moments), un}));
      const ZfMoments m = zf_moments(s, static_cast<std::size_t>(spec.mc_samples), rng, false);
      out.zf_rejection = std::max(out.zf_rejection, m.rejection_fraction());
      zf.col(n) = uatf_zf(s, m, cfg.snr_dl);
      if (m.n_samples > 0 && m.inv_trace > 0.0) {
        // delta method on 1/eta_tilde = inv_trace / snr
        double d = 0.0;
        for (int k : m.active) {
          const double r = zf(k, n);
          const double x = 1.0 / (std::exp2(r) - 1.0);
          d += 1.0 / (std::numbers::ln2 * x * (x + 1.0)) / cfg.snr_dl;
        }
        zf_se_n(n) = d * m.inv_trace_se;
      }
      if (spec.upper_bound) {
        Rng urng(derive_seed(seed, {u64(SeedPurpose::upper_bound), un, 1}));
        const auto ub = rate_upper_bound(s, Precoder::zf, cfg.snr_dl,
                                         static_cast<std::size_t>(spec.n_realizations), urng, &m);
        ub_zf.col(n) = ub.mean;
        ub_zf_se.col(n) = ub.std_error;
      }
    }
  }
  out.uatf_mrt = average_sum_rate(mrt, cfg);
  out.uatf_zf = average_sum_rate(zf, cfg);
  out.ub_mrt = average_sum_rate(ub_mrt, cfg);
  out.ub_zf = average_sum_rate(ub_zf, cfg);
  double v_mrt = 0.0, v_zf = 0.0, v_uzf = 0.0;
  for (int n = 0; n < n_sub; ++n) {
    const double w2 = weight(n) * weight(n);
    v_mrt += w2 * ub_mrt_se.col(n).squaredNorm();
    v_zf += w2 * ub_zf_se.col(n).squaredNorm();
    v_uzf += w2 * zf_se_n(n) * zf_se_n(n);
  }
  out.ub_mrt_se = std::sqrt(v_mrt);
  out.ub_zf_se = std::sqrt(v_zf);
  out.uatf_zf_se = std::sqrt(v_uzf);
  return out;
}

RateTable evaluate_rates(const ExperimentSpec& spec) {
  spec.validate();
  RateTable t;
  t.grid = build_grid(spec);
  t.schemes = spec.schemes;
  t.schemes.push_back(SchemeId::perfect);
  const std::size_t n_grid = t.grid.size();
  const auto n_geo = static_cast<std::size_t>(spec.n_geometries);
  const auto draws = draw_all(spec, spec.system, max_users(t.grid), spec.paths);

  t.rates.assign(n_grid, std::vector<std::vector<RateSample>>(t.schemes.size(), std::vector<RateSample>(n_geo)));
  std::vector<std::vector<std::vector<std::string>>> notes(
      n_grid, std::vector<std::vector<std::string>>(t.schemes.size(), std::vector<std::string>(n_geo)));

  parallel_for(n_grid * n_geo, spec.threads, [&](std::size_t unit) {
    const std::size_t gi = unit / n_geo;
    const std::size_t g = unit % n_geo;
    const auto& p = t.grid[gi];
    const SystemConfig cfg = point_config(spec, p);
    const PilotMatrix pilot = draws[g].unit_pilot.scaled(std::sqrt(cfg.snr_dl));
    const UserOutputs outs = scheme_outputs(spec, t.schemes, draws[g], pilot, cfg, p.beta_fb, spec.paths);
    for (std::size_t s = 0; s < t.schemes.size(); ++s) {
      std::string note = outs.notes[s];
      if (outs.per_scheme[s].empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        t.rates[gi][s][g] = RateSample{nan, nan, nan, nan, 0.0, 0.0, 0.0, 0.0};
        notes[gi][s][g] = note;
        continue;
      }
      const std::uint64_t seed = derive_seed(
          spec.master_seed, {u64(static_cast<int>(g)), u64(static_cast<int>(gi)), static_cast<std::uint64_t>(t.schemes[s])});
      RateSample r = evaluate_geometry_rates(outs.per_scheme[s], cfg, spec, seed);
      if (r.zf_rejection > kZfMaxRejection) {
        std::ostringstream os;
        os.precision(3);
        os << "zf_degenerate:rejected=" << r.zf_rejection;
        merge_note(note, os.str());
      }
      t.rates[gi][s][g] = r;
      notes[gi][s][g] = note;
    }
  });

  t.notes.assign(n_grid, std::vector<std::string>(t.schemes.size()));
  for (std::size_t gi = 0; gi < n_grid; ++gi)
    for (std::size_t s = 0; s < t.schemes.size(); ++s)
      for (std::size_t g = 0; g < n_geo; ++g) merge_note(t.notes[gi][s], notes[gi][s][g]);
  return t;
}

namespace {

SweepRecord base_record(const ExperimentSpec& spec, SchemeId s, const NmseTable::Point& p, int paths) {
  SweepRecord r;
  r.scheme = scheme_name(s);
  r.L = paths;
  r.beta_fb = p.beta_fb;
  r.K = p.users;
  r.snr_dl_dB = p.snr_db;
  r.n_geometries = spec.n_geometries;
  r.seed = spec.master_seed;
  return r;
}

std::vector<SweepRecord> nmse_records(const ExperimentSpec& spec, const NmseTable& t) {
  std::vector<SweepRecord> rows;
  for (std::size_t gi = 0; gi < t.grid.size(); ++gi) {
    for (std::size_t s = 0; s < t.schemes.size(); ++s) {
      SweepRecord r = base_record(spec, t.schemes[s], t.grid[gi], spec.paths);
      r.metric = "nmse_dB";
      const Summary sm = summarize_db(t.nmse[gi][s]);
      r.value = sm.mean;
      r.std_error = sm.se;
      r.note = sanitize(t.notes[gi][s]);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<SweepRecord> rate_records(const ExperimentSpec& spec, const RateTable& t, bool zf_only) {
  struct Metric {
    const char* name;
    Precoder precoder;
    bool upper;
  };
  std::vector<Metric> metrics;
  const auto has = [&](Precoder p) {
    return std::find(spec.precoders.begin(), spec.precoders.end(), p) != spec.precoders.end();
  };
  if (has(Precoder::mrt) && !zf_only) {
    metrics.push_back({"uatf_mrt", Precoder::mrt, false});
    if (spec.upper_bound) metrics.push_back({"rate_ub_mrt", Precoder::mrt, true});
  }
  if (has(Precoder::zf)) {
    metrics.push_back({"uatf_zf", Precoder::zf, false});
    if (spec.upper_bound && !zf_only) metrics.push_back({"rate_ub_zf", Precoder::zf, true});
  }
  std::vector<SweepRecord> rows;
  for (std::size_t gi = 0; gi < t.grid.size(); ++gi) {
    for (std::size_t s = 0; s < t.schemes.size(); ++s) {
      for (const auto& m : metrics) {
        std::vector<double> vals;
        for (const auto& r : t.rates[gi][s]) {
          if (m.precoder == Precoder::mrt)
            vals.push_back(m.upper ? r.ub_mrt : r.uatf_mrt);
          else
            vals.push_back(m.upper ? r.ub_zf : r.uatf_zf);
        }
        SweepRecord rec = base_record(spec, t.schemes[s], t.grid[gi], spec.paths);
        rec.metric = m.name;
        const Summary sm = summarize(vals);
        rec.value = sm.mean;
        rec.std_error = sm.se;
        std::string note = t.notes[gi][s];
        if (m.precoder == Precoder::mrt && note.find("zf_degenerate") != std::string::npos) note.clear();
        rec.note = sanitize(note);
        rows.push_back(std::move(rec));
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRecord> run_nmse_sweep(const ExperimentSpec& spec) {
  return nmse_records(spec, evaluate_nmse(spec));
}

std::vector<SweepRecord> run_rate_sweep(const ExperimentSpec& spec) {
  return rate_records(spec, evaluate_rates(spec), false);
}

std::vector<SweepRecord> run_user_sweep(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::user_sweep;
  const auto nmse = nmse_records(s, evaluate_nmse(s));
  ExperimentSpec r = s;
  r.upper_bound = false;
  r.precoders = {Precoder::zf};
  const auto rates = rate_records(r, evaluate_rates(r), true);
  // interleave per grid point so rows stay grid-major
  std::vector<SweepRecord> rows;
  const std::size_t n_grid = nmse.size() / s.schemes.size();
  const std::size_t rate_per_point = rates.size() / n_grid;
  for (std::size_t gi = 0; gi < n_grid; ++gi) {
    for (std::size_t k = 0; k < s.schemes.size(); ++k) rows.push_back(nmse[gi * s.schemes.size() + k]);
    for (std::size_t k = 0; k < rate_per_point; ++k) rows.push_back(rates[gi * rate_per_point + k]);
  }
  return rows;
}

double qse_slope(const std::vector<double>& snr_db, const std::vector<double>& mse_db) {
  if (snr_db.size() != mse_db.size()) throw ConfigError("qse_slope: size mismatch");
  if (snr_db.size() < 3) throw ConfigError("qse_slope: need at least three points");
  const double n = static_cast<double>(snr_db.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < snr_db.size(); ++i) {
    mx += snr_db[i];
    my += mse_db[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < snr_db.size(); ++i) {
    sxx += (snr_db[i] - mx) * (snr_db[i] - mx);
    sxy += (snr_db[i] - mx) * (mse_db[i] - my);
  }
  if (sxx <= 0.0) throw ConfigError("qse_slope: snr points must not all coincide");
  return -sxy / sxx;
}

double estimate_qse_slope(const std::vector<SweepRecord>& records, double lo_db, double hi_db) {
  std::vector<double> x, y;
  const SweepRecord* first = nullptr;
  for (const auto& r : records) {
    if (r.metric != "nmse_dB" || r.snr_dl_dB < lo_db || r.snr_dl_dB > hi_db) continue;
    if (first == nullptr) first = &r;
    if (r.scheme != first->scheme || r.beta_fb != first->beta_fb || r.L != first->L || r.K != first->K)
      throw ConfigError("estimate_qse_slope: records mix schemes or budgets");
    x.push_back(r.snr_dl_dB);
    y.push_back(r.value);
  }
  return qse_slope(x, y);
}

std::vector<SweepRecord> run_qse(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::qse;
  const NmseTable t = evaluate_nmse(s);
  std::vector<SweepRecord> rows = nmse_records(s, t);
  const double lo = *std::min_element(s.snr_db.begin(), s.snr_db.end());
  const double hi = *std::max_element(s.snr_db.begin(), s.snr_db.end());
  for (int b : s.beta_fb) {
    for (std::size_t sc = 0; sc < t.schemes.size(); ++sc) {
      std::vector<double> slopes;
      for (int g = 0; g < s.n_geometries; ++g) {
        std::vector<double> x, y;
        for (std::size_t gi = 0; gi < t.grid.size(); ++gi) {
          if (t.grid[gi].beta_fb != b) continue;
          const double v = t.nmse[gi][sc][static_cast<std::size_t>(g)];
          if (!(v > 0.0)) continue;
          x.push_back(t.grid[gi].snr_db);
          y.push_back(linear_to_db(v));
        }
        slopes.push_back(x.size() >= 3 ? qse_slope(x, y) : std::numeric_limits<double>::quiet_NaN());
      }
      SweepRecord r = base_record(s, t.schemes[sc], {0.5 * (lo + hi), b, s.system.users}, s.paths);
      r.metric = "qse_slope";
      const Summary sm = summarize(slopes);
      r.value = sm.mean;
      r.std_error = sm.se;
      std::ostringstream note;
      note << "window=" << format_double(lo) << ":" << format_double(hi);
      r.note = note.str();
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

const std::vector<std::pair<int, int>>& table1_settings() {
  static const std::vector<std::pair<int, int>> s = {{6, 3}, {6, 10}, {60, 30}, {60, 64}};
  return s;
}

// snr_ul is snr_dl / K, so this pins the UL SNR at ul_snr_db
SystemConfig table1_config(const ExperimentSpec& spec) {
  SystemConfig cfg = spec.system;
  cfg.snr_dl = cfg.users * db_to_linear(spec.ul_snr_db);
  return cfg;
}

std::vector<SweepRecord> run_table1(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::table1;
  s.validate();
  const SystemConfig cfg = table1_config(s);
  const PilotMatrix pilot = PilotMatrix::direct_observation(cfg.antennas, cfg.subcarriers, kDirectAccessSnr);
  const auto& settings = table1_settings();
  const auto n_geo = static_cast<std::size_t>(s.n_geometries);

  std::vector<int> path_counts;
  for (const auto& [l, b] : settings)
    if (std::find(path_counts.begin(), path_counts.end(), l) == path_counts.end()) path_counts.push_back(l);
  std::vector<std::vector<GeometryDraw>> draws;
  for (int l : path_counts) draws.push_back(draw_all(s, cfg, cfg.users, l));

  std::vector<std::vector<std::vector<double>>> nmse(
      settings.size(), std::vector<std::vector<double>>(s.schemes.size(), std::vector<double>(n_geo)));
  std::vector<std::vector<std::vector<std::string>>> notes(
      settings.size(), std::vector<std::vector<std::string>>(s.schemes.size(), std::vector<std::string>(n_geo)));
  parallel_for(settings.size() * n_geo, s.threads, [&](std::size_t unit) {
    const std::size_t si = unit / n_geo;
    const std::size_t g = unit % n_geo;
    const auto [l, b] = settings[si];
    const auto li = static_cast<std::size_t>(
        std::find(path_counts.begin(), path_counts.end(), l) - path_counts.begin());
    const UserOutputs outs = scheme_outputs(s, s.schemes, draws[li][g], pilot, cfg, b, l);
    for (std::size_t sc = 0; sc < s.schemes.size(); ++sc) {
      nmse[si][sc][g] = mean_nmse(outs.per_scheme[sc]);
      std::string note = outs.notes[sc];
      for (const auto& o : outs.per_scheme[sc]) merge_note(note, o.note);
      notes[si][sc][g] = note;
    }
  });

  std::vector<SweepRecord> rows;
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const auto [l, b] = settings[si];
    for (std::size_t sc = 0; sc < s.schemes.size(); ++sc) {
      SweepRecord r = base_record(s, s.schemes[sc], {linear_to_db(cfg.snr_dl), b, cfg.users}, l);
      r.metric = "nmse_dB";
      const Summary sm = summarize_db(nmse[si][sc]);
      r.value = sm.mean;
      r.std_error = sm.se;
      std::string note = "ul_snr_dB=" + format_double(s.ul_snr_db) + ";direct_access";
      for (std::size_t g = 0; g < n_geo; ++g) merge_note(note, notes[si][sc][g]);
      r.note = sanitize(note);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<SweepRecord> run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::nmse_sweep: return run_nmse_sweep(spec);
    case ExperimentKind::rate_sweep: return run_rate_sweep(spec);
    case ExperimentKind::user_sweep: return run_user_sweep(spec);
    case ExperimentKind::qse: return run_qse(spec);
    case ExperimentKind::table1: return run_table1(spec);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace csifb
