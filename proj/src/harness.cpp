#include "isp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "isp/errors.hpp"
#include "isp/estimators.hpp"

namespace isp {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  explicit CsvFile(const fs::path& p) : f_(std::fopen(p.c_str(), "wb")) {
    if (!f_) throw ConfigError("cannot write '" + p.string() + "'");
    std::fputs("# schema=1\n", f_);
  }
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;
  void line(const std::string& s) {
    std::fputs(s.c_str(), f_);
    std::fputc('\n', f_);
  }
  std::FILE* raw() { return f_; }

 private:
  std::FILE* f_;
};

using Meta = std::vector<std::pair<std::string, std::string>>;

void write_meta(const fs::path& p, const Meta& meta) {
  std::FILE* f = std::fopen(p.c_str(), "wb");
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  for (const auto& [k, v] : meta) std::fprintf(f, "%s=%s\n", k.c_str(), v.c_str());
  std::fclose(f);
}

std::string law_name(const DurationLaw& law) {
  if (const auto* p = std::get_if<ParetoDuration>(&law)) {
    return "pareto(b=" + num(p->b) + ",delta=" + num(p->delta) + ")";
  }
  const auto& q = std::get<PowerLawInfinite>(law);
  return "powerlaw(delta=" + num(q.delta) + ",u_min=" + num(q.u_min) + ",u_max=" +
         num(q.u_max) + ")";
}

Metric sample_mean(const std::vector<double>& x) {
  return {mean(x), std::sqrt(variance(x) / static_cast<double>(x.size()))};
}

// Sample variance with the large-sample standard error sqrt((m4 - s^4) / M).
Metric sample_variance(const std::vector<double>& x) {
  const double m = mean(x);
  const double v = variance(x);
  double m4 = 0.0;
  for (double e : x) m4 += std::pow(e - m, 4);
  m4 /= static_cast<double>(x.size());
  return {v, std::sqrt(std::max(0.0, m4 - v * v) / static_cast<double>(x.size()))};
}

std::size_t time_index(const PathGrid& grid, double t) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.times[i] == t) return i;
  }
  throw ConfigError("time not on grid");
}

void ensemble_meta(Meta& meta, const ExperimentConfig& cfg, const Ensemble& ens,
                   std::vector<std::string>& warnings, const std::string& prefix) {
  const std::size_t nc = ens.components.size();
  meta.emplace_back(prefix + "regime", ens.regime);
  meta.emplace_back(prefix + "n", num(regime_n(cfg.regime)));
  meta.emplace_back(prefix + "components", std::to_string(nc));
  double untracked = 0.0;
  double lambda_total = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& r = ens.components[c];
    const std::string p = prefix + "component." + std::to_string(c) + ".";
    meta.emplace_back(p + "lambda_n", num(r.lambda_n));
    meta.emplace_back(p + "Lambda", num(r.total_intensity));
    meta.emplace_back(p + "law", law_name(r.law_n));
    meta.emplace_back(p + "rate_multiplier", num(r.a));
    meta.emplace_back(p + "compensation", compensation_name(r.compensation));
    if (const auto* pl = std::get_if<PowerLawInfinite>(&r.law_n)) {
      meta.emplace_back(p + "u_min", num(pl->u_min));
      meta.emplace_back(p + "u_max", num(pl->u_max));
      meta.emplace_back(p + "lower_truncation_variance", num(r.lower_truncation_variance));
      meta.emplace_back(p + "upper_truncation_variance", num(r.upper_truncation_variance));
      meta.emplace_back(p + "small_jumps", r.gaussian_small_jumps ? "gaussian" : "drop");
      untracked += r.upper_truncation_variance;
      if (!r.gaussian_small_jumps) untracked += r.lower_truncation_variance;
    }
    lambda_total += r.total_intensity;
  }
  meta.emplace_back(prefix + "Lambda", num(lambda_total));
  meta.emplace_back(prefix + "truncation_variance", num(untracked));
  meta.emplace_back(prefix + "variance_budget", num(cfg.truncation.variance_budget));
  meta.emplace_back(prefix + "total_atoms", std::to_string(ens.total_atoms));
  meta.emplace_back(prefix + "substream_rule", "path*64+component");
  meta.emplace_back(prefix + "substream_first", "0");
  meta.emplace_back(prefix + "substream_last",
                    std::to_string(substream_id(ens.paths.size() - 1, nc - 1)));
  if (untracked > cfg.truncation.variance_budget) {
    warnings.push_back(prefix + "truncation variance " + num(untracked) + " exceeds budget " +
                       num(cfg.truncation.variance_budget));
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void emit_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

double common_delta(const ExperimentConfig& cfg) {
  const double d = tail_index(cfg.components.front().law);
  for (const auto& c : cfg.components) {
    if (tail_index(c.law) != d) throw ConfigError("target needs a common tail index");
  }
  return d;
}

}  // namespace

double metric_time(const PathGrid& grid) {
  for (double t : grid.times) {
    if (t == 1.0) return 1.0;
  }
  return grid.horizon();
}

Ensemble simulate_config(const ExperimentConfig& cfg) {
  validate_config(cfg);
  return simulate_ensemble(to_ensemble_spec(cfg), cfg.paths, cfg.seed, cfg.workers);
}

RunRecord run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const Ensemble ens = simulate_config(cfg);
  RunRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.seed = cfg.seed;
  const double t1 = metric_time(ens.grid);
  const auto z1 = ens.column(time_index(ens.grid, t1));
  if (z1.size() >= 2) {
    rec.metrics["mean_Z1"] = sample_mean(z1);
    rec.metrics["var_Z1"] = sample_variance(z1);
  }
  rec.metrics["atoms"] = {static_cast<double>(ens.total_atoms), 0.0};

  Meta meta{{"schema", "1"},
            {"config_hash", rec.config_hash},
            {"seed", std::to_string(cfg.seed)},
            {"paths", std::to_string(cfg.paths)},
            {"grid_points", std::to_string(ens.grid.size())},
            {"horizon", num(ens.grid.horizon())},
            {"metric_time", num(t1)}};
  ensemble_meta(meta, cfg, ens, rec.warnings, "");

  std::int64_t overflow = 0;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
      CsvFile csv(dir / "paths.csv");
      csv.line("path_id,t,z,y");
      for (std::size_t p = 0; p < ens.paths.size(); ++p) {
        for (std::size_t i = 0; i < ens.grid.size(); ++i) {
          const double z = ens.paths[p][i];
          double y;
          if (z > 709.78) {
            y = std::numeric_limits<double>::infinity();
            ++overflow;
          } else {
            y = std::exp(z);
          }
          std::fprintf(csv.raw(), "%zu,%.17g,%.17g,%.17g\n", p, ens.grid.times[i], z, y);
        }
      }
    }
    meta.emplace_back("price_overflow", std::to_string(overflow));
    meta.emplace_back("mean_Z1", num(rec.metrics.count("mean_Z1") ? rec.metrics["mean_Z1"].value
                                                                  : 0.0));
    meta.emplace_back("var_Z1", num(rec.metrics.count("var_Z1") ? rec.metrics["var_Z1"].value
                                                                : 0.0));
    write_meta(dir / "run.meta", meta);
    rec.artifacts = {(dir / "paths.csv").string(), (dir / "run.meta").string()};
  }
  if (overflow > 0) rec.warnings.push_back("price overflow in " + std::to_string(overflow) + " rows");
  emit_warnings(rec.warnings);
  rec.wall_time = seconds_since(t0);
  return rec;
}

ConvergeTarget parse_target(const std::string& name) {
  if (name == "hurst") return ConvergeTarget::Hurst;
  if (name == "stable_index") return ConvergeTarget::StableIndex;
  if (name == "variance") return ConvergeTarget::Variance;
  if (name == "ecf") return ConvergeTarget::Ecf;
  throw ConfigError("unknown converge target '" + name + "'");
}

std::string target_name(ConvergeTarget t) {
  switch (t) {
    case ConvergeTarget::Hurst: return "hurst";
    case ConvergeTarget::StableIndex: return "stable_index";
    case ConvergeTarget::Variance: return "variance";
    case ConvergeTarget::Ecf: return "ecf";
  }
  return "";
}

std::vector<double> ecf_grid() {
  std::vector<double> g(30);
  for (int i = 0; i < 30; ++i) g[i] = 0.1 + 2.9 * i / 29.0;
  return g;
}

double limit_variance(const ExperimentConfig& cfg, double t) {
  if (is_stable_regime(cfg.regime)) {
    throw ConfigError("variance target: the stable limit has infinite variance");
  }
  double total = 0.0;
  for (const auto& c : cfg.components) {
    const double delta = tail_index(c.law);
    const double er2 = rate_second_moment(c.rate);
    if (std::holds_alternative<Unscaled>(cfg.regime)) {
      // Exact variance of the Poisson integral at time t.
      PowerMeasure m = to_power_measure(c.law);
      m.coeff *= c.lambda;
      if (cfg.truncation.small_jumps == SmallJumps::Gaussian &&
          std::holds_alternative<PowerLawInfinite>(c.law)) {
        m.lo = 0.0;
      }
      total += er2 * shot_covariance(c.pulse, m, {t})(0, 0);
    } else {
      total += fbm_variance(c.pulse, delta, c.lambda, er2) * std::pow(t, 3.0 - delta);
    }
  }
  return total;
}

std::complex<double> limit_char_function(const ExperimentConfig& cfg, double t, double xi) {
  std::complex<double> log_phi = 0.0;
  for (const auto& c : cfg.components) {
    const double delta = tail_index(c.law);
    if (std::holds_alternative<Unscaled>(cfg.regime)) {
      PowerMeasure m = to_power_measure(c.law);
      m.coeff *= c.lambda;
      const bool comp = !cfg.raw;
      log_phi += prelimit_log_cf(c.pulse, m, c.rate, 1.0, comp, t, xi);
    } else if (is_fbm_regime(cfg.regime)) {
      const double v = fbm_variance(c.pulse, delta, c.lambda, rate_second_moment(c.rate)) *
                       std::pow(t, 3.0 - delta);
      log_phi += -0.5 * v * xi * xi;
    } else if (is_stable_regime(cfg.regime)) {
      log_phi += std::log(stable_char_function(stable_model(delta, c.lambda, c.rate), t, xi));
    } else {
      log_phi += prelimit_log_cf(c.pulse, PowerMeasure{c.lambda, delta, 0.0, kInf}, c.rate, 1.0,
                                 true, t, xi);
    }
  }
  return std::exp(log_phi);
}

ConvergeResult run_converge(const ExperimentConfig& cfg, const std::vector<double>& n_list,
                            ConvergeTarget target, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  if (n_list.size() < 2) throw ConfigError("converge: n_list needs at least two entries");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (!(n_list[i] > n_list[i - 1])) throw ConfigError("converge: n_list must be increasing");
  }
  if (std::holds_alternative<Unscaled>(cfg.regime)) {
    throw ConfigError("converge: regime must be one of thm1..thm5");
  }
  validate_config(cfg);
  if (target == ConvergeTarget::Hurst && !is_fbm_regime(cfg.regime)) {
    throw ConfigError("converge: hurst target needs thm2 or thm3");
  }
  if (target == ConvergeTarget::StableIndex && !is_stable_regime(cfg.regime)) {
    throw ConfigError("converge: stable_index target needs thm4 or thm5");
  }

  ConvergeResult res;
  res.record.config_hash = config_hash(cfg);
  res.record.seed = cfg.seed;
  const PathGrid grid = make_grid(cfg.grid);
  const double tm = metric_time(grid);
  const auto xi = ecf_grid();
  std::vector<std::complex<double>> theory;
  for (double x : xi) theory.push_back(limit_char_function(cfg, tm, x));

  struct EcfRow {
    double n;
    EcfCurve curve;
  };
  std::vector<EcfRow> ecf_rows;
  std::vector<std::tuple<std::string, double, double>> estimates;
  Meta meta{{"schema", "1"},
            {"config_hash", res.record.config_hash},
            {"seed", std::to_string(cfg.seed)},
            {"paths", std::to_string(cfg.paths)},
            {"target", target_name(target)},
            {"metric_time", num(tm)},
            {"common_random_numbers", "1"}};

  for (double n : n_list) {
    ExperimentConfig cn = cfg;
    cn.regime = with_n(cfg.regime, n);
    validate_config(cn);
    const Ensemble ens = simulate_config(cn);
    ensemble_meta(meta, cn, ens, res.record.warnings, "n=" + num(n) + ".");
    const auto z = ens.column(time_index(ens.grid, tm));
    ConvergeRow row{n, 0.0, 0.0, 0.0, 0.0};
    const std::string tag = "[n=" + num(n) + "]";
    switch (target) {
      case ConvergeTarget::Hurst: {
        const auto h = estimate_hurst(ens.matrix(), ens.grid.times);
        row.estimate = h.H_hat;
        row.stderr = h.stderr;
        row.limit = hurst(common_delta(cn));
        estimates.emplace_back("H_hat" + tag, h.H_hat, h.stderr);
        estimates.emplace_back("r_squared" + tag, h.r_squared, 0.0);
        break;
      }
      case ConvergeTarget::StableIndex: {
        const auto s = estimate_stable_index(z);
        row.estimate = s.delta_hat;
        row.stderr = s.stderr_delta;
        row.limit = common_delta(cn);
        estimates.emplace_back("delta_hat" + tag, s.delta_hat, s.stderr_delta);
        estimates.emplace_back("beta_hat" + tag, s.beta_hat, 0.0);
        break;
      }
      case ConvergeTarget::Variance: {
        const Metric v = sample_variance(z);
        row.estimate = v.value;
        row.stderr = v.stderr;
        row.limit = limit_variance(cn, tm);
        estimates.emplace_back("var" + tag, v.value, v.stderr);
        break;
      }
      case ConvergeTarget::Ecf:
        break;
    }
    EcfCurve curve = empirical_cf(z, xi);
    if (target == ConvergeTarget::Ecf) {
      double gap = 0.0;
      double se = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) {
        const double g = std::abs(curve.phi[k] - theory[k]);
        if (g >= gap) {
          gap = g;
          se = std::sqrt(std::max(0.0, 1.0 - std::norm(theory[k])) /
                         static_cast<double>(z.size()));
        }
      }
      row.estimate = gap;
      row.stderr = se;
      row.limit = 0.0;
      estimates.emplace_back("sup_gap" + tag, gap, se);
    }
    row.abs_gap = std::abs(row.estimate - row.limit);
    res.rows.push_back(row);
    ecf_rows.push_back({n, std::move(curve)});
  }

  if (res.rows.back().abs_gap > res.rows.front().abs_gap) {
    res.record.warnings.push_back("gap at largest n (" + num(res.rows.back().abs_gap) +
                                  ") exceeds gap at smallest n (" +
                                  num(res.rows.front().abs_gap) + ")");
  }
  for (const auto& r : res.rows) {
    res.record.metrics["estimate[n=" + num(r.n) + "]"] = {r.estimate, r.stderr};
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
      CsvFile csv(dir / "summary.csv");
      csv.line("n,estimate,stderr,limit,abs_gap");
      for (const auto& r : res.rows) {
        csv.line(num(r.n) + "," + num(r.estimate) + "," + num(r.stderr) + "," + num(r.limit) +
                 "," + num(r.abs_gap));
      }
    }
    {
      CsvFile csv(dir / "estimates.csv");
      csv.line("name,value,stderr");
      for (const auto& [name, v, se] : estimates) csv.line(name + "," + num(v) + "," + num(se));
    }
    {
      CsvFile csv(dir / "ecf.csv");
      csv.line("n,xi,re_hat,im_hat,re_theory,im_theory");
      for (const auto& e : ecf_rows) {
        for (std::size_t k = 0; k < xi.size(); ++k) {
          csv.line(num(e.n) + "," + num(xi[k]) + "," + num(e.curve.phi[k].real()) + "," +
                   num(e.curve.phi[k].imag()) + "," + num(theory[k].real()) + "," +
                   num(theory[k].imag()));
        }
      }
    }
    write_meta(dir / "run.meta", meta);
    for (const char* f : {"summary.csv", "estimates.csv", "ecf.csv", "run.meta"}) {
      res.record.artifacts.push_back((dir / f).string());
    }
  }
  emit_warnings(res.record.warnings);
  res.record.wall_time = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

bool SelftestReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.pass; });
}

namespace {

// int_0^inf (1 - cos x) x^(-1-delta) dx, computed without the Gamma function.
double one_minus_cos_integral(double delta) {
  static thread_local boost::math::quadrature::tanh_sinh<double> ts;
  auto near = [delta](double x) {
    const double h = std::sin(0.5 * x) / (0.5 * x);
    return 0.5 * h * h * std::pow(x, 1.0 - delta);
  };
  double total = ts.integrate(near, 0.0, 1.0);
  // (1 - cos x) x^(-1-delta) on [1, inf) = x^(-1-delta) - cos(x) x^(-1-delta).
  total += 1.0 / delta;
  auto osc = [delta](double x) { return std::cos(x) * std::pow(x, -1.0 - delta); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double a = 1.0;
  double b = std::numbers::pi;
  double tail = 0.0;
  for (int k = 0; k < 4000; ++k) {
    tail += GK::integrate(osc, a, b, 0, 0.0);
    a = b;
    b += std::numbers::pi;
  }
  // Past a multiple of pi the remainder is (1+delta) cos(a) a^(-2-delta) + O(a^(-3-delta)).
  tail += (1.0 + delta) * std::cos(a) * std::pow(a, -2.0 - delta);
  return total - tail;
}

}  // namespace

SelftestReport run_selftest(std::ostream& out, const SelftestOptions& opts) {
  SelftestReport rep;
  auto record = [&](const std::string& name, bool pass, double achieved, double tol) {
    rep.items.push_back({name, pass, achieved, tol});
    out << (pass ? "PASS " : "FAIL ") << name << " achieved=" << num(achieved)
        << " tol=" << num(tol) << "\n";
  };
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      out << "FAIL " << name << " error=" << e.what() << "\n";
      rep.items.push_back({name, false, std::nan(""), 0.0});
    }
  };
  const Pulse lp = Pulse::linear_plateau();

  for (double d : {1.2, 1.5, 1.8}) {
    const std::string name = "sigma2_quadrature_vs_closed_form[delta=" + num(d) + "]";
    guarded(name, [&] {
      const double q = fbm_variance(lp, d, 1.0, 1.0);
      const double c = linear_plateau_sigma2(d, 1.0, 1.0);
      const double rel = std::abs(q - c) / c;
      record(name, rel < 1e-6, rel, 1e-6);
    });
  }

  for (auto [kappa, delta] : {std::pair{1.0, 1.5}, std::pair{0.8, 1.6}}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const std::string name =
          "lemma1_bound[kappa=" + num(kappa) + ",delta=" + num(delta) + ",t=" + num(t) + "]";
      guarded(name, [&] {
        const auto integral = lemma1_integral(lp, kappa, delta, t);
        const double bound = lemma1_bound(1.0, kappa, delta, t);
        const bool ok = integral.value <= bound * (1.0 + 1e-9) + integral.error;
        record(name, ok, integral.value / bound, 1.0);
      });
    }
  }

  for (double c : {0.5, 1.0, 2.0}) {
    const std::string name = "lemma2_sequence[c=" + num(c) + "]";
    guarded(name, [&] {
      double prev = kInf;
      bool ok = true;
      double worst = 0.0;
      for (double x : {1e2, 1e3, 1e4}) {
        const double dist = std::abs(lemma2_value(c, x) + 0.5 * c * c);
        const double bound = c * c * c / (3.0 * x);
        ok = ok && dist < prev && dist <= bound;
        worst = std::max(worst, dist / bound);
        prev = dist;
      }
      record(name, ok, worst, 1.0);
    });
  }

  const GammaFn gamma = opts.gamma ? opts.gamma : static_cast<GammaFn>(std::tgamma);
  guarded("gamma_identities", [&] {
    const double sp = std::sqrt(std::numbers::pi);
    const double err = std::max({std::abs(gamma(0.5) - sp) / sp, std::abs(gamma(1.0) - 1.0),
                                 std::abs(gamma(1.5) - 0.5 * sp) / (0.5 * sp)});
    record("gamma_identities", err < 1e-12, err, 1e-12);
  });

  for (double d : {1.2, 1.5, 1.8}) {
    const std::string name = "stable_scale[delta=" + num(d) + "]";
    guarded(name, [&] {
      const double direct = one_minus_cos_integral(d);
      const double formula = std::pow(stable_scale(d, gamma), d);
      const double rel = std::abs(formula - direct) / direct;
      record(name, rel < 1e-6, rel, 1e-6);
    });
  }

  for (const Pulse& p : {Pulse::linear_plateau(), Pulse::triangle()}) {
    const std::string name = "compensator_closed_vs_quadrature[" + p.name() + "]";
    guarded(name, [&] {
      const DurationLaw law = ParetoDuration{1.0, 1.5};
      double worst = 0.0;
      for (double t : {0.5, 1.0, 3.0}) {
        const double c = compensator_value(p, 1.0, 2.0, 0.5, law, t);
        const auto q = compensator_by_quadrature(p, 1.0, 2.0, 0.5, law, t);
        // Compact pulses have a zero compensator; compare absolutely there.
        worst = std::max(worst, std::abs(c - q.value) / std::max(std::abs(c), 1.0));
      }
      record(name, worst < 1e-7, worst, 1e-7);
    });
  }

  guarded("stable_sampler_ecf", [&] {
    const StableModel m = stable_model(1.5, 1.0, TwoPointRate{0.75, 1.0, 1.0});
    RngStream rng(20240601, 0);
    std::vector<double> x(20000);
    for (auto& v : x) v = sample_stable(m, 1.0, rng);
    const auto ecf = empirical_cf(x, ecf_grid());
    const double gap =
        ecf_sup_gap(ecf, [&](double k) { return stable_char_function(m, 1.0, k); });
    record("stable_sampler_ecf", gap < 0.03, gap, 0.03);
  });

  out << (rep.all_passed() ? "selftest: all checks passed" : "selftest: FAILURES") << "\n";
  return rep;
}

}  // namespace isp
