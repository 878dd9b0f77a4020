#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isp/config.hpp"
#include "isp/errors.hpp"
#include "isp/harness.hpp"
#include "isp/limits.hpp"

namespace {

void row(const std::string& name, double v) { std::printf("%s,%.17g\n", name.c_str(), v); }

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw isp::ConfigError("bad number '" + item + "' in --n-list");
    out.push_back(v);
  }
  return out;
}

isp::Pulse pulse_by_name(const std::string& name) {
  if (name == "linear_plateau") return isp::Pulse::linear_plateau();
  if (name == "triangle") return isp::Pulse::triangle();
  throw isp::ConfigError("unknown pulse '" + name + "'");
}

void print_record(const isp::RunRecord& rec) {
  std::printf("config_hash,%s\n", rec.config_hash.c_str());
  std::printf("seed,%llu\n", static_cast<unsigned long long>(rec.seed));
  for (const auto& [k, m] : rec.metrics) {
    std::printf("%s,%.17g,%.17g\n", k.c_str(), m.value, m.stderr);
  }
  for (const auto& a : rec.artifacts) std::printf("artifact,%s\n", a.c_str());
  std::printf("wall_time,%.3f\n", rec.wall_time);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite-source Poisson price process simulator"};
  app.require_subcommand(1);

  std::string config_file, out_dir = "out", n_list, target, what;
  long long paths = -1;
  long long seed = -1;

  auto* sim = app.add_subcommand("simulate", "simulate an ensemble and write paths.csv");
  sim->add_option("--config", config_file, "JSON config file")->required();
  sim->add_option("--paths", paths, "number of paths (overrides config)");
  sim->add_option("--seed", seed, "master seed (overrides config)");
  sim->add_option("--out", out_dir, "output directory");

  auto* conv = app.add_subcommand("converge", "sweep the regime parameter n");
  conv->add_option("--config", config_file, "JSON config file")->required();
  conv->add_option("--n-list", n_list, "comma separated n values")->required();
  conv->add_option("--target", target, "hurst|stable_index|variance|ecf")->required();
  conv->add_option("--paths", paths, "number of paths (overrides config)");
  conv->add_option("--seed", seed, "master seed (overrides config)");
  conv->add_option("--out", out_dir, "output directory");

  double delta = 1.5, lambda = 1.0, er2 = 1.0, kappa = 1.0, t = 1.0, t1 = 0.5, t2 = 1.0;
  double c = 1.0, x = 100.0, p = 0.5, r_plus = 1.0, r_minus = 1.0;
  std::string pulse_name = "linear_plateau";
  auto* ana = app.add_subcommand("analytic", "print analytic quantities as CSV rows");
  ana->add_option("--what", what, "sigma2|hurst|stable-scale|stable-model|covariance|lemma1|lemma2")
      ->required()
      ->check(CLI::IsMember({"sigma2", "hurst", "stable-scale", "stable-model", "covariance",
                             "lemma1", "lemma2"}));
  ana->add_option("--delta", delta);
  ana->add_option("--lambda", lambda);
  ana->add_option("--er2", er2, "E R^2");
  ana->add_option("--pulse", pulse_name, "linear_plateau|triangle");
  ana->add_option("--kappa", kappa);
  ana->add_option("--t", t);
  ana->add_option("--t1", t1);
  ana->add_option("--t2", t2);
  ana->add_option("--c", c);
  ana->add_option("--x", x);
  ana->add_option("--p", p, "two-point rate: P(R = r_plus)");
  ana->add_option("--r-plus", r_plus);
  ana->add_option("--r-minus", r_minus);

  auto* self = app.add_subcommand("selftest", "run the analytic invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed() || conv->parsed()) {
      isp::ExperimentConfig cfg = isp::load_config(config_file);
      if (paths >= 0) cfg.paths = paths;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (paths == 0) throw isp::ConfigError("--paths must be >= 1");
      if (sim->parsed()) {
        print_record(isp::run_simulate(cfg, out_dir));
      } else {
        const auto res =
            isp::run_converge(cfg, parse_list(n_list), isp::parse_target(target), out_dir);
        std::printf("n,estimate,stderr,limit,abs_gap\n");
        for (const auto& r : res.rows) {
          std::printf("%.17g,%.17g,%.17g,%.17g,%.17g\n", r.n, r.estimate, r.stderr, r.limit,
                      r.abs_gap);
        }
      }
    } else if (ana->parsed()) {
      const isp::Pulse pulse = pulse_by_name(pulse_name);
      if (what == "sigma2") {
        row("sigma2", isp::fbm_variance(pulse, delta, lambda, er2));
        if (pulse.kind() == isp::PulseKind::LinearPlateau && delta < 2.0) {
          row("sigma2_closed_form", isp::linear_plateau_sigma2(delta, lambda, er2));
        }
      } else if (what == "hurst") {
        row("H", isp::hurst(delta));
      } else if (what == "stable-scale") {
        row("stable_scale", isp::stable_scale(delta));
        row("symmetric_stable_scale", isp::symmetric_stable_scale(delta));
      } else if (what == "stable-model") {
        const auto m = isp::stable_model(delta, lambda, isp::TwoPointRate{p, r_plus, r_minus});
        row("delta", m.delta);
        row("base_scale", m.base_scale);
        row("C1", m.C1);
        row("C2", m.C2);
        row("lambda", m.lambda);
        row("beta", m.beta);
        row("total_scale", m.total_scale);
      } else if (what == "covariance") {
        const auto m = isp::fbm_model(pulse, delta, lambda, er2);
        row("sigma2", m.sigma2);
        row("H", m.H);
        row("covariance", isp::fbm_covariance(m, t1, t2));
      } else if (what == "lemma1") {
        const auto q = isp::lemma1_integral(pulse, kappa, delta, t);
        row("bound", isp::lemma1_bound(pulse.lipschitz_f(), kappa, delta, t));
        row("integral", q.value);
        row("integral_error", q.error);
      } else {
        const auto v = isp::lemma2_value(c, x);
        row("value_re", v.real());
        row("value_im", v.imag());
        row("target", -0.5 * c * c);
        row("distance", std::abs(v + 0.5 * c * c));
        row("bound", c * c * c / (3.0 * x));
      }
    } else if (self->parsed()) {
      const auto rep = isp::run_selftest(std::cout);
      return rep.all_passed() ? 0 : 1;
    }
  } catch (const isp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const isp::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
