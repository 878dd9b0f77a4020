#include "isp/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "isp/errors.hpp"

namespace isp {

namespace {

using nlohmann::json;

class Issues {
 public:
  void add(const std::string& path, const std::string& msg) { list_.push_back(path + ": " + msg); }
  bool empty() const { return list_.empty(); }
  [[noreturn]] void raise() const {
    std::string all = "invalid config";
    for (const auto& s : list_) all += "\n  " + s;
    throw ConfigError(all);
  }
  void raise_if_any() const {
    if (!empty()) raise();
  }

 private:
  std::vector<std::string> list_;
};

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Typed access to one JSON object that remembers which keys were read.
class Obj {
 public:
  Obj(const json& j, std::string path, Issues& issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) issues_.add(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool ok() const { return j_.is_object(); }
  bool has(const std::string& key) const { return ok() && j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) issues_.add(path(key), "missing required number");
      return fallback.value_or(0.0);
    }
    const json& v = raw(key);
    if (!v.is_number()) {
      issues_.add(path(key), "expected a number");
      return fallback.value_or(0.0);
    }
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback) {
    if (!has(key)) {
      if (!fallback) issues_.add(path(key), "missing required integer");
      return fallback.value_or(0);
    }
    const json& v = raw(key);
    if (!v.is_number_integer()) {
      issues_.add(path(key), "expected an integer");
      return fallback.value_or(0);
    }
    return v.get<std::int64_t>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) issues_.add(path(key), "missing required string");
      return fallback.value_or("");
    }
    const json& v = raw(key);
    if (!v.is_string()) {
      issues_.add(path(key), "expected a string");
      return fallback.value_or("");
    }
    return v.get<std::string>();
  }

  void finish() const {
    if (!ok()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) issues_.add(path(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  Issues& issues_;
  std::set<std::string> seen_;
};

DurationLaw parse_duration(Obj o, const TruncationConfig& tr, Issues& issues,
                           const std::string& path) {
  const std::string type = o.string("type");
  DurationLaw law = ParetoDuration{};
  if (type == "pareto") {
    ParetoDuration p;
    p.b = o.number("b");
    p.delta = o.number("delta");
    law = p;
  } else if (type == "powerlaw") {
    PowerLawInfinite p;
    p.delta = o.number("delta");
    p.u_min = o.number("u_min", tr.u_min);
    p.u_max = o.number("u_max", tr.u_max);
    law = p;
  } else if (o.ok()) {
    issues.add(join(path, "type"), "unknown duration type '" + type + "'");
  }
  o.finish();
  try {
    validate(law);
  } catch (const ConfigError& e) {
    issues.add(path, e.what());
  }
  return law;
}

RateLaw parse_rate(Obj o, Issues& issues, const std::string& path) {
  const std::string type = o.string("type");
  RateLaw law = TwoPointRate{};
  if (type == "twopoint") {
    TwoPointRate r;
    r.p = o.number("p");
    r.r_plus = o.number("r_plus", 1.0);
    r.r_minus = o.number("r_minus", 1.0);
    law = r;
  } else if (type == "gaussian") {
    GaussianRate r;
    r.mean = o.number("mean", 0.0);
    r.std = o.number("std", 1.0);
    law = r;
  } else if (type == "discrete") {
    DiscreteRate r;
    if (o.has("atoms")) {
      const json& a = o.raw("atoms");
      const std::string ap = join(path, "atoms");
      if (!a.is_array() || a.empty()) {
        issues.add(ap, "expected a non-empty array of [value, prob]");
      } else {
        for (std::size_t i = 0; i < a.size(); ++i) {
          const json& e = a[i];
          if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            issues.add(ap + "[" + std::to_string(i) + "]", "expected [value, prob]");
            continue;
          }
          r.atoms.push_back({e[0].get<double>(), e[1].get<double>()});
        }
      }
    } else {
      issues.add(join(path, "atoms"), "missing required array");
    }
    law = r;
  } else if (o.ok()) {
    issues.add(join(path, "type"), "unknown rate type '" + type + "'");
  }
  o.finish();
  try {
    validate(law);
  } catch (const ConfigError& e) {
    issues.add(path, e.what());
  }
  return law;
}

Pulse parse_pulse(Obj o, Issues& issues, const std::string& path) {
  const std::string type = o.string("type", "linear_plateau");
  Pulse pulse = Pulse::linear_plateau();
  if (type == "linear_plateau") {
  } else if (type == "triangle") {
    pulse = Pulse::triangle();
  } else if (type == "custom") {
    std::vector<Knot> knots;
    if (o.has("knots") && o.raw("knots").is_array()) {
      const json& k = o.raw("knots");
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_array() || k[i].size() != 2 || !k[i][0].is_number() ||
            !k[i][1].is_number()) {
          issues.add(join(path, "knots") + "[" + std::to_string(i) + "]", "expected [x, y]");
          continue;
        }
        knots.push_back({k[i][0].get<double>(), k[i][1].get<double>()});
      }
    } else {
      issues.add(join(path, "knots"), "missing required array");
    }
    const std::string sup = o.string("support");
    SupportKind kind = SupportKind::Plateau;
    if (sup == "compact") {
      kind = SupportKind::Compact;
    } else if (sup != "plateau" && o.has("support")) {
      issues.add(join(path, "support"), "expected 'plateau' or 'compact'");
    }
    std::optional<double> m;
    if (o.has("M")) m = o.number("M");
    const double mp = o.number("M_prime", 0.0);
    try {
      pulse = Pulse::custom(knots, kind, m, mp);
    } catch (const std::exception& e) {
      issues.add(path, e.what());
    }
  } else if (o.ok()) {
    issues.add(join(path, "type"), "unknown pulse type '" + type + "'");
  }
  o.finish();
  return pulse;
}

ScalingRegime parse_regime(Obj o, Issues& issues, const std::string& path) {
  const std::string type = o.string("type", "none");
  if (type == "none") {
    o.finish();
    return Unscaled{};
  }
  const double n = o.number("n");
  if (!(n >= 1.0)) issues.add(join(path, "n"), "must be >= 1");
  ScalingRegime r = Unscaled{};
  if (type == "thm1") {
    r = Intermediate{n};
  } else if (type == "thm2") {
    r = FastProbability{n};
  } else if (type == "thm3") {
    r = FastSimple{n};
  } else if (type == "thm4") {
    r = SlowProbability{n, o.number("alpha")};
  } else if (type == "thm5") {
    r = SlowSimple{n};
  } else if (o.ok()) {
    issues.add(join(path, "type"), "unknown regime '" + type + "'");
  }
  o.finish();
  return r;
}

GridConfig parse_grid(Obj o, Issues& issues, const std::string& path) {
  GridConfig g;
  g.T = o.number("T", 1.0);
  int modes = 0;
  if (o.has("steps")) {
    g.steps = static_cast<int>(o.integer("steps", 0));
    ++modes;
  }
  if (o.has("levels")) {
    g.levels = static_cast<int>(o.integer("levels", 0));
    ++modes;
  }
  if (o.has("times")) {
    const json& t = o.raw("times");
    if (!t.is_array()) {
      issues.add(join(path, "times"), "expected an array of numbers");
    } else {
      for (const auto& v : t) {
        if (!v.is_number()) {
          issues.add(join(path, "times"), "expected an array of numbers");
          break;
        }
        g.times.push_back(v.get<double>());
      }
    }
    ++modes;
  }
  if (modes == 0) g.steps = 10;
  if (modes > 1) issues.add(path, "give only one of steps, levels, times");
  o.finish();
  return g;
}

ComponentSpec parse_component(Obj& o, const TruncationConfig& tr, Issues& issues,
                              const std::string& path) {
  ComponentSpec c;
  c.lambda = o.number("lambda");
  if (!(c.lambda > 0.0)) issues.add(o.path("lambda"), "must be > 0");
  if (o.has("duration")) {
    c.law = parse_duration(Obj(o.raw("duration"), o.path("duration"), issues), tr, issues,
                           o.path("duration"));
  } else {
    issues.add(o.path("duration"), "missing required object");
  }
  if (o.has("rate")) {
    c.rate = parse_rate(Obj(o.raw("rate"), o.path("rate"), issues), issues, o.path("rate"));
  } else {
    issues.add(o.path("rate"), "missing required object");
  }
  if (o.has("pulse")) {
    c.pulse = parse_pulse(Obj(o.raw("pulse"), o.path("pulse"), issues), issues, o.path("pulse"));
  }
  (void)path;
  return c;
}

// ---------------------------------------------------------------------------

json duration_json(const DurationLaw& law) {
  if (const auto* p = std::get_if<ParetoDuration>(&law)) {
    return {{"type", "pareto"}, {"b", p->b}, {"delta", p->delta}};
  }
  const auto& q = std::get<PowerLawInfinite>(law);
  return {{"type", "powerlaw"}, {"delta", q.delta}, {"u_min", q.u_min}, {"u_max", q.u_max}};
}

json rate_json(const RateLaw& law) {
  if (const auto* t = std::get_if<TwoPointRate>(&law)) {
    return {{"type", "twopoint"}, {"p", t->p}, {"r_plus", t->r_plus}, {"r_minus", t->r_minus}};
  }
  if (const auto* g = std::get_if<GaussianRate>(&law)) {
    return {{"type", "gaussian"}, {"mean", g->mean}, {"std", g->std}};
  }
  json atoms = json::array();
  for (const auto& a : std::get<DiscreteRate>(law).atoms) atoms.push_back({a.value, a.prob});
  return {{"type", "discrete"}, {"atoms", atoms}};
}

json pulse_json(const Pulse& p) {
  switch (p.kind()) {
    case PulseKind::LinearPlateau:
      return {{"type", "linear_plateau"}};
    case PulseKind::Triangle:
      return {{"type", "triangle"}};
    case PulseKind::Custom: {
      json knots = json::array();
      for (const auto& k : p.knots()) knots.push_back({k.x, k.y});
      return {{"type", "custom"},
              {"knots", knots},
              {"support", p.support() == SupportKind::Compact ? "compact" : "plateau"},
              {"M", p.lipschitz_f()},
              {"M_prime", p.lipschitz_df()}};
    }
  }
  return {};
}

json regime_json(const ScalingRegime& r) {
  json j{{"type", regime_name(r)}};
  if (!std::holds_alternative<Unscaled>(r)) j["n"] = regime_n(r);
  if (const auto* s = std::get_if<SlowProbability>(&r)) j["alpha"] = s->alpha;
  return j;
}

json component_json(const ComponentSpec& c) {
  return {{"lambda", c.lambda},
          {"duration", duration_json(c.law)},
          {"rate", rate_json(c.rate)},
          {"pulse", pulse_json(c.pulse)}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Issues issues;
  Obj top(root, "", issues);
  if (!top.ok()) issues.raise();
  ExperimentConfig cfg;

  if (top.has("truncation")) {
    Obj t(top.raw("truncation"), "truncation", issues);
    cfg.truncation.u_min = t.number("u_min", cfg.truncation.u_min);
    cfg.truncation.u_max = t.number("u_max", cfg.truncation.u_max);
    cfg.truncation.variance_budget = t.number("variance_budget", cfg.truncation.variance_budget);
    const std::string sj = t.string("small_jumps", "drop");
    if (sj == "gaussian") {
      cfg.truncation.small_jumps = SmallJumps::Gaussian;
    } else if (sj != "drop") {
      issues.add("truncation.small_jumps", "expected 'drop' or 'gaussian'");
    }
    t.finish();
    if (!(cfg.truncation.u_min > 0.0 && cfg.truncation.u_min < cfg.truncation.u_max)) {
      issues.add("truncation", "need 0 < u_min < u_max");
    }
    if (!(cfg.truncation.variance_budget > 0.0)) {
      issues.add("truncation.variance_budget", "must be > 0");
    }
  }

  const bool single = top.has("lambda") || top.has("duration") || top.has("rate") ||
                      top.has("pulse");
  if (top.has("components")) {
    if (single) {
      issues.add("components", "cannot be combined with top-level lambda/duration/rate/pulse");
    }
    const json& list = top.raw("components");
    if (!list.is_array() || list.empty()) {
      issues.add("components", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string p = "components[" + std::to_string(i) + "]";
        Obj c(list[i], p, issues);
        cfg.components.push_back(parse_component(c, cfg.truncation, issues, p));
        c.finish();
      }
    }
  } else {
    cfg.components.push_back(parse_component(top, cfg.truncation, issues, ""));
  }

  if (top.has("regime")) {
    cfg.regime = parse_regime(Obj(top.raw("regime"), "regime", issues), issues, "regime");
  }
  if (top.has("grid")) cfg.grid = parse_grid(Obj(top.raw("grid"), "grid", issues), issues, "grid");
  else cfg.grid.steps = 10;

  const std::int64_t seed = top.integer("seed", 1);
  if (seed < 0) issues.add("seed", "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.paths = top.integer("paths", 100);
  if (cfg.paths < 1) issues.add("paths", "must be >= 1");
  cfg.workers = static_cast<int>(top.integer("workers", 1));
  if (cfg.workers < 1) issues.add("workers", "must be >= 1");
  const std::string centering = top.string("centering", "auto");
  if (centering == "raw") {
    cfg.raw = true;
  } else if (centering != "auto") {
    issues.add("centering", "expected 'auto' or 'raw'");
  }
  top.finish();
  issues.raise_if_any();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file '" + file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  if (cfg.components.size() == 1) {
    j = component_json(cfg.components.front());
  } else {
    j["components"] = json::array();
    for (const auto& c : cfg.components) j["components"].push_back(component_json(c));
  }
  j["regime"] = regime_json(cfg.regime);
  json g{{"T", cfg.grid.T}};
  if (cfg.grid.steps) g["steps"] = *cfg.grid.steps;
  if (cfg.grid.levels) g["levels"] = *cfg.grid.levels;
  if (!cfg.grid.times.empty()) g["times"] = cfg.grid.times;
  j["grid"] = g;
  j["truncation"] = {{"u_min", cfg.truncation.u_min},
                     {"u_max", cfg.truncation.u_max},
                     {"variance_budget", cfg.truncation.variance_budget},
                     {"small_jumps",
                      cfg.truncation.small_jumps == SmallJumps::Gaussian ? "gaussian" : "drop"}};
  j["seed"] = cfg.seed;
  j["paths"] = cfg.paths;
  j["workers"] = cfg.workers;
  j["centering"] = cfg.raw ? "raw" : "auto";
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = json::parse(serialize_config(cfg)).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PathGrid make_grid(const GridConfig& g) {
  PathGrid grid;
  if (!g.times.empty()) {
    grid.times = g.times;
  } else if (g.levels) {
    grid = PathGrid::dyadic(g.T, *g.levels);
  } else {
    grid = PathGrid::uniform(g.T, g.steps.value_or(10));
  }
  validate(grid);
  return grid;
}

void validate_config(const ExperimentConfig& cfg) {
  Issues issues;
  try {
    make_grid(cfg.grid);
  } catch (const std::exception& e) {
    issues.add("grid", e.what());
  }
  if (cfg.components.empty()) issues.add("components", "need at least one component");
  if (cfg.components.size() > kMaxComponents) issues.add("components", "at most 64 components");
  for (std::size_t i = 0; i < cfg.components.size(); ++i) {
    const std::string p =
        cfg.components.size() == 1 ? std::string() : "components[" + std::to_string(i) + "]";
    const auto& c = cfg.components[i];
    try {
      validate(c.law);
      validate(c.rate);
      check_admissible(cfg.regime, tail_index(c.law));
      const auto scaled = intensity(cfg.regime, c.lambda, c.law);
      if (cfg.raw && compensation_mode(cfg.regime, scaled.law) == Compensation::Compensated) {
        issues.add("centering", "raw output needs a probability duration law");
      }
    } catch (const std::exception& e) {
      issues.add(join(p, "regime"), e.what());
    }
    if (is_stable_regime(cfg.regime) && c.pulse.plateau_value() != 1.0) {
      issues.add(join(p, "pulse"), "stable regimes need f(1) = 1");
    }
    const PulseReport rep = validate(c.pulse);
    if (!rep.pass) {
      for (const auto& m : rep.messages) issues.add(join(p, "pulse"), m);
    }
  }
  if (!(cfg.truncation.variance_budget > 0.0)) {
    issues.add("truncation.variance_budget", "must be > 0");
  }
  issues.raise_if_any();
}

EnsembleSpec to_ensemble_spec(const ExperimentConfig& cfg) {
  EnsembleSpec spec;
  spec.components = cfg.components;
  spec.regime = cfg.regime;
  spec.grid = make_grid(cfg.grid);
  spec.raw = cfg.raw;
  spec.small_jumps = cfg.truncation.small_jumps;
  return spec;
}

}  // namespace isp
