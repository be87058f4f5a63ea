#include "momentswarm/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "momentswarm/errors.hpp"
#include "momentswarm/io.hpp"

namespace momentswarm {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError("config field '" + field + "': " + message);
}

// Reads members of one JSON object and rejects any it was never asked about.
class Fields {
 public:
  Fields(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(field(key), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(field(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      fail(field(key), "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(field(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

Position parse_point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(field, "expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Position> parse_points(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array of [x, y] pairs");
  std::vector<Position> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(parse_point(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

MomentVector parse_target(const json& node, const MomentBasis& basis,
                          const std::filesystem::path& base) {
  Fields f(node, "target");
  const bool has_image = f.has("image");
  const bool has_moments = f.has("moments");
  const bool has_positions = f.has("positions");
  if (has_image + has_moments + has_positions != 1) {
    fail("target", "give exactly one of 'image', 'moments' or 'positions'");
  }
  const bool invert = f.boolean("invert", false);
  if (!has_image && f.has("invert")) fail("target.invert", "only applies to 'image'");
  try {
    if (has_image) {
      const auto grid = read_pgm(resolve(base, f.string("image", "")), invert);
      f.finish();
      return moments_of_grid(basis, grid);
    }
    if (has_moments) {
      auto m = read_moments_csv(resolve(base, f.string("moments", "")), basis.kind());
      f.finish();
      if (!(m.basis() == basis)) {
        fail("target.moments", "file holds " + describe(m.basis()) + ", scenario uses " + describe(basis));
      }
      return m;
    }
    const auto pts = parse_points(*f.find("positions"), "target.positions");
    f.finish();
    if (pts.empty()) fail("target.positions", "must not be empty");
    return moments_of_points(basis, pts);
  } catch (const FormatError& e) {
    fail("target", e.what());
  } catch (const std::invalid_argument& e) {
    fail("target", e.what());
  } catch (const std::domain_error& e) {
    fail("target", e.what());
  }
}

TopologySpec parse_topology(const json& v) {
  if (v.is_string()) {
    try {
      return TopologySpec::parse(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail("topology", e.what());
    }
  }
  if (!v.is_array()) fail("topology", "expected \"all_to_all\", \"radius:<r>\" or [[src, dst], ...]");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      fail("topology[" + std::to_string(i) + "]", "expected [src, dst] with non-negative integers");
    }
    edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  return TopologySpec::explicit_edges(std::move(edges));
}

std::array<double, 3> parse_triple(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) fail(field, "expected three numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) fail(field, "expected three numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

ScenarioEvent parse_event(const json& v, const std::string& field) {
  Fields f(v, field);
  ScenarioEvent ev;
  ev.iteration = f.integer("iteration", -1);
  if (ev.iteration < 1) fail(f.field("iteration"), "required, must be >= 1");
  const json* add = f.find("add");
  const json* remove = f.find("remove");
  if ((add != nullptr) == (remove != nullptr)) fail(field, "give exactly one of 'add' or 'remove'");
  if (add) {
    Fields a(*add, field + ".add");
    AddRobots action;
    if (const json* p = a.find("positions")) action.positions = parse_points(*p, a.field("positions"));
    const auto count = a.integer("count", 0);
    if (count < 0) fail(a.field("count"), "must be >= 0");
    action.count = static_cast<std::size_t>(count);
    if (const json* r = a.find("region")) {
      if (!r->is_array() || r->size() != 4) fail(a.field("region"), "expected [x_min, x_max, y_min, y_max]");
      for (const auto& x : *r) {
        if (!x.is_number()) fail(a.field("region"), "expected [x_min, x_max, y_min, y_max]");
      }
      action.region = {(*r)[0].get<double>(), (*r)[1].get<double>(), (*r)[2].get<double>(),
                       (*r)[3].get<double>()};
    }
    a.finish();
    ev.action = std::move(action);
  } else {
    Fields r(*remove, field + ".remove");
    RemoveRobots action;
    if (const json* ids = r.find("ids")) {
      if (!ids->is_array()) fail(r.field("ids"), "expected an array of robot ids");
      for (const auto& id : *ids) {
        if (!id.is_number_unsigned()) fail(r.field("ids"), "ids must be non-negative integers");
        action.ids.push_back(id.get<RobotId>());
      }
    }
    const auto count = r.integer("count", 0);
    if (count < 0) fail(r.field("count"), "must be >= 0");
    action.count = static_cast<std::size_t>(count);
    const auto sel = r.string("selection", "random");
    if (sel == "random") {
      action.selection = RemoveRobots::Selection::Random;
    } else if (sel == "highest_y") {
      action.selection = RemoveRobots::Selection::HighestY;
    } else {
      fail(r.field("selection"), "expected 'random' or 'highest_y'");
    }
    r.finish();
    ev.action = std::move(action);
  }
  f.finish();
  return ev;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Fields f(root, "");

  const auto name = f.string("name", "");
  BasisKind kind = BasisKind::Legendre;
  try {
    kind = parse_basis_kind(f.string("basis", "legendre"));
  } catch (const std::invalid_argument& e) {
    fail("basis", e.what());
  }
  const auto order = f.integer("order", 8);
  std::optional<MomentBasis> basis;
  try {
    basis.emplace(kind, static_cast<int>(order));
  } catch (const std::exception& e) {
    fail("order", e.what());
  }

  Scenario sc(*basis);
  const auto robots = f.integer("robots", 50);
  if (robots < 1) fail("robots", "must be >= 1");
  sc.robots = static_cast<std::size_t>(robots);

  try {
    sc.mode = parse_sim_mode(f.string("mode", "coupled"));
  } catch (const std::invalid_argument& e) {
    fail("mode", e.what());
  }
  if (const json* t = f.find("target")) sc.target = parse_target(*t, *basis, base_dir);
  if (const json* t = f.find("topology")) sc.topology = parse_topology(*t);
  sc.drop_rate = f.number("drop_rate", 0.0);
  if (!(sc.drop_rate >= 0.0 && sc.drop_rate < 1.0)) fail("drop_rate", "must lie in [0, 1)");

  if (const json* e = f.find("estimator")) {
    Fields est(*e, "estimator");
    sc.gamma_factor = est.number("gamma_factor", 1.0);
    if (!(sc.gamma_factor > 0.0)) fail("estimator.gamma_factor", "must be positive");
    if (const json* g = est.find("gamma")) {
      if (!g->is_number() || !(g->get<double>() > 0.0)) fail("estimator.gamma", "must be a positive number");
      sc.gamma = g->get<double>();
    }
    sc.memory = est.boolean("memory", true);
    if (const json* h = est.find("forget_horizon")) {
      if (!h->is_number_integer() || h->get<std::int64_t>() < 0) {
        fail("estimator.forget_horizon", "must be a non-negative integer");
      }
      sc.forget_horizon = static_cast<int>(h->get<std::int64_t>());
    }
    est.finish();
  }

  if (const json* g = f.find("gains")) {
    Fields gains(*g, "gains");
    sc.gain_beta = gains.number("beta", kDefaultGainExponent);
    if (!(sc.gain_beta >= 0.0)) fail("gains.beta", "must be >= 0");
    sc.gain_scale = gains.number("scale", 1.0);
    if (!(sc.gain_scale > 0.0)) fail("gains.scale", "must be positive");
    gains.finish();
  }

  if (const json* c = f.find("control")) {
    Fields ctl(*c, "control");
    auto& p = sc.control;
    p.dt = ctl.number("dt", 1.0);
    if (ctl.has("v_max") && ctl.find("v_max") == nullptr) {
      p.v_max = std::numeric_limits<double>::infinity();
    } else {
      p.v_max = ctl.number("v_max", 0.01);
    }
    p.v_min = ctl.number("v_min", std::isfinite(p.v_max) ? 0.001 : 0.0);
    p.collision_avoidance = ctl.boolean("collision_avoidance", std::isfinite(p.v_max));
    if (const json* r = ctl.find("zone_radii")) p.zone_radii = parse_triple(*r, "control.zone_radii");
    if (const json* k = ctl.find("zone_gains")) {
      p.zone_gains = parse_triple(*k, "control.zone_gains");
    } else {
      p.zone_gains = ControlParams::default_zone_gains(p.v_max);
    }
    sc.halve_dt_on_cost_increase = ctl.boolean("halve_dt_on_cost_increase", false);
    ctl.finish();
  }

  if (const json* i = f.find("initial")) {
    Fields init(*i, "initial");
    const auto kind_text = init.string("kind", "disk");
    auto& d = sc.initial;
    if (const json* c = init.find("center")) d.center = parse_point(*c, "initial.center");
    if (kind_text == "disk") {
      d.kind = InitialDistribution::Kind::Disk;
      d.extent = init.number("radius", 0.25);
    } else if (kind_text == "square") {
      d.kind = InitialDistribution::Kind::Square;
      d.extent = init.number("half_width", 0.25);
    } else if (kind_text == "explicit") {
      d.kind = InitialDistribution::Kind::Explicit;
      const json* p = init.find("positions");
      if (!p) fail("initial.positions", "required for kind 'explicit'");
      d.positions = parse_points(*p, "initial.positions");
      if (!f.has("robots")) sc.robots = d.positions.size();
    } else {
      fail("initial.kind", "expected 'disk', 'square' or 'explicit'");
    }
    init.finish();
  }

  sc.iterations = f.integer("iterations", 10000);
  if (sc.iterations < 1) fail("iterations", "must be >= 1");
  sc.seed = f.unsigned_integer("seed", 0);
  sc.trial = f.unsigned_integer("trial", 0);

  if (const json* e = f.find("events")) {
    if (!e->is_array()) fail("events", "expected an array");
    for (std::size_t i = 0; i < e->size(); ++i) {
      sc.events.push_back(parse_event((*e)[i], "events[" + std::to_string(i) + "]"));
    }
  }

  if (const json* c = f.find("convergence")) {
    Fields conv(*c, "convergence");
    auto& p = sc.convergence;
    p.estimate_tolerance = conv.number("estimate_tolerance", p.estimate_tolerance);
    p.plateau_tolerance = conv.number("plateau_tolerance", p.plateau_tolerance);
    p.plateau_window = conv.integer("plateau_window", p.plateau_window);
    p.moment_tolerance = conv.number("moment_tolerance", p.moment_tolerance);
    p.divergence_bound = conv.number("divergence_bound", p.divergence_bound);
    sc.stop_on_convergence = conv.boolean("stop", true);
    conv.finish();
  }

  if (const json* m = f.find("metrics")) {
    Fields met(*m, "metrics");
    sc.metric_every = met.integer("every", 1);
    sc.msre_every = met.integer("msre_every", 10);
    if (met.has("trace_robot") && met.find("trace_robot") == nullptr) {
      sc.trace_robot.reset();
    } else {
      const auto id = met.integer("trace_robot", 15);
      if (id < 0) fail("metrics.trace_robot", "must be >= 0 or null");
      sc.trace_robot = static_cast<RobotId>(id);
    }
    sc.estimate_trace_every = met.integer("estimate_trace_every", 0);
    met.finish();
  }
  f.finish();

  sc.validate();
  return ScenarioConfig{name, std::move(sc)};
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_config(text.str(), path.parent_path());
}

}  // namespace momentswarm
