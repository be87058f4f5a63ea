#include "momentswarm/swarmsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "momentswarm/errors.hpp"

namespace momentswarm {
namespace {

constexpr double kPzmClipRadius = 0.999;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& rows, Eigen::Index size) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(size);
  for (const auto& r : rows) sum += r;
  return rows.empty() ? sum : Eigen::VectorXd(sum / static_cast<double>(rows.size()));
}

}  // namespace

std::string_view to_string(SimMode mode) {
  switch (mode) {
    case SimMode::EstimateOnly:
      return "estimate_only";
    case SimMode::ControlOnlyPerfect:
      return "control_only_perfect";
    case SimMode::Coupled:
      return "coupled";
  }
  return "?";
}

SimMode parse_sim_mode(std::string_view text) {
  if (text == "estimate_only") return SimMode::EstimateOnly;
  if (text == "control_only_perfect") return SimMode::ControlOnlyPerfect;
  if (text == "coupled") return SimMode::Coupled;
  throw std::invalid_argument("unknown mode '" + std::string(text) +
                              "' (expected estimate_only, control_only_perfect or coupled)");
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::ReachedCap:
      return "reached_cap";
    case RunStatus::Diverged:
      return "diverged";
  }
  return "?";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(splitmix64(splitmix64(seed) ^ h) ^ trial);
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

int Scenario::horizon_for(std::size_t n) const {
  if (!memory) return 0;
  if (forget_horizon) return *forget_horizon;
  if (mode == SimMode::EstimateOnly) return 75;
  return static_cast<int>(std::ceil(1.5 * static_cast<double>(n)));
}

double Scenario::gamma_for(std::size_t n) const {
  if (gamma) return *gamma;
  return gamma_factor / static_cast<double>(std::max<std::size_t>(n, 1));
}

void Scenario::validate() const {
  const bool controlled = mode != SimMode::EstimateOnly;
  if (initial.kind == InitialDistribution::Kind::Explicit) {
    if (initial.positions.empty()) throw ConfigError("initial.positions must not be empty");
    if (initial.positions.size() != robots) {
      throw ConfigError("robots (" + std::to_string(robots) + ") does not match the " +
                        std::to_string(initial.positions.size()) + " explicit initial positions");
    }
  } else if (!(initial.extent > 0.0)) {
    throw ConfigError("initial extent must be positive");
  }
  if (robots == 0) throw ConfigError("robots must be at least 1");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (controlled && !target) throw ConfigError(std::string(to_string(mode)) + " mode needs a target");
  if (target && !(target->basis() == basis)) {
    throw ConfigError("target is " + describe(target->basis()) + " but the scenario uses " +
                      describe(basis));
  }
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) throw ConfigError("drop_rate must lie in [0, 1)");
  if (!(gamma_factor > 0.0)) throw ConfigError("estimator.gamma_factor must be positive");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("estimator.gamma must be positive");
  if (forget_horizon && *forget_horizon < 0) throw ConfigError("estimator.forget_horizon must be >= 0");
  if (!(gain_beta >= 0.0)) throw ConfigError("gains.beta must be >= 0");
  if (!(gain_scale > 0.0)) throw ConfigError("gains.scale must be positive");
  control.validate();
  if (halve_dt_on_cost_increase && mode != SimMode::ControlOnlyPerfect) {
    throw ConfigError("control.halve_dt_on_cost_increase requires control_only_perfect mode");
  }
  for (const auto& ev : events) {
    if (ev.iteration < 1 || ev.iteration > iterations) {
      throw ConfigError("event iteration " + std::to_string(ev.iteration) + " outside 1.." +
                        std::to_string(iterations));
    }
    if (const auto* add = std::get_if<AddRobots>(&ev.action)) {
      if (add->positions.empty() && add->count == 0) throw ConfigError("add event adds no robots");
      const auto& r = add->region;
      if (!(r.x_min <= r.x_max && r.y_min <= r.y_max)) throw ConfigError("add event region is empty");
    } else {
      const auto& rem = std::get<RemoveRobots>(ev.action);
      if (rem.ids.empty() && rem.count == 0) throw ConfigError("remove event removes no robots");
    }
  }
  if (metric_every < 0 || msre_every < 0 || estimate_trace_every < 0) {
    throw ConfigError("metric intervals must be >= 0");
  }
  if (controlled && msre_every == 0) throw ConfigError("control modes need metrics.msre_every >= 1");
  if (!(convergence.estimate_tolerance > 0.0) || !(convergence.plateau_tolerance > 0.0) ||
      !(convergence.moment_tolerance >= 0.0) ||
      convergence.plateau_window < 1 || !(convergence.divergence_bound > 0.0)) {
    throw ConfigError("convergence parameters must be positive");
  }
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

Simulation::Simulation(Scenario scenario)
    : scenario_((scenario.validate(), std::move(scenario))),
      gains_(scenario_.basis, scenario_.gain_beta, scenario_.gain_scale),
      loss_(scenario_.drop_rate, derive_seed(scenario_.seed, scenario_.trial, "delivery")),
      collision_rng_(derive_seed(scenario_.seed, scenario_.trial, "collision")),
      event_rng_(derive_seed(scenario_.seed, scenario_.trial, "events")),
      dt_(scenario_.control.dt) {
  if (scenario_.target) {
    try {
      msre_eval_.emplace(*scenario_.target);
    } catch (const std::invalid_argument&) {
      throw ConfigError("target moments are all zero");
    }
  }

  std::vector<Position> initial;
  const auto& init = scenario_.initial;
  if (init.kind == InitialDistribution::Kind::Explicit) {
    initial = init.positions;
  } else {
    // Initial positions ignore the trial index so trials share a layout.
    std::mt19937_64 rng(derive_seed(scenario_.seed, 0, "positions"));
    initial.reserve(scenario_.robots);
    for (std::size_t i = 0; i < scenario_.robots; ++i) {
      const double a = uniform01(rng);
      const double b = uniform01(rng);
      if (init.kind == InitialDistribution::Kind::Disk) {
        const double r = init.extent * std::sqrt(a);
        const double t = 2.0 * std::numbers::pi * b;
        initial.push_back({init.center.x + r * std::cos(t), init.center.y + r * std::sin(t)});
      } else {
        initial.push_back({init.center.x + init.extent * (2.0 * a - 1.0),
                           init.center.y + init.extent * (2.0 * b - 1.0)});
      }
    }
  }
  for (const auto& s : initial) {
    try {
      check_in_domain(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("initial positions: ") + e.what());
    }
  }
  add_robots(initial);

  if (!connected_) {
    warnings_.push_back("initial topology " + scenario_.topology.to_string() +
                        " is not strongly connected");
  }
  last_connected_ = connected_;
  initial_error_ = scenario_.target ? moment_error() : 0.0;
  start_phase();
  log_metrics(true);
}

std::vector<Position> Simulation::positions() const {
  std::vector<Position> out;
  out.reserve(robots_.size());
  for (const auto& r : robots_) out.push_back(r.position);
  return out;
}

void Simulation::check_in_domain(const Position& s) const {
  const bool finite = std::isfinite(s.x) && std::isfinite(s.y);
  if (scenario_.basis.kind() == BasisKind::PseudoZernike) {
    if (!finite || s.radius() > 1.0) throw std::invalid_argument("position outside the unit disk");
  } else if (!finite || std::abs(s.x) > 1.0 || std::abs(s.y) > 1.0) {
    throw std::invalid_argument("position outside [-1,1]^2");
  }
}

Position Simulation::clip_to_domain(Position s) const {
  if (scenario_.basis.kind() == BasisKind::PseudoZernike) {
    const double r = s.radius();
    if (r > kPzmClipRadius) {
      s.x *= kPzmClipRadius / r;
      s.y *= kPzmClipRadius / r;
    }
  }
  return s;
}

void Simulation::rebuild_topology() {
  graph_ = scenario_.topology.build(positions());
  connected_ = strongly_connected(graph_);
}

void Simulation::refresh_sensing() {
  phi_.resize(robots_.size());
  jac_.resize(robots_.size());
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    phi_with_jacobian(scenario_.basis, robots_[i].position, phi_[i], jac_[i]);
  }
}

std::vector<RobotId> Simulation::add_robots(std::span<const Position> positions) {
  for (const auto& s : positions) check_in_domain(s);
  const std::size_t n_after = robots_.size() + positions.size();
  const std::size_t dim = scenario_.basis.real_size() + 1;
  std::vector<RobotId> ids;
  for (const auto& s : positions) {
    const RobotId id = next_id_++;
    robots_.push_back(RobotState{id, clip_to_domain(s),
                                 PushSumEstimator(dim, scenario_.gamma_for(n_after),
                                                  scenario_.horizon_for(n_after)),
                                 std::nullopt, std::nullopt});
    ids.push_back(id);
  }
  rebuild_topology();
  refresh_sensing();
  return ids;
}

void Simulation::remove_robots(std::span<const RobotId> ids) {
  std::vector<RobotId> gone(ids.begin(), ids.end());
  std::sort(gone.begin(), gone.end());
  if (std::adjacent_find(gone.begin(), gone.end()) != gone.end()) {
    throw std::invalid_argument("remove_robots: duplicate id");
  }
  for (auto id : gone) {
    const bool known = std::any_of(robots_.begin(), robots_.end(),
                                   [id](const RobotState& r) { return r.id == id; });
    if (!known) throw std::invalid_argument("remove_robots: unknown robot " + std::to_string(id));
  }
  if (gone.size() >= robots_.size()) throw std::invalid_argument("remove_robots: cannot remove every robot");
  std::erase_if(robots_, [&](const RobotState& r) {
    return std::binary_search(gone.begin(), gone.end(), r.id);
  });
  rebuild_topology();
  refresh_sensing();
}

MomentVector Simulation::current_moments() const {
  return MomentVector(scenario_.basis,
                      mean_of(phi_, static_cast<Eigen::Index>(scenario_.basis.real_size())));
}

double Simulation::moment_error() const {
  if (!scenario_.target) throw std::logic_error("moment_error: scenario has no target");
  return (current_moments().values() - scenario_.target->values()).norm();
}

double Simulation::max_estimate_error() const {
  const Eigen::VectorXd m = current_moments().values();
  double worst = 0.0;
  for (const auto& r : robots_) {
    if (!r.estimate) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, (*r.estimate - m).norm());
  }
  return worst;
}

bool Simulation::events_pending() const {
  return std::any_of(scenario_.events.begin(), scenario_.events.end(),
                     [&](const ScenarioEvent& ev) { return ev.iteration > iteration_; });
}

void Simulation::receive_and_estimate() {
  const std::size_t n = robots_.size();
  const double gamma = scenario_.gamma_for(n);
  const int horizon = scenario_.horizon_for(n);

  inbox_.resize(n);
  for (auto& box : inbox_) box.clear();
  sample_delivery(graph_, loss_, delivered_);
  for (const auto& e : delivered_) {
    const auto& payload = robots_[e.src].broadcast;
    if (!payload) continue;
    inbox_[e.dst].push_back(Message{
        robots_[e.src].id,
        std::span<const double>(payload->data(), static_cast<std::size_t>(payload->size()))});
  }
  const auto m = static_cast<Eigen::Index>(scenario_.basis.real_size());
  input_.resize(m + 1);
  input_[m] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& est = robots_[i].estimator;
    est.set_gamma(gamma);
    est.set_forget_horizon(horizon);
    input_.head(m) = phi_[i];
    est.step(input_, inbox_[i], graph_.out_degree(i));
  }
  // Broadcasts are taken only after every robot has consumed last round's payloads.
  for (auto& r : robots_) {
    if (auto m = r.estimator.estimate()) r.estimate = std::move(*m);
    r.broadcast = r.estimator.w();
  }
}

std::vector<Eigen::Vector2d> Simulation::commanded_velocities() {
  const std::size_t n = robots_.size();
  std::vector<Eigen::Vector2d> v(n, Eigen::Vector2d::Zero());
  if (scenario_.mode == SimMode::EstimateOnly) return v;

  const auto& target = *scenario_.target;
  if (scenario_.mode == SimMode::ControlOnlyPerfect) {
    const MomentVector m = current_moments();
    for (std::size_t i = 0; i < n; ++i) v[i] = control_velocity(jac_[i], m, target, gains_);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (!robots_[i].estimate) continue;
      v[i] = control_velocity(jac_[i], MomentVector(scenario_.basis, *robots_[i].estimate), target,
                              gains_);
    }
  }

  const auto& params = scenario_.control;
  if (params.collision_avoidance) {
    const auto pos = positions();
    std::vector<Position> others;
    others.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      others.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) others.push_back(pos[j]);
      }
      v[i] = collision_filter(v[i], pos[i], others, params, collision_rng_);
    }
  }
  for (auto& vi : v) vi = saturate_deadband(vi, params);
  return v;
}

void Simulation::move(const std::vector<Eigen::Vector2d>& velocity) {
  const auto step_to = [&](double dt) {
    std::vector<Position> next(robots_.size());
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      const auto& s = robots_[i].position;
      next[i] = clip_to_domain({s.x + dt * velocity[i].x(), s.y + dt * velocity[i].y()});
    }
    return next;
  };

  std::vector<Position> next = step_to(dt_);
  if (scenario_.halve_dt_on_cost_increase) {
    const auto& target = *scenario_.target;
    const double before = formation_cost(current_moments(), target, gains_);
    const auto cost_at = [&](const std::vector<Position>& pts) {
      for (const auto& s : pts) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) return std::numeric_limits<double>::infinity();
      }
      return formation_cost(moments_of_points(scenario_.basis, pts), target, gains_);
    };
    bool halved = false;
    while (cost_at(next) > before && dt_ > 1e-12) {
      dt_ *= 0.5;
      halved = true;
      next = step_to(dt_);
    }
    if (halved) log_.add(iteration_ + 1, "dt", dt_);
  }
  moved_ = false;
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    moved_ = moved_ || !(robots_[i].position == next[i]);
    robots_[i].position = next[i];
  }
}

bool Simulation::apply_events() {
  bool changed = false;
  for (const auto& ev : scenario_.events) {
    if (ev.iteration != iteration_) continue;
    if (const auto* add = std::get_if<AddRobots>(&ev.action)) {
      std::vector<Position> pts = add->positions;
      for (std::size_t k = 0; k < add->count; ++k) {
        const auto& r = add->region;
        const double x = r.x_min + (r.x_max - r.x_min) * uniform01(event_rng_);
        const double y = r.y_min + (r.y_max - r.y_min) * uniform01(event_rng_);
        pts.push_back(clip_to_domain({x, y}));
      }
      add_robots(pts);
      log_.add(iteration_, "robots_added", static_cast<double>(pts.size()));
    } else {
      const auto& rem = std::get<RemoveRobots>(ev.action);
      std::vector<RobotId> ids = rem.ids;
      if (rem.count > 0) {
        if (rem.count >= robots_.size()) {
          throw ConfigError("remove event at iteration " + std::to_string(ev.iteration) +
                            " would remove every robot");
        }
        std::vector<std::size_t> order(robots_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (rem.selection == RemoveRobots::Selection::HighestY) {
          std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return robots_[a].position.y > robots_[b].position.y;
          });
        } else {
          for (std::size_t i = 0; i < rem.count; ++i) {
            const auto span = static_cast<std::uint64_t>(order.size() - i);
            std::swap(order[i], order[i + static_cast<std::size_t>(event_rng_() % span)]);
          }
        }
        for (std::size_t i = 0; i < rem.count; ++i) ids.push_back(robots_[order[i]].id);
      }
      remove_robots(ids);
      log_.add(iteration_, "robots_removed", static_cast<double>(ids.size()));
    }
    changed = true;
  }
  if (changed) start_phase();
  return changed;
}

void Simulation::start_phase() {
  phase_msre_.clear();
  phase_plateau_logged_ = false;
}

void Simulation::step() {
  if (diverged_) return;

  // Sensing is refreshed after every move, so phi_ and jac_ hold the current positions.
  if (scenario_.mode != SimMode::ControlOnlyPerfect) receive_and_estimate();
  move(commanded_velocities());

  ++iteration_;
  for (const auto& r : robots_) {
    const auto& s = r.position;
    if (!std::isfinite(s.x) || !std::isfinite(s.y) ||
        std::max(std::abs(s.x), std::abs(s.y)) > scenario_.convergence.divergence_bound) {
      diverged_ = true;
    }
  }
  if (diverged_) {
    log_.add(iteration_, "diverged", 1.0);
    if (observer_) observer_(*this);
    return;
  }

  if (scenario_.mode != SimMode::EstimateOnly && scenario_.topology.position_dependent()) {
    rebuild_topology();
  }
  apply_events();
  if (moved_) refresh_sensing();
  log_metrics(false);
  record_estimate_trace();
  check_convergence();
  if (observer_) observer_(*this);
}

void Simulation::log_metrics(bool force) {
  const auto every = [&](std::int64_t k) { return k > 0 && iteration_ % k == 0; };
  const bool sample = force || every(scenario_.metric_every);

  const bool connected = connected_;
  if (force || connected != last_connected_) log_.add(iteration_, "strongly_connected", connected ? 1.0 : 0.0);
  last_connected_ = connected;

  if (sample) {
    log_.add(iteration_, "robot_count", static_cast<double>(robots_.size()));
    const MomentVector m = current_moments();
    if (scenario_.target) {
      log_.add(iteration_, "moment_error", (m.values() - scenario_.target->values()).norm());
      log_.add(iteration_, "cost", formation_cost(m, *scenario_.target, gains_));
    }
    if (scenario_.mode != SimMode::ControlOnlyPerfect && iteration_ > 0) {
      log_.add(iteration_, "estimate_error_max", max_estimate_error());
      if (scenario_.trace_robot) {
        for (const auto& r : robots_) {
          if (r.id != *scenario_.trace_robot || !r.estimate) continue;
          log_.add(iteration_, "estimate_error", (*r.estimate - m.values()).norm(), r.id);
          if (scenario_.target) {
            log_.add(iteration_, "target_estimate_error",
                     (*r.estimate - scenario_.target->values()).norm(), r.id);
          }
        }
      }
    }
  }
  if (msre_eval_ && (force || every(scenario_.msre_every)) && last_msre_iteration_ != iteration_) {
    last_msre_iteration_ = iteration_;
    const double value = (*msre_eval_)(current_moments());
    log_.add(iteration_, "msre", value);
    phase_msre_.emplace_back(iteration_, value);
  }
}

void Simulation::record_estimate_trace() {
  const auto k = scenario_.estimate_trace_every;
  if (k <= 0 || iteration_ % k != 0 || !scenario_.trace_robot) return;
  for (const auto& r : robots_) {
    if (r.id != *scenario_.trace_robot || !r.estimate) continue;
    const Eigen::VectorXd reference =
        scenario_.target ? scenario_.target->values() : current_moments().values();
    estimate_trace_.push_back({iteration_, r.id, *r.estimate, (*r.estimate - reference).norm()});
  }
}

void Simulation::check_convergence() {
  if (phase_plateau_logged_) return;
  bool phase_done = false;
  if (scenario_.mode == SimMode::EstimateOnly) {
    phase_done = max_estimate_error() < scenario_.convergence.estimate_tolerance;
  } else if (moment_error() < scenario_.convergence.moment_tolerance) {
    phase_done = true;
  } else if (!phase_msre_.empty() && phase_msre_.back().first == iteration_) {
    const std::int64_t horizon = iteration_ - scenario_.convergence.plateau_window;
    const auto it = std::find_if(phase_msre_.rbegin(), phase_msre_.rend(),
                                 [&](const auto& sample) { return sample.first <= horizon; });
    if (it != phase_msre_.rend()) {
      const double now = phase_msre_.back().second;
      const double then = it->second;
      const double rel = std::abs(now - then) / std::max(then, std::numeric_limits<double>::min());
      phase_done = rel < scenario_.convergence.plateau_tolerance && moment_error() < initial_error_;
    }
  }
  if (!phase_done) return;
  phase_plateau_logged_ = true;
  phase_plateaus_.push_back(iteration_);
  log_.add(iteration_, "phase_converged", static_cast<double>(phase_plateaus_.size()));
  if (!events_pending() && !converged_at_) converged_at_ = iteration_;
}

RunResult Simulation::run() {
  while (iteration_ < scenario_.iterations && !diverged_) {
    step();
    if (converged_at_ && scenario_.stop_on_convergence) break;
  }
  if (!diverged_) {
    const bool logged = scenario_.metric_every > 0 && iteration_ % scenario_.metric_every == 0;
    if (!logged) log_metrics(true);
  }
  RunResult result;
  result.status = diverged_ ? RunStatus::Diverged
                            : (converged_at_ ? RunStatus::Converged : RunStatus::ReachedCap);
  result.iterations = iteration_;
  result.converged_at = converged_at_;
  result.phase_plateaus = phase_plateaus_;
  return result;
}

RunResult run(const Scenario& scenario, MetricLog* log_out) {
  Simulation sim(scenario);
  auto result = sim.run();
  if (log_out) *log_out = sim.log();
  return result;
}

}  // namespace momentswarm
