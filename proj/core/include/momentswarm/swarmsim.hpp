#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "momentswarm/controller.hpp"
#include "momentswarm/estimator.hpp"
#include "momentswarm/geometry.hpp"
#include "momentswarm/metric_log.hpp"
#include "momentswarm/moment_basis.hpp"
#include "momentswarm/moments.hpp"
#include "momentswarm/network.hpp"

namespace momentswarm {

enum class SimMode { EstimateOnly, ControlOnlyPerfect, Coupled };

std::string_view to_string(SimMode mode);
/// "estimate_only", "control_only_perfect" or "coupled".
SimMode parse_sim_mode(std::string_view text);

/// Axis-aligned box in the normalized domain.
struct Region {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
};

/// Explicit positions, or `count` robots drawn uniformly in `region`.
struct AddRobots {
  std::vector<Position> positions;
  std::size_t count = 0;
  Region region;
};

/// Explicit robot ids, or `count` robots picked by `selection`.
struct RemoveRobots {
  enum class Selection { Random, HighestY };
  std::vector<RobotId> ids;
  std::size_t count = 0;
  Selection selection = Selection::Random;
};

/// Applied after the position update of iteration `iteration`.
struct ScenarioEvent {
  std::int64_t iteration = 0;
  std::variant<AddRobots, RemoveRobots> action;
};

struct InitialDistribution {
  enum class Kind { Disk, Square, Explicit };
  Kind kind = Kind::Disk;
  Position center;
  /// Disk radius or square half-width.
  double extent = 0.25;
  std::vector<Position> positions;
};

struct ConvergenceParams {
  /// Estimate-only runs: max_i |Mhat_i - M(s)| below this.
  double estimate_tolerance = 0.01;
  /// Control runs: relative MSRE change over `plateau_window` iterations.
  double plateau_tolerance = 1e-4;
  std::int64_t plateau_window = 500;
  /// Control runs also count as converged once |M(s) - M*| drops below this.
  double moment_tolerance = 1e-4;
  /// Positions beyond this magnitude (or non-finite) end the run as diverged.
  double divergence_bound = 1e3;
};

/// Everything needed to replay a run.
struct Scenario {
  explicit Scenario(MomentBasis basis) : basis(std::move(basis)) {}

  std::size_t robots = 50;
  MomentBasis basis;
  /// Desired moments; required by the control modes.
  std::optional<MomentVector> target;
  SimMode mode = SimMode::Coupled;
  TopologySpec topology;
  double drop_rate = 0.0;

  /// gamma = gamma_factor / N (re-evaluated when N changes) unless `gamma` is set.
  double gamma_factor = 1.0;
  std::optional<double> gamma;
  bool memory = true;
  /// Defaults: 75 for estimate-only runs, ceil(1.5 N) otherwise.
  std::optional<int> forget_horizon;

  double gain_beta = kDefaultGainExponent;
  double gain_scale = 1.0;
  ControlParams control;
  /// Perfect-estimate mode only: halve dt whenever a step would raise the cost.
  bool halve_dt_on_cost_increase = false;

  InitialDistribution initial;
  std::vector<ScenarioEvent> events;

  std::int64_t iterations = 10000;
  std::uint64_t seed = 0;
  /// Varies delivery, collision and event streams; initial positions depend on `seed` only.
  std::uint64_t trial = 0;
  bool stop_on_convergence = true;
  ConvergenceParams convergence;

  /// Logging intervals (in iterations). 0 disables the metric.
  std::int64_t metric_every = 1;
  std::int64_t msre_every = 10;
  std::optional<RobotId> trace_robot = RobotId{15};
  /// Full estimate trace of the traced robot every k iterations (0 = off).
  std::int64_t estimate_trace_every = 0;

  /// Throws ConfigError on invalid combinations.
  void validate() const;

  /// Horizon used for N robots.
  int horizon_for(std::size_t n) const;
  double gamma_for(std::size_t n) const;
};

enum class RunStatus { Converged, ReachedCap, Diverged };
std::string_view to_string(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::ReachedCap;
  std::int64_t iterations = 0;
  /// Iteration count at which convergence was first declared with no events pending.
  std::optional<std::int64_t> converged_at;
  /// Per-phase plateau iterations (control modes), in order.
  std::vector<std::int64_t> phase_plateaus;
};

struct RobotState {
  RobotId id = 0;
  Position position;
  PushSumEstimator estimator;
  /// Last available estimate (kept while the ratio is unavailable).
  std::optional<Eigen::VectorXd> estimate;
  /// Payload broadcast at the end of the previous iteration.
  std::optional<Eigen::VectorXd> broadcast;
};

/// One estimate-trace record.
struct EstimateTraceRow {
  std::int64_t iteration = 0;
  RobotId robot = 0;
  Eigen::VectorXd estimate;
  double error = 0.0;
};

/// Derives an independent stream seed for a named concern.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial, std::string_view stream);

/// Synchronous swarm simulation.
///
/// Each call to step() runs one iteration: sense, receive, estimate,
/// broadcast, compute and filter velocity, move, rebuild topology, apply
/// events, log.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  void step();
  RunResult run();

  /// Called after every step.
  void set_observer(std::function<void(const Simulation&)> observer) { observer_ = std::move(observer); }

  /// New robots start with w = 0 and empty memory. Returns their ids.
  std::vector<RobotId> add_robots(std::span<const Position> positions);
  /// Throws std::invalid_argument for unknown ids or if no robot would remain.
  void remove_robots(std::span<const RobotId> ids);

  const Scenario& scenario() const { return scenario_; }
  std::int64_t iteration() const { return iteration_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  std::vector<Position> positions() const;
  const Digraph& graph() const { return graph_; }
  const MetricLog& log() const { return log_; }
  const std::vector<EstimateTraceRow>& estimate_trace() const { return estimate_trace_; }
  const GainSchedule& gains() const { return gains_; }
  double dt() const { return dt_; }

  /// Centrally computed mean-phi moments of the current positions.
  MomentVector current_moments() const;
  /// |M(s) - M*|; requires a target.
  double moment_error() const;
  /// max_i |Mhat_i - M(s)|; infinity while any robot lacks an estimate.
  double max_estimate_error() const;

  /// Non-fatal conditions such as a disconnected initial topology.
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool diverged() const { return diverged_; }
  std::optional<std::int64_t> converged_at() const { return converged_at_; }
  const std::vector<std::int64_t>& phase_plateaus() const { return phase_plateaus_; }

 private:
  void receive_and_estimate();
  std::vector<Eigen::Vector2d> commanded_velocities();
  void move(const std::vector<Eigen::Vector2d>& velocity);
  bool apply_events();
  void log_metrics(bool force);
  void record_estimate_trace();
  void check_convergence();
  bool events_pending() const;
  Position clip_to_domain(Position s) const;
  void check_in_domain(const Position& s) const;
  void rebuild_topology();
  void refresh_sensing();
  void start_phase();

  Scenario scenario_;
  GainSchedule gains_;
  std::optional<MsreEvaluator> msre_eval_;
  std::vector<RobotState> robots_;
  RobotId next_id_ = 0;
  Digraph graph_;
  PacketLossModel loss_;
  std::mt19937_64 collision_rng_;
  std::mt19937_64 event_rng_;
  std::int64_t iteration_ = 0;
  double dt_;
  MetricLog log_;
  std::vector<EstimateTraceRow> estimate_trace_;
  std::function<void(const Simulation&)> observer_;

  // Per-robot phi and Jacobian at the current positions.
  std::vector<Eigen::VectorXd> phi_;
  std::vector<Jacobian> jac_;
  // Scratch reused across steps.
  std::vector<Edge> delivered_;
  std::vector<std::vector<Message>> inbox_;
  Eigen::VectorXd input_;

  std::vector<std::string> warnings_;
  bool diverged_ = false;
  bool moved_ = true;
  bool last_connected_ = true;
  bool connected_ = true;
  double initial_error_ = 0.0;
  std::optional<std::int64_t> converged_at_;
  std::vector<std::int64_t> phase_plateaus_;
  // (iteration, msre) samples of the current phase for plateau detection.
  std::vector<std::pair<std::int64_t, double>> phase_msre_;
  bool phase_plateau_logged_ = false;
  std::int64_t last_msre_iteration_ = -1;
};

/// Builds and runs a simulation.
RunResult run(const Scenario& scenario, MetricLog* log_out = nullptr);

}  // namespace momentswarm
