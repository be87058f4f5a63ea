#include <algorithm>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "momentswarm/errors.hpp"
#include "momentswarm/swarmsim.hpp"
#include "test_support.hpp"

namespace ms = momentswarm;
using ms::BasisKind;
using ms::MomentBasis;
using ms::Position;
using ms::Scenario;
using ms::SimMode;
using ms::Simulation;

namespace {

Scenario estimate_scenario(std::size_t n, int order = 3) {
  Scenario sc(MomentBasis(BasisKind::Legendre, order));
  sc.robots = n;
  sc.mode = SimMode::EstimateOnly;
  sc.initial.kind = ms::InitialDistribution::Kind::Square;
  sc.initial.extent = 0.6;
  sc.iterations = 2000;
  sc.trace_robot.reset();
  return sc;
}

Scenario pure_control_scenario(std::uint64_t seed) {
  Scenario sc(MomentBasis(BasisKind::Legendre, 4));
  sc.robots = 10;
  sc.mode = SimMode::ControlOnlyPerfect;
  sc.target = ms::moments_of_points(sc.basis, ms::testing::random_square(10, 1000 + seed, 0.6));
  sc.control.v_max = std::numeric_limits<double>::infinity();
  sc.control.v_min = 0.0;
  sc.control.collision_avoidance = false;
  sc.control.dt = 1.0;
  sc.halve_dt_on_cost_increase = true;
  sc.iterations = 300;
  sc.seed = seed;
  sc.stop_on_convergence = false;
  sc.trace_robot.reset();
  return sc;
}

std::string log_csv(const ms::MetricLog& log) {
  std::ostringstream out;
  log.write_csv(out);
  return out.str();
}

}  // namespace

TEST(SimMode, NamesRoundTrip) {
  for (auto m : {SimMode::EstimateOnly, SimMode::ControlOnlyPerfect, SimMode::Coupled}) {
    EXPECT_EQ(ms::parse_sim_mode(ms::to_string(m)), m);
  }
  EXPECT_THROW(ms::parse_sim_mode("perfect"), std::invalid_argument);
}

TEST(Scenario, DefaultHorizonAndGain) {
  auto sc = estimate_scenario(50);
  EXPECT_EQ(sc.horizon_for(50), 75);
  EXPECT_DOUBLE_EQ(sc.gamma_for(50), 1.0 / 50);
  sc.mode = SimMode::Coupled;
  EXPECT_EQ(sc.horizon_for(50), 75);
  EXPECT_EQ(sc.horizon_for(35), 53);
  sc.memory = false;
  EXPECT_EQ(sc.horizon_for(35), 0);
  sc.gamma_factor = 0.1;
  EXPECT_DOUBLE_EQ(sc.gamma_for(7), 0.1 / 7);
  sc.gamma = 0.02;
  EXPECT_DOUBLE_EQ(sc.gamma_for(7), 0.02);
}

TEST(Scenario, ValidationRejectsBadCombinations) {
  auto sc = estimate_scenario(5);
  sc.mode = SimMode::Coupled;
  EXPECT_THROW(sc.validate(), ms::ConfigError);
  sc = estimate_scenario(5);
  sc.iterations = 0;
  EXPECT_THROW(sc.validate(), ms::ConfigError);
  sc = estimate_scenario(5);
  sc.target = ms::MomentVector(MomentBasis(BasisKind::Legendre, 4));
  EXPECT_THROW(sc.validate(), ms::ConfigError);
  sc = estimate_scenario(5);
  sc.initial.kind = ms::InitialDistribution::Kind::Explicit;
  sc.initial.positions = {{0, 0}};
  EXPECT_THROW(sc.validate(), ms::ConfigError);
  sc = estimate_scenario(5);
  sc.halve_dt_on_cost_increase = true;
  EXPECT_THROW(sc.validate(), ms::ConfigError);
}

TEST(Scenario, GainTooLargeSurfacesAsConfigError) {
  auto sc = estimate_scenario(5);
  sc.gamma = 0.5;
  Simulation sim(sc);
  EXPECT_THROW(sim.step(), ms::ConfigError);
}

TEST(DeriveSeed, StableAndSeparatedByStream) {
  EXPECT_EQ(ms::derive_seed(1, 2, "delivery"), ms::derive_seed(1, 2, "delivery"));
  EXPECT_NE(ms::derive_seed(1, 2, "delivery"), ms::derive_seed(1, 2, "collision"));
  EXPECT_NE(ms::derive_seed(1, 2, "delivery"), ms::derive_seed(1, 3, "delivery"));
  EXPECT_NE(ms::derive_seed(1, 2, "delivery"), ms::derive_seed(2, 2, "delivery"));
}

TEST(Simulation, SingleRobotEstimateExactAfterFirstStep) {
  auto sc = estimate_scenario(1);
  Simulation sim(sc);
  sim.step();
  const auto& r = sim.robots().front();
  ASSERT_TRUE(r.estimate.has_value());
  EXPECT_LT((*r.estimate - ms::phi(sc.basis, r.position)).norm(), 1e-15);
}

TEST(Simulation, InitialLayoutHonorsDistribution) {
  auto sc = estimate_scenario(200);
  sc.initial.kind = ms::InitialDistribution::Kind::Disk;
  sc.initial.center = {0.2, -0.1};
  sc.initial.extent = 0.25;
  Simulation sim(sc);
  for (const auto& s : sim.positions()) EXPECT_LE(ms::distance(s, {0.2, -0.1}), 0.25);
}

TEST(Simulation, EstimateOnlyRobotsStayPut) {
  auto sc = estimate_scenario(12);
  sc.drop_rate = 0.2;
  Simulation sim(sc);
  const auto start = sim.positions();
  for (int t = 0; t < 50; ++t) sim.step();
  EXPECT_EQ(sim.positions(), start);
}

TEST(Simulation, EstimateOnlyConvergesToCentralMoments) {
  auto sc = estimate_scenario(25, 4);
  sc.topology = ms::TopologySpec::parse("radius:0.9");
  sc.drop_rate = 0.2;
  sc.stop_on_convergence = false;
  sc.iterations = 3000;
  Simulation sim(sc);
  ASSERT_TRUE(ms::strongly_connected(sim.graph()));
  sim.run();
  const auto truth = ms::moments_of_points(sc.basis, sim.positions()).values();
  for (const auto& r : sim.robots()) EXPECT_LT((*r.estimate - truth).norm(), 0.01);
}

TEST(Simulation, ConvergedRunReportsIteration) {
  auto sc = estimate_scenario(10);
  const auto result = ms::run(sc);
  EXPECT_EQ(result.status, ms::RunStatus::Converged);
  ASSERT_TRUE(result.converged_at.has_value());
  EXPECT_EQ(*result.converged_at, result.iterations);
  EXPECT_LT(result.iterations, 100);
}

TEST(Simulation, ControlFromTargetKeepsPositionsFixed) {
  Scenario sc(MomentBasis(BasisKind::PseudoZernike, 4));
  sc.robots = 8;
  sc.mode = SimMode::ControlOnlyPerfect;
  sc.initial.kind = ms::InitialDistribution::Kind::Explicit;
  sc.initial.positions = ms::testing::random_disk(8, 3, 0.0, 0.8);
  sc.target = ms::moments_of_points(sc.basis, sc.initial.positions);
  sc.control.collision_avoidance = false;
  sc.iterations = 200;
  sc.stop_on_convergence = false;
  Simulation sim(sc);
  sim.run();
  EXPECT_EQ(sim.positions(), sc.initial.positions);
  EXPECT_DOUBLE_EQ(sim.moment_error(), 0.0);
}

TEST(Simulation, DescentWithStepHalvingNeverRaisesCost) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Simulation sim(pure_control_scenario(seed));
    sim.run();
    const auto cost = sim.log().series("cost");
    ASSERT_EQ(cost.size(), 301u);
    for (std::size_t k = 1; k < cost.size(); ++k) {
      ASSERT_LE(cost[k].second, cost[k - 1].second) << "seed " << seed << " iteration " << cost[k].first;
    }
    EXPECT_LT(cost.back().second, cost.front().second);
  }
}

TEST(Simulation, IdenticalSeedGivesIdenticalLog) {
  Scenario sc(MomentBasis(BasisKind::Legendre, 4));
  sc.robots = 15;
  sc.target = ms::moments_of_points(sc.basis, ms::testing::random_square(15, 2, 0.5));
  sc.drop_rate = 0.2;
  sc.iterations = 300;
  sc.events = {{100, ms::RemoveRobots{{}, 3, ms::RemoveRobots::Selection::Random}},
               {200, ms::AddRobots{{}, 4, {-0.5, 0.5, -0.5, 0.5}}}};
  sc.stop_on_convergence = false;
  sc.trace_robot = 3;
  sc.estimate_trace_every = 10;
  Simulation a(sc), b(sc);
  a.run();
  b.run();
  EXPECT_EQ(log_csv(a.log()), log_csv(b.log()));
  EXPECT_EQ(a.positions(), b.positions());

  sc.trial = 1;
  Simulation c(sc);
  EXPECT_EQ(c.positions(), Simulation(sc).positions());
  c.run();
  EXPECT_NE(log_csv(a.log()), log_csv(c.log()));
}

TEST(Simulation, TrialKeepsInitialLayout) {
  auto sc = estimate_scenario(20);
  const auto p0 = Simulation(sc).positions();
  sc.trial = 5;
  EXPECT_EQ(Simulation(sc).positions(), p0);
  sc.seed = 9;
  EXPECT_NE(Simulation(sc).positions(), p0);
}

TEST(Simulation, RemoveThenAddRestoresCount) {
  auto sc = estimate_scenario(6);
  Simulation sim(sc);
  sim.step();
  const auto removed = sim.robots()[2];
  const std::vector<ms::RobotId> ids{removed.id};
  sim.remove_robots(ids);
  EXPECT_EQ(sim.robots().size(), 5u);
  EXPECT_EQ(sim.graph().vertex_count(), 5u);
  const std::vector<Position> back{removed.position};
  const auto added = sim.add_robots(back);
  ASSERT_EQ(added.size(), 1u);
  EXPECT_EQ(sim.robots().size(), 6u);
  EXPECT_EQ(sim.robots().back().estimator.w(), Eigen::VectorXd::Zero(sc.basis.real_size() + 1));
  EXPECT_TRUE(sim.robots().back().estimator.memory().empty());
}

TEST(Simulation, RemovalAndAdditionErrors) {
  Scenario sc(MomentBasis(BasisKind::PseudoZernike, 3));
  sc.robots = 3;
  sc.mode = SimMode::EstimateOnly;
  Simulation sim(sc);
  const std::vector<ms::RobotId> unknown{99};
  EXPECT_THROW(sim.remove_robots(unknown), std::invalid_argument);
  const std::vector<ms::RobotId> all{0, 1, 2};
  EXPECT_THROW(sim.remove_robots(all), std::invalid_argument);
  const std::vector<ms::RobotId> dup{1, 1};
  EXPECT_THROW(sim.remove_robots(dup), std::invalid_argument);
  const std::vector<Position> outside{{0.9, 0.9}};
  EXPECT_THROW(sim.add_robots(outside), std::invalid_argument);
  EXPECT_EQ(sim.robots().size(), 3u);
}

TEST(Simulation, NeighborsForgetRemovedRobotAfterHorizon) {
  auto sc = estimate_scenario(5);
  sc.forget_horizon = 10;
  sc.stop_on_convergence = false;
  Simulation sim(sc);
  for (int t = 0; t < 5; ++t) sim.step();
  const std::vector<ms::RobotId> gone{4};
  sim.remove_robots(gone);
  for (int t = 1; t <= 10; ++t) {
    sim.step();
    for (const auto& r : sim.robots()) ASSERT_NE(r.estimator.memory_entry(4), nullptr) << "step " << t;
  }
  sim.step();
  for (const auto& r : sim.robots()) EXPECT_EQ(r.estimator.memory_entry(4), nullptr);
}

TEST(Simulation, ChurnReconvergesToNewMean) {
  auto sc = estimate_scenario(12, 4);
  sc.iterations = 800;
  sc.stop_on_convergence = false;
  sc.events = {{100, ms::RemoveRobots{{0, 5}, 0, {}}}, {300, ms::AddRobots{{{0.1, 0.1}, {-0.3, 0.4}}, 0, {}}}};
  Simulation sim(sc);
  sim.run();
  EXPECT_EQ(sim.robots().size(), 12u);
  EXPECT_LT(sim.max_estimate_error(), 1e-6);
  const auto count = sim.log().series("robot_count");
  EXPECT_EQ(count.back().second, 12.0);
}

TEST(Simulation, AddingRobotShiftsSwarmMoments) {
  Scenario sc(MomentBasis(BasisKind::Legendre, 4));
  sc.robots = 6;
  sc.target = ms::moments_of_points(sc.basis, ms::testing::random_square(6, 1, 0.5));
  Simulation sim(sc);
  const auto before = sim.current_moments().values();
  const std::vector<Position> extra{{0.7, -0.6}};
  sim.add_robots(extra);
  auto pts = sim.positions();
  EXPECT_LT((sim.current_moments().values() - ms::moments_of_points(sc.basis, pts).values()).norm(), 1e-14);
  EXPECT_GT((sim.current_moments().values() - before).norm(), 0.05);
}

TEST(Simulation, HighestYSelectionRemovesTopRobots) {
  auto sc = estimate_scenario(10);
  sc.iterations = 5;
  sc.stop_on_convergence = false;
  sc.events = {{2, ms::RemoveRobots{{}, 3, ms::RemoveRobots::Selection::HighestY}}};
  Simulation sim(sc);
  auto ys = sim.positions();
  std::sort(ys.begin(), ys.end(), [](const Position& a, const Position& b) { return a.y > b.y; });
  sim.run();
  ASSERT_EQ(sim.robots().size(), 7u);
  for (const auto& s : sim.positions()) EXPECT_LT(s.y, ys[2].y);
}

TEST(Simulation, UnboundedGainDiverges) {
  auto sc = pure_control_scenario(1);
  sc.halve_dt_on_cost_increase = false;
  sc.gain_scale = 1e4;
  const auto result = ms::run(sc);
  EXPECT_EQ(result.status, ms::RunStatus::Diverged);
  EXPECT_LT(result.iterations, 300);
}

TEST(Simulation, PseudoZernikeRobotsStayInsideDisk) {
  Scenario sc(MomentBasis(BasisKind::PseudoZernike, 3));
  sc.robots = 10;
  sc.mode = SimMode::ControlOnlyPerfect;
  std::vector<Position> rim;
  for (int k = 0; k < 10; ++k) rim.push_back({0.99 * std::cos(k * 0.6), 0.99 * std::sin(k * 0.6)});
  sc.target = ms::moments_of_points(sc.basis, rim);
  sc.control.v_max = 0.05;
  sc.control.zone_gains = ms::ControlParams::default_zone_gains(0.05);
  sc.gain_scale = 50.0;
  sc.iterations = 400;
  sc.stop_on_convergence = false;
  Simulation sim(sc);
  sim.set_observer([](const Simulation& s) {
    for (const auto& p : s.positions()) ASSERT_LE(p.radius(), 0.999 + 1e-12);
  });
  sim.run();
}

TEST(Simulation, DisconnectedTopologyWarns) {
  auto sc = estimate_scenario(10);
  sc.topology = ms::TopologySpec::parse("radius:0.01");
  sc.iterations = 3;
  Simulation sim(sc);
  ASSERT_EQ(sim.warnings().size(), 1u);
  EXPECT_NE(sim.warnings()[0].find("not strongly connected"), std::string::npos);
  EXPECT_EQ(sim.log().series("strongly_connected").front().second, 0.0);
}

TEST(Simulation, TracesDesignatedRobot) {
  auto sc = estimate_scenario(20);
  sc.trace_robot = 15;
  sc.estimate_trace_every = 1;
  sc.iterations = 10;
  sc.stop_on_convergence = false;
  Simulation sim(sc);
  sim.run();
  EXPECT_EQ(sim.log().series("estimate_error", 15).size(), 10u);
  ASSERT_EQ(sim.estimate_trace().size(), 10u);
  EXPECT_EQ(sim.estimate_trace().back().robot, 15u);
  EXPECT_EQ(sim.estimate_trace().back().estimate.size(), static_cast<Eigen::Index>(sc.basis.real_size()));
}

TEST(MetricLog, SeriesLastAndCsv) {
  ms::MetricLog log;
  log.add(0, "msre", 0.5);
  log.add(0, "estimate_error", 0.25, 3);
  log.add(10, "msre", 0.125);
  EXPECT_EQ(log.size(), 3u);
  EXPECT_EQ(log.series("msre"), (std::vector<std::pair<std::int64_t, double>>{{0, 0.5}, {10, 0.125}}));
  EXPECT_EQ(log.series("estimate_error", 3).size(), 1u);
  EXPECT_EQ(log.last("msre"), 0.125);
  EXPECT_FALSE(log.last("cost").has_value());
  std::ostringstream out;
  log.write_csv(out);
  EXPECT_EQ(out.str(), "iteration,metric,robot_id,value\n0,msre,,0.5\n0,estimate_error,3,0.25\n10,msre,,0.125\n");
}
