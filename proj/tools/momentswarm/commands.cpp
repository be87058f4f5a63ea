#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "momentswarm/controller.hpp"
#include "momentswarm/errors.hpp"
#include "momentswarm/io.hpp"
#include "momentswarm/moments.hpp"
#include "momentswarm/scenario_config.hpp"
#include "momentswarm/swarmsim.hpp"

namespace momentswarm::cli {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string component_name(const MomentIndex& idx) {
  return "m_" + std::to_string(idx.p) + "_" + std::to_string(idx.q) + "_" +
         std::string(to_string(idx.part));
}

void write_positions(const std::filesystem::path& path, const Simulation& sim) {
  auto out = open_out(path);
  out << "id,x,y\n";
  for (const auto& r : sim.robots()) {
    out << r.id << ',' << format_double(r.position.x) << ',' << format_double(r.position.y) << '\n';
  }
}

void write_snapshot(const std::filesystem::path& dir, const Simulation& sim) {
  char stem[32];
  std::snprintf(stem, sizeof stem, "%08lld", static_cast<long long>(sim.iteration()));
  write_positions(dir / ("positions_" + std::string(stem) + ".csv"), sim);
  const auto grid = reconstruct(sim.current_moments(), 64, 64);
  write_pgm(dir / ("reconstruction_" + std::string(stem) + ".pgm"), grid);
}

void write_estimate_trace(const std::filesystem::path& path, const Simulation& sim) {
  auto out = open_out(path);
  out << "iteration,robot_id,error";
  for (const auto& idx : sim.scenario().basis.indices()) out << ',' << component_name(idx);
  out << '\n';
  for (const auto& row : sim.estimate_trace()) {
    out << row.iteration << ',' << row.robot << ',' << format_double(row.error);
    for (Eigen::Index i = 0; i < row.estimate.size(); ++i) out << ',' << format_double(row.estimate[i]);
    out << '\n';
  }
}

}  // namespace

int cmd_moments(const MomentsOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const MomentBasis basis(parse_basis_kind(opts.basis), opts.order);
    const auto grid = read_pgm(opts.image, opts.invert);
    const auto m = moments_of_grid(basis, grid);
    if (opts.out) {
      write_moments_csv(*opts.out, m);
      out << "complex moments: " << basis.complex_count() << '\n';
      out << "real components: " << basis.real_size() << '\n';
    } else {
      write_moments_csv(out, m);
      err << "complex moments: " << basis.complex_count() << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "moments: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_reconstruct(const ReconstructOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.rows < 2 || opts.cols < 2) throw std::invalid_argument("resolution must be at least 2x2");
    const auto m = read_moments_csv(opts.moments);
    std::optional<MomentVector> ref;
    if (opts.reference) {
      ref = read_moments_csv(*opts.reference);
      if (!(ref->basis() == m.basis())) {
        throw std::invalid_argument("reference holds " + describe(ref->basis()) + " but input holds " +
                                    describe(m.basis()));
      }
    }
    ensure_dir(opts.out_dir);
    const auto grid = reconstruct(m, opts.rows, opts.cols);
    write_pgm(opts.out_dir / "reconstruction.pgm", grid);
    auto csv = open_out(opts.out_dir / "reconstruction.csv");
    write_grid_csv(csv, grid);
    out << "basis: " << describe(m.basis()) << '\n';
    out << "wrote " << (opts.out_dir / "reconstruction.pgm").string() << '\n';
    if (ref) out << "msre: " << format_double(msre(m, *ref)) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "reconstruct: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<Simulation> sim;
  try {
    auto config = load_scenario_config(opts.config);
    auto& sc = config.scenario;
    if (opts.seed) sc.seed = *opts.seed;
    if (opts.trial) sc.trial = *opts.trial;
    if (opts.trace_robot) {
      sc.trace_robot = *opts.trace_robot;
      if (sc.estimate_trace_every == 0) sc.estimate_trace_every = 1;
    }
    if (opts.snapshot_every < 0) throw ConfigError("--snapshot-every must be >= 0");
    ensure_dir(opts.out_dir);
    sim.emplace(std::move(sc));
    if (!config.name.empty()) out << "scenario: " << config.name << '\n';
  } catch (const std::exception& e) {
    err << "run: " << e.what() << '\n';
    return kExitUsage;
  }

  for (const auto& w : sim->warnings()) err << "warning: " << w << '\n';
  const auto snapshot_dir = opts.out_dir / "snapshots";
  if (opts.snapshot_every > 0) {
    ensure_dir(snapshot_dir);
    sim->set_observer([&](const Simulation& s) {
      if (s.iteration() % opts.snapshot_every == 0) write_snapshot(snapshot_dir, s);
    });
  }

  RunResult result;
  try {
    result = sim->run();
    sim->log().write_csv(opts.out_dir / "metrics.csv");
    write_positions(opts.out_dir / "positions.csv", *sim);
    auto edges = open_out(opts.out_dir / "edges.csv");
    write_edges_csv(edges, sim->graph());
    auto gains = open_out(opts.out_dir / "gains.csv");
    sim->gains().write_csv(gains);
    if (sim->scenario().estimate_trace_every > 0) {
      write_estimate_trace(opts.out_dir / "estimator_trace.csv", *sim);
    }
  } catch (const std::exception& e) {
    err << "run: " << e.what() << '\n';
    return kExitUsage;
  }

  out << "status: " << to_string(result.status) << '\n';
  out << "iterations: " << result.iterations << '\n';
  if (result.converged_at) out << "converged at iteration: " << *result.converged_at << '\n';
  if (!result.phase_plateaus.empty()) {
    out << "phases converged at:";
    for (auto t : result.phase_plateaus) out << ' ' << t;
    out << '\n';
  }
  if (sim->scenario().target && !sim->diverged()) {
    out << "final moment error: " << format_double(sim->moment_error()) << '\n';
    if (const auto m = sim->log().last("msre")) out << "final msre: " << format_double(*m) << '\n';
  }
  if (sim->scenario().mode != SimMode::ControlOnlyPerfect && !sim->diverged()) {
    out << "max estimate error: " << format_double(sim->max_estimate_error()) << '\n';
  }
  return result.status == RunStatus::Converged ? kExitOk : kExitNotConverged;
}

int cmd_gains(const GainsOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const MomentBasis basis(parse_basis_kind(opts.basis), opts.order);
    gain_matrix(basis, opts.beta, opts.scale).write_csv(out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "gains: " << e.what() << '\n';
    return kExitUsage;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-based swarm estimation and formation control"};
  app.require_subcommand(1);

  MomentsOptions mo;
  auto* moments = app.add_subcommand("moments", "Moments of a PGM image, written as CSV");
  moments->add_option("image", mo.image, "Grayscale PGM (P2 or P5)")->required();
  moments->add_option("--basis", mo.basis, "legendre or pseudo_zernike")->capture_default_str();
  moments->add_option("--order", mo.order, "Maximum moment order")->capture_default_str();
  moments->add_flag("--invert", mo.invert, "Dark pixels are dense");
  moments->add_option("--out", mo.out, "Output CSV (default: stdout)");

  ReconstructOptions ro;
  auto* recon = app.add_subcommand("reconstruct", "Truncated-series reconstruction of a moment CSV");
  recon->add_option("moments", ro.moments, "Moment CSV")->required();
  recon->add_option("--rows", ro.rows, "Output rows")->capture_default_str();
  recon->add_option("--cols", ro.cols, "Output columns")->capture_default_str();
  recon->add_option("--reference", ro.reference, "Desired moments; prints MSRE against them");
  recon->add_option("--out-dir", ro.out_dir, "Output directory")->capture_default_str();

  RunOptions run;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint32_t trace = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario config");
  run_cmd->add_option("config", run.config, "Scenario JSON")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
  auto* trial_opt = run_cmd->add_option("--trial", trial, "Override the trial index");
  auto* trace_opt = run_cmd->add_option("--trace-robot", trace, "Robot id whose estimates are traced");
  run_cmd->add_option("--snapshot-every", run.snapshot_every, "Write snapshots every k iterations");
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory")->capture_default_str();

  GainsOptions go;
  auto* gains = app.add_subcommand("gains", "Print the gain schedule as CSV");
  gains->add_option("--basis", go.basis, "legendre or pseudo_zernike")->capture_default_str();
  gains->add_option("--order", go.order, "Maximum moment order")->capture_default_str();
  gains->add_option("--beta", go.beta, "Gain exponent")->capture_default_str();
  gains->add_option("--scale", go.scale, "Overall gain factor")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (moments->parsed()) return cmd_moments(mo, out, err);
  if (recon->parsed()) return cmd_reconstruct(ro, out, err);
  if (run_cmd->parsed()) {
    if (seed_opt->count() > 0) run.seed = seed;
    if (trial_opt->count() > 0) run.trial = trial;
    if (trace_opt->count() > 0) run.trace_robot = trace;
    return cmd_run(run, out, err);
  }
  if (gains->parsed()) return cmd_gains(go, out, err);
  return kExitUsage;
}

}  // namespace momentswarm::cli
