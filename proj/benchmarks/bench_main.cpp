#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "momentswarm/estimator.hpp"
#include "momentswarm/moments.hpp"

namespace ms = momentswarm;

namespace {

ms::BasisKind kind_of(std::int64_t k) {
  return k == 0 ? ms::BasisKind::Legendre : ms::BasisKind::PseudoZernike;
}

std::vector<ms::Position> cloud(std::size_t n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.65, 0.65);
  std::vector<ms::Position> pts(n);
  for (auto& s : pts) s = {u(rng), u(rng)};
  return pts;
}

void BM_Phi(benchmark::State& state) {
  const ms::MomentBasis basis(kind_of(state.range(0)), static_cast<int>(state.range(1)));
  const ms::Position s{0.31, -0.42};
  for (auto _ : state) benchmark::DoNotOptimize(ms::phi(basis, s));
}
BENCHMARK(BM_Phi)->ArgsProduct({{0, 1}, {4, 8, 12}});

void BM_PhiJacobian(benchmark::State& state) {
  const ms::MomentBasis basis(kind_of(state.range(0)), static_cast<int>(state.range(1)));
  const ms::Position s{0.31, -0.42};
  for (auto _ : state) benchmark::DoNotOptimize(ms::phi_jacobian(basis, s));
}
BENCHMARK(BM_PhiJacobian)->ArgsProduct({{0, 1}, {4, 8, 12}});

void BM_MomentsOfPoints(benchmark::State& state) {
  const ms::MomentBasis basis(ms::BasisKind::Legendre, 8);
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ms::moments_of_points(basis, pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MomentsOfPoints)->Arg(50)->Arg(500);

void BM_MomentsOfGrid(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  ms::DensityGrid grid(side, side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) grid.at(r, c) = static_cast<double>((r * 7 + c * 3) % 11);
  }
  const ms::MomentBasis basis(ms::BasisKind::Legendre, 8);
  for (auto _ : state) benchmark::DoNotOptimize(ms::moments_of_grid(basis, grid));
}
BENCHMARK(BM_MomentsOfGrid)->Arg(64)->Arg(256);

// One robot's push-sum step with a full neighborhood of fresh messages.
void BM_EstimatorStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ms::MomentBasis basis(ms::BasisKind::Legendre, 8);
  const auto input = ms::estimator_input(ms::phi(basis, {0.2, 0.1}));
  const auto dim = static_cast<std::size_t>(input.size());
  std::vector<Eigen::VectorXd> payloads(n - 1, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 0.01));
  std::vector<ms::Message> messages;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    messages.push_back({static_cast<ms::RobotId>(j + 1), {payloads[j].data(), dim}});
  }
  ms::PushSumEstimator est(dim, 1.0 / static_cast<double>(n), 75);
  for (auto _ : state) {
    est.step(input, messages, n - 1);
    benchmark::DoNotOptimize(est.v().data());
  }
}
BENCHMARK(BM_EstimatorStep)->Arg(10)->Arg(50);

}  // namespace
BENCHMARK_MAIN();
