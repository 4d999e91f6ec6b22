// Microbenchmarks for the hot paths: potential evaluation, the closed-loop
// vector field, integration, the small eigensolver and force allocation.
// Run with --benchmark_min_time=... as needed; defaults are fine for a
// quick regression glance.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "anchor/allocation.hpp"
#include "anchor/dynamics.hpp"
#include "anchor/potential.hpp"
#include "anchor/stability.hpp"

using namespace anchor;

namespace {

std::vector<Rotation> sample_rotations(int n) {
  std::mt19937_64 rng(7);
  std::vector<Rotation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(random_rotation(rng));
  return out;
}

void BM_phi(benchmark::State& state) {
  const auto rs = sample_rotations(64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi(rs[i++ & 63]));
  }
}
BENCHMARK(BM_phi);

void BM_grad(benchmark::State& state) {
  const auto rs = sample_rotations(64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad(rs[i++ & 63]));
  }
}
BENCHMARK(BM_grad);

void BM_pitch_decompose(benchmark::State& state) {
  const auto rs = sample_rotations(64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pitch_decompose(rs[i++ & 63]));
  }
}
BENCHMARK(BM_pitch_decompose);

void BM_vector_field(benchmark::State& state) {
  const InertiaModel inert;
  const AnchorGains gains;
  TemplateParams tmpl;
  tmpl.enabled = true;
  std::mt19937_64 rng(8);
  BodyState s;
  s.R = random_rotation(rng);
  s.omega = random_in_ball(rng, 2.0);
  s.p_y = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vector_field(s, inert, gains, tmpl));
  }
}
BENCHMARK(BM_vector_field);

void BM_integrate_100_steps(benchmark::State& state) {
  const InertiaModel inert;
  const AnchorGains gains;
  TemplateParams tmpl;
  tmpl.enabled = true;
  std::mt19937_64 rng(9);
  BodyState s;
  s.R = random_rotation(rng);
  s.omega = random_in_ball(rng, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate(s, inert, gains, tmpl, 1e-3, 0.1).samples.back().eta);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_integrate_100_steps);

void BM_eigenvalues_6x6(benchmark::State& state) {
  const InertiaModel inert;
  const AnchorGains gains;
  TemplateParams tmpl;
  tmpl.enabled = true;
  const Eigen::MatrixXd A(
      linearize(Equilibrium::PitchSet, inert, gains, tmpl).A);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigenvalues(A));
  }
}
BENCHMARK(BM_eigenvalues_6x6);

void BM_allocate(benchmark::State& state) {
  const StanceGeometry geom;
  Wrench w;
  w.force = Vector3(0, 0, 80);
  w.torque = Vector3(1, 0, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(allocate(geom, w, 36.0));
  }
}
BENCHMARK(BM_allocate);

}  // namespace

BENCHMARK_MAIN();
