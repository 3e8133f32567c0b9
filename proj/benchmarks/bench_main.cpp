#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "nts/align.hpp"
#include "nts/nn.hpp"
#include "nts/random.hpp"
#include "nts/vocoder.hpp"

namespace {

void BM_Align(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nts::Rng rng(1);
  const nts::Symbols alphabet{"a", "b", "c", "d"};
  nts::Symbols a(n), b(n);
  for (auto& x : a) x = alphabet[rng.below(4)];
  for (auto& x : b) x = alphabet[rng.below(4)];
  const nts::CostModel cm{[](std::string_view x, std::string_view y) { return x == y ? 0.0 : 1.0; }, 0.9, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(nts::align(a, b, cm).total_cost);
}
BENCHMARK(BM_Align)->Arg(8)->Arg(32)->Arg(128);

void BM_Forward(benchmark::State& state) {
  nts::TrainConfig cfg;
  const auto in = static_cast<std::size_t>(state.range(0));
  const auto net = nts::make_network({in, 48, 14}, nts::Activation::Tanh, nts::Activation::Linear, cfg);
  std::vector<double> x(in, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(nts::forward(net, x));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(426);

void BM_LpcToLsf(benchmark::State& state) {
  nts::LpcCoefficients a{};
  std::vector<double> poly{1.0};
  for (double f : {500.0, 1500.0, 2500.0, 3500.0, 4500.0}) {
    const double r = 0.97, th = 2.0 * std::numbers::pi * f / 16000.0;
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] += -2.0 * r * std::cos(th) * poly[i];
      next[i + 2] += r * r * poly[i];
    }
    poly = next;
  }
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = poly[k + 1];
  for (auto _ : state) benchmark::DoNotOptimize(nts::lpc_to_lsf(a));
}
BENCHMARK(BM_LpcToLsf);

void BM_Synthesize(benchmark::State& state) {
  nts::FrameParams f;
  f.f0 = 120.0;
  f.power = -20.0;
  f.boundary_freq = 4000.0;
  f.lsf = nts::flat_lsf();
  const std::vector<nts::FrameParams> frames(100, f);  // one second
  for (auto _ : state) benchmark::DoNotOptimize(nts::synthesize(frames).samples.data());
}
BENCHMARK(BM_Synthesize)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
