#include <benchmark/benchmark.h>

#include <random>

#include "vortex/fft.hpp"
#include "vortex/forward.hpp"
#include "vortex/loss.hpp"
#include "vortex/model.hpp"
#include "vortex/phantom.hpp"

using namespace vortex;

namespace {

ComplexTensor noise(std::vector<std::size_t> shape, std::uint64_t seed) {
  ComplexTensor t(std::move(shape));
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  for (auto& z : t.storage()) z = {n(gen), n(gen)};
  return t;
}

ForwardOperator make_op(std::size_t coils, std::size_t n) {
  KeyedRng rng(1);
  return ForwardOperator(synthesize_maps(coils, n, n, rng),
                         make_poisson_disc_mask(n, n, 8.0, {6, 6}, 1));
}

void BM_Fft2c(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ComplexTensor x = noise({4, n, n}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fft2c(x));
}
BENCHMARK(BM_Fft2c)->Arg(32)->Arg(64)->Arg(128);

void BM_ForwardAdjoint(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ForwardOperator op = make_op(4, n);
  const ComplexTensor x = noise({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(adjoint_apply(op, forward_apply(op, x)));
}
BENCHMARK(BM_ForwardAdjoint)->Arg(32)->Arg(64);

void BM_PoissonMask(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(make_poisson_disc_mask(n, n, 8.0, {6, 6}, ++seed));
}
BENCHMARK(BM_PoissonMask)->Arg(32)->Arg(64);

void BM_UNetForward(benchmark::State& state) {
  const UNet net(ModelConfig{});
  const ModelParameters p = net.initialize(1);
  const ComplexTensor x = noise({32, 32}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(p, x, nullptr));
}
BENCHMARK(BM_UNetForward);

void BM_UNetForwardBackward(benchmark::State& state) {
  const UNet net(ModelConfig{});
  const ModelParameters p = net.initialize(1);
  const ComplexTensor x = noise({32, 32}, 3), target = noise({32, 32}, 4);
  std::vector<double> grad(p.size());
  for (auto _ : state) {
    ForwardTrace tr;
    const ComplexTensor out = net.forward(p, x, &tr);
    net.backward(p, tr, supervised_loss_grad(out, target), nullptr, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_UNetForwardBackward);

}  // namespace
BENCHMARK_MAIN();
