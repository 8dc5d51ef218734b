#include <benchmark/benchmark.h>

#include <cmath>

#include "dfbench/kernels.hpp"
#include "dfbench/metrics.hpp"

using namespace dfbench;
namespace par = dfbench::kernels::parallel;
namespace ref = dfbench::kernels::reference;

namespace {

ImageBuffer test_image(int side) {
  ImageBuffer img(side, side, 3);
  RngStream rng(1, "bench");
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_sample(128 + 60 * std::sin(0.05 * x + c) + rng.normal(0, 4));
  return img;
}

template <auto Fn>
void run_image_kernel(benchmark::State& state) {
  const auto img = test_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(img));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

ImageBuffer par_noise(const ImageBuffer& img) { return par::gaussian_noise(img, 20.0, RngStream(3, "noise")); }
ImageBuffer ref_noise(const ImageBuffer& img) { return ref::gaussian_noise(img, 20.0, RngStream(3, "noise")); }
ImageBuffer par_blur(const ImageBuffer& img) { return par::gaussian_blur(img, 2.5); }
ImageBuffer ref_blur(const ImageBuffer& img) { return ref::gaussian_blur(img, 2.5); }
ImageBuffer par_resize(const ImageBuffer& img) { return par::resize_round_trip(img, 0.5, Interp::bicubic); }
ImageBuffer ref_resize(const ImageBuffer& img) { return ref::resize_round_trip(img, 0.5, Interp::bicubic); }
ImageBuffer par_overlay(const ImageBuffer& img) { return par::self_overlay(img, 2.0, 0.3, 16, 16); }
ImageBuffer ref_overlay(const ImageBuffer& img) { return ref::self_overlay(img, 2.0, 0.3, 16, 16); }

void BM_Auc(benchmark::State& state) {
  RngStream rng(4, "auc");
  LabeledScores items;
  for (std::int64_t i = 0; i < state.range(0); ++i) items.push_back({"", rng.uniform(), static_cast<int>(i % 2), {}});
  for (auto _ : state) benchmark::DoNotOptimize(auc(items));
}

void BM_Bootstrap(benchmark::State& state) {
  RngStream rng(5, "boot");
  LabeledScores items;
  for (int i = 0; i < 1000; ++i) items.push_back({"", rng.normal(i % 2 ? 0.8 : 0.0, 1.0), i % 2, {}});
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(items, static_cast<int>(state.range(0)), 0.95, 6));
}

}  // namespace

BENCHMARK(run_image_kernel<par_noise>)->Name("GaussianNoise/parallel")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<ref_noise>)->Name("GaussianNoise/reference")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<par_blur>)->Name("GaussianBlur/parallel")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<ref_blur>)->Name("GaussianBlur/reference")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<par_resize>)->Name("ResizeRoundTrip/parallel")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<ref_resize>)->Name("ResizeRoundTrip/reference")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<par_overlay>)->Name("SelfOverlay/parallel")->Arg(256)->Arg(512);
BENCHMARK(run_image_kernel<ref_overlay>)->Name("SelfOverlay/reference")->Arg(256)->Arg(512);
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);
BENCHMARK(BM_Bootstrap)->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
