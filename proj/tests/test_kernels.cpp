#include <gtest/gtest.h>
#include <omp.h>

#include <cstdlib>
#include <numeric>

#include "dfbench/kernels.hpp"
#include "support.hpp"

using namespace dfbench;
namespace par = dfbench::kernels::parallel;
namespace ref = dfbench::kernels::reference;

namespace {

int max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  EXPECT_TRUE(a.same_shape(b));
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(int(a.data()[i]) - int(b.data()[i])));
  return d;
}

class ThreadCount {
 public:
  explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

const ImageBuffer& sample_image() {
  static const ImageBuffer img = dfbench::testing::natural_image(67, 45, 11);
  return img;
}

}  // namespace

TEST(GaussianKernel, SumsToOneWithRadiusThreeSigma) {
  for (double s : {0.3, 1.0, 2.5, 10.0}) {
    const auto k = kernels::gaussian_kernel(s);
    EXPECT_EQ(k.size(), 2 * static_cast<std::size_t>(std::ceil(3 * s)) + 1);
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-9);
  }
  EXPECT_EQ(kernels::gaussian_kernel(0.0), std::vector<double>{1.0});
}

TEST(ParallelVsReference, NoiseKernelsAreBitIdentical) {
  const RngStream rng(17, "noise");
  const auto& img = sample_image();
  EXPECT_EQ(par::gaussian_noise(img, 12.0, rng), ref::gaussian_noise(img, 12.0, rng));
  EXPECT_EQ(par::speckle_noise(img, 0.2, rng), ref::speckle_noise(img, 0.2, rng));
  EXPECT_EQ(par::poisson_noise(img, 0.7, rng), ref::poisson_noise(img, 0.7, rng));
  EXPECT_EQ(par::salt_pepper(img, 0.1, rng), ref::salt_pepper(img, 0.1, rng));
}

TEST(ParallelVsReference, PointwiseKernelsAreBitIdentical) {
  const auto& img = sample_image();
  EXPECT_EQ(par::color_contrast(img, -12.5, 1.3), ref::color_contrast(img, -12.5, 1.3));
  EXPECT_EQ(par::grayscale(img), ref::grayscale(img));
  EXPECT_EQ(par::pixelate(img, 7), ref::pixelate(img, 7));
  EXPECT_EQ(par::self_overlay(img, 2.7, 0.3, 40, 21), ref::self_overlay(img, 2.7, 0.3, 40, 21));
}

TEST(ParallelVsReference, SeparableBlurWithinOneLevel) {
  const auto& img = sample_image();
  for (double s : {0.5, 1.7, 4.0}) EXPECT_LE(max_abs_diff(par::gaussian_blur(img, s), ref::gaussian_blur(img, s)), 1);
}

TEST(ParallelVsReference, SeparableResampleWithinOneLevel) {
  const auto& img = sample_image();
  for (Interp m : {Interp::nearest, Interp::bilinear, Interp::bicubic}) {
    for (double f : {0.25, 0.5, 0.83}) {
      EXPECT_LE(max_abs_diff(par::resize_round_trip(img, f, m), ref::resize_round_trip(img, f, m)), 1)
          << interp_name(m) << " " << f;
    }
  }
}

TEST(ThreadIndependence, OutputsMatchAcrossThreadCounts) {
  const RngStream rng(23, "threads");
  const auto& img = sample_image();
  auto run = [&] {
    return std::vector<ImageBuffer>{par::gaussian_noise(img, 20, rng), par::poisson_noise(img, 1.5, rng),
                                    par::speckle_noise(img, 0.1, rng),  par::salt_pepper(img, 0.05, rng),
                                    par::gaussian_blur(img, 2.0),       par::resize_round_trip(img, 0.4, Interp::bicubic),
                                    par::self_overlay(img, 3.0, 0.2, 10, 50)};
  };
  std::vector<ImageBuffer> one, four;
  {
    ThreadCount t(1);
    one = run();
  }
  {
    ThreadCount t(4);
    four = run();
  }
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i], four[i]) << i;
}

TEST(Blur, ConstantImageIsFixedPoint) {
  const ImageBuffer img(40, 30, 3, 173);
  EXPECT_EQ(par::gaussian_blur(img, 3.3), img);
  EXPECT_EQ(ref::gaussian_blur(img, 3.3), img);
}

TEST(Resample, IdentitySizeIsIdentity) {
  const auto& img = sample_image();
  for (Interp m : {Interp::nearest, Interp::bilinear, Interp::bicubic}) {
    const auto r = par::resample(kernels::to_raster(img), img.width(), img.height(), m);
    EXPECT_EQ(r.data, img.bytes()) << interp_name(m);
  }
}

TEST(Resample, ConstantStaysConstant) {
  const ImageBuffer img(50, 50, 1, 90);
  for (Interp m : {Interp::nearest, Interp::bilinear, Interp::bicubic}) {
    const auto r = par::resample(kernels::to_raster(img), 13, 21, m);
    for (auto v : r.data) ASSERT_EQ(v, 90);
  }
}

TEST(Overlay, ExtentRoundsScaledSide) {
  EXPECT_EQ(kernels::overlay_extent(100, 2.0), 200);
  EXPECT_EQ(kernels::overlay_extent(45, 2.5), 113);
}
