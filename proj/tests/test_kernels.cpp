#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "magsamp/kernels.hpp"
#include "oracles/brute.hpp"

using namespace magsamp;

namespace {
const MagRange kStd{};
}

TEST(MagRange, DefaultIsStandardInterval) {
  EXPECT_DOUBLE_EQ(kStd.a, 0.25);
  EXPECT_DOUBLE_EQ(kStd.b, 2.0);
  EXPECT_THROW(MagRange(0.0, 1.0), DomainError);
  EXPECT_THROW(MagRange(1.0, 1.0), DomainError);
  EXPECT_THROW(MagRange(2.0, 1.0), DomainError);
}

TEST(EvalKernel, WorkedValues) {
  const auto info = KernelSpec::info_overlap();
  const auto abs = KernelSpec::abs_distance();
  EXPECT_DOUBLE_EQ(eval_kernel(info, 0.7, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(eval_kernel(info, 0.5, 1.0), 0.25);
  EXPECT_NEAR(eval_kernel(abs, 0.25, 2.0), 1.0 / 2.75, 1e-15);
  EXPECT_NEAR(eval_kernel(abs, 0.25, 2.0), 0.363636, 1e-6);
}

TEST(EvalKernel, RejectsNonPositiveArguments) {
  const auto info = KernelSpec::info_overlap();
  EXPECT_THROW(eval_kernel(info, 0.0, 1.0), DomainError);
  EXPECT_THROW(eval_kernel(info, 1.0, -0.5), DomainError);
  EXPECT_THROW(eval_kernel(KernelSpec::abs_distance(), -1.0, 1.0), DomainError);
}

TEST(EvalKernel, CustomOutsideTableIsRangeError) {
  auto k = KernelSpec::from_distance_profile([](double d) { return std::exp(-d); }, kStd, 11);
  EXPECT_THROW(eval_kernel(k, 0.1, 1.0), RangeError);
  EXPECT_THROW(eval_kernel(k, 1.0, 2.5), RangeError);
  EXPECT_NO_THROW(eval_kernel(k, 0.25, 2.0));
}

TEST(EvalKernel, CustomBilinearInterpolation) {
  // K = x + 2y is reproduced exactly by bilinear interpolation.
  std::vector<double> xs{0.5, 1.0, 2.0}, ys{0.5, 1.5};
  std::vector<double> v;
  for (double x : xs)
    for (double y : ys) v.push_back(x + 2 * y);
  auto k = KernelSpec::custom(xs, ys, v);
  EXPECT_NEAR(eval_kernel(k, 0.75, 1.0), 0.75 + 2.0, 1e-14);
  EXPECT_NEAR(eval_kernel(k, 1.7, 0.6), 1.7 + 1.2, 1e-14);
  EXPECT_DOUBLE_EQ(eval_kernel(k, 2.0, 1.5), 5.0);
}

TEST(KernelProperties, SymmetryAndBounds) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.25, 2.0);
  for (const auto& k : {KernelSpec::info_overlap(), KernelSpec::abs_distance()}) {
    for (int i = 0; i < 2000; ++i) {
      const double x = u(gen), y = u(gen);
      const double kxy = eval_kernel(k, x, y);
      EXPECT_EQ(kxy, eval_kernel(k, y, x));
      EXPECT_GT(kxy, 0.0);
      if (x != y) {
        EXPECT_LT(kxy, 1.0);
      }
      EXPECT_EQ(eval_kernel(k, x, x), 1.0);
    }
  }
}

TEST(TransferPotential, ClosedFormValues) {
  const auto info = KernelSpec::info_overlap();
  const auto abs = KernelSpec::abs_distance();
  // frozen from mpmath quadrature
  EXPECT_NEAR(transfer_potential(info, kStd, 0.25), 0.21875, 1e-12);
  EXPECT_NEAR(transfer_potential(info, kStd, 1.125), 0.8630722736625514, 1e-12);
  EXPECT_NEAR(transfer_potential(info, kStd, 0.5), 0.5208333333333333, 1e-12);
  EXPECT_NEAR(transfer_potential(info, kStd, 1.0), 0.828125, 1e-12);
  EXPECT_NEAR(transfer_potential(info, kStd, 2.0), 0.6653645833333333, 1e-12);
  EXPECT_NEAR(transfer_potential(abs, kStd, 1.125), 2.0 * std::log(1.875), 1e-12);
  EXPECT_NEAR(transfer_potential(abs, kStd, 1.125), 1.25722, 1e-5);
}

TEST(TransferPotential, OutsideRangeIsRangeError) {
  EXPECT_THROW(transfer_potential(KernelSpec::info_overlap(), kStd, 0.2), RangeError);
  EXPECT_THROW(transfer_potential(KernelSpec::abs_distance(), kStd, 2.0001), RangeError);
}

TEST(TransferPotential, ClosedFormMatchesQuadrature) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.25, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(gen);
    EXPECT_NEAR(transfer_potential(KernelSpec::info_overlap(), kStd, x),
                oracle::potential(oracle::k_info, 0.25, 2.0, x), 1e-6);
    EXPECT_NEAR(transfer_potential(KernelSpec::abs_distance(), kStd, x),
                oracle::potential(oracle::k_abs, 0.25, 2.0, x), 1e-6);
  }
}

TEST(TransferPotential, CustomTableUsesTrapezoid) {
  // Tabulated info kernel on a fine grid approximates the closed form.
  const std::size_t n = 801;
  auto axis = uniform_grid(0.25, 2.0, n);
  std::vector<double> v;
  for (double x : axis)
    for (double y : axis) v.push_back(oracle::k_info(x, y));
  auto k = KernelSpec::custom(axis, axis, v);
  for (double x : {0.25, 0.7, 1.125, 2.0})
    EXPECT_NEAR(transfer_potential(k, kStd, x), transfer_potential(KernelSpec::info_overlap(), kStd, x), 2e-5);
}

TEST(IntegratedPotential, MatchesCurveIntegral) {
  // ∫ K̄ over the range: 1.2760416666 (info), 2.0638050142 (abs), from mpmath.
  EXPECT_NEAR(integrated_potential(KernelSpec::info_overlap(), kStd, 0.25, 2.0), 1.2760416666666667, 1e-12);
  EXPECT_NEAR(integrated_potential(KernelSpec::abs_distance(), kStd, 0.25, 2.0), 2.0638050142316396, 1e-12);
}

TEST(TransferPotentialCurve, AbsArgmaxIsMidpoint) {
  auto c = transfer_potential_curve(KernelSpec::abs_distance(), kStd, 1001);
  EXPECT_NEAR(c.argmax_x, 1.125, 1e-12);
  EXPECT_EQ(c.xs.size(), 1001u);
  EXPECT_DOUBLE_EQ(c.xs.front(), 0.25);
  EXPECT_DOUBLE_EQ(c.xs.back(), 2.0);
  for (double v : c.values) EXPECT_GT(v, 0.0);
}

TEST(TransferPotentialCurve, InfoArgmaxOffCentre) {
  auto c = transfer_potential_curve(KernelSpec::info_overlap(), kStd, 1001);
  // stationary point of the closed form is 1.337685; the grid step is 0.00175
  EXPECT_NEAR(c.argmax_x, 1.338, 0.002);
  EXPECT_NEAR(c.max_value, 0.8859687632, 1e-6);
}

TEST(TransferPotentialCurve, EndpointOnlyGrid) {
  auto c = transfer_potential_curve(KernelSpec::info_overlap(), kStd, 2);
  ASSERT_EQ(c.values.size(), 2u);
  EXPECT_NEAR(c.values[0], 0.21875, 1e-12);
  EXPECT_NEAR(c.values[1], 0.6653645833333333, 1e-12);
  EXPECT_THROW(transfer_potential_curve(KernelSpec::info_overlap(), kStd, 1), ParameterError);
}

TEST(TransferPotentialCurve, TiesGoToSmallerX) {
  auto k = KernelSpec::custom({0.25, 2.0}, {0.25, 2.0}, {0.5, 0.5, 0.5, 0.5});
  auto c = transfer_potential_curve(k, kStd, 11);
  EXPECT_DOUBLE_EQ(c.argmax_x, 0.25);
}

TEST(TransferPotentialShape, DecreasingDistanceProfilesPeakAtMidpoint) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> c(0.3, 4.0), p(0.5, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double scale = c(gen), power = p(gen);
    auto k = KernelSpec::from_distance_profile([&](double d) { return std::exp(-scale * std::pow(d, power)); }, kStd,
                                               1001);
    auto curve = transfer_potential_curve(k, kStd, 1001);
    EXPECT_NEAR(curve.argmax_x, 1.125, 1e-12) << "scale " << scale << " power " << power;
    auto mn = std::min_element(curve.values.begin(), curve.values.end()) - curve.values.begin();
    EXPECT_TRUE(mn == 0 || mn == 1000);
  }
}

TEST(KernelSelector, ParsesBuiltinsAndRejectsUnknown) {
  EXPECT_EQ(KernelSpec::parse("abs").kind(), KernelKind::AbsDistance);
  EXPECT_EQ(KernelSpec::parse("info").kind(), KernelKind::InfoOverlap);
  EXPECT_THROW(KernelSpec::parse("gauss"), UsageError);
  try {
    KernelSpec::parse("custom:/nonexistent/kernel.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/kernel.csv"), std::string::npos);
  }
}

TEST(KernelSelector, LoadsCsvGrid) {
  const std::string path = ::testing::TempDir() + "kernel_grid.csv";
  {
    std::ofstream f(path);
    f << "x,y,value\n";
    for (double x : {0.25, 1.0, 2.0})
      for (double y : {2.0, 0.25, 1.0}) f << x << ',' << y << ',' << oracle::k_info(x, y) << '\n';
  }
  auto k = KernelSpec::parse("custom:" + path);
  EXPECT_EQ(k.kind(), KernelKind::CustomTabulated);
  EXPECT_DOUBLE_EQ(eval_kernel(k, 1.0, 0.25), 0.0625);
  EXPECT_DOUBLE_EQ(eval_kernel(k, 2.0, 2.0), 1.0);

  {
    std::ofstream f(path);
    f << "x,y,value\n0.25,0.25,1\n0.25,2,0.5\n2,0.25,0.5\n";
  }
  EXPECT_THROW(KernelSpec::load_csv(path), ParseError);
  std::remove(path.c_str());
}
