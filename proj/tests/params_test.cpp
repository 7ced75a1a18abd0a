#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "robust_affine/error.hpp"
#include "robust_affine/params.hpp"

using namespace robust_affine;

namespace {

ParameterBox box(Interval b0, Interval b1, Interval a0 = {0, 0}, Interval a1 = {0, 0}) {
  return ParameterBox(b0, b1, a0, a1);
}

Error::Kind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return Error::Kind::InvalidArgument;
}

}  // namespace

TEST(ParameterBox, RejectsInvertedOrNegativeVariance) {
  EXPECT_EQ(kind_of([] { box({0.02, 0.01}, {0, 0}); }), Error::Kind::InvalidBox);
  EXPECT_EQ(kind_of([] { box({0, 0}, {0, 0}, {-0.01, 0.0}); }), Error::Kind::InvalidBox);
  EXPECT_EQ(kind_of([] { box({0, 0}, {0, 0}, {0, 0}, {-1e-3, 0.0}); }), Error::Kind::InvalidBox);
}

TEST(DriftInterval, PositiveState) {
  const auto iv = drift_interval(box({0.01, 0.02}, {-0.3, -0.1}), 1.0);
  EXPECT_NEAR(iv.lower, -0.29, 1e-15);
  EXPECT_NEAR(iv.upper, -0.08, 1e-15);
}

TEST(DriftInterval, NegativeStateFlipsSlopeEndpoint) {
  const auto iv = drift_interval(box({0.01, 0.02}, {-0.3, -0.1}), -1.0);
  EXPECT_NEAR(iv.lower, 0.11, 1e-15);
  EXPECT_NEAR(iv.upper, 0.32, 1e-15);
}

TEST(DriftInterval, ZeroBox) {
  const auto iv = drift_interval(ParameterBox::point(0, 0, 0, 0), 7.0);
  EXPECT_EQ(iv.lower, 0.0);
  EXPECT_EQ(iv.upper, 0.0);
}

TEST(DiffusionInterval, PositiveAndTruncatedState) {
  const auto b = box({0, 0}, {0, 0}, {0.01, 0.04}, {0.0, 0.02});
  auto iv = diffusion_interval(b, 2.0);
  EXPECT_NEAR(iv.lower, 0.01, 1e-15);
  EXPECT_NEAR(iv.upper, 0.08, 1e-15);
  iv = diffusion_interval(b, -2.0);
  EXPECT_EQ(iv.lower, 0.01);
  EXPECT_EQ(iv.upper, 0.04);
  iv = diffusion_interval(ParameterBox::point(0, 0, 0, 0), 3.0);
  EXPECT_EQ(iv.lower, 0.0);
  EXPECT_EQ(iv.upper, 0.0);
}

TEST(IsProper, BothBranches) {
  EXPECT_TRUE(is_proper(box({0.02, 0.04}, {-0.3, -0.3}, {0.01, 0.02})));
  EXPECT_TRUE(is_proper(box({0.05, 0.06}, {-0.3, -0.3}, {0, 0}, {0.0, 0.08})));
  EXPECT_FALSE(is_proper(box({0.01, 0.06}, {-0.3, -0.3}, {0, 0}, {0.0, 0.08})));
}

TEST(ExtremalCoefficients, UpperEndpoints) {
  const auto c = extremal_coefficients(box({0.01, 0.04}, {-0.3, -0.3}, {0.01, 0.02}), 0.05);
  EXPECT_NEAR(c.drift, 0.025, 1e-15);
  EXPECT_EQ(c.variance, 0.02);

  const auto z = extremal_coefficients(ParameterBox::point(0, 0, 0, 0), 1.0);
  EXPECT_EQ(z.drift, 0.0);
  EXPECT_EQ(z.variance, 0.0);

  const auto neg = extremal_coefficients(box({0.01, 0.04}, {-0.3, -0.1}), -1.0);
  EXPECT_NEAR(neg.drift, 0.04 + 0.3, 1e-15);
}

TEST(WorstCaseCoefficients, LowerDriftUpperVariance) {
  const auto b = box({0.01, 0.04}, {-0.5, -0.3}, {0.0, 0.0}, {0.01, 0.02});
  const auto c = worst_case_coefficients(b, 0.1);
  EXPECT_NEAR(c.drift, 0.01 - 0.05, 1e-15);
  EXPECT_NEAR(c.variance, 0.002, 1e-15);
  EXPECT_EQ(worst_case_slope(b, StateSpace::NonNegative), -0.5);
}

TEST(UpperSlope, Cases) {
  EXPECT_EQ(upper_slope(box({0, 0}, {-0.4, -0.2}), StateSpace::NonNegative), -0.2);
  EXPECT_EQ(upper_slope(box({0, 0}, {-0.3, -0.3}), StateSpace::RealLine), -0.3);
  EXPECT_EQ(kind_of([] { upper_slope(box({0, 0}, {-0.3, -0.1}), StateSpace::RealLine); }),
            Error::Kind::NotConstantSlope);
  EXPECT_EQ(kind_of([] { worst_case_slope(box({0, 0}, {-0.3, -0.1}), StateSpace::RealLine); }),
            Error::Kind::NotConstantSlope);
}

TEST(CornerGrid, DegenerateBoxGivesOnePoint) {
  const auto g = corner_grid(ParameterBox::point(0.1, -0.2, 0.3, 0.0), 5);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0], (CornerParameter{0.1, -0.2, 0.3, 0.0}));
}

TEST(CornerGrid, ResolutionTwoGivesExtremePoints) {
  const auto g = corner_grid(box({0.01, 0.02}, {-0.3, -0.1}), 2);
  ASSERT_EQ(g.size(), 4u);
  for (const auto& c : g) {
    EXPECT_TRUE(c.b0 == 0.01 || c.b0 == 0.02);
    EXPECT_TRUE(c.b1 == -0.3 || c.b1 == -0.1);
  }
}

TEST(CornerGrid, EqualSpacing) {
  const auto g = corner_grid(box({0, 1}, {0, 0}), 3);
  ASSERT_EQ(g.size(), 3u);
  std::vector<double> v;
  for (const auto& c : g) v.push_back(c.b0);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(kind_of([] { corner_grid(box({0, 1}, {0, 0}), 1); }), Error::Kind::InvalidArgument);
}

TEST(CornerGrid, AllPointsInsideBox) {
  const auto b = box({0.013, 0.041}, {-0.7, -0.1}, {0.003, 0.019}, {0.0, 0.07});
  for (int res : {2, 3, 7}) {
    const auto g = corner_grid(b, res);
    EXPECT_EQ(g.size(), static_cast<std::size_t>(res * res * res * res));
    for (const auto& c : g) EXPECT_TRUE(contains(b, c));
  }
}

// Any model inside the box has drift and variance inside the state intervals.
TEST(Intervals, RandomModelsStayInside) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto b = box({-0.02, 0.05}, {-0.9, 0.2}, {0.0, 0.03}, {0.01, 0.1});
  for (int i = 0; i < 2000; ++i) {
    const CornerParameter th{-0.02 + 0.07 * u(rng), -0.9 + 1.1 * u(rng), 0.03 * u(rng), 0.01 + 0.09 * u(rng)};
    const double x = -3.0 + 6.0 * u(rng);
    const auto d = drift_interval(b, x);
    const auto v = diffusion_interval(b, x);
    const double drift = th.b0 + th.b1 * x;
    const double var = th.a0 + th.a1 * std::max(x, 0.0);
    EXPECT_LE(d.lower, drift + 1e-15);
    EXPECT_GE(d.upper, drift - 1e-15);
    EXPECT_LE(v.lower, var + 1e-15);
    EXPECT_GE(v.upper, var - 1e-15);
    const auto w = worst_case_coefficients(b, x);
    EXPECT_EQ(w.drift, d.lower);
    EXPECT_EQ(w.variance, v.upper);
  }
}

TEST(StateSpace, ParseAndMembership) {
  EXPECT_EQ(parse_state_space("real_line"), StateSpace::RealLine);
  EXPECT_EQ(parse_state_space("nonnegative"), StateSpace::NonNegative);
  EXPECT_EQ(parse_state_space("positive"), StateSpace::Positive);
  EXPECT_EQ(kind_of([] { parse_state_space("complex"); }), Error::Kind::InvalidArgument);
  for (auto s : {StateSpace::RealLine, StateSpace::NonNegative, StateSpace::Positive}) {
    EXPECT_EQ(parse_state_space(to_string(s)), s);
  }
  EXPECT_TRUE(in_state_space(StateSpace::RealLine, -1.0));
  EXPECT_TRUE(in_state_space(StateSpace::NonNegative, 0.0));
  EXPECT_FALSE(in_state_space(StateSpace::Positive, 0.0));
}
