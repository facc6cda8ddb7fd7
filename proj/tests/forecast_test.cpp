#include "propscore/forecast.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "propscore/random.hpp"

namespace propscore {
namespace {

VectorX<double> vec(std::initializer_list<double> xs) {
  VectorX<double> v(static_cast<Index>(xs.size()));
  std::copy(xs.begin(), xs.end(), v.begin());
  return v;
}

void expect_atoms(const DiscreteForecastd& f, std::initializer_list<double> points,
                  std::initializer_list<double> probs, double tol = 1e-12) {
  ASSERT_EQ(f.size(), static_cast<Index>(points.size()));
  Index j = 0;
  for (double x : points) EXPECT_NEAR(f.points()(j++), x, tol);
  j = 0;
  for (double p : probs) EXPECT_NEAR(f.probs()(j++), p, tol);
}

TEST(HistogramToDiscrete, SingleBinCenter) {
  expect_atoms(histogram_to_discrete(HistogramForecastd(vec({0, 1}), vec({1}))), {0.5}, {1.0});
}

TEST(HistogramToDiscrete, SymmetricBins) {
  expect_atoms(histogram_to_discrete(HistogramForecastd(vec({0, 1, 2}), vec({0.5, 0.5}))), {0.5, 1.5}, {0.5, 0.5});
}

TEST(HistogramToDiscrete, DropsEmptyBins) {
  const auto f = histogram_to_discrete(HistogramForecastd(vec({0, 1, 2, 3}), vec({0.2, 0, 0.8})));
  expect_atoms(f, {0.5, 2.5}, {0.2, 0.8});
  EXPECT_NEAR(f.probs().sum(), 1.0, 1e-15);
}

TEST(HistogramForecast, RejectsBadInput) {
  EXPECT_THROW(HistogramForecastd(vec({0, 1}), vec({0.5, 0.5})), Error);
  EXPECT_THROW(HistogramForecastd(vec({0, 0, 1}), vec({0.5, 0.5})), Error);
  EXPECT_THROW(HistogramForecastd(vec({0, 1, 2}), vec({-0.1, 1.1})), Error);
  EXPECT_THROW(HistogramForecastd(vec({0, 1}), vec({0})), Error);
}

TEST(HistogramForecast, NormalizesAndKeepsRawMass) {
  HistogramForecastd h(vec({0, 1, 2}), vec({1, 3}));
  EXPECT_DOUBLE_EQ(h.raw_mass(), 4.0);
  EXPECT_DOUBLE_EQ(h.probs()(0), 0.25);
}

TEST(HistogramForecast, BinMembership) {
  HistogramForecastd h(vec({0, 1, 2}), vec({0.5, 0.5}));
  EXPECT_EQ(h.bin_of(0.0), 0);
  EXPECT_EQ(h.bin_of(0.999), 0);
  EXPECT_EQ(h.bin_of(1.0), 1);
  EXPECT_EQ(h.bin_of(2.0), 1);
  EXPECT_EQ(h.bin_of(2.0001), -1);
  EXPECT_EQ(h.bin_of(-0.1), -1);
}

TEST(QuantilesToDiscrete, SingleQuantileCarriesAllMass) {
  expect_atoms(quantiles_to_discrete(QuantileForecastd(vec({0.5}), vec({3.0}))), {3.0}, {1.0});
}

TEST(QuantilesToDiscrete, MidpointPartitionOfTwoLevels) {
  expect_atoms(quantiles_to_discrete(QuantileForecastd(vec({0.25, 0.75}), vec({0, 1}))), {0, 1}, {0.5, 0.5});
}

TEST(QuantilesToDiscrete, NineUniformLevels) {
  VectorX<double> levels(9);
  VectorX<double> values(9);
  for (Index j = 0; j < 9; ++j) {
    levels(j) = 0.1 * static_cast<double>(j + 1);
    values(j) = static_cast<double>(j);
  }
  const auto f = quantiles_to_discrete(QuantileForecastd(levels, values));
  ASSERT_EQ(f.size(), 9);
  EXPECT_NEAR(f.probs()(0), 0.15, 1e-12);
  EXPECT_NEAR(f.probs()(8), 0.15, 1e-12);
  for (Index j = 1; j < 8; ++j) EXPECT_NEAR(f.probs()(j), 0.1, 1e-12);
  EXPECT_NEAR(f.probs().sum(), 1.0, 1e-12);
}

TEST(QuantilesToDiscrete, MergesEqualValues) {
  const auto f = quantiles_to_discrete(QuantileForecastd(vec({0.25, 0.5, 0.75}), vec({1, 1, 2})));
  expect_atoms(f, {1, 2}, {0.625, 0.375});
}

TEST(QuantileForecast, RepairsCrossingByRearrangement) {
  QuantileForecastd q(vec({0.1, 0.5, 0.9}), vec({2, 1, 3}));
  EXPECT_EQ(q.crossings(), 1);
  EXPECT_EQ(q.values()(0), 1);
  EXPECT_EQ(q.values()(1), 2);
}

TEST(QuantileForecast, RejectsLevelsOutsideOpenUnitInterval) {
  EXPECT_THROW(QuantileForecastd(vec({0.0, 0.5}), vec({0, 1})), Error);
  EXPECT_THROW(QuantileForecastd(vec({0.5, 1.0}), vec({0, 1})), Error);
  EXPECT_THROW(QuantileForecastd(vec({0.6, 0.5}), vec({0, 1})), Error);
}

TEST(QuantilesToHistogram, RenormalizesInnerMass) {
  const auto h = quantiles_to_histogram(QuantileForecastd(vec({0.25, 0.75}), vec({0, 1})));
  ASSERT_EQ(h.bins(), 1);
  EXPECT_EQ(h.edges()(0), 0.0);
  EXPECT_EQ(h.edges()(1), 1.0);
  EXPECT_DOUBLE_EQ(h.probs()(0), 1.0);
}

TEST(QuantilesToHistogram, WidensZeroWidthBin) {
  const auto h = quantiles_to_histogram(QuantileForecastd(vec({1.0 / 3, 2.0 / 3}), vec({0, 0})));
  ASSERT_EQ(h.bins(), 1);
  EXPECT_DOUBLE_EQ(h.edges()(0), -1e-9);
  EXPECT_DOUBLE_EQ(h.edges()(1), 1e-9);
  EXPECT_DOUBLE_EQ(h.probs()(0), 1.0);
}

TEST(QuantilesToHistogram, InteriorRunBecomesNarrowBin) {
  const auto h = quantiles_to_histogram(QuantileForecastd(vec({0.2, 0.4, 0.6, 0.8}), vec({0, 1, 1, 2})));
  ASSERT_EQ(h.bins(), 3);
  EXPECT_DOUBLE_EQ(h.edges()(1), 1.0 - 1e-9);
  EXPECT_DOUBLE_EQ(h.edges()(2), 1.0 + 1e-9);
  for (Index k = 0; k < 3; ++k) EXPECT_NEAR(h.probs()(k), 1.0 / 3, 1e-12);
}

TEST(QuantilesToHistogram, SingleQuantileIsNotConvertible) {
  try {
    (void)quantiles_to_histogram(QuantileForecastd(vec({0.5}), vec({1})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConvertible);
  }
}

TEST(SamplesToDiscrete, Examples) {
  expect_atoms(samples_to_discrete(SampleForecastd(vec({2.0}))), {2.0}, {1.0});
  expect_atoms(samples_to_discrete(SampleForecastd(vec({1, 1, 3}))), {1, 3}, {2.0 / 3, 1.0 / 3});
  expect_atoms(samples_to_discrete(SampleForecastd(vec({3, 0, 2, 1}))), {0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
}

TEST(Cdf, StepFunctionExamples) {
  DiscreteForecastd f(vec({0, 1}), vec({0.5, 0.5}));
  EXPECT_EQ(cdf(f, -1.0), 0.0);
  EXPECT_EQ(cdf(f, 0.0), 0.5);
  EXPECT_EQ(cdf(f, 0.999), 0.5);
  EXPECT_EQ(cdf(f, 1.0), 1.0);
}

TEST(Quantile, GeneralizedInverseExamples) {
  DiscreteForecastd f(vec({0, 1}), vec({0.5, 0.5}));
  EXPECT_EQ(quantile(f, 0.25), 0.0);
  EXPECT_EQ(quantile(f, 0.5), 0.0);
  EXPECT_EQ(quantile(f, 0.75), 1.0);
  for (double bad : {0.0, 1.0, -0.1, 1.5}) {
    try {
      (void)quantile(f, bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidLevel);
    }
  }
}

TEST(Moments, Examples) {
  DiscreteForecastd f(vec({0, 1}), vec({0.5, 0.5}));
  EXPECT_DOUBLE_EQ(mean(f), 0.5);
  EXPECT_DOUBLE_EQ(variance(f), 0.25);
  EXPECT_DOUBLE_EQ(stddev(f), 0.5);
  const auto point = DiscreteForecastd::point_mass(3.0);
  EXPECT_DOUBLE_EQ(mean(point), 3.0);
  EXPECT_DOUBLE_EQ(variance(point), 0.0);
  DiscreteForecastd sym(vec({-1, 1}), vec({0.5, 0.5}));
  EXPECT_DOUBLE_EQ(mean(sym), 0.0);
  EXPECT_DOUBLE_EQ(stddev(sym), 1.0);
}

TEST(Moments, FloatScalar) {
  using Vf = VectorX<float>;
  Vf x(2), p(2);
  x << 0.0f, 1.0f;
  p << 0.5f, 0.5f;
  DiscreteForecast<float> f(x, p);
  EXPECT_FLOAT_EQ(mean(f), 0.5f);
  EXPECT_FLOAT_EQ(cdf(f, 0.0f), 0.5f);
}

// Properties over random forecasts.

DiscreteForecastd to_forecast(const oracle::Atoms& a) {
  return DiscreteForecastd::from_atoms(std::span<const double>(a.x), std::span<const double>(a.p));
}

TEST(CdfProperty, MonotoneRightContinuousAndBounded) {
  CounterRng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto atoms = oracle::random_atoms(rng, 30);
    const auto f = to_forecast(atoms);
    EXPECT_EQ(cdf(f, f.min() - 1e-9), 0.0);
    EXPECT_NEAR(cdf(f, f.max()), 1.0, 1e-12);
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double t = f.min() - 1.0 + (f.max() - f.min() + 2.0) * i / 49.0;
      const double c = cdf(f, t);
      EXPECT_GE(c, prev);
      EXPECT_NEAR(c, oracle::step_cdf(atoms, t), 1e-12);
      prev = c;
    }
    for (Index j = 0; j < f.size(); ++j) EXPECT_NEAR(cdf(f, f.points()(j)), oracle::step_cdf(atoms, f.points()(j)), 1e-12);
  }
}

TEST(QuantileProperty, MatchesBruteForceInverse) {
  CounterRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = to_forecast(oracle::random_atoms(rng, 20));
    for (int i = 1; i < 100; ++i) {
      const double tau = i / 100.0;
      double expected = f.max();
      for (Index j = 0; j < f.size(); ++j) {
        if (cdf(f, f.points()(j)) >= tau) {
          expected = f.points()(j);
          break;
        }
      }
      EXPECT_EQ(quantile(f, tau), expected);
    }
  }
}

TEST(ConversionProperty, MassPreservedAndHistogramMeanKept) {
  CounterRng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int bins = 1 + static_cast<int>(rng.below(15));
    VectorX<double> edges(bins + 1);
    VectorX<double> probs(bins);
    edges(0) = rng.uniform(-5, 5);
    for (int k = 0; k < bins; ++k) {
      edges(k + 1) = edges(k) + rng.uniform(0.1, 2.0);
      probs(k) = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    }
    if (probs.sum() == 0.0) probs(0) = 1.0;
    HistogramForecastd h(edges, probs);
    const auto f = histogram_to_discrete(h);
    EXPECT_NEAR(f.probs().sum(), 1.0, 1e-9);
    double hist_mean = 0.0;
    for (int k = 0; k < bins; ++k) hist_mean += h.probs()(k) * 0.5 * (edges(k) + edges(k + 1));
    EXPECT_NEAR(mean(f), hist_mean, 1e-12 * (1 + std::abs(hist_mean)));

    const int m = 1 + static_cast<int>(rng.below(20));
    VectorX<double> levels(m);
    VectorX<double> values(m);
    for (int j = 0; j < m; ++j) {
      levels(j) = (j + rng.uniform(0.1, 0.9)) / m;
      values(j) = std::round(rng.uniform(-3, 3) * 2) / 2;  // ties and crossings
    }
    QuantileForecastd q(levels, values);
    const auto qd = quantiles_to_discrete(q);
    EXPECT_NEAR(qd.probs().sum(), 1.0, 1e-9);
    EXPECT_TRUE((qd.probs().array() > 0).all());
    if (m >= 2) EXPECT_NEAR(quantiles_to_histogram(q).probs().sum(), 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace propscore
