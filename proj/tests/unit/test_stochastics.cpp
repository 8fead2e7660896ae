#include <gtest/gtest.h>

#include <cmath>

#include "berthsim/error.hpp"
#include "berthsim/stochastics.hpp"

using namespace berthsim;

TEST(Sample, ConstantIgnoresStream) {
  auto s1 = derive_stream(1, "a");
  auto s2 = derive_stream(99, "b");
  auto d = Distribution::constant(30);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(sample(d, s1), 30.0);
    EXPECT_EQ(sample(d, s2), 30.0);
  }
}

TEST(Sample, EveryKindConsumesOneDraw) {
  std::vector<Distribution> ds{Distribution::constant(1), Distribution::uniform(0, 1),
                               Distribution::triangular(0, 1, 2), Distribution::exponential(2),
                               Distribution::bernoulli(0.5), Distribution::discrete({{1, 1}, {2, 3}})};
  for (const auto& d : ds) {
    auto s = derive_stream(5, "x");
    sample(d, s);
    EXPECT_EQ(s.draw_count(), 1u) << d.to_string();
  }
}

TEST(Sample, BernoulliFrequency) {
  auto s = derive_stream(42, "bern");
  auto d = Distribution::bernoulli(0.3);
  int hits = 0;
  for (int i = 0; i < 10'000; ++i) hits += sample(d, s) == 1.0;
  EXPECT_NEAR(hits / 10'000.0, 0.3, 0.02);
}

TEST(Sample, TriangularMeanAndSupport) {
  auto s = derive_stream(42, "tri");
  auto d = Distribution::triangular(2, 3, 4);
  double sum = 0;
  for (int i = 0; i < 10'000; ++i) {
    double x = sample(d, s);
    ASSERT_GE(x, 2.0);
    ASSERT_LE(x, 4.0);
    sum += x;
  }
  EXPECT_NEAR(sum / 10'000, 3.0, 0.05);
}

TEST(Sample, UniformAndExponentialMeans) {
  auto s = derive_stream(3, "ue");
  double su = 0, se = 0;
  for (int i = 0; i < 20'000; ++i) {
    double u = sample(Distribution::uniform(1, 5), s);
    ASSERT_GE(u, 1.0);
    ASSERT_LT(u, 5.0);
    su += u;
    double e = sample(Distribution::exponential(2), s);
    ASSERT_GE(e, 0.0);
    se += e;
  }
  EXPECT_NEAR(su / 20'000, 3.0, 0.05);
  EXPECT_NEAR(se / 20'000, 2.0, 0.06);
}

TEST(Sample, DiscreteWeights) {
  auto s = derive_stream(4, "disc");
  auto d = Distribution::discrete({{10, 1}, {20, 3}});
  int twenty = 0;
  for (int i = 0; i < 10'000; ++i) {
    double x = sample(d, s);
    ASSERT_TRUE(x == 10 || x == 20);
    twenty += x == 20;
  }
  EXPECT_NEAR(twenty / 10'000.0, 0.75, 0.02);
}

TEST(Sample, InvalidParamsThrow) {
  auto s = derive_stream(1, "bad");
  for (const auto& d : {Distribution::triangular(4, 3, 5), Distribution::uniform(2, 1), Distribution::exponential(-1),
                        Distribution::bernoulli(1.5), Distribution::discrete({{1, -1}})}) {
    EXPECT_TRUE(d.check().has_value()) << d.to_string();
    try {
      sample(d, s);
      FAIL() << d.to_string();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidParams);
    }
  }
}

TEST(Streams, SameNameSameDraws) {
  auto a = derive_stream(42, "task.1");
  auto b = derive_stream(42, "task.1");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Streams, DifferentNameOrSeedDiffers) {
  EXPECT_NE(derive_stream(42, "task.1").next_u64(), derive_stream(42, "task.2").next_u64());
  EXPECT_NE(derive_stream(42, "x").next_u64(), derive_stream(43, "x").next_u64());
}

TEST(Streams, UniformInUnitInterval) {
  auto s = derive_stream(0, "");
  for (int i = 0; i < 100'000; ++i) {
    double u = s.next_uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Literals, ParseAndPrint) {
  EXPECT_EQ(parse_distribution("const(30)"), Distribution::constant(30));
  EXPECT_EQ(parse_distribution("tri(0.9,1,1.1)"), Distribution::triangular(0.9, 1, 1.1));
  EXPECT_EQ(parse_distribution("uniform(1,2)"), Distribution::uniform(1, 2));
  EXPECT_EQ(parse_distribution("exp(4)"), Distribution::exponential(4));
  EXPECT_EQ(parse_distribution("bern(0.3)"), Distribution::bernoulli(0.3));
  EXPECT_EQ(parse_distribution("disc(1:0.5,2:0.5)"), Distribution::discrete({{1, 0.5}, {2, 0.5}}));
  for (const char* text : {"const(3.25)", "tri(2,3,4)", "disc(1:1,7:3)", "exp(0.1)"})
    EXPECT_EQ(parse_distribution(text).to_string(), text);
  EXPECT_THROW(parse_distribution("gauss(1,2)"), Error);
  EXPECT_THROW(parse_distribution("const(1,2)"), Error);
  EXPECT_THROW(parse_distribution("const("), Error);
}

TEST(Distribution, MeansAndRescale) {
  EXPECT_DOUBLE_EQ(Distribution::triangular(2, 3, 7).mean(), 4.0);
  EXPECT_DOUBLE_EQ(Distribution::uniform(1, 3).mean(), 2.0);
  EXPECT_DOUBLE_EQ(Distribution::bernoulli(0.2).mean(), 0.2);
  EXPECT_DOUBLE_EQ(Distribution::discrete({{2, 1}, {4, 1}}).mean(), 3.0);
  auto t = Distribution::triangular(0.9, 1, 1.1).scaled_to_mean(5);
  EXPECT_NEAR(t.mean(), 5, 1e-12);
  EXPECT_NEAR(t.lower(), 4.5, 1e-12);
  EXPECT_EQ(Distribution::constant(2).scaled_to_mean(3), Distribution::constant(3));
  EXPECT_THROW(Distribution::bernoulli(0.5).scaled_to_mean(0.2), Error);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(3.25), "3.25");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(30), "30");
  for (double v : {1.0 / 3, 193.38, 1e-9, 773422.0}) EXPECT_EQ(std::stod(format_number(v)), v);
}
