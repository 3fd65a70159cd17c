#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "recode/harness.hpp"

namespace recode {
namespace {

// Restores the fault-injection hook on scope exit.
struct BiasGuard {
  explicit BiasGuard(double bias) { testing::uniform_bias = bias; }
  ~BiasGuard() { testing::uniform_bias = 0.0; }
};

TEST(Correctness, SelectionCodecsOnTheBinaryChannel) {
  for (Codec codec : {Codec::rejection, Codec::pfr}) {
    RecordCodec const rc(CategoricalMechanism::binary_symmetric(0.2), codec);
    auto const g = correctness_experiment(rc, 1.0, 10000, 3);
    EXPECT_EQ(g.kind, GofKind::chi_square);
    EXPECT_TRUE(g.pass) << to_string(codec) << " " << g.statistic;
  }
}

TEST(Correctness, QuantisersAndContinuousSelection) {
  EXPECT_TRUE(correctness_experiment(RecordCodec(UniformAdditiveMechanism(8), Codec::dq), 3.0, 10000, 1).pass);
  EXPECT_TRUE(correctness_experiment(RecordCodec(UniformAdditiveMechanism(8), Codec::pfr), 3.0, 10000, 1).pass);
  EXPECT_TRUE(
      correctness_experiment(RecordCodec(GaussianGaussianMechanism(1.0, 0.5), Codec::lq), -0.7, 10000, 2).pass);
  auto const g = correctness_experiment(RecordCodec(GaussianUniformParams{2.0}, Codec::dq), 0.3, 10000, 4);
  EXPECT_EQ(g.kind, GofKind::ks);
  EXPECT_TRUE(g.pass);
}

TEST(Correctness, BiasedRandomnessIsCaught) {
  BiasGuard const guard(0.2);
  RecordCodec const rc(CategoricalMechanism::binary_symmetric(0.2), Codec::pfr);
  EXPECT_FALSE(correctness_experiment(rc, 0.0, 10000, 3).pass);
}

TEST(Correctness, NeedsTenThousandTrials) {
  RecordCodec const rc(UniformAdditiveMechanism(4), Codec::dq);
  EXPECT_THROW(correctness_experiment(rc, 0.0, 9999, 1), InsufficientSamples);
}

TEST(Runtime, DegenerateChannelTakesOneStep) {
  auto const rep = runtime_experiment(CategoricalMechanism::degenerate({0.25, 0.75}), 0.0, 1000, 5);
  EXPECT_EQ(rep.rejection_steps.mean, 1.0);
  EXPECT_EQ(rep.pfr_steps.mean, 1.0);
  EXPECT_EQ(rep.rejection_steps.std_error, 0.0);
  EXPECT_TRUE(rep.equal_in_distribution.pass);
}

TEST(Runtime, MeanStepsEqualRatioSup) {
  auto const rep = runtime_experiment(UniformAdditiveMechanism(16), 4.0, 20000, 6);
  EXPECT_LT(std::fabs(rep.rejection_steps.mean - 16.0), 3.0 * rep.rejection_steps.std_error);
  EXPECT_LT(std::fabs(rep.pfr_steps.mean - 16.0), 3.0 * rep.pfr_steps.std_error);
  EXPECT_TRUE(rep.equal_in_distribution.pass);
}

TEST(PoissonArrivals, SingleArrivalRatioIsUniform) {
  auto const rep = theorem1_experiment(1, 10000, 8);
  ASSERT_EQ(rep.coordinates.size(), 1u);
  EXPECT_TRUE(rep.coordinates[0].pass);
  EXPECT_TRUE(rep.ascending);
}

TEST(PoissonArrivals, OrderStatisticMarginals) {
  for (unsigned k : {2u, 4u, 5u}) {
    auto const rep = theorem1_experiment(k, 10000, 9 + k);
    EXPECT_TRUE(rep.ascending);
    for (auto const& g : rep.coordinates) EXPECT_TRUE(g.pass) << k << " " << g.statistic;
  }
  EXPECT_THROW(theorem1_experiment(0, 100, 1), DomainError);
  EXPECT_THROW(theorem1_experiment(6, 100, 1), DomainError);
}

TEST(PoissonArrivals, WrongMarginalIsRejected) {
  // The minimum of two uniforms is not uniform.
  auto const rep = theorem1_experiment(2, 10000, 3);
  std::vector<double> mins;
  auto s = new_stream(3, 0);
  for (int i = 0; i < 10000; ++i) {
    double const t1 = s.next_exponential();
    double const t2 = t1 + s.next_exponential();
    double const t3 = t2 + s.next_exponential();
    mins.push_back(t1 / t3);
  }
  EXPECT_FALSE(ks_test(mins, [](double v) { return std::clamp(v, 0.0, 1.0); }).pass);
  EXPECT_TRUE(rep.coordinates[0].pass);
}

TEST(Smsu, IdentityAndAWrongScale) {
  EXPECT_TRUE(smsu_experiment(gaussian_smsu(), 100000, 1).pass);
  EXPECT_TRUE(smsu_experiment(uniform_smsu(), 10000, 1).pass);
  SmsuRepresentation wrong = uniform_smsu();
  wrong.scale_sampler = [](DeterministicStream&) { return 2.0; };
  EXPECT_FALSE(smsu_experiment(wrong, 10000, 1).pass);
}

TEST(Noise, DitherBracketHoldsEverywhere) {
  auto const rep = noise_experiment(gaussian_uniform(3.0), Codec::dq, 20000, 12);
  EXPECT_EQ(rep.bracket_violations, 0u);
  EXPECT_EQ(rep.replay_mismatches, 0u);
  EXPECT_TRUE(rep.gof.pass);
  EXPECT_THROW(noise_experiment(gaussian_uniform(1.0), Codec::pfr, 100, 1), DomainError);
}

TEST(Rate, DitheredUniformSourceCostsLbLPlusOne) {
  double previous = 0.0;
  for (std::int64_t levels : {4, 8, 16, 32}) {
    auto const rep = rate_experiment(RecordCodec(UniformAdditiveMechanism(levels), Codec::dq), 1000, 2);
    EXPECT_DOUBLE_EQ(rep.payload_bits.mean, std::log2(static_cast<double>(levels)) + 1.0);
    EXPECT_DOUBLE_EQ(*rep.mutual_information, std::log2(static_cast<double>(levels)));
    EXPECT_FALSE(rep.steps.has_value());
    if (previous > 0.0) {
      EXPECT_NEAR(rep.payload_bits.mean - previous, 1.0, 0.1);
    }
    previous = rep.payload_bits.mean;
  }
}

TEST(Rate, DegenerateSelectionCostsOneBit) {
  auto const rep = rate_experiment(RecordCodec(CategoricalMechanism::degenerate({0.3, 0.7}), Codec::pfr), 1000, 2);
  EXPECT_EQ(rep.payload_bits.mean, 1.0);
  EXPECT_EQ(rep.steps->mean, 1.0);
  EXPECT_EQ(rep.log_ratio_sup->mean, 0.0);
  EXPECT_EQ(*rep.bound_shape, 0.0);
}

TEST(Rate, CategoricalBaselines) {
  auto const mech = CategoricalMechanism::binary_symmetric(0.2);
  auto const rep = rate_experiment(RecordCodec(mech, Codec::pfr), 5000, 7);
  EXPECT_NEAR(rep.log_ratio_sup->mean, std::log2(1.6), 1e-12);
  EXPECT_NEAR(*rep.mutual_information, 1.0 + 0.8 * std::log2(0.8) + 0.2 * std::log2(0.2), 1e-12);
  EXPECT_GE(rep.payload_bits.mean, *rep.mutual_information);
  EXPECT_DOUBLE_EQ(*rep.residual, rep.payload_bits.mean - *rep.bound_shape);
}

TEST(Rate, ReproducibleToTheLastBit) {
  RecordCodec const rc(GaussianGaussianMechanism(1.0, 0.5), Codec::lq);
  auto const a = rate_experiment(rc, 3000, 42);
  auto const b = rate_experiment(rc, 3000, 42);
  EXPECT_EQ(a.payload_bits.mean, b.payload_bits.mean);
  EXPECT_EQ(a.payload_bits.std_error, b.payload_bits.std_error);
  auto const c = rate_experiment(rc, 3000, 43);
  EXPECT_NE(a.payload_bits.mean, c.payload_bits.mean);
}

TEST(Rate, ParallelMapPropagatesTheFirstError) {
  try {
    detail::parallel_map(5000, [](std::size_t i) -> int {
      if (i == 1234 || i == 4000) throw DomainError("boom " + std::to_string(i));
      return static_cast<int>(i);
    });
    FAIL() << "expected an exception";
  } catch (DomainError const& e) {
    EXPECT_STREQ(e.what(), "boom 1234");
  }
  auto const v = detail::parallel_map(3000, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(v[i], i * i);
}

TEST(SortIndex, ExperimentReportsBothHistograms) {
  auto const rep = sort_index_experiment(UniformAdditiveMechanism(8), 2.0, 10000, 5, 31);
  std::uint64_t total_pfr = 0;
  std::uint64_t total_sorted = 0;
  for (auto c : rep.pfr_counts) total_pfr += c;
  for (auto c : rep.sorted_counts) total_sorted += c;
  EXPECT_EQ(total_pfr, 10000u);
  EXPECT_EQ(total_sorted, 10000u);
  // P[N = 1] is 1/8 for PFR and ln(8)/7 = 0.297 for the sorted rejection index.
  EXPECT_NEAR(static_cast<double>(rep.pfr_counts[0]) / 1e4, 0.125, 0.015);
  EXPECT_NEAR(static_cast<double>(rep.sorted_counts[0]) / 1e4, std::log(8.0) / 7.0, 0.015);
  EXPECT_FALSE(rep.homogeneity.pass);
}

TEST(Csv, RowsAndFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);

  auto const rep = rate_experiment(RecordCodec(UniformAdditiveMechanism(4), Codec::dq), 100, 1);
  std::ostringstream out;
  write_csv_header(out);
  write_csv(out, csv_rows(rep));
  std::string const text = out.str();
  EXPECT_EQ(text.rfind("name,value,stderr,n\n", 0), 0u);
  EXPECT_NE(text.find("uniform-additive(L=4)/dq/payload_bits,3,0,100\n"), std::string::npos);
  EXPECT_NE(text.find("uniform-additive(L=4)/dq/mutual_information,2,0,100\n"), std::string::npos);

  std::ostringstream table;
  write_table(table, csv_rows(rep));
  EXPECT_NE(table.str().find("payload_bits"), std::string::npos);
}

}  // namespace
}  // namespace recode
