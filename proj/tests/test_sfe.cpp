#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "recode/random.hpp"
#include "recode/sfe.hpp"
#include "recode/stats.hpp"

namespace recode {
namespace {

// N >= 1 with P[N = n] = 2^-n.
IntegerCdf geometric_half() {
  return {[](std::int64_t n) { return n < 1 ? 0.0 : 1.0 - std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(n, 2000))); }, 1, 8};
}

IntegerCdf discretised_gaussian(double sd) {
  return {[sd](std::int64_t n) { return normal_cdf((static_cast<double>(n) + 0.5) / sd); }, -3, 3};
}

// Textbook construction on exact dyadic values (long double holds them exactly).
std::string reference_codeword(long double below, long double pmf) {
  int const length = static_cast<int>(std::ceil(-std::log2(pmf))) + 1;
  long double v = below + pmf / 2;
  std::string out;
  for (int i = 0; i < length; ++i) {
    v *= 2;
    if (v >= 1) {
      out.push_back('1');
      v -= 1;
    } else {
      out.push_back('0');
    }
  }
  return out;
}

TEST(Sfe, DeterministicSymbolUsesOneBit) {
  IntegerCdf const point{[](std::int64_t n) { return n < 5 ? 0.0 : 1.0; }, 5, 5};
  auto const code = sfe_encode(point, 5);
  EXPECT_EQ(code.size(), 1u);
  BitCursor cursor;
  EXPECT_EQ(sfe_decode(point, code, cursor), 5);
  EXPECT_EQ(cursor.position(), 1u);
}

TEST(Sfe, QuarterMassAtOrigin) {
  IntegerCdf const cdf{[](std::int64_t n) { return n < 0 ? 0.0 : (n == 0 ? 0.25 : 1.0); }, 0, 1};
  EXPECT_EQ(sfe_encode(cdf, 0).to_string(), "001");
}

TEST(Sfe, MatchesReferenceOnDyadicPmfs) {
  auto const cdf = geometric_half();
  // F(n) = 1 - 2^-n is exact in double only up to n = 53.
  for (std::int64_t n = 1; n <= 52; ++n) {
    long double const below = 1.0L - std::ldexp(1.0L, static_cast<int>(-(n - 1)));
    long double const pmf = std::ldexp(1.0L, static_cast<int>(-n));
    ASSERT_EQ(sfe_encode(cdf, n).to_string(), reference_codeword(below, pmf)) << n;
  }
}

TEST(Sfe, LengthLawAndMeanLength) {
  auto const cdf = geometric_half();
  for (std::int64_t n = 1; n <= 52; ++n) ASSERT_EQ(sfe_encode(cdf, n).size(), static_cast<std::size_t>(n + 1));
  // Entropy of Geometric(1/2) is 2 bits.
  auto s = new_stream(3, 0);
  RunningStats len;
  for (int i = 0; i < 100000; ++i) {
    std::int64_t n = 1;
    while (s.next_uniform() >= 0.5) ++n;
    len.add(static_cast<double>(sfe_encode(cdf, n).size()));
  }
  EXPECT_GE(len.mean(), 2.0);
  EXPECT_LE(len.mean(), 4.0);

  auto const gauss = discretised_gaussian(7.0);
  for (std::int64_t n = -40; n <= 40; ++n) {
    double const p = gauss.pmf(n);
    ASSERT_EQ(static_cast<double>(sfe_encode(gauss, n).size()), std::ceil(-std::log2(p)) + 1.0) << n;
  }
}

TEST(Sfe, RoundtripUnderDiscretisedGaussian) {
  auto const cdf = discretised_gaussian(30.0);
  for (std::int64_t n = -100; n <= 100; ++n) {
    auto const code = sfe_encode(cdf, n);
    BitCursor cursor;
    ASSERT_EQ(sfe_decode(cdf, code, cursor), n);
    ASSERT_EQ(cursor.position(), code.size());
  }
}

TEST(Sfe, ConcatenatedRecordsDecodeInSequence) {
  auto const cdf = discretised_gaussian(4.0);
  std::vector<std::int64_t> const values = {0, -3, 12, 1, 1, -20, 5};
  BitString stream;
  for (auto v : values) stream.append(sfe_encode(cdf, v));
  BitCursor cursor;
  for (auto v : values) EXPECT_EQ(sfe_decode(cdf, stream, cursor), v);
  EXPECT_TRUE(cursor.at_end(stream));
}

TEST(Sfe, BracketExpandsFromAWrongHint) {
  IntegerCdf cdf = discretised_gaussian(5.0);
  cdf.low = 1000;
  cdf.high = 1001;
  for (std::int64_t n : {-30, -1, 0, 4, 29}) {
    auto const code = sfe_encode(cdf, n);
    BitCursor cursor;
    ASSERT_EQ(sfe_decode(cdf, code, cursor), n);
  }
}

TEST(Sfe, PrefixFreeAcrossSupport) {
  auto const cdf = discretised_gaussian(3.0);
  std::vector<BitString> codes;
  for (std::int64_t n = -25; n <= 25; ++n) codes.push_back(sfe_encode(cdf, n));
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t j = 0; j < codes.size(); ++j)
      if (i != j) {
        ASSERT_FALSE(codes[i].is_prefix_of(codes[j])) << i << " " << j;
      }
}

TEST(Sfe, Errors) {
  auto const cdf = discretised_gaussian(1.0);
  EXPECT_THROW(sfe_encode(cdf, 200), ZeroProbabilitySymbol);
  auto bits = sfe_encode(cdf, 3).to_string();
  bits.pop_back();
  BitCursor cursor;
  EXPECT_THROW(sfe_decode(cdf, BitString::from_string(bits), cursor), TruncationError);
}

TEST(Sfe, EncoderEvaluatesTheCdfTwice) {
  for (double sd : {0.5, 50.0, 5000.0}) {
    int calls = 0;
    IntegerCdf const counting{[&](std::int64_t n) {
                                ++calls;
                                return normal_cdf((static_cast<double>(n) + 0.5) / sd);
                              },
                              0, 0};
    sfe_encode(counting, 0);
    EXPECT_EQ(calls, 2);
  }
}

}  // namespace
}  // namespace recode
