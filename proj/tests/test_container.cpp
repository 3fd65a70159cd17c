#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "recode/acceptance.hpp"
#include "recode/container.hpp"

namespace recode {
namespace {

std::vector<double> uniform_levels(std::int64_t levels, std::size_t n, std::uint64_t seed) {
  UniformAdditiveMechanism const mech(levels);
  auto s = new_stream(seed, 0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = mech.source_sample(s);
  return xs;
}

std::vector<std::uint8_t> le64(std::uint64_t v) {
  std::vector<std::uint8_t> out;
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return out;
}

TEST(Container, EmptyInputHeaderLayout) {
  auto const c = encode_records(RecordCodec(UniformAdditiveMechanism(16), Codec::dq), {}, 0x0102030405060708ULL);
  auto const bytes = serialize(c);
  std::vector<std::uint8_t> expected = {'R', 'E', 'C', 'B', 1, 3};
  for (auto b : le64(16)) expected.push_back(b);
  expected.push_back(3);
  for (auto b : le64(0x0102030405060708ULL)) expected.push_back(b);
  for (auto b : le64(0)) expected.push_back(b);
  for (auto b : le64(0)) expected.push_back(b);
  EXPECT_EQ(bytes, expected);
  auto const back = deserialize(bytes);
  EXPECT_EQ(back.header.record_count, 0u);
  EXPECT_EQ(back.header.payload_bits, 0u);
  EXPECT_TRUE(decode_records(back).empty());
}

TEST(Container, ParameterBlocksRoundTrip) {
  std::vector<Mechanism> const mechs = {
      CategoricalMechanism({0.2, 0.3, 0.5}, {{0.5, 0.5}, {0.9, 0.1}, {0.1, 0.9}}),
      GaussianGaussianMechanism(1.5, 0.25),
      UniformAdditiveMechanism(1000),
      GaussianUniformParams{0.75},
  };
  std::vector<Codec> const codecs = {Codec::rejection, Codec::lq, Codec::pfr, Codec::dq};
  for (std::size_t i = 0; i < mechs.size(); ++i) {
    Container c;
    c.header.mechanism = mechs[i];
    c.header.codec = codecs[i];
    c.header.seed = 77;
    auto const back = deserialize(serialize(c));
    EXPECT_EQ(back.header.codec, codecs[i]);
    EXPECT_EQ(back.header.seed, 77u);
    EXPECT_EQ(describe(back.header.mechanism), describe(mechs[i]));
    EXPECT_EQ(serialize(back), serialize(c));
  }
}

TEST(Container, DitheredRoundTripBracket) {
  auto const xs = uniform_levels(16, 2000, 3);
  RecordCodec const rc(UniformAdditiveMechanism(16), Codec::dq);
  auto const bytes = serialize(encode_records(rc, xs, 11));
  auto const ys = decode_records(deserialize(bytes));
  ASSERT_EQ(ys.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ASSERT_GT(ys[i] - xs[i], -0.5);
    ASSERT_LE(ys[i] - xs[i], 0.5);
  }
  // Five bits per record: lb 16 + 1.
  EXPECT_EQ(deserialize(bytes).header.payload_bits, 5u * xs.size());
}

TEST(Container, EveryCompatiblePairRoundTrips) {
  struct Case {
    Mechanism mech;
    Codec codec;
    std::vector<double> inputs;
  };
  std::vector<Case> const cases = {
      {CategoricalMechanism::binary_symmetric(0.1), Codec::rejection, {0, 1, 1, 0}},
      {CategoricalMechanism::binary_symmetric(0.1), Codec::pfr, {1, 0, 0, 1}},
      {GaussianGaussianMechanism(1.0, 0.5), Codec::rejection, {0.1, -0.4, 1.2}},
      {GaussianGaussianMechanism(1.0, 0.5), Codec::pfr, {0.1, -0.4, 1.2}},
      {GaussianGaussianMechanism(1.0, 0.5), Codec::lq, {0.1, -0.4, 1.2}},
      {UniformAdditiveMechanism(8), Codec::rejection, {0, 7, 3}},
      {UniformAdditiveMechanism(8), Codec::pfr, {0, 7, 3}},
      {UniformAdditiveMechanism(8), Codec::dq, {0, 7, 3}},
      {UniformAdditiveMechanism(8), Codec::lq, {0, 7, 3}},
      {GaussianUniformParams{1.0}, Codec::dq, {2.5, -0.1}},
      {GaussianUniformParams{1.0}, Codec::lq, {2.5, -0.1}},
  };
  for (auto const& tc : cases) {
    RecordCodec const rc(tc.mech, tc.codec, Budget::steps(1000000));
    auto const enc = encode_records(rc, tc.inputs, 5);
    auto const ys = decode_records(deserialize(serialize(enc)));
    ASSERT_EQ(ys.size(), tc.inputs.size()) << describe(tc.mech) << " " << to_string(tc.codec);
    // Decoding must agree with replaying each record on its own substream.
    BitCursor cursor;
    for (std::size_t i = 0; i < ys.size(); ++i)
      EXPECT_EQ(ys[i], rc.decode(enc.payload, cursor, 5, i)) << describe(tc.mech) << " " << to_string(tc.codec);
  }
}

TEST(Container, IncompatiblePairsAreRefused) {
  EXPECT_THROW(RecordCodec(CategoricalMechanism::binary_symmetric(0.1), Codec::dq), DomainError);
  EXPECT_THROW(RecordCodec(CategoricalMechanism::binary_symmetric(0.1), Codec::lq), DomainError);
  EXPECT_THROW(RecordCodec(GaussianGaussianMechanism(1.0, 0.5), Codec::dq), DomainError);
  EXPECT_THROW(RecordCodec(GaussianUniformParams{1.0}, Codec::pfr), DomainError);
  EXPECT_THROW(RecordCodec(GaussianUniformParams{1.0}, Codec::rejection), DomainError);
}

TEST(Container, MalformedFilesAreFormatErrors) {
  auto const xs = uniform_levels(4, 50, 1);
  auto const good = serialize(encode_records(RecordCodec(UniformAdditiveMechanism(4), Codec::dq), xs, 2));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize(bad_magic), FormatError);
  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_THROW(deserialize(bad_version), FormatError);
  auto bad_mechanism = good;
  bad_mechanism[5] = 9;
  EXPECT_THROW(deserialize(bad_mechanism), FormatError);
  auto bad_codec = good;
  bad_codec[14] = 7;
  EXPECT_THROW(deserialize(bad_codec), FormatError);
  auto incompatible = good;
  incompatible[5] = 1;  // categorical id with a uniform-additive parameter block
  EXPECT_THROW(deserialize(incompatible), FormatError);

  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(deserialize(truncated), FormatError);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(deserialize(trailing), FormatError);
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>{'R', 'E'}), FormatError);
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>{'R', 'E', 'C', 'B'}), FormatError);
  std::vector<std::uint8_t> const header_only(good.begin(), good.begin() + 20);
  EXPECT_THROW(deserialize(header_only), FormatError);
}

TEST(Container, ImplausibleParametersAreFormatErrors) {
  std::vector<std::uint8_t> file = {'R', 'E', 'C', 'B', 1, 1};
  for (auto b : le64(std::uint64_t{1} << 40)) file.push_back(b);
  for (auto b : le64(2)) file.push_back(b);
  EXPECT_THROW(deserialize(file), FormatError);

  std::vector<std::uint8_t> gauss = {'R', 'E', 'C', 'B', 1, 2};
  for (auto b : le64(std::bit_cast<std::uint64_t>(-1.0))) gauss.push_back(b);
  for (auto b : le64(std::bit_cast<std::uint64_t>(0.5))) gauss.push_back(b);
  EXPECT_THROW(deserialize(gauss), FormatError);
}

TEST(Container, PayloadWithoutRecordCountIsRejected) {
  auto const xs = uniform_levels(4, 10, 1);
  auto c = encode_records(RecordCodec(UniformAdditiveMechanism(4), Codec::dq), xs, 2);
  c.header.record_count = 9;
  EXPECT_THROW(decode_records(deserialize(serialize(c))), FormatError);
  c.header.record_count = 11;
  EXPECT_THROW(decode_records(deserialize(serialize(c))), RecordError);
}

TEST(Container, CodecErrorsNameTheRecord) {
  RecordCodec const rc(UniformAdditiveMechanism(4), Codec::dq);
  std::vector<double> const xs = {0, 1, 100, 2};
  try {
    encode_records(rc, xs, 1);
    FAIL() << "expected a record error";
  } catch (RecordError const& e) {
    EXPECT_EQ(e.record(), 2u);
    EXPECT_EQ(std::string(e.what()).rfind("record 2: ", 0), 0u);
  }
}

TEST(Container, DeterministicBytes) {
  auto const xs = uniform_levels(16, 500, 9);
  RecordCodec const rc(UniformAdditiveMechanism(16), Codec::pfr);
  EXPECT_EQ(serialize(encode_records(rc, xs, 3)), serialize(encode_records(rc, xs, 3)));
  EXPECT_NE(serialize(encode_records(rc, xs, 3)), serialize(encode_records(rc, xs, 4)));
}

TEST(Container, DamagedRecordDoesNotDisturbOthers) {
  auto const xs = uniform_levels(16, 300, 9);
  RecordCodec const rc(UniformAdditiveMechanism(16), Codec::pfr);
  auto c = encode_records(rc, xs, 3);
  auto const clean = decode_records(c);
  // Damage every record with a nonempty delta mantissa, one at a time.
  std::size_t damaged = 0;
  for (std::size_t v = 0; v + 1 < c.record_offsets.size(); ++v) {
    if (c.record_offsets[v + 1] - c.record_offsets[v] < 4) continue;
    auto copy = c;
    copy.payload.flip(c.record_offsets[v + 1] - 1);
    auto const ys = decode_records(copy);
    for (std::size_t i = 0; i < ys.size(); ++i)
      if (i != v) {
        ASSERT_EQ(ys[i], clean[i]) << "damaged " << v << " changed " << i;
      }
    ++damaged;
  }
  EXPECT_GT(damaged, 100u);
}

TEST(Container, ReferenceDigestsArePinned) {
  namespace a = acceptance_detail;
  auto const run = a::reference_run();
  EXPECT_EQ(a::fnv1a(run.file), a::kReferenceContainerDigest);
  EXPECT_EQ(a::fnv1a(decode_records(deserialize(run.file))), a::kReferenceDecodeDigest);
}

}  // namespace
}  // namespace recode
