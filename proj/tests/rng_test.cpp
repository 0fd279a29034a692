#include "das/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

namespace das {
namespace {

// Reference outputs for splitmix64, computed with an independent
// implementation of the published algorithm.
TEST(Rng, MatchesSplitmix64ReferenceVectors) {
  Rng a(0);
  EXPECT_EQ(a.next_u64(), 16294208416658607535ull);
  EXPECT_EQ(a.next_u64(), 7960286522194355700ull);
  EXPECT_EQ(a.next_u64(), 487617019471545679ull);

  Rng b(1234567);
  EXPECT_EQ(b.next_u64(), 6457827717110365317ull);
  EXPECT_EQ(b.next_u64(), 3203168211198807973ull);
  EXPECT_EQ(b.next_u64(), 9817491932198370423ull);
}

TEST(Rng, Uniform01UsesTop53Bits) {
  Rng r(42);
  EXPECT_DOUBLE_EQ(r.uniform01(), 0.7415648787718233);
}

TEST(Rng, Uniform01StaysInHalfOpenUnitInterval) {
  Rng r(9001);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, BernoulliEdgeProbabilities) {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(r.bernoulli(0.0));
    EXPECT_TRUE(r.bernoulli(1.0));
  }
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng r(17);
  for (int i = 0; i < 5000; ++i) {
    EXPECT_LT(r.uniform_index(7), 7u);
  }
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(r.uniform_index(1), 0u);
  }
}

TEST(Rng, ShuffleIsAPermutation) {
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  std::vector<int> shuffled = v;
  Rng r(5);
  r.shuffle(shuffled);
  EXPECT_NE(shuffled, v);
  std::vector<int> sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, v);
}

TEST(Rng, ShuffleIsDeterministic) {
  std::vector<int> a{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> b = a;
  Rng ra(77);
  Rng rb(77);
  ra.shuffle(a);
  rb.shuffle(b);
  EXPECT_EQ(a, b);
}

TEST(Fnv1a, MatchesKnownDigests) {
  // Standard FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(HashCombine, OrderSensitive) {
  uint64_t h = fnv1a("base");
  EXPECT_NE(hash_combine(hash_combine(h, uint64_t{1}), uint64_t{2}),
            hash_combine(hash_combine(h, uint64_t{2}), uint64_t{1}));
}

TEST(DeriveStream, SameKeySameSequence) {
  Rng a = derive_stream(99, "q17", 3, "rollout");
  Rng b = derive_stream(99, "q17", 3, "rollout");
  for (int i = 0; i < 32; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(DeriveStream, AnyKeyComponentChangesTheStream) {
  uint64_t base = derive_stream(99, "q17", 3, "rollout").next_u64();
  EXPECT_NE(derive_stream(100, "q17", 3, "rollout").next_u64(), base);
  EXPECT_NE(derive_stream(99, "q18", 3, "rollout").next_u64(), base);
  EXPECT_NE(derive_stream(99, "q17", 4, "rollout").next_u64(), base);
  EXPECT_NE(derive_stream(99, "q17", 3, "do_answer").next_u64(), base);
}

TEST(DeriveStream, StreamsLookIndependent) {
  // First draws across many question streams should not collide.
  std::set<uint64_t> firsts;
  for (int q = 0; q < 500; ++q) {
    firsts.insert(derive_stream(7, "q" + std::to_string(q)).next_u64());
  }
  EXPECT_EQ(firsts.size(), 500u);
}

TEST(DeriveStream, IndependentOfConsumptionOrder) {
  Rng a1 = derive_stream(5, "alpha");
  uint64_t first_a = a1.next_u64();
  Rng b = derive_stream(5, "beta");
  (void)b.next_u64();
  Rng a2 = derive_stream(5, "alpha");
  EXPECT_EQ(a2.next_u64(), first_a);
}

}  // namespace
}  // namespace das
