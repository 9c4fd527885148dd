#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bellhv/geometry.hpp"

using namespace bellhv;

namespace {

constexpr double kTol = 1e-12;

TEST(Direction, ReducesModuloTwoPi) {
  EXPECT_NEAR(Direction(0.0).angle(), 0.0, kTol);
  EXPECT_NEAR(Direction(kTwoPi + 0.5).angle(), 0.5, kTol);
  EXPECT_NEAR(Direction(-0.5).angle(), kTwoPi - 0.5, kTol);
  EXPECT_THROW(Direction(std::nan("")), std::domain_error);
  EXPECT_THROW(Direction(std::numeric_limits<double>::infinity()),
               std::domain_error);
}

TEST(Direction, OppositeAddsPi) {
  Direction d(0.3);
  EXPECT_NEAR(d.opposite().angle(), 0.3 + kPi, kTol);
  Direction e(kPi + 0.3);
  EXPECT_NEAR(e.opposite().angle(), 0.3, kTol);
}

TEST(AngleBetween, KnownValues) {
  EXPECT_DOUBLE_EQ(angle_between(Direction(0.0), Direction(0.0)), 0.0);
  EXPECT_NEAR(angle_between(Direction(0.0), Direction(kPi)), kPi, kTol);
  EXPECT_NEAR(angle_between(Direction(kPi / 12), Direction(kPi / 3)),
              kPi / 4, kTol);
}

TEST(AngleBetween, SymmetricBoundedZeroIffEqual) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  for (int it = 0; it < 2000; ++it) {
    Direction a(uni(gen));
    Direction b(uni(gen));
    const double ab = angle_between(a, b);
    EXPECT_NEAR(ab, angle_between(b, a), kTol);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi + kTol);
    if (ab < kTol) {
      EXPECT_NEAR(a.angle(), b.angle(), 1e-9);
    }
  }
  EXPECT_DOUBLE_EQ(angle_between(Direction(1.25), Direction(1.25)), 0.0);
}

TEST(BuildChain, SmallestChain) {
  const ChainSpec chain = build_chain(1, Direction(0.0));
  ASSERT_EQ(chain.nodes().size(), 3u);
  EXPECT_NEAR(chain.nodes()[0].direction.angle(), 0.0, kTol);
  EXPECT_NEAR(chain.nodes()[1].direction.angle(), kPi / 2, kTol);
  EXPECT_NEAR(chain.nodes()[2].direction.angle(), kPi, kTol);
  ASSERT_EQ(chain.links().size(), 2u);
  EXPECT_FALSE(chain.links()[0].flip_sign);
  EXPECT_TRUE(chain.links()[1].flip_sign);
}

TEST(BuildChain, RejectsZero) {
  EXPECT_THROW(build_chain(0, Direction(0.0)), std::domain_error);
}

TEST(BuildChain, SixStepsByPiOverTwelve) {
  const ChainSpec chain = build_chain(6, Direction(0.0));
  ASSERT_EQ(chain.nodes().size(), 13u);
  for (int k = 0; k <= 12; ++k) {
    EXPECT_NEAR(chain.nodes()[k].direction.angle(), k * kPi / 12.0, kTol);
  }
  // A_0..A_5, B_0..B_5 physical; the logical A_6 is opposite A_0.
  EXPECT_EQ(chain.nodes()[12].label(), "A6");
  EXPECT_NEAR(chain.nodes()[12].direction.angle(),
              chain.nodes()[0].direction.opposite().angle(), kTol);
}

TEST(BuildChain, ArbitraryStartStepArithmetic) {
  const ChainSpec chain = build_chain(2, Direction(kPi / 7));
  EXPECT_NEAR(chain.step(), kPi / 4, kTol);
  for (int k = 0; k <= 4; ++k) {
    EXPECT_NEAR(chain.nodes()[k].direction.angle(),
                Direction(kPi / 7 + k * kPi / 4).angle(), kTol);
  }
  EXPECT_NEAR(chain.nodes()[4].direction.angle(),
              Direction(kPi / 7 + kPi).angle(), kTol);
}

TEST(BuildChain, InvariantsOverRandomInputs) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  std::uniform_int_distribution<int> pick_n(1, 64);
  for (int it = 0; it < 200; ++it) {
    const int n = pick_n(gen);
    const ChainSpec chain = build_chain(n, Direction(uni(gen)));
    ASSERT_EQ(chain.nodes().size(), static_cast<size_t>(2 * n + 1));
    ASSERT_EQ(chain.links().size(), static_cast<size_t>(2 * n));
    for (size_t k = 0; k + 1 < chain.nodes().size(); ++k) {
      EXPECT_NEAR(angle_between(chain.nodes()[k].direction,
                                chain.nodes()[k + 1].direction),
                  kPi / (2 * n), kTol);
    }
    EXPECT_NEAR(angle_between(chain.nodes().back().direction,
                              chain.nodes().front().direction.opposite()),
                0.0, kTol);
    for (size_t k = 0; k < chain.nodes().size(); ++k) {
      EXPECT_EQ(chain.nodes()[k].side, k % 2 == 0 ? Side::A : Side::B);
    }
  }
}

TEST(Theorem2PrimeLayout, ChshPairAngles) {
  const Theorem2PrimeLayout layout =
      build_theorem2prime_layout(Direction(0.0));
  const auto& pairs = layout.chsh_pairs();
  EXPECT_EQ(pairs[0].alice_label, "A0");
  EXPECT_EQ(pairs[0].bob_label, "B1");
  EXPECT_NEAR(angle_between(pairs[0].alice, pairs[0].bob), kPi / 4, kTol);
  EXPECT_NEAR(angle_between(pairs[1].alice, pairs[1].bob), 3 * kPi / 4, kTol);
  EXPECT_NEAR(angle_between(pairs[2].alice, pairs[2].bob), kPi / 4, kTol);
  EXPECT_NEAR(angle_between(pairs[3].alice, pairs[3].bob), kPi / 4, kTol);
  // Successive angles between A0, B1, A3, B4 all equal pi/4.
  EXPECT_NEAR(angle_between(layout.alice_unprimed(), layout.bob_unprimed()),
              kPi / 4, kTol);
  EXPECT_NEAR(angle_between(layout.bob_unprimed(), layout.alice_primed()),
              kPi / 4, kTol);
  EXPECT_NEAR(angle_between(layout.alice_primed(), layout.bob_primed()),
              kPi / 4, kTol);
}

TEST(Theorem2PrimeLayout, SixteenMeasuredPairs) {
  const Theorem2PrimeLayout layout =
      build_theorem2prime_layout(Direction(0.0));
  EXPECT_EQ(layout.measured_pair_count(), 16);
  EXPECT_EQ(layout.chain().links().size(), 12u);
}

TEST(Theorem2PrimeLayout, ClosingLinkSubtendsPiOverTwelve) {
  const Theorem2PrimeLayout layout =
      build_theorem2prime_layout(Direction(0.0));
  const ChainLink& closing = layout.chain().links().back();
  EXPECT_TRUE(closing.flip_sign);
  EXPECT_NEAR(closing.subtended, kPi / 12, kTol);
  // Measured physically at A_0 against B_5.
  EXPECT_NEAR(closing.alice.angle(), 0.0, kTol);
  EXPECT_NEAR(closing.bob.angle(), 11 * kPi / 12, kTol);
  EXPECT_NEAR(layout.chain().nodes().back().direction.angle(), kPi, kTol);
}

TEST(Theorem2PrimeLayout, RotationCovariance) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  for (int it = 0; it < 50; ++it) {
    const double s = uni(gen);
    const double phi = uni(gen);
    const Theorem2PrimeLayout base = build_theorem2prime_layout(Direction(s));
    const Theorem2PrimeLayout rotated =
        build_theorem2prime_layout(Direction(s + phi));
    for (int p = 0; p < 4; ++p) {
      EXPECT_NEAR(
          angle_between(base.chsh_pairs()[p].alice, base.chsh_pairs()[p].bob),
          angle_between(rotated.chsh_pairs()[p].alice,
                        rotated.chsh_pairs()[p].bob),
          kTol);
    }
    for (size_t k = 0; k < base.chain().links().size(); ++k) {
      EXPECT_NEAR(base.chain().links()[k].subtended,
                  rotated.chain().links()[k].subtended, kTol);
      EXPECT_NEAR(
          angle_between(Direction(base.chain().links()[k].alice.angle() + phi),
                        rotated.chain().links()[k].alice),
          0.0, 1e-9);
    }
  }
}

}  // namespace
