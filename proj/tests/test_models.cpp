#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "bellhv/estimators.hpp"
#include "bellhv/models.hpp"
#include "oracles.hpp"

using namespace bellhv;
using bellhv_test::wharton_enumeration_oracle;

namespace {

constexpr double kTol = 1e-12;

void expect_joint_near(const JointDistribution& got,
                       const JointDistribution& want, double tol) {
  EXPECT_NEAR(got.p_pp, want.p_pp, tol);
  EXPECT_NEAR(got.p_pm, want.p_pm, tol);
  EXPECT_NEAR(got.p_mp, want.p_mp, tol);
  EXPECT_NEAR(got.p_mm, want.p_mm, tol);
}

TEST(QuantumJoint, PerfectCorrelationAtZeroAngle) {
  const JointDistribution d = quantum_joint(0.0, +1);
  EXPECT_DOUBLE_EQ(d.p_pp, 0.5);
  EXPECT_DOUBLE_EQ(d.p_mm, 0.5);
  EXPECT_DOUBLE_EQ(d.p_pm, 0.0);
  EXPECT_DOUBLE_EQ(d.p_mp, 0.0);
}

TEST(QuantumJoint, CorrelatorAtPiOverFour) {
  const JointDistribution d = quantum_joint(kPi / 4, +1);
  EXPECT_NEAR(correlator(d), 0.70710678118654752, 1e-15);
}

TEST(QuantumJoint, ChainLinkCorrelator) {
  const JointDistribution d = quantum_joint(kPi / 12, +1);
  EXPECT_NEAR(correlator(d), 0.96592582628906829, 1e-15);
  EXPECT_NEAR(correlator(d), 1.0 - 2.0 * std::pow(std::sin(kPi / 24), 2),
              1e-15);
}

TEST(QuantumJoint, MarginalsExactlyHalf) {
  for (double theta : {0.0, 0.3, kPi / 2, 2.9, kPi}) {
    for (int sign : {+1, -1}) {
      const auto [ma, mb] = marginals(quantum_joint(theta, sign));
      EXPECT_NEAR(ma, 0.0, kTol);
      EXPECT_NEAR(mb, 0.0, kTol);
    }
  }
}

TEST(QuantumJoint, DomainErrors) {
  EXPECT_THROW(quantum_joint(-0.1, +1), std::domain_error);
  EXPECT_THROW(quantum_joint(kPi + 0.1, +1), std::domain_error);
  EXPECT_THROW(quantum_joint(1.0, 0), std::domain_error);
}

TEST(ToyMiSigma, ZeroAngleConcentratesOnEqualValues) {
  const auto support =
      toy_mi_sigma(ToyMiParams{+1}, Setting(0.0), Setting(0.0));
  ASSERT_EQ(support.size(), 2u);
  double total = 0.0;
  for (const auto& ws : support) {
    const auto& jv = std::get<JointValueLambda>(ws.state);
    EXPECT_EQ(jv.value.a, jv.value.b);
    EXPECT_DOUBLE_EQ(ws.weight, 0.5);
    total += ws.weight;
  }
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(ToyMiSigma, WeightsMatchQuantumJoint) {
  const auto support =
      toy_mi_sigma(ToyMiParams{+1}, Setting(0.0), Setting(kPi / 4));
  ASSERT_EQ(support.size(), 4u);
  double w_pm = -1.0;
  for (const auto& ws : support) {
    const auto& jv = std::get<JointValueLambda>(ws.state);
    if (jv.value.a == +1 && jv.value.b == -1) w_pm = ws.weight;
  }
  EXPECT_NEAR(w_pm, 0.073223304703363119, 1e-15);  // sin^2(pi/8)/2
}

TEST(ToyMiSigma, OutcomesDeterministicGivenLambda) {
  const auto support =
      toy_mi_sigma(ToyMiParams{+1}, Setting(0.2), Setting(1.1));
  for (const auto& ws : support) {
    const auto& jv = std::get<JointValueLambda>(ws.state);
    const JointDistribution d = outcome_dist(ws.state, Setting(0.2),
                                             Setting(1.1));
    EXPECT_DOUBLE_EQ(d.prob(jv.value.a, jv.value.b), 1.0);
  }
}

TEST(SchulmanWeight, Values) {
  EXPECT_DOUBLE_EQ(schulman_weight(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(schulman_weight(2.0, 1.0), 0.2);
  EXPECT_THROW(schulman_weight(1.0, 0.0), std::domain_error);
  EXPECT_THROW(schulman_weight(1.0, -1.0), std::domain_error);
}

TEST(SchulmanWeight, EvenAndDecreasingInMagnitude) {
  for (double alpha : {0.1, 0.7, 2.0, 9.0}) {
    EXPECT_DOUBLE_EQ(schulman_weight(alpha, 0.3),
                     schulman_weight(-alpha, 0.3));
    EXPECT_GT(schulman_weight(alpha, 0.3),
              schulman_weight(alpha + 0.1, 0.3));
  }
}

TEST(SchulmanRatio, SymmetryPointAtPiOverTwo) {
  for (double g : {0.01, 0.1, 1.0}) {
    EXPECT_NEAR(schulman_ratio_closed(kPi / 2, g), 1.0, 1e-14);
    EXPECT_NEAR(schulman_ratio_truncated(kPi / 2, g, 2000), 1.0, 1e-9);
  }
}

TEST(SchulmanRatio, AtPiReducesToTanhSquared) {
  for (double g : {0.05, 0.1, 0.8}) {
    const double expected = std::pow(std::tanh(g / 2), 2);
    EXPECT_NEAR(schulman_ratio_closed(kPi, g), expected, 1e-14 + expected * 1e-12);
  }
}

TEST(SchulmanRatio, TruncatedSumConvergesToClosedForm) {
  // The truncated route is the independent oracle for the closed form; the
  // missing tail mass is 1/(2 pi^2 N) per sum, so the achievable agreement
  // scales as ~2e-6 * |cos theta| * (100000/N).
  const long N = 200000;
  for (double g : {0.01, 0.1, 1.0}) {
    for (int k = 0; k <= 12; ++k) {
      const double theta = kPi * k / 12.0;
      const double closed = schulman_ratio_closed(theta, g);
      const double truncated = schulman_ratio_truncated(theta, g, N);
      EXPECT_NEAR(truncated / closed, 1.0, 1.1e-6)
          << "theta=" << theta << " gamma=" << g;
    }
  }
}

TEST(SchulmanRatio, DomainErrors) {
  EXPECT_THROW(schulman_ratio_closed(1.0, 0.0), std::domain_error);
  EXPECT_THROW(schulman_ratio_truncated(1.0, 0.0, 10), std::domain_error);
  EXPECT_THROW(schulman_ratio_truncated(1.0, 0.1, 0), std::domain_error);
}

TEST(SchulmanSingleProbs, IdealLimitIsBornExactly) {
  const auto [same0, flip0] = schulman_single_probs(0.0, 0.0);
  EXPECT_DOUBLE_EQ(same0, 1.0);
  EXPECT_DOUBLE_EQ(flip0, 0.0);
  const auto [same3, flip3] = schulman_single_probs(kPi / 3, 0.0);
  EXPECT_DOUBLE_EQ(same3, std::pow(std::cos(kPi / 6), 2));
  EXPECT_DOUBLE_EQ(flip3, std::pow(std::sin(kPi / 6), 2));
  EXPECT_NEAR(same3, 0.75, 1e-15);
}

TEST(SchulmanSingleProbs, HalfHalfAtPiOverTwo) {
  for (double g : {0.0, 0.01, 0.5, 2.0}) {
    const auto [same, flip] = schulman_single_probs(kPi / 2, g);
    EXPECT_NEAR(same, 0.5, 1e-15);
    EXPECT_NEAR(flip, 0.5, 1e-15);
  }
}

TEST(SchulmanSingleProbs, MatchesNormalisedClosedRatio) {
  for (double g : {0.03, 0.4}) {
    for (double theta : {0.1, 1.0, 2.5, kPi}) {
      const double r = schulman_ratio_closed(theta, g);
      const auto [same, flip] = schulman_single_probs(theta, g);
      EXPECT_NEAR(same, r / (1.0 + r), 1e-13);
      EXPECT_NEAR(flip, 1.0 / (1.0 + r), 1e-13);
      EXPECT_NEAR(same + flip, 1.0, kTol);
    }
  }
}

TEST(WhartonSigma, UniformWeights) {
  const SourceParams source = SourceParams::wharton_pair(
      {0.25, 0.25, 0.25, 0.25}, SpinRelation::parallel, 0.0);
  const auto support =
      hidden_sigma(source, Setting(0.0), Setting(kPi / 4));
  ASSERT_EQ(support.size(), 4u);
  for (const auto& ws : support) EXPECT_DOUBLE_EQ(ws.weight, 0.25);
}

TEST(WhartonSigma, HomogeneousSourceIsPointMass) {
  const SourceParams source = SourceParams::wharton_pair(
      {1.0, 0.0, 0.0, 0.0}, SpinRelation::parallel, 0.0);
  const auto support = hidden_sigma(source, Setting(0.3), Setting(1.0));
  ASSERT_EQ(support.size(), 1u);
  EXPECT_DOUBLE_EQ(support[0].weight, 1.0);
  const auto& wl = std::get<WhartonLambda>(support[0].state);
  EXPECT_EQ(wl.tag, WhartonTag::Aplus);
  EXPECT_NEAR(wl.spin_a_angle, 0.3, kTol);
  EXPECT_NEAR(wl.spin_b_angle, 0.3, kTol);
}

TEST(WhartonSigma, SupportFollowsTheSettings) {
  const SourceParams source = SourceParams::wharton_pair(
      {0.25, 0.25, 0.25, 0.25}, SpinRelation::parallel, 0.0);
  const auto s1 = hidden_sigma(source, Setting(0.0), Setting(1.0));
  const auto s2 = hidden_sigma(source, Setting(0.5), Setting(1.0));
  const auto& wl1 = std::get<WhartonLambda>(s1[0].state);
  const auto& wl2 = std::get<WhartonLambda>(s2[0].state);
  EXPECT_EQ(wl1.tag, wl2.tag);
  EXPECT_GT(std::fabs(wl1.spin_a_angle - wl2.spin_a_angle), 0.4);
}

TEST(WhartonSigma, RejectsBadWeights) {
  EXPECT_THROW(SourceParams::wharton_pair({0.5, 0.5, 0.5, 0.5},
                                          SpinRelation::parallel, 0.0),
               std::invalid_argument);
  EXPECT_THROW(SourceParams::wharton_pair({-0.1, 0.6, 0.25, 0.25},
                                          SpinRelation::parallel, 0.0),
               std::invalid_argument);
  EXPECT_THROW(SourceParams::wharton_pair({0.25, 0.25, 0.25, 0.25},
                                          SpinRelation::parallel, -0.5),
               std::invalid_argument);
}

TEST(WhartonOutcomeDist, TaggedAliceIdealLimit) {
  const SourceParams source = SourceParams::wharton_pair(
      {1.0, 0.0, 0.0, 0.0}, SpinRelation::parallel, 0.0);
  const Setting I(0.0);
  const Setting J(kPi / 4);
  const auto support = hidden_sigma(source, I, J);
  const JointDistribution d = outcome_dist(support[0].state, I, J);
  EXPECT_DOUBLE_EQ(d.p_pp + d.p_pm, 1.0);  // A = +1 surely
  EXPECT_NEAR(d.p_pp, std::pow(std::cos(kPi / 8), 2), kTol);
  EXPECT_NEAR(d.p_pp, 0.85355339059327376, 1e-15);
}

TEST(WhartonOutcomeDist, AlignedAminusIsPointMass) {
  const SourceParams source = SourceParams::wharton_pair(
      {0.0, 0.0, 1.0, 0.0}, SpinRelation::parallel, 0.0);
  const Setting I(0.7);
  const Setting J(0.7);
  const auto support = hidden_sigma(source, I, J);
  const JointDistribution d = outcome_dist(support[0].state, I, J);
  EXPECT_NEAR(d.p_mm, 1.0, kTol);
}

TEST(WhartonOutcomeDist, TaggedBobMeans) {
  const SourceParams source = SourceParams::wharton_pair(
      {0.0, 1.0, 0.0, 0.0}, SpinRelation::parallel, 0.0);
  for (double theta : {0.2, kPi / 4, 2.0}) {
    const Setting I(0.0);
    const Setting J(theta);
    const auto support = hidden_sigma(source, I, J);
    const auto [mean_a, mean_b] = marginals(outcome_dist(support[0].state, I, J));
    EXPECT_NEAR(mean_a, std::cos(theta), kTol);
    EXPECT_NEAR(mean_b, 1.0, kTol);
  }
}

TEST(WhartonOutcomeDist, MatchesEnumerationOracle) {
  std::mt19937_64 gen(314);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    std::array<double, 4> w{};
    double sum = 0.0;
    for (double& x : w) {
      x = -std::log(1.0 - uni(gen));
      sum += x;
    }
    for (double& x : w) x /= sum;
    const bool anti = it % 3 == 0;
    const double gamma_s = (it % 2 == 0) ? 0.0 : 0.2 * uni(gen);
    const double a_axis = kTwoPi * uni(gen);
    const double b_axis = kTwoPi * uni(gen);
    const SourceParams source = SourceParams::wharton_pair(
        w, anti ? SpinRelation::antiparallel : SpinRelation::parallel,
        gamma_s);
    const JointDistribution got =
        exact_joint(source, Setting(a_axis), Setting(b_axis));
    const JointDistribution want =
        wharton_enumeration_oracle(w, anti, gamma_s, a_axis, b_axis);
    expect_joint_near(got, want, 1e-12);
  }
}

TEST(WhartonExact, CorrelatorIsCosThetaForAnyWeights) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    std::array<double, 4> w{};
    double sum = 0.0;
    for (double& x : w) {
      x = uni(gen) + 1e-3;
      sum += x;
    }
    for (double& x : w) x /= sum;
    const SourceParams source =
        SourceParams::wharton_pair(w, SpinRelation::parallel, 0.0);
    const double theta = kPi * uni(gen);
    const JointDistribution d =
        exact_joint(source, Setting(0.0), Setting(theta));
    EXPECT_NEAR(correlator(d), std::cos(theta), 1e-12);
  }
}

TEST(WhartonExact, AntiparallelGivesAnticorrelations) {
  const SourceParams source = SourceParams::wharton_pair(
      {0.25, 0.25, 0.25, 0.25}, SpinRelation::antiparallel, 0.0);
  for (double theta : {0.0, 0.4, kPi / 2, 2.8}) {
    const JointDistribution d =
        exact_joint(source, Setting(0.2), Setting(0.2 + theta));
    EXPECT_NEAR(correlator(d), -std::cos(theta), 1e-12);
  }
}

TEST(WhartonExact, HomogeneousSourceMarginals) {
  const SourceParams source = SourceParams::wharton_pair(
      {1.0, 0.0, 0.0, 0.0}, SpinRelation::parallel, 0.0);
  for (double theta : {0.0, kPi / 4, kPi / 2, 2.5}) {
    const auto [mean_a, mean_b] =
        marginals(exact_joint(source, Setting(0.0), Setting(theta)));
    EXPECT_NEAR(mean_a, 1.0, kTol);
    EXPECT_NEAR(mean_b, std::cos(theta), kTol);
  }
}

TEST(WhartonExact, BornFamilyReproducesQuantumJoint) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    const double a = 0.5 * uni(gen);
    const std::array<double, 4> w = {a, 0.5 - a, a, 0.5 - a};
    const SourceParams source =
        SourceParams::wharton_pair(w, SpinRelation::parallel, 0.0);
    const double theta = kPi * uni(gen);
    const JointDistribution got =
        exact_joint(source, Setting(0.0), Setting(theta));
    const JointDistribution want = quantum_joint(theta, +1);
    expect_joint_near(got, want, 1e-12);
  }
}

TEST(WhartonExact, BornFamilyFiniteGammaConvergesLikeTanhSquaredHalf) {
  // Correlator error is |cos theta| (1 - sech gamma) <= 2 tanh^2(gamma/2),
  // and the marginals stay exactly zero.
  const std::array<double, 4> w = {0.3, 0.2, 0.3, 0.2};
  for (double gamma_s : {0.3, 0.1, 0.03, 0.01}) {
    const SourceParams source =
        SourceParams::wharton_pair(w, SpinRelation::parallel, gamma_s);
    const double limit =
        2.0 * std::pow(std::tanh(gamma_s / 2), 2) + 1e-15;
    for (double theta : {0.0, 0.7, kPi / 2, 2.9, kPi}) {
      const JointDistribution d =
          exact_joint(source, Setting(0.0), Setting(theta));
      EXPECT_LE(std::fabs(correlator(d) - std::cos(theta)), limit);
      const auto [mean_a, mean_b] = marginals(d);
      EXPECT_NEAR(mean_a, 0.0, kTol);
      EXPECT_NEAR(mean_b, 0.0, kTol);
    }
  }
}

TEST(ExactJoint, ToyMiEqualsQuantumJoint) {
  const SourceParams source = SourceParams::toy_mi(+1);
  for (double theta : {0.0, 0.5, kPi / 4, 2.0, kPi}) {
    expect_joint_near(exact_joint(source, Setting(0.0), Setting(theta)),
                      quantum_joint(theta, +1), kTol);
  }
}

TEST(ExactJoint, AllBuiltInsNormalised) {
  const std::vector<SourceParams> sources = {
      SourceParams::quantum_correlated(+1),
      SourceParams::quantum_correlated(-1),
      SourceParams::toy_mi(+1),
      SourceParams::wharton_pair({0.1, 0.4, 0.2, 0.3},
                                 SpinRelation::parallel, 0.05),
      SourceParams::mixture(
          0.3, SourceParams::toy_mi(+1),
          SourceParams::wharton_pair({0.25, 0.25, 0.25, 0.25},
                                     SpinRelation::parallel, 0.0)),
  };
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  for (const auto& source : sources) {
    for (int it = 0; it < 20; ++it) {
      const JointDistribution d =
          exact_joint(source, Setting(uni(gen)), Setting(uni(gen)));
      EXPECT_NO_THROW(d.validate());
    }
  }
}

TEST(ExactJoint, SchulmanSingleUnsupported) {
  const SourceParams source = SourceParams::schulman_single(0.1, 1000);
  EXPECT_THROW(exact_joint(source, Setting(0.0), Setting(1.0)),
               std::invalid_argument);
}

TEST(Mixture, ExactJointIsPointwiseMixture) {
  const SourceParams first = SourceParams::wharton_pair(
      {1.0, 0.0, 0.0, 0.0}, SpinRelation::parallel, 0.0);
  const SourceParams second = SourceParams::toy_mi(+1);
  const double a = 0.37;
  const SourceParams mixed = SourceParams::mixture(a, first, second);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  for (int it = 0; it < 50; ++it) {
    const Setting I(uni(gen));
    const Setting J(uni(gen));
    const JointDistribution d1 = exact_joint(first, I, J);
    const JointDistribution d2 = exact_joint(second, I, J);
    const JointDistribution dm = exact_joint(mixed, I, J);
    EXPECT_NEAR(dm.p_pp, a * d1.p_pp + (1 - a) * d2.p_pp, kTol);
    EXPECT_NEAR(dm.p_pm, a * d1.p_pm + (1 - a) * d2.p_pm, kTol);
    EXPECT_NEAR(dm.p_mp, a * d1.p_mp + (1 - a) * d2.p_mp, kTol);
    EXPECT_NEAR(dm.p_mm, a * d1.p_mm + (1 - a) * d2.p_mm, kTol);
  }
}

TEST(Predicates, OiHoldsForToyAndWharton) {
  const Setting I(0.0);
  const Setting J(kPi / 4);
  EXPECT_TRUE(oi_holds(SourceParams::toy_mi(+1), I, J));
  EXPECT_TRUE(oi_holds(
      SourceParams::wharton_pair({0.25, 0.25, 0.25, 0.25},
                                 SpinRelation::parallel, 0.0),
      I, J));
  EXPECT_TRUE(oi_holds(
      SourceParams::wharton_pair({0.1, 0.2, 0.3, 0.4},
                                 SpinRelation::antiparallel, 0.15),
      I, J));
}

TEST(Predicates, OiFailsForQuantumCorrelated) {
  EXPECT_FALSE(oi_holds(SourceParams::quantum_correlated(+1), Setting(0.0),
                        Setting(kPi / 4)));
}

TEST(Predicates, PiHoldsForAllBuiltIns) {
  const Setting I(0.1);
  const Setting J(0.9);
  const Setting I2(1.7);
  const Setting J2(2.6);
  EXPECT_TRUE(pi_holds(SourceParams::quantum_correlated(+1), I, J, I2, J2));
  EXPECT_TRUE(pi_holds(SourceParams::toy_mi(+1), I, J, I2, J2));
  EXPECT_TRUE(pi_holds(
      SourceParams::wharton_pair({0.2, 0.3, 0.4, 0.1},
                                 SpinRelation::parallel, 0.07),
      I, J, I2, J2));
}

TEST(Predicates, MiHoldsOnlyForQuantumCorrelated) {
  const std::vector<std::pair<Setting, Setting>> pairs = {
      {Setting(0.0), Setting(kPi / 4)},
      {Setting(0.0), Setting(kPi / 3)},
      {Setting(1.0), Setting(2.0)},
  };
  EXPECT_TRUE(mi_holds(SourceParams::quantum_correlated(+1), pairs));
  EXPECT_FALSE(mi_holds(SourceParams::toy_mi(+1), pairs));
  EXPECT_FALSE(mi_holds(
      SourceParams::wharton_pair({0.25, 0.25, 0.25, 0.25},
                                 SpinRelation::parallel, 0.0),
      pairs));
}

TEST(SamplePair, DeterministicGivenSeedAndStream) {
  const SourceParams source = SourceParams::wharton_pair(
      {0.25, 0.25, 0.25, 0.25}, SpinRelation::parallel, 0.0);
  const Setting I(0.0);
  const Setting J(kPi / 4);
  std::vector<OutcomePair> first, second;
  for (int run = 0; run < 2; ++run) {
    RngStream rng(1234, "samples");
    auto& dst = run == 0 ? first : second;
    for (int i = 0; i < 200; ++i) dst.push_back(sample_pair(source, I, J, rng));
  }
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(first[i].a, second[i].a);
    EXPECT_EQ(first[i].b, second[i].b);
  }
}

TEST(SamplePair, HomogeneousSourceAlwaysPlusOnAlice) {
  const SourceParams source = SourceParams::wharton_pair(
      {1.0, 0.0, 0.0, 0.0}, SpinRelation::parallel, 0.0);
  RngStream rng(5, "homog");
  const PairSampler sampler(source, Setting(0.0), Setting(1.1));
  for (int i = 0; i < 2000; ++i) {
    EXPECT_EQ(sampler.sample(rng).a, +1);
  }
}

TEST(SamplePair, FrequenciesMatchExactJointWithinHoeffding) {
  const std::vector<SourceParams> sources = {
      SourceParams::quantum_correlated(+1),
      SourceParams::toy_mi(+1),
      SourceParams::wharton_pair({0.4, 0.1, 0.3, 0.2},
                                 SpinRelation::parallel, 0.05),
  };
  const Setting I(0.3);
  const Setting J(0.3 + kPi / 4);
  const long n = 1000000;
  const double band = hoeffding_half_width_prob(n, 0.9999);
  int source_index = 0;
  for (const auto& source : sources) {
    const JointDistribution expected = exact_joint(source, I, J);
    RngStream rng(777, "freq/" + std::to_string(source_index++));
    const PairSampler sampler(source, I, J);
    long counts[2][2] = {{0, 0}, {0, 0}};
    for (long i = 0; i < n; ++i) {
      const OutcomePair o = sampler.sample(rng);
      ++counts[o.a == +1 ? 0 : 1][o.b == +1 ? 0 : 1];
    }
    EXPECT_NEAR(counts[0][0] / double(n), expected.p_pp, band);
    EXPECT_NEAR(counts[0][1] / double(n), expected.p_pm, band);
    EXPECT_NEAR(counts[1][0] / double(n), expected.p_mp, band);
    EXPECT_NEAR(counts[1][1] / double(n), expected.p_mm, band);
  }
}

TEST(SamplePair, HiddenStatesLoggable) {
  const SourceParams source = SourceParams::toy_mi(+1);
  const Setting I(0.0);
  const Setting J(0.5);
  const PairSampler sampler(source, I, J);
  RngStream rng(3, "logged");
  for (int i = 0; i < 100; ++i) {
    const HiddenState* state = nullptr;
    const OutcomePair o = sampler.sample_logged(rng, state);
    ASSERT_NE(state, nullptr);
    const auto& jv = std::get<JointValueLambda>(*state);
    EXPECT_EQ(o.a, jv.value.a);
    EXPECT_EQ(o.b, jv.value.b);
  }
}

TEST(SubEnsembles, PreparabilityFlags) {
  EXPECT_FALSE(sub_ensembles_preparable(SourceParams::quantum_correlated(+1)));
  EXPECT_FALSE(sub_ensembles_preparable(SourceParams::toy_mi(+1)));
  EXPECT_TRUE(sub_ensembles_preparable(SourceParams::wharton_pair(
      {1.0, 0.0, 0.0, 0.0}, SpinRelation::parallel, 0.0)));
}

}  // namespace
