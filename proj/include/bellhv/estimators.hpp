#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bellhv/geometry.hpp"
#include "bellhv/models.hpp"
#include "bellhv/parallel.hpp"
#include "bellhv/rng.hpp"

namespace bellhv {

// p(A=B) - p(A!=B).
inline double correlator(const JointDistribution& d) {
  return detail::corr_of(d);
}

// (<A>, <B>).
inline std::pair<double, double> marginals(const JointDistribution& d) {
  return detail::means_of(d);
}

// Two-sided Hoeffding half-width for an empirical mean of [0,1] samples.
inline double hoeffding_half_width_prob(long n, double confidence) {
  if (n < 1) throw std::invalid_argument("hoeffding: n must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("hoeffding: confidence must be in (0,1)");
  }
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * n));
}

// Same bound scaled for means of +-1 samples (range 2).
inline double hoeffding_half_width_pm1(long n, double confidence) {
  return 2.0 * hoeffding_half_width_prob(n, confidence);
}

// A correlator or marginal value with its guaranteed confidence band.
// Exact values carry half_width 0 and n_samples 0.
struct CorrelatorEstimate {
  double value = 0.0;
  long n_samples = 0;
  double half_width = 0.0;
  double confidence = 1.0;

  static CorrelatorEstimate exact(double v) { return {v, 0, 0.0, 1.0}; }

  static CorrelatorEstimate from_samples(double v, long n, double confidence) {
    return {v, n, hoeffding_half_width_pm1(n, confidence), confidence};
  }
};

// Evaluation mode shared by the estimators: exact mixtures over the hidden
// support, or seeded Monte Carlo with Hoeffding bands.
struct Mode {
  bool exact = true;
  long n_samples = 0;
  double confidence = 0.99;
  std::uint64_t seed = 0;

  static Mode Exact() { return Mode{}; }

  static Mode Mc(long n_samples, double confidence, std::uint64_t seed) {
    if (n_samples < 1) {
      throw std::invalid_argument("Mode::Mc: n_samples must be >= 1");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
      throw std::invalid_argument("Mode::Mc: confidence must be in (0,1)");
    }
    Mode m;
    m.exact = false;
    m.n_samples = n_samples;
    m.confidence = confidence;
    m.seed = seed;
    return m;
  }
};

struct McJointResult {
  JointDistribution frequencies;
  long n_samples = 0;
  double confidence = 0.0;
  double cell_half_width = 0.0;  // band for each empirical probability
  CorrelatorEstimate correlator_est;
  CorrelatorEstimate mean_a_est;
  CorrelatorEstimate mean_b_est;
};

// Empirical joint from n two-stage samples on a named stream.
inline McJointResult mc_joint(const SourceParams& source, const Setting& I,
                              const Setting& J, long n, double confidence,
                              RngStream& rng) {
  if (n < 1) throw std::invalid_argument("mc_joint: n must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("mc_joint: confidence must be in (0,1)");
  }
  const PairSampler sampler(source, I, J);
  long counts[2][2] = {{0, 0}, {0, 0}};
  for (long i = 0; i < n; ++i) {
    const OutcomePair o = sampler.sample(rng);
    ++counts[o.a == +1 ? 0 : 1][o.b == +1 ? 0 : 1];
  }
  McJointResult r;
  const double inv = 1.0 / static_cast<double>(n);
  r.frequencies.p_pp = counts[0][0] * inv;
  r.frequencies.p_pm = counts[0][1] * inv;
  r.frequencies.p_mp = counts[1][0] * inv;
  r.frequencies.p_mm = counts[1][1] * inv;
  r.n_samples = n;
  r.confidence = confidence;
  r.cell_half_width = hoeffding_half_width_prob(n, confidence);
  r.correlator_est = CorrelatorEstimate::from_samples(
      correlator(r.frequencies), n, confidence);
  const auto [mean_a, mean_b] = marginals(r.frequencies);
  r.mean_a_est = CorrelatorEstimate::from_samples(mean_a, n, confidence);
  r.mean_b_est = CorrelatorEstimate::from_samples(mean_b, n, confidence);
  return r;
}

// Correlator estimate for one setting pair under a mode, on a named stream.
inline CorrelatorEstimate estimate_correlator(const SourceParams& source,
                                              const Setting& I,
                                              const Setting& J,
                                              const Mode& mode,
                                              const std::string& stream_name) {
  if (mode.exact) {
    return CorrelatorEstimate::exact(correlator(exact_joint(source, I, J)));
  }
  RngStream rng(mode.seed, stream_name);
  return mc_joint(source, I, J, mode.n_samples, mode.confidence, rng)
      .correlator_est;
}

// The four settings of a CHSH run: I, I' on Alice's side, J, J' on Bob's.
struct FourSettings {
  Setting alice;        // I
  Setting alice_prime;  // I'
  Setting bob;          // J
  Setting bob_prime;    // J'

  // Setting pairs in term order (I,J), (I',J), (I,J'), (I',J').
  std::array<std::pair<Setting, Setting>, 4> term_pairs() const {
    return {std::pair<Setting, Setting>{alice, bob},
            {alice_prime, bob},
            {alice, bob_prime},
            {alice_prime, bob_prime}};
  }

  static std::string term_label(int t) {
    static const char* names[4] = {"I-J", "I'-J", "I-J'", "I'-J'"};
    return names[t];
  }
};

struct ChshEstimate {
  std::array<CorrelatorEstimate, 4> terms;
  std::array<int, 4> signs;  // exactly one -1
  int minus_index = 3;
  double s_value = 0.0;

  double margin() const {
    double m = 0.0;
    for (const auto& t : terms) m += t.half_width;
    return m;
  }
};

// Signed CHSH combination; each term is evaluated on its own setting pair
// and, in Monte Carlo mode, on its own substream.
inline ChshEstimate chsh(const SourceParams& source,
                         const FourSettings& settings, int minus_index,
                         const Mode& mode) {
  if (minus_index < 0 || minus_index > 3) {
    throw std::invalid_argument("chsh: minus_index must be one of 0..3");
  }
  ChshEstimate est;
  est.minus_index = minus_index;
  const auto pairs = settings.term_pairs();
  parallel_for(4, [&](std::size_t t) {
    est.terms[t] =
        estimate_correlator(source, pairs[t].first, pairs[t].second, mode,
                            "chsh-term/" + std::to_string(t));
  });
  est.s_value = 0.0;
  for (int t = 0; t < 4; ++t) {
    est.signs[t] = (t == minus_index) ? -1 : +1;
    est.s_value += est.signs[t] * est.terms[t].value;
  }
  return est;
}

// Validates a sign vector from external input: exactly one minus.
inline int minus_index_from_signs(const std::array<int, 4>& signs) {
  int minus = -1;
  for (int t = 0; t < 4; ++t) {
    if (signs[t] == -1) {
      if (minus >= 0) {
        throw std::invalid_argument("chsh: duplicate minus sign positions");
      }
      minus = t;
    } else if (signs[t] != +1) {
      throw std::invalid_argument("chsh: signs must be +-1");
    }
  }
  if (minus < 0) {
    throw std::invalid_argument("chsh: exactly one sign must be -1");
  }
  return minus;
}

enum class ChainOrientation { correlated, anticorrelated };

// Per-link correlations of a chain, the orientation, and the inferred
// average slack delta_hat = (1 - mean signed correlation) / 2.
struct ChainStats {
  int n = 0;
  std::vector<double> link_correlations;  // closing link already negated
  std::vector<double> half_widths;
  std::vector<std::string> labels;
  std::vector<double> angles;
  ChainOrientation orientation = ChainOrientation::correlated;
  bool uniform_orientation = true;
  double mean_signed_correlation = 0.0;
  double delta_hat = 0.0;
  double max_half_width = 0.0;
  long n_samples_per_link = 0;
  double confidence = 1.0;
};

inline ChainStats chain_stats(const SourceParams& source,
                              const ChainSpec& chain, const Mode& mode) {
  const auto& links = chain.links();
  ChainStats stats;
  stats.n = chain.n();
  stats.link_correlations.resize(links.size());
  stats.half_widths.resize(links.size());
  stats.labels.resize(links.size());
  stats.angles.resize(links.size());
  stats.n_samples_per_link = mode.exact ? 0 : mode.n_samples;
  stats.confidence = mode.exact ? 1.0 : mode.confidence;
  parallel_for(links.size(), [&](std::size_t i) {
    const ChainLink& link = links[i];
    const CorrelatorEstimate est = estimate_correlator(
        source, Setting(link.alice), Setting(link.bob), mode,
        "chain-link/" + std::to_string(i));
    stats.link_correlations[i] = link.flip_sign ? -est.value : est.value;
    stats.half_widths[i] = est.half_width;
    stats.labels[i] = link.label;
    stats.angles[i] = link.subtended;
  });
  double sum = 0.0;
  for (double c : stats.link_correlations) sum += c;
  const double mean = sum / static_cast<double>(links.size());
  stats.orientation = mean >= 0.0 ? ChainOrientation::correlated
                                  : ChainOrientation::anticorrelated;
  const double orient =
      stats.orientation == ChainOrientation::correlated ? 1.0 : -1.0;
  stats.uniform_orientation = true;
  for (double c : stats.link_correlations) {
    if (orient * c < 0.0) stats.uniform_orientation = false;
  }
  stats.mean_signed_correlation = orient * mean;
  stats.delta_hat = (1.0 - stats.mean_signed_correlation) / 2.0;
  stats.max_half_width = 0.0;
  for (double h : stats.half_widths) {
    stats.max_half_width = std::max(stats.max_half_width, h);
  }
  return stats;
}

}  // namespace bellhv
