#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bellhv/estimators.hpp"
#include "bellhv/geometry.hpp"
#include "bellhv/models.hpp"

namespace bellhv {

// Maximal |<A>| compatible with PI + MI given an average chain slack delta
// over a 2n-link chain.
inline double thm0prime_bound(int n, double delta) {
  if (n < 1) throw std::invalid_argument("thm0prime_bound: n must be >= 1");
  if (!(delta >= 0.0)) {
    throw std::invalid_argument("thm0prime_bound: delta must be >= 0");
  }
  return 2.0 * n * delta;
}

enum class EquiprobVerdict { signalling, no_violation, inconclusive };

inline const char* equiprob_verdict_name(EquiprobVerdict v) {
  switch (v) {
    case EquiprobVerdict::signalling: return "signalling";
    case EquiprobVerdict::no_violation: return "no_violation";
    case EquiprobVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

// Compares a measured marginal against the chain bound 2n*delta_hat, with
// Hoeffding margins pushed in the conservative direction on both sides.
inline EquiprobVerdict thm1prime_detect(const ChainStats& stats,
                                        const CorrelatorEstimate& marginal,
                                        int n) {
  if (stats.n != n) {
    throw std::invalid_argument("thm1prime_detect: chain length mismatch");
  }
  if (!stats.uniform_orientation) {
    throw std::invalid_argument(
        "thm1prime_detect: mixed-orientation chain; the bound needs one "
        "orientation for all links");
  }
  const double margin = stats.max_half_width;
  const double m = std::fabs(marginal.value);
  const double upper_bound = 2.0 * n * (stats.delta_hat + margin);
  const double lower_bound = 2.0 * n * (stats.delta_hat - margin);
  if (m - marginal.half_width > upper_bound) return EquiprobVerdict::signalling;
  if (m + marginal.half_width <= lower_bound) {
    return EquiprobVerdict::no_violation;
  }
  return EquiprobVerdict::inconclusive;
}

// Guaranteed minimum |<AB>| inside a sub-distribution of weight alpha when
// the parent satisfies |<AB>| >= 1 - 2*gamma. May be vacuous (negative).
inline double lemma2_bound(double gamma, double alpha) {
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument("lemma2_bound: gamma must be >= 0");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("lemma2_bound: alpha must be in (0, 1]");
  }
  return 1.0 - 2.0 * gamma / alpha;
}

// A reweighted part of a hidden-state distribution for one fixed setting
// pair, together with its complement and parent.
struct SubDistribution {
  double weight = 0.0;          // alpha
  HiddenSupport states;         // reweighted to sum to 1
  HiddenSupport complement;     // reweighted to sum to 1; empty if weight == 1
  HiddenSupport parent;

  // weight * sub + (1 - weight) * complement recombines to the parent.
  bool recombines(double tol = kProbTol) const {
    std::vector<double> recombined(parent.size(), 0.0);
    auto accumulate = [&](const HiddenSupport& part, double scale) {
      for (const WeightedState& ws : part) {
        const auto key = detail::state_key(ws.state);
        for (std::size_t i = 0; i < parent.size(); ++i) {
          if (detail::key_close(key, detail::state_key(parent[i].state),
                                kAngleTol)) {
            recombined[i] += scale * ws.weight;
            break;
          }
        }
      }
    };
    accumulate(states, weight);
    accumulate(complement, 1.0 - weight);
    for (std::size_t i = 0; i < parent.size(); ++i) {
      if (std::fabs(recombined[i] - parent[i].weight) > tol) return false;
    }
    return true;
  }
};

struct Lemma1Split {
  enum class Status { found, not_found, oi_violated, no_finite_support };

  Status status = Status::not_found;
  double chsh_value = 0.0;
  double epsilon = 0.0;
  // Set when status == found:
  int pair_index = -1;  // CHSH term index of the witnessing setting pair
  Side side = Side::A;
  SubDistribution sub;
  double sub_marginal = 0.0;
  std::string diagnostic;
};

namespace detail {

inline double side_marginal(const JointDistribution& d, Side side) {
  const auto [mean_a, mean_b] = means_of(d);
  return side == Side::A ? mean_a : mean_b;
}

}  // namespace detail

// Sign-split sub-distribution search behind the Bell-style bound: when the
// exact |CHSH| exceeds 4*epsilon under an OI model, splitting some setting
// pair's sigma by the sign of the per-state marginal yields a part of weight
// >= 1/2 whose marginal exceeds epsilon in magnitude.
inline Lemma1Split lemma1_split(const SourceParams& source,
                                const FourSettings& settings, int minus_index,
                                Side side, double epsilon) {
  Lemma1Split result;
  result.epsilon = epsilon;
  result.side = side;
  if (source.kind() == ModelKind::schulman_single) {
    result.status = Lemma1Split::Status::no_finite_support;
    result.diagnostic = "model has no enumerable bipartite hidden support";
    return result;
  }
  const auto pairs = settings.term_pairs();
  for (const auto& [I, J] : pairs) {
    if (!oi_holds(source, I, J)) {
      result.status = Lemma1Split::Status::oi_violated;
      result.diagnostic =
          "hidden-level Outcome Independence fails; the sign-split bound "
          "does not apply";
      return result;
    }
  }
  result.chsh_value = chsh(source, settings, minus_index, Mode::Exact()).s_value;

  for (int t = 0; t < 4; ++t) {
    const Setting& I = pairs[t].first;
    const Setting& J = pairs[t].second;
    const HiddenSupport parent = hidden_sigma(source, I, J);
    HiddenSupport non_negative;
    HiddenSupport negative;
    double pos_weight = 0.0;
    double pos_sum = 0.0;  // unnormalised sum of weight * marginal
    double neg_weight = 0.0;
    double neg_sum = 0.0;
    for (const WeightedState& ws : parent) {
      const double m =
          detail::side_marginal(outcome_dist(ws.state, I, J), side);
      if (m >= 0.0) {
        non_negative.push_back(ws);
        pos_weight += ws.weight;
        pos_sum += ws.weight * m;
      } else {
        negative.push_back(ws);
        neg_weight += ws.weight;
        neg_sum += ws.weight * m;
      }
    }
    struct Candidate {
      double weight;
      double marginal;
      const HiddenSupport* part;
      const HiddenSupport* rest;
    };
    std::vector<Candidate> candidates;
    if (pos_weight > 0.0) {
      candidates.push_back(
          {pos_weight, pos_sum / pos_weight, &non_negative, &negative});
    }
    if (neg_weight > 0.0) {
      candidates.push_back(
          {neg_weight, neg_sum / neg_weight, &negative, &non_negative});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& x, const Candidate& y) {
                if (x.weight != y.weight) return x.weight > y.weight;
                return std::fabs(x.marginal) > std::fabs(y.marginal);
              });
    for (const Candidate& c : candidates) {
      if (c.weight < 0.5 - kProbTol) continue;
      if (std::fabs(c.marginal) > epsilon) {
        result.status = Lemma1Split::Status::found;
        result.pair_index = t;
        result.sub_marginal = c.marginal;
        result.sub.weight = c.weight;
        result.sub.parent = parent;
        result.sub.states = *c.part;
        for (auto& ws : result.sub.states) ws.weight /= c.weight;
        result.sub.complement = *c.rest;
        if (c.weight < 1.0) {
          for (auto& ws : result.sub.complement) ws.weight /= (1.0 - c.weight);
        }
        return result;
      }
    }
  }
  result.status = Lemma1Split::Status::not_found;
  if (std::fabs(result.chsh_value) > 4.0 * epsilon) {
    throw std::logic_error(
        "lemma1_split: |CHSH| > 4*epsilon but no qualifying sign split "
        "exists; this contradicts the sign-split bound for OI models");
  }
  return result;
}

enum class CertVerdict { signalling_certified, premises_not_met };

inline const char* cert_verdict_name(CertVerdict v) {
  return v == CertVerdict::signalling_certified ? "signalling_certified"
                                                : "premises_not_met";
}

// Full certification record: chain statistics, CHSH value, the derived
// epsilon-hat and gamma-hat with their margins, and the witnessing
// sub-distribution when one is attachable.
struct CertificationReport {
  int n = 0;
  ChainStats chain;
  ChshEstimate chsh_est;
  double gamma_hat = 0.0;    // delta_hat plus margin in MC mode
  double epsilon_hat = 0.0;  // (|S| - margin) / 4
  bool condition_met = false;
  double ratio = 0.0;  // epsilon_hat / (4 n gamma_hat)
  bool oi_ok = false;
  bool preparable = false;
  std::optional<Lemma1Split> witness;
  CertVerdict verdict = CertVerdict::premises_not_met;
  std::string note;
};

inline CertificationReport thm2_certify(const SourceParams& source,
                                        const Theorem2PrimeLayout& layout,
                                        const Mode& mode) {
  CertificationReport report;
  report.n = layout.chain().n();

  report.chain = chain_stats(source, layout.chain(), mode);
  report.gamma_hat = report.chain.delta_hat +
                     (mode.exact ? 0.0 : report.chain.max_half_width);

  FourSettings settings;
  settings.alice = Setting(layout.alice_unprimed(), "A0");
  settings.alice_prime = Setting(layout.alice_primed(), "A3");
  settings.bob = Setting(layout.bob_unprimed(), "B1");
  settings.bob_prime = Setting(layout.bob_primed(), "B4");
  report.chsh_est = chsh(source, settings, Theorem2PrimeLayout::kMinusIndex,
                         mode);
  report.epsilon_hat =
      (std::fabs(report.chsh_est.s_value) - report.chsh_est.margin()) / 4.0;

  const double factor = 4.0 * report.n;
  report.condition_met = report.epsilon_hat >= factor * report.gamma_hat;
  report.ratio = report.gamma_hat > 0.0
                     ? report.epsilon_hat / (factor * report.gamma_hat)
                     : std::numeric_limits<double>::infinity();

  report.oi_ok = true;
  for (const auto& [I, J] : settings.term_pairs()) {
    if (!oi_holds(source, I, J)) {
      report.oi_ok = false;
      break;
    }
  }
  report.preparable = sub_ensembles_preparable(source);

  if (report.oi_ok && source.kind() != ModelKind::schulman_single) {
    Lemma1Split split =
        lemma1_split(source, settings, Theorem2PrimeLayout::kMinusIndex,
                     Side::A, report.epsilon_hat);
    if (split.status != Lemma1Split::Status::found) {
      split = lemma1_split(source, settings, Theorem2PrimeLayout::kMinusIndex,
                           Side::B, report.epsilon_hat);
    }
    report.witness = std::move(split);
  } else if (!report.oi_ok) {
    report.note =
        "hidden-level OI is violated; no sub-distribution witness applies";
  }

  const bool witness_found =
      report.witness.has_value() &&
      report.witness->status == Lemma1Split::Status::found;
  report.verdict = (report.condition_met && witness_found)
                       ? CertVerdict::signalling_certified
                       : CertVerdict::premises_not_met;
  return report;
}

}  // namespace bellhv
