#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "bellhv/geometry.hpp"
#include "bellhv/rng.hpp"

namespace bellhv {

inline constexpr double kProbTol = 1e-12;

struct OutcomePair {
  int a;  // +1 or -1
  int b;  // +1 or -1
};

// Probabilities over the four outcome pairs (a,b) in
// {(+,+), (+,-), (-,+), (-,-)}.
struct JointDistribution {
  double p_pp = 0.0;
  double p_pm = 0.0;
  double p_mp = 0.0;
  double p_mm = 0.0;

  double prob(int a, int b) const {
    if (a == +1) return b == +1 ? p_pp : p_pm;
    return b == +1 ? p_mp : p_mm;
  }

  void validate(double tol = kProbTol) const {
    const double entries[4] = {p_pp, p_pm, p_mp, p_mm};
    double sum = 0.0;
    for (double p : entries) {
      if (!(p >= -tol)) {
        throw std::invalid_argument("JointDistribution: negative entry");
      }
      sum += p;
    }
    if (std::fabs(sum - 1.0) > tol) {
      throw std::invalid_argument("JointDistribution: entries must sum to 1");
    }
  }
};

namespace detail {

inline double corr_of(const JointDistribution& d) {
  return d.p_pp + d.p_mm - d.p_pm - d.p_mp;
}

inline std::pair<double, double> means_of(const JointDistribution& d) {
  return {d.p_pp + d.p_pm - d.p_mp - d.p_mm,
          d.p_pp + d.p_mp - d.p_pm - d.p_mm};
}

}  // namespace detail

// A measurement setting: the axis plus an opaque context label. Built-in
// models depend only on the axis; the label preserves the distinction
// between a measured quantity and the full context it is measured in.
struct Setting {
  Direction direction;
  std::string context_label;

  Setting() = default;
  explicit Setting(Direction d, std::string label = {})
      : direction(d), context_label(std::move(label)) {}
  explicit Setting(double angle_rad, std::string label = {})
      : direction(angle_rad), context_label(std::move(label)) {}
};

// --- Source parameterisations -----------------------------------------------

enum class SpinRelation { parallel, antiparallel };
enum class WhartonTag { Aplus, Bplus, Aminus, Bminus };

inline const char* wharton_tag_name(WhartonTag t) {
  switch (t) {
    case WhartonTag::Aplus: return "Aplus";
    case WhartonTag::Bplus: return "Bplus";
    case WhartonTag::Aminus: return "Aminus";
    case WhartonTag::Bminus: return "Bminus";
  }
  return "?";
}

struct QuantumCorrelatedParams {
  int correlation_sign = +1;  // +1 perfect correlations, -1 anticorrelations
};

struct ToyMiParams {
  int correlation_sign = +1;
};

struct SchulmanSingleParams {
  double gamma_s = 0.1;
  long truncation = 100000;
};

struct WhartonPairParams {
  double w_aplus = 0.25;
  double w_bplus = 0.25;
  double w_aminus = 0.25;
  double w_bminus = 0.25;
  SpinRelation spin_relation = SpinRelation::parallel;
  double gamma_s = 0.0;
  long truncation = 100000;

  std::array<double, 4> weights() const {
    return {w_aplus, w_bplus, w_aminus, w_bminus};
  }

  // Weight family that recovers the Born rule: w_A+ = w_A-, w_B+ = w_B-,
  // w_A+ + w_B- = 1/2.
  bool born_family(double tol = 1e-9) const {
    return std::fabs(w_aplus - w_aminus) <= tol &&
           std::fabs(w_bplus - w_bminus) <= tol &&
           std::fabs(w_aplus + w_bminus - 0.5) <= tol;
  }
};

class SourceParams;

struct MixtureParams {
  double weight = 0.5;  // weight of the first component
  std::shared_ptr<const SourceParams> first;
  std::shared_ptr<const SourceParams> second;
};

enum class ModelKind {
  quantum_correlated,
  toy_mi,
  schulman_single,
  wharton_pair,
  mixture,
};

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::quantum_correlated: return "quantum_correlated";
    case ModelKind::toy_mi: return "toy_mi";
    case ModelKind::schulman_single: return "schulman_single";
    case ModelKind::wharton_pair: return "wharton_pair";
    case ModelKind::mixture: return "mixture";
  }
  return "?";
}

// Immutable description of Charlie's preparation context K.
class SourceParams {
 public:
  static SourceParams quantum_correlated(int correlation_sign) {
    check_sign(correlation_sign);
    return SourceParams(QuantumCorrelatedParams{correlation_sign});
  }

  static SourceParams toy_mi(int correlation_sign) {
    check_sign(correlation_sign);
    return SourceParams(ToyMiParams{correlation_sign});
  }

  static SourceParams schulman_single(double gamma_s, long truncation) {
    if (!(gamma_s >= 0.0)) {
      throw std::invalid_argument("schulman_single: gamma_s must be >= 0");
    }
    if (truncation < 1) {
      throw std::invalid_argument("schulman_single: truncation must be >= 1");
    }
    return SourceParams(SchulmanSingleParams{gamma_s, truncation});
  }

  static SourceParams wharton_pair(const std::array<double, 4>& weights,
                                   SpinRelation relation, double gamma_s,
                                   long truncation = 100000) {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) {
        throw std::invalid_argument("wharton_pair: weights must be >= 0");
      }
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("wharton_pair: weights must sum to 1");
    }
    if (!(gamma_s >= 0.0)) {
      throw std::invalid_argument("wharton_pair: gamma_s must be >= 0");
    }
    if (truncation < 1) {
      throw std::invalid_argument("wharton_pair: truncation must be >= 1");
    }
    WhartonPairParams p;
    p.w_aplus = weights[0] / sum;
    p.w_bplus = weights[1] / sum;
    p.w_aminus = weights[2] / sum;
    p.w_bminus = weights[3] / sum;
    p.spin_relation = relation;
    p.gamma_s = gamma_s;
    p.truncation = truncation;
    return SourceParams(p);
  }

  // Mixture of two sources with weight `a` on `first`, mixing the hidden
  // distributions pointwise for every setting pair.
  static SourceParams mixture(double a, SourceParams first,
                              SourceParams second) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("mixture: weight must be in (0, 1)");
    }
    MixtureParams m;
    m.weight = a;
    m.first = std::make_shared<const SourceParams>(std::move(first));
    m.second = std::make_shared<const SourceParams>(std::move(second));
    return SourceParams(std::move(m));
  }

  ModelKind kind() const { return static_cast<ModelKind>(v_.index()); }

  const QuantumCorrelatedParams& as_quantum() const {
    return std::get<QuantumCorrelatedParams>(v_);
  }
  const ToyMiParams& as_toy() const { return std::get<ToyMiParams>(v_); }
  const SchulmanSingleParams& as_schulman() const {
    return std::get<SchulmanSingleParams>(v_);
  }
  const WhartonPairParams& as_wharton() const {
    return std::get<WhartonPairParams>(v_);
  }
  const MixtureParams& as_mixture() const {
    return std::get<MixtureParams>(v_);
  }

 private:
  template <typename T>
  explicit SourceParams(T params) : v_(std::move(params)) {}

  static void check_sign(int sign) {
    if (sign != +1 && sign != -1) {
      throw std::invalid_argument("correlation_sign must be +1 or -1");
    }
  }

  std::variant<QuantumCorrelatedParams, ToyMiParams, SchulmanSingleParams,
               WhartonPairParams, MixtureParams>
      v_;
};

// --- Hidden states -----------------------------------------------------------

// One-point hidden space: the preparation itself is the hidden state.
struct TrivialLambda {
  int correlation_sign = +1;
};

// Hidden state of the toy model: the joint outcome values themselves.
struct JointValueLambda {
  OutcomePair value;
};

// Hidden state of the two-particle model: both hidden spins resolved against
// the measurement axes that selected them. The tagged particle's outcome is
// the tagged sign; the other particle's outcome follows the single-particle
// rotation statistics at its own axis.
struct WhartonLambda {
  WhartonTag tag;
  double spin_a_angle;  // direction Alice's hidden spin points in
  double spin_b_angle;  // direction Bob's hidden spin points in
  double gamma_s;
};

using HiddenState =
    std::variant<TrivialLambda, JointValueLambda, WhartonLambda>;

struct WeightedState {
  HiddenState state;
  double weight;
};

using HiddenSupport = std::vector<WeightedState>;

inline std::string hidden_state_label(const HiddenState& state) {
  if (std::holds_alternative<TrivialLambda>(state)) return "trivial";
  if (const auto* jv = std::get_if<JointValueLambda>(&state)) {
    auto sign = [](int v) { return v > 0 ? "+" : "-"; };
    return std::string("(") + sign(jv->value.a) + "," + sign(jv->value.b) +
           ")";
  }
  return wharton_tag_name(std::get<WhartonLambda>(state).tag);
}

// --- Elementary distributions ------------------------------------------------

// Joint outcome probabilities of a maximally entangled pair measured along
// axes theta apart: p(A=B) = cos^2(theta/2) for perfect correlations, with
// the roles swapped for anticorrelations. Marginals are exactly 1/2.
inline JointDistribution quantum_joint(double theta, int correlation_sign) {
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw std::domain_error("quantum_joint: theta must lie in [0, pi]");
  }
  if (correlation_sign != +1 && correlation_sign != -1) {
    throw std::domain_error("quantum_joint: correlation_sign must be +-1");
  }
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const double same = 0.5 * c * c;
  const double diff = 0.5 * s * s;
  JointDistribution d;
  if (correlation_sign == +1) {
    d.p_pp = same;
    d.p_mm = same;
    d.p_pm = diff;
    d.p_mp = diff;
  } else {
    d.p_pm = same;
    d.p_mp = same;
    d.p_pp = diff;
    d.p_mm = diff;
  }
  return d;
}

// --- Schulman single-particle statistics -------------------------------------

// Weight of an anomalous rotation by net angle alpha.
inline double schulman_weight(double alpha, double gamma_s) {
  if (!(gamma_s > 0.0)) {
    throw std::domain_error("schulman_weight: gamma_s must be > 0");
  }
  return 1.0 / (alpha * alpha + gamma_s * gamma_s);
}

// Ratio of the summed rotation weights for net angles theta vs pi+theta,
// truncated at winding number N.
inline double schulman_ratio_truncated(double theta, double gamma_s, long N) {
  if (!(gamma_s > 0.0)) {
    throw std::domain_error("schulman_ratio: gamma_s must be > 0");
  }
  if (N < 1) throw std::domain_error("schulman_ratio: N must be >= 1");
  double num = 0.0;
  double den = 0.0;
  for (long n = -N; n <= N; ++n) {
    const double base = kTwoPi * static_cast<double>(n);
    num += schulman_weight(base + theta, gamma_s);
    den += schulman_weight(base + kPi + theta, gamma_s);
  }
  return num / den;
}

// Closed form of the same ratio.
inline double schulman_ratio_closed(double theta, double gamma_s) {
  if (!(gamma_s > 0.0)) {
    throw std::domain_error("schulman_ratio: gamma_s must be > 0");
  }
  const double c2 = std::cos(theta / 2.0) * std::cos(theta / 2.0);
  const double s2 = std::sin(theta / 2.0) * std::sin(theta / 2.0);
  const double t2 = std::tanh(gamma_s / 2.0) * std::tanh(gamma_s / 2.0);
  return (c2 + s2 * t2) / (s2 + c2 * t2);
}

// Normalised probabilities (p_same, p_flip) for outcomes along theta vs
// pi+theta. Equivalent to (r/(1+r), 1/(1+r)) with r the closed-form ratio,
// written so the gamma_s=0 limit returns (cos^2(theta/2), sin^2(theta/2))
// exactly and no intermediate quantity degenerates.
inline std::pair<double, double> schulman_single_probs(double theta,
                                                       double gamma_s) {
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw std::domain_error("schulman_single_probs: theta must be in [0, pi]");
  }
  if (!(gamma_s >= 0.0)) {
    throw std::domain_error("schulman_single_probs: gamma_s must be >= 0");
  }
  const double c2 = std::cos(theta / 2.0) * std::cos(theta / 2.0);
  const double s2 = std::sin(theta / 2.0) * std::sin(theta / 2.0);
  const double t2 = std::tanh(gamma_s / 2.0) * std::tanh(gamma_s / 2.0);
  const double norm = 1.0 + t2;
  return {(c2 + s2 * t2) / norm, (s2 + c2 * t2) / norm};
}

// --- Hidden-state distributions (sigma) --------------------------------------

// Toy model: sigma concentrated on the four joint outcome values with the
// quantum weights for the given axes; outcomes are then deterministic.
inline HiddenSupport toy_mi_sigma(const ToyMiParams& params, const Setting& I,
                                  const Setting& J) {
  const JointDistribution q = quantum_joint(
      angle_between(I.direction, J.direction), params.correlation_sign);
  HiddenSupport support;
  const std::array<std::pair<OutcomePair, double>, 4> cells = {
      std::pair<OutcomePair, double>{{+1, +1}, q.p_pp},
      {{+1, -1}, q.p_pm},
      {{-1, +1}, q.p_mp},
      {{-1, -1}, q.p_mm}};
  for (const auto& [value, weight] : cells) {
    if (weight > 0.0) {
      support.push_back({JointValueLambda{value}, weight});
    }
  }
  return support;
}

// Two-particle model: the four tagged hidden-spin pairs, resolved against
// the axes of I and J. The support itself moves with the settings.
inline HiddenSupport wharton_sigma(const WhartonPairParams& params,
                                   const Setting& I, const Setting& J) {
  const bool anti = params.spin_relation == SpinRelation::antiparallel;
  auto resolved = [&](WhartonTag tag) {
    WhartonLambda lambda;
    lambda.tag = tag;
    lambda.gamma_s = params.gamma_s;
    double tagged_axis = 0.0;
    double sign_shift = 0.0;  // pi if the tagged sign is minus
    bool tagged_is_alice = false;
    switch (tag) {
      case WhartonTag::Aplus: tagged_axis = I.direction.angle(); tagged_is_alice = true; break;
      case WhartonTag::Aminus: tagged_axis = I.direction.angle(); sign_shift = kPi; tagged_is_alice = true; break;
      case WhartonTag::Bplus: tagged_axis = J.direction.angle(); break;
      case WhartonTag::Bminus: tagged_axis = J.direction.angle(); sign_shift = kPi; break;
    }
    const double tagged_spin = Direction(tagged_axis + sign_shift).angle();
    const double other_spin =
        anti ? Direction(tagged_spin + kPi).angle() : tagged_spin;
    lambda.spin_a_angle = tagged_is_alice ? tagged_spin : other_spin;
    lambda.spin_b_angle = tagged_is_alice ? other_spin : tagged_spin;
    return lambda;
  };
  HiddenSupport support;
  const std::array<std::pair<WhartonTag, double>, 4> entries = {
      std::pair<WhartonTag, double>{WhartonTag::Aplus, params.w_aplus},
      {WhartonTag::Bplus, params.w_bplus},
      {WhartonTag::Aminus, params.w_aminus},
      {WhartonTag::Bminus, params.w_bminus}};
  for (const auto& [tag, weight] : entries) {
    if (weight > 0.0) {
      support.push_back({resolved(tag), weight});
    }
  }
  return support;
}

// Hidden-state distribution sigma_K^{IJ} for any source.
inline HiddenSupport hidden_sigma(const SourceParams& source, const Setting& I,
                                  const Setting& J) {
  switch (source.kind()) {
    case ModelKind::quantum_correlated:
      return {{TrivialLambda{source.as_quantum().correlation_sign}, 1.0}};
    case ModelKind::toy_mi:
      return toy_mi_sigma(source.as_toy(), I, J);
    case ModelKind::wharton_pair:
      return wharton_sigma(source.as_wharton(), I, J);
    case ModelKind::mixture: {
      const MixtureParams& m = source.as_mixture();
      HiddenSupport support = hidden_sigma(*m.first, I, J);
      for (auto& ws : support) ws.weight *= m.weight;
      HiddenSupport rest = hidden_sigma(*m.second, I, J);
      for (auto& ws : rest) {
        ws.weight *= (1.0 - m.weight);
        support.push_back(std::move(ws));
      }
      return support;
    }
    case ModelKind::schulman_single:
      throw std::invalid_argument(
          "hidden_sigma: schulman_single is a single-particle model without "
          "a bipartite hidden-state distribution");
  }
  throw std::logic_error("hidden_sigma: unknown model kind");
}

// --- Conditional outcome distributions p_lambda ------------------------------

// Conditional joint outcome distribution of a resolved two-particle hidden
// state. The tagged particle yields the tagged sign outright; the other
// follows the single-particle statistics at the angle between its hidden
// spin and its own axis. Outcomes are conditionally independent, and each
// side's conditional depends only on its own setting.
inline JointDistribution wharton_outcome_dist(const WhartonLambda& lambda,
                                              const Setting& I,
                                              const Setting& J) {
  const bool tagged_is_alice = lambda.tag == WhartonTag::Aplus ||
                               lambda.tag == WhartonTag::Aminus;
  const int tagged_sign = (lambda.tag == WhartonTag::Aplus ||
                           lambda.tag == WhartonTag::Bplus)
                              ? +1
                              : -1;
  double p_a_plus;
  double p_b_plus;
  if (tagged_is_alice) {
    p_a_plus = tagged_sign > 0 ? 1.0 : 0.0;
    const double psi =
        angle_between(Direction(lambda.spin_b_angle), J.direction);
    p_b_plus = schulman_single_probs(psi, lambda.gamma_s).first;
  } else {
    p_b_plus = tagged_sign > 0 ? 1.0 : 0.0;
    const double psi =
        angle_between(Direction(lambda.spin_a_angle), I.direction);
    p_a_plus = schulman_single_probs(psi, lambda.gamma_s).first;
  }
  JointDistribution d;
  d.p_pp = p_a_plus * p_b_plus;
  d.p_pm = p_a_plus * (1.0 - p_b_plus);
  d.p_mp = (1.0 - p_a_plus) * p_b_plus;
  d.p_mm = (1.0 - p_a_plus) * (1.0 - p_b_plus);
  return d;
}

// Conditional joint outcome distribution p_lambda^{IJ} for any hidden state.
inline JointDistribution outcome_dist(const HiddenState& lambda,
                                      const Setting& I, const Setting& J) {
  if (const auto* trivial = std::get_if<TrivialLambda>(&lambda)) {
    return quantum_joint(angle_between(I.direction, J.direction),
                         trivial->correlation_sign);
  }
  if (const auto* jv = std::get_if<JointValueLambda>(&lambda)) {
    JointDistribution d;
    if (jv->value.a == +1) {
      (jv->value.b == +1 ? d.p_pp : d.p_pm) = 1.0;
    } else {
      (jv->value.b == +1 ? d.p_mp : d.p_mm) = 1.0;
    }
    return d;
  }
  return wharton_outcome_dist(std::get<WhartonLambda>(lambda), I, J);
}

// --- Exact joints and sampling -----------------------------------------------

// Exact operational joint: the sigma-weighted mixture of the conditionals.
inline JointDistribution exact_joint(const SourceParams& source,
                                     const Setting& I, const Setting& J) {
  if (source.kind() == ModelKind::quantum_correlated) {
    return quantum_joint(angle_between(I.direction, J.direction),
                         source.as_quantum().correlation_sign);
  }
  if (source.kind() == ModelKind::schulman_single) {
    throw std::invalid_argument(
        "exact_joint: model without a bipartite exact evaluation");
  }
  JointDistribution mix;
  for (const WeightedState& ws : hidden_sigma(source, I, J)) {
    const JointDistribution d = outcome_dist(ws.state, I, J);
    mix.p_pp += ws.weight * d.p_pp;
    mix.p_pm += ws.weight * d.p_pm;
    mix.p_mp += ws.weight * d.p_mp;
    mix.p_mm += ws.weight * d.p_mm;
  }
  return mix;
}

// Two-stage sampler compiled once per (source, I, J); sampling then draws
// lambda first and the outcomes second, so hidden states can be logged.
class PairSampler {
 public:
  PairSampler(const SourceParams& source, const Setting& I, const Setting& J) {
    HiddenSupport support = hidden_sigma(source, I, J);
    double cum = 0.0;
    for (const WeightedState& ws : support) {
      Entry e;
      cum += ws.weight;
      e.cum_weight = cum;
      if (const auto* jv = std::get_if<JointValueLambda>(&ws.state)) {
        e.rule = Rule::deterministic;
        e.fixed = jv->value;
      } else if (const auto* wl = std::get_if<WhartonLambda>(&ws.state)) {
        e.rule = Rule::independent;
        const JointDistribution d = wharton_outcome_dist(*wl, I, J);
        e.p_a_plus = d.p_pp + d.p_pm;
        e.p_b_plus = d.p_pp + d.p_mp;
      } else {
        e.rule = Rule::four_cell;
        const JointDistribution d = outcome_dist(ws.state, I, J);
        e.c_pp = d.p_pp;
        e.c_pm = d.p_pp + d.p_pm;
        e.c_mp = d.p_pp + d.p_pm + d.p_mp;
      }
      e.state = ws.state;
      entries_.push_back(e);
    }
    if (entries_.empty()) {
      throw std::invalid_argument("PairSampler: empty hidden support");
    }
    entries_.back().cum_weight = 1.0;
  }

  OutcomePair sample(RngStream& rng) const {
    const HiddenState* ignored = nullptr;
    return sample_logged(rng, ignored);
  }

  OutcomePair sample_logged(RngStream& rng, const HiddenState*& state) const {
    const double u = rng.next_double();
    const Entry* e = &entries_.back();
    for (const Entry& candidate : entries_) {
      if (u < candidate.cum_weight) {
        e = &candidate;
        break;
      }
    }
    state = &e->state;
    switch (e->rule) {
      case Rule::deterministic:
        return e->fixed;
      case Rule::independent: {
        const int a = rng.next_double() < e->p_a_plus ? +1 : -1;
        const int b = rng.next_double() < e->p_b_plus ? +1 : -1;
        return {a, b};
      }
      case Rule::four_cell: {
        const double v = rng.next_double();
        if (v < e->c_pp) return {+1, +1};
        if (v < e->c_pm) return {+1, -1};
        if (v < e->c_mp) return {-1, +1};
        return {-1, -1};
      }
    }
    throw std::logic_error("PairSampler: unknown rule");
  }

 private:
  enum class Rule { deterministic, independent, four_cell };

  struct Entry {
    double cum_weight = 0.0;
    Rule rule = Rule::deterministic;
    OutcomePair fixed{+1, +1};
    double p_a_plus = 0.0;
    double p_b_plus = 0.0;
    double c_pp = 0.0, c_pm = 0.0, c_mp = 0.0;
    HiddenState state;
  };

  std::vector<Entry> entries_;
};

inline OutcomePair sample_pair(const SourceParams& source, const Setting& I,
                               const Setting& J, RngStream& rng) {
  return PairSampler(source, I, J).sample(rng);
}

// --- Locality predicates ------------------------------------------------------

// Outcome Independence at the hidden level: the conditional correlator
// factorises into the conditional marginals for every state in the support.
inline bool oi_holds(const SourceParams& source, const Setting& I,
                     const Setting& J, double tol = kProbTol) {
  for (const WeightedState& ws : hidden_sigma(source, I, J)) {
    const JointDistribution d = outcome_dist(ws.state, I, J);
    const auto [mean_a, mean_b] = detail::means_of(d);
    if (std::fabs(detail::corr_of(d) - mean_a * mean_b) > tol) return false;
  }
  return true;
}

// Parameter Independence at the hidden level: with lambda held fixed, each
// side's conditional marginal is unchanged when the distant setting changes.
inline bool pi_holds(const SourceParams& source, const Setting& I,
                     const Setting& J, const Setting& I_alt,
                     const Setting& J_alt, double tol = kProbTol) {
  for (const WeightedState& ws : hidden_sigma(source, I, J)) {
    const auto base = detail::means_of(outcome_dist(ws.state, I, J));
    const auto j_moved = detail::means_of(outcome_dist(ws.state, I, J_alt));
    if (std::fabs(base.first - j_moved.first) > tol) return false;
    const auto i_moved = detail::means_of(outcome_dist(ws.state, I_alt, J));
    if (std::fabs(base.second - i_moved.second) > tol) return false;
  }
  return true;
}

namespace detail {

struct StateKey {
  int kind;
  int k1;
  int k2;
  double a1;
  double a2;
};

inline StateKey state_key(const HiddenState& state) {
  if (const auto* trivial = std::get_if<TrivialLambda>(&state)) {
    return {0, trivial->correlation_sign, 0, 0.0, 0.0};
  }
  if (const auto* jv = std::get_if<JointValueLambda>(&state)) {
    return {1, jv->value.a, jv->value.b, 0.0, 0.0};
  }
  const auto& wl = std::get<WhartonLambda>(state);
  return {2, static_cast<int>(wl.tag), 0, wl.spin_a_angle, wl.spin_b_angle};
}

inline bool key_less(const StateKey& x, const StateKey& y) {
  return std::tie(x.kind, x.k1, x.k2, x.a1, x.a2) <
         std::tie(y.kind, y.k1, y.k2, y.a1, y.a2);
}

inline bool key_close(const StateKey& x, const StateKey& y, double tol) {
  return x.kind == y.kind && x.k1 == y.k1 && x.k2 == y.k2 &&
         std::fabs(x.a1 - y.a1) <= tol && std::fabs(x.a2 - y.a2) <= tol;
}

}  // namespace detail

// Measurement Independence across the given setting pairs: all hidden-state
// distributions must have the same support and the same weights.
inline bool mi_holds(const SourceParams& source,
                     std::span<const std::pair<Setting, Setting>> pairs,
                     double tol = kProbTol) {
  if (pairs.size() < 2) return true;
  using Keyed = std::pair<detail::StateKey, double>;
  auto canonical = [&](const Setting& I, const Setting& J) {
    std::vector<Keyed> keyed;
    for (const WeightedState& ws : hidden_sigma(source, I, J)) {
      keyed.emplace_back(detail::state_key(ws.state), ws.weight);
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const Keyed& x, const Keyed& y) {
                return detail::key_less(x.first, y.first);
              });
    return keyed;
  };
  const auto reference = canonical(pairs[0].first, pairs[0].second);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const auto other = canonical(pairs[i].first, pairs[i].second);
    if (other.size() != reference.size()) return false;
    for (std::size_t k = 0; k < reference.size(); ++k) {
      if (!detail::key_close(reference[k].first, other[k].first, tol)) {
        return false;
      }
      if (std::fabs(reference[k].second - other[k].second) > tol) return false;
    }
  }
  return true;
}

// Whether sub-ensembles of this source are operationally preparable: true
// for sources whose weights are free parameters of the preparation, false
// where the hidden distribution is fixed by the quantum state alone.
inline bool sub_ensembles_preparable(const SourceParams& source) {
  switch (source.kind()) {
    case ModelKind::wharton_pair:
      return true;
    case ModelKind::mixture: {
      const MixtureParams& m = source.as_mixture();
      return sub_ensembles_preparable(*m.first) &&
             sub_ensembles_preparable(*m.second);
    }
    default:
      return false;
  }
}

}  // namespace bellhv
