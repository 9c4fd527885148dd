#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellhv {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Absolute tolerance for construction-time angle equality checks.
inline constexpr double kAngleTol = 1e-12;

// A coplanar spin measurement axis, stored as an angle reduced to [0, 2pi).
// A direction and its opposite are distinct measurements whose outcomes are
// related by negation.
class Direction {
 public:
  Direction() = default;

  explicit Direction(double angle_rad) {
    if (!std::isfinite(angle_rad)) {
      throw std::domain_error("Direction: angle must be finite");
    }
    angle_ = reduce(angle_rad);
  }

  double angle() const { return angle_; }

  Direction opposite() const { return Direction(angle_ + kPi); }

 private:
  static double reduce(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
  }

  double angle_ = 0.0;
};

// Unsigned angle between two oriented axes, in [0, pi]. Symmetric, zero iff
// the axes coincide.
inline double angle_between(const Direction& a, const Direction& b) {
  double d = std::fabs(a.angle() - b.angle());
  return std::min(d, kTwoPi - d);
}

enum class Side { A, B };

inline const char* side_name(Side s) { return s == Side::A ? "A" : "B"; }

// One logical chain entry: A_i or B_j at its direction.
struct ChainNode {
  Side side;
  int index;
  Direction direction;

  std::string label() const {
    return std::string(side_name(side)) + std::to_string(index);
  }
};

// One measured chain link. The closing link connects B_{n-1} to A_n = -A_0;
// it is taken as a measurement of (A_0, B_{n-1}) with the correlation
// negated, since measuring an axis doubles as measuring its opposite.
struct ChainLink {
  int link_index;
  Direction alice;  // physical direction Alice measures
  Direction bob;    // physical direction Bob measures
  bool flip_sign;   // negate the measured correlation (closing link only)
  std::string label;
  double subtended;  // angle between the logical pair, always pi/(2n)
};

// Chain of 2n coplanar direction pairs at angles pi/(2n), alternating
// A_0, B_0, A_1, ..., B_{n-1}, A_n with A_n opposite to A_0.
class ChainSpec {
 public:
  static ChainSpec build(int n, Direction start) {
    if (n < 1) throw std::domain_error("build_chain: n must be >= 1");
    ChainSpec chain;
    chain.n_ = n;
    chain.step_ = kPi / (2.0 * n);
    chain.nodes_.reserve(2 * n + 1);
    for (int k = 0; k <= 2 * n; ++k) {
      ChainNode node;
      node.side = (k % 2 == 0) ? Side::A : Side::B;
      node.index = k / 2;
      node.direction = Direction(start.angle() + k * chain.step_);
      chain.nodes_.push_back(node);
    }
    chain.links_.reserve(2 * n);
    for (int k = 0; k < 2 * n; ++k) {
      const ChainNode& lo = chain.nodes_[k];
      const ChainNode& hi = chain.nodes_[k + 1];
      ChainLink link;
      link.link_index = k;
      link.flip_sign = (k == 2 * n - 1);
      const ChainNode& a_node = (lo.side == Side::A) ? lo : hi;
      const ChainNode& b_node = (lo.side == Side::B) ? lo : hi;
      link.alice = link.flip_sign ? chain.nodes_.front().direction
                                  : a_node.direction;
      link.bob = b_node.direction;
      link.label = lo.label() + "-" + hi.label();
      link.subtended = angle_between(lo.direction, hi.direction);
      chain.links_.push_back(link);
    }
    chain.validate();
    return chain;
  }

  int n() const { return n_; }
  double step() const { return step_; }
  const std::vector<ChainNode>& nodes() const { return nodes_; }
  const std::vector<ChainLink>& links() const { return links_; }
  const Direction& start() const { return nodes_.front().direction; }

 private:
  void validate() const {
    if (static_cast<int>(nodes_.size()) != 2 * n_ + 1 ||
        static_cast<int>(links_.size()) != 2 * n_) {
      throw std::logic_error("ChainSpec: wrong element counts");
    }
    for (const ChainLink& link : links_) {
      if (std::fabs(link.subtended - step_) > kAngleTol) {
        throw std::logic_error("ChainSpec: link angle deviates from pi/(2n)");
      }
    }
    double closing = angle_between(nodes_.back().direction,
                                   nodes_.front().direction.opposite());
    if (closing > kAngleTol) {
      throw std::logic_error("ChainSpec: A_n is not opposite A_0");
    }
  }

  int n_ = 0;
  double step_ = 0.0;
  std::vector<ChainNode> nodes_;
  std::vector<ChainLink> links_;
};

inline ChainSpec build_chain(int n, Direction start) {
  return ChainSpec::build(n, start);
}

struct ChshPair {
  std::string alice_label;
  std::string bob_label;
  Direction alice;
  Direction bob;
};

// The 16-pair measurement plan behind the n=6 certification: the 12 chain
// links plus the four CHSH pairs (A0,B1), (A0,B4), (A3,B1), (A3,B4), whose
// successive angles are pi/4. In the canonical CHSH combination the minus
// sign sits on the (A0,B4) term.
class Theorem2PrimeLayout {
 public:
  static constexpr int kChainHalfCount = 6;
  // CHSH term index carrying the minus sign, with terms ordered
  // (I,J), (I',J), (I,J'), (I',J') for I=A0, I'=A3, J=B1, J'=B4:
  // the minus sits on the (A0,B4) term.
  static constexpr int kMinusIndex = 2;

  static Theorem2PrimeLayout build(Direction start) {
    Theorem2PrimeLayout layout;
    layout.chain_ = ChainSpec::build(kChainHalfCount, start);
    const auto& nodes = layout.chain_.nodes();
    auto node_at = [&](Side side, int index) -> const ChainNode& {
      for (const auto& node : nodes) {
        if (node.side == side && node.index == index) return node;
      }
      throw std::logic_error("Theorem2PrimeLayout: node lookup failed");
    };
    const ChainNode& a0 = node_at(Side::A, 0);
    const ChainNode& a3 = node_at(Side::A, 3);
    const ChainNode& b1 = node_at(Side::B, 1);
    const ChainNode& b4 = node_at(Side::B, 4);
    auto make_pair = [](const ChainNode& a, const ChainNode& b) {
      return ChshPair{a.label(), b.label(), a.direction, b.direction};
    };
    layout.chsh_pairs_ = {make_pair(a0, b1), make_pair(a0, b4),
                          make_pair(a3, b1), make_pair(a3, b4)};
    return layout;
  }

  const ChainSpec& chain() const { return chain_; }
  const std::array<ChshPair, 4>& chsh_pairs() const { return chsh_pairs_; }

  Direction alice_unprimed() const { return chsh_pairs_[0].alice; }  // A0
  Direction alice_primed() const { return chsh_pairs_[2].alice; }    // A3
  Direction bob_unprimed() const { return chsh_pairs_[0].bob; }      // B1
  Direction bob_primed() const { return chsh_pairs_[1].bob; }        // B4

  int measured_pair_count() const {
    return static_cast<int>(chain_.links().size() + chsh_pairs_.size());
  }

 private:
  ChainSpec chain_ = ChainSpec::build(kChainHalfCount, Direction(0.0));
  std::array<ChshPair, 4> chsh_pairs_{};
};

inline Theorem2PrimeLayout build_theorem2prime_layout(Direction start) {
  return Theorem2PrimeLayout::build(start);
}

}  // namespace bellhv
