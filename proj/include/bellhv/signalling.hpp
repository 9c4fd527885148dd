#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellhv/estimators.hpp"
#include "bellhv/geometry.hpp"
#include "bellhv/models.hpp"
#include "bellhv/parallel.hpp"
#include "bellhv/rng.hpp"

namespace bellhv {

// Raised when the requested source/settings give Bob no usable statistics:
// his expected marginal does not depend on Alice's setting.
class NoChannelError : public std::invalid_argument {
 public:
  explicit NoChannelError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Exact <B> for the given settings.
inline double expected_bob_marginal(const SourceParams& source,
                                    Direction alice_dir, Direction bob_dir) {
  return marginals(exact_joint(source, Setting(alice_dir), Setting(bob_dir)))
      .second;
}

// Bit channel: Alice encodes each bit in her setting choice, Bob decodes
// from his empirical marginal alone.
struct ProtocolConfig {
  SourceParams source;
  Direction alice_bit0;
  Direction alice_bit1;
  Direction bob;
  long pairs_per_bit = 1;
  double decode_threshold = 0.0;
  double confidence = 0.99;

  // Resolved at construction:
  double mean_bit0 = 0.0;
  double mean_bit1 = 0.0;
  double separation = 0.0;  // |mean_bit1 - mean_bit0|
};

inline ProtocolConfig make_protocol(const SourceParams& source,
                                    Direction alice_bit0, Direction alice_bit1,
                                    Direction bob, long pairs_per_bit,
                                    std::optional<double> decode_threshold,
                                    double confidence) {
  if (pairs_per_bit < 1) {
    throw std::invalid_argument("protocol: pairs_per_bit must be >= 1");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("protocol: confidence must be in (0,1)");
  }
  ProtocolConfig config{source, alice_bit0, alice_bit1, bob, pairs_per_bit};
  config.confidence = confidence;
  config.mean_bit0 = expected_bob_marginal(source, alice_bit0, bob);
  config.mean_bit1 = expected_bob_marginal(source, alice_bit1, bob);
  config.separation = std::fabs(config.mean_bit1 - config.mean_bit0);
  if (config.separation <= 1e-9) {
    throw NoChannelError(
        "protocol: Bob's expected marginal does not depend on Alice's "
        "setting (separation 0); this source carries no channel");
  }
  const double lo = std::min(config.mean_bit0, config.mean_bit1);
  const double hi = std::max(config.mean_bit0, config.mean_bit1);
  config.decode_threshold =
      decode_threshold ? *decode_threshold : (lo + hi) / 2.0;
  if (!(config.decode_threshold > lo && config.decode_threshold < hi)) {
    throw std::invalid_argument(
        "protocol: decode_threshold must lie strictly between the two "
        "expected marginals");
  }
  return config;
}

struct SignalReport {
  std::vector<int> sent_bits;
  std::vector<int> decoded_bits;
  std::vector<double> bob_means;
  double ber = 0.0;
  // One-sided Hoeffding bound on each bit's error probability:
  // exp(-N * separation^2 / 8) for means of +-1 samples.
  double per_bit_error_bound = 0.0;
  long pairs_per_bit = 0;
  double separation = 0.0;
  double threshold = 0.0;
};

inline double per_bit_error_bound(long pairs_per_bit, double separation) {
  return std::exp(-static_cast<double>(pairs_per_bit) * separation *
                  separation / 8.0);
}

// Sends the given bits; each bit runs on its own substream, so the report
// does not depend on scheduling and a prefix of bits reproduces exactly.
inline SignalReport run_protocol(const ProtocolConfig& config,
                                 const std::vector<int>& bits,
                                 std::uint64_t seed) {
  for (int bit : bits) {
    if (bit != 0 && bit != 1) {
      throw std::invalid_argument("run_protocol: bits must be 0 or 1");
    }
  }
  SignalReport report;
  report.sent_bits = bits;
  report.decoded_bits.assign(bits.size(), 0);
  report.bob_means.assign(bits.size(), 0.0);
  report.pairs_per_bit = config.pairs_per_bit;
  report.separation = config.separation;
  report.threshold = config.decode_threshold;
  report.per_bit_error_bound =
      per_bit_error_bound(config.pairs_per_bit, config.separation);

  const Setting bob_setting(config.bob);
  const PairSampler sampler_bit0(config.source, Setting(config.alice_bit0),
                                 bob_setting);
  const PairSampler sampler_bit1(config.source, Setting(config.alice_bit1),
                                 bob_setting);
  const bool bit1_high = config.mean_bit1 >= config.mean_bit0;

  parallel_for(bits.size(), [&](std::size_t i) {
    RngStream rng = derived_stream(seed, "bit", i);
    const PairSampler& sampler = bits[i] == 0 ? sampler_bit0 : sampler_bit1;
    long sum_b = 0;
    for (long k = 0; k < config.pairs_per_bit; ++k) {
      sum_b += sampler.sample(rng).b;
    }
    const double mean =
        static_cast<double>(sum_b) / static_cast<double>(config.pairs_per_bit);
    report.bob_means[i] = mean;
    const bool high = mean >= config.decode_threshold;
    report.decoded_bits[i] = (high == bit1_high) ? 1 : 0;
  });

  long errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (report.decoded_bits[i] != report.sent_bits[i]) ++errors;
  }
  report.ber = bits.empty()
                   ? 0.0
                   : static_cast<double>(errors) /
                         static_cast<double>(bits.size());
  return report;
}

struct SweepRow {
  long pairs_per_bit = 0;
  int trial = 0;
  double ber_empirical = 0.0;
  double ber_bound = 0.0;
};

// Reruns the protocol over a grid of block lengths. Streams are named by
// (N, trial), so adding trials or N values never disturbs earlier rows.
inline std::vector<SweepRow> channel_sweep(const ProtocolConfig& base,
                                           const std::vector<long>& n_values,
                                           int trials, int bits_per_trial,
                                           std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("channel_sweep: trials >= 1");
  if (bits_per_trial < 1) {
    throw std::invalid_argument("channel_sweep: bits_per_trial >= 1");
  }
  std::vector<SweepRow> rows;
  for (long n : n_values) {
    ProtocolConfig config = base;
    config.pairs_per_bit = n;
    for (int trial = 0; trial < trials; ++trial) {
      const std::string tag =
          "sweep/N" + std::to_string(n) + "/trial" + std::to_string(trial);
      RngStream bit_rng(seed, tag + "/bits");
      std::vector<int> bits(bits_per_trial);
      for (int& bit : bits) bit = bit_rng.next_double() < 0.5 ? 0 : 1;
      const SignalReport report =
          run_protocol(config, bits, derive_seed(seed, tag + "/run"));
      rows.push_back({n, trial, report.ber, report.per_bit_error_bound});
    }
  }
  return rows;
}

}  // namespace bellhv
