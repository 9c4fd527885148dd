#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bellhv/json_io.hpp"
#include "bellhv/version.hpp"

namespace bellhv {

// Exit statuses of the batch runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotCertified = 3;

struct RunResult {
  int exit_status = kExitOk;
  std::string report_filename;
  Json report;
  // Additional (filename, content) outputs, e.g. per-link CSV series.
  std::vector<std::pair<std::string, std::string>> extra_files;
};

namespace detail {

inline double get_double(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

inline long get_long(const Json& j, const char* key, long fallback) {
  return j.contains(key) ? j.at(key).get<long>() : fallback;
}

inline const Json& require_block(const Json& config, const char* key) {
  if (!config.contains(key)) {
    throw std::invalid_argument(std::string("config: missing \"") + key +
                                "\" block");
  }
  return config.at(key);
}

inline std::uint64_t resolve_seed(const Json& config,
                                  std::optional<std::uint64_t> override) {
  if (override) return *override;
  if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
  return 0;
}

inline Mode resolve_mode(const Json& config, std::uint64_t seed,
                         Json& resolved) {
  Json mode_json;
  std::string kind = "exact";
  long n_samples = 1000000;
  double confidence = 0.99;
  if (config.contains("mode")) {
    const Json& m = config.at("mode");
    kind = m.contains("kind") ? m.at("kind").get<std::string>() : "exact";
    n_samples = get_long(m, "n_samples", n_samples);
    confidence = get_double(m, "confidence", confidence);
  }
  if (kind == "exact") {
    mode_json["kind"] = "exact";
    resolved["mode"] = mode_json;
    return Mode::Exact();
  }
  if (kind == "mc") {
    mode_json["kind"] = "mc";
    mode_json["n_samples"] = n_samples;
    mode_json["confidence"] = confidence;
    resolved["mode"] = mode_json;
    return Mode::Mc(n_samples, confidence, seed);
  }
  throw std::invalid_argument("mode.kind must be \"exact\" or \"mc\"");
}

inline Json resolve_source(const Json& config, SourceParams& out) {
  const Json& block = require_block(config, "source");
  out = source_params_from_json(block);
  return source_params_to_json(out);  // echo with defaults materialised
}

inline Json report_shell(const std::string& command, Json resolved_config) {
  Json report;
  Json artifact;
  artifact["name"] = kArtifactName;
  artifact["version"] = kArtifactVersion;
  report["artifact"] = artifact;
  report["command"] = command;
  report["config"] = std::move(resolved_config);
  return report;
}

}  // namespace detail

inline RunResult run_chsh(const Json& config,
                          std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = detail::resolve_seed(config, seed_override);
  Json resolved;
  resolved["seed"] = seed;
  SourceParams source = SourceParams::quantum_correlated(+1);
  resolved["source"] = detail::resolve_source(config, source);

  const Json& geometry = detail::require_block(config, "geometry");
  if (!geometry.contains("alice_rad") || !geometry.contains("bob_rad") ||
      geometry.at("alice_rad").size() != 2 ||
      geometry.at("bob_rad").size() != 2) {
    throw std::invalid_argument(
        "chsh geometry needs alice_rad [I, I'] and bob_rad [J, J']");
  }
  FourSettings settings;
  settings.alice = Setting(geometry.at("alice_rad")[0].get<double>(), "I");
  settings.alice_prime =
      Setting(geometry.at("alice_rad")[1].get<double>(), "I'");
  settings.bob = Setting(geometry.at("bob_rad")[0].get<double>(), "J");
  settings.bob_prime = Setting(geometry.at("bob_rad")[1].get<double>(), "J'");
  const int minus_index =
      static_cast<int>(detail::get_long(geometry, "minus_index", 3));
  Json geo;
  geo["alice_rad"] = {settings.alice.direction.angle(),
                      settings.alice_prime.direction.angle()};
  geo["bob_rad"] = {settings.bob.direction.angle(),
                    settings.bob_prime.direction.angle()};
  geo["minus_index"] = minus_index;
  resolved["geometry"] = geo;
  const Mode mode = detail::resolve_mode(config, seed, resolved);

  const ChshEstimate est = chsh(source, settings, minus_index, mode);

  RunResult result;
  result.report_filename = "chsh_report.json";
  result.report = detail::report_shell("chsh", resolved);
  result.report["results"] = chsh_to_json(est);
  return result;
}

inline RunResult run_chain(const Json& config,
                           std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = detail::resolve_seed(config, seed_override);
  Json resolved;
  resolved["seed"] = seed;
  SourceParams source = SourceParams::quantum_correlated(+1);
  resolved["source"] = detail::resolve_source(config, source);

  const Json& geometry = detail::require_block(config, "geometry");
  const int n = static_cast<int>(detail::get_long(geometry, "n", 6));
  const double start = detail::get_double(geometry, "start_rad", 0.0);
  Json geo;
  geo["n"] = n;
  geo["start_rad"] = start;
  resolved["geometry"] = geo;
  const Mode mode = detail::resolve_mode(config, seed, resolved);

  const ChainSpec chain = build_chain(n, Direction(start));
  const ChainStats stats = chain_stats(source, chain, mode);

  RunResult result;
  result.report_filename = "chain_report.json";
  result.report = detail::report_shell("chain", resolved);
  result.report["results"] = chain_stats_to_json(stats);
  result.extra_files.emplace_back("chain_links.csv", chain_stats_to_csv(stats));
  return result;
}

inline RunResult run_equiprob(const Json& config,
                              std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = detail::resolve_seed(config, seed_override);
  Json resolved;
  resolved["seed"] = seed;
  SourceParams source = SourceParams::quantum_correlated(+1);
  resolved["source"] = detail::resolve_source(config, source);

  const Json& geometry = detail::require_block(config, "geometry");
  const int n = static_cast<int>(detail::get_long(geometry, "n", 6));
  const double start = detail::get_double(geometry, "start_rad", 0.0);
  Json geo;
  geo["n"] = n;
  geo["start_rad"] = start;
  resolved["geometry"] = geo;

  const ChainSpec chain = build_chain(n, Direction(start));
  const ChainLink& first_link = chain.links().front();
  double marginal_alice = first_link.alice.angle();
  double marginal_bob = first_link.bob.angle();
  std::string side_str = "A";
  if (config.contains("marginal")) {
    const Json& m = config.at("marginal");
    marginal_alice = detail::get_double(m, "alice_rad", marginal_alice);
    marginal_bob = detail::get_double(m, "bob_rad", marginal_bob);
    if (m.contains("side")) side_str = m.at("side").get<std::string>();
  }
  if (side_str != "A" && side_str != "B") {
    throw std::invalid_argument("marginal.side must be \"A\" or \"B\"");
  }
  Json marg;
  marg["alice_rad"] = marginal_alice;
  marg["bob_rad"] = marginal_bob;
  marg["side"] = side_str;
  resolved["marginal"] = marg;
  const Mode mode = detail::resolve_mode(config, seed, resolved);

  const ChainStats stats = chain_stats(source, chain, mode);
  const Setting I(marginal_alice);
  const Setting J(marginal_bob);
  CorrelatorEstimate marginal;
  if (mode.exact) {
    const auto [mean_a, mean_b] = marginals(exact_joint(source, I, J));
    marginal =
        CorrelatorEstimate::exact(side_str == "A" ? mean_a : mean_b);
  } else {
    RngStream rng(mode.seed, "marginal");
    const McJointResult mc =
        mc_joint(source, I, J, mode.n_samples, mode.confidence, rng);
    marginal = side_str == "A" ? mc.mean_a_est : mc.mean_b_est;
  }
  const EquiprobVerdict verdict = thm1prime_detect(stats, marginal, n);

  RunResult result;
  result.report_filename = "equiprob_report.json";
  result.report = detail::report_shell("equiprob", resolved);
  Json results;
  results["chain"] = chain_stats_to_json(stats);
  results["marginal"] = estimate_to_json(marginal);
  results["marginal_side"] = side_str;
  results["bound_2n_delta"] = thm0prime_bound(n, stats.delta_hat);
  results["verdict"] = equiprob_verdict_name(verdict);
  result.report["results"] = results;
  result.extra_files.emplace_back("equiprob_links.csv",
                                  chain_stats_to_csv(stats));
  return result;
}

inline RunResult run_certify(const Json& config,
                             std::optional<std::uint64_t> seed_override,
                             bool require_certified) {
  const std::uint64_t seed = detail::resolve_seed(config, seed_override);
  Json resolved;
  resolved["seed"] = seed;
  SourceParams source = SourceParams::quantum_correlated(+1);
  resolved["source"] = detail::resolve_source(config, source);

  double start = 0.0;
  if (config.contains("geometry")) {
    start = detail::get_double(config.at("geometry"), "start_rad", 0.0);
  }
  Json geo;
  geo["start_rad"] = start;
  resolved["geometry"] = geo;
  const Mode mode = detail::resolve_mode(config, seed, resolved);

  const Theorem2PrimeLayout layout =
      build_theorem2prime_layout(Direction(start));
  const CertificationReport report = thm2_certify(source, layout, mode);

  RunResult result;
  result.report_filename = "certify_report.json";
  result.report = detail::report_shell("certify", resolved);
  Json results;
  results["layout"] = layout_to_json(layout);
  results["certification"] = certification_to_json(report);
  result.report["results"] = results;
  result.extra_files.emplace_back("certify_links.csv",
                                  chain_stats_to_csv(report.chain));
  if (require_certified &&
      report.verdict == CertVerdict::premises_not_met) {
    result.exit_status = kExitNotCertified;
  }
  return result;
}

inline RunResult run_signal(const Json& config,
                            std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = detail::resolve_seed(config, seed_override);
  Json resolved;
  resolved["seed"] = seed;
  SourceParams source = SourceParams::quantum_correlated(+1);
  resolved["source"] = detail::resolve_source(config, source);

  const Json& proto = detail::require_block(config, "protocol");
  const double a0 = detail::get_double(proto, "alice_bit0_rad", 0.0);
  const double a1 = detail::get_double(proto, "alice_bit1_rad", kPi / 2.0);
  const double bob = detail::get_double(proto, "bob_rad", 0.0);
  const long pairs_per_bit = detail::get_long(proto, "pairs_per_bit", 200);
  const double confidence = detail::get_double(proto, "confidence", 0.99);
  std::optional<double> threshold;
  if (proto.contains("decode_threshold")) {
    threshold = proto.at("decode_threshold").get<double>();
  }

  const ProtocolConfig protocol =
      make_protocol(source, Direction(a0), Direction(a1), Direction(bob),
                    pairs_per_bit, threshold, confidence);
  Json proto_json;
  proto_json["alice_bit0_rad"] = a0;
  proto_json["alice_bit1_rad"] = a1;
  proto_json["bob_rad"] = bob;
  proto_json["pairs_per_bit"] = pairs_per_bit;
  proto_json["confidence"] = confidence;
  proto_json["decode_threshold"] = protocol.decode_threshold;
  resolved["protocol"] = proto_json;

  std::vector<int> bits;
  Json bits_json;
  if (config.contains("bits") && config.at("bits").contains("string")) {
    const std::string s = config.at("bits").at("string").get<std::string>();
    for (char c : s) {
      if (c != '0' && c != '1') {
        throw std::invalid_argument("bits.string must contain only 0 and 1");
      }
      bits.push_back(c - '0');
    }
    bits_json["string"] = s;
  } else {
    long count = 64;
    if (config.contains("bits")) {
      count = detail::get_long(config.at("bits"), "count", count);
    }
    if (count < 1) throw std::invalid_argument("bits.count must be >= 1");
    RngStream rng(seed, "signal-bits");
    bits.resize(count);
    for (int& b : bits) b = rng.next_double() < 0.5 ? 0 : 1;
    bits_json["count"] = count;
  }
  resolved["bits"] = bits_json;

  std::optional<Json> sweep_json;
  std::vector<long> sweep_values;
  int sweep_trials = 0;
  int sweep_bits = 0;
  if (config.contains("sweep")) {
    const Json& sweep = config.at("sweep");
    if (!sweep.contains("pairs_per_bit_values")) {
      throw std::invalid_argument("sweep needs pairs_per_bit_values");
    }
    for (const auto& v : sweep.at("pairs_per_bit_values")) {
      sweep_values.push_back(v.get<long>());
    }
    sweep_trials = static_cast<int>(detail::get_long(sweep, "trials", 10));
    sweep_bits =
        static_cast<int>(detail::get_long(sweep, "bits_per_trial", 64));
    Json sj;
    sj["pairs_per_bit_values"] = sweep_values;
    sj["trials"] = sweep_trials;
    sj["bits_per_trial"] = sweep_bits;
    sweep_json = sj;
    resolved["sweep"] = *sweep_json;
  }

  const SignalReport report = run_protocol(protocol, bits, seed);

  RunResult result;
  result.report_filename = "signal_report.json";
  result.report = detail::report_shell("signal", resolved);
  Json results = signal_report_to_json(report);
  results["expected_mean_bit0"] = protocol.mean_bit0;
  results["expected_mean_bit1"] = protocol.mean_bit1;
  result.report["results"] = results;
  if (sweep_json) {
    const std::vector<SweepRow> rows = channel_sweep(
        protocol, sweep_values, sweep_trials, sweep_bits, seed);
    result.extra_files.emplace_back("signal_sweep.csv", sweep_to_csv(rows));
  }
  return result;
}

inline RunResult run_schulman_check(const Json& config,
                                    std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = detail::resolve_seed(config, seed_override);
  Json resolved;
  resolved["seed"] = seed;
  std::vector<double> gammas = {0.01, 0.1, 1.0};
  if (config.contains("gamma_s_values")) {
    gammas.clear();
    for (const auto& g : config.at("gamma_s_values")) {
      gammas.push_back(g.get<double>());
    }
  }
  if (gammas.empty()) {
    throw std::invalid_argument("schulman-check: gamma_s_values is empty");
  }
  for (double g : gammas) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("schulman-check: gamma_s values must be > 0");
    }
  }
  const int points =
      static_cast<int>(detail::get_long(config, "theta_points", 25));
  if (points < 2) {
    throw std::invalid_argument("schulman-check: theta_points must be >= 2");
  }
  const long truncation = detail::get_long(config, "truncation", 100000);
  if (truncation < 1) {
    throw std::invalid_argument("schulman-check: truncation must be >= 1");
  }
  const double tolerance = detail::get_double(config, "tolerance", 1e-6);
  resolved["gamma_s_values"] = gammas;
  resolved["theta_points"] = points;
  resolved["truncation"] = truncation;
  resolved["tolerance"] = tolerance;

  double worst = 0.0;
  double worst_theta = 0.0;
  double worst_gamma = gammas.front();
  Json per_gamma = Json::array();
  for (double g : gammas) {
    double gamma_worst = 0.0;
    double gamma_worst_theta = 0.0;
    for (int k = 0; k < points; ++k) {
      const double theta = kPi * k / (points - 1);
      const double closed = schulman_ratio_closed(theta, g);
      const double truncated = schulman_ratio_truncated(theta, g, truncation);
      const double rel = std::fabs(truncated - closed) / closed;
      if (rel > gamma_worst) {
        gamma_worst = rel;
        gamma_worst_theta = theta;
      }
    }
    Json row;
    row["gamma_s"] = g;
    row["max_rel_error"] = gamma_worst;
    row["argmax_theta_rad"] = gamma_worst_theta;
    per_gamma.push_back(row);
    if (gamma_worst > worst) {
      worst = gamma_worst;
      worst_theta = gamma_worst_theta;
      worst_gamma = g;
    }
  }

  RunResult result;
  result.report_filename = "schulman_check_report.json";
  result.report = detail::report_shell("schulman-check", resolved);
  Json results;
  results["per_gamma"] = per_gamma;
  results["max_rel_error"] = worst;
  results["argmax"] = {{"gamma_s", worst_gamma}, {"theta_rad", worst_theta}};
  results["tolerance"] = tolerance;
  results["within_tolerance"] = worst <= tolerance;
  result.report["results"] = results;
  if (worst > tolerance) result.exit_status = kExitCheckFailed;
  return result;
}

// Dispatch by command name. Throws std::invalid_argument for bad configs and
// unknown commands; NoChannelError derives from it.
inline RunResult run_command(const std::string& command, const Json& config,
                             std::optional<std::uint64_t> seed_override,
                             bool require_certified) {
  if (command == "chsh") return run_chsh(config, seed_override);
  if (command == "chain") return run_chain(config, seed_override);
  if (command == "equiprob") return run_equiprob(config, seed_override);
  if (command == "certify") {
    return run_certify(config, seed_override, require_certified);
  }
  if (command == "signal") return run_signal(config, seed_override);
  if (command == "schulman-check") {
    return run_schulman_check(config, seed_override);
  }
  throw std::invalid_argument("unknown command: " + command);
}

}  // namespace bellhv
