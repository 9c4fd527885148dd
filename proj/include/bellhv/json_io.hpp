#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellhv/estimators.hpp"
#include "bellhv/geometry.hpp"
#include "bellhv/models.hpp"
#include "bellhv/signalling.hpp"
#include "bellhv/theorems.hpp"

namespace bellhv {

using Json = nlohmann::ordered_json;

// --- Canonical emission -------------------------------------------------------

// Fixed float formatting: 17 significant digits round-trip any double, and
// the same document always serialises to the same bytes.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline void dump_canonical(const Json& j, std::string& out, int indent,
                           int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1),
                           ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += Json(it.key()).dump();
        out += ": ";
        dump_canonical(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_canonical(item, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      out += format_double(v);
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

inline std::string canonical_dump(const Json& j) {
  std::string out;
  detail::dump_canonical(j, out, 2, 0);
  out += "\n";
  return out;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// --- SourceParams <-> JSON ----------------------------------------------------

inline Json source_params_to_json(const SourceParams& source) {
  Json j;
  j["model"] = model_kind_name(source.kind());
  switch (source.kind()) {
    case ModelKind::quantum_correlated:
      j["correlation_sign"] = source.as_quantum().correlation_sign;
      break;
    case ModelKind::toy_mi:
      j["correlation_sign"] = source.as_toy().correlation_sign;
      break;
    case ModelKind::schulman_single: {
      const auto& p = source.as_schulman();
      j["gamma_s"] = p.gamma_s;
      j["truncation"] = p.truncation;
      break;
    }
    case ModelKind::wharton_pair: {
      const auto& p = source.as_wharton();
      j["weights"] = {p.w_aplus, p.w_bplus, p.w_aminus, p.w_bminus};
      j["spin_relation"] = p.spin_relation == SpinRelation::parallel
                               ? "parallel"
                               : "antiparallel";
      j["gamma_s"] = p.gamma_s;
      j["truncation"] = p.truncation;
      break;
    }
    case ModelKind::mixture: {
      const auto& m = source.as_mixture();
      j["weight"] = m.weight;
      j["first"] = source_params_to_json(*m.first);
      j["second"] = source_params_to_json(*m.second);
      break;
    }
  }
  return j;
}

inline SourceParams source_params_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("model") || !j["model"].is_string()) {
    throw std::invalid_argument("source: missing \"model\" string");
  }
  const std::string model = j["model"].get<std::string>();
  auto sign_of = [&]() {
    if (!j.contains("correlation_sign")) return +1;
    return j["correlation_sign"].get<int>();
  };
  if (model == "quantum_correlated") {
    return SourceParams::quantum_correlated(sign_of());
  }
  if (model == "toy_mi") {
    return SourceParams::toy_mi(sign_of());
  }
  if (model == "schulman_single") {
    const double gamma_s =
        j.contains("gamma_s") ? j["gamma_s"].get<double>() : 0.1;
    const long truncation =
        j.contains("truncation") ? j["truncation"].get<long>() : 100000;
    return SourceParams::schulman_single(gamma_s, truncation);
  }
  if (model == "wharton_pair") {
    if (!j.contains("weights") || !j["weights"].is_array() ||
        j["weights"].size() != 4) {
      throw std::invalid_argument("wharton_pair: \"weights\" must list 4");
    }
    std::array<double, 4> weights{};
    for (int i = 0; i < 4; ++i) weights[i] = j["weights"][i].get<double>();
    SpinRelation relation = SpinRelation::parallel;
    if (j.contains("spin_relation")) {
      const std::string r = j["spin_relation"].get<std::string>();
      if (r == "parallel") {
        relation = SpinRelation::parallel;
      } else if (r == "antiparallel") {
        relation = SpinRelation::antiparallel;
      } else {
        throw std::invalid_argument("wharton_pair: bad spin_relation");
      }
    }
    const double gamma_s =
        j.contains("gamma_s") ? j["gamma_s"].get<double>() : 0.0;
    const long truncation =
        j.contains("truncation") ? j["truncation"].get<long>() : 100000;
    return SourceParams::wharton_pair(weights, relation, gamma_s, truncation);
  }
  if (model == "mixture") {
    if (!j.contains("weight") || !j.contains("first") ||
        !j.contains("second")) {
      throw std::invalid_argument(
          "mixture: needs \"weight\", \"first\", \"second\"");
    }
    return SourceParams::mixture(j["weight"].get<double>(),
                                 source_params_from_json(j["first"]),
                                 source_params_from_json(j["second"]));
  }
  throw std::invalid_argument("unknown model: " + model);
}

// --- Geometry / estimator / theorem serialisation -----------------------------

inline Json layout_to_json(const Theorem2PrimeLayout& layout) {
  Json j;
  j["n"] = layout.chain().n();
  Json dirs = Json::array();
  const auto& nodes = layout.chain().nodes();
  // The 2n physical directions; the logical A_n entry reuses A_0 reversed.
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    Json d;
    d["side"] = side_name(nodes[k].side);
    d["index"] = nodes[k].index;
    d["angle_rad"] = nodes[k].direction.angle();
    dirs.push_back(d);
  }
  j["directions"] = dirs;
  Json pairs = Json::array();
  for (const ChshPair& p : layout.chsh_pairs()) {
    pairs.push_back({p.alice_label, p.bob_label});
  }
  j["chsh_pairs"] = pairs;
  return j;
}

inline Json estimate_to_json(const CorrelatorEstimate& e) {
  Json j;
  j["value"] = e.value;
  j["n_samples"] = e.n_samples;
  j["half_width"] = e.half_width;
  j["confidence"] = e.confidence;
  return j;
}

inline Json chsh_to_json(const ChshEstimate& e) {
  Json j;
  Json terms = Json::array();
  for (int t = 0; t < 4; ++t) {
    Json term = estimate_to_json(e.terms[t]);
    term["label"] = FourSettings::term_label(t);
    term["sign"] = e.signs[t];
    terms.push_back(term);
  }
  j["terms"] = terms;
  j["minus_index"] = e.minus_index;
  j["s_value"] = e.s_value;
  j["margin"] = e.margin();
  return j;
}

inline Json chain_stats_to_json(const ChainStats& s) {
  Json j;
  j["n"] = s.n;
  Json links = Json::array();
  for (std::size_t i = 0; i < s.link_correlations.size(); ++i) {
    Json link;
    link["link_index"] = static_cast<long>(i);
    link["side_pair"] = s.labels[i];
    link["angle_rad"] = s.angles[i];
    link["correlation"] = s.link_correlations[i];
    link["half_width"] = s.half_widths[i];
    links.push_back(link);
  }
  j["links"] = links;
  j["orientation"] = s.orientation == ChainOrientation::correlated
                         ? "correlated"
                         : "anticorrelated";
  j["uniform_orientation"] = s.uniform_orientation;
  j["mean_signed_correlation"] = s.mean_signed_correlation;
  j["delta_hat"] = s.delta_hat;
  j["max_half_width"] = s.max_half_width;
  j["n_samples_per_link"] = s.n_samples_per_link;
  j["confidence"] = s.confidence;
  return j;
}

inline std::string chain_stats_to_csv(const ChainStats& s) {
  std::string out = "link_index,side_pair,angle_rad,correlation,half_width\n";
  for (std::size_t i = 0; i < s.link_correlations.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += s.labels[i];
    out += ',';
    out += format_double(s.angles[i]);
    out += ',';
    out += format_double(s.link_correlations[i]);
    out += ',';
    out += format_double(s.half_widths[i]);
    out += '\n';
  }
  return out;
}

inline Json sub_distribution_to_json(const SubDistribution& sub) {
  auto support = [](const HiddenSupport& states) {
    Json arr = Json::array();
    for (const WeightedState& ws : states) {
      Json entry;
      entry["state"] = hidden_state_label(ws.state);
      entry["weight"] = ws.weight;
      arr.push_back(entry);
    }
    return arr;
  };
  Json j;
  j["weight"] = sub.weight;
  j["states"] = support(sub.states);
  j["complement"] = support(sub.complement);
  j["parent"] = support(sub.parent);
  return j;
}

inline Json lemma1_split_to_json(const Lemma1Split& split) {
  Json j;
  switch (split.status) {
    case Lemma1Split::Status::found: j["status"] = "found"; break;
    case Lemma1Split::Status::not_found: j["status"] = "not_found"; break;
    case Lemma1Split::Status::oi_violated: j["status"] = "oi_violated"; break;
    case Lemma1Split::Status::no_finite_support:
      j["status"] = "no_finite_support";
      break;
  }
  j["chsh_value"] = split.chsh_value;
  j["epsilon"] = split.epsilon;
  if (split.status == Lemma1Split::Status::found) {
    j["pair_index"] = split.pair_index;
    j["pair_label"] = FourSettings::term_label(split.pair_index);
    j["side"] = side_name(split.side);
    j["sub_marginal"] = split.sub_marginal;
    j["sub_distribution"] = sub_distribution_to_json(split.sub);
  }
  if (!split.diagnostic.empty()) j["diagnostic"] = split.diagnostic;
  return j;
}

inline Json certification_to_json(const CertificationReport& r) {
  Json j;
  j["n"] = r.n;
  j["chain"] = chain_stats_to_json(r.chain);
  j["chsh"] = chsh_to_json(r.chsh_est);
  j["gamma_hat"] = r.gamma_hat;
  j["epsilon_hat"] = r.epsilon_hat;
  j["condition_met"] = r.condition_met;
  j["ratio"] = r.ratio;
  j["oi_ok"] = r.oi_ok;
  j["sub_ensembles_preparable"] = r.preparable;
  if (r.witness.has_value()) {
    j["witness"] = lemma1_split_to_json(*r.witness);
  }
  j["verdict"] = cert_verdict_name(r.verdict);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json signal_report_to_json(const SignalReport& r) {
  auto bits_string = [](const std::vector<int>& bits) {
    std::string s;
    s.reserve(bits.size());
    for (int b : bits) s += (b ? '1' : '0');
    return s;
  };
  Json j;
  j["sent_bits"] = bits_string(r.sent_bits);
  j["decoded_bits"] = bits_string(r.decoded_bits);
  j["ber"] = r.ber;
  j["per_bit_error_bound"] = r.per_bit_error_bound;
  j["pairs_per_bit"] = r.pairs_per_bit;
  j["separation"] = r.separation;
  j["threshold"] = r.threshold;
  Json means = Json::array();
  for (double m : r.bob_means) means.push_back(m);
  j["bob_means"] = means;
  return j;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "N,trial,ber_empirical,ber_bound\n";
  for (const SweepRow& row : rows) {
    out += std::to_string(row.pairs_per_bit);
    out += ',';
    out += std::to_string(row.trial);
    out += ',';
    out += format_double(row.ber_empirical);
    out += ',';
    out += format_double(row.ber_bound);
    out += '\n';
  }
  return out;
}

}  // namespace bellhv
