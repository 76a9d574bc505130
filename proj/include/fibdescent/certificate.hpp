#pragma once

// Outcome of a descent run plus its trace, rendered as structured text or
// JSON. The JSON form round-trips to an equal certificate.

#include <fibdescent/integer.hpp>

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

using Json = nlohmann::ordered_json;

enum class OutcomeKind { point_found, dual_selmer_minimized, search_exhausted, hypothesis_failed };

inline std::string to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::point_found: return "point_found";
    case OutcomeKind::dual_selmer_minimized: return "dual_selmer_minimized";
    case OutcomeKind::search_exhausted: return "search_exhausted";
    case OutcomeKind::hypothesis_failed: return "hypothesis_failed";
  }
  return "?";
}

inline OutcomeKind outcome_kind_from_string(const std::string& s) {
  for (auto k : {OutcomeKind::point_found, OutcomeKind::dual_selmer_minimized,
                 OutcomeKind::search_exhausted, OutcomeKind::hypothesis_failed}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown outcome kind '" + s + "'");
}

/// One entry of the append-only trace; `data` keeps insertion order.
struct TraceStep {
  std::string kind;
  Json data = Json::object();

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct Outcome {
  OutcomeKind kind = OutcomeKind::search_exhausted;
  // point_found: the point; dual_selmer_minimized: t only
  std::optional<Rational> x, y, t;
  bool verified = false;
  Json fiber = Json::object();  // dual_selmer_minimized
  std::string stage, bound;     // search_exhausted
  std::string which, detail;    // hypothesis_failed (detail also for search_exhausted)

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct Certificate {
  std::string spec_hash;
  Json readings = Json::object();
  Outcome outcome;
  std::vector<TraceStep> trace;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// Interpretations fixed where the source formulas are ambiguous.
inline Json default_readings() {
  Json r = Json::object();
  r["delta_normalization"] = "cross-resultant c_i d_j - c_j d_i";
  r["suitability4_reading"] = "-d p_J(t_v)";
  return r;
}

/// 0 point found or dual Selmer minimized, 2 hypothesis failed, 3 exhausted.
inline int exit_code(const Certificate& c) {
  switch (c.outcome.kind) {
    case OutcomeKind::point_found:
    case OutcomeKind::dual_selmer_minimized: return 0;
    case OutcomeKind::hypothesis_failed: return 2;
    case OutcomeKind::search_exhausted: return 3;
  }
  return 1;
}

inline Json to_json(const Outcome& o) {
  Json j = Json::object();
  j["kind"] = to_string(o.kind);
  switch (o.kind) {
    case OutcomeKind::point_found:
      j["x"] = to_string(o.x.value());
      j["y"] = to_string(o.y.value());
      j["t"] = to_string(o.t.value());
      j["verified"] = o.verified;
      break;
    case OutcomeKind::dual_selmer_minimized:
      j["t"] = to_string(o.t.value());
      j["fiber"] = o.fiber;
      break;
    case OutcomeKind::search_exhausted:
      j["stage"] = o.stage;
      j["bound"] = o.bound;
      j["detail"] = o.detail;
      break;
    case OutcomeKind::hypothesis_failed:
      j["which"] = o.which;
      j["detail"] = o.detail;
      break;
  }
  return j;
}

inline Outcome outcome_from_json(const Json& j) {
  Outcome o;
  o.kind = outcome_kind_from_string(j.at("kind").get<std::string>());
  switch (o.kind) {
    case OutcomeKind::point_found:
      o.x = parse_rational(j.at("x").get<std::string>());
      o.y = parse_rational(j.at("y").get<std::string>());
      o.t = parse_rational(j.at("t").get<std::string>());
      o.verified = j.at("verified").get<bool>();
      break;
    case OutcomeKind::dual_selmer_minimized:
      o.t = parse_rational(j.at("t").get<std::string>());
      o.fiber = j.at("fiber");
      break;
    case OutcomeKind::search_exhausted:
      o.stage = j.at("stage").get<std::string>();
      o.bound = j.at("bound").get<std::string>();
      o.detail = j.at("detail").get<std::string>();
      break;
    case OutcomeKind::hypothesis_failed:
      o.which = j.at("which").get<std::string>();
      o.detail = j.at("detail").get<std::string>();
      break;
  }
  return o;
}

inline Json to_json(const Certificate& c) {
  Json j = Json::object();
  j["spec_hash"] = c.spec_hash;
  j["readings"] = c.readings;
  j["outcome"] = to_json(c.outcome);
  Json trace = Json::array();
  for (const auto& s : c.trace) {
    Json step = Json::object();
    step["kind"] = s.kind;
    step["data"] = s.data;
    trace.push_back(std::move(step));
  }
  j["trace"] = std::move(trace);
  return j;
}

inline Certificate certificate_from_json(const Json& j) {
  Certificate c;
  c.spec_hash = j.at("spec_hash").get<std::string>();
  c.readings = j.at("readings");
  c.outcome = outcome_from_json(j.at("outcome"));
  for (const auto& s : j.at("trace")) c.trace.push_back({s.at("kind").get<std::string>(), s.at("data")});
  return c;
}

inline std::string render_json(const Certificate& c) { return to_json(c).dump(2) + "\n"; }

inline Certificate parse_certificate(const std::string& text) {
  return certificate_from_json(Json::parse(text));
}

namespace detail {

inline std::string plain(const Json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

inline void render_object(const Json& obj, const std::string& indent, std::string& out) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object() && !value.empty()) {
      out += indent + key + ":\n";
      render_object(value, indent + "  ", out);
    } else {
      out += indent + key + ": " + plain(value) + "\n";
    }
  }
}

}  // namespace detail

inline std::string render_text(const Certificate& c) {
  std::string out;
  out += "spec-hash: " + c.spec_hash + "\n";
  out += "readings:\n";
  detail::render_object(c.readings, "  ", out);
  out += "outcome:\n";
  detail::render_object(to_json(c.outcome), "  ", out);
  out += "trace:\n";
  for (std::size_t k = 0; k < c.trace.size(); ++k) {
    out += "  [" + std::to_string(k) + "] " + c.trace[k].kind + "\n";
    detail::render_object(c.trace[k].data, "      ", out);
  }
  return out;
}

}  // namespace fibdescent
