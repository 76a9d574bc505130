#pragma once

// Text formats: the surface specification file and the companion point file.
//
//   # comment
//   s0 inf 5
//   a 2
//   b 3
//   factor 1 1 0      (index c d, indices 1-based)
//   factor 2 1 1
//   partA 1
//
// Point file rows are `place x y t precision` with rationals as n or n/m.

#include <fibdescent/surface.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> tokenize(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <typename F>
auto at_line(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace detail

inline RawSpec parse_spec(const std::string& text) {
  RawSpec raw;
  bool seen_s0 = false, seen_a = false, seen_b = false;
  std::map<std::size_t, LinearFactor> factors;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    auto tok = detail::tokenize(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    detail::at_line(lineno, [&] {
      if (key == "s0") {
        if (seen_s0) throw ParseError(lineno, "duplicate s0");
        seen_s0 = true;
        for (std::size_t k = 1; k < tok.size(); ++k) raw.s0.push_back(Place::parse(tok[k]));
      } else if (key == "a" || key == "b") {
        if (tok.size() != 2) throw ParseError(lineno, key + " takes one integer");
        bool& seen = key == "a" ? seen_a : seen_b;
        if (seen) throw ParseError(lineno, "duplicate " + key);
        seen = true;
        (key == "a" ? raw.a : raw.b) = parse_integer(tok[1]);
      } else if (key == "factor") {
        if (tok.size() != 4) throw ParseError(lineno, "factor takes: index c d");
        Integer idx = parse_integer(tok[1]);
        if (idx < 1 || idx > 1000) throw ParseError(lineno, "factor index out of range");
        std::size_t i = idx.get_ui();
        if (factors.contains(i)) throw ParseError(lineno, "duplicate factor " + tok[1]);
        factors[i] = LinearFactor{parse_integer(tok[2]), parse_integer(tok[3])};
      } else if (key == "partA") {
        for (std::size_t k = 1; k < tok.size(); ++k) {
          Integer idx = parse_integer(tok[k]);
          if (idx < 1 || idx > 1000) throw ParseError(lineno, "partA index out of range");
          raw.part_a.push_back(idx.get_ui() - 1);
        }
      } else {
        throw ParseError(lineno, "unknown key '" + key + "'");
      }
      return 0;
    });
  }
  if (!seen_s0) throw ParseError(lineno, "missing s0 line");
  if (!seen_a) throw ParseError(lineno, "missing a line");
  if (!seen_b) throw ParseError(lineno, "missing b line");
  std::size_t expect = 1;
  for (auto& [i, f] : factors) {
    if (i != expect) throw ParseError(lineno, "factor indices must be 1, 2, ..., n");
    raw.factors.push_back(f);
    ++expect;
  }
  return raw;
}

/// Canonical text form; parse_spec of the result validates to an equal spec.
inline std::string serialize_spec(const SurfaceSpec& spec) {
  std::string out = "s0";
  for (const auto& v : spec.s0) out += " " + v.to_string();
  out += "\na " + to_string(spec.a) + "\nb " + to_string(spec.b) + "\n";
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out += "factor " + std::to_string(i + 1) + " " + to_string(spec.factors[i].c) + " " +
           to_string(spec.factors[i].d) + "\n";
  }
  out += "partA";
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.in_a(i)) out += " " + std::to_string(i + 1);
  }
  return out + "\n";
}

/// FNV-1a (64 bit) of the canonical serialization, as 16 hex digits.
inline std::string spec_hash(const SurfaceSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_spec(spec)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline PartialAdelicPoint parse_point_file(const std::string& text) {
  PartialAdelicPoint P;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    auto tok = detail::tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 5) throw ParseError(lineno, "expected: place x y t precision");
    detail::at_line(lineno, [&] {
      Place v = Place::parse(tok[0]);
      if (P.covers(v)) throw ParseError(lineno, "duplicate place " + tok[0]);
      Integer prec = parse_integer(tok[4]);
      if (prec < 0 || prec > 100000) throw ParseError(lineno, "precision out of range");
      P.entries.emplace(v, LocalPoint{parse_rational(tok[1]), parse_rational(tok[2]),
                                      parse_rational(tok[3]), static_cast<unsigned>(prec.get_ui())});
      return 0;
    });
  }
  return P;
}

inline std::string serialize_point_file(const PartialAdelicPoint& P) {
  std::string out;
  for (const auto& [v, pt] : P.entries) {
    out += v.to_string() + " " + to_string(pt.x) + " " + to_string(pt.y) + " " + to_string(pt.t) +
           " " + std::to_string(pt.precision) + "\n";
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fibdescent
