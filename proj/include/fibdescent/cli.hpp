#pragma once

// Command-line front end. `run` parses argv, dispatches one subcommand and
// writes a report; it never calls exit(), so tests can drive it directly.
//
// Exit status: 0 success / point found, 1 input error, 2 hypothesis failed,
// 3 search exhausted.

#include <fibdescent/brauer.hpp>
#include <fibdescent/certificate.hpp>
#include <fibdescent/conditiond.hpp>
#include <fibdescent/descent.hpp>
#include <fibdescent/io.hpp>
#include <fibdescent/points.hpp>
#include <fibdescent/selmer.hpp>

#include <CLI11.hpp>

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fibdescent::cli {

constexpr int exit_ok = 0;
constexpr int exit_input = 1;
constexpr int exit_hypothesis = 2;
constexpr int exit_exhausted = 3;

namespace detail {

inline Json report_header(const SurfaceSpec& spec, const std::string& command) {
  Json j = Json::object();
  j["command"] = command;
  j["spec_hash"] = spec_hash(spec);
  j["readings"] = default_readings();
  return j;
}

inline std::string render_report(const Json& report, bool json) {
  if (json) return report.dump(2) + "\n";
  std::string out;
  fibdescent::detail::render_object(report, "", out);
  return out;
}

inline Json strings(const PlaceSet& places) {
  Json a = Json::array();
  for (const auto& v : places) a.push_back(v.to_string());
  return a;
}

inline Json elements(const std::vector<GElement>& xs, std::size_t n) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(to_string(x, n));
  return a;
}

inline Json classes(const std::vector<SquareClass>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(to_string(x.value()));
  return a;
}

/// "key=value,key=value" over the Bounds fields.
inline Bounds parse_bounds(const std::string& text) {
  Bounds b;
  if (text.empty()) return b;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bounds entry '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "pell") {
      if (value != "0" && value != "1") throw std::invalid_argument("pell takes 0 or 1");
      b.allow_pell = value == "1";
      continue;
    }
    Integer v = parse_integer(value);
    if (v < 0) throw std::invalid_argument("negative bound " + key);
    if (key == "height") {
      b.height = v;
      continue;
    }
    if (!fits_int64(v)) throw std::invalid_argument("bound " + key + " too large");
    const unsigned long u = v.get_ui();
    if (key == "admissible") b.admissible = u;
    else if (key == "prime_scan") b.prime_scan = u;
    else if (key == "max_steps") b.max_steps = u;
    else if (key == "witness_places") b.witness_places = u;
    else if (key == "fiber_attempts") b.fiber_attempts = u;
    else throw std::invalid_argument("unknown bound '" + key + "'");
  }
  return b;
}

inline SurfaceSpec load_spec(const std::string& path) {
  return validate_spec(parse_spec(read_file(path)));
}

}  // namespace detail

inline int cmd_validate(const std::string& path, bool json, std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  Json r = detail::report_header(spec, "validate");
  r["valid"] = true;
  r["canonical"] = serialize_spec(spec);
  r["factors"] = spec.size();
  r["d"] = to_string(spec.d());
  r["S0"] = detail::strings(spec.s0);
  r["S_bad"] = detail::strings(compute_S_bad(spec));
  out << detail::render_report(r, json);
  return exit_ok;
}

inline int cmd_condition_d(const std::string& path, bool json, std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  const std::size_t n = spec.size();
  ConditionDReport rep = check_condition_D(spec);
  Json r = detail::report_header(spec, "condition-d");
  r["holds"] = rep.holds;
  r["G_D_dimension"] = rep.GD.dimension();
  r["G_D_basis"] = detail::elements(rep.GD.basis, n);
  r["G^D_dimension"] = rep.GDhat.dimension();
  r["G^D_basis"] = detail::elements(rep.GDhat.basis, n);
  r["witnesses"] = detail::elements(rep.witnesses, n);
  r["hat_witnesses"] = detail::elements(rep.hat_witnesses, n);
  out << detail::render_report(r, json);
  return rep.holds ? exit_ok : exit_hypothesis;
}

inline int cmd_selmer(const std::string& path, const std::string& t_text, bool json,
                      std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  const Rational t = parse_rational(t_text);
  FiberSpec f = fiber(spec, t);
  TorusData torus = make_torus(f.torus_d, fiber_bad_places(spec, t));
  SelmerSubspace sel = selmer_group(torus), dual = dual_selmer_group(torus);
  Json r = detail::report_header(spec, "selmer");
  r["t"] = to_string(t);
  r["aA"] = to_string(f.aA);
  r["bB"] = to_string(f.bB);
  r["torus_d"] = to_string(torus.d.value());
  r["S"] = detail::strings(torus.S);
  r["selmer_dimension"] = sel.dimension();
  r["selmer_basis"] = detail::classes(sel.basis());
  r["dual_selmer_dimension"] = dual.dimension();
  r["dual_selmer_basis"] = detail::classes(dual.basis());
  try {
    DimensionIdentity id = dimension_identity(torus, spec.s0);
    r["split_places"] = id.split;
    r["dimension_identity"] = id.holds();
  } catch (const std::invalid_argument& e) {
    r["dimension_identity"] = std::string("not applicable: ") + e.what();
  }
  out << detail::render_report(r, json);
  return exit_ok;
}

inline int cmd_brauer(const std::string& path, bool json, std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  Json r = detail::report_header(spec, "brauer");
  Json gens = Json::array();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    QuaternionClass q = brauer_generator(spec, i);
    Json g = Json::object();
    g["index"] = i + 1;
    g["left"] = to_string(q.left);
    g["right"] = to_string(q.right.slope) + "*t + " + to_string(q.right.intercept);
    Json residues = Json::object();
    for (std::size_t j = 0; j < spec.size(); ++j) {
      const Rational root = spec.factors[j].root();
      residues["t=" + to_string(root)] = to_string(residue_at(q, ClosedPoint::rational(root)).value());
    }
    g["residues"] = residues;
    gens.push_back(g);
  }
  r["generators"] = gens;
  out << detail::render_report(r, json);
  return exit_ok;
}

inline int cmd_local(const std::string& path, const std::string& t_text,
                     const std::string& place_text, bool json, std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  const Rational t = parse_rational(t_text);
  const Place v = Place::parse(place_text);
  FiberSpec f = fiber(spec, t);
  const bool in_s0 = contains(spec.s0, v);
  LocalSolubility s = local_solubility(f.aA, f.bB, v, in_s0 ? Model::rational : Model::integral);
  Json r = detail::report_header(spec, "local");
  r["t"] = to_string(t);
  r["place"] = v.to_string();
  r["model"] = in_s0 ? "rational" : "integral";
  r["status"] = to_string(s.status);
  r["certificate"] = s.certificate;
  if (s.witness) {
    Json w = Json::object();
    w["x"] = to_string(s.witness->x);
    w["y"] = to_string(s.witness->y);
    w["precision"] = s.witness->precision;
    r["witness"] = w;
  }
  if (auto g = good_place_criterion(spec, compute_S_bad(spec), t, v)) r["good_place_criterion"] = *g;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.p(i, t) != 0) r["invariant_" + std::to_string(i + 1)] = invariant(spec, i, t, v);
  }
  out << detail::render_report(r, json);
  return s.status == Solubility::inconclusive ? exit_exhausted : exit_ok;
}

inline int cmd_descend(const std::string& path, const std::string& point_path,
                       const std::string& bounds_text, bool json, std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  PartialAdelicPoint P = parse_point_file(read_file(point_path));
  Bounds bounds = detail::parse_bounds(bounds_text);
  Certificate c = descend(spec, P, bounds);
  out << (json ? render_json(c) : render_text(c));
  return exit_code(c);
}

inline int cmd_solve(const std::string& path, const std::string& t_text, const std::string& height,
                     bool json, std::ostream& out) {
  SurfaceSpec spec = detail::load_spec(path);
  const Rational t = parse_rational(t_text);
  const Integer h = parse_integer(height);
  if (h < 0) throw std::invalid_argument("negative height");
  FiberSpec f = fiber(spec, t);
  Json r = detail::report_header(spec, "solve");
  r["t"] = to_string(t);
  r["aA"] = to_string(f.aA);
  r["bB"] = to_string(f.bB);
  r["height"] = to_string(h);
  auto s = solve_global(f.aA, f.bB, spec.s0, h);
  r["found"] = s.has_value();
  if (s) {
    r["x"] = to_string(s->x);
    r["y"] = to_string(s->y);
    r["method"] = s->method;
    r["verified"] = verify_integral_point(spec, s->x, s->y, t);
  }
  out << detail::render_report(r, json);
  return s ? exit_ok : exit_exhausted;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Descent-fibration solver for a p_A(t) x^2 + b p_B(t) y^2 = 1"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable output");

  std::string spec_path, t_text, place_text, point_path, bounds_text, height = "1000";
  auto spec_arg = [&](CLI::App* sub) {
    sub->add_option("spec", spec_path, "surface specification file")->required();
    sub->add_flag("--json", json, "machine-readable output");
  };
  auto* validate = app.add_subcommand("validate", "check a specification");
  spec_arg(validate);
  auto* cond = app.add_subcommand("condition-d", "decide Condition (D)");
  spec_arg(cond);
  auto* selmer = app.add_subcommand("selmer", "Selmer groups of the fibre torus");
  spec_arg(selmer);
  selmer->add_option("--t", t_text, "base point")->required();
  auto* brauer = app.add_subcommand("brauer", "vertical Brauer generators and residues");
  spec_arg(brauer);
  auto* local = app.add_subcommand("local", "local solubility of one fibre at one place");
  spec_arg(local);
  local->add_option("--t", t_text, "base point")->required();
  local->add_option("--place", place_text, "inf or a prime")->required();
  auto* desc = app.add_subcommand("descend", "full descent pipeline");
  spec_arg(desc);
  desc->add_option("--point-file", point_path, "partial adelic point")->required();
  desc->add_option("--bounds", bounds_text, "key=value,... (admissible, prime_scan, max_steps, "
                                            "witness_places, fiber_attempts, height, pell)");
  auto* solve = app.add_subcommand("solve", "bounded global search on one fibre");
  spec_arg(solve);
  solve->add_option("--t", t_text, "base point")->required();
  solve->add_option("--height", height, "height bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  }

  try {
    if (*validate) return cmd_validate(spec_path, json, out);
    if (*cond) return cmd_condition_d(spec_path, json, out);
    if (*selmer) return cmd_selmer(spec_path, t_text, json, out);
    if (*brauer) return cmd_brauer(spec_path, json, out);
    if (*local) return cmd_local(spec_path, t_text, place_text, json, out);
    if (*desc) return cmd_descend(spec_path, point_path, bounds_text, json, out);
    if (*solve) return cmd_solve(spec_path, t_text, height, json, out);
  } catch (const DescentInvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  }
  return exit_input;
}

}  // namespace fibdescent::cli
