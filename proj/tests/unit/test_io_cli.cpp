#include "fixtures.hpp"

#include <fibdescent/cli.hpp>
#include <fibdescent/descent.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace fibdescent;

namespace {

std::string data(const std::string& name) { return std::string(FIBDESCENT_DATA_DIR) + "/" + name; }

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fibdescent");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(SpecFormat, RoundTrip) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    auto s = fixtures::random_spec(rng, 30, 6, 4, {Place::real(), Place::finite(5)});
    if (!s) continue;
    const std::string text = serialize_spec(*s);
    EXPECT_EQ(serialize_spec(fixtures::spec_from(text)), text);
    EXPECT_EQ(spec_hash(fixtures::spec_from(text)), spec_hash(*s));
  }
}

TEST(SpecFormat, CommentsAndErrors) {
  const auto s = fixtures::spec_from("# comment\ns0 inf\n\na 2   # trailing\nb 3\nfactor 1 1 0\npartA 1\n");
  EXPECT_EQ(s.a, 2);
  EXPECT_THROW(parse_spec("s0 inf\na x\n"), ParseError);
  EXPECT_THROW(parse_spec("s0 inf\nbogus 1\n"), ParseError);
}

TEST(PointFormat, RoundTrip) {
  const auto P = parse_point_file(read_file(data("pell.points")));
  EXPECT_EQ(P.entries.size(), 3U);
  EXPECT_EQ(P.at(Place::finite(2)).precision, 14U);
  EXPECT_EQ(parse_point_file(serialize_point_file(P)).entries, P.entries);
  EXPECT_THROW(parse_point_file("2 1/0 1 1 3\n"), std::exception);
}

TEST(CertificateFormat, JsonRoundTrip) {
  auto I = fixtures::instance("s0 inf\na 1\nb -7\nfactor 1 1 -4\npartA\n");
  ASSERT_TRUE(I);
  const auto c = descend(I->spec, I->P);
  const std::string text = render_json(c);
  EXPECT_EQ(parse_certificate(text), c);
  EXPECT_EQ(render_json(parse_certificate(text)), text);
  EXPECT_NE(render_text(c).find("point_found"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"validate", data("running.spec")}).code, cli::exit_ok);
  EXPECT_EQ(invoke({"condition-d", data("running.spec")}).code, cli::exit_ok);
  EXPECT_EQ(invoke({"brauer", data("running.spec")}).code, cli::exit_ok);
  EXPECT_EQ(invoke({"selmer", data("running.spec"), "--t", "5"}).code, cli::exit_ok);
  EXPECT_EQ(invoke({"local", data("running.spec"), "--t", "5", "--place", "7"}).code, cli::exit_ok);
  EXPECT_EQ(invoke({"descend", data("pell.spec"), "--point-file", data("pell.points")}).code, cli::exit_ok);
  EXPECT_EQ(invoke({"solve", data("pell.spec"), "--t", "-1086"}).code, cli::exit_ok);
  EXPECT_EQ(invoke({}).code, cli::exit_input);
  EXPECT_EQ(invoke({"validate", data("missing.spec")}).code, cli::exit_input);
  EXPECT_EQ(invoke({"descend", data("pell.spec"), "--point-file", data("pell.points"), "--bounds", "admissible=0"})
                .code,
            cli::exit_exhausted);
  EXPECT_EQ(invoke({"descend", data("pell.spec"), "--point-file", data("pell.points"), "--bounds", "nonsense=1"})
                .code,
            cli::exit_input);
  EXPECT_EQ(invoke({"--help"}).code, cli::exit_ok);
}

TEST(Cli, JsonIsDeterministicAndParses) {
  const auto a = invoke({"descend", "--json", data("pell.spec"), "--point-file", data("pell.points")});
  const auto b = invoke({"descend", "--json", data("pell.spec"), "--point-file", data("pell.points")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto c = parse_certificate(a.out);
  EXPECT_EQ(c.outcome.kind, OutcomeKind::point_found);
  EXPECT_TRUE(reverify(fixtures::spec_from(read_file(data("pell.spec"))), c));
  const auto br = Json::parse(invoke({"brauer", "--json", data("running.spec")}).out);
  EXPECT_EQ(br["command"], "brauer");
}
