#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"

#include "pdediscover/term.hpp"

namespace pd = pdediscover;
using Eigen::VectorXd;

namespace {

// Random values for u, u_x, ... and v, keyed by (field, derivative).
struct RandomFields {
  explicit RandomFields(std::uint64_t seed, Eigen::Index rows) : rng(seed), rows(rows) {}
  const VectorXd& operator()(const std::string& field, int derivative) {
    auto key = std::make_pair(field, derivative);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, oracle::gaussian_vector(rng, rows)).first;
    return it->second;
  }
  oracle::Rng rng;
  Eigen::Index rows;
  std::map<std::pair<std::string, int>, VectorXd> cache;
};

}  // namespace

TEST_SUITE("term") {
  TEST_CASE("single field value") {
    const auto t = pd::parse_term("u");
    REQUIRE(t.factors().size() == 1);
    CHECK(t.factors()[0] == pd::Factor{"u", pd::Wrapper::none, 0, 1});
    CHECK(t.name() == "u");
  }

  TEST_CASE("power times derivative") {
    const auto t = pd::parse_term("u^2*u_xxx");
    REQUIRE(t.factors().size() == 2);
    CHECK(t.factors()[0] == pd::Factor{"u", pd::Wrapper::none, 0, 2});
    CHECK(t.factors()[1] == pd::Factor{"u", pd::Wrapper::none, 3, 1});
    CHECK(t.max_derivative() == 3);
  }

  TEST_CASE("equal bases merge and order does not matter") {
    CHECK(pd::parse_term("sin(u)*sin(u)") == pd::parse_term("sin(u)^2"));
    CHECK(pd::parse_term("u_xx * u") == pd::parse_term("u*u_xx"));
    CHECK(pd::parse_term("u*u*u") == pd::parse_term("u^3"));
    CHECK(pd::parse_term("u * |u|^2").name() == "|u|^2*u");
    CHECK(pd::parse_term(" 1 ").is_constant());
    CHECK(pd::parse_term("1*u").name() == "u");
    CHECK(pd::parse_term("cos(u)*sin(u)").name() == "sin(u)*cos(u)");
  }

  TEST_CASE("sin(u)*sin(u) and sin(u)^2 evaluate identically") {
    RandomFields fields(5, 50);
    pd::FactorLookup<double> lookup = [&](const std::string& f, int d) -> const VectorXd& { return fields(f, d); };
    const VectorXd a = pd::evaluate_term(pd::parse_term("sin(u)*sin(u)"), 50, lookup);
    const VectorXd b = pd::evaluate_term(pd::parse_term("sin(u)^2"), 50, lookup);
    CHECK(a == b);
    const VectorXd& u = fields("u", 0);
    for (Eigen::Index i = 0; i < 50; ++i) CHECK(a(i) == doctest::Approx(std::sin(u(i)) * std::sin(u(i))));
  }

  TEST_CASE("evaluation matches pointwise definitions") {
    RandomFields fields(8, 40);
    pd::FactorLookup<double> lookup = [&](const std::string& f, int d) -> const VectorXd& { return fields(f, d); };
    const VectorXd got = pd::evaluate_term(pd::parse_term("u^2*u_xx*cos(v)*|u|"), 40, lookup);
    const VectorXd& u = fields("u", 0);
    const VectorXd& uxx = fields("u", 2);
    const VectorXd& v = fields("v", 0);
    for (Eigen::Index i = 0; i < 40; ++i) {
      CHECK(got(i) == doctest::Approx(u(i) * u(i) * uxx(i) * std::cos(v(i)) * std::abs(u(i))));
    }
    CHECK(pd::evaluate_term(pd::CandidateTerm{}, 40, lookup) == VectorXd::Ones(40));
  }

  TEST_CASE("complex evaluation uses the modulus for |u|") {
    Eigen::VectorXcd u(3);
    u << std::complex<double>(3, 4), std::complex<double>(0, 1), std::complex<double>(-2, 0);
    pd::FactorLookup<std::complex<double>> lookup = [&](const std::string&, int) -> const Eigen::VectorXcd& {
      return u;
    };
    const auto got = pd::evaluate_term(pd::parse_term("|u|^2*u"), 3, lookup);
    CHECK(std::abs(got(0) - 25.0 * u(0)) < 1e-12);
    CHECK(std::abs(got(1) - u(1)) < 1e-12);
    CHECK(std::abs(got(2) - 4.0 * u(2)) < 1e-12);
  }

  TEST_CASE("print then parse is a fixed point") {
    for (const char* expr : {"u", "u^2*u_xxx", "sin(u)^2", "|u|^2*u", "u_x*v_xx^3", "cos(w)", "1", "u_xxxx",
                             "v*u", "sin(u)*cos(u)*u_x"}) {
      const auto t = pd::parse_term(expr);
      CHECK(pd::parse_term(t.name()) == t);
      CHECK(pd::parse_term(t.name()).name() == t.name());
    }
  }

  TEST_CASE("syntax errors report a position") {
    try {
      pd::parse_term("u*+u");
      FAIL("expected a parse error");
    } catch (const pd::ParseError& e) {
      CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(pd::parse_term(""), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("u^"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("u^0"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("sin(u"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("|u"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("2*u"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("u_y"), pd::ParseError);
  }

  TEST_CASE("semantic errors") {
    try {
      pd::parse_term("u_xxxxx");
      FAIL("expected a parse error");
    } catch (const pd::ParseError& e) {
      CHECK(std::string(e.what()).find("exceeds 4") != std::string::npos);
    }
    CHECK_THROWS_AS(pd::parse_term("u_t"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_term("w*u", {"u"}), pd::ParseError);
    CHECK_NOTHROW(pd::parse_term("w*u", {"u", "w"}));
  }

  TEST_CASE("output terms") {
    const auto t = pd::parse_output("u_t");
    CHECK(t.field == "u");
    CHECK(t.time_order == 1);
    CHECK(pd::parse_output("v_tt").time_order == 2);
    CHECK(pd::parse_output("v_tt").name() == "v_tt");
    CHECK_THROWS_AS(pd::parse_output("u"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_output("u_x"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_output("u_ttt"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_output("u_t*u"), pd::ParseError);
    CHECK_THROWS_AS(pd::parse_output("w_t", {"u"}), pd::ParseError);
  }
}
