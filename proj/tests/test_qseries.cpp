#include <catch_amalgamated.hpp>

#include "support/generators.hpp"

using namespace hodgefrob;
using namespace hodgefrob::testgen;

namespace {

Series random_full(Gen& g, int r, int D) {
  Series s = random_series(g, r, D, 4, true);
  if (g.coin()) s = s + Series::monomial(mono::qvar(0), Coeff(Gauss(g.rat()), g.uniform(-1, 2)), r, D);
  return s;
}

}  // namespace

TEST_CASE("scalar parsing and printing", "[qseries]") {
  REQUIRE(parse_gauss("3/6") == Gauss(Rational(1, 2)));
  REQUIRE(parse_gauss("1/2-3/4*i") == Gauss(Rational(1, 2), Rational(-3, 4)));
  REQUIRE(parse_gauss("-i") == -Gauss::i());
  REQUIRE(parse_gauss("2i") == Gauss(0, 2));
  REQUIRE(to_string(Gauss(Rational(1, 2), Rational(-3, 4))) == "1/2-3/4*i");
  REQUIRE_THROWS_AS(parse_rational("1/0"), ParseError);
  REQUIRE_THROWS_AS(parse_rational("1.5"), ParseError);
  Gen g(201);
  for (int t = 0; t < 50; ++t) {
    Gauss x(g.rat(), g.rat());
    REQUIRE(parse_gauss(to_string(x)) == x);
  }
}

TEST_CASE("tau coefficients", "[qseries]") {
  Coeff a = Coeff::tau(3) + Coeff(5);
  REQUIRE((a * Coeff::tau(-3)).at(0) == Gauss(1));
  REQUIRE(a.conj() == Coeff(5) - Coeff::tau(3));
  REQUIRE_THROWS(a.inv());
  REQUIRE(Coeff::tau(2).inv() == Coeff::tau(-2));
  REQUIRE(std::abs(Coeff::tau(1).eval() - cplx(0, kTwoPi)) < 1e-12);
}

TEST_CASE("ring axioms at the truncation order", "[qseries]") {
  Gen g(202);
  for (int t = 0; t < 40; ++t) {
    int r = g.uniform(1, 3), D = g.uniform(2, 6);
    Series a = random_full(g, r, D), b = random_full(g, r, D), c = random_full(g, r, D);
    REQUIRE((a * b) * c == a * (b * c));
    REQUIRE(a * (b + c) == a * b + a * c);
    REQUIRE(a * b == b * a);
    REQUIRE(a - a == Series::zero(r, D));
    Series ab = a * b;
    for (const auto& [k, v] : ab.terms()) REQUIRE(mono::qdeg(k) <= D);
  }
}

TEST_CASE("derivations", "[qseries]") {
  Gen g(203);
  for (int t = 0; t < 30; ++t) {
    int r = 3, D = 5;
    Series f = random_full(g, r, D) + Series::ell(1, r, D) * random_full(g, r, D);
    Series h = random_full(g, r, D);
    for (int j = 0; j < r; ++j) {
      for (int k = 0; k < r; ++k) REQUIRE(f.derive_z(j).derive_z(k) == f.derive_z(k).derive_z(j));
      REQUIRE((f * h).derive_z(j) == f.derive_z(j) * h + f * h.derive_z(j));
    }
  }
  Series q1 = Series::q(0, 1, 4);
  REQUIRE(q1.derive_z(0) == q1.tau_shift(1));
  REQUIRE(Series::ell(0, 1, 4).derive_z(0) == Series(1));
}

TEST_CASE("exp, log and inverse", "[qseries]") {
  Gen g(204);
  for (int t = 0; t < 25; ++t) {
    int r = g.uniform(1, 2), D = 6;
    Series x = random_series(g, r, D, 3);
    REQUIRE(series_log(series_exp(x)) == x.with_vars(r));
    Series u = random_unit(g, r, D);
    REQUIRE(u * series_inverse(u) == Series(Coeff(1), r, D));
    REQUIRE(series_exp(series_log(u)) == u);
  }
  REQUIRE_THROWS(series_exp(Series(1)));
}

TEST_CASE("substitution is a ring map with the chain rule", "[qseries]") {
  Gen g(205);
  for (int t = 0; t < 15; ++t) {
    int r = 2, D = 5;
    Series a = random_series(g, r, D, 3, true), b = random_series(g, r, D, 3, true);
    std::vector<Series> u{Series::q(0, r, D) * random_unit(g, r, D), Series::q(1, r, D) * random_unit(g, r, D)};
    REQUIRE(compose(a * b, u) == compose(a, u) * compose(b, u));
    REQUIRE(compose(a + b, u) == compose(a, u) + compose(b, u));
    // chain rule checked numerically: d/dt a(u(t q)) at t = 1 against sum_j (q_j d/dq_j u_l) (da/du_l)
    std::vector<cplx> pt{cplx(0.03, 0.01), cplx(-0.02, 0.015)};
    std::vector<cplx> upt{u[0].evaluate(pt), u[1].evaluate(pt)};
    cplx lhs = 0, rhs = 0;
    Series comp = compose(a, u);
    for (int j = 0; j < r; ++j) lhs += comp.euler(j).evaluate(pt);
    for (int l = 0; l < r; ++l) {
      cplx du = 0;
      for (int j = 0; j < r; ++j) du += u[std::size_t(l)].euler(j).evaluate(pt);
      rhs += du * a.euler(l).evaluate(upt) / upt[std::size_t(l)];
    }
    REQUIRE(std::abs(lhs - rhs) < 1e-6);
  }
}

TEST_CASE("series matrices", "[qseries]") {
  Gen g(206);
  int r = 1, D = 6;
  SMat N(3, 3, Series::zero(r, D));
  N(1, 0) = random_series(g, r, D);
  N(2, 1) = random_series(g, r, D);
  N(2, 0) = random_series(g, r, D);
  SMat E = exp_nilpotent(N);
  REQUIRE(with_order(log_unipotent(E), D) == N);
  REQUIRE(with_order(E * exp_nilpotent(-N), D) == series_identity(3));
  SMat M = series_identity(3) + N;
  M(0, 0) = M(0, 0) + Series(Coeff(2), r, D);
  REQUIRE(with_order(M * series_matrix_inverse(M), D) == with_order(series_identity(3, r, D), D));
  SMat full(2, 2, Series(1));
  REQUIRE_THROWS_AS(exp_nilpotent(full), NotNilpotent);
}

TEST_CASE("numeric evaluation", "[qseries]") {
  Series s = Series::q(0, 1, 6) * Coeff::tau(3) + Series(Coeff(5), 1, 6);
  cplx v = s.evaluate({cplx(0.01)});
  REQUIRE(std::abs(v - (5.0 + 0.01 * std::pow(cplx(0, kTwoPi), 3))) < 1e-9);
}
