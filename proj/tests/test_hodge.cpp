#include <catch_amalgamated.hpp>

#include "support/generators.hpp"

using namespace hodgefrob;
using namespace hodgefrob::testgen;

namespace {

// Weight-1 structure on C^2: F^1 spanned by (1, i).
DecFiltration weight1_hodge() {
  return DecFiltration(2, 0, {Subspace::full(2), Subspace::span(2, {{Gauss(1), Gauss::i()}})});
}

}  // namespace

TEST_CASE("pure structures and polarization", "[hodge]") {
  DecFiltration F = weight1_hodge();
  REQUIRE(check_pure(F, 1));
  REQUIRE_FALSE(check_pure(F, 2));
  Mat Q(2, 2);
  Q(0, 1) = 1;
  Q(1, 0) = -1;
  SECTION("one sign polarizes, the other does not") {
    Report a = check_polarization(F, 1, Q), b = check_polarization(F, 1, -Q);
    REQUIRE(a.ok() != b.ok());
    REQUIRE((a.ok() || b.ok()));
  }
  SECTION("symmetric form is rejected for odd weight") {
    Mat S = Mat::identity(2);
    REQUIRE(check_polarization(F, 1, S).has_failure("symmetry"));
  }
}

TEST_CASE("Deligne bigrading of a pure weight-1 structure", "[hodge]") {
  DecFiltration F = weight1_hodge();
  MHS m{F, IncFiltration::trivial(2, 1)};
  Bigrading I = deligne_bigrading(m);
  REQUIRE(I.at(1, 0).dim() == 1);
  REQUIRE(I.at(0, 1).dim() == 1);
  REQUIRE(I.at(0, 1) == conjugate(I.at(1, 0)));
  REQUIRE(verify_bigrading(I, m));
}

TEST_CASE("Deligne bigrading recovers split bigradings", "[hodge]") {
  Gen g(301);
  for (int t = 0; t < 40; ++t) {
    SplitMHS s = random_split_mhs(g, 6);
    Bigrading I = deligne_bigrading(s.m);
    REQUIRE(I == s.I);
    REQUIRE(verify_bigrading(I, s.m));
    MHS tw = unipotent_twist(g, s);
    Report r = verify_bigrading(deligne_bigrading(tw), tw);
    REQUIRE(r.ok());
    REQUIRE(is_opposite(tw.F, barphi(tw)).ok());
  }
}

TEST_CASE("non-mixed input is rejected", "[hodge]") {
  DecFiltration F(2, 0, {Subspace::full(2), Subspace::coordinate(2, {0})});
  MHS m{F, IncFiltration::trivial(2, 1)};
  REQUIRE_FALSE(check_mhs(m));
  REQUIRE_THROWS_AS(deligne_bigrading(m), NotMHS);
}

TEST_CASE("weight filtration of a nilpotent", "[hodge]") {
  SECTION("single Jordan block of length 4") {
    Mat N = jordan_matrix({4});
    IncFiltration W = weight_filtration(N, 3);
    REQUIRE(check_weight_axioms(N, W, 3));
    for (int i = 0; i <= 6; ++i) REQUIRE(W[i].dim() - W[i - 1].dim() == (i % 2 == 0 ? 1u : 0u));
  }
  SECTION("random conjugated Jordan types") {
    Gen g(302);
    for (int t = 0; t < 30; ++t) {
      Mat N = random_nilpotent(g, 7);
      int c = g.uniform(-2, 4);
      REQUIRE(check_weight_axioms(N, weight_filtration(N, c), c));
    }
  }
  SECTION("non-nilpotent input") { REQUIRE_THROWS_AS(weight_filtration(Mat::identity(2), 0), NotNilpotent); }
}

TEST_CASE("relative weight filtration with trivial W is the shifted weight filtration", "[hodge]") {
  Gen g(303);
  for (int t = 0; t < 20; ++t) {
    Mat N = random_nilpotent(g, 6);
    int k = g.uniform(-1, 3);
    RelativeWeight rw = relative_weight_filtration(N, IncFiltration::trivial(N.rows(), k));
    REQUIRE(rw.M.has_value());
    REQUIRE(*rw.M == weight_filtration(N, k));
  }
}

TEST_CASE("relative weight filtration on a two-step W", "[hodge]") {
  // N maps a weight-2 vector onto a weight-0 vector: M exists and is verified.
  Mat N(2, 2);
  N(0, 1) = 1;
  IncFiltration W(2, 0, {Subspace::coordinate(2, {0}), Subspace::coordinate(2, {0}), Subspace::full(2)});
  RelativeWeight rw = relative_weight_filtration(N, W);
  REQUIRE(rw.report);
  REQUIRE(check_relative_weight(N, W, *rw.M));
}

TEST_CASE("cone weight filtration", "[hodge]") {
  FrobeniusModule M = tensor(chain(2, {1, 1}), chain(1, {1}));
  auto [W, rep] = weight_filtration_cone(M.A, 3);
  REQUIRE(rep);
  REQUIRE(W == weight_filtration(M.A[0] + M.A[1], 3));
}

TEST_CASE("polarization by a Lefschetz operator", "[hodge]") {
  FrobeniusModule M = chain(3, {1, 5, 1});
  Bigrading I = module_bigrading(M);
  Mat Q = q_form(M);
  SECTION("the framing polarizes") { REQUIRE(check_polarized_by(M.A[0], I, Q, 3)); }
  SECTION("positive scaling does not change the verdict") {
    for (long s : {2L, 7L})
      REQUIRE(check_polarized_by(scaled(M.A[0], Gauss(Rational(s, 3))), I, Q, 3).ok() ==
              check_polarized_by(M.A[0], I, Q, 3).ok());
  }
  SECTION("the zero operator fails hard Lefschetz") { REQUIRE_FALSE(check_polarized_by(Mat(4, 4), I, Q, 3)); }
  SECTION("the opposite form fails definiteness") { REQUIRE_FALSE(check_polarized_by(M.A[0], I, -Q, 3)); }
  SECTION("preconditions") {
    Mat bad = M.A[0].transpose();
    REQUIRE_THROWS_AS(check_polarized_by(bad, I, Q, 3), PreconditionError);
  }
}

TEST_CASE("polarization sign on primitive pieces below the top", "[hodge]") {
  // Product of a weight-2 and a weight-1 chain: V_2 carries a primitive line, which the sign convention must accept.
  FrobeniusModule M = tensor(chain(2, {1, 1}), chain(1, {1}));
  REQUIRE(check_framing(M));
  // A weight-2 module with positive pairing on V_2 fails the index condition on its primitive part.
  FrobeniusModule bad;
  bad.k = 2;
  bad.dims = {1, 2, 1};
  bad.B = Mat(4, 4);
  bad.B(0, 3) = bad.B(3, 0) = bad.B(1, 1) = bad.B(2, 2) = 1;
  for (std::size_t j = 1; j <= 2; ++j) {
    Mat A(4, 4);
    A(j, 0) = 1;
    A(3, j) = 1;
    bad.A.push_back(A);
  }
  REQUIRE(validate_module(bad));
  REQUIRE_FALSE(check_framing(bad));
  REQUIRE(check_framing(weight2(2)));
}

TEST_CASE("morphism type on a bigrading", "[hodge]") {
  Bigrading I{2, {}};
  I.set(1, 1, Subspace::coordinate(2, {0}));
  I.set(0, 1, Subspace::coordinate(2, {1}));
  Mat N(2, 2);
  N(1, 0) = 1;
  REQUIRE_FALSE(check_morphism_type(N, I, -1, -1));
  REQUIRE(check_morphism_type(N, I, -1, 0));
}
