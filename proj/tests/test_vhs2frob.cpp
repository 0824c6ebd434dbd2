#include <catch_amalgamated.hpp>

#include "support/generators.hpp"

using namespace hodgefrob;
using namespace hodgefrob::testgen;

namespace {

void require_same_potential(const Potential& a, const Potential& b, int D) {
  REQUIRE(a.phi3.with_order(D) == b.phi3.with_order(D));
  REQUIRE(a.linear.size() == b.linear.size());
  for (const auto& [i, s] : a.linear) REQUIRE(s.with_order(D) == b.linear.at(i).with_order(D));
  for (const auto& [i, s] : b.linear) REQUIRE(a.linear.count(i));
  REQUIRE(a.quadratic.size() == b.quadratic.size());
  for (const auto& [i, s] : a.quadratic) REQUIRE(s.with_order(D) == b.quadratic.at(i).with_order(D));
}

}  // namespace

TEST_CASE("module and potential survive the round trip through a germ", "[vhs2frob]") {
  Gen g(701);
  int D = 5;
  for (int k = 3; k <= 5; ++k)
    for (int t = 0; t < 2; ++t) {
      FrobeniusModule M = random_chain(g, k);
      Potential P = random_chain_potential(g, M, D);
      Extraction X = extract(build_vhs_germ(M, P, D));
      REQUIRE(X.M.A == M.A);
      REQUIRE(X.M.B == M.B);
      REQUIRE(X.M.dims == M.dims);
      require_same_potential(X.P, P, D);
    }
}

TEST_CASE("a germ survives the round trip through its module", "[vhs2frob]") {
  Gen g(702);
  int D = 4;
  VHSGerm line = build_vhs_germ(chain(1, {1}), zero_potential(chain(1, {1})), D);
  FrobeniusModule C = random_chain(g, 3);
  VHSGerm G = tensor_germ(build_vhs_germ(C, random_chain_potential(g, C, D), D), line);
  Extraction X = extract(G);
  VHSGerm back = build_vhs_germ(X.M, X.P, D);
  Mat Sinv = *inverse(X.S);
  const VHSGerm& canon = X.canonical.germ;
  REQUIRE(with_order(to_series(Sinv) * canon.Gamma * to_series(X.S), D) == with_order(back.Gamma, D));
  for (int j = 0; j < G.r(); ++j) REQUIRE(Sinv * G.Ns[std::size_t(j)] * X.S == back.Ns[std::size_t(j)]);
  REQUIRE(back.Finf == transform(Sinv, canon.Finf));
}

TEST_CASE("quantum product read off the connection", "[vhs2frob]") {
  Gen g(703);
  for (int k = 3; k <= 5; ++k) {
    FrobeniusModule M = random_chain(g, k);
    Potential P = random_chain_potential(g, M, 5);
    VHSGerm G = build_vhs_germ(M, P, 5);
    for (std::size_t a = 0; a < M.dim(); ++a) {
      SVec x = quantum_product_from_X(G, 1, M.basis_vector(a));
      SVec y = quantum_product(M, P, 1, a);
      for (std::size_t c = 0; c < M.dim(); ++c) REQUIRE(x[c].with_order(5) == y[c].with_order(5));
    }
  }
}

TEST_CASE("canonical coordinates", "[vhs2frob]") {
  Gen g(704);
  FrobeniusModule M = random_chain(g, 4);
  VHSGerm G = build_vhs_germ(M, random_chain_potential(g, M, 5), 5);
  SECTION("A-model germs are already canonical") {
    CanonicalCoordinates c = canonical_coordinates(G);
    for (const auto& f : c.f) REQUIRE(f == Series(Coeff(1), 1, 5));
    REQUIRE(c.germ.Gamma == G.Gamma);
    REQUIRE(canonical_check(G));
  }
  SECTION("canonicalization is idempotent after a coordinate change") {
    Series u = random_unit(g, 1, 5);
    u = u * Coeff(u.constant_term().scalar().inv());
    VHSGerm moved = coordinate_change(G, {u}).germ;
    REQUIRE_FALSE(canonical_check(moved));
    CanonicalCoordinates c = canonical_coordinates(moved);
    REQUIRE(canonical_check(c.germ));
    CanonicalCoordinates again = canonical_coordinates(c.germ);
    REQUIRE(again.germ.Gamma == c.germ.Gamma);
    for (const auto& f : again.f) REQUIRE(f == Series(Coeff(1), 1, 5));
  }
  SECTION("maximal unipotency is required") {
    FrobeniusModule K = chain(3, {1, 0, 1});
    REQUIRE_THROWS_AS(canonical_coordinates(build_vhs_germ(K, zero_potential(K), 4)), PreconditionError);
  }
}

TEST_CASE("weight-3 extension data", "[vhs2frob]") {
  FrobeniusModule M = chain(3, {1, 5, 1});
  Potential P = zero_potential(M);
  P.phi3 = Series::q(0, 1, 6);
  ExtensionData E = extension_data_weight3(build_vhs_germ(M, P, 6));
  REQUIRE(E.report);
  REQUIRE(E.coordinates == std::vector<Series>{Series(Coeff(1), 1, 6)});
  REQUIRE(E.yukawa.size() == 1);
  REQUIRE(E.yukawa.at({1, 1, 1}) == Series(Coeff(5), 1, 6) + Series::q(0, 1, 6).tau_shift(3));
  SECTION("two parameters: Yukawa couplings are the quantum cubic") {
    Gen g(705);
    VHSGerm line = build_vhs_germ(chain(1, {1}), zero_potential(chain(1, {1})), 4);
    FrobeniusModule p2 = chain(2, {1, 1});
    FrobeniusModule M2 = extract(tensor_germ(build_vhs_germ(p2, zero_potential(p2), 4), line)).M;
    Potential P2 = zero_potential(M2);
    P2.phi3 = random_series(g, 2, 4, 3);
    REQUIRE(validate_quantum_potential(M2, P2));
    ExtensionData E2 = extension_data_weight3(build_vhs_germ(M2, P2, 4));
    REQUIRE(E2.report);
    REQUIRE(E2.yukawa.size() == 4);
    auto delta = duality_involution(M2.B);
    for (const auto& [abc, y] : E2.yukawa) {
      SVec prod = quantum_product(M2, P2, int(abc[0]), abc[1]);
      REQUIRE(y == prod[delta[abc[2]]].with_order(4));
    }
  }
  SECTION("other weights are refused") {
    FrobeniusModule M4 = chain(4, {1, 2, 2, 1});
    REQUIRE_THROWS_AS(extension_data_weight3(build_vhs_germ(M4, zero_potential(M4), 4)), PreconditionError);
  }
}
