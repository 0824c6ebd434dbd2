#include <catch_amalgamated.hpp>

#include "support/generators.hpp"

using namespace hodgefrob;
using namespace hodgefrob::testgen;

namespace {

// Weight 4, r = 2, product of a weight-3 chain with a weight-1 chain: deg-4 block has dims 3.
struct W4R2 {
  FrobeniusModule M;
  Potential P;
};

W4R2 weight4_pair(Gen& g, int D) {
  FrobeniusModule C = random_chain(g, 3);
  VHSGerm line = build_vhs_germ(chain(1, {1}), zero_potential(chain(1, {1})), D);
  Extraction X = extract(tensor_germ(build_vhs_germ(C, random_chain_potential(g, C, D), D), line));
  return {X.M, X.P};
}

}  // namespace

TEST_CASE("connection of the quintic-like instance", "[amodel]") {
  FrobeniusModule M = chain(3, {1, 5, 1});
  Potential P = zero_potential(M);
  P.phi3 = Series::q(0, 1, 6);
  ConnectionMatrix C = dubrovin_connection(M, P, 6);
  REQUIRE(C.r == 1);
  REQUIRE(residue_check(C, M));
  REQUIRE(flatness_check(C));
  REQUIRE(transversality_check(C, module_hodge_filtration(M)));
  REQUIRE(pairing_flatness_check(C, q_form(M)));
  Matrix<Coeff> res = residue(C, 1);
  REQUIRE(res(2, 1) == Coeff(Gauss(5), -1));
}

TEST_CASE("flatness agrees with commutativity of the quantum product", "[amodel]") {
  Gen g(501);
  for (int t = 0; t < 2; ++t) {
    W4R2 x = weight4_pair(g, 4);
    REQUIRE(validate_quantum_potential(x.M, x.P));
    REQUIRE(flatness_check(dubrovin_connection(x.M, x.P, 4)));
    Potential bad = x.P;
    std::size_t a = x.M.indices_of_degree(4).front();
    bad.linear[a] = bad.linear[a] + Series::q(0, 2, 4) * Series::q(0, 2, 4) * Series::q(1, 2, 4);
    Report q = validate_quantum_potential(x.M, bad);
    ConnectionMatrix C{2, 4, {quantum_matrix(x.M, bad, 1), quantum_matrix(x.M, bad, 2)}};
    REQUIRE(q.has_failure("commute") == !flatness_check(C).ok());
    REQUIRE_FALSE(flatness_check(C));
  }
}

TEST_CASE("invalid input is rejected before building", "[amodel]") {
  FrobeniusModule M = chain(3, {1, 5, 1});
  Potential P = zero_potential(M);
  P.phi3 = Series(Coeff(1), 1, 4);
  REQUIRE_THROWS_AS(dubrovin_connection(M, P, 4), InputError);
  REQUIRE_THROWS_AS(build_vhs_germ(M, P, 4), InputError);
}

TEST_CASE("germ of the A-model variation", "[amodel]") {
  Gen g(502);
  for (int k = 3; k <= 5; ++k) {
    FrobeniusModule M = random_chain(g, k);
    Potential P = random_chain_potential(g, M, 5);
    VHSGerm G = build_vhs_germ(M, P, 5);
    REQUIRE(G.Ns == monodromy_logs(M));
    REQUIRE(G.Q == q_form(M));
    REQUIRE(maximal_unipotency_check(G));
    REQUIRE(limiting_mhs_check(G));
    REQUIRE(horizontality_check(G));
    SMat g1 = germ_gamma_level(G, -1);
    REQUIRE(with_order(g1, 5) == with_order(gamma_minus1_from_potential(M, P, 5), 5));
  }
}

TEST_CASE("kappa zero breaks maximal unipotency of the limit", "[amodel]") {
  FrobeniusModule M = chain(3, {1, 0, 1});
  VHSGerm G = build_vhs_germ(M, zero_potential(M), 4);
  REQUIRE_FALSE(maximal_unipotency_check(G));
  REQUIRE_FALSE(limiting_mhs_check(G));
}
