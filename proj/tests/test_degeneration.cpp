#include <catch_amalgamated.hpp>

#include "support/generators.hpp"

using namespace hodgefrob;
using namespace hodgefrob::testgen;

namespace {

VHSGerm chain_germ(Gen& g, int k, int D) {
  FrobeniusModule M = random_chain(g, k);
  return build_vhs_germ(M, random_chain_potential(g, M, D), D);
}

VHSGerm product_germ(Gen& g, int D) {
  VHSGerm line = build_vhs_germ(chain(1, {1}), zero_potential(chain(1, {1})), D);
  return tensor_germ(chain_germ(g, 3, D), line);
}

Series random_unit_one(Gen& g, int r, int D) {
  Series u = random_unit(g, r, D);
  return u * Coeff(u.constant_term().scalar().inv());
}

}  // namespace

TEST_CASE("Gamma is determined by its level -1 part", "[degeneration]") {
  Gen g(601);
  std::vector<VHSGerm> gs{chain_germ(g, 3, 5), chain_germ(g, 4, 5), chain_germ(g, 5, 5), product_germ(g, 4)};
  for (const auto& G : gs) {
    LevelFrame f = level_frame(germ_bigrading(G));
    SMat rebuilt = gamma_from_gamma_minus1(G.Finf, G.Ns, level_part(f, G.Gamma, -1), G.k, G.D);
    REQUIRE(with_order(rebuilt, G.D) == with_order(G.Gamma, G.D));
  }
}

TEST_CASE("level -1 part of X", "[degeneration]") {
  // Commutators only lower the level, so X_{-1} = sum l_j N_j + Gamma_{-1}.
  Gen g(602);
  for (const auto& G : {chain_germ(g, 3, 5), product_germ(g, 4)}) {
    XPresentation x = x_from_germ(G);
    LevelFrame f = level_frame(germ_bigrading(G));
    REQUIRE(x.X1 == with_order(level_part(f, ell_sum(G) + G.Gamma, -1), G.D));
    REQUIRE(x.X1 == level_part(f, x.X, -1));
  }
}

TEST_CASE("horizontality", "[degeneration]") {
  Gen g(603);
  VHSGerm G = chain_germ(g, 3, 5);
  REQUIRE(horizontality_check(G));
  SECTION("a level -2 perturbation breaks it") {
    Mat N = G.Ns[0];
    SMat bump = to_series(N * N).map([&](const Series& s) { return s * Series::q(0, 1, G.D).tau_shift(2); });
    G.Gamma = G.Gamma + bump;
    Report rep = horizontality_check(G);
    REQUIRE(rep.has_failure("horizontal"));
    REQUIRE_THROWS_AS(higgs_field(G), PreconditionError);
  }
  SECTION("a constant term is rejected") {
    G.Gamma = G.Gamma + to_series(G.Ns[0] * G.Ns[0]);
    REQUIRE(horizontality_check(G).has_failure("gamma_vanishes_at_origin"));
  }
}

TEST_CASE("Higgs field", "[degeneration]") {
  Gen g(604);
  for (const auto& G : {chain_germ(g, 4, 5), product_germ(g, 4)}) {
    HiggsField h = higgs_field(G);
    REQUIRE(h.report);
    REQUIRE(h.Theta.size() == std::size_t(G.r()));
    REQUIRE(h.theta.size() == std::size_t(G.r()));
    LevelFrame f = level_frame(germ_bigrading(G));
    auto L = germ_connection(G);
    for (int j = 0; j < G.r(); ++j) {
      auto top = top_level(f, h.Theta[std::size_t(j)] - L[std::size_t(j)]);
      REQUIRE((!top || *top <= -2));
      REQUIRE(level_part(f, h.Theta[std::size_t(j)], -1) == with_order(level_part(f, L[std::size_t(j)], -1), G.D));
    }
  }
  SECTION("the log-free variant omits the conjugated operators") {
    HiggsField h = higgs_field(chain_germ(g, 3, 4), false);
    REQUIRE(h.theta.empty());
  }
}

TEST_CASE("Psi is opposite to the Hodge filtration", "[degeneration]") {
  Gen g(605);
  for (const auto& G : {chain_germ(g, 3, 5), chain_germ(g, 5, 4), product_germ(g, 4)}) {
    PsiResult ps = psi_filtration(G);
    REQUIRE(ps.report);
    REQUIRE(ps.psi == convolve(dual(conjugate(G.Finf)), germ_weight(G)));
    for (const auto& [p, d] : ps.determinants) REQUIRE(d.constant_term().is_unit());
    REQUIRE(psi_convolution_check(G));
  }
}

TEST_CASE("coordinate changes", "[degeneration]") {
  Gen g(606);
  VHSGerm G = chain_germ(g, 3, 5);
  VHSGerm canon = canonical_coordinates(G).germ;
  for (int t = 0; t < 6; ++t) {
    Series u = random_unit_one(g, 1, G.D);
    CoordinateChange c = coordinate_change(G, {u});
    REQUIRE(c.constants == std::vector<Gauss>{Gauss(1)});
    REQUIRE(c.rescale.items().empty());
    REQUIRE(horizontality_check(c.germ));
    REQUIRE(psi_filtration(c.germ).report);
    REQUIRE(canonical_coordinates(c.germ).germ.Gamma == canon.Gamma);
  }
  SECTION("a constant rescaling is certified through Psi") {
    Series u = random_unit_one(g, 1, G.D);
    CoordinateChange a = coordinate_change(G, {u}), b = coordinate_change(G, {u * Coeff(3)});
    REQUIRE(b.constants == std::vector<Gauss>{Gauss(3)});
    REQUIRE(b.germ.Gamma == a.germ.Gamma);
    REQUIRE(b.rescale);
    REQUIRE_FALSE(b.rescale.items().empty());
  }
  SECTION("units must be invertible constants") {
    REQUIRE_THROWS_AS(coordinate_change(G, {Series::q(0, 1, G.D)}), PreconditionError);
  }
}

TEST_CASE("coordinate changes of a two-parameter germ", "[degeneration]") {
  Gen g(607);
  VHSGerm G = product_germ(g, 4);
  VHSGerm canon = canonical_coordinates(G).germ;
  for (int t = 0; t < 3; ++t) {
    CoordinateChange c = coordinate_change(G, {random_unit_one(g, 2, G.D), random_unit_one(g, 2, G.D)});
    REQUIRE(horizontality_check(c.germ));
    REQUIRE(canonical_coordinates(c.germ).germ.Gamma == canon.Gamma);
  }
}
