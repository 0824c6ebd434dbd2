#pragma once

#include <vector>

#include "hodgefrob/degeneration.hpp"
#include "hodgefrob/frobmod.hpp"

namespace hodgefrob {

// nabla_{d/dz_j} = d/dz_j + L_j(q) in the constant frame T_a.
struct ConnectionMatrix {
  int r = 0;
  int D = kNoTrunc;
  std::vector<SMat> L;
};

inline void require_valid(const FrobeniusModule& M, const Potential& P) {
  Report v = validate_module(M);
  if (!v) throw InputError("invalid module: " + v.first_failure()->name + " " + v.first_failure()->detail);
  Report q = validate_quantum_potential(M, P);
  if (!q) throw InputError("invalid potential: " + q.first_failure()->name + " " + q.first_failure()->detail);
}

inline int effective_order(const Potential& P, int D) { return std::min(D, P.order()); }

inline ConnectionMatrix dubrovin_connection(const FrobeniusModule& M, const Potential& P, int D = default_order()) {
  require_valid(M, P);
  if (M.r() > kMaxVars) throw InputError("at most 4 framing variables are supported");
  ConnectionMatrix C{M.r(), effective_order(P, D), {}};
  for (int j = 1; j <= M.r(); ++j)
    C.L.push_back(
        with_order(quantum_matrix(M, P, j), C.D).map([&](const Series& s) { return s.with_vars(C.r); }));
  return C;
}

inline std::vector<Mat> monodromy_logs(const FrobeniusModule& M) { return M.A; }

// Residue at q_j = 0 of the connection in d/dq_j form: (1/tau) L_j(0).
inline Matrix<Coeff> residue(const ConnectionMatrix& C, int j) {
  return C.L.at(std::size_t(j - 1)).map([](const Series& s) { return s.constant_term().shifted(-1); });
}

inline Report residue_check(const ConnectionMatrix& C, const FrobeniusModule& M) {
  Report rep;
  for (int j = 1; j <= C.r; ++j) {
    Matrix<Coeff> tau_res = residue(C, j).map([](const Coeff& c) { return c.shifted(1); });
    rep.add("residue.j=" + std::to_string(j), tau_res == coeff_matrix(M.A[std::size_t(j - 1)]));
  }
  return rep;
}

inline Report flatness_check(const ConnectionMatrix& C) {
  Report rep;
  for (int j = 0; j < C.r; ++j)
    for (int l = j + 1; l < C.r; ++l) {
      const SMat &Lj = C.L[std::size_t(j)], &Ll = C.L[std::size_t(l)];
      SMat curv = with_order(derive_z(Ll, j) - derive_z(Lj, l) + commutator(Lj, Ll), C.D);
      auto d = first_defect(curv);
      rep.add("flat.j=" + std::to_string(j + 1) + ",l=" + std::to_string(l + 1), !d.found(), d.text());
    }
  if (C.r < 2) rep.add("flat", true, "single variable");
  return rep;
}

// Every Gaussian coefficient matrix (per monomial and tau power) of L_j maps F^p into F^{p-1}.
inline Report transversality_check(const ConnectionMatrix& C, const DecFiltration& F) {
  Report rep;
  for (int j = 0; j < C.r; ++j) {
    std::map<std::pair<std::uint64_t, int>, Mat> parts;
    const SMat& L = C.L[std::size_t(j)];
    for (std::size_t a = 0; a < L.rows(); ++a)
      for (std::size_t b = 0; b < L.cols(); ++b)
        for (const auto& [key, c] : L(a, b).terms())
          for (const auto& [tp, g] : c.terms()) {
            auto [it, fresh] = parts.try_emplace({key, tp}, Mat(L.rows(), L.cols()));
            it->second(a, b) = g;
          }
    std::string bad;
    for (int p = F.p_min(); p <= F.p_max() + 1 && bad.empty(); ++p)
      for (const auto& [kt, m] : parts)
        if (!F[p - 1].contains(image(m, F[p]))) {
          bad = "p=" + std::to_string(p) + " at " + mono_name(kt.first, C.r) + " tau^" + std::to_string(kt.second);
          break;
        }
    rep.add("transversal.j=" + std::to_string(j + 1), bad.empty(), bad);
  }
  return rep;
}

// Q L_j + L_j^T Q = 0 as series.
inline Report pairing_flatness_check(const ConnectionMatrix& C, const Mat& Q) {
  Report rep;
  SMat Qs = to_series(Q);
  for (int j = 0; j < C.r; ++j) {
    const SMat& L = C.L[std::size_t(j)];
    auto d = first_defect(Qs * L + L.transpose() * Qs);
    rep.add("pairing_flat.j=" + std::to_string(j + 1), !d.found(), d.text());
  }
  return rep;
}

inline Report maximal_unipotency_check(const VHSGerm& G) {
  Report rep;
  Bigrading I;
  try {
    I = germ_bigrading(G);
  } catch (const NotMHS& e) {
    return rep.fail("limiting_mhs", e.what());
  }
  int k = G.k;
  auto dim = [&](int p, int q) { return I.at(p, q).dim(); };
  rep.add("top_dim_one", dim(k, k) == 1, "dim I^{k,k} = " + std::to_string(dim(k, k)));
  rep.add("next_dim_r", dim(k - 1, k - 1) == std::size_t(G.r()),
          "dim I^{k-1,k-1} = " + std::to_string(dim(k - 1, k - 1)));
  rep.add("off_diagonal_zero", dim(k, k - 1) == 0 && dim(k - 2, k) == 0);
  bool nonneg = true;
  for (const auto& [pq, v] : I.pieces)
    if (v.dim() > 0 && (pq.first < 0 || pq.second < 0)) nonneg = false;
  rep.add("nonnegative_indices", nonneg);
  std::vector<Vec> imgs;
  for (const auto& N : G.Ns)
    for (const auto& v : I.at(k, k).basis()) imgs.push_back(N.apply(v));
  bool span = Subspace::span(G.dim(), imgs) == I.at(k - 1, k - 1);
  rep.add("framing_spans", span, span ? "" : "span of N_j(I^{k,k}) differs from I^{k-1,k-1}");
  return rep;
}

// The limiting MHS (F_inf, rW) is Hodge-Tate, split over R, and polarized by the cone.
inline Report limiting_mhs_check(const VHSGerm& G) {
  Report rep;
  Bigrading I;
  try {
    I = germ_bigrading(G);
  } catch (const NotMHS& e) {
    return rep.fail("limiting_mhs", e.what());
  }
  rep.add("hodge_tate", is_hodge_tate(I));
  rep.add("split_real", is_split_real(I));
  rep.merge(check_polarized_by(sum_of(G.Ns, G.dim()), I, G.Q, G.k), "polarized");
  return rep;
}

// Gamma_{-1}(T_a) = sum_{deg c = deg a + 2} [d^2 phi_hbar / dz_a dz_delta(c)]_{z=0} T_c.
inline SMat gamma_minus1_from_potential(const FrobeniusModule& M, const Potential& P, int D) {
  auto delta = duality_involution(M.B);
  std::size_t n = M.dim();
  int r = M.r();
  ZPoly phi = P.as_zpoly();
  SMat G(n, n, Series::zero(r, D));
  for (std::size_t a = 0; a < n; ++a) {
    ZPoly da = phi.partial(a, r);
    for (std::size_t c = 0; c < n; ++c)
      if (M.deg(c) == M.deg(a) + 2) G(c, a) = da.partial(delta[c], r).at_zero().with_vars(r).with_order(D);
  }
  return G;
}

inline VHSGerm build_vhs_germ(const FrobeniusModule& M, const Potential& P, int D = default_order()) {
  require_valid(M, P);
  if (M.r() > kMaxVars) throw InputError("at most 4 framing variables are supported");
  int d = effective_order(P, D);
  VHSGerm G{M.k, module_hodge_filtration(M), M.A, q_form(M), SMat(), d};
  SMat g1 = gamma_minus1_from_potential(M, P, d);
  G.Gamma = gamma_from_gamma_minus1(G.Finf, G.Ns, g1, M.k, d);
  return G;
}

}  // namespace hodgefrob
