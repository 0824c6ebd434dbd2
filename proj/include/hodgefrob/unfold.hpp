#pragma once

#include <random>
#include <vector>

#include "hodgefrob/amodel.hpp"
#include "hodgefrob/degeneration.hpp"
#include "hodgefrob/frobmod.hpp"

namespace hodgefrob {

// Graded Frobenius algebra on the space of a module: prod[a][b] = T_a o T_b.
struct FrobeniusAlgebra {
  FrobeniusModule M;
  std::vector<std::vector<Vec>> prod;

  std::size_t dim() const { return M.dim(); }
};

inline Vec dual_vector(const FrobeniusModule& M, std::size_t c) {
  auto delta = duality_involution(M.B);
  return M.basis_vector(delta[c]);
}

// Unit, V_2 by the module action, the remaining products forced by the pairing:
// complementary degree 0 gives B(v,w) T_delta(0), complementary degree 2 gives B(v o w, T_c) = B(w, T_c * v).
inline FrobeniusAlgebra algebra_from_module_low_weight(const FrobeniusModule& M) {
  if (M.k > 5) throw InputError("no low-weight algebra construction for weight " + std::to_string(M.k));
  std::size_t n = M.dim();
  auto delta = duality_involution(M.B);
  FrobeniusAlgebra A{M, std::vector<std::vector<Vec>>(n, std::vector<Vec>(n, Vec(n)))};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      int da = M.deg(a), db = M.deg(b);
      Vec& out = A.prod[a][b];
      if (da == 0 || db == 0) {
        out = M.basis_vector(da == 0 ? b : a);
      } else if (da == 2 || db == 2) {
        std::size_t j = da == 2 ? a : b, w = da == 2 ? b : a;
        out = M.A[j - 1].col(w);
      } else if (da + db == 2 * M.k) {
        out[delta[0]] = M.B(a, b);
      } else if (da + db == 2 * M.k - 2) {
        for (int c = 1; c <= M.r(); ++c) {
          Vec tv = M.A[std::size_t(c - 1)].col(a);
          Gauss s;
          for (std::size_t x = 0; x < n; ++x)
            if (!tv[x].is_zero()) s += M.B(b, x) * tv[x];
          out[delta[std::size_t(c)]] += s;
        }
      }
    }
  return A;
}

inline Vec poly_times(const FrobeniusModule& M, const FramingPoly& P, const FramingPoly& Q) {
  FramingPoly PQ;
  for (const auto& [m1, c1] : P)
    for (const auto& [m2, c2] : Q) {
      auto m = m1;
      m.insert(m.end(), m2.begin(), m2.end());
      std::sort(m.begin(), m.end());
      PQ[m] += c1 * c2;
    }
  return apply_poly(M, PQ, M.basis_vector(0));
}

// v_a o v_b = (P_a P_b) * e for preimages P_a * e = v_a.
inline FrobeniusAlgebra algebra_from_module_generated(const FrobeniusModule& M) {
  auto cert = is_generated_by_v2(M);
  if (!cert.generated)
    throw InputError("module is not generated by V_2: deficient in degree " + std::to_string(cert.deficient_degree));
  std::size_t n = M.dim();
  FrobeniusAlgebra A{M, std::vector<std::vector<Vec>>(n, std::vector<Vec>(n))};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) A.prod[a][b] = poly_times(M, cert.preimages[a], cert.preimages[b]);
  return A;
}

inline Vec alg_mul(const FrobeniusAlgebra& A, const Vec& u, const Vec& v) {
  std::size_t n = A.dim();
  Vec out(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (u[a].is_zero()) continue;
    for (std::size_t b = 0; b < n; ++b) {
      if (v[b].is_zero()) continue;
      Gauss s = u[a] * v[b];
      for (std::size_t c = 0; c < n; ++c)
        if (!A.prod[a][b][c].is_zero()) out[c] += s * A.prod[a][b][c];
    }
  }
  return out;
}

inline Report algebra_validate(const FrobeniusAlgebra& A) {
  Report rep;
  const FrobeniusModule& M = A.M;
  std::size_t n = A.dim();
  std::string bad_unit, bad_comm, bad_grade, bad_b, bad_assoc, bad_restrict;
  for (std::size_t a = 0; a < n; ++a) {
    if (A.prod[0][a] != M.basis_vector(a) && bad_unit.empty()) bad_unit = "a=" + std::to_string(a);
    for (std::size_t b = 0; b < n; ++b) {
      if (A.prod[a][b] != A.prod[b][a] && bad_comm.empty()) bad_comm = idx_name({a, b});
      for (std::size_t c = 0; c < n; ++c)
        if (!A.prod[a][b][c].is_zero() && M.deg(c) != M.deg(a) + M.deg(b) && bad_grade.empty())
          bad_grade = idx_name({a, b});
    }
  }
  for (int j = 1; j <= M.r(); ++j)
    for (std::size_t b = 0; b < n; ++b)
      if (A.prod[std::size_t(j)][b] != M.A[std::size_t(j - 1)].col(b) && bad_restrict.empty())
        bad_restrict = idx_name({std::size_t(j), b});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        if (bad_b.empty() && bilinear(M.B, A.prod[a][b], M.basis_vector(c)) !=
                                 bilinear(M.B, M.basis_vector(b), A.prod[a][c]))
          bad_b = idx_name({a, b, c});
        if (bad_assoc.empty() && alg_mul(A, M.basis_vector(a), A.prod[b][c]) != alg_mul(A, A.prod[a][b], M.basis_vector(c)))
          bad_assoc = idx_name({a, b, c});
      }
  rep.add("unit", bad_unit.empty(), bad_unit);
  rep.add("commutative", bad_comm.empty(), bad_comm);
  rep.add("graded", bad_grade.empty(), bad_grade);
  rep.add("pairing_compatible", bad_b.empty(), bad_b);
  rep.add("associative", bad_assoc.empty(), bad_assoc);
  rep.add("restricts_to_module", bad_restrict.empty(), bad_restrict);
  return rep;
}

// phi_hat_0 = c(v,v,v)/6 with c(u,v,w) = B(u o v, w).
inline CubicForm hat_classical_potential(const FrobeniusAlgebra& A) {
  std::size_t n = A.dim();
  auto c = [&](std::size_t a, std::size_t b, std::size_t d) {
    return bilinear(A.M.B, A.prod[a][b], A.M.basis_vector(d));
  };
  CubicForm f;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      for (std::size_t d = b; d < n; ++d) {
        Gauss v = c(a, b, d);
        if (v != c(b, a, d) || v != c(a, d, b) || v != c(d, b, a))
          throw InputError("structure constants are not totally symmetric at " + idx_name({a, b, d}));
        if (v.is_zero()) continue;
        long perms = (a == d) ? 1 : (a == b || b == d) ? 3 : 6;
        f[{a, b, d}] = v * Gauss(Rational(perms, 6));
      }
  return f;
}

// Structure tensor t[a][b][c]: coefficient of T_c in T_a o_z T_b, polynomial in z with series coefficients.
struct UnfoldedProduct {
  std::size_t n = 0;
  int r = 0;
  std::vector<std::vector<std::vector<ZPoly>>> t;
};

inline UnfoldedProduct unfolded_product(const FrobeniusAlgebra& A, const Potential& P, int D = default_order()) {
  const FrobeniusModule& M = A.M;
  Report shape = check_potential_shape(M, P);
  if (!shape) throw InputError("potential shape mismatch: " + shape.first_failure()->detail);
  std::size_t n = M.dim();
  int r = M.r();
  auto delta = duality_involution(M.B);
  ZPoly phi = P.as_zpoly();
  UnfoldedProduct U{n, r, std::vector<std::vector<std::vector<ZPoly>>>(n, std::vector<std::vector<ZPoly>>(n, std::vector<ZPoly>(n)))};
  for (std::size_t a = 0; a < n; ++a) {
    ZPoly pa = phi.partial(a, r);
    for (std::size_t b = 0; b < n; ++b) {
      ZPoly pab = pa.partial(b, r);
      for (std::size_t c = 0; c < n; ++c) {
        ZPoly v = pab.partial(delta[c], r);
        if (!A.prod[a][b][c].is_zero()) v += ZPoly(Series(Coeff(A.prod[a][b][c]), r, D));
        ZPoly trunc;
        for (const auto& [key, s] : v.terms()) trunc.add(key, s.with_vars(r).with_order(D));
        U.t[a][b][c] = trunc;
      }
    }
  }
  return U;
}

inline std::vector<ZPoly> uf_mul(const UnfoldedProduct& U, const std::vector<ZPoly>& x, std::size_t b) {
  std::vector<ZPoly> out(U.n);
  for (std::size_t a = 0; a < U.n; ++a) {
    if (x[a].is_zero()) continue;
    for (std::size_t c = 0; c < U.n; ++c)
      if (!U.t[a][b][c].is_zero()) out[c] += x[a] * U.t[a][b][c];
  }
  return out;
}

inline ZPoly pair_z(const Mat& B, const std::vector<ZPoly>& x, std::size_t d) {
  ZPoly s;
  for (std::size_t c = 0; c < x.size(); ++c)
    if (!B(c, d).is_zero() && !x[c].is_zero()) {
      ZPoly y = x[c];
      y *= B(c, d);
      s += y;
    }
  return s;
}

inline Report check_frobenius_manifold(const UnfoldedProduct& U, const Mat& B) {
  Report rep;
  std::size_t n = U.n;
  auto col = [&](std::size_t a, std::size_t b) { return U.t[a][b]; };
  std::vector<std::vector<std::vector<ZPoly>>> c(n, std::vector<std::vector<ZPoly>>(n, std::vector<ZPoly>(n)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t d = 0; d < n; ++d) c[a][b][d] = pair_z(B, col(a, b), d);
  std::string bad_metric, bad_pot, bad_comm, bad_unit, bad_assoc;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (bad_comm.empty() && U.t[a][b] != U.t[b][a]) bad_comm = idx_name({a, b});
      for (std::size_t d = 0; d < n; ++d) {
        if (bad_metric.empty() && c[a][b][d] != c[a][d][b]) bad_metric = idx_name({a, b, d});
        for (std::size_t e = 0; e < n && bad_pot.empty(); ++e)
          if (c[a][b][d].partial(e, U.r) != c[e][b][d].partial(a, U.r)) bad_pot = idx_name({e, a, b, d});
      }
    }
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t d = 0; d < n; ++d)
      if (bad_unit.empty() && U.t[0][b][d] != (b == d ? ZPoly(Series(1)) : ZPoly())) bad_unit = idx_name({b, d});
  for (std::size_t a = 0; a < n && bad_assoc.empty(); ++a)
    for (std::size_t b = 0; b < n && bad_assoc.empty(); ++b)
      for (std::size_t d = 0; d < n; ++d) {
        auto left = uf_mul(U, col(b, d), a);
        auto right = uf_mul(U, col(a, b), d);
        if (left != right) {
          std::string where;
          for (std::size_t x = 0; x < n && where.empty(); ++x)
            if (left[x] != right[x]) {
              ZPoly diff = left[x] - right[x];
              int ord = -1;
              for (const auto& [key, s] : diff.terms())
                if (ord < 0 || s.valuation() < ord) ord = s.valuation();
              where = " component " + std::to_string(x) + " order " + std::to_string(ord);
            }
          bad_assoc = idx_name({a, b, d}) + where;
          break;
        }
      }
  rep.add("metric", bad_metric.empty(), bad_metric);
  rep.add("potentiality", bad_pot.empty(), bad_pot);
  rep.add("commutative", bad_comm.empty(), bad_comm);
  rep.add("unit", bad_unit.empty(), bad_unit);
  rep.add("associative", bad_assoc.empty(), bad_assoc);
  return rep;
}

// Exact value of a log-free series at rational q and rational tau.
inline Gauss evaluate_exact(const Series& s, const std::vector<Gauss>& q, const Gauss& tau) {
  Gauss out;
  for (const auto& [key, c] : s.terms()) {
    if (mono::ldeg(key) > 0) throw std::invalid_argument("log symbols cannot be evaluated exactly");
    Gauss m(1);
    for (std::size_t j = 0; j < q.size(); ++j)
      for (int e = 0; e < mono::q(key, int(j)); ++e) m *= q[j];
    Gauss cv;
    for (const auto& [tp, g] : c.terms()) {
      Gauss t(1);
      Gauss base = tp >= 0 ? tau : tau.inv();
      for (int e = 0; e < std::abs(tp); ++e) t *= base;
      cv += g * t;
    }
    out += m * cv;
  }
  return out;
}

inline std::size_t iterated_span(const std::vector<Mat>& ops, const Vec& e) {
  std::size_t n = e.size();
  std::vector<Vec> vs{e}, frontier{e};
  Subspace span = Subspace::span(n, vs);
  while (!frontier.empty()) {
    std::vector<Vec> next;
    for (const auto& v : frontier)
      for (const auto& op : ops) {
        Vec w = op.apply(v);
        if (!span.contains(w)) {
          vs.push_back(w);
          span = Subspace::span(n, vs);
          next.push_back(w);
        }
      }
    frontier = std::move(next);
  }
  return span.dim();
}

// Preconditions of the unfolding theorem at the formal level: flat opposite Psi, Q-isotropy, and generation
// of V by the Higgs operators at q = 0 and at a seeded random rational point.
inline Report hm_precondition_check(const VHSGerm& G, unsigned seed = 11) {
  Report rep;
  std::size_t n = G.dim();
  int k = G.k;
  Subspace top = G.Finf[k];
  if (top.dim() != 1) return rep.add("generation", false, "F^k is not one-dimensional");
  Vec e = top.basis()[0];
  try {
    rep.merge(horizontality_check(G), "horizontality");
    PsiResult ps = psi_filtration(G);
    rep.merge(ps.report, "psi");
    bool flat = true, iso_psi = true;
    for (const auto& N : G.Ns)
      for (int p = ps.psi.q_min(); p <= ps.psi.q_max(); ++p)
        if (!ps.psi[p].contains(image(N, ps.psi[p]))) flat = false;
    for (int p = ps.psi.q_min() - 1; p <= ps.psi.q_max() + 1; ++p)
      for (const auto& u : ps.psi[p].basis())
        for (const auto& v : ps.psi[k - p - 1].basis())
          if (!bilinear(G.Q, u, v).is_zero()) iso_psi = false;
    rep.add("psi_flat", flat);
    rep.add("isotropy.psi", iso_psi);
  } catch (const NotMHS& ex) {
    rep.add("limiting_mhs", false, ex.what());
  }
  SMat E = exp_nilpotent(G.Gamma);
  SMat Qs = to_series(G.Q);
  auto d = first_defect(with_order(E.transpose() * Qs * E, G.D) - Qs);
  rep.add("isotropy.E_preserves_Q", !d.found(), d.text());
  bool iso_f = true;
  for (int p = G.Finf.p_min() - 1; p <= G.Finf.p_max() + 1; ++p)
    for (const auto& u : G.Finf[p].basis())
      for (const auto& v : G.Finf[k - p + 1].basis())
        if (!bilinear(G.Q, u, v).is_zero()) iso_f = false;
  rep.add("isotropy.hodge", iso_f);
  std::size_t at0 = iterated_span(G.Ns, e);
  rep.add("generation.at_origin", at0 == n, "span " + std::to_string(at0) + " of " + std::to_string(n));
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> num(1, 9), den(2, 7);
  auto rnd = [&] { return Gauss(Rational(num(rng), den(rng))); };
  std::vector<Gauss> qpt;
  for (int j = 0; j < G.r(); ++j) qpt.push_back(rnd());
  Gauss tau = rnd();
  std::vector<Mat> ops;
  for (const auto& L : germ_connection(G))
    ops.push_back(L.map([&](const Series& s) { return evaluate_exact(s, qpt, tau); }));
  std::size_t gen = iterated_span(ops, e);
  rep.add("generation.generic", gen == n, "span " + std::to_string(gen) + " of " + std::to_string(n));
  return rep;
}

}  // namespace hodgefrob
