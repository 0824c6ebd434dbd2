#pragma once

#include <optional>
#include <vector>

#include "hodgefrob/amodel.hpp"
#include "hodgefrob/degeneration.hpp"
#include "hodgefrob/frobmod.hpp"

namespace hodgefrob {

inline Vec top_generator(const VHSGerm& G) {
  Subspace top = germ_bigrading(G).at(G.k, G.k);
  if (top.dim() != 1) throw PreconditionError("I^{k,k} is not one-dimensional");
  return top.basis()[0];
}

struct CanonicalCoordinates {
  std::vector<Series> f;
  VHSGerm germ;
};

// Coordinates of Gamma_{-1}(q) e in the basis N_j e; these are the logarithms (over tau) of the units.
inline std::vector<Series> framing_coordinates(const VHSGerm& G, const SMat& X, const Vec& e) {
  std::size_t n = G.dim();
  int r = G.r();
  std::vector<Vec> cols;
  for (const auto& N : G.Ns) cols.push_back(N.apply(e));
  Mat T = Mat::from_columns(n, cols);
  if (rank(T) != std::size_t(r)) throw PreconditionError("N_j e are linearly dependent");
  std::vector<Series> g(std::size_t(r), Series::zero(r, G.D));
  std::map<std::pair<std::uint64_t, int>, Vec> parts;
  for (std::size_t a = 0; a < n; ++a) {
    Series s;
    for (std::size_t b = 0; b < n; ++b)
      if (!e[b].is_zero()) s += X(a, b) * Coeff(e[b]);
    for (const auto& [key, c] : s.terms())
      for (const auto& [tp, v] : c.terms()) {
        auto [it, fresh] = parts.try_emplace({key, tp}, Vec(n));
        it->second[a] = v;
      }
  }
  for (const auto& [kt, v] : parts) {
    auto x = solve(T, v);
    if (!x) throw PreconditionError("Gamma_{-1} e leaves the span of N_j e");
    for (int j = 0; j < r; ++j) g[std::size_t(j)].add_term(kt.first, Coeff((*x)[std::size_t(j)], kt.second));
  }
  return g;
}

inline CanonicalCoordinates canonical_coordinates(const VHSGerm& G) {
  Report mu = maximal_unipotency_check(G);
  if (!mu) throw PreconditionError("maximal unipotency fails: " + mu.first_failure()->name);
  Vec e = top_generator(G);
  SMat g1 = germ_gamma_level(G, -1);
  auto g = framing_coordinates(G, g1, e);
  CanonicalCoordinates out;
  for (auto& gj : g) out.f.push_back(series_exp(gj.tau_shift(1)).with_vars(G.r()).with_order(G.D));
  out.germ = coordinate_change(G, out.f).germ;
  return out;
}

inline Report canonical_check(const VHSGerm& G) {
  Report rep;
  Bigrading I = germ_bigrading(G);
  SMat g1 = germ_gamma_level(G, -1);
  auto kills = [&](const Subspace& s) {
    for (const auto& v : s.basis()) {
      SVec sv(v.size());
      for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = 0; b < v.size(); ++b)
          if (!v[b].is_zero()) sv[a] += g1(a, b) * Coeff(v[b]);
      for (const auto& x : sv)
        if (!x.is_zero()) return false;
    }
    return true;
  };
  rep.add("kills_top", kills(I.at(G.k, G.k)));
  rep.add("kills_I11", kills(I.at(1, 1)));
  return rep;
}

// Extraction of (M, P) together with the adapted basis S (columns T_0..T_m) and the canonical germ.
struct Extraction {
  FrobeniusModule M;
  Potential P;
  Mat S;
  CanonicalCoordinates canonical;
};

inline bool is_permutation(const Mat& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j).is_one()) ++ones;
      else if (!m(i, j).is_zero()) return false;
    }
    if (ones != 1) return false;
  }
  return true;
}

inline Mat cols_of(std::size_t n, const std::vector<Vec>& v) { return Mat::from_columns(n, v); }

// Basis T_0..T_m: T_0 = e, T_j = N_j e, echelon bases below the middle, B-dual bases above it
// unless the echelon basis is already dual, and the echelon basis in the middle degree.
inline Mat adapted_basis(const VHSGerm& G, const Vec& e, std::vector<std::size_t>& dims) {
  int k = G.k;
  std::size_t n = G.dim();
  Bigrading I = germ_bigrading(G);
  if (!is_hodge_tate(I)) throw PreconditionError("limiting MHS is not Hodge-Tate");
  Subspace top = I.at(k, k);
  if (top.dim() != 1 || !top.contains(e) || is_zero_vec(e)) throw PreconditionError("e does not span I^{k,k}");
  for (const auto& x : e)
    if (!x.is_real()) throw PreconditionError("e is not real");
  auto sign = [&](int p) { return (k + p) % 2 ? Gauss(-1) : Gauss(1); };
  auto Bform = [&](const Vec& x, int px, const Vec& y) { return sign(px) * bilinear(G.Q, x, y); };
  std::vector<std::vector<Vec>> basis(std::size_t(k + 1));
  basis[0] = {e};
  if (k >= 1) {
    for (const auto& N : G.Ns) basis[1].push_back(N.apply(e));
    if (Subspace::span(n, basis[1]) != I.at(k - 1, k - 1)) throw PreconditionError("N_j e do not span I^{k-1,k-1}");
  }
  for (int p = 0; p <= k; ++p) {
    int partner = k - p;
    if (p < partner) {
      if (p >= 2) basis[std::size_t(p)] = I.at(k - p, k - p).basis();
      continue;
    }
    std::vector<Vec> ech = p == 1 ? basis[1] : I.at(k - p, k - p).basis();
    const auto& low = p == partner ? ech : basis[std::size_t(partner)];
    if (ech.size() != low.size()) throw PreconditionError("V_{2p} and V_{2(k-p)} differ in dimension");
    Mat pair(ech.size(), low.size());
    for (std::size_t a = 0; a < ech.size(); ++a)
      for (std::size_t b = 0; b < low.size(); ++b) pair(a, b) = Bform(ech[a], p, low[b]);
    if (p == partner) {
      if (!is_permutation(pair) || pair != pair.transpose())
        throw PreconditionError("middle degree pairing is not in adapted form");
      basis[std::size_t(p)] = ech;
      continue;
    }
    if (pair == Mat::identity(ech.size())) {
      basis[std::size_t(p)] = ech;
      continue;
    }
    if (p == 1) throw PreconditionError("framing is not dual to the unit");
    auto inv = inverse(pair);
    if (!inv) throw PreconditionError("pairing is degenerate between V_" + std::to_string(2 * p));
    std::vector<Vec> dualb;
    for (std::size_t b = 0; b < low.size(); ++b) {
      Vec v(n);
      for (std::size_t a = 0; a < ech.size(); ++a)
        for (std::size_t i = 0; i < n; ++i) v[i] += (*inv)(a, b) * ech[a][i];
      dualb.push_back(v);
    }
    basis[std::size_t(p)] = dualb;
  }
  dims.clear();
  std::vector<Vec> all;
  for (const auto& b : basis) {
    dims.push_back(b.size());
    all.insert(all.end(), b.begin(), b.end());
  }
  return cols_of(n, all);
}

inline FrobeniusModule module_in_basis(const VHSGerm& G, const Mat& S, const std::vector<std::size_t>& dims) {
  auto Sinv = inverse(S);
  if (!Sinv) throw PreconditionError("adapted basis is singular");
  FrobeniusModule M{G.k, dims, Mat(), {}, true};
  Mat Qs = S.transpose() * G.Q * S;
  M.B = Qs;
  for (std::size_t a = 0; a < M.dim(); ++a)
    if ((G.k + M.deg(a) / 2) % 2)
      for (std::size_t b = 0; b < M.dim(); ++b) M.B(a, b) = -M.B(a, b);
  for (const auto& N : G.Ns) M.A.push_back(*Sinv * N * S);
  M.real = is_real(S) && is_real(G.Q);
  for (const auto& N : G.Ns) M.real = M.real && is_real(N);
  return M;
}

inline Series bform_series(const FrobeniusModule& M, const SVec& x, std::size_t b) {
  Series s;
  for (std::size_t a = 0; a < x.size(); ++a)
    if (!M.B(a, b).is_zero()) s += x[a] * Coeff(M.B(a, b));
  return s;
}

inline SVec column(const SMat& m, std::size_t j) {
  SVec v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, j);
  return v;
}

// Potential from Gamma written in the module basis: phi^{ab} = B(Gamma_{-1} T_a, T_b)/2,
// phi^a = B(-Gamma_{-2} T_a, T_0); in weight 3 the latter is d phi_hbar / dz_a and is integrated.
inline Potential potential_in_basis(const FrobeniusModule& M, const SMat& g1, const SMat& g2, int D) {
  Potential P = zero_potential(M);
  int k = M.k, r = M.r();
  if (k <= 2) return P;
  std::size_t t0 = 0;
  if (k == 3) {
    std::map<std::uint64_t, Coeff> coeffs;
    for (int a = 1; a <= r; ++a) {
      Series da = -bform_series(M, column(g2, std::size_t(a)), t0);
      for (const auto& [key, c] : da.terms()) {
        if (mono::ldeg(key) > 0) throw PreconditionError("log symbols in Gamma");
        int e = mono::q(key, a - 1);
        if (e == 0) throw Obstruction(mono::qdeg(key), "phi^a has a term free of q_a, a=" + std::to_string(a));
        Coeff v = c.shifted(-1) * Coeff(Gauss(Rational(1, e)));
        auto [it, fresh] = coeffs.try_emplace(key, v);
        if (!fresh && it->second != v)
          throw Obstruction(mono::qdeg(key), "weight-3 potential is not integrable at " + mono_name(key, r));
      }
    }
    P.phi3 = Series::zero(r, D);
    for (const auto& [key, c] : coeffs) P.phi3.add_term(key, c);
    return P;
  }
  for (std::size_t a = 0; a < M.dim(); ++a) {
    int da = M.deg(a);
    if (da == 2 * k - 4) {
      Series s = -bform_series(M, column(g2, a), t0);
      if (!s.is_zero()) P.linear[a] = s.with_vars(r).with_order(D);
    }
    if (da > 2 && da < 2 * k - 4)
      for (std::size_t b = a; b < M.dim(); ++b)
        if (da + M.deg(b) == 2 * k - 2) {
          Series s = bform_series(M, column(g1, a), b) * Coeff(Gauss(Rational(1, 2)));
          if (!s.is_zero()) P.quadratic[{a, b}] = s.with_vars(r).with_order(D);
        }
  }
  return P;
}

inline Extraction extract(const VHSGerm& G, std::optional<Vec> unit = std::nullopt) {
  Extraction out;
  out.canonical = canonical_coordinates(G);
  const VHSGerm& C = out.canonical.germ;
  Vec e = unit ? *unit : top_generator(C);
  std::vector<std::size_t> dims;
  out.S = adapted_basis(C, e, dims);
  out.M = module_in_basis(C, out.S, dims);
  Report v = validate_module(out.M);
  if (!v) throw PreconditionError("extracted module fails " + v.first_failure()->name);
  Mat Sinv = *inverse(out.S);
  LevelFrame f = level_frame(germ_bigrading(C));
  SMat g1 = to_series(Sinv) * level_part(f, C.Gamma, -1) * to_series(out.S);
  SMat g2 = to_series(Sinv) * level_part(f, C.Gamma, -2) * to_series(out.S);
  out.P = potential_in_basis(out.M, g1, g2, C.D);
  return out;
}

inline FrobeniusModule extract_module(const VHSGerm& G, std::optional<Vec> unit = std::nullopt) {
  return extract(G, unit).M;
}

inline Potential potential_from_germ(const VHSGerm& G) { return extract(G).P; }

inline SMat gamma_minus2(const VHSGerm& G) { return germ_gamma_level(G, -2); }

// (N_j + dGamma_{-1}/dz_j)(T).
inline SVec quantum_product_from_X(const VHSGerm& G, int j, const Vec& T) {
  SMat L = germ_connection(G).at(std::size_t(j - 1));
  SVec out(G.dim());
  for (std::size_t a = 0; a < G.dim(); ++a)
    for (std::size_t b = 0; b < G.dim(); ++b)
      if (!T[b].is_zero()) out[a] += L(a, b) * Coeff(T[b]);
  return out;
}

struct ExtensionData {
  std::vector<Series> coordinates;  // canonical units f_j
  std::map<std::array<std::size_t, 3>, Series> yukawa;  // Y_abc for framing indices a <= b <= c
  Report report;
};

// Weight-3 data in canonical coordinates: Y_abc = Q(Theta_a Theta_b Theta_c e, e) and the normal forms
// Theta_j e = T_j + lower terms, deg-2 part of exp(l N) E e = sum l_j T_j.
inline ExtensionData extension_data_weight3(const VHSGerm& G) {
  if (G.k != 3) throw PreconditionError("extension data needs weight 3");
  ExtensionData out;
  auto cc = canonical_coordinates(G);
  out.coordinates = cc.f;
  const VHSGerm& C = cc.germ;
  Bigrading I = germ_bigrading(C);
  if (!is_hodge_tate(I)) throw PreconditionError("limiting MHS is not Hodge-Tate");
  Vec e = top_generator(C);
  int r = C.r();
  std::size_t n = C.dim();
  auto H = higgs_field(C, false);
  out.report.merge(H.report, "higgs");
  SVec es(n);
  for (std::size_t a = 0; a < n; ++a) es[a] = Series(Coeff(e[a]), r, C.D);
  auto apply = [&](const SMat& m, const SVec& v) {
    SVec w(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (!v[b].is_zero()) w[a] += m(a, b) * v[b];
    return w;
  };
  Mat T = Mat::from_columns(n, [&] {
    std::vector<Vec> t;
    for (const auto& N : C.Ns) t.push_back(N.apply(e));
    return t;
  }());
  LevelFrame fr = level_frame(I);
  auto proj2 = [&](const SVec& v) {
    SVec w(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t b = 0; b < n; ++b)
        if (!fr.Pinv(i, b).is_zero() && fr.pq[i].first == 2) w[i] += v[b] * Coeff(fr.Pinv(i, b));
    SVec out2(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t i = 0; i < n; ++i)
        if (!fr.P(a, i).is_zero()) out2[a] += w[i] * Coeff(fr.P(a, i));
    return out2;
  };
  bool theta_ok = true;
  for (int j = 0; j < r; ++j) {
    SVec te = proj2(apply(H.Theta[std::size_t(j)], es));
    for (std::size_t a = 0; a < n; ++a)
      if (te[a] != Series(T(a, std::size_t(j)))) theta_ok = false;
  }
  out.report.add("theta_generator", theta_ok);
  SMat U = exp_nilpotent(ell_sum(C)) * exp_nilpotent(C.Gamma);
  SVec ue = proj2(apply(U, es));
  bool e3 = true;
  for (std::size_t a = 0; a < n; ++a) {
    Series want = Series::zero(r, C.D);
    for (int j = 0; j < r; ++j) want += Series::ell(j, r, C.D) * Series(T(a, std::size_t(j)));
    if (ue[a] != want) e3 = false;
  }
  out.report.add("e3_normal_form", e3);
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b)
      for (int c = b; c < r; ++c) {
        SVec v = apply(H.Theta[std::size_t(a)], apply(H.Theta[std::size_t(b)], apply(H.Theta[std::size_t(c)], es)));
        Series y;
        for (std::size_t x = 0; x < n; ++x)
          for (std::size_t z = 0; z < n; ++z)
            if (!C.Q(x, z).is_zero() && !e[z].is_zero()) y += v[x] * Coeff(C.Q(x, z) * e[z]);
        out.yukawa[{std::size_t(a + 1), std::size_t(b + 1), std::size_t(c + 1)}] = y.with_order(C.D);
      }
  return out;
}

}  // namespace hodgefrob
