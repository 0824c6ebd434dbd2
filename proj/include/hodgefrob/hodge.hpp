#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hodgefrob/linfilt.hpp"

namespace hodgefrob {

struct NotMHS : std::domain_error {
  using std::domain_error::domain_error;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Mixed Hodge structure data: Hodge filtration F and weight filtration W on C^n.
struct MHS {
  DecFiltration F;
  IncFiltration W;
  std::size_t dim() const { return F.ambient(); }
};

// Direct-sum decomposition V = (+) I^{p,q}; only nonzero pieces are stored.
struct Bigrading {
  std::size_t n = 0;
  std::map<std::pair<int, int>, Subspace> pieces;

  Subspace at(int p, int q) const {
    auto it = pieces.find({p, q});
    return it == pieces.end() ? Subspace::zero(n) : it->second;
  }
  void set(int p, int q, const Subspace& s) {
    if (s.is_zero())
      pieces.erase({p, q});
    else
      pieces[{p, q}] = s;
  }
  template <class Pred>
  Subspace sum_where(Pred pred) const {
    Subspace s = Subspace::zero(n);
    for (const auto& [pq, v] : pieces)
      if (pred(pq.first, pq.second)) s = sum(s, v);
    return s;
  }
  std::size_t total_dim() const {
    std::size_t d = 0;
    for (const auto& [pq, v] : pieces) d += v.dim();
    return d;
  }
  friend bool operator==(const Bigrading& a, const Bigrading& b) { return a.n == b.n && a.pieces == b.pieces; }
};

inline std::string pq_name(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

inline DecFiltration hodge_filtration_of(const Bigrading& I) {
  if (I.pieces.empty()) return DecFiltration(I.n, 0, {});
  int lo = I.pieces.begin()->first.first, hi = lo;
  for (const auto& [pq, v] : I.pieces) {
    lo = std::min(lo, pq.first);
    hi = std::max(hi, pq.first);
  }
  std::vector<Subspace> p;
  for (int a = lo; a <= hi; ++a) p.push_back(I.sum_where([a](int x, int) { return x >= a; }));
  return DecFiltration(I.n, lo, p);
}

inline IncFiltration weight_filtration_of(const Bigrading& I) {
  if (I.pieces.empty()) return IncFiltration(I.n, 0, {});
  int lo = I.pieces.begin()->first.first + I.pieces.begin()->first.second, hi = lo;
  for (const auto& [pq, v] : I.pieces) {
    lo = std::min(lo, pq.first + pq.second);
    hi = std::max(hi, pq.first + pq.second);
  }
  std::vector<Subspace> p;
  for (int k = lo; k <= hi; ++k) p.push_back(I.sum_where([k](int x, int y) { return x + y <= k; }));
  return IncFiltration(I.n, lo, p);
}

inline MHS mhs_from_bigrading(const Bigrading& I) { return {hodge_filtration_of(I), weight_filtration_of(I)}; }

// F and conj(F) are k-opposed.
inline Report check_pure(const DecFiltration& F, int k) {
  Report rep;
  rep.merge(is_k_opposed(F, conjugate(F), k), "pure");
  return rep;
}

// Leading principal minors of a Hermitian matrix are real and positive.
inline bool positive_definite_hermitian(const Mat& H, std::string* why = nullptr) {
  for (std::size_t i = 0; i < H.rows(); ++i)
    for (std::size_t j = 0; j < H.cols(); ++j)
      if (H(i, j) != H(j, i).conj()) {
        if (why) *why = "form is not Hermitian";
        return false;
      }
  for (std::size_t m = 1; m <= H.rows(); ++m) {
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    Gauss d = det(submatrix(H, idx, idx));
    if (!d.is_real() || sgn(d.re) <= 0) {
      if (why) *why = "leading minor " + std::to_string(m) + " = " + to_string(d);
      return false;
    }
  }
  return true;
}

inline Gauss bilinear(const Mat& Q, const Vec& u, const Vec& v) {
  Gauss s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].is_zero()) continue;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (!v[j].is_zero() && !Q(i, j).is_zero()) s += u[i] * Q(i, j) * v[j];
  }
  return s;
}

inline Gauss i_power(int e) {
  switch (((e % 4) + 4) % 4) {
    case 0: return Gauss(1);
    case 1: return Gauss::i();
    case 2: return Gauss(-1);
    default: return -Gauss::i();
  }
}

// Pure polarization: Q(F^p, F^{k-p+1}) = 0 and i^{p-q} Q(v, conj v) > 0 on F^p cap conj F^q, p + q = k.
inline Report check_polarization(const DecFiltration& F, int k, const Mat& Q) {
  Report rep;
  std::size_t n = F.ambient();
  if (Q.rows() != n || Q.cols() != n) throw std::invalid_argument("pairing has wrong shape");
  if (rank(Q) != n) throw std::invalid_argument("pairing is degenerate");
  bool sym = scaled(Q.transpose(), Gauss(k % 2 ? -1 : 1)) == Q;
  rep.add("symmetry", sym, sym ? "" : "Q must be (-1)^k-symmetric");
  for (int p = F.p_min(); p <= F.p_max() + 1; ++p) {
    bool orth = true;
    for (const auto& u : F[p].basis())
      for (const auto& v : F[k - p + 1].basis())
        if (!bilinear(Q, u, v).is_zero()) orth = false;
    rep.add("orthogonal.p=" + std::to_string(p), orth);
  }
  DecFiltration Fb = conjugate(F);
  for (int p = F.p_min(); p <= F.p_max(); ++p) {
    int q = k - p;
    Subspace h = intersect(F[p], Fb[q]);
    if (h.is_zero()) continue;
    auto b = h.basis();
    Mat H(b.size(), b.size());
    Gauss c = i_power(p - q);
    for (std::size_t a = 0; a < b.size(); ++a)
      for (std::size_t d = 0; d < b.size(); ++d) H(a, d) = c * bilinear(Q, b[a], vconj(b[d]));
    std::string why;
    rep.add("positive.p=" + std::to_string(p), positive_definite_hermitian(H, &why), why);
  }
  return rep;
}

// Phi-bar_q = sum_k conj(F)^{k-q} cap W_k.
inline IncFiltration barphi(const MHS& m) {
  std::size_t n = m.dim();
  DecFiltration Fb = conjugate(m.F);
  int lo = m.W.q_min() - Fb.p_max() - 1, hi = m.W.q_max() - Fb.p_min() + 1;
  std::vector<Subspace> p;
  for (int q = lo; q <= hi; ++q) {
    Subspace s = Subspace::zero(n);
    for (int k = m.W.q_min(); k <= m.W.q_max(); ++k) s = sum(s, intersect(Fb[k - q], m.W[k]));
    p.push_back(s);
  }
  return IncFiltration(n, lo, p);
}

inline Report check_mhs(const MHS& m) {
  Report rep;
  if (m.F.ambient() != m.W.ambient()) throw AmbientMismatch();
  for (int k = m.W.q_min(); k <= m.W.q_max(); ++k) {
    std::string tag = "k=" + std::to_string(k);
    bool real = conjugate(m.W[k]) == m.W[k];
    rep.add("W.real." + tag, real);
    if (!real) continue;
    auto g = graded_filtration(m.F, m.W, k);
    if (g.lifts.cols() == 0) continue;
    auto r = is_k_opposed(g.F, conjugate(g.F), k);
    rep.add("graded_pure." + tag, r.ok(), r.ok() ? "" : r.first_failure()->detail);
  }
  return rep;
}

// Deligne bigrading I^{p,q} = F^p cap W_{p+q} cap (conj F^q cap W_{p+q} + sum_{j>=1} conj F^{q-j} cap W_{p+q-j-1}),
// intersected with Phi-bar_p.
inline Bigrading deligne_bigrading(const MHS& m) {
  auto rep = check_mhs(m);
  if (!rep.ok()) {
    const auto* f = rep.first_failure();
    throw NotMHS("input is not a mixed Hodge structure: " + f->name + (f->detail.empty() ? "" : " (" + f->detail + ")"));
  }
  std::size_t n = m.dim();
  Bigrading I{n, {}};
  if (n == 0) return I;
  DecFiltration Fb = conjugate(m.F);
  IncFiltration phi = barphi(m);
  int wlo = m.W.q_min();
  for (int p = m.F.p_min(); p <= m.F.p_max(); ++p) {
    Subspace u = intersect(m.F[p], phi[p]);
    if (u.is_zero()) continue;
    for (int q = m.F.p_min(); q <= m.F.p_max(); ++q) {
      int k = p + q;
      Subspace s = intersect(u, m.W[k]);
      if (s.is_zero()) continue;
      Subspace c = intersect(Fb[q], m.W[k]);
      for (int j = 1; k - j - 1 >= wlo; ++j) c = sum(c, intersect(Fb[q - j], m.W[k - j - 1]));
      I.set(p, q, intersect(s, c));
    }
  }
  if (I.total_dim() != n || I.sum_where([](int, int) { return true; }) != Subspace::full(n))
    throw NotMHS("candidate bigrading pieces do not form a direct sum (total dim " + std::to_string(I.total_dim()) +
                 " vs " + std::to_string(n) + ")");
  return I;
}

inline Report verify_bigrading(const Bigrading& I, const MHS& m) {
  Report rep;
  std::size_t n = m.dim();
  bool ds = I.total_dim() == n && I.sum_where([](int, int) { return true; }) == Subspace::full(n);
  rep.add("direct_sum", ds);
  for (int p = m.F.p_min() - 1; p <= m.F.p_max() + 1; ++p) {
    bool ok = m.F[p] == I.sum_where([p](int a, int) { return a >= p; });
    if (!ok) rep.fail("F.p=" + std::to_string(p), "F^p differs from the sum of I^{a,b}, a >= p");
  }
  rep.add("F", !rep.has_failure("F."));
  for (int k = m.W.q_min() - 1; k <= m.W.q_max() + 1; ++k) {
    bool ok = m.W[k] == I.sum_where([k](int a, int b) { return a + b <= k; });
    if (!ok) rep.fail("W.k=" + std::to_string(k), "W_k differs from the sum of I^{a,b}, a + b <= k");
  }
  rep.add("W", !rep.has_failure("W."));
  for (const auto& [pq, v] : I.pieces) {
    auto [p, q] = pq;
    Subspace lower = I.sum_where([p = p, q = q](int a, int b) { return a < q && b < p; });
    Subspace target = sum(I.at(q, p), lower);
    bool ok = target.contains(conjugate(v)) && I.at(q, p).dim() == v.dim();
    if (!ok) rep.fail("congruence." + pq_name(p, q), "conj I^{p,q} not congruent to I^{q,p}");
  }
  rep.add("congruence", !rep.has_failure("congruence."));
  IncFiltration phi = barphi(m);
  for (int p = phi.q_min() - 1; p <= phi.q_max() + 1; ++p) {
    bool ok = phi[p] == I.sum_where([p](int a, int) { return a <= p; });
    if (!ok) rep.fail("barphi.p=" + std::to_string(p), "Phi-bar_p differs from the sum of I^{a,b}, a <= p");
  }
  rep.add("barphi", !rep.has_failure("barphi."));
  return rep;
}

// W_{c+j} = sum_{i >= max(0,-j)} ker N^{j+i+1} cap im N^i.
inline IncFiltration weight_filtration(const Mat& N, int center) {
  std::size_t n = N.rows();
  if (!is_nilpotent(N)) throw NotNilpotent("weight_filtration: N is not nilpotent");
  if (n == 0) return IncFiltration(0, center, {});
  std::vector<Subspace> ker, im;
  Mat pw = Mat::identity(n);
  for (std::size_t i = 0; i <= n + 1; ++i) {
    ker.push_back(kernel_space(pw));
    im.push_back(image_space(pw));
    pw = pw * N;
  }
  int nn = int(n);
  std::vector<Subspace> pieces;
  for (int j = -nn; j <= nn; ++j) {
    Subspace w = Subspace::zero(n);
    for (int i = std::max(0, -j); i <= nn; ++i) {
      int e = std::min(j + i + 1, nn + 1);
      if (e <= 0) continue;
      w = sum(w, intersect(ker[std::size_t(e)], im[std::size_t(i)]));
    }
    pieces.push_back(w);
  }
  return IncFiltration(n, center - nn, pieces);
}

// N W_i in W_{i-2}, and N^j : Gr_{c+j} -> Gr_{c-j} an isomorphism for j >= 1.
inline Report check_weight_axioms(const Mat& N, const IncFiltration& W, int center) {
  Report rep;
  std::size_t n = N.rows();
  if (!W.nested()) rep.fail("nested", "W is not increasing");
  for (int i = W.q_min(); i <= W.q_max() + 2; ++i)
    if (!W[i - 2].contains(image(N, W[i]))) rep.fail("shift.i=" + std::to_string(i), "N W_i not inside W_{i-2}");
  rep.add("shift", !rep.has_failure("shift."));
  int span = std::max(std::abs(W.q_min() - center), std::abs(W.q_max() - center)) + 1;
  Mat pw = Mat::identity(n);
  for (int j = 1; j <= span; ++j) {
    pw = pw * N;
    auto top = quotient_lifts(W[center + j], W[center + j - 1]);
    auto bot_dim = W[center - j].dim() - W[center - j - 1].dim();
    std::vector<Vec> img = W[center - j - 1].basis();
    for (const auto& v : top) img.push_back(pw.apply(v));
    bool ok = top.size() == bot_dim && Subspace::span(n, img) == W[center - j];
    if (!ok) rep.fail("iso.j=" + std::to_string(j), "N^j is not an isomorphism Gr_{c+j} -> Gr_{c-j}");
  }
  rep.add("iso", !rep.has_failure("iso."));
  return rep;
}

inline bool commute(const Mat& a, const Mat& b) { return commutator(a, b).is_zero(); }

// W(N) for N = sum N_j, checked against sampled positive combinations.
inline std::pair<IncFiltration, Report> weight_filtration_cone(const std::vector<Mat>& Ns, int center,
                                                               unsigned seed = 7, int samples = 20) {
  if (Ns.empty()) throw std::invalid_argument("empty cone");
  for (std::size_t a = 0; a < Ns.size(); ++a)
    for (std::size_t b = a + 1; b < Ns.size(); ++b)
      if (!commute(Ns[a], Ns[b]))
        throw std::invalid_argument("cone generators " + std::to_string(a) + "," + std::to_string(b) + " do not commute");
  Mat N = Ns[0];
  for (std::size_t a = 1; a < Ns.size(); ++a) N += Ns[a];
  IncFiltration W = weight_filtration(N, center);
  Report rep;
  rep.merge(check_weight_axioms(N, W, center), "sum");
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> num(1, 9), den(1, 5);
  for (int s = 0; s < samples; ++s) {
    Mat M(N.rows(), N.cols());
    std::string tuple;
    for (const auto& Nj : Ns) {
      Rational c(num(rng), den(rng));
      c.canonicalize();
      tuple += (tuple.empty() ? "" : ",") + c.get_str();
      M += scaled(Nj, Gauss(c));
    }
    bool same = weight_filtration(M, center) == W;
    rep.add("independent.sample=" + std::to_string(s), same, same ? "" : "differs at (" + tuple + ")");
  }
  return {W, rep};
}

// Matrix of the map induced by N on W_k / W_{k-1} in the coordinates of the given lifts.
inline Mat induced_map(const Mat& N, const Mat& lifts, const Subspace& below) {
  std::size_t d = lifts.cols();
  Mat out(d, d);
  for (std::size_t a = 0; a < d; ++a) out.set_col(a, quotient_coordinates(lifts, below, N.apply(lifts.col(a))));
  return out;
}

// Tops of Jordan chains of a nilpotent N: pairs (v, l) with N^{l+1} v = 0 and v, ..., N^l v a chain.
inline std::vector<std::pair<Vec, int>> jordan_tops(const Mat& N) {
  std::size_t n = N.rows();
  std::vector<std::pair<Vec, int>> tops;
  if (n == 0) return tops;
  IncFiltration L = weight_filtration(N, 0);
  for (int l = L.q_max(); l >= 0; --l) {
    Subspace have = sum(L[l - 1], image(N, L[l + 2]));
    Subspace cand = intersect(kernel_space(mat_pow(N, unsigned(l + 1))), L[l]);
    for (const auto& v : cand.basis()) {
      if (have.contains(v)) continue;
      have = sum(have, Subspace::span(n, {v}));
      tops.emplace_back(v, l);
    }
  }
  return tops;
}

inline IncFiltration filtration_from_weighted(std::size_t n, const std::vector<std::pair<Vec, int>>& gens) {
  if (gens.empty()) return IncFiltration(n, 0, {});
  int lo = gens.front().second, hi = lo;
  for (const auto& g : gens) {
    lo = std::min(lo, g.second);
    hi = std::max(hi, g.second);
  }
  std::vector<Subspace> p;
  for (int i = lo; i <= hi; ++i) {
    std::vector<Vec> vs;
    for (const auto& g : gens)
      if (g.second <= i) vs.push_back(g.first);
    p.push_back(Subspace::span(n, vs));
  }
  return IncFiltration(n, lo, p);
}

struct RelativeWeight {
  std::optional<IncFiltration> M;
  Report report;
};

// N M_i in M_{i-2} and, on each Gr^W_k, M induces W(N) centered at k.
inline Report check_relative_weight(const Mat& N, const IncFiltration& W, const IncFiltration& M) {
  Report rep;
  for (int i = M.q_min(); i <= M.q_max() + 2; ++i)
    if (!M[i - 2].contains(image(N, M[i]))) rep.fail("shift.i=" + std::to_string(i), "N M_i not inside M_{i-2}");
  rep.add("shift", !rep.has_failure("shift."));
  for (int k = W.q_min(); k <= W.q_max(); ++k) {
    auto lifts_v = quotient_lifts(W[k], W[k - 1]);
    if (lifts_v.empty()) continue;
    Mat lifts = Mat::from_columns(N.rows(), lifts_v);
    Mat Nk = induced_map(N, lifts, W[k - 1]);
    IncFiltration L = weight_filtration(Nk, k);
    bool ok = true;
    for (int i = std::min(L.q_min(), M.q_min()) - 1; i <= std::max(L.q_max(), M.q_max()) + 1; ++i) {
      std::vector<Vec> img;
      for (const auto& v : intersect(M[i], W[k]).basis()) img.push_back(quotient_coordinates(lifts, W[k - 1], v));
      if (Subspace::span(lifts.cols(), img) != L[i]) ok = false;
    }
    rep.add("graded.k=" + std::to_string(k), ok, ok ? "" : "induced filtration is not W(N) centered at k");
  }
  return rep;
}

inline RelativeWeight relative_weight_filtration(const Mat& N, const IncFiltration& W) {
  std::size_t n = N.rows();
  for (int j = W.q_min(); j <= W.q_max(); ++j)
    if (!W[j].contains(image(N, W[j])))
      throw std::invalid_argument("N does not preserve W_" + std::to_string(j));
  RelativeWeight out;
  std::vector<std::pair<Vec, int>> gens;
  for (int k = W.q_min(); k <= W.q_max(); ++k) {
    auto lifts_v = quotient_lifts(W[k], W[k - 1]);
    if (lifts_v.empty()) continue;
    Mat lifts = Mat::from_columns(n, lifts_v);
    Mat Nk = induced_map(N, lifts, W[k - 1]);
    Mat below = W[k - 1].columns();
    for (const auto& [top, l] : jordan_tops(Nk)) {
      Vec v0 = lifts.apply(top);
      Mat P = mat_pow(N, unsigned(l + 1));
      Vec t = P.apply(v0);
      std::vector<Vec> allowed;
      for (const auto& g : gens)
        if (g.second <= k - l - 2) allowed.push_back(g.first);
      Mat sys = hstack(P * below, Subspace::span(n, allowed).columns());
      Vec rhs = t;
      for (auto& x : rhs) x = -x;
      auto sol = solve(sys, rhs);
      if (!sol) {
        out.report.fail("exists", "no lift of a chain top of length " + std::to_string(l + 1) + " on Gr_" +
                                      std::to_string(k) + " lands in the required level");
        return out;
      }
      Vec a(sol->begin(), sol->begin() + long(below.cols()));
      Vec v = v0;
      Vec corr = below.apply(a);
      for (std::size_t i = 0; i < n; ++i) v[i] += corr[i];
      for (int s = 0; s <= l; ++s) {
        gens.emplace_back(v, k + l - 2 * s);
        v = N.apply(v);
      }
    }
  }
  IncFiltration M = filtration_from_weighted(n, gens);
  auto rep = check_relative_weight(N, W, M);
  out.report.add("exists", rep.ok(), rep.ok() ? "" : "constructed candidate fails verification");
  out.report.merge(rep, "verify");
  if (rep.ok()) out.M = M;
  return out;
}

inline bool is_hodge_tate(const Bigrading& I) {
  for (const auto& [pq, v] : I.pieces)
    if (pq.first != pq.second) return false;
  return true;
}

inline bool is_split_real(const Bigrading& I) {
  if (!is_hodge_tate(I)) return false;
  for (const auto& [pq, v] : I.pieces)
    if (conjugate(v) != v) return false;
  return true;
}

// N(I^{p,q}) inside I^{p+a,q+b} for all (p,q).
inline bool check_morphism_type(const Mat& N, const Bigrading& I, int a, int b) {
  for (const auto& [pq, v] : I.pieces)
    if (!I.at(pq.first + a, pq.second + b).contains(image(N, v))) return false;
  return true;
}

// Sign for definiteness on primitive pieces of weight k + j: Q(., (-L)^j .) is positive,
// the monodromy logarithm of the flat sections being -L.
inline int polarization_sign(int, int j) { return j % 2 == 0 ? 1 : -1; }

// Polarization of the Hodge-Tate structure (I, Q) by the (-1,-1) endomorphism L, grading I^{p,p} by 2p around k.
inline Report check_polarized_by(const Mat& L, const Bigrading& I, const Mat& Q, int k) {
  std::size_t n = I.n;
  if (!is_split_real(I)) throw PreconditionError("bigrading is not Hodge-Tate split over R");
  if (!check_morphism_type(L, I, -1, -1)) throw PreconditionError("L is not of type (-1,-1)");
  if (!(L.transpose() * Q + Q * L).is_zero()) throw PreconditionError("L is not an infinitesimal automorphism of Q");
  Report rep;
  std::map<int, Subspace> gr;
  for (const auto& [pq, v] : I.pieces) gr[2 * pq.first] = v;
  auto piece = [&](int w) {
    auto it = gr.find(w);
    return it == gr.end() ? Subspace::zero(n) : it->second;
  };
  for (const auto& [w, v] : gr) {
    int j = w - k;
    if (j < 0) {
      if (piece(k - j).dim() != v.dim())
        rep.fail("lefschetz.w=" + std::to_string(w), "no matching piece in weight " + std::to_string(k - j));
      continue;
    }
    Mat Lj = mat_pow(L, unsigned(j));
    bool iso = piece(k - j).dim() == v.dim() && image(Lj, v) == piece(k - j);
    rep.add("lefschetz.w=" + std::to_string(w), iso, iso ? "" : "L^" + std::to_string(j) + " is not an isomorphism");
    Subspace P = intersect(kernel_space(Lj * L), v);
    if (P.is_zero()) continue;
    auto b = P.basis();
    Gauss s(polarization_sign(k, j));
    Mat H(b.size(), b.size());
    for (std::size_t x = 0; x < b.size(); ++x)
      for (std::size_t y = 0; y < b.size(); ++y) H(x, y) = s * bilinear(Q, b[x], Lj.apply(vconj(b[y])));
    std::string why;
    rep.add("positive.w=" + std::to_string(w), positive_definite_hermitian(H, &why), why);
  }
  return rep;
}

}  // namespace hodgefrob
