#pragma once

#include <functional>
#include <set>
#include <map>
#include <string>
#include <vector>

#include "hodgefrob/frobmod.hpp"
#include "hodgefrob/hodge.hpp"
#include "hodgefrob/qseries.hpp"

namespace hodgefrob {

struct Obstruction : std::runtime_error {
  Obstruction(int ord, std::string comp)
      : std::runtime_error("obstruction at order " + std::to_string(ord) + ": " + comp),
        order(ord),
        component(std::move(comp)) {}
  int order;
  std::string component;
};

// Formal germ of a degenerating variation: psi(q) = exp(sum z_j N_j) exp(Gamma(q)) F_inf.
struct VHSGerm {
  int k = 0;
  DecFiltration Finf;
  std::vector<Mat> Ns;
  Mat Q;
  SMat Gamma;
  int D = kNoTrunc;

  std::size_t dim() const { return Finf.ambient(); }
  int r() const { return int(Ns.size()); }
};

inline Mat sum_of(const std::vector<Mat>& Ns, std::size_t n) {
  Mat s(n, n);
  for (const auto& N : Ns) s += N;
  return s;
}

inline IncFiltration germ_weight(const VHSGerm& G) { return weight_filtration(sum_of(G.Ns, G.dim()), G.k); }

inline Bigrading germ_bigrading(const VHSGerm& G) { return deligne_bigrading({G.Finf, germ_weight(G)}); }

// Psi_p = (+)_{a <= p} I^{a,b}.
inline IncFiltration psi_from_bigrading(const Bigrading& I) {
  std::map<int, Subspace> m;
  if (I.pieces.empty()) return IncFiltration(I.n, 0, {});
  int lo = I.pieces.begin()->first.first, hi = lo;
  for (const auto& [pq, v] : I.pieces) {
    lo = std::min(lo, pq.first);
    hi = std::max(hi, pq.first);
  }
  for (int p = lo; p <= hi; ++p) m[p] = I.sum_where([p](int a, int) { return a <= p; });
  return IncFiltration::from_map(I.n, m);
}

// Basis adapted to a bigrading; the level of an endomorphism block I^{a,b} -> I^{a',b'} is a' - a.
struct LevelFrame {
  Mat P, Pinv;
  std::vector<std::pair<int, int>> pq;
  int level(std::size_t i, std::size_t j) const { return pq[i].first - pq[j].first; }
  int min_level() const {
    int lo = 0, hi = 0;
    for (const auto& x : pq) {
      lo = std::min(lo, x.first);
      hi = std::max(hi, x.first);
    }
    return pq.empty() ? 0 : lo - hi;
  }
};

inline LevelFrame level_frame(const Bigrading& I) {
  LevelFrame f;
  std::vector<Vec> cols;
  int lo = 0;
  bool first = true;
  for (const auto& [pq, v] : I.pieces) {
    lo = first ? pq.first : std::min(lo, pq.first);
    first = false;
  }
  for (const auto& [pq, v] : I.pieces)
    for (const auto& b : v.basis()) {
      cols.push_back(b);
      f.pq.push_back(pq);
    }
  f.P = Mat::from_columns(I.n, cols);
  auto inv = inverse(f.P);
  if (!inv) throw PreconditionError("bigrading pieces do not form a direct sum");
  f.Pinv = *inv;
  return f;
}

// Splitting of F_inf alone, with I^{p,p} a complement of F^{p+1} in F^p.
inline Bigrading hodge_splitting(const DecFiltration& F) {
  Bigrading I{F.ambient(), {}};
  for (int p = F.p_min(); p <= F.p_max(); ++p) {
    auto lifts = quotient_lifts(F[p], F[p + 1]);
    if (!lifts.empty()) I.pieces[{p, p}] = Subspace::span(F.ambient(), lifts);
  }
  return I;
}

// Level frame of the Deligne bigrading, or of the Hodge splitting when (F_inf, W) is not mixed Hodge.
inline LevelFrame germ_frame(const VHSGerm& G) {
  try {
    return level_frame(germ_bigrading(G));
  } catch (const NotMHS&) {
    return level_frame(hodge_splitting(G.Finf));
  }
}

template <class T>
Matrix<T> mask_levels(const LevelFrame& f, Matrix<T> m, const std::function<bool(int)>& keep) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!keep(f.level(i, j))) m(i, j) = T();
  return m;
}

inline SMat to_frame(const LevelFrame& f, const SMat& X) { return to_series(f.Pinv) * X * to_series(f.P); }
inline SMat from_frame(const LevelFrame& f, const SMat& X) { return to_series(f.P) * X * to_series(f.Pinv); }
inline Mat to_frame(const LevelFrame& f, const Mat& X) { return f.Pinv * X * f.P; }
inline Mat from_frame(const LevelFrame& f, const Mat& X) { return f.P * X * f.Pinv; }

// Components of X (original coordinates) whose level satisfies keep.
inline SMat level_part(const LevelFrame& f, const SMat& X, const std::function<bool(int)>& keep) {
  return from_frame(f, mask_levels(f, to_frame(f, X), keep));
}
inline SMat level_part(const LevelFrame& f, const SMat& X, int s) {
  return level_part(f, X, [s](int l) { return l == s; });
}

// Highest level carrying a nonzero entry, or nullopt for zero.
inline std::optional<int> top_level(const LevelFrame& f, const SMat& X) {
  SMat Y = to_frame(f, X);
  std::optional<int> top;
  for (std::size_t i = 0; i < Y.rows(); ++i)
    for (std::size_t j = 0; j < Y.cols(); ++j)
      if (!Y(i, j).is_zero()) top = std::max(top.value_or(f.level(i, j)), f.level(i, j));
  return top;
}

// Bigrading of endomorphisms: g^{r,s} spanned by the blocks I^{a,b} -> I^{a+r,b+s}.
struct GBigrading {
  LevelFrame frame;
  std::map<std::pair<int, int>, std::vector<Mat>> pieces;

  std::size_t dim(std::pair<int, int> rs) const {
    auto it = pieces.find(rs);
    return it == pieces.end() ? 0 : it->second.size();
  }
  std::size_t total_dim() const {
    std::size_t d = 0;
    for (const auto& [rs, v] : pieces) d += v.size();
    return d;
  }
  std::vector<Mat> g_minus() const {
    std::vector<Mat> out;
    for (const auto& [rs, v] : pieces)
      if (rs.first < 0) out.insert(out.end(), v.begin(), v.end());
    return out;
  }
  std::vector<Mat> p_minus1() const {
    std::vector<Mat> out;
    for (const auto& [rs, v] : pieces)
      if (rs.first == -1) out.insert(out.end(), v.begin(), v.end());
    return out;
  }
};

inline GBigrading g_bigrading(const Bigrading& I) {
  GBigrading g{level_frame(I), {}};
  std::size_t n = I.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Mat e(n, n);
      e(i, j) = 1;
      auto rs = std::make_pair(g.frame.pq[i].first - g.frame.pq[j].first, g.frame.pq[i].second - g.frame.pq[j].second);
      g.pieces[rs].push_back(from_frame(g.frame, e));
    }
  return g;
}

// g_- preserves Psi and acts trivially on Gr^Psi; dimension count against block sizes.
inline Report check_g_bigrading(const GBigrading& g, const Bigrading& I) {
  Report rep;
  std::size_t expect = 0;
  for (const auto& [a, va] : I.pieces)
    for (const auto& [b, vb] : I.pieces) expect += va.dim() * vb.dim();
  rep.add("dimension", g.total_dim() == expect, std::to_string(g.total_dim()) + " vs " + std::to_string(expect));
  IncFiltration psi = psi_from_bigrading(I);
  bool pres = true, triv = true;
  for (const auto& X : g.g_minus())
    for (int p = psi.q_min(); p <= psi.q_max(); ++p) {
      Subspace img = image(X, psi[p]);
      if (!psi[p].contains(img)) pres = false;
      if (!psi[p - 1].contains(img)) triv = false;
    }
  rep.add("g_minus_preserves_psi", pres);
  rep.add("g_minus_trivial_on_graded", triv);
  return rep;
}

// Matrices of coefficients per q-monomial.
using MonoMat = std::map<std::uint64_t, Matrix<Coeff>>;

inline MonoMat to_monomat(const SMat& m) {
  MonoMat out;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (const auto& [key, c] : m(i, j).terms()) {
        if (mono::ldeg(key) > 0) throw std::invalid_argument("log symbols not allowed here");
        auto [it, fresh] = out.try_emplace(key, Matrix<Coeff>(m.rows(), m.cols()));
        it->second(i, j) += c;
      }
  return out;
}

inline SMat from_monomat(const MonoMat& mm, std::size_t n, int r, int D) {
  SMat out(n, n, Series::zero(r, D));
  for (const auto& [key, m] : mm)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!m(i, j).is_zero()) out(i, j).add_term(key, m(i, j));
  return out;
}

inline Matrix<Coeff> coeff_matrix(const Mat& m) {
  return m.map([](const Gauss& g) { return Coeff(g); });
}

// Monomials in q_1..q_r of total degree <= D, ordered by degree.
inline std::vector<std::uint64_t> monomials(int r, int D) {
  std::vector<std::uint64_t> out{0};
  std::size_t start = 0;
  for (int d = 1; d <= D; ++d) {
    std::size_t end = out.size();
    std::set<std::uint64_t> next;
    for (std::size_t i = start; i < end; ++i)
      for (int j = 0; j < r; ++j) next.insert(out[i] + mono::qvar(j));
    start = end;
    out.insert(out.end(), next.begin(), next.end());
    if (r == 0) break;
  }
  return out;
}

inline bool divides(std::uint64_t a, std::uint64_t b) {
  for (int j = 0; j < kMaxVars; ++j)
    if (mono::q(a, j) > mono::q(b, j)) return false;
  return true;
}

inline std::string mono_name(std::uint64_t key, int r) {
  std::string s = "q^(";
  for (int j = 0; j < r; ++j) s += (j ? "," : "") + std::to_string(mono::q(key, j));
  return s + ")";
}

inline std::string first_entry(const Matrix<Coeff>& m, const LevelFrame* f = nullptr) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!m(i, j).is_zero())
        return "entry " + idx_name({i, j}) + (f ? " level " + std::to_string(f->level(i, j)) : "");
  return {};
}

// Rebuild Gamma from its level -1 projection by solving dE_j = E L_j - N_j E, L_j = N_j + dGamma_{-1}/dz_j,
// E = exp(Gamma), order by order in q; every j is checked.
inline SMat gamma_from_gamma_minus1(const DecFiltration& Finf, const std::vector<Mat>& Ns, const SMat& G1, int k,
                                    int D) {
  std::size_t n = Finf.ambient();
  int r = int(Ns.size());
  if (r > kMaxVars) throw std::invalid_argument("at most 4 framing variables are supported");
  VHSGerm shape{k, Finf, Ns, Mat(n, n), SMat(n, n), D};
  LevelFrame f = germ_frame(shape);
  SMat g1 = to_frame(f, with_order(G1, D));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!g1(i, j).is_zero() && f.level(i, j) != -1) throw PreconditionError("Gamma_{-1} is not of level -1");
  MonoMat g = to_monomat(g1);
  if (g.count(0)) throw PreconditionError("Gamma_{-1} does not vanish at q = 0");
  std::vector<Matrix<Coeff>> N;
  for (const auto& x : Ns) N.push_back(coeff_matrix(to_frame(f, x)));
  MonoMat E;
  E[0] = Matrix<Coeff>::identity(n);
  auto residual = [&](std::uint64_t m, int j) {
    Matrix<Coeff> R(n, n);
    for (const auto& [m2, gm] : g) {
      if (m2 == 0 || !divides(m2, m)) continue;
      int e = mono::q(m2, j);
      if (e == 0) continue;
      auto it = E.find(m - m2);
      if (it == E.end()) continue;
      R += scaled(it->second * gm, Coeff(Gauss(e), 1));
    }
    return R;
  };
  for (std::uint64_t m : monomials(r, D)) {
    if (m == 0) continue;
    int j0 = 0;
    while (mono::q(m, j0) == 0) ++j0;
    Coeff inv = Coeff(Gauss(Rational(1, mono::q(m, j0))), -1);
    Matrix<Coeff> R = residual(m, j0);
    Matrix<Coeff> Em(n, n);
    for (int s = -1; s >= f.min_level(); --s) {
      Matrix<Coeff> rhs = R - commutator(N[std::size_t(j0)], Em);
      Em += scaled(mask_levels<Coeff>(f, rhs, [s](int l) { return l == s; }), inv);
    }
    for (int j = 0; j < r; ++j) {
      Matrix<Coeff> lhs = scaled(Em, Coeff(Gauss(mono::q(m, j)), 1)) + commutator(N[std::size_t(j)], Em);
      Matrix<Coeff> diff = lhs - residual(m, j);
      if (!diff.is_zero())
        throw Obstruction(mono::qdeg(m), mono_name(m, r) + " j=" + std::to_string(j + 1) + " " + first_entry(diff, &f));
    }
    if (!Em.is_zero()) E[m] = Em;
  }
  SMat Eser = from_monomat(E, n, r, D);
  return from_frame(f, log_unipotent(Eser));
}

inline SMat germ_gamma_level(const VHSGerm& G, int s) { return level_part(level_frame(germ_bigrading(G)), G.Gamma, s); }

// Connection matrices L_j = N_j + dGamma_{-1}/dz_j of dX_{-1}.
inline std::vector<SMat> germ_connection(const VHSGerm& G) {
  LevelFrame f = germ_frame(G);
  SMat g1 = level_part(f, G.Gamma, -1);
  std::vector<SMat> L;
  for (int j = 0; j < G.r(); ++j) L.push_back(with_order(to_series(G.Ns[std::size_t(j)], G.r(), G.D) + derive_z(g1, j), G.D));
  return L;
}

inline SMat ell_sum(const VHSGerm& G) {
  SMat s(G.dim(), G.dim(), Series::zero(G.r(), G.D));
  for (int j = 0; j < G.r(); ++j) {
    Series l = Series::ell(j, G.r(), G.D);
    s += to_series(G.Ns[std::size_t(j)]).map([&](const Series& x) { return x * l; });
  }
  return s;
}

struct XPresentation {
  SMat X;
  SMat X1;
};

// X = log(exp(sum l_j N_j) exp(Gamma)); X_{-1} its level -1 projection.
inline XPresentation x_from_germ(const VHSGerm& G) {
  LevelFrame f = level_frame(germ_bigrading(G));
  SMat X = with_order(log_unipotent(exp_nilpotent(ell_sum(G)) * exp_nilpotent(G.Gamma)), G.D);
  auto top = top_level(f, X);
  if (top && *top >= 0) throw std::domain_error("X escapes g_-");
  return {X, level_part(f, X, -1)};
}

inline std::string defect_text(const SMat& m) { return first_defect(m).text(); }

// Gamma(0) = 0, Gamma in g_-, and E^{-1}(N_j E + dE/dz_j) = N_j + dGamma_{-1}/dz_j for every j.
inline Report horizontality_check(const VHSGerm& G) {
  Report rep;
  LevelFrame f = level_frame(germ_bigrading(G));
  bool vanish = true;
  for (const auto& s : G.Gamma.data())
    if (!s.constant_term().is_zero() || s.has_log()) vanish = false;
  rep.add("gamma_vanishes_at_origin", vanish);
  auto top = top_level(f, G.Gamma);
  rep.add("gamma_in_g_minus", !top || *top < 0, top ? "top level " + std::to_string(*top) : "");
  SMat E = exp_nilpotent(G.Gamma), Einv = exp_nilpotent(-G.Gamma);
  auto L = germ_connection(G);
  for (int j = 0; j < G.r(); ++j) {
    SMat N = to_series(G.Ns[std::size_t(j)], G.r(), G.D);
    SMat lhs = with_order(Einv * (N * E + derive_z(E, j)), G.D);
    auto d = first_defect(lhs - L[std::size_t(j)]);
    rep.add("horizontal.j=" + std::to_string(j + 1), !d.found(), d.text());
  }
  return rep;
}

struct HiggsField {
  std::vector<SMat> Theta;  // E L_j E^{-1}, the log-free part
  std::vector<SMat> theta;  // exp(l N) Theta_j exp(-l N)
  Report report;
};

inline HiggsField higgs_field(const VHSGerm& G, bool with_logs = true) {
  if (!horizontality_check(G)) throw PreconditionError("germ is not horizontal");
  HiggsField h;
  LevelFrame f = level_frame(germ_bigrading(G));
  SMat E = exp_nilpotent(G.Gamma), Einv = exp_nilpotent(-G.Gamma);
  auto L = germ_connection(G);
  SMat U, Uinv;
  if (with_logs) {
    U = exp_nilpotent(ell_sum(G));
    Uinv = exp_nilpotent(-ell_sum(G));
  }
  for (int j = 0; j < G.r(); ++j) {
    SMat T = with_order(E * L[std::size_t(j)] * Einv, G.D);
    auto top = top_level(f, T - L[std::size_t(j)]);
    h.report.add("level.j=" + std::to_string(j + 1), !top || *top <= -2, top ? "level " + std::to_string(*top) : "");
    if (with_logs) h.theta.push_back(with_order(U * T * Uinv, G.D));
    h.Theta.push_back(std::move(T));
  }
  for (int j = 0; j < G.r(); ++j)
    for (int l = j + 1; l < G.r(); ++l) {
      std::string J = "j=" + std::to_string(j + 1) + ",l=" + std::to_string(l + 1);
      const SMat &Lj = L[std::size_t(j)], &Ll = L[std::size_t(l)];
      h.report.add("wedge." + J, !first_defect(commutator(Lj, Ll)).found(), defect_text(commutator(Lj, Ll)));
      SMat c = derive_z(Ll, j) - derive_z(Lj, l);
      h.report.add("closed." + J, !first_defect(c).found(), defect_text(c));
    }
  return h;
}

// det of a square series matrix whose constant term is an invertible Gaussian matrix.
inline Series series_det(const SMat& M) {
  std::size_t n = M.rows();
  if (n == 0) return Series(1);
  Mat C = constant_matrix(M);
  Gauss d0 = det(C);
  if (d0.is_zero()) return Series();
  int D = matrix_order(M);
  SMat Y = with_order(to_series(*inverse(C)) * M - series_identity(n), D);
  SMat pw = series_identity(n), lg(n, n);
  for (int k = 1; k <= D; ++k) {
    pw = with_order(pw * Y, D);
    if (pw.is_zero()) break;
    lg += scaled(pw, Gauss(Rational(k % 2 ? 1 : -1, k)));
  }
  Series tr;
  for (std::size_t i = 0; i < n; ++i) tr += lg(i, i);
  return (series_exp(tr.with_order(D)) * Series(d0)).with_order(D);
}

struct PsiResult {
  IncFiltration psi;
  std::map<int, Series> determinants;
  Report report;
};

// Psi from the bigrading of (F_inf, rW) and the unit-determinant oppositeness certificate
// det[E basis(F^p) | basis(Psi_{p-1})] through order D.
inline PsiResult psi_filtration(const VHSGerm& G) {
  PsiResult out;
  Bigrading I = germ_bigrading(G);
  out.psi = psi_from_bigrading(I);
  out.report.merge(is_opposite(G.Finf, out.psi), "at_origin");
  if (is_hodge_tate(I)) {
    IncFiltration W = germ_weight(G);
    bool eq = true;
    for (int p = out.psi.q_min() - 1; p <= out.psi.q_max() + 1; ++p)
      if (out.psi[p] != W[2 * p]) eq = false;
    out.report.add("hodge_tate_psi_is_weight", eq);
  }
  std::size_t n = G.dim();
  SMat E = exp_nilpotent(G.Gamma);
  for (int p = G.Finf.p_min(); p <= G.Finf.p_max() + 1; ++p) {
    Mat bf = G.Finf[p].columns(), bp = out.psi[p - 1].columns();
    std::string P = "p=" + std::to_string(p);
    if (bf.cols() + bp.cols() != n) {
      out.report.fail("unit_determinant." + P, "dimensions do not add up");
      continue;
    }
    SMat M = hstack(with_order(E * to_series(bf, G.r(), G.D), G.D), to_series(bp, G.r(), G.D));
    Series d = series_det(M);
    out.determinants[p] = d;
    bool unit = d.constant_term().is_unit() && !d.has_log();
    out.report.add("unit_determinant." + P, unit, unit ? "" : "constant term " + to_string(d.constant_term()));
  }
  return out;
}

inline Mat exp_nilpotent(const Mat& a) { return constant_matrix(exp_nilpotent(to_series(a))); }

// Psi = conj(F_inf)^vee * rW, and the same identity at the real translate exp(tN) F_inf.
inline Report psi_convolution_check(const VHSGerm& G, const Rational& t = Rational(1, 2)) {
  Report rep;
  IncFiltration W = germ_weight(G);
  Bigrading I = germ_bigrading(G);
  IncFiltration psi = psi_from_bigrading(I);
  rep.add("convolution", psi == convolve(dual(conjugate(G.Finf)), W));
  Mat g = exp_nilpotent(scaled(sum_of(G.Ns, G.dim()), Gauss(t)));
  DecFiltration Ft = transform(g, G.Finf);
  Bigrading It = deligne_bigrading({Ft, W});
  Bigrading moved{I.n, {}};
  for (const auto& [pq, v] : I.pieces) moved.set(pq.first, pq.second, image(g, v));
  rep.add("translate_bigrading", It == moved);
  IncFiltration psit = convolve(dual(conjugate(Ft)), W);
  rep.add("translate_convolution", psit == psi_from_bigrading(It) && psit == psi);
  return rep;
}

// Gamma in g_- with exp(Gamma) F_inf = g(q) F_inf; g(0) must stabilize F_inf.
inline SMat gamma_normal_form(const SMat& g, const DecFiltration& Finf, const Bigrading& I) {
  std::size_t n = Finf.ambient();
  LevelFrame f = level_frame(I);
  int r = 0, D = matrix_order(g);
  for (const auto& s : g.data()) r = std::max(r, s.nvars());
  MonoMat X = to_monomat(to_frame(f, g));
  Matrix<Coeff> H0 = X.count(0) ? X[0] : Matrix<Coeff>(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!H0(i, j).is_zero() && (f.level(i, j) < 0 || !H0(i, j).is_tau_free()))
        throw PreconditionError("psi(0) differs from F_inf");
  Mat d0 = mask_levels<Coeff>(f, H0, [](int l) { return l == 0; }).map([](const Coeff& c) { return c.scalar(); });
  auto d0inv = inverse(d0);
  if (!d0inv) throw PreconditionError("g(0) is singular");
  Matrix<Coeff> D0inv = coeff_matrix(*d0inv);
  MonoMat U, H;
  U[0] = Matrix<Coeff>::identity(n);
  H[0] = H0;
  for (std::uint64_t m : monomials(r, D)) {
    if (m == 0) continue;
    Matrix<Coeff> Y = X.count(m) ? X[m] : Matrix<Coeff>(n, n);
    for (const auto& [m1, u] : U) {
      if (m1 == 0 || m1 == m || !divides(m1, m)) continue;
      auto it = H.find(m - m1);
      if (it != H.end()) Y -= u * it->second;
    }
    Matrix<Coeff> Um(n, n);
    for (int s = f.min_level(); s <= -1; ++s) {
      Matrix<Coeff> rest = Y - Um * H0;
      Um += mask_levels<Coeff>(f, rest, [s](int l) { return l == s; }) * D0inv;
    }
    Matrix<Coeff> Hm = Y - Um * H0;
    if (!Um.is_zero()) U[m] = Um;
    if (!Hm.is_zero()) H[m] = Hm;
  }
  return from_frame(f, log_unipotent(from_monomat(U, n, r, D)));
}

struct CoordinateChange {
  VHSGerm germ;
  std::vector<Gauss> constants;
  Report rescale;
};

// New coordinates qt_j = f_j(q) q_j. The unit part u_j = f_j / f_j(0) transforms Gamma exactly;
// nontrivial constants f_j(0) are carried as formal logarithms and certified through Psi.
inline CoordinateChange coordinate_change(const VHSGerm& G, const std::vector<Series>& f) {
  int r = G.r();
  if (int(f.size()) != r) throw std::invalid_argument("expected one unit per coordinate");
  CoordinateChange out;
  std::vector<Series> u;
  for (int j = 0; j < r; ++j) {
    Coeff c = f[std::size_t(j)].constant_term();
    if (c.is_zero()) throw PreconditionError("f_" + std::to_string(j + 1) + "(0) = 0");
    if (!c.is_tau_free()) throw PreconditionError("f_" + std::to_string(j + 1) + "(0) must be a constant");
    if (f[std::size_t(j)].has_log()) throw PreconditionError("units may not contain log symbols");
    out.constants.push_back(c.scalar());
    u.push_back((f[std::size_t(j)].with_vars(r).with_order(G.D) * Coeff(c.scalar().inv())));
  }
  std::size_t n = G.dim();
  SMat shift(n, n, Series::zero(r, G.D));
  for (int j = 0; j < r; ++j) {
    Series gj = series_log(u[std::size_t(j)]).tau_shift(-1);
    shift -= to_series(G.Ns[std::size_t(j)]).map([&](const Series& x) { return x * gj; });
  }
  SMat Gp = with_order(log_unipotent(exp_nilpotent(shift) * exp_nilpotent(G.Gamma)), G.D);
  std::vector<Series> qs;
  for (int j = 0; j < r; ++j) qs.push_back(Series::q(j, r, G.D));
  for (int it = 0; it <= G.D && r > 0; ++it) {
    std::vector<Series> nxt;
    for (int j = 0; j < r; ++j)
      nxt.push_back((Series::q(j, r, G.D) * series_inverse(compose(u[std::size_t(j)], qs))).with_order(G.D));
    if (nxt == qs) break;
    qs = std::move(nxt);
  }
  out.germ = G;
  out.germ.Gamma = Gp.map([&](const Series& s) { return compose(s, qs).with_order(G.D); });
  std::vector<Mat> moved;
  for (int j = 0; j < r; ++j)
    if (!out.constants[std::size_t(j)].is_one()) moved.push_back(G.Ns[std::size_t(j)]);
  if (!moved.empty()) {
    IncFiltration W = germ_weight(G);
    IncFiltration psi = psi_from_bigrading(germ_bigrading(G));
    bool pres = true;
    for (const auto& N : moved)
      for (int p = psi.q_min(); p <= psi.q_max(); ++p)
        if (!psi[p].contains(image(N, psi[p]))) pres = false;
    out.rescale.add("symbolic_terms_preserve_psi", pres);
    Mat Nt = sum_of(moved, n);
    for (const Rational& t : {Rational(1, 2), Rational(-3)}) {
      DecFiltration Ft = transform(exp_nilpotent(scaled(Nt, Gauss(t))), G.Finf);
      bool same = psi_from_bigrading(deligne_bigrading({Ft, W})) == psi;
      out.rescale.add("sample_psi_invariant.t=" + t.get_str(), same);
    }
  }
  return out;
}

}  // namespace hodgefrob
