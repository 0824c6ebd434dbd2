#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hodgefrob/hodge.hpp"
#include "hodgefrob/qseries.hpp"

namespace hodgefrob {

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Graded V_2-Frobenius module of weight k in an adapted basis T_0..T_m.
// dims[p] = dim V_{2p}; the framing T_1..T_r is the degree-2 block; A[j-1] is the matrix of T_j * (-).
struct FrobeniusModule {
  int k = 0;
  std::vector<std::size_t> dims;
  Mat B;
  std::vector<Mat> A;
  bool real = true;

  std::size_t dim() const {
    std::size_t n = 0;
    for (auto d : dims) n += d;
    return n;
  }
  int r() const { return int(A.size()); }
  // Degree (tilde a) of basis vector a.
  int deg(std::size_t a) const {
    std::size_t acc = 0;
    for (std::size_t p = 0; p < dims.size(); ++p) {
      acc += dims[p];
      if (a < acc) return int(2 * p);
    }
    throw std::out_of_range("basis index out of range");
  }
  std::vector<std::size_t> indices_of_degree(int d) const {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < dim(); ++a)
      if (deg(a) == d) out.push_back(a);
    return out;
  }
  Vec basis_vector(std::size_t a) const {
    Vec v(dim());
    v[a] = 1;
    return v;
  }

  friend bool operator==(const FrobeniusModule& x, const FrobeniusModule& y) {
    return x.k == y.k && x.dims == y.dims && x.B == y.B && x.A == y.A && x.real == y.real;
  }
};

// delta with B(T_{delta(a)}, T_b) = delta_{ab}; B must be a permutation matrix.
inline std::vector<std::size_t> duality_involution(const Mat& B) {
  std::size_t n = B.rows();
  std::vector<std::size_t> d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Gauss& x = B(i, j);
      if (x.is_zero()) continue;
      if (!x.is_one() || d[j] != n)
        throw InputError("pairing is not in adapted form at entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      d[j] = i;
    }
  for (std::size_t a = 0; a < n; ++a) {
    if (d[a] == n) throw InputError("pairing is degenerate at column " + std::to_string(a));
    if (d[d[a]] != a) throw InputError("duality map is not an involution at " + std::to_string(a));
  }
  return d;
}

inline std::string idx_name(std::initializer_list<std::size_t> xs) {
  std::string s = "(";
  bool first = true;
  for (auto x : xs) {
    s += (first ? "" : ",") + std::to_string(x);
    first = false;
  }
  return s + ")";
}

inline void check_shapes(const FrobeniusModule& M) {
  std::size_t n = M.dim();
  if (M.k < 0) throw InputError("negative weight");
  if (M.dims.size() != std::size_t(M.k + 1)) throw InputError("dims must list dim V_{2p} for p = 0..k");
  if (M.B.rows() != n || M.B.cols() != n) throw InputError("pairing has wrong shape");
  std::size_t r = M.k >= 1 ? M.dims[1] : 0;
  if (M.A.size() != r) throw InputError("expected one action matrix per degree-2 basis vector");
  for (const auto& a : M.A)
    if (a.rows() != n || a.cols() != n) throw InputError("action matrix has wrong shape");
}

// Q(v_a, v_b) = (-1)^{k + deg(a)/2} B(v_a, v_b).
inline Mat q_form(const FrobeniusModule& M) {
  Mat Q = M.B;
  for (std::size_t a = 0; a < M.dim(); ++a) {
    int s = (M.k + M.deg(a) / 2) % 2 ? -1 : 1;
    if (s < 0)
      for (std::size_t b = 0; b < M.dim(); ++b) Q(a, b) = -Q(a, b);
  }
  return Q;
}

inline Report validate_module(const FrobeniusModule& M) {
  Report rep;
  check_shapes(M);
  std::size_t n = M.dim();
  rep.add("unit_spans_V0", M.dims[0] == 1, M.dims[0] == 1 ? "" : "dim V_0 must be 1");
  std::vector<std::size_t> delta;
  try {
    delta = duality_involution(M.B);
    rep.add("adapted_pairing", true);
  } catch (const InputError& e) {
    rep.fail("adapted_pairing", e.what());
    return rep;
  }
  bool sym = M.B == M.B.transpose();
  rep.add("pairing_symmetric", sym);
  bool pairs = true;
  for (std::size_t a = 0; a < n; ++a)
    if (M.deg(delta[a]) != 2 * M.k - M.deg(a)) pairs = false;
  rep.add("pairing_degrees", pairs, pairs ? "" : "B must pair V_{2p} with V_{2(k-p)}");
  Mat Q = q_form(M);
  for (int j = 1; j <= M.r(); ++j) {
    const Mat& A = M.A[std::size_t(j - 1)];
    std::string J = "j=" + std::to_string(j);
    bool unit = A.col(0) == M.basis_vector(std::size_t(j));
    rep.add("unit." + J, unit, unit ? "" : "T_j * e != T_j");
    std::string bad;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t a = 0; a < n; ++a)
        if (!A(c, a).is_zero() && M.deg(c) != M.deg(a) + 2 && bad.empty()) bad = "entry " + idx_name({c, a});
    rep.add("graded." + J, bad.empty(), bad);
    Mat S = M.B * A - A.transpose() * M.B;
    bad.clear();
    for (std::size_t x = 0; x < n && bad.empty(); ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (!S(x, y).is_zero()) {
          bad = "B(T_j*T_" + std::to_string(y) + ", T_" + std::to_string(x) + ") != B(T_" + std::to_string(y) +
                ", T_j*T_" + std::to_string(x) + ")";
          break;
        }
    rep.add("symmetric." + J, bad.empty(), bad);
    rep.add("q_infinitesimal." + J, (A.transpose() * Q + Q * A).is_zero());
    if (M.real) rep.add("real." + J, is_real(A));
    for (int l = j + 1; l <= M.r(); ++l) {
      Mat C = commutator(A, M.A[std::size_t(l - 1)]);
      std::string where;
      for (std::size_t x = 0; x < n && where.empty(); ++x)
        for (std::size_t y = 0; y < n; ++y)
          if (!C(x, y).is_zero()) {
            where = "first nonzero entry " + idx_name({x, y});
            break;
          }
      rep.add("commute." + J + ",l=" + std::to_string(l), where.empty(), where);
    }
  }
  if (M.real) rep.add("real.B", is_real(M.B));
  return rep;
}

// Hodge-Tate bigrading I^{p,p} = V_{2(k-p)}.
inline Bigrading module_bigrading(const FrobeniusModule& M) {
  Bigrading I{M.dim(), {}};
  for (int p = 0; p <= M.k; ++p) I.set(p, p, Subspace::coordinate(M.dim(), M.indices_of_degree(2 * (M.k - p))));
  return I;
}

// F^p = (+)_{a >= p} V_{2(k-a)}.
inline DecFiltration module_hodge_filtration(const FrobeniusModule& M) {
  return hodge_filtration_of(module_bigrading(M));
}

inline Mat lefschetz(const FrobeniusModule& M, const Vec& w) {
  Mat L(M.dim(), M.dim());
  for (int j = 1; j <= M.r(); ++j) L += scaled(M.A[std::size_t(j - 1)], w.at(std::size_t(j)));
  return L;
}

// w in V_2 cap V_R (full coordinate vector) polarizes M.
inline Report polarizes(const FrobeniusModule& M, const Vec& w) {
  if (w.size() != M.dim()) throw InputError("w has wrong length");
  for (std::size_t a = 0; a < w.size(); ++a)
    if (!w[a].is_zero() && (M.deg(a) != 2 || !w[a].is_real())) throw PreconditionError("w is not in V_2 cap V_R");
  return check_polarized_by(lefschetz(M, w), module_bigrading(M), q_form(M), M.k);
}

// Interior framing representative: w = T_1 + ... + T_r.
inline Report check_framing(const FrobeniusModule& M) {
  Vec w(M.dim());
  for (int j = 1; j <= M.r(); ++j) w[std::size_t(j)] = 1;
  return polarizes(M, w);
}

// Cubic form: coefficient of z_x z_y z_w for sorted x <= y <= w.
using CubicForm = std::map<std::array<std::size_t, 3>, Gauss>;

inline std::array<std::size_t, 3> sorted3(std::size_t a, std::size_t b, std::size_t c) {
  std::array<std::size_t, 3> t{a, b, c};
  std::sort(t.begin(), t.end());
  return t;
}

inline Gauss third_partial(const CubicForm& f, std::size_t a, std::size_t b, std::size_t c) {
  auto key = sorted3(a, b, c);
  auto it = f.find(key);
  if (it == f.end()) return Gauss();
  long mult = (key[0] == key[2]) ? 6 : (key[0] == key[1] || key[1] == key[2]) ? 2 : 1;
  return it->second * Gauss(mult);
}

inline int c_factor(int k, int at) {
  if (k == 3 && at == 2) return 2;
  if (k != 3 && (at == 2 || at == 2 * k - 4)) return 3;
  return 6;
}

// phi_0 = sum_{deg j = 2, a, b} z_j z_a z_b C(deg a)/12 B(T_j * T_a, T_b).
inline CubicForm classical_potential(const FrobeniusModule& M) {
  CubicForm f;
  std::size_t n = M.dim();
  for (int j = 1; j <= M.r(); ++j) {
    const Mat& A = M.A[std::size_t(j - 1)];
    for (std::size_t a = 0; a < n; ++a) {
      Vec ja = A.col(a);
      if (is_zero_vec(ja)) continue;
      Gauss c = Gauss(Rational(c_factor(M.k, M.deg(a)), 12));
      for (std::size_t b = 0; b < n; ++b) {
        Gauss v;
        for (std::size_t x = 0; x < n; ++x)
          if (!ja[x].is_zero() && !M.B(x, b).is_zero()) v += ja[x] * M.B(x, b);
        if (v.is_zero()) continue;
        auto key = sorted3(std::size_t(j), a, b);
        f[key] += c * v;
      }
    }
  }
  for (auto it = f.begin(); it != f.end();) it = it->second.is_zero() ? f.erase(it) : std::next(it);
  return f;
}

// T_j * T_a = sum_{deg c = deg a + 2} d^3 phi / dz_j dz_a dz_delta(c) T_c.
inline std::vector<Mat> action_from_potential(int k, const std::vector<std::size_t>& dims, const Mat& B,
                                              const CubicForm& phi) {
  FrobeniusModule shape{k, dims, B, {}, true};
  auto delta = duality_involution(B);
  std::size_t n = shape.dim();
  std::size_t r = k >= 1 ? dims[1] : 0;
  std::vector<Mat> A;
  for (std::size_t j = 1; j <= r; ++j) {
    Mat m(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c)
        if (shape.deg(c) == shape.deg(a) + 2) m(c, a) = third_partial(phi, j, a, delta[c]);
    A.push_back(std::move(m));
  }
  return A;
}

// Polynomial in the non-framing coordinates z_a with q-series coefficients; the framing
// coordinates enter only through q_j = exp(tau z_j). Keys are sorted multisets of basis indices.
class ZPoly {
 public:
  using Key = std::vector<std::size_t>;

  ZPoly() = default;
  explicit ZPoly(const Series& s) {
    if (!s.is_zero()) t_[{}] = s;
  }
  static ZPoly term(Key key, const Series& s) {
    std::sort(key.begin(), key.end());
    ZPoly p;
    if (!s.is_zero()) p.t_[key] = s;
    return p;
  }

  const std::map<Key, Series>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  Series at_zero() const {
    auto it = t_.find({});
    return it == t_.end() ? Series() : it->second;
  }
  Series coeff(const Key& key) const {
    auto it = t_.find(key);
    return it == t_.end() ? Series() : it->second;
  }
  std::size_t degree() const {
    std::size_t d = 0;
    for (const auto& [key, s] : t_) d = std::max(d, key.size());
    return d;
  }

  void add(const Key& key, const Series& s) {
    if (s.is_zero()) return;
    auto it = t_.find(key);
    if (it == t_.end()) {
      t_[key] = s;
      return;
    }
    it->second += s;
    if (it->second.is_zero()) t_.erase(it);
  }

  ZPoly& operator+=(const ZPoly& o) {
    for (const auto& [key, s] : o.t_) add(key, s);
    return *this;
  }
  ZPoly& operator-=(const ZPoly& o) {
    for (const auto& [key, s] : o.t_) add(key, -s);
    return *this;
  }
  friend ZPoly operator+(ZPoly a, const ZPoly& b) { return a += b; }
  friend ZPoly operator-(ZPoly a, const ZPoly& b) { return a -= b; }
  ZPoly operator-() const {
    ZPoly p = *this;
    for (auto& [key, s] : p.t_) s = -s;
    return p;
  }
  friend ZPoly operator*(const ZPoly& a, const ZPoly& b) {
    ZPoly p;
    for (const auto& [ka, sa] : a.t_)
      for (const auto& [kb, sb] : b.t_) {
        Key key = ka;
        key.insert(key.end(), kb.begin(), kb.end());
        std::sort(key.begin(), key.end());
        p.add(key, sa * sb);
      }
    return p;
  }
  ZPoly& operator*=(const Gauss& g) {
    if (g.is_zero()) {
      t_.clear();
      return *this;
    }
    for (auto& [key, s] : t_) s *= g;
    return *this;
  }
  ZPoly& operator*=(const ZPoly& o) { return *this = *this * o; }

  // d/dz_i: framing indices 1..r act by tau q_i d/dq_i on coefficients, others on the polynomial part.
  ZPoly partial(std::size_t i, int r) const {
    ZPoly p;
    if (i >= 1 && i <= std::size_t(r)) {
      for (const auto& [key, s] : t_) p.add(key, s.derive_z(int(i) - 1));
      return p;
    }
    for (const auto& [key, s] : t_) {
      long mult = std::count(key.begin(), key.end(), i);
      if (mult == 0) continue;
      Key k2 = key;
      k2.erase(std::find(k2.begin(), k2.end(), i));
      Series c = s;
      c *= Gauss(mult);
      p.add(k2, c);
    }
    return p;
  }

  friend bool operator==(const ZPoly& a, const ZPoly& b) { return a.t_ == b.t_; }
  friend bool operator!=(const ZPoly& a, const ZPoly& b) { return !(a == b); }

 private:
  std::map<Key, Series> t_;
};

inline bool is_zero(const ZPoly& p) { return p.is_zero(); }

// Quantum part of the potential: weight 3 uses phi3; weight > 3 uses linear[a] (deg a = 2k-4)
// and quadratic[(a,b)], a <= b, 2 < deg a < 2k-4, deg a + deg b = 2k-2.
struct Potential {
  int k = 0;
  int r = 0;
  Series phi3;
  std::map<std::size_t, Series> linear;
  std::map<std::pair<std::size_t, std::size_t>, Series> quadratic;

  bool is_zero() const {
    if (!phi3.is_zero()) return false;
    for (const auto& [a, s] : linear)
      if (!s.is_zero()) return false;
    for (const auto& [ab, s] : quadratic)
      if (!s.is_zero()) return false;
    return true;
  }

  // The phi_hbar of the sum over ordered pairs: z_a z_b phi^{ab} contributes twice when a != b.
  ZPoly as_zpoly() const {
    ZPoly p;
    if (k == 3) return ZPoly(phi3);
    for (const auto& [a, s] : linear) p.add({a}, s);
    for (const auto& [ab, s] : quadratic) {
      Series c = s;
      if (ab.first != ab.second) c *= Gauss(2);
      p.add(ZPoly::Key{ab.first, ab.second}, c);
    }
    return p;
  }

  int order() const {
    int D = kNoTrunc;
    D = std::min(D, phi3.order());
    for (const auto& [a, s] : linear) D = std::min(D, s.order());
    for (const auto& [ab, s] : quadratic) D = std::min(D, s.order());
    return D;
  }

  friend bool operator==(const Potential& x, const Potential& y) {
    auto strip = [](const Potential& p) {
      std::map<std::size_t, Series> l;
      for (const auto& [a, s] : p.linear)
        if (!s.is_zero()) l[a] = s;
      std::map<std::pair<std::size_t, std::size_t>, Series> q;
      for (const auto& [ab, s] : p.quadratic)
        if (!s.is_zero()) q[ab] = s;
      return std::make_tuple(p.k, p.phi3, l, q);
    };
    return strip(x) == strip(y);
  }
};

inline Potential zero_potential(const FrobeniusModule& M) { return Potential{M.k, M.r(), Series(), {}, {}}; }

// Index support and vanishing at q = 0 of every series.
inline Report check_potential_shape(const FrobeniusModule& M, const Potential& P) {
  Report rep;
  auto vanish = [](const Series& s) { return s.constant_term().is_zero() && !s.has_log(); };
  if (P.k != M.k) return rep.fail("weight", "potential weight differs from module weight");
  if (M.k <= 2) {
    rep.add("no_deformation", P.is_zero(), P.is_zero() ? "" : "weights 1 and 2 admit no quantum part");
    return rep;
  }
  if (M.k == 3) {
    bool ok = P.linear.empty() && P.quadratic.empty();
    rep.add("support", ok, ok ? "" : "weight 3 takes a single series");
    rep.add("vanishes_at_origin", vanish(P.phi3));
    return rep;
  }
  std::string bad;
  if (!P.phi3.is_zero()) bad = "single-series part is only allowed in weight 3";
  for (const auto& [a, s] : P.linear) {
    if (a >= M.dim() || M.deg(a) != 2 * M.k - 4) bad = "linear index " + std::to_string(a) + " not of degree 2k-4";
    if (!vanish(s)) bad = "linear series " + std::to_string(a) + " does not vanish at q = 0";
  }
  for (const auto& [ab, s] : P.quadratic) {
    auto [a, b] = ab;
    bool in_range = a < M.dim() && b < M.dim() && a <= b && M.deg(a) > 2 && M.deg(a) < 2 * M.k - 4 &&
                    M.deg(a) + M.deg(b) == 2 * M.k - 2;
    if (!in_range) bad = "quadratic index " + idx_name({a, b}) + " outside the allowed range";
    if (!vanish(s)) bad = "quadratic series " + idx_name({a, b}) + " does not vanish at q = 0";
  }
  rep.add("support", bad.empty(), bad);
  return rep;
}

// Structure series of T_j ._q T_a: entry c is d^3(phi_0 + phi_hbar)/dz_j dz_a dz_delta(c) for deg c = deg a + 2.
inline SVec quantum_product(const FrobeniusModule& M, const Potential& P, int j, std::size_t a) {
  if (j < 1 || j > M.r() || a >= M.dim()) throw std::out_of_range("quantum_product index out of range");
  auto delta = duality_involution(M.B);
  std::size_t n = M.dim();
  int D = P.order();
  ZPoly phi = P.as_zpoly();
  ZPoly dja = phi.partial(std::size_t(j), M.r()).partial(a, M.r());
  SVec out(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (M.deg(c) != M.deg(a) + 2) continue;
    Series s(Coeff(M.A[std::size_t(j - 1)](c, a)), M.r(), D);
    s += dja.partial(delta[c], M.r()).at_zero();
    out[c] = s;
  }
  return out;
}

// Matrix of T_j ._q (-).
inline SMat quantum_matrix(const FrobeniusModule& M, const Potential& P, int j) {
  std::size_t n = M.dim();
  SMat L(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    auto col = quantum_product(M, P, j, a);
    for (std::size_t c = 0; c < n; ++c) L(c, a) = col[c];
  }
  return L;
}

// Lowest q-degree with a nonzero entry, and that entry's position.
struct SeriesDefect {
  int order = -1;
  std::size_t row = 0, col = 0;
  bool found() const { return order >= 0; }
  std::string text() const {
    return found() ? "order " + std::to_string(order) + " at entry " + idx_name({row, col}) : "";
  }
};

inline SeriesDefect first_defect(const SMat& m) {
  SeriesDefect d;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      int v = m(i, j).valuation();
      if (v >= 0 && (!d.found() || v < d.order)) d = {v, i, j};
    }
  return d;
}

inline Report validate_quantum_potential(const FrobeniusModule& M, const Potential& P) {
  Report rep;
  rep.merge(check_potential_shape(M, P), "shape");
  if (!rep.ok()) return rep;
  std::size_t n = M.dim();
  SMat Bs = to_series(M.B);
  std::vector<SMat> L;
  for (int j = 1; j <= M.r(); ++j) L.push_back(quantum_matrix(M, P, j));
  for (int j = 1; j <= M.r(); ++j) {
    const SMat& Lj = L[std::size_t(j - 1)];
    std::string J = "j=" + std::to_string(j);
    bool unit = true;
    for (std::size_t c = 0; c < n; ++c)
      if (Lj(c, 0) != Series(c == std::size_t(j) ? 1 : 0)) unit = false;
    rep.add("unit." + J, unit);
    auto sym = first_defect(Bs * Lj - Lj.transpose() * Bs);
    rep.add("symmetric." + J, !sym.found(), sym.text());
    for (int l = j + 1; l <= M.r(); ++l) {
      auto com = first_defect(commutator(Lj, L[std::size_t(l - 1)]));
      rep.add("commute." + J + ",l=" + std::to_string(l), !com.found(), com.text());
    }
  }
  return rep;
}

// Polynomial in the framing variables: sorted multiset of indices 1..r -> coefficient.
using FramingPoly = std::map<std::vector<std::size_t>, Gauss>;

struct GenerationCertificate {
  bool generated = false;
  int deficient_degree = -1;
  std::vector<FramingPoly> preimages;  // P_a with P_a * e = T_a, when generated
};

inline Vec apply_monomial(const FrobeniusModule& M, const std::vector<std::size_t>& mono, Vec v) {
  for (auto j : mono) v = M.A[j - 1].apply(v);
  return v;
}

inline Vec apply_poly(const FrobeniusModule& M, const FramingPoly& P, const Vec& v) {
  Vec out(M.dim());
  for (const auto& [mono, c] : P) {
    Vec w = apply_monomial(M, mono, v);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] += c * w[i];
  }
  return out;
}

// Span of iterated A_j applied to e, degree by degree, with preimage polynomials.
inline GenerationCertificate is_generated_by_v2(const FrobeniusModule& M) {
  GenerationCertificate cert;
  std::size_t n = M.dim();
  std::vector<std::pair<Vec, std::vector<std::size_t>>> layer{{M.basis_vector(0), {}}};
  std::vector<std::pair<Vec, std::vector<std::size_t>>> all = layer;
  for (int p = 1; p <= M.k; ++p) {
    std::vector<std::pair<Vec, std::vector<std::size_t>>> next;
    std::vector<Vec> chosen;
    for (const auto& [v, mono] : layer)
      for (int j = 1; j <= M.r(); ++j) {
        Vec w = M.A[std::size_t(j - 1)].apply(v);
        auto trial = chosen;
        trial.push_back(w);
        if (Subspace::span(n, trial).dim() > chosen.size()) {
          chosen = std::move(trial);
          auto m2 = mono;
          m2.push_back(std::size_t(j));
          std::sort(m2.begin(), m2.end());
          next.emplace_back(w, m2);
        }
      }
    if (chosen.size() < M.dims[std::size_t(p)]) {
      cert.deficient_degree = 2 * p;
      return cert;
    }
    layer = next;
    all.insert(all.end(), next.begin(), next.end());
  }
  std::vector<Vec> cols;
  for (const auto& [v, mono] : all) cols.push_back(v);
  Mat S = Mat::from_columns(n, cols);
  for (std::size_t a = 0; a < n; ++a) {
    Vec x = coordinates(S, M.basis_vector(a));
    FramingPoly P;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!x[i].is_zero()) P[all[i].second] += x[i];
    cert.preimages.push_back(P);
  }
  cert.generated = true;
  return cert;
}

}  // namespace hodgefrob
