#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "hodgefrob/matrix.hpp"
#include "hodgefrob/report.hpp"

namespace hodgefrob {

// A complex vector space C^n whose standard basis is the distinguished real basis.
struct Space {
  std::size_t dim = 0;
  std::vector<std::string> labels;

  static Space with_labels(std::size_t n) {
    Space s{n, {}};
    for (std::size_t a = 0; a < n; ++a) s.labels.push_back("T" + std::to_string(a));
    return s;
  }
  bool valid() const { return labels.empty() || labels.size() == dim; }
};

struct AmbientMismatch : std::invalid_argument {
  AmbientMismatch() : std::invalid_argument("subspaces live in different ambient spaces") {}
};

// Subspace of C^n stored by its reduced echelon basis (rows), which is canonical.
class Subspace {
 public:
  Subspace() = default;
  explicit Subspace(std::size_t n) : n_(n), rows_(0, n) {}

  static Subspace zero(std::size_t n) { return Subspace(n); }
  static Subspace full(std::size_t n) {
    Subspace s(n);
    s.rows_ = Mat::identity(n);
    for (std::size_t i = 0; i < n; ++i) s.piv_.push_back(i);
    return s;
  }
  static Subspace span(std::size_t n, const std::vector<Vec>& vs) {
    Mat m(vs.size(), n);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (vs[i].size() != n) throw std::invalid_argument("vector length differs from ambient dimension");
      for (std::size_t j = 0; j < n; ++j) m(i, j) = vs[i][j];
    }
    return from_rows(std::move(m));
  }
  static Subspace from_columns(const Mat& cols) { return from_rows(cols.transpose()); }
  static Subspace from_rows(Mat m) {
    Subspace s(m.cols());
    auto piv = rref(m);
    Mat r(piv.size(), m.cols());
    for (std::size_t i = 0; i < piv.size(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
    s.rows_ = std::move(r);
    s.piv_ = std::move(piv);
    return s;
  }
  static Subspace coordinate(std::size_t n, const std::vector<std::size_t>& idx) {
    std::vector<Vec> vs;
    for (auto a : idx) {
      Vec v(n);
      v[a] = 1;
      vs.push_back(std::move(v));
    }
    return span(n, vs);
  }

  std::size_t ambient() const { return n_; }
  std::size_t dim() const { return rows_.rows(); }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == n_; }
  const Mat& rows() const { return rows_; }
  Mat columns() const { return rows_.transpose(); }
  std::vector<Vec> basis() const {
    std::vector<Vec> b;
    for (std::size_t i = 0; i < dim(); ++i) b.push_back(rows_.row(i));
    return b;
  }
  const std::vector<std::size_t>& pivots() const { return piv_; }

  bool contains(const Vec& v) const {
    Vec w = v;
    for (std::size_t i = 0; i < piv_.size(); ++i) {
      if (w[piv_[i]].is_zero()) continue;
      Gauss f = w[piv_[i]];
      for (std::size_t j = 0; j < n_; ++j)
        if (!rows_(i, j).is_zero()) w[j] -= f * rows_(i, j);
    }
    return is_zero_vec(w);
  }
  bool contains(const Subspace& o) const {
    if (o.n_ != n_) throw AmbientMismatch();
    for (std::size_t i = 0; i < o.dim(); ++i)
      if (!contains(o.rows_.row(i))) return false;
    return true;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) { return a.n_ == b.n_ && a.rows_ == b.rows_; }
  friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

 private:
  std::size_t n_ = 0;
  Mat rows_;
  std::vector<std::size_t> piv_;
};

inline void same_ambient(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw AmbientMismatch();
}

inline Subspace sum(const Subspace& a, const Subspace& b) {
  same_ambient(a, b);
  auto v = a.basis();
  auto w = b.basis();
  v.insert(v.end(), w.begin(), w.end());
  return Subspace::span(a.ambient(), v);
}

// {x : <row, x> = 0 for every basis row}, for the bilinear dot product.
inline Subspace annihilator(const Subspace& a) {
  if (a.dim() == 0) return Subspace::full(a.ambient());
  return Subspace::span(a.ambient(), kernel(a.rows()));
}

inline Subspace intersect(const Subspace& a, const Subspace& b) {
  same_ambient(a, b);
  if (a.is_zero() || b.is_zero()) return Subspace::zero(a.ambient());
  if (a.is_full()) return b;
  if (b.is_full()) return a;
  return annihilator(sum(annihilator(a), annihilator(b)));
}

inline Subspace conjugate(const Subspace& a) {
  auto b = a.basis();
  for (auto& v : b) v = vconj(v);
  return Subspace::span(a.ambient(), b);
}

inline Subspace image(const Mat& m, const Subspace& a) {
  std::vector<Vec> out;
  for (const auto& v : a.basis()) out.push_back(m.apply(v));
  return Subspace::span(m.rows(), out);
}

inline Subspace kernel_space(const Mat& m) { return Subspace::span(m.cols(), kernel(m)); }

inline Subspace image_space(const Mat& m) { return Subspace::from_columns(m); }

inline Subspace preimage(const Mat& m, const Subspace& target) {
  // x with m x in target: kernel of (projection away from target) composed with m.
  Subspace ann = annihilator(target);
  if (ann.dim() == 0) return Subspace::full(m.cols());
  return kernel_space(ann.rows() * m);
}

// Vectors of t whose classes form a basis of t/s (s must lie in t).
inline std::vector<Vec> quotient_lifts(const Subspace& t, const Subspace& s) {
  same_ambient(t, s);
  std::vector<Vec> cur = s.basis();
  std::vector<Vec> lifts;
  std::size_t d = s.dim();
  for (const auto& v : t.basis()) {
    auto trial = cur;
    trial.push_back(v);
    if (Subspace::span(t.ambient(), trial).dim() > d) {
      cur = std::move(trial);
      ++d;
      lifts.push_back(v);
    }
  }
  return lifts;
}

// Coordinates of v in the basis cols (v must lie in their span).
inline Vec coordinates(const Mat& cols, const Vec& v) {
  auto x = solve(cols, v);
  if (!x) throw std::invalid_argument("vector outside the given span");
  return *x;
}

// Decreasing filtration F^p of C^n: F^p = V for p <= p_min, F^p = 0 for p > p_max.
class DecFiltration {
 public:
  DecFiltration() = default;
  // pieces[i] is F^{lo + i}; indices below lo read as V and above the range as 0.
  DecFiltration(std::size_t n, int lo, std::vector<Subspace> pieces) : n_(n), lo_(lo), pieces_(std::move(pieces)) {
    normalize();
  }
  static DecFiltration from_map(std::size_t n, const std::map<int, Subspace>& m) {
    if (m.empty()) return DecFiltration(n, 0, {});
    int lo = m.begin()->first, hi = m.rbegin()->first;
    std::vector<Subspace> p;
    Subspace last = Subspace::full(n);
    for (int k = lo; k <= hi; ++k) {
      auto it = m.find(k);
      if (it != m.end()) last = it->second;
      p.push_back(last);
    }
    return DecFiltration(n, lo, p);
  }
  static DecFiltration trivial(std::size_t n, int p) {
    return DecFiltration(n, p, {Subspace::full(n)});
  }

  std::size_t ambient() const { return n_; }
  int p_min() const { return lo_; }
  int p_max() const { return lo_ + int(pieces_.size()) - 1; }

  Subspace operator[](int p) const {
    if (p < lo_) return Subspace::full(n_);
    if (p > p_max()) return Subspace::zero(n_);
    return pieces_[std::size_t(p - lo_)];
  }

  bool nested() const {
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
      if (!pieces_[i].contains(pieces_[i + 1])) return false;
    return true;
  }

  friend bool operator==(const DecFiltration& a, const DecFiltration& b) {
    return a.n_ == b.n_ && a.lo_ == b.lo_ && a.pieces_ == b.pieces_;
  }
  friend bool operator!=(const DecFiltration& a, const DecFiltration& b) { return !(a == b); }

 private:
  void normalize() {
    for (auto& s : pieces_)
      if (s.ambient() != n_) throw AmbientMismatch();
    if (n_ == 0) {
      pieces_.clear();
      lo_ = 0;
      return;
    }
    while (!pieces_.empty() && pieces_.back().is_zero()) pieces_.pop_back();
    if (pieces_.empty() || !pieces_.front().is_full()) {
      pieces_.insert(pieces_.begin(), Subspace::full(n_));
      --lo_;
    }
    while (pieces_.size() > 1 && pieces_[1].is_full()) {
      pieces_.erase(pieces_.begin());
      ++lo_;
    }
  }

  std::size_t n_ = 0;
  int lo_ = 0;
  std::vector<Subspace> pieces_;
};

// Increasing filtration Psi_q of C^n: Psi_q = 0 for q < q_min, Psi_q = V for q >= q_max.
class IncFiltration {
 public:
  IncFiltration() = default;
  // pieces[i] is Psi_{lo + i}; indices below lo read as 0 and above the range as V.
  IncFiltration(std::size_t n, int lo, std::vector<Subspace> pieces) : n_(n), lo_(lo), pieces_(std::move(pieces)) {
    normalize();
  }
  static IncFiltration from_map(std::size_t n, const std::map<int, Subspace>& m) {
    if (m.empty()) return IncFiltration(n, 0, {});
    int lo = m.begin()->first, hi = m.rbegin()->first;
    std::vector<Subspace> p;
    Subspace last = Subspace::zero(n);
    for (int k = lo; k <= hi; ++k) {
      auto it = m.find(k);
      if (it != m.end()) last = it->second;
      p.push_back(last);
    }
    return IncFiltration(n, lo, p);
  }
  // Single jump: Psi_{q-1} = 0, Psi_q = V.
  static IncFiltration trivial(std::size_t n, int q) { return IncFiltration(n, q, {Subspace::full(n)}); }

  std::size_t ambient() const { return n_; }
  int q_min() const { return lo_; }
  int q_max() const { return lo_ + int(pieces_.size()) - 1; }

  Subspace operator[](int q) const {
    if (q < lo_) return Subspace::zero(n_);
    if (q > q_max()) return Subspace::full(n_);
    return pieces_[std::size_t(q - lo_)];
  }

  bool nested() const {
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
      if (!pieces_[i + 1].contains(pieces_[i])) return false;
    return true;
  }

  friend bool operator==(const IncFiltration& a, const IncFiltration& b) {
    return a.n_ == b.n_ && a.lo_ == b.lo_ && a.pieces_ == b.pieces_;
  }
  friend bool operator!=(const IncFiltration& a, const IncFiltration& b) { return !(a == b); }

 private:
  void normalize() {
    for (auto& s : pieces_)
      if (s.ambient() != n_) throw AmbientMismatch();
    if (n_ == 0) {
      pieces_.clear();
      lo_ = 0;
      return;
    }
    while (!pieces_.empty() && pieces_.front().is_zero()) {
      pieces_.erase(pieces_.begin());
      ++lo_;
    }
    if (pieces_.empty() || !pieces_.back().is_full()) pieces_.push_back(Subspace::full(n_));
    while (pieces_.size() > 1 && pieces_[pieces_.size() - 2].is_full()) pieces_.pop_back();
  }

  std::size_t n_ = 0;
  int lo_ = 0;
  std::vector<Subspace> pieces_;
};

inline DecFiltration conjugate(const DecFiltration& f) {
  std::vector<Subspace> p;
  for (int k = f.p_min(); k <= f.p_max(); ++k) p.push_back(conjugate(f[k]));
  return DecFiltration(f.ambient(), f.p_min(), p);
}

inline IncFiltration conjugate(const IncFiltration& f) {
  std::vector<Subspace> p;
  for (int k = f.q_min(); k <= f.q_max(); ++k) p.push_back(conjugate(f[k]));
  return IncFiltration(f.ambient(), f.q_min(), p);
}

// Image of a filtration under an invertible map g.
inline DecFiltration transform(const Mat& g, const DecFiltration& f) {
  std::vector<Subspace> p;
  for (int k = f.p_min(); k <= f.p_max(); ++k) p.push_back(image(g, f[k]));
  return DecFiltration(f.ambient(), f.p_min(), p);
}

inline IncFiltration transform(const Mat& g, const IncFiltration& f) {
  std::vector<Subspace> p;
  for (int k = f.q_min(); k <= f.q_max(); ++k) p.push_back(image(g, f[k]));
  return IncFiltration(f.ambient(), f.q_min(), p);
}

// V = F^p (+) Psi_{p-1} for every p, tested as a rank condition on [basis F^p | basis Psi_{p-1}].
inline Report is_opposite(const DecFiltration& f, const IncFiltration& psi) {
  Report rep;
  if (f.ambient() != psi.ambient()) throw AmbientMismatch();
  std::size_t n = f.ambient();
  int lo = std::min(f.p_min(), psi.q_min() + 1) - 1;
  int hi = std::max(f.p_max(), psi.q_max()) + 2;
  std::vector<int> bad;
  for (int p = lo; p <= hi; ++p) {
    Subspace a = f[p], b = psi[p - 1];
    bool good = a.dim() + b.dim() == n && (n == 0 || rank(hstack(a.columns(), b.columns())) == n);
    if (!good) bad.push_back(p);
  }
  std::string detail;
  for (int p : bad) detail += (detail.empty() ? "failing p = " : ", ") + std::to_string(p);
  rep.add("opposite", bad.empty(), detail);
  return rep;
}

inline IncFiltration opposed_increasing(const DecFiltration& g, int k) {
  std::vector<Subspace> p;
  for (int q = k - g.p_max() - 1; q <= k - g.p_min(); ++q) p.push_back(g[k - q]);
  return IncFiltration(g.ambient(), k - g.p_max() - 1, p);
}

// F and G are k-opposed iff F is opposite to Psi_q := G^{k-q}.
inline Report is_k_opposed(const DecFiltration& f, const DecFiltration& g, int k) {
  return is_opposite(f, opposed_increasing(g, k));
}

// (A*B)_q = sum_k A_{q-k} cap B_k.
inline IncFiltration convolve(const IncFiltration& a, const IncFiltration& b) {
  if (a.ambient() != b.ambient()) throw AmbientMismatch();
  std::size_t n = a.ambient();
  int lo = a.q_min() + b.q_min(), hi = a.q_max() + b.q_max();
  std::vector<Subspace> p;
  for (int q = lo; q <= hi; ++q) {
    Subspace s = Subspace::zero(n);
    for (int k = b.q_min(); k <= b.q_max(); ++k) s = sum(s, intersect(a[q - k], b[k]));
    p.push_back(s);
  }
  return IncFiltration(n, lo, p);
}

// F^vee_r = F^{-r}.
inline IncFiltration dual(const DecFiltration& f) {
  std::vector<Subspace> p;
  for (int r = -f.p_max(); r <= -f.p_min(); ++r) p.push_back(f[-r]);
  return IncFiltration(f.ambient(), -f.p_max(), p);
}

inline DecFiltration dual(const IncFiltration& f) {
  std::vector<Subspace> p;
  for (int r = -f.q_max(); r <= -f.q_min(); ++r) p.push_back(f[-r]);
  return DecFiltration(f.ambient(), -f.q_max(), p);
}

// Induced filtration on Gr^W_k = W_k / W_{k-1} in the coordinates of the chosen lifts.
struct GradedPiece {
  int k = 0;
  Mat lifts;  // n x d, columns lift a basis of the quotient
  DecFiltration F;
};

inline Vec quotient_coordinates(const Mat& lifts, const Subspace& below, const Vec& v) {
  Mat m = hstack(lifts, below.columns());
  Vec x = coordinates(m, v);
  return Vec(x.begin(), x.begin() + long(lifts.cols()));
}

inline GradedPiece graded_filtration(const DecFiltration& f, const IncFiltration& w, int k) {
  if (f.ambient() != w.ambient()) throw AmbientMismatch();
  std::size_t n = f.ambient();
  Subspace wk = w[k], wk1 = w[k - 1];
  auto lift_vecs = quotient_lifts(wk, wk1);
  std::size_t d = lift_vecs.size();
  Mat lifts = Mat::from_columns(n, lift_vecs);
  std::vector<Subspace> pieces;
  for (int p = f.p_min(); p <= f.p_max(); ++p) {
    std::vector<Vec> img;
    for (const auto& v : intersect(f[p], wk).basis()) img.push_back(quotient_coordinates(lifts, wk1, v));
    pieces.push_back(Subspace::span(d, img));
  }
  return {k, lifts, DecFiltration(d, f.p_min(), pieces)};
}

}  // namespace hodgefrob
