#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hodgefrob/matrix.hpp"

namespace hodgefrob {

inline constexpr int kMaxVars = 4;
inline constexpr int kNoTrunc = 255;

// Truncation order for q-series: HODGEFROB_ORDER if set, else 6.
inline int default_order() {
  if (const char* s = std::getenv("HODGEFROB_ORDER")) {
    int d = std::atoi(s);
    if (d >= 0 && d < kNoTrunc) return d;
  }
  return 6;
}

// Monomial q^m l^e packed into 64 bits: byte j holds m_j, byte 4+j holds e_j.
namespace mono {
inline int q(std::uint64_t k, int j) { return int((k >> (8 * j)) & 0xff); }
inline int l(std::uint64_t k, int j) { return int((k >> (32 + 8 * j)) & 0xff); }
inline int qdeg(std::uint64_t k) { return q(k, 0) + q(k, 1) + q(k, 2) + q(k, 3); }
inline int ldeg(std::uint64_t k) { return l(k, 0) + l(k, 1) + l(k, 2) + l(k, 3); }
inline std::uint64_t qvar(int j, int e = 1) { return std::uint64_t(e) << (8 * j); }
inline std::uint64_t lvar(int j, int e = 1) { return std::uint64_t(e) << (32 + 8 * j); }
inline std::uint64_t make(const std::vector<int>& qe, const std::vector<int>& le = {}) {
  if (qe.size() > kMaxVars || le.size() > kMaxVars) throw std::invalid_argument("too many series variables");
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < qe.size(); ++j) {
    if (qe[j] < 0 || qe[j] > 255) throw std::invalid_argument("exponent out of range");
    k |= qvar(int(j), qe[j]);
  }
  for (std::size_t j = 0; j < le.size(); ++j) {
    if (le[j] < 0 || le[j] > 255) throw std::invalid_argument("exponent out of range");
    k |= lvar(int(j), le[j]);
  }
  return k;
}
inline std::vector<int> qexps(std::uint64_t k, int r) {
  std::vector<int> v(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) v[std::size_t(j)] = q(k, j);
  return v;
}
inline std::vector<int> lexps(std::uint64_t k, int r) {
  std::vector<int> v(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) v[std::size_t(j)] = l(k, j);
  return v;
}
inline constexpr std::uint64_t kQMask = 0xffffffffULL;
}  // namespace mono

// Power series in q_1..q_r truncated at total q-degree D, with coefficients in K[tau, 1/tau],
// optionally polynomial in log symbols l_j (l_j stands for z_j with q_j = exp(tau l_j)).
class Series {
 public:
  Series() = default;
  Series(long c) {
    if (c != 0) t_.emplace(0, Coeff(c));
  }
  Series(int c) : Series(long(c)) {}
  Series(const Coeff& c, int r = 0, int D = kNoTrunc) : r_(r), D_(D) {
    if (!c.is_zero()) t_.emplace(0, c);
  }
  Series(const Gauss& g) : Series(Coeff(g)) {}

  static Series zero(int r, int D) { return Series(Coeff(), r, D); }
  static Series q(int j, int r, int D) { return monomial(mono::qvar(j), Coeff(1), r, D); }
  static Series ell(int j, int r, int D) { return monomial(mono::lvar(j), Coeff(1), r, D); }
  static Series monomial(std::uint64_t key, const Coeff& c, int r, int D) {
    Series s = zero(r, D);
    if (mono::qdeg(key) <= D && !c.is_zero()) s.t_.emplace(key, c);
    return s;
  }

  int nvars() const { return r_; }
  int order() const { return D_; }
  const std::map<std::uint64_t, Coeff>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  bool has_log() const {
    for (const auto& [k, c] : t_)
      if (mono::ldeg(k) > 0) return true;
    return false;
  }

  Coeff coeff(std::uint64_t key) const {
    auto it = t_.find(key);
    return it == t_.end() ? Coeff() : it->second;
  }
  Coeff constant_term() const { return coeff(0); }
  // Lowest total q-degree among nonzero terms (-1 for zero).
  int valuation() const {
    int v = -1;
    for (const auto& [k, c] : t_) {
      int d = mono::qdeg(k);
      if (v < 0 || d < v) v = d;
    }
    return v;
  }

  Series with_order(int D) const {
    Series s = *this;
    s.D_ = std::min(D, D_);
    for (auto it = s.t_.begin(); it != s.t_.end();)
      it = mono::qdeg(it->first) > s.D_ ? s.t_.erase(it) : std::next(it);
    return s;
  }
  Series with_vars(int r) const {
    Series s = *this;
    s.r_ = std::max(r_, r);
    return s;
  }

  void add_term(std::uint64_t key, const Coeff& c) {
    if (c.is_zero() || mono::qdeg(key) > D_) return;
    auto [it, fresh] = t_.emplace(key, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) t_.erase(it);
    }
  }

  Series& operator+=(const Series& o) {
    combine_meta(o);
    for (const auto& [k, c] : o.t_) add_term(k, c);
    trim();
    return *this;
  }
  Series& operator-=(const Series& o) {
    combine_meta(o);
    for (const auto& [k, c] : o.t_) add_term(k, -c);
    trim();
    return *this;
  }
  Series operator-() const {
    Series s = *this;
    for (auto& [k, c] : s.t_) c = -c;
    return s;
  }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }

  friend Series operator*(const Series& a, const Series& b) {
    Series s;
    s.r_ = std::max(a.r_, b.r_);
    s.D_ = std::min(a.D_, b.D_);
    if (a.t_.empty() || b.t_.empty()) return s;
    for (const auto& [ka, ca] : a.t_) {
      int da = mono::qdeg(ka);
      if (da > s.D_) continue;
      for (const auto& [kb, cb] : b.t_) {
        if (da + mono::qdeg(kb) > s.D_) continue;
        s.add_term(ka + kb, ca * cb);
      }
    }
    return s;
  }
  Series& operator*=(const Series& o) { return *this = *this * o; }
  Series& operator*=(const Coeff& c) {
    if (c.is_zero()) {
      t_.clear();
      return *this;
    }
    for (auto& [k, v] : t_) v = v * c;
    return *this;
  }
  Series& operator*=(const Gauss& g) {
    if (g.is_zero()) {
      t_.clear();
      return *this;
    }
    for (auto& [k, v] : t_) v.scale(g);
    return *this;
  }
  friend Series operator*(Series a, const Coeff& c) { return a *= c; }
  friend Series operator*(const Coeff& c, Series a) { return a *= c; }

  // Multiply by tau^n.
  Series tau_shift(int n) const {
    Series s = *this;
    for (auto& [k, v] : s.t_) v = v.shifted(n);
    return s;
  }

  // q_j d/dq_j.
  Series euler(int j) const {
    Series s = zero(r_, D_);
    for (const auto& [k, c] : t_) {
      int e = mono::q(k, j);
      if (e) s.t_.emplace(k, c.scaled(Gauss(long(e))));
    }
    return s;
  }
  Series derive_ell(int j) const {
    Series s = zero(r_, D_);
    for (const auto& [k, c] : t_) {
      int e = mono::l(k, j);
      if (e) s.t_.emplace(k - mono::lvar(j), c.scaled(Gauss(long(e))));
    }
    return s;
  }
  // d/dz_j = d/dl_j + tau q_j d/dq_j.
  Series derive_z(int j) const { return derive_ell(j) + euler(j).tau_shift(1); }

  // Drop every term containing a log symbol.
  Series log_free_part() const {
    Series s = zero(r_, D_);
    for (const auto& [k, c] : t_)
      if (mono::ldeg(k) == 0) s.t_.emplace(k, c);
    return s;
  }
  // Coefficient of l^e as a q-series.
  Series log_coefficient(std::uint64_t lkey) const {
    Series s = zero(r_, D_);
    for (const auto& [k, c] : t_)
      if ((k & ~mono::kQMask) == lkey) s.t_.emplace(k & mono::kQMask, c);
    return s;
  }

  Series conj() const {
    Series s = *this;
    for (auto& [k, c] : s.t_) c = c.conj();
    return s;
  }

  cplx evaluate(const std::vector<cplx>& q, const std::vector<cplx>& l = {}) const {
    cplx v = 0;
    for (const auto& [k, c] : t_) {
      cplx m = c.eval();
      for (int j = 0; j < kMaxVars; ++j) {
        int e = mono::q(k, j);
        if (e) m *= std::pow(q.at(std::size_t(j)), e);
        int f = mono::l(k, j);
        if (f) m *= std::pow(l.at(std::size_t(j)), f);
      }
      v += m;
    }
    return v;
  }

  // Value at q = 0 (and l = 0).
  Coeff at_origin() const { return constant_term(); }

  friend bool operator==(const Series& a, const Series& b) { return a.t_ == b.t_; }
  friend bool operator!=(const Series& a, const Series& b) { return !(a == b); }

 private:
  void combine_meta(const Series& o) {
    r_ = std::max(r_, o.r_);
    D_ = std::min(D_, o.D_);
  }
  void trim() {
    for (auto it = t_.begin(); it != t_.end();)
      it = mono::qdeg(it->first) > D_ ? t_.erase(it) : std::next(it);
  }

  int r_ = 0;
  int D_ = kNoTrunc;
  std::map<std::uint64_t, Coeff> t_;
};

using QSeries = Series;
using LogSeries = Series;
using SMat = Matrix<Series>;
using SVec = std::vector<Series>;

inline bool is_zero(const Series& s) { return s.is_zero(); }

inline std::string to_string(const Series& s) {
  if (s.is_zero()) return "0";
  std::string out;
  for (const auto& [k, c] : s.terms()) {
    if (!out.empty()) out += " + ";
    out += "(" + to_string(c) + ")";
    for (int j = 0; j < kMaxVars; ++j) {
      if (int e = mono::q(k, j)) out += "*q" + std::to_string(j + 1) + (e > 1 ? "^" + std::to_string(e) : "");
      if (int e = mono::l(k, j)) out += "*l" + std::to_string(j + 1) + (e > 1 ? "^" + std::to_string(e) : "");
    }
  }
  return out;
}

// Inverse of a series whose q-degree-0 part is a unit constant.
inline Series series_inverse(const Series& s) {
  Coeff c0 = s.constant_term();
  for (const auto& [k, c] : s.terms())
    if (k != 0 && mono::qdeg(k) == 0) throw std::domain_error("series with log terms at q = 0 is not invertible");
  if (!c0.is_unit()) throw std::domain_error("constant term is not a unit");
  Coeff inv = c0.inv();
  Series x = s * inv - Series(1);
  Series acc(1), pw(1);
  int D = s.order();
  for (int k = 1; k <= std::min(D, kNoTrunc - 1); ++k) {
    pw = pw * x;
    if (pw.is_zero()) break;
    if (k % 2) acc -= pw; else acc += pw;
  }
  return (acc * inv).with_order(D);
}

// exp(x) for a series with no q-degree-0 part.
inline Series series_exp(const Series& x) {
  if (x.valuation() == 0) throw std::domain_error("series_exp needs zero constant part");
  Series acc(1), pw(1);
  Rational fact = 1;
  for (int k = 1; k <= x.order(); ++k) {
    pw = pw * x;
    if (pw.is_zero()) break;
    fact *= k;
    Series t = pw;
    t *= Gauss(Rational(1) / fact);
    acc += t;
  }
  return acc.with_order(x.order()).with_vars(x.nvars());
}

// log(u) for a series with u(0) = 1 and no other q-degree-0 terms.
inline Series series_log(const Series& u) {
  Series x = u - Series(1);
  if (x.valuation() == 0) throw std::domain_error("series_log needs u(0) = 1");
  Series acc = Series::zero(u.nvars(), u.order()), pw(1);
  for (int k = 1; k <= u.order(); ++k) {
    pw = pw * x;
    if (pw.is_zero()) break;
    Series t = pw;
    t *= Gauss(Rational(k % 2 ? 1 : -1, k));
    acc += t;
  }
  return acc;
}

// Substitution q_j -> u_j(q) into a log-free series; each u_j must have no constant term.
inline Series compose(const Series& f, const std::vector<Series>& u) {
  if (f.has_log()) throw std::invalid_argument("compose expects a log-free series");
  int r = int(u.size());
  int D = f.order();
  for (const auto& x : u) {
    if (x.valuation() == 0) throw std::invalid_argument("substituted series must vanish at q = 0");
    D = std::min(D, x.order());
  }
  std::vector<std::vector<Series>> pw(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    pw[j].push_back(Series(1));
    for (int e = 1; e <= D; ++e) pw[j].push_back(pw[j].back() * u[j]);
  }
  Series out = Series::zero(std::max(r, f.nvars()), D);
  for (const auto& [k, c] : f.terms()) {
    if (mono::qdeg(k) > D) continue;
    Series t(c, r, D);
    for (int j = 0; j < kMaxVars; ++j) {
      int e = mono::q(k, j);
      if (e == 0) continue;
      if (j >= r) throw std::invalid_argument("substitution misses a variable");
      t = t * pw[std::size_t(j)][std::size_t(e)];
    }
    out += t;
  }
  return out;
}

inline SMat to_series(const Mat& m, int r = 0, int D = kNoTrunc) {
  return m.map([&](const Gauss& g) { return Series(Coeff(g), r, D); });
}

inline SMat series_identity(std::size_t n, int r = 0, int D = kNoTrunc) { return to_series(Mat::identity(n), r, D); }

inline SMat with_order(const SMat& m, int D) {
  return m.map([&](const Series& s) { return s.with_order(D); });
}

inline SMat derive_z(const SMat& m, int j) {
  return m.map([&](const Series& s) { return s.derive_z(j); });
}
inline SMat euler(const SMat& m, int j) {
  return m.map([&](const Series& s) { return s.euler(j); });
}

// Coefficient matrix of one monomial key.
inline Matrix<Coeff> coefficient(const SMat& m, std::uint64_t key) {
  return m.map([&](const Series& s) { return s.coeff(key); });
}

// Value at q = 0 for matrices whose constant terms are tau-free.
inline Mat constant_matrix(const SMat& m) {
  return m.map([](const Series& s) { return s.constant_term().scalar(); });
}

inline Matrix<cplx> evaluate(const SMat& m, const std::vector<cplx>& q, const std::vector<cplx>& l = {}) {
  return m.map([&](const Series& s) { return s.evaluate(q, l); });
}

inline int matrix_order(const SMat& m) {
  int D = kNoTrunc;
  for (const auto& s : m.data()) D = std::min(D, s.order());
  return D;
}

// exp of a nilpotent series matrix (A^n = 0 is verified).
inline SMat exp_nilpotent(const SMat& a) {
  std::size_t n = a.rows();
  SMat acc = series_identity(n), pw = series_identity(n);
  Rational fact = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    pw = pw * a;
    if (pw.is_zero()) return acc;
    if (k == n) break;
    fact *= long(k);
    acc += scaled(pw, Gauss(Rational(1) / fact));
  }
  throw NotNilpotent("exp_nilpotent: matrix is not nilpotent");
}

// log of a unipotent series matrix ((U - I)^n = 0 is verified).
inline SMat log_unipotent(const SMat& u) {
  std::size_t n = u.rows();
  SMat x = u - series_identity(n);
  SMat acc(n, n), pw = series_identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    pw = pw * x;
    if (pw.is_zero()) return acc;
    if (k == n) break;
    acc += scaled(pw, Gauss(Rational(k % 2 ? 1 : -1, long(k))));
  }
  throw NotNilpotent("log_unipotent: matrix is not unipotent");
}

// Inverse of a series matrix whose constant part is I + nilpotent-free invertible; uses
// the Neumann series around the constant term, which must be a Gaussian-rational matrix.
inline SMat series_matrix_inverse(const SMat& m) {
  std::size_t n = m.rows();
  Mat c0 = constant_matrix(m);
  auto c0inv = inverse(c0);
  if (!c0inv) throw std::domain_error("constant term of series matrix is singular");
  SMat ci = to_series(*c0inv);
  SMat x = series_identity(n) - ci * m;  // no q-degree-0 part
  int D = matrix_order(m);
  SMat acc = series_identity(n), pw = series_identity(n);
  for (int k = 1; k <= D; ++k) {
    pw = with_order(pw * x, D);
    if (pw.is_zero()) break;
    acc += pw;
  }
  return with_order(acc * ci, D);
}

}  // namespace hodgefrob
