#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hodgefrob {

using Rational = mpq_class;
using cplx = std::complex<double>;

inline bool is_zero(const cplx& c) { return c == cplx(0); }

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rational parse_rational(const std::string& s) {
  if (s.empty()) throw ParseError("empty rational");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool seen_slash = false, digit = false;
  for (std::size_t k = i; k < s.size(); ++k) {
    char c = s[k];
    if (c == '/') {
      if (seen_slash || !digit) throw ParseError("bad rational '" + s + "'");
      seen_slash = true;
      digit = false;
    } else if (c >= '0' && c <= '9') {
      digit = true;
    } else {
      throw ParseError("bad rational '" + s + "'");
    }
  }
  if (!digit) throw ParseError("bad rational '" + s + "'");
  std::string body = s[0] == '+' ? s.substr(1) : s;
  Rational r;
  if (r.set_str(body, 10) != 0) throw ParseError("bad rational '" + s + "'");
  if (sgn(r.get_den()) == 0) throw ParseError("zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

// Gaussian rational re + im*i.
struct Gauss {
  Rational re, im;

  Gauss() = default;
  Gauss(long v) : re(v), im(0) {}
  Gauss(int v) : re(v), im(0) {}
  Gauss(Rational r) : re(std::move(r)), im(0) { re.canonicalize(); }
  Gauss(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {
    re.canonicalize();
    im.canonicalize();
  }

  static Gauss i() { return Gauss(Rational(0), Rational(1)); }

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  bool is_real() const { return sgn(im) == 0; }
  bool is_one() const { return sgn(im) == 0 && re == 1; }
  Gauss conj() const { return Gauss(re, -im); }
  Rational norm2() const { return re * re + im * im; }

  Gauss inv() const {
    if (is_zero()) throw std::domain_error("division by zero");
    Rational n = norm2();
    return Gauss(re / n, -im / n);
  }

  Gauss& operator+=(const Gauss& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Gauss& operator-=(const Gauss& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Gauss& operator*=(const Gauss& o) {
    if (sgn(im) == 0 && sgn(o.im) == 0) {
      re *= o.re;
      return *this;
    }
    Rational r = re * o.re - im * o.im;
    Rational m = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(m);
    return *this;
  }
  Gauss& operator/=(const Gauss& o) { return *this *= o.inv(); }

  friend Gauss operator+(Gauss a, const Gauss& b) { return a += b; }
  friend Gauss operator-(Gauss a, const Gauss& b) { return a -= b; }
  friend Gauss operator*(Gauss a, const Gauss& b) { return a *= b; }
  friend Gauss operator/(Gauss a, const Gauss& b) { return a /= b; }
  Gauss operator-() const { return Gauss(-re, -im); }
  friend bool operator==(const Gauss& a, const Gauss& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const Gauss& a, const Gauss& b) { return !(a == b); }

  cplx to_complex() const { return {re.get_d(), im.get_d()}; }
};

inline bool is_zero(const Gauss& g) { return g.is_zero(); }
inline Gauss conj(const Gauss& g) { return g.conj(); }

inline std::string to_string(const Gauss& g) {
  if (sgn(g.im) == 0) return g.re.get_str();
  std::string im = abs(g.im) == 1 ? std::string() : Rational(abs(g.im)).get_str() + "*";
  std::string sign = sgn(g.im) < 0 ? "-" : "+";
  if (sgn(g.re) == 0) return (sgn(g.im) < 0 ? "-" : "") + im + "i";
  return g.re.get_str() + sign + im + "i";
}

inline std::ostream& operator<<(std::ostream& os, const Gauss& g) { return os << to_string(g); }

// Accepts "p/q", "p/q+r/s*i", "r/s*i", "i", "-i", "3i".
inline Gauss parse_gauss(std::string s) {
  std::string t;
  for (char c : s)
    if (c != ' ') t += c;
  if (t.empty()) throw ParseError("empty scalar");
  if (t.back() != 'i') return Gauss(parse_rational(t));
  t.pop_back();
  if (!t.empty() && t.back() == '*') t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != '/') {
      split = k;
      break;
    }
  }
  std::string re_s = split == std::string::npos ? "" : t.substr(0, split);
  std::string im_s = split == std::string::npos ? t : t.substr(split);
  Rational im;
  if (im_s.empty() || im_s == "+")
    im = 1;
  else if (im_s == "-")
    im = -1;
  else
    im = parse_rational(im_s);
  Rational re = re_s.empty() ? Rational(0) : parse_rational(re_s);
  return Gauss(re, im);
}

// Laurent polynomial in the formal unit tau (standing for 2*pi*i) over Gaussian rationals.
class Coeff {
 public:
  using Term = std::pair<int, Gauss>;

  Coeff() = default;
  Coeff(long v) {
    if (v != 0) t_.emplace_back(0, Gauss(v));
  }
  Coeff(int v) : Coeff(long(v)) {}
  Coeff(const Gauss& g, int tau_pow = 0) {
    if (!g.is_zero()) t_.emplace_back(tau_pow, g);
  }
  Coeff(const Rational& r) : Coeff(Gauss(r)) {}

  static Coeff tau(int n = 1) { return Coeff(Gauss(1), n); }

  const std::vector<Term>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  bool is_unit() const { return t_.size() == 1; }
  bool is_tau_free() const { return t_.empty() || (t_.size() == 1 && t_[0].first == 0); }

  Gauss at(int n) const {
    for (const auto& [e, c] : t_)
      if (e == n) return c;
    return Gauss();
  }
  // Value when tau-free; throws otherwise.
  Gauss scalar() const {
    if (!is_tau_free()) throw std::domain_error("coefficient carries tau powers");
    return t_.empty() ? Gauss() : t_[0].second;
  }

  Coeff& operator+=(const Coeff& o) { return merge(o, false); }
  Coeff& operator-=(const Coeff& o) { return merge(o, true); }
  Coeff operator-() const {
    Coeff r = *this;
    for (auto& [e, c] : r.t_) c = -c;
    return r;
  }
  friend Coeff operator+(Coeff a, const Coeff& b) { return a += b; }
  friend Coeff operator-(Coeff a, const Coeff& b) { return a -= b; }

  friend Coeff operator*(const Coeff& a, const Coeff& b) {
    Coeff r;
    if (a.t_.empty() || b.t_.empty()) return r;
    if (a.t_.size() == 1 && b.t_.size() == 1) {
      Gauss g = a.t_[0].second * b.t_[0].second;
      r.t_.emplace_back(a.t_[0].first + b.t_[0].first, std::move(g));
      return r;
    }
    for (const auto& [ea, ca] : a.t_) {
      Coeff part;
      for (const auto& [eb, cb] : b.t_) part.t_.emplace_back(ea + eb, ca * cb);
      r += part;
    }
    return r;
  }
  Coeff& operator*=(const Coeff& o) { return *this = *this * o; }

  Coeff& scale(const Gauss& g) {
    if (g.is_zero()) {
      t_.clear();
      return *this;
    }
    for (auto& [e, c] : t_) c *= g;
    return *this;
  }
  Coeff scaled(const Gauss& g) const {
    Coeff r = *this;
    return r.scale(g);
  }
  // Multiply by tau^n.
  Coeff shifted(int n) const {
    Coeff r = *this;
    for (auto& [e, c] : r.t_) e += n;
    return r;
  }

  // conj(i) = -i and conj(tau) = -tau.
  Coeff conj() const {
    Coeff r = *this;
    for (auto& [e, c] : r.t_) {
      c = c.conj();
      if (e % 2 != 0) c = -c;
    }
    return r;
  }

  Coeff inv() const {
    if (!is_unit()) throw std::domain_error("coefficient is not a unit of K[tau, 1/tau]");
    return Coeff(t_[0].second.inv(), -t_[0].first);
  }

  cplx eval() const {
    cplx v = 0;
    for (const auto& [e, c] : t_) v += c.to_complex() * std::pow(cplx(0, kTwoPi), e);
    return v;
  }

  friend bool operator==(const Coeff& a, const Coeff& b) { return a.t_ == b.t_; }
  friend bool operator!=(const Coeff& a, const Coeff& b) { return !(a == b); }

 private:
  Coeff& merge(const Coeff& o, bool neg) {
    if (o.t_.empty()) return *this;
    std::vector<Term> out;
    out.reserve(t_.size() + o.t_.size());
    std::size_t i = 0, j = 0;
    while (i < t_.size() || j < o.t_.size()) {
      if (j == o.t_.size() || (i < t_.size() && t_[i].first < o.t_[j].first)) {
        out.push_back(std::move(t_[i++]));
      } else if (i == t_.size() || o.t_[j].first < t_[i].first) {
        out.emplace_back(o.t_[j].first, neg ? -o.t_[j].second : o.t_[j].second);
        ++j;
      } else {
        Gauss s = neg ? t_[i].second - o.t_[j].second : t_[i].second + o.t_[j].second;
        if (!s.is_zero()) out.emplace_back(t_[i].first, std::move(s));
        ++i;
        ++j;
      }
    }
    t_ = std::move(out);
    return *this;
  }

  std::vector<Term> t_;
};

inline bool is_zero(const Coeff& c) { return c.is_zero(); }
inline Coeff conj(const Coeff& c) { return c.conj(); }

inline std::string to_string(const Coeff& c) {
  if (c.is_zero()) return "0";
  std::string s;
  for (const auto& [e, g] : c.terms()) {
    if (!s.empty()) s += " + ";
    std::string gs = to_string(g);
    if (e == 0)
      s += gs;
    else
      s += "(" + gs + ")*tau^" + std::to_string(e);
  }
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const Coeff& c) { return os << to_string(c); }

}  // namespace hodgefrob
