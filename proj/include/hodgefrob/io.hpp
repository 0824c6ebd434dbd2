#pragma once

#include <json.hpp>
#include <set>
#include <sstream>
#include <string>

#include "hodgefrob/degeneration.hpp"
#include "hodgefrob/frobmod.hpp"
#include "hodgefrob/hodge.hpp"

namespace hodgefrob::io {

using json = nlohmann::json;

// Malformed document; syntax errors carry line and column.
struct DocumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    throw DocumentError(ex.what());
  }
}

inline const json& need(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw DocumentError("missing key \"" + key + "\"");
  return j.at(key);
}

inline Gauss scalar_from(const json& j) {
  if (j.is_string()) {
    try {
      return parse_gauss(j.get<std::string>());
    } catch (const std::exception& ex) {
      throw DocumentError("bad scalar \"" + j.get<std::string>() + "\": " + ex.what());
    }
  }
  if (j.is_number_integer()) return Gauss(long(j.get<long long>()));
  throw DocumentError("scalars must be exact strings, got " + j.dump());
}
inline json to_json(const Gauss& g) { return to_string(g); }

// Tau-free coefficients are plain strings; otherwise a list of {"coeff", "tau_power"} terms.
inline json to_json(const Coeff& c) {
  if (c.is_tau_free()) return to_string(c.scalar());
  json out = json::array();
  for (const auto& [e, g] : c.terms()) out.push_back({{"coeff", to_string(g)}, {"tau_power", e}});
  return out;
}
inline Coeff coeff_from(const json& j) {
  auto term = [](const json& t) {
    int e = t.contains("tau_power") ? t.at("tau_power").get<int>() : 0;
    return Coeff(scalar_from(need(t, "coeff")), e);
  };
  if (j.is_string() || j.is_number_integer()) return Coeff(scalar_from(j));
  if (j.is_object()) return term(j);
  if (j.is_array()) {
    Coeff c;
    for (const auto& t : j) c += term(t);
    return c;
  }
  throw DocumentError("bad coefficient " + j.dump());
}

// Monomial keys: comma-separated q exponents, then "|" and log exponents when present.
inline std::string key_name(std::uint64_t key, int r) {
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  int w = std::max(r, 1);
  std::string s = join(mono::qexps(key, w));
  if (mono::ldeg(key) > 0) s += "|" + join(mono::lexps(key, w));
  return s;
}
inline std::uint64_t key_from(const std::string& s, int r) {
  auto split = [&](const std::string& part) {
    std::vector<int> v;
    std::stringstream ss(part);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        v.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw DocumentError("bad exponent key \"" + s + "\"");
      }
    }
    if (int(v.size()) > std::max(r, 1) || int(v.size()) > kMaxVars) throw DocumentError("exponent key \"" + s + "\" has too many variables");
    for (int e : v)
      if (e < 0 || e > 255) throw DocumentError("exponent out of range in \"" + s + "\"");
    return v;
  };
  auto bar = s.find('|');
  if (bar == std::string::npos) return mono::make(split(s));
  return mono::make(split(s.substr(0, bar)), split(s.substr(bar + 1)));
}

inline json to_json(const Series& s, int r) {
  json out = json::object();
  for (const auto& [k, c] : s.terms()) out[key_name(k, r)] = to_json(c);
  return out;
}
inline Series series_from(const json& j, int r, int D) {
  if (!j.is_object()) throw DocumentError("series must be an object of exponent keys, got " + j.dump());
  Series s = Series::zero(r, D);
  for (const auto& [k, v] : j.items()) s.add_term(key_from(k, r), coeff_from(v));
  return s;
}

inline json to_json(const Mat& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(to_json(m(i, c)));
    out.push_back(row);
  }
  return out;
}
inline Mat matrix_from(const json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw DocumentError("expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw DocumentError("matrix row " + std::to_string(i) + " has wrong length");
    for (std::size_t c = 0; c < n; ++c) m(i, c) = scalar_from(j[i][c]);
  }
  return m;
}

inline json to_json(const SMat& m, int r) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(to_json(m(i, c), r));
    out.push_back(row);
  }
  return out;
}
inline SMat series_matrix_from(const json& j, std::size_t n, int r, int D) {
  if (!j.is_array() || j.size() != n) throw DocumentError("expected an " + std::to_string(n) + "-row series matrix");
  SMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw DocumentError("series matrix row " + std::to_string(i) + " has wrong length");
    for (std::size_t c = 0; c < n; ++c) m(i, c) = series_from(j[i][c], r, D);
  }
  return m;
}

inline json to_json(const Vec& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(to_json(x));
  return out;
}
inline Vec vector_from(const json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw DocumentError("expected a vector of length " + std::to_string(n));
  Vec v;
  for (const auto& x : j) v.push_back(scalar_from(x));
  return v;
}

inline json to_json(const Subspace& s) {
  json out = json::array();
  for (const auto& b : s.basis()) out.push_back(to_json(b));
  return out;
}
inline Subspace subspace_from(const json& j, std::size_t n) {
  if (!j.is_array()) throw DocumentError("subspace must be a list of basis vectors");
  std::vector<Vec> vs;
  for (const auto& x : j) vs.push_back(vector_from(x, n));
  return Subspace::span(n, vs);
}

// Filtrations: jump index -> basis of the piece, listing only indices where the piece changes.
inline json to_json(const DecFiltration& f) {
  json out = json::object();
  std::size_t prev = std::size_t(-1);
  for (int p = f.p_min(); p <= f.p_max() + 1; ++p) {
    Subspace s = f[p];
    if (s.dim() != prev) out[std::to_string(p)] = to_json(s);
    prev = s.dim();
  }
  return out;
}
inline json to_json(const IncFiltration& f) {
  json out = json::object();
  std::size_t prev = std::size_t(-1);
  for (int q = f.q_min() - 1; q <= f.q_max(); ++q) {
    Subspace s = f[q];
    if (s.dim() != prev) out[std::to_string(q)] = to_json(s);
    prev = s.dim();
  }
  return out;
}
inline std::map<int, Subspace> pieces_from(const json& j, std::size_t n) {
  if (!j.is_object()) throw DocumentError("filtration must map jump indices to bases");
  std::map<int, Subspace> m;
  for (const auto& [k, v] : j.items()) {
    int idx;
    try {
      idx = std::stoi(k);
    } catch (const std::exception&) {
      throw DocumentError("bad jump index \"" + k + "\"");
    }
    m.emplace(idx, subspace_from(v, n));
  }
  return m;
}
inline DecFiltration dec_from(const json& j, std::size_t n) {
  auto f = DecFiltration::from_map(n, pieces_from(j, n));
  if (!f.nested()) throw DocumentError("decreasing filtration pieces are not nested");
  return f;
}
inline IncFiltration inc_from(const json& j, std::size_t n) {
  auto f = IncFiltration::from_map(n, pieces_from(j, n));
  if (!f.nested()) throw DocumentError("increasing filtration pieces are not nested");
  return f;
}

inline json to_json(const Bigrading& I) {
  json out = json::object();
  for (const auto& [pq, v] : I.pieces) out[std::to_string(pq.first) + "," + std::to_string(pq.second)] = to_json(v);
  return out;
}

inline json to_json(const Report& rep) {
  json items = json::array();
  for (const auto& it : rep.items()) {
    json x{{"name", it.name}, {"pass", it.pass}};
    if (!it.detail.empty()) x["detail"] = it.detail;
    items.push_back(x);
  }
  return {{"pass", rep.ok()}, {"checks", items}};
}

inline json dims_json(const std::vector<std::size_t>& dims) {
  json out = json::array();
  for (auto d : dims) out.push_back(d);
  return out;
}

inline json to_json(const Potential& P) {
  json out = json::object();
  if (P.k == 3) {
    out["phi"] = to_json(P.phi3, P.r);
    return out;
  }
  json lin = json::object(), quad = json::object();
  for (const auto& [a, s] : P.linear)
    if (!s.is_zero()) lin[std::to_string(a)] = to_json(s, P.r);
  for (const auto& [ab, s] : P.quadratic)
    if (!s.is_zero()) quad[std::to_string(ab.first) + "," + std::to_string(ab.second)] = to_json(s, P.r);
  out["linear"] = lin;
  out["quadratic"] = quad;
  return out;
}

inline std::size_t index_from(const std::string& s) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return std::size_t(v);
  } catch (const std::exception&) {
    throw DocumentError("bad basis index \"" + s + "\"");
  }
}

inline Potential potential_from(const json& j, const FrobeniusModule& M, int D) {
  Potential P = zero_potential(M);
  int r = M.r();
  if (j.contains("phi")) P.phi3 = series_from(j.at("phi"), r, D);
  if (j.contains("linear"))
    for (const auto& [k, v] : j.at("linear").items()) P.linear[index_from(k)] = series_from(v, r, D);
  if (j.contains("quadratic"))
    for (const auto& [k, v] : j.at("quadratic").items()) {
      auto comma = k.find(',');
      if (comma == std::string::npos) throw DocumentError("quadratic key \"" + k + "\" must be \"a,b\"");
      std::size_t a = index_from(k.substr(0, comma)), b = index_from(k.substr(comma + 1));
      P.quadratic[{std::min(a, b), std::max(a, b)}] = series_from(v, r, D);
    }
  return P;
}

inline int order_from(const json& j, int fallback) {
  if (!j.contains("truncation_order")) return fallback;
  int D = j.at("truncation_order").get<int>();
  if (D < 0 || D > 64) throw DocumentError("truncation_order must lie in [0, 64]");
  return D;
}

struct ModuleDocument {
  FrobeniusModule M;
  std::optional<Potential> P;
  int D = 6;
};

inline ModuleDocument module_from(const json& j, int fallback_order) {
  ModuleDocument doc;
  FrobeniusModule& M = doc.M;
  M.k = need(j, "weight").get<int>();
  for (const auto& d : need(j, "dims")) M.dims.push_back(d.get<std::size_t>());
  std::size_t n = M.dim();
  M.B = matrix_from(need(j, "pairing"), n);
  for (const auto& a : need(j, "action")) M.A.push_back(matrix_from(a, n));
  if (j.contains("real")) M.real = j.at("real").get<bool>();
  doc.D = order_from(j, fallback_order);
  if (j.contains("potential")) doc.P = potential_from(j.at("potential"), M, doc.D);
  return doc;
}

inline json to_json(const FrobeniusModule& M) {
  json a = json::array();
  for (const auto& x : M.A) a.push_back(to_json(x));
  json out{{"kind", "module"}, {"weight", M.k}, {"dims", dims_json(M.dims)}, {"pairing", to_json(M.B)}, {"action", a}};
  if (!M.real) out["real"] = false;
  return out;
}

inline json to_json(const FrobeniusModule& M, const Potential& P, int D) {
  json out = to_json(M);
  out["kind"] = "potential";
  out["potential"] = to_json(P);
  out["truncation_order"] = D;
  return out;
}

inline MHS mhs_from(const json& j) {
  std::size_t n = need(j, "dim").get<std::size_t>();
  const json& f = need(j, "filtrations");
  return {dec_from(need(f, "F"), n), inc_from(need(f, "W"), n)};
}
inline json to_json(const MHS& m) {
  return {{"kind", "mhs"}, {"dim", m.dim()}, {"filtrations", {{"F", to_json(m.F)}, {"W", to_json(m.W)}}}};
}

struct NilpotentDocument {
  std::vector<Mat> Ns;
  int center = 0;
  std::optional<IncFiltration> W;
};
inline NilpotentDocument nilpotent_from(const json& j) {
  NilpotentDocument d;
  std::size_t n = need(j, "dim").get<std::size_t>();
  for (const auto& a : need(j, "action")) d.Ns.push_back(matrix_from(a, n));
  if (d.Ns.empty()) throw DocumentError("\"action\" must list at least one matrix");
  d.center = j.contains("weight") ? j.at("weight").get<int>() : 0;
  if (j.contains("filtrations") && j.at("filtrations").contains("W")) d.W = inc_from(j.at("filtrations").at("W"), n);
  return d;
}

inline VHSGerm germ_from(const json& j) {
  VHSGerm G;
  G.k = need(j, "weight").get<int>();
  std::size_t n = need(j, "dim").get<std::size_t>();
  G.D = order_from(j, default_order());
  G.Finf = dec_from(need(need(j, "filtrations"), "F"), n);
  for (const auto& a : need(j, "action")) G.Ns.push_back(matrix_from(a, n));
  if (G.Ns.size() > std::size_t(kMaxVars)) throw DocumentError("at most 4 framing variables are supported");
  G.Q = matrix_from(need(j, "pairing"), n);
  G.Gamma = series_matrix_from(need(j, "gamma"), n, G.r(), G.D);
  return G;
}
inline json to_json(const VHSGerm& G) {
  json a = json::array();
  for (const auto& x : G.Ns) a.push_back(to_json(x));
  return {{"kind", "germ"},
          {"weight", G.k},
          {"dim", G.dim()},
          {"truncation_order", G.D},
          {"filtrations", {{"F", to_json(G.Finf)}}},
          {"action", a},
          {"pairing", to_json(G.Q)},
          {"gamma", to_json(G.Gamma, G.r())}};
}

inline std::string kind_of(const json& j) {
  const json& k = need(j, "kind");
  if (!k.is_string()) throw DocumentError("\"kind\" must be a string");
  std::string s = k.get<std::string>();
  static const std::set<std::string> kinds{"module", "potential", "mhs", "nilpotent", "germ"};
  if (!kinds.count(s)) throw DocumentError("unknown kind \"" + s + "\"");
  return s;
}

// Canonical text: parse, rebuild from the typed value, dump with sorted keys.
inline std::string canonical(const json& j) {
  std::string kind = kind_of(j);
  json out;
  if (kind == "module" || kind == "potential") {
    auto d = module_from(j, default_order());
    out = d.P ? to_json(d.M, *d.P, d.D) : to_json(d.M);
  } else if (kind == "mhs") {
    out = to_json(mhs_from(j));
  } else if (kind == "germ") {
    out = to_json(germ_from(j));
  } else {
    auto d = nilpotent_from(j);
    json a = json::array();
    for (const auto& x : d.Ns) a.push_back(to_json(x));
    out = {{"kind", "nilpotent"}, {"dim", d.Ns[0].rows()}, {"weight", d.center}, {"action", a}};
    if (d.W) out["filtrations"] = {{"W", to_json(*d.W)}};
  }
  return out.dump(2) + "\n";
}

}  // namespace hodgefrob::io
