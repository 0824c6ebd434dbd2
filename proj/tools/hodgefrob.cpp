#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hodgefrob.hpp"

using namespace hodgefrob;
using io::json;

namespace {

struct Options {
  std::string command;
  std::string file;
  std::optional<int> order;
  bool json_out = false;
  std::string eval;
  std::optional<int> center;
  bool relative = false;
  std::string unit;
  std::string output;
};

struct Outcome {
  Report report;
  json result;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::DocumentError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int order_for(const Options& o) { return o.order ? *o.order : default_order(); }

io::ModuleDocument load_module(const Options& o, const json& doc) {
  std::string kind = io::kind_of(doc);
  if (kind != "module" && kind != "potential") throw io::DocumentError("expected a module or potential file, got " + kind);
  auto d = io::module_from(doc, order_for(o));
  if (o.order) {
    d.D = *o.order;
    if (d.P) {
      d.P->phi3 = d.P->phi3.with_order(d.D);
      for (auto& [a, s] : d.P->linear) s = s.with_order(d.D);
      for (auto& [ab, s] : d.P->quadratic) s = s.with_order(d.D);
    }
  }
  return d;
}

VHSGerm load_germ(const Options& o, const json& doc) {
  if (io::kind_of(doc) != "germ") throw io::DocumentError("expected a germ file");
  VHSGerm G = io::germ_from(doc);
  if (o.order && *o.order < G.D) {
    G.D = *o.order;
    G.Gamma = with_order(G.Gamma, G.D);
  }
  return G;
}

std::vector<cplx> eval_point(const std::string& point, int r) {
  std::string s = point;
  if (s.rfind("q=", 0) == 0) s = s.substr(2);
  std::vector<cplx> q;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      q.emplace_back(std::stod(tok));
    } catch (const std::exception&) {
      throw io::DocumentError("bad --eval point \"" + point + "\"");
    }
  }
  if (int(q.size()) != r) throw io::DocumentError("--eval needs " + std::to_string(r) + " coordinates");
  return q;
}

json numeric(const Series& s, const std::vector<cplx>& q) {
  cplx v = s.evaluate(q);
  std::ostringstream os;
  os.precision(17);
  os << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "*i";
  return os.str();
}

json zpoly_json(const ZPoly& p, int r) {
  json out = json::object();
  for (const auto& [key, s] : p.terms()) {
    std::string k;
    for (std::size_t i = 0; i < key.size(); ++i) k += (i ? "," : "") + std::to_string(key[i]);
    out[k.empty() ? "1" : "z" + k] = io::to_json(s, r);
  }
  return out;
}

// Runs a check, recording a thrown error as a failed item.
template <class F>
void guarded(Report& rep, const std::string& prefix, F check) {
  try {
    rep.merge(check(), prefix);
  } catch (const std::exception& ex) {
    rep.fail(prefix + ".error", ex.what());
  }
}

Outcome cmd_validate(const Options& o, const json& doc) {
  auto d = load_module(o, doc);
  Outcome out;
  out.report.merge(validate_module(d.M), "module");
  if (d.P) out.report.merge(validate_quantum_potential(d.M, *d.P), "potential");
  return out;
}

Outcome cmd_deligne(const Options&, const json& doc) {
  if (io::kind_of(doc) != "mhs") throw io::DocumentError("expected an mhs file");
  MHS m = io::mhs_from(doc);
  Outcome out;
  Report mhs = check_mhs(m);
  out.report.merge(mhs, "mhs");
  if (!mhs) return out;
  Bigrading I = deligne_bigrading(m);
  out.report.merge(verify_bigrading(I, m), "bigrading");
  out.result = {{"bigrading", io::to_json(I)}};
  return out;
}

Outcome cmd_weightfilt(const Options& o, const json& doc) {
  if (io::kind_of(doc) != "nilpotent") throw io::DocumentError("expected a nilpotent file");
  auto d = io::nilpotent_from(doc);
  Outcome out;
  Mat N = sum_of(d.Ns, d.Ns[0].rows());
  if (o.relative) {
    if (!d.W) throw io::DocumentError("--relative needs filtrations.W in the file");
    auto rw = relative_weight_filtration(N, *d.W);
    out.report.merge(rw.report, "relative");
    if (rw.M) out.result = {{"M", io::to_json(*rw.M)}};
    return out;
  }
  int center = o.center ? *o.center : d.center;
  auto [W, rep] = weight_filtration_cone(d.Ns, center);
  out.report.merge(rep, "weight");
  out.result = {{"W", io::to_json(W)}, {"center", center}};
  return out;
}

Outcome cmd_amodel(const Options& o, const json& doc) {
  auto d = load_module(o, doc);
  Potential P = d.P ? *d.P : zero_potential(d.M);
  Outcome out;
  Report v = validate_module(d.M);
  v.merge(validate_quantum_potential(d.M, P), "potential");
  out.report.merge(v, "input");
  if (!v) return out;
  auto C = dubrovin_connection(d.M, P, d.D);
  out.report.merge(flatness_check(C), "connection");
  out.report.merge(transversality_check(C, module_hodge_filtration(d.M)), "connection");
  out.report.merge(pairing_flatness_check(C, q_form(d.M)), "connection");
  out.report.merge(residue_check(C, d.M), "connection");
  VHSGerm G = build_vhs_germ(d.M, P, d.D);
  out.result = io::to_json(G);
  guarded(out.report, "germ", [&] { return maximal_unipotency_check(G); });
  guarded(out.report, "germ", [&] { return limiting_mhs_check(G); });
  guarded(out.report, "germ", [&] { return horizontality_check(G); });
  return out;
}

Outcome cmd_extract(const Options& o, const json& doc) {
  VHSGerm G = load_germ(o, doc);
  std::optional<Vec> unit;
  if (!o.unit.empty()) {
    unit = Vec();
    std::stringstream ss(o.unit);
    std::string tok;
    while (std::getline(ss, tok, ',')) unit->push_back(parse_gauss(tok));
    if (unit->size() != G.dim()) throw io::DocumentError("--unit needs " + std::to_string(G.dim()) + " entries");
  }
  Outcome out;
  out.report.merge(horizontality_check(G), "germ");
  out.report.merge(maximal_unipotency_check(G), "germ");
  if (!out.report) return out;
  Extraction X = extract(G, unit);
  out.report.merge(validate_module(X.M), "module");
  out.report.merge(validate_quantum_potential(X.M, X.P), "potential");
  out.result = io::to_json(X.M, X.P, G.D);
  if (!o.eval.empty()) {
    auto q = eval_point(o.eval, X.M.r());
    json ev = json::object();
    if (X.P.k == 3) ev["phi"] = numeric(X.P.phi3, q);
    for (const auto& [a, s] : X.P.linear) ev["linear." + std::to_string(a)] = numeric(s, q);
    for (const auto& [ab, s] : X.P.quadratic)
      ev["quadratic." + std::to_string(ab.first) + "," + std::to_string(ab.second)] = numeric(s, q);
    out.result["evaluated"] = ev;
  }
  return out;
}

Outcome cmd_yukawa(const Options& o, const json& doc) {
  VHSGerm G = load_germ(o, doc);
  Outcome out;
  if (G.k != 3) {
    out.report.fail("weight", "Yukawa couplings need a weight-3 germ");
    return out;
  }
  ExtensionData ed = extension_data_weight3(G);
  out.report = ed.report;
  json table = json::object(), ev = json::object();
  std::vector<cplx> q;
  if (!o.eval.empty()) q = eval_point(o.eval, G.r());
  for (const auto& [abc, s] : ed.yukawa) {
    std::string k = std::to_string(abc[0]) + "," + std::to_string(abc[1]) + "," + std::to_string(abc[2]);
    table[k] = io::to_json(s, G.r());
    if (!q.empty()) ev[k] = numeric(s, q);
  }
  out.result = {{"yukawa", table}};
  if (!q.empty()) out.result["evaluated"] = ev;
  return out;
}

Outcome cmd_unfold(const Options& o, const json& doc) {
  auto d = load_module(o, doc);
  Potential P = d.P ? *d.P : zero_potential(d.M);
  Outcome out;
  Report v = validate_module(d.M);
  v.merge(validate_quantum_potential(d.M, P), "potential");
  out.report.merge(v, "input");
  if (!v) return out;
  FrobeniusAlgebra A = d.M.k <= 5 ? algebra_from_module_low_weight(d.M) : algebra_from_module_generated(d.M);
  out.report.merge(algebra_validate(A), "algebra");
  UnfoldedProduct U = unfolded_product(A, P, d.D);
  out.report.merge(check_frobenius_manifold(U, d.M.B), "manifold");
  json tensor = json::object();
  for (std::size_t a = 0; a < U.n; ++a)
    for (std::size_t b = a; b < U.n; ++b)
      for (std::size_t c = 0; c < U.n; ++c)
        if (!U.t[a][b][c].is_zero())
          tensor[std::to_string(a) + "," + std::to_string(b) + "->" + std::to_string(c)] = zpoly_json(U.t[a][b][c], U.r);
  out.result = {{"product", tensor}};
  return out;
}

Outcome cmd_roundtrip(const Options& o, const json& doc) {
  auto d = load_module(o, doc);
  Potential P = d.P ? *d.P : zero_potential(d.M);
  Outcome out;
  Report v = validate_module(d.M);
  v.merge(validate_quantum_potential(d.M, P), "potential");
  out.report.merge(v, "input");
  if (!v) return out;
  VHSGerm G = build_vhs_germ(d.M, P, d.D);
  Extraction X = extract(G);
  out.report.add("module", X.M == d.M);
  out.report.add("potential", X.P == P);
  VHSGerm G2 = build_vhs_germ(X.M, X.P, d.D);
  out.report.add("germ.hodge", G2.Finf == G.Finf);
  out.report.add("germ.monodromy", G2.Ns == G.Ns);
  auto diff = first_defect(germ_gamma_level(G2, -1) - germ_gamma_level(G, -1));
  out.report.add("germ.gamma_minus1", !diff.found(), diff.text());
  json dj = json::object();
  if (!(X.M == d.M)) dj["module"] = io::to_json(X.M);
  if (!(X.P == P)) dj["potential"] = io::to_json(X.P);
  out.result = {{"diff", dj}};
  return out;
}

Outcome cmd_horizontality(const Options& o, const json& doc) {
  VHSGerm G = load_germ(o, doc);
  Outcome out;
  Report h = horizontality_check(G);
  out.report.merge(h, "horizontality");
  if (h) out.report.merge(higgs_field(G).report, "higgs");
  return out;
}

// X = log(exp(sum l_j N_j) exp(Gamma)) and the rebuild of Gamma from its level -1 part.
Outcome cmd_degenerate(const Options& o, const json& doc) {
  VHSGerm G = load_germ(o, doc);
  Outcome out;
  XPresentation X = x_from_germ(G);
  LevelFrame f = level_frame(germ_bigrading(G));
  SMat rebuilt = gamma_from_gamma_minus1(G.Finf, G.Ns, level_part(f, G.Gamma, -1), G.k, G.D);
  auto d = first_defect(rebuilt - G.Gamma);
  out.report.add("gamma_rebuilt_from_level_minus1", !d.found(), d.text());
  out.result = {{"X_minus1", io::to_json(X.X1, G.r())}};
  return out;
}

Outcome cmd_psi(const Options& o, const json& doc) {
  VHSGerm G = load_germ(o, doc);
  Outcome out;
  PsiResult ps = psi_filtration(G);
  out.report.merge(ps.report, "psi");
  out.report.merge(psi_convolution_check(G), "convolution");
  json dets = json::object();
  for (const auto& [p, s] : ps.determinants) dets[std::to_string(p)] = io::to_json(s, G.r());
  out.result = {{"psi", io::to_json(ps.psi)}, {"determinants", dets}};
  return out;
}

Outcome cmd_hm(const Options& o, const json& doc) {
  VHSGerm G = load_germ(o, doc);
  return {hm_precondition_check(G), json()};
}

Outcome cmd_canonical(const Options&, const json& doc) {
  Outcome out;
  out.result = json::parse(io::canonical(doc));
  return out;
}

Outcome dispatch(const Options& o, const json& doc) {
  static const std::map<std::string, Outcome (*)(const Options&, const json&)> table{
      {"validate", cmd_validate}, {"deligne", cmd_deligne}, {"weightfilt", cmd_weightfilt},
      {"amodel", cmd_amodel},     {"extract", cmd_extract}, {"yukawa", cmd_yukawa},
      {"unfold", cmd_unfold},     {"roundtrip", cmd_roundtrip}, {"horizontality", cmd_horizontality},
      {"psi", cmd_psi},           {"hm", cmd_hm},           {"canonical", cmd_canonical},
      {"higgs", cmd_horizontality}, {"check-fm", cmd_unfold}, {"degenerate", cmd_degenerate}};
  auto it = table.find(o.command);
  if (it == table.end()) throw io::DocumentError("unknown command " + o.command);
  static const std::set<std::string> evaluating{"extract", "yukawa"};
  if (!o.eval.empty() && !evaluating.count(o.command)) throw io::DocumentError("--eval applies to extract and yukawa");
  try {
    return it->second(o, doc);
  } catch (const io::DocumentError&) {
    throw;
  } catch (const nlohmann::json::exception&) {
    throw;
  } catch (const std::exception& ex) {
    Outcome out;
    out.report.fail("error", ex.what());
    return out;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact computations with graded Frobenius modules and variations of Hodge structure"};
  Options o;
  app.add_option("command", o.command, "validate | deligne | weightfilt | amodel | extract | yukawa | unfold | "
                                       "roundtrip | horizontality | higgs | degenerate | psi | hm | check-fm | canonical")
      ->required();
  app.add_option("file", o.file, "instance file (JSON)")->required();
  app.add_option("--order", o.order, "truncation order D (default: file, then HODGEFROB_ORDER, then 6)")
      ->check(CLI::Range(0, 64));
  app.add_flag("--json", o.json_out, "machine-readable output");
  app.add_option("--eval", o.eval, "evaluate series numerically at q=...,... (extract, yukawa)");
  app.add_option("--center", o.center, "center of the weight filtration");
  app.add_flag("--relative", o.relative, "relative weight filtration against filtrations.W");
  app.add_option("--unit", o.unit, "comma-separated unit vector for extract");
  app.add_option("-o,--output", o.output, "write the result document to this file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  Outcome out;
  try {
    json doc = io::parse_document(read_file(o.file));
    out = dispatch(o, doc);
  } catch (const std::exception& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 2;
  }
  if (!o.output.empty() && !out.result.is_null()) {
    std::ofstream f(o.output);
    f << out.result.dump(2) << "\n";
  }
  if (o.json_out) {
    json j = io::to_json(out.report);
    j["command"] = o.command;
    if (!out.result.is_null() && o.output.empty()) j["result"] = out.result;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << out.report.text();
    if (!out.result.is_null() && o.output.empty()) std::cout << out.result.dump(2) << "\n";
    std::cout << (out.report.ok() ? "OK" : "FAILED") << "\n";
  }
  return out.report.ok() ? 0 : 1;
}
