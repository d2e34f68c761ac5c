#include "unfolding/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "unfolding/cpoly.hpp"
#include "unfolding/errors.hpp"
#include "unfolding/glue.hpp"
#include "unfolding/necklace.hpp"
#include "unfolding/normalform.hpp"
#include "unfolding/period.hpp"

namespace unfolding::cli {

namespace {

const double kPi = std::numbers::pi;

template <class T>
T get_or(const json& j, const char* key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("spec: field '") + key + "': " + e.what());
  }
}

const json& section(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ArgumentError(std::string("spec: missing section '") + key + "'");
  return doc.at(key);
}

json germ_json(const GermMap& g) { return to_json(g.coeffs); }

}  // namespace

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ArgumentError("spec: expected a complex number [re, im], got " + j.dump());
}

json to_json(const CVec& v) {
  json out = json::array();
  for (cplx z : v) out.push_back(to_json(z));
  return out;
}

CVec cvec_from_json(const json& j) {
  if (!j.is_array()) throw ArgumentError("spec: expected a list of complex numbers, got " + j.dump());
  CVec out;
  for (const auto& z : j) out.push_back(complex_from_json(z));
  return out;
}

void FieldSpec::validate() const {
  if (k < 1) throw ArgumentError("spec: k must be >= 1");
  if (static_cast<int>(eps.size()) != k) throw ArgumentError("spec: eps must have k entries");
  if (truncation.nx < 1 || truncation.ny < 1) throw ArgumentError("spec: truncation orders must be >= 1");
  if (dynamics.rho < 0) throw ArgumentError("spec: rho must be >= 0");
  field().validate();
}

UnfoldingField FieldSpec::field() const {
  UnfoldingField f;
  f.p = build_P(k, eps);
  f.mu = mu;
  f.tau = tau;
  f.r = R;
  if (U) f.u_poly = *U;
  return f;
}

double FieldSpec::rho() const {
  if (dynamics.rho > 0) return dynamics.rho;
  const double re = rho_eps(eps);
  return re > 0 ? 2 * re : 1.0;
}

FieldSpec field_spec_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("spec: top level must be an object");
  if (!j.contains("k") || !j.contains("eps")) throw ArgumentError("spec: 'k' and 'eps' are required");
  FieldSpec s;
  s.k = get_or<int>(j, "k", 1);
  s.eps = cvec_from_json(j.at("eps"));
  if (j.contains("mu")) s.mu = complex_from_json(j.at("mu"));
  s.tau = get_or<int>(j, "tau", 0);
  if (j.contains("R")) {
    if (!j.at("R").is_array()) throw ArgumentError("spec: 'R' must be a list");
    for (const auto& m : j.at("R")) {
      if (!m.is_object() || !m.contains("c")) throw ArgumentError("spec: R entries are {i, n, c}");
      s.R.push_back({get_or<int>(m, "i", 1), get_or<int>(m, "n", 1), complex_from_json(m.at("c"))});
    }
  }
  if (j.contains("U")) s.U = cvec_from_json(j.at("U"));
  if (j.contains("truncation")) {
    const auto& t = j.at("truncation");
    s.truncation.nx = get_or<int>(t, "nx", s.truncation.nx);
    s.truncation.ny = get_or<int>(t, "ny", s.truncation.ny);
  }
  if (j.contains("dynamics")) {
    const auto& d = j.at("dynamics");
    s.dynamics.rho = get_or<double>(d, "rho", 0.0);
    s.dynamics.rtol = get_or<double>(d, "rtol", s.dynamics.rtol);
    s.dynamics.atol = get_or<double>(d, "atol", s.dynamics.atol);
    if (d.contains("theta_profile")) {
      const auto& tp = d.at("theta_profile");
      s.dynamics.theta.far = get_or<double>(tp, "far", 0.0);
      if (tp.contains("by_root"))
        for (const auto& [key, val] : tp.at("by_root").items()) {
          try {
            s.dynamics.theta.by_root[std::stoi(key)] = val.get<double>();
          } catch (const std::exception&) {
            throw ArgumentError("spec: theta_profile.by_root maps root indices to angles");
          }
        }
    }
  }
  s.validate();
  return s;
}

json to_json(const FieldSpec& s) {
  json j;
  j["k"] = s.k;
  j["eps"] = to_json(s.eps);
  j["mu"] = to_json(s.mu);
  j["tau"] = s.tau;
  j["R"] = json::array();
  for (const auto& m : s.R) j["R"].push_back({{"i", m.i}, {"n", m.n}, {"c", to_json(m.c)}});
  if (s.U) j["U"] = to_json(*s.U);
  j["truncation"] = {{"nx", s.truncation.nx}, {"ny", s.truncation.ny}};
  json by_root = json::object();
  for (const auto& [idx, a] : s.dynamics.theta.by_root) by_root[std::to_string(idx)] = a;
  j["dynamics"] = {{"rho", s.dynamics.rho},
                   {"rtol", s.dynamics.rtol},
                   {"atol", s.dynamics.atol},
                   {"theta_profile", {{"far", s.dynamics.theta.far}, {"by_root", by_root}}}};
  return j;
}

std::string dump_stable(const json& j) { return j.dump(2) + "\n"; }

// ---- SVG ----

SvgWriter::SvgWriter(double half_width, int pixels) : half_width_(half_width), pixels_(pixels) {
  if (!(half_width > 0) || pixels < 1) throw ArgumentError("SvgWriter: need a positive window");
}

std::string SvgWriter::point(cplx z) const {
  const double s = pixels_ / (2 * half_width_);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << (z.real() + half_width_) * s << "," << (half_width_ - z.imag()) * s;
  return os.str();
}

void SvgWriter::polyline(const Curve& c, const std::string& stroke, double width) {
  std::string pts;
  for (cplx z : c) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
    if (!pts.empty()) pts += ' ';
    pts += point(z);
  }
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" points=\"" << pts
     << "\"/>";
  items_.push_back(os.str());
  ++polylines_;
}

void SvgWriter::circle(cplx center, double radius_px, const std::string& fill) {
  const std::string p = point(center);
  const auto comma = p.find(',');
  std::ostringstream os;
  os << "<circle cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1) << "\" r=\"" << radius_px
     << "\" fill=\"" << fill << "\"/>";
  items_.push_back(os.str());
}

std::string SvgWriter::str() const {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels_ << "\" height=\"" << pixels_
     << "\" viewBox=\"0 0 " << pixels_ << " " << pixels_ << "\">\n";
  for (const auto& it : items_) os << "  " << it << "\n";
  os << "</svg>\n";
  return os.str();
}

// ---- commands ----

std::optional<double> tolerance_from_env() {
  const char* v = std::getenv("UNFOLDING_LAB_TOL");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const double t = std::strtod(v, &end);
  if (end == v || *end != '\0' || !(t > 0)) throw ArgumentError("UNFOLDING_LAB_TOL must be a positive number");
  return t;
}

namespace {

CommandOutput cmd_dynamics(const json& doc, const Options&) {
  const FieldSpec s = field_spec_from_json(doc);
  const CPoly p = build_P(s.k, s.eps);
  const double rho = s.rho();
  json out;
  out["homoclinic"] = json::array();
  for (const auto& I : homoclinic_subsets(p)) out["homoclinic"].push_back(I);
  const DSInvariant ds = ds_invariant(p, s.dynamics.theta, rho);
  out["sigma"] = ds.sigma;
  out["tau"] = to_json(ds.taus);
  out["roots"] = to_json(ds.roots);
  out["root_types"] = json::array();
  for (auto t : ds.root_types) out["root_types"].push_back(to_string(t));
  out["landing"] = ds.landing;
  out["rho"] = rho;

  SvgWriter svg(1.5 * rho);
  for (const auto& tr : separatrices_infinity(p, s.dynamics.theta, rho)) svg.polyline(tr.points, "#1f4e9c");
  try {
    for (const auto& sq : squid_boundaries(p, s.dynamics.theta, rho, 0.0)) {
      svg.polyline(sq.boundary_minus, "#b03a2e");
      svg.polyline(sq.boundary_plus, "#b03a2e");
      svg.polyline(sq.spiral_minus, "#7d3c98");
      svg.polyline(sq.spiral_plus, "#7d3c98");
      if (!sq.gate.empty()) svg.polyline(sq.gate, "#229954");
    }
    out["sectors"] = "ok";
  } catch (const RemedyError& e) {
    out["sectors"] = e.what();
  }
  for (cplx r : ds.roots) svg.circle(r, 3.0, "#000000");
  out["svg_polylines"] = svg.polyline_count();
  return {out, svg.str()};
}

json period_one(const json& q, cplx mu, const Options& opt) {
  const int n = get_or<int>(q, "n", 0), m = get_or<int>(q, "m", 1);
  if (!q.contains("s")) throw ArgumentError("period: 's' is required");
  const cplx s = complex_from_json(q.at("s"));
  const cplx qmu = q.contains("mu") ? complex_from_json(q.at("mu")) : mu;
  const bool want_closed = get_or<bool>(q, "closed", true), want_numeric = get_or<bool>(q, "numeric", true);
  json out{{"n", n}, {"m", m}, {"s", to_json(s)}, {"mu", to_json(qmu)}};
  PeriodTerm c, nu;
  if (want_closed) {
    c = period_model_k1(n, m, qmu, s);
    out["closed"] = to_json(c.coefficient);
    out["closed_zero"] = c.zero;
  }
  if (want_numeric) {
    QuadratureOptions qo;
    if (opt.tol) qo.tol = *opt.tol;
    nu = period_numeric_k1(n, m, qmu, s, qo);
    out["numeric"] = to_json(nu.coefficient);
    out["numeric_error_estimate"] = nu.error_estimate;
  }
  if (want_closed && want_numeric) {
    const double diff = std::abs(c.coefficient - nu.coefficient);
    // absolute when the closed form vanishes
    out["rel_err"] = c.zero || c.coefficient == 0.0 ? diff : diff / std::abs(c.coefficient);
  }
  return out;
}

CommandOutput cmd_period(const json& doc, const Options& opt) {
  const cplx mu = doc.contains("mu") ? complex_from_json(doc.at("mu")) : cplx(0.0);
  const json& sec = section(doc, "period");
  if (!sec.is_array()) return {period_one(sec, mu, opt), std::nullopt};
  // grid: contiguous chunks per worker, results kept in input order
  const size_t total = sec.size();
  const size_t workers = std::max<size_t>(1, std::min<size_t>(opt.jobs, total));
  std::vector<json> results(total);
  std::vector<std::future<void>> fut;
  for (size_t w = 0; w < workers; ++w)
    fut.push_back(std::async(std::launch::async, [&, w] {
      for (size_t i = w; i < total; i += workers) results[i] = period_one(sec[i], mu, opt);
    }));
  for (auto& f : fut) f.get();
  return {json{{"grid", results}}, std::nullopt};
}

CommandOutput cmd_normalize(const json& doc, const Options&) {
  const FieldSpec s = field_spec_from_json(doc);
  const auto inv = formal_invariants(s.field(), s.truncation.nx, s.truncation.ny);
  json out{{"mu", to_json(inv.mu)}, {"u", to_json(inv.u)}};
  out["spec_mu"] = to_json(s.mu);
  return {out, std::nullopt};
}

CommandOutput cmd_holonomy(const json& doc, const Options& opt) {
  const FieldSpec s = field_spec_from_json(doc);
  const json sec = doc.contains("holonomy") ? doc.at("holonomy") : json::object();
  const double x_star = get_or<double>(sec, "x_star", s.rho());
  const double radius = get_or<double>(sec, "radius", 0.01);
  const int order = get_or<int>(sec, "order", 4);
  const int direction = get_or<int>(sec, "direction", 1);
  if (direction != 1 && direction != -1) throw ArgumentError("holonomy: direction must be +1 or -1");
  const GermMap g = holonomy_germ(s.field(), x_star, direction, radius, order);
  const cplx model = std::exp(2.0 * kPi * cplx(0, 1) * s.mu * double(direction));
  const double err = std::abs(g.coeff(1) - model);
  json out{{"germ", germ_json(g)},
           {"multiplier", to_json(g.coeff(1))},
           {"model_multiplier", to_json(model)},
           {"multiplier_error", err},
           {"x_star", x_star},
           {"direction", direction}};
  if (opt.tol) out["within_tol"] = err <= *opt.tol;
  return {out, std::nullopt};
}

CommandOutput cmd_bernoulli(const json& doc, const Options&) {
  const cplx mu = doc.contains("mu") ? complex_from_json(doc.at("mu")) : cplx(0.0);
  const json& sec = section(doc, "bernoulli");
  const int d = get_or<int>(sec, "d", 1);
  const int N = get_or<int>(sec, "N", 8);
  if (!sec.contains("s")) throw ArgumentError("bernoulli: 's' is required");
  const cplx s = complex_from_json(sec.at("s"));
  const CVec r = sec.contains("r") ? cvec_from_json(sec.at("r")) : CVec{};
  const GermMap g = bernoulli_modulus(d, r, mu, s, N);
  return {json{{"d", d}, {"modulus", germ_json(g)}}, std::nullopt};
}

CommandOutput cmd_cousin(const json& doc, const Options& opt) {
  const json& sec = section(doc, "cousin");
  struct Term {
    int p, n;
    cplx c;
  };
  std::vector<Term> terms;
  if (!sec.contains("terms") || !sec.at("terms").is_array()) throw ArgumentError("cousin: 'terms' list is required");
  for (const auto& t : sec.at("terms")) {
    if (!t.contains("c")) throw ArgumentError("cousin: terms are {p, n, c}");
    const Term term{get_or<int>(t, "p", 0), get_or<int>(t, "n", 1), complex_from_json(t.at("c"))};
    if (term.n < 1) throw ArgumentError("cousin: phi must vanish at v = 0 (n >= 1)");
    terms.push_back(term);
  }
  const AnnulusFunction phi = [terms](cplx u, cplx v) {
    cplx acc = 0.0;
    for (const auto& t : terms) acc += t.c * std::pow(u, t.p) * std::pow(v, t.n);
    return acc;
  };
  GlueConfig cfg;
  const json c = sec.contains("config") ? sec.at("config") : json::object();
  cfg.rho0 = get_or<double>(c, "rho0", cfg.rho0);
  cfg.rho_inf = get_or<double>(c, "rho_inf", cfg.rho_inf);
  cfg.r = get_or<double>(c, "r", cfg.r);
  cfg.eta = get_or<double>(c, "eta", cfg.eta);
  cfg.M = get_or<int>(c, "M", cfg.M);
  cfg.L = get_or<int>(c, "L", cfg.L);
  cfg.ny = get_or<int>(c, "ny", cfg.ny);
  cfg.max_iter = get_or<int>(c, "max_iter", cfg.max_iter);
  cfg.tol = get_or<double>(c, "tol", opt.tol.value_or(cfg.tol));
  const auto res = savelev_iterate(phi, cfg);
  json out{{"iterations", res.iterations},
           {"residual", res.residual},
           {"changes", res.changes},
           {"low_changes", res.low_changes},
           {"norms", res.norms},
           {"norm_bound", res.norm_bound},
           {"K", cfg.K()},
           {"psi_inf_sup", res.psi_inf.sup(cfg.rho_inf, cfg.r)},
           {"psi0_sup", res.psi0.sup(cfg.rho0, cfg.r)}};
  return {out, std::nullopt};
}

CommandOutput cmd_realize(const json& doc, const Options& opt) {
  const cplx mu = doc.contains("mu") ? complex_from_json(doc.at("mu")) : cplx(0.0);
  if (get_or<int>(doc, "k", 1) != 1) throw ArgumentError("realize: only k = 1");
  const json& sec = section(doc, "realize");
  if (!sec.contains("phi") || !sec.contains("s")) throw ArgumentError("realize: 'phi' and 's' are required");
  const GermMap phi(cvec_from_json(sec.at("phi")));
  const cplx s = complex_from_json(sec.at("s"));
  RealizeConfig cfg;
  const json c = sec.contains("config") ? sec.at("config") : json::object();
  cfg.rho = get_or<double>(c, "rho", cfg.rho);
  cfg.nu = get_or<double>(c, "nu", cfg.nu);
  cfg.ny = get_or<int>(c, "ny", cfg.ny);
  cfg.tol = get_or<double>(c, "tol", opt.tol.value_or(cfg.tol));
  const auto re = realize_k1(phi, mu, s, cfg);
  const auto R = synthesize_R(re, cfg.tol);
  json mons = json::array();
  for (const auto& m : R.monomials(0.0)) mons.push_back({{"i", m.i}, {"n", m.n}, {"c", to_json(m.c)}});
  json raw = json::array();
  for (const auto& row : R.coeffs) raw.push_back(to_json(row));
  json out{{"R", mons},
           {"R_realized", raw},
           {"section", to_json(R.section)},
           {"fiber", germ_json(R.fiber)},
           {"fit_residual", R.fit_residual},
           {"overlap_defect", R.overlap_defect},
           {"derivative_bound", R.derivative_bound},
           {"cousin_residual", realization_cousin_residual(re, 0.05)},
           {"transition_residual", realization_transition_residual(re, 0.05)},
           {"omega", re.omega}};
  return {out, std::nullopt};
}

NecklaceSystem system_from_json(const json& j, int k, cplx mu) {
  NecklaceSystem sys;
  sys.k = get_or<int>(j, "k", k);
  sys.mu = j.contains("mu") ? complex_from_json(j.at("mu")) : mu;
  if (!j.contains("phi") || !j.at("phi").is_array()) throw ArgumentError("compat: systems need 'phi' (k germs)");
  for (const auto& g : j.at("phi")) sys.phi.push_back(GermMap(cvec_from_json(g)));
  sys.nus = j.contains("nus") ? cvec_from_json(j.at("nus")) : CVec(sys.k, 1.0);
  sys.sigma = get_or<std::vector<int>>(j, "sigma", {});
  if (static_cast<int>(sys.phi.size()) != sys.k || static_cast<int>(sys.nus.size()) != sys.k)
    throw ArgumentError("compat: 'phi' and 'nus' need k entries");
  return sys;
}

CommandOutput cmd_compat(const json& doc, const Options& opt) {
  const int k = get_or<int>(doc, "k", 1);
  const cplx mu = doc.contains("mu") ? complex_from_json(doc.at("mu")) : cplx(0.0);
  const json& sec = section(doc, "compat");
  const NecklaceSystem a = system_from_json(section(sec, "a"), k, mu);
  const NecklaceSystem b = sec.contains("b") ? system_from_json(sec.at("b"), k, mu) : a;
  std::vector<Word> gens;
  if (sec.contains("generators"))
    for (const auto& w : sec.at("generators")) gens.push_back(parse_word(w.get<std::string>(), a.k));
  else
    for (int j = 0; j < a.k; ++j) {
      gens.push_back({{'s', j, 1}});
      gens.push_back({{'g', j, 1}});
    }
  const int N = get_or<int>(sec, "N", 6);
  const double threshold = get_or<double>(sec, "threshold", opt.tol.value_or(1e-9));
  const auto r = check_compatibility(a, b, gens, N, threshold);
  json out{{"compatible", r.compatible}, {"failing_order", r.failing_order}, {"defect", r.defect}};
  out["failing_word"] = to_string(r.failing_word);
  out["delta"] = r.delta ? germ_json(*r.delta) : json(nullptr);
  return {out, std::nullopt};
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"dynamics", "period", "normalize", "holonomy",
                                              "bernoulli", "cousin", "realize", "compat"};
  return names;
}

CommandOutput run_command(const std::string& name, const json& doc, const Options& opt) {
  CommandOutput out;
  if (name == "dynamics") out = cmd_dynamics(doc, opt);
  else if (name == "period") out = cmd_period(doc, opt);
  else if (name == "normalize") out = cmd_normalize(doc, opt);
  else if (name == "holonomy") out = cmd_holonomy(doc, opt);
  else if (name == "bernoulli") out = cmd_bernoulli(doc, opt);
  else if (name == "cousin") out = cmd_cousin(doc, opt);
  else if (name == "realize") out = cmd_realize(doc, opt);
  else if (name == "compat") out = cmd_compat(doc, opt);
  else throw ArgumentError("unknown command '" + name + "'");
  out.result["command"] = name;
  out.result["seed"] = opt.seed;
  return out;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const json::exception*>(&e)) return 2;
  if (dynamic_cast<const DegenerateError*>(&e)) return 4;
  if (dynamic_cast<const NumericError*>(&e)) return 3;
  return 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"unfolding-lab: saddle-node unfolding toolkit"};
  app.require_subcommand(1, 1);
  std::string spec_path, out_dir;
  Options opt;
  static const std::map<std::string, std::string> about{
      {"dynamics", "Douady-Sentenac invariant, separatrices and an SVG phase portrait"},
      {"period", "model period, closed form and contour quadrature"},
      {"normalize", "formal invariants mu and U"},
      {"holonomy", "weak-separatrix holonomy germ"},
      {"bernoulli", "Bernoulli modulus of r(x) y^d"},
      {"cousin", "Cauchy-Heine splitting of a cocycle on the annulus"},
      {"realize", "k = 1 realization of a modulus"},
      {"compat", "compatibility of two necklace systems"}};
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--spec", spec_path, "JSON spec file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: JSON to stdout)");
    sub->add_option("--jobs", opt.jobs, "worker threads for grid sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "seed recorded in the output");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    opt.tol = tolerance_from_env();
    std::ifstream in(spec_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ArgumentError(std::string("spec: malformed JSON: ") + e.what());
    }
    const CommandOutput res = run_command(name, doc, opt);
    const std::string text = dump_stable(res.result);
    if (out_dir.empty()) {
      out << text;
    } else {
      std::filesystem::create_directories(out_dir);
      std::ofstream(std::filesystem::path(out_dir) / (name + ".json")) << text;
      if (res.svg) std::ofstream(std::filesystem::path(out_dir) / (name + ".svg")) << *res.svg;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}

}  // namespace unfolding::cli
