#include "sfl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <ostream>

#include <toml.hpp>

#include "sfl/bvp.hpp"
#include "sfl/construct.hpp"
#include "sfl/errors.hpp"
#include "sfl/io.hpp"
#include "sfl/ode.hpp"
#include "sfl/verify.hpp"

namespace sfl {

namespace {

namespace fs = std::filesystem;
using io::Json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(Errc::ConfigError, msg); }

// A config table with its dotted path, for diagnostics.
class Cfg {
public:
  Cfg(const toml::table* t, std::string path, int line) : t_(t), path_(std::move(path)), line_(line) {}

  bool has(std::string_view key) const { return t_ && t_->contains(key); }

  std::string where(std::string_view key) const {
    const std::string field = path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    char buf[64];
    std::snprintf(buf, sizeof buf, " (table starting at line %d)", line_);
    return field + buf;
  }

  Cfg table(std::string_view key) const {
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n) config_error("missing table " + where(key));
    if (!n->is_table()) config_error("expected a table at " + where(key));
    return Cfg(n->as_table(), path_.empty() ? std::string(key) : path_ + "." + std::string(key),
               static_cast<int>(n->source().begin.line));
  }

  double num(std::string_view key) const {
    const toml::node* n = node(key);
    if (auto v = n->value<double>()) return *v;
    config_error("expected a number at " + where(key));
  }
  double num(std::string_view key, double fallback) const { return has(key) ? num(key) : fallback; }

  int integer(std::string_view key, int fallback) const {
    if (!has(key)) return fallback;
    if (auto v = node(key)->value<int64_t>()) return static_cast<int>(*v);
    config_error("expected an integer at " + where(key));
  }

  bool flag(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    if (auto v = node(key)->value<bool>()) return *v;
    config_error("expected true or false at " + where(key));
  }

  std::string str(std::string_view key) const {
    if (auto v = node(key)->value<std::string>()) return *v;
    config_error("expected a string at " + where(key));
  }
  std::string str(std::string_view key, std::string fallback) const { return has(key) ? str(key) : fallback; }

  std::vector<double> list(std::string_view key) const {
    const toml::array* a = node(key)->as_array();
    if (!a) config_error("expected an array at " + where(key));
    std::vector<double> out;
    for (const auto& e : *a) {
      auto v = e.value<double>();
      if (!v) config_error("expected numbers in " + where(key));
      out.push_back(*v);
    }
    return out;
  }
  std::vector<double> list(std::string_view key, std::vector<double> fallback) const {
    return has(key) ? list(key) : fallback;
  }

  std::vector<Cfg> tables(std::string_view key) const {
    const toml::array* a = node(key)->as_array();
    if (!a) config_error("expected an array of tables at " + where(key));
    std::vector<Cfg> out;
    int i = 0;
    for (const auto& e : *a) {
      if (!e.is_table()) config_error("expected tables in " + where(key));
      out.emplace_back(e.as_table(), path_ + "." + std::string(key) + "[" + std::to_string(i++) + "]",
                       static_cast<int>(e.source().begin.line));
    }
    return out;
  }

private:
  const toml::node* node(std::string_view key) const {
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n) config_error("missing field " + where(key));
    return n;
  }

  const toml::table* t_;
  std::string path_;
  int line_;
};

Grid make_grid(const Cfg& root, std::optional<int> grid_n) {
  double L = 1.0;
  int N = 1024;
  if (root.has("grid")) {
    const Cfg g = root.table("grid");
    L = g.num("L", 1.0);
    N = g.integer("N", 1024);
  }
  if (grid_n) N = *grid_n;
  if (N < 32 || N > 65536 || (N & (N - 1)) != 0) config_error("grid.N must be a power of two in [2^5, 2^16]");
  if (!(L > 0)) config_error("grid.L must be positive");
  return Grid(L, N);
}

Nonlinearity make_phi(const Cfg& c) {
  const std::string model = c.str("model", "power");
  Nonlinearity phi = Nonlinearity::constant(0);
  if (model == "power") {
    PowerModel m;
    m.c = c.num("c", 1.0);
    if (c.has("gamma_left") || c.has("gamma_right")) {
      m.gamma_left = c.num("gamma_left");
      m.gamma_right = c.num("gamma_right");
    } else {
      m.gamma_left = m.gamma_right = c.num("gamma");
    }
    m.smooth = c.list("smooth", {});
    phi = Nonlinearity::power(std::move(m));
  } else if (model == "constant") {
    phi = Nonlinearity::constant(c.num("value"));
  } else {
    config_error("unknown model '" + model + "' at " + c.where("model"));
  }
  if (c.has("cap")) phi = cap_at(phi, c.num("cap"));
  if (c.flag("reflect", false)) phi = reflect(phi);
  return phi;
}

// Data profiles: constant, poly (ascending coefficients), cos / sin (offset + amp trig(freq pi x)).
std::function<double(double)> make_fn(const Cfg& c) {
  const std::string type = c.str("type");
  if (type == "constant") {
    const double v = c.num("value");
    return [v](double) { return v; };
  }
  if (type == "poly") {
    const auto k = c.list("coeffs");
    return [k](double x) {
      double s = 0;
      for (auto it = k.rbegin(); it != k.rend(); ++it) s = s * x + *it;
      return s;
    };
  }
  if (type == "cos" || type == "sin") {
    const double amp = c.num("amp", 1.0), freq = c.num("freq", 1.0), off = c.num("offset", 0.0);
    const bool cosine = type == "cos";
    return [=](double x) {
      const double t = freq * std::numbers::pi * x;
      return off + amp * (cosine ? std::cos(t) : std::sin(t));
    };
  }
  config_error("unknown profile type '" + type + "' at " + c.where("type"));
}

SeamSpec make_seam(const Cfg& c, double L, const Nonlinearity& phi) {
  SeamSpec s;
  const std::string type = c.str("type", "bump");
  if (type == "bump") {
    s = SeamSpec::bump(L, c.num("K", 1.0), c.num("lambda"), 0.5);
  } else if (type == "zeros") {
    for (const auto& z : c.tables("zeros"))
      s.zeros.push_back({z.num("x"), z.num("K_left", 1.0), z.num("lambda_left", 0.75), z.num("K_right", 1.0),
                         z.num("lambda_right", 0.75)});
    s.delta = c.num("delta", 0.05);
    const std::string conn = c.str("connector", "hermite");
    if (conn == "hermite") s.connector = Connector::Hermite;
    else if (conn == "product") s.connector = Connector::Product;
    else config_error("unknown connector '" + conn + "' at " + c.where("connector"));
  } else {
    config_error("unknown seam type '" + type + "' at " + c.where("type"));
  }
  // the exponent window comes from the target model
  const auto& m = phi.model();
  if (!m) config_error("seam constructions need a power model phi");
  s.gamma_left = m->gamma_left;
  s.gamma_right = m->gamma_right;
  return s;
}

ApproxFamily make_family(const Cfg& c, const Nonlinearity& phi) {
  const std::string kind = c.str("kind", "truncation");
  ApproxKind k;
  if (kind == "truncation") k = ApproxKind::Truncation;
  else if (kind == "homographic") k = ApproxKind::Homographic;
  else if (kind == "identity") k = ApproxKind::Identity;
  else if (kind == "exponent-drift") k = ApproxKind::ExponentDrift;
  else if (kind == "mollified") k = ApproxKind::Mollified;
  else config_error("unknown family kind '" + kind + "' at " + c.where("kind"));
  ApproxFamily f{k, phi, c.list("schedule", {10, 100, 1000, 10000}), 0.0, 0.0, 0.0, {}};
  f.drift_c = c.num("drift_c", 0.0);
  f.drift_gamma = c.num("drift_gamma", 0.0);
  f.drift_smooth = c.num("drift_smooth", 0.0);
  if (f.index_schedule.empty()) config_error("empty schedule at " + c.where("schedule"));
  return f;
}

IvpScheme make_scheme(const Cfg& c, IvpScheme fallback) {
  if (!c.has("scheme")) return fallback;
  const std::string s = c.str("scheme");
  if (s == "path") return IvpScheme::Path;
  if (s == "finite-volume") return IvpScheme::FiniteVolume;
  config_error("unknown scheme '" + s + "' at " + c.where("scheme"));
}

Json report_json(const WeakSolutionReport& r) {
  return Json{{"residual_sup", io::number(r.residual_sup)},
              {"recovered_c", io::number(r.recovered_c)},
              {"energy", io::number(r.energy)},
              {"energy_gap", io::number(r.energy_gap)},
              {"chain_rule_gap", io::number(r.chain_rule_gap)},
              {"apriori_ratio_h1", io::number(r.apriori_ratio_h1)},
              {"apriori_ratio_sup", io::number(r.apriori_ratio_sup)},
              {"membership", r.membership},
              {"tol", io::number(r.tol)},
              {"residual_pass", r.residual_pass},
              {"energy_pass", r.energy_pass},
              {"ratios_pass", r.ratios_pass},
              {"verdict", r.verdict}};
}

Json sample_json(const LimitSample& s) {
  return Json{{"n", s.n}, {"sup", io::number(s.sup)}, {"c", io::number(s.c)},
              {"min_phi", io::number(s.min_phi)}, {"phi_l2", io::number(s.phi_l2)}};
}

io::Curve limit_curve(const std::vector<LimitSample>& run) {
  io::Curve c{{"n", "sup", "c", "min_phi", "phi_l2"}, {}};
  for (const auto& s : run) c.rows.push_back({s.n, s.sup, s.c, s.min_phi, s.phi_l2});
  return c;
}

// Classification, or "Inconclusive" with the raw trends.
Json classify_json(const std::vector<LimitSample>& run, std::string& verdict) {
  Json j;
  try {
    const auto c = classify_limit(run);
    verdict = to_string(c.kind);
    j = Json{{"slope_sup", c.slope_sup}, {"slope_c", c.slope_c}, {"slope_min_phi", c.slope_min_phi},
             {"slope_phi_l2", c.slope_phi_l2}, {"sup_to_zero", c.sup_to_zero}, {"c_unbounded", c.c_unbounded},
             {"min_phi_unbounded", c.min_phi_unbounded}, {"c_stable", c.c_stable},
             {"phi_l2_stable", c.phi_l2_stable}};
  } catch (const Error& e) {
    if (e.code() != Errc::Inconclusive && e.code() != Errc::InvalidArgument) throw;
    verdict = "Inconclusive";
    j = Json{{"message", e.what()}};
  }
  return j;
}

struct Context {
  Cfg root;
  std::string name;
  fs::path dir;
  Grid grid;
  Json summary;
  bool expect_solution = true;

  void profile(const std::string& curve, const GridFn& f) const {
    io::write_profile_csv(dir / (name + "__" + curve + ".csv"), f);
    io::write_dat(dir / (name + "__" + curve + ".dat"), io::profile_curve(f, curve));
  }
  void dat(const std::string& curve, const io::Curve& c) const { io::write_dat(dir / (name + "__" + curve + ".dat"), c); }

  GridFn fn(std::string_view key, double fallback_constant) const {
    if (!root.has(key)) return GridFn::constant(grid, fallback_constant);
    return GridFn::sample(grid, make_fn(root.table(key)));
  }
  GridFn coefficient() const { return fn("a", 1.0); }
  Nonlinearity phi() const { return make_phi(root.table("phi")); }
  GridFn seam_profile(const Nonlinearity& phi) const {
    return power_seam_solution(make_seam(root.table("seam"), grid.length(), phi), grid);
  }
  // g from a profile spec, or derived from the seam solution (type = "derived", c = ...)
  GridFn datum(const GridFn& a, const Nonlinearity& phi) const {
    const Cfg g = root.table("g");
    if (g.str("type") == "derived") return derive_datum(a, seam_profile(phi), phi, g.num("c", 0.0));
    return GridFn::sample(grid, make_fn(g));
  }
  int no_solution() const { return expect_solution ? kExitNoSolution : kExitOk; }
};

int run_solve_ivp(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto h = cx.datum(a, phi);
  IvpOptions opt;
  if (cx.root.has("ivp")) {
    const Cfg c = cx.root.table("ivp");
    opt.scheme = make_scheme(c, IvpScheme::Path);
    opt.ladder_depth = c.integer("ladder_depth", opt.ladder_depth);
    opt.alpha = c.num("alpha", 0.0);
  }
  const auto s = solve_ivp(a, h, phi, cx.grid, opt);
  Json trace = Json::array();
  for (const auto& [k, d] : s.ladder_trace) trace.push_back(Json{{"level", k}, {"distance", io::number(d)}});
  cx.summary["result"] = Json{{"v_L", io::number(s.v[cx.grid.cells()])},
                              {"sup", io::number(sup_norm(s.v))},
                              {"h1_norm", io::number(h1_norm(s.v))},
                              {"positivity_certificate", s.positivity_certificate},
                              {"phi_l2_estimate", io::number(s.phi_l2_estimate)},
                              {"levels_solved", s.levels_solved},
                              {"ladder_trace", trace}};
  cx.profile("v", s.v);
  cx.profile("phi_of_v", s.phi_of_v);
  return kExitOk;
}

BvpOptions bvp_options(const Cfg& root) {
  BvpOptions o;
  if (!root.has("bvp")) return o;
  const Cfg c = root.table("bvp");
  o.scan_samples = c.integer("scan_samples", o.scan_samples);
  o.cross_check = c.flag("cross_check", o.cross_check);
  o.ladder_depth = c.integer("ladder_depth", o.ladder_depth);
  o.scheme = make_scheme(c, o.scheme);
  o.c_hints = c.list("c_hints", {});
  return o;
}

int run_solve_bvp(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto g = cx.datum(a, phi);
  const auto fam = make_family(cx.root.table("family"), phi);
  const double n = cx.root.table("bvp").num("n");
  const auto phi_n = make_approx(fam, n);
  const auto run = solve_regularized_bvp(a, g, phi_n, cx.grid, bvp_options(cx.root));
  Json roots = Json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < run.solutions.size(); ++i) {
    const auto& s = run.solutions[i];
    all_pass = all_pass && s.report.verdict;
    roots.push_back(Json{{"c", io::number(s.c)},
                         {"method", s.method == BvpMethod::ShootScan ? "ShootScan" : "NewtonFD"},
                         {"cross_check_distance", io::number(s.cross_check_distance)},
                         {"report", report_json(s.report)}});
    cx.profile("u_root" + std::to_string(i), s.u);
  }
  io::Curve scan{{"c", "endpoint_value"}, {}};
  for (const auto& [c, e] : run.scan) scan.rows.push_back({c, e});
  cx.dat("scan", scan);
  cx.summary["result"] = Json{{"n", n}, {"bracket", io::number(run.bracket)}, {"note", run.note}, {"roots", roots}};
  if (run.solutions.empty()) {
    cx.summary["status"] = "NoSolution";
    return cx.no_solution();
  }
  return all_pass ? kExitOk : kExitVerification;
}

CStarResult locate_c_star(const Context& cx, const GridFn& a, const GridFn& g, const Nonlinearity& phi) {
  CStarOptions o;
  double lo = -10.0;
  std::optional<double> hi;
  if (cx.root.has("cstar")) {
    const Cfg c = cx.root.table("cstar");
    o.kappa = c.num("kappa", o.kappa);
    o.width = c.num("width", o.width);
    o.ladder_depth = c.integer("ladder_depth", o.ladder_depth);
    lo = c.num("c_lo", lo);
    if (c.has("c_hi")) hi = c.num("c_hi");
  }
  if (!hi) {
    hi = c_star_upper_bound(a, g, phi);
    if (!std::isfinite(*hi)) config_error("cstar.c_hi is required when the upper bound is infinite");
  }
  return find_c_star(a, g, phi, cx.grid, {lo, *hi}, o);
}

Json cstar_json(const CStarResult& r) {
  return Json{{"c_star", r.c_star ? io::number(*r.c_star) : Json(nullptr)},
              {"lo", io::number(r.lo)},
              {"hi", io::number(r.hi)},
              {"tau", io::number(r.tau)},
              {"upper_bound", io::number(r.upper_bound)},
              {"within_bound", r.c_star ? *r.c_star <= r.upper_bound + r.tau : false},
              {"evaluations", r.evaluations},
              {"note", r.note}};
}

int run_find_cstar(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto g = cx.datum(a, phi);
  const auto r = locate_c_star(cx, a, g, phi);
  io::Curve trace{{"c", "endpoint_value"}, {}};
  for (const auto& [c, e] : r.trace) trace.rows.push_back({c, e});
  cx.dat("trace", trace);
  cx.summary["result"] = cstar_json(r);
  if (!r.c_star) {
    cx.summary["status"] = "NoSolution";
    return cx.no_solution();
  }
  return *r.c_star <= r.upper_bound + r.tau ? kExitOk : kExitVerification;
}

int run_sweep(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto g = cx.datum(a, phi);
  const Cfg sw = cx.root.table("sweep");
  const double kappa = sw.num("kappa", 1.0);
  std::vector<double> cs;
  std::optional<double> c_star;
  if (sw.has("offsets")) {
    const auto r = locate_c_star(cx, a, g, phi);
    cx.summary["cstar"] = cstar_json(r);
    if (!r.c_star) {
      cx.summary["status"] = "NoSolution";
      cx.summary["result"] = Json{{"samples", Json::array()}, {"note", "NoSolution: empty sweep"}};
      return cx.no_solution();
    }
    c_star = r.c_star;
    for (double d : sw.list("offsets")) cs.push_back(*c_star + d);
  } else {
    cs = sw.list("c_list");
  }
  std::sort(cs.begin(), cs.end());
  const auto rec = sweep_family(a, g, phi, cx.grid, cs, c_star, kappa);

  std::string csv = "c,endpoint_value,sup_norm,recovered_c\n";
  Json samples = Json::array();
  char buf[160];
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    const double rc = weak_solution_report(a, s.u, g, phi).recovered_c;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.c, s.endpoint, sup_norm(s.u), rc);
    csv += buf;
    samples.push_back(Json{{"c", s.c}, {"endpoint_value", io::number(s.endpoint)},
                           {"sup_norm", io::number(sup_norm(s.u))}, {"recovered_c", io::number(rc)}});
    cx.profile("U_c" + std::to_string(i), s.u);
  }
  io::write_text(cx.dir / (cx.name + "__sweep.csv"), csv);
  if (c_star) cx.dat("cstar", io::Curve{{"c_star"}, {{*c_star}}});
  Json moduli = Json::array();
  for (double m : rec.continuity_moduli) moduli.push_back(io::number(m));
  cx.summary["result"] = Json{{"samples", samples},
                              {"ordering_verdict", rec.ordering_verdict},
                              {"trend_verdict", rec.trend_verdict},
                              {"continuity_moduli", moduli}};
  return rec.ordering_verdict && rec.trend_verdict ? kExitOk : kExitVerification;
}

int run_construct(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto u = cx.seam_profile(phi);
  const double c = cx.root.has("construct") ? cx.root.table("construct").num("c", 0.0) : 0.0;
  const auto g = derive_datum(a, u, phi, c);
  const auto r = weak_solution_report(a, u, g, phi);
  const double rc = recover_constant_c(a, u, g, phi);
  cx.profile("u", u);
  cx.profile("g", g);
  cx.summary["result"] = Json{{"c", c}, {"recovered_c", io::number(rc)}, {"report", report_json(r)}};
  return r.verdict ? kExitOk : kExitVerification;
}

double tail_min(const GridFn& g) {
  const int N = g.grid().cells();
  double m = INFINITY;
  for (int j = N - N / 10; j < N; ++j) m = std::min(m, g.cell(j));
  return m;
}

int run_tail_fix(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto g = cx.datum(a, phi);
  const Cfg c = cx.root.table("tail_fix");
  const auto t = tail_fix(a, g, phi, c.num("delta"), cx.grid, c.integer("shrink_budget", 8));
  const auto r = weak_solution_report(a, t.u_hat, t.g_hat, phi);
  cx.profile("u_hat", t.u_hat);
  cx.profile("g_hat", t.g_hat);
  cx.summary["result"] = Json{{"delta", t.delta},
                              {"splice_value", io::number(t.splice_value)},
                              {"zeta_K", io::number(t.zeta_K)},
                              {"shrinks", t.shrinks},
                              {"g_hat_tail_min", io::number(tail_min(t.g_hat))},
                              {"report", report_json(r)}};
  return r.verdict ? kExitOk : kExitVerification;
}

int run_verify(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const Cfg uc = cx.root.table("u");
  const auto u = uc.str("type") == "seam" ? cx.seam_profile(phi) : GridFn::sample(cx.grid, make_fn(uc));
  const auto g = cx.datum(a, phi);
  const auto r = weak_solution_report(a, u, g, phi);
  const auto m = membership_U(phi, u);
  const auto f = nonexistence_flags(g, phi);
  bool expect = true;
  Json cones = Json::array();
  if (cx.root.has("verify")) {
    const Cfg v = cx.root.table("verify");
    expect = v.flag("expect_verdict", true);
    const int N = cx.grid.cells();
    for (double k : v.list("cone_k", {})) {
      for (int node : {0, N}) {
        if (u[node] != 0.0) continue;
        const auto cc = forbidden_cone_check(u, node, k);
        cones.push_back(Json{{"x0", cx.grid.node(node)}, {"k", k}, {"ok", cc.ok}, {"delta", cc.delta}});
        io::Curve ov{{"x", "w", "cone"}, {}};
        const int span = std::max(8, 2 * cc.nodes);
        for (int j = std::max(0, node - span); j <= std::min(N, node + span); ++j)
          ov.rows.push_back({cx.grid.node(j), u[j], k * (cx.grid.node(j) - cx.grid.node(node))});
        char tag[64];
        std::snprintf(tag, sizeof tag, "cone_x%d_k%g", node, k);
        cx.dat(tag, ov);
      }
    }
  }
  Json refinements = Json::array();
  for (double x : m.refinements) refinements.push_back(io::number(x));
  cx.summary["result"] = Json{
      {"report", report_json(r)},
      {"membership", Json{{"member", m.member}, {"phi_l2", io::number(m.phi_l2)}, {"refinements", refinements},
                          {"diagnostic", m.diagnostic}}},
      {"flags", Json{{"bounded_below", f.bounded_below}, {"sign_class", to_string(f.sign_class)}, {"u_empty", f.u_empty}}},
      {"cones", cones},
      {"expect_verdict", expect}};
  cx.profile("u", u);
  return r.verdict == expect ? kExitOk : kExitVerification;
}

const BvpSolution* lowest(const BvpRun& run) { return run.solutions.empty() ? nullptr : &run.solutions.front(); }

int run_alternative(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto g = cx.datum(a, phi);
  const auto fam = make_family(cx.root.table("family"), phi);
  auto opt = bvp_options(cx.root);
  std::vector<LimitSample> run;
  Json ladder = Json::array();
  for (std::size_t i = 0; i < fam.index_schedule.size(); ++i) {
    const double n = fam.index_schedule[i];
    const auto phi_n = make_approx(fam, n);
    const auto r = solve_regularized_bvp(a, g, phi_n, cx.grid, opt);
    const BvpSolution* s = lowest(r);
    if (!s) {
      ladder.push_back(Json{{"n", n}, {"note", r.note}});
      continue;
    }
    run.push_back(limit_sample(n, s->u, s->c, phi_n));
    Json e = sample_json(run.back());
    e["roots"] = r.solutions.size();
    ladder.push_back(e);
    cx.profile("u_n" + std::to_string(i), s->u);
  }
  cx.dat("ladder", limit_curve(run));
  std::string verdict;
  Json evidence = classify_json(run, verdict);
  cx.summary["verdict"] = verdict;
  cx.summary["result"] = Json{{"ladder", ladder}, {"evidence", evidence}};
  std::string expect = cx.root.has("alternative") ? cx.root.table("alternative").str("expect", "") : "";
  if (verdict == "Inconclusive") return kExitVerification;
  return expect.empty() || expect == verdict ? kExitOk : kExitVerification;
}

int run_stability(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto u0 = cx.seam_profile(phi);
  const double c0 = cx.root.has("stability") ? cx.root.table("stability").num("c", 0.0) : 0.0;
  const double tol = cx.root.has("stability") ? cx.root.table("stability").num("tol", 1e-2) : 1e-2;
  const auto g = derive_datum(a, u0, phi, c0);
  const auto fam = make_family(cx.root.table("family"), phi);
  auto opt = bvp_options(cx.root);
  std::vector<LimitSample> run;
  Json ladder = Json::array();
  double last = INFINITY;
  std::vector<double> hints = opt.c_hints;
  for (std::size_t i = 0; i < fam.index_schedule.size(); ++i) {
    const double n = fam.index_schedule[i];
    const auto phi_n = make_approx(fam, n);
    const auto gn = stability_datum(g, phi, phi_n, u0);
    opt.c_hints = hints;
    const auto r = solve_regularized_bvp(a, gn, phi_n, cx.grid, opt);
    // the member of the solution set nearest u0; the others are listed by c
    const BvpSolution* best = nullptr;
    Json cs = Json::array();
    for (const auto& s : r.solutions) {
      cs.push_back(io::number(s.c));
      if (!best || sup_distance(s.u, u0) < sup_distance(best->u, u0)) best = &s;
    }
    double gap = 0;
    for (int j = 0; j < cx.grid.cells(); ++j) gap += (gn.cell(j) - g.cell(j)) * (gn.cell(j) - g.cell(j));
    Json e{{"n", n}, {"g_distance_l2", io::number(std::sqrt(gap * cx.grid.dx()))}, {"roots", cs}};
    if (best) {
      last = sup_distance(best->u, u0);
      run.push_back(limit_sample(n, best->u, best->c, phi_n));
      e["c"] = io::number(best->c);
      e["sup_distance"] = io::number(last);
      hints = {best->c};
      cx.profile("u_n" + std::to_string(i), best->u);
    } else {
      e["note"] = r.note;
      last = INFINITY;
    }
    ladder.push_back(e);
  }
  cx.profile("u0", u0);
  cx.dat("ladder", limit_curve(run));
  std::string verdict;
  Json evidence = classify_json(run, verdict);
  cx.summary["verdict"] = verdict;
  cx.summary["result"] = Json{{"ladder", ladder}, {"final_sup_distance", io::number(last)}, {"tol", tol},
                              {"evidence", evidence}};
  return last <= tol ? kExitOk : kExitVerification;
}

int run_instability(Context& cx) {
  const auto a = cx.coefficient();
  const auto phi = cx.phi();
  const auto u0 = cx.seam_profile(phi);
  const auto g = derive_datum(a, u0, phi, 0.0);
  const auto fam = make_family(cx.root.table("family"), phi);
  const Cfg ic = cx.root.table("instability");
  const auto clip = ic.list("clip");
  const auto eps = ic.list("eps");
  if (clip.size() != eps.size()) config_error("instability.clip and instability.eps differ in length");
  std::vector<GridFn> gbar;
  for (double m : clip) {
    auto cells = g.cell_values();
    for (double& v : cells) v = std::max(v, -m);
    gbar.push_back(GridFn::from_cells(cx.grid, std::move(cells)));
  }
  const auto s = instability_schedule(gbar, fam, eps, a, cx.grid, bvp_options(cx.root));
  Json entries = Json::array();
  for (const auto& e : s.entries)
    entries.push_back(Json{{"n", e.n}, {"clip", clip[e.n]}, {"eps", eps[e.n]}, {"k_star", e.k_star},
                           {"k_bar", e.k_bar}, {"v_l2", io::number(e.v_l2)}, {"c", io::number(e.c)}, {"note", e.note}});
  cx.dat("diagonal", limit_curve(s.diagonal));
  std::string verdict;
  Json evidence = classify_json(s.diagonal, verdict);
  cx.summary["verdict"] = verdict;
  cx.summary["result"] = Json{{"entries", entries}, {"evidence", evidence}};
  return verdict == "ZeroLimit" ? kExitOk : kExitVerification;
}

int dispatch(Context& cx, const std::string& kind) {
  if (kind == "solve-ivp") return run_solve_ivp(cx);
  if (kind == "solve-bvp") return run_solve_bvp(cx);
  if (kind == "sweep-c") return run_sweep(cx);
  if (kind == "find-cstar") return run_find_cstar(cx);
  if (kind == "construct") return run_construct(cx);
  if (kind == "tail-fix") return run_tail_fix(cx);
  if (kind == "verify") return run_verify(cx);
  if (kind == "alternative") return run_alternative(cx);
  if (kind == "stability") return run_stability(cx);
  if (kind == "instability") return run_instability(cx);
  config_error("unknown kind '" + kind + "'");
}

}  // namespace

int run_scenario(const RunRequest& req, std::ostream& log, std::ostream& err) {
  toml::table doc;
  try {
    doc = toml::parse_file(req.config.string());
  } catch (const toml::parse_error& e) {
    err << "ConfigError: " << req.config.string() << ":" << e.source().begin.line << ": " << e.description() << "\n";
    return kExitConfig;
  }

  std::optional<Context> cx;
  std::string kind;
  try {
    const Cfg root(&doc, "", 1);
    kind = root.str("kind", req.kind);
    if (!req.kind.empty() && kind != req.kind)
      config_error("config kind '" + kind + "' does not match the command '" + req.kind + "'");
    if (std::find(kScenarioKinds.begin(), kScenarioKinds.end(), kind) == kScenarioKinds.end())
      config_error("unknown kind '" + kind + "' at " + root.where("kind"));
    const std::string name = root.str("name", req.config.stem().string());
    fs::path base = "sfl_out";
    if (const char* env = std::getenv("SFL_OUT"); env && *env) base = env;
    if (req.out) base = *req.out;
    cx.emplace(Context{root, name, base / name, make_grid(root, req.grid_n), Json::object(),
                       root.flag("expect_solution", true)});
    cx->summary["name"] = name;
    cx->summary["kind"] = kind;
    cx->summary["grid"] = Json{{"L", cx->grid.length()}, {"N", cx->grid.cells()}};
    cx->summary["status"] = "ok";
    fs::remove_all(cx->dir);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == Errc::ConfigError ? kExitConfig : kExitNumericError;
  } catch (const std::exception& e) {
    err << "ConfigError: " << e.what() << "\n";
    return kExitConfig;
  }

  int code;
  try {
    code = dispatch(*cx, kind);
    if (code == kExitVerification) cx->summary["status"] = "VerificationFailure";
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) {
      err << e.what() << "\n";
      return kExitConfig;
    }
    code = kExitNumericError;
    cx->summary["status"] = "error";
    cx->summary["error"] = Json{{"code", std::string(errc_name(e.code()))}, {"message", e.what()}};
  }
  cx->summary["exit_code"] = code;
  try {
    io::write_json(cx->dir / "summary.json", cx->summary);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitNumericError;
  }
  if (!req.quiet) {
    log << cx->summary["name"].get<std::string>() << " [" << kind << "] " << cx->summary["status"].get<std::string>();
    if (cx->summary.contains("verdict")) log << " " << cx->summary["verdict"].get<std::string>();
    log << " -> " << cx->dir.string() << " (exit " << code << ")\n";
  }
  return code;
}

}  // namespace sfl
