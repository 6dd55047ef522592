// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stefanlab {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// Walks one JSON object, records violations under its pointer path and
// remembers which keys were consumed so the rest can be rejected.
class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<std::string>& errs)
      : node_(node), path_(std::move(path)), errs_(errs) {
    ok_ = node.is_object();
    if (!ok_) errs_.push_back((path_.empty() ? "/" : path_) + ": expected an object");
  }

  bool ok() const { return ok_; }
  bool has(const char* key) const { return ok_ && node_.contains(key); }
  std::string at(const char* key) const { return path_ + "/" + key; }
  void fail(const char* key, const std::string& msg) { errs_.push_back(at(key) + ": " + msg); }

  void number(const char* key, double& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number()) return fail(key, "expected a number");
    out = v->get<double>();
  }
  template <class I>
  void integer(const char* key, I& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) return fail(key, "expected an integer");
    out = v->get<I>();
  }
  void string(const char* key, std::string& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_string()) return fail(key, "expected a string");
    out = v->get<std::string>();
  }
  void point(const char* key, Point& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_array() || v->empty() || v->size() > 2 || !std::all_of(v->begin(), v->end(), [](const json& e) {
          return e.is_number();
        })) {
      return fail(key, "expected an array of 1 or 2 numbers");
    }
    out = {(*v)[0].get<double>(), v->size() > 1 ? (*v)[1].get<double>() : 0.0};
  }
  void numbers(const char* key, std::vector<double>& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); })) {
      return fail(key, "expected an array of numbers");
    }
    out = v->get<std::vector<double>>();
  }
  const json* object(const char* key) {
    const json* v = take(key);
    return v;
  }

  /// Rejects keys that were never read.
  void finish() {
    if (!ok_) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) errs_.push_back(path_ + "/" + it.key() + ": unknown key");
    }
  }

 private:
  const json* take(const char* key) {
    if (!ok_) return nullptr;
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& node_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::set<std::string> seen_;
  bool ok_ = false;
};

void read_domain(Reader& parent, const char* key, DomainSpec& d, std::vector<std::string>& errs) {
  const json* node = parent.object(key);
  if (!node) return;
  Reader r(*node, parent.at(key), errs);
  if (!r.ok()) return;
  r.string("type", d.type);
  if (d.type == "interval") {
    r.number("lo", d.lo);
    r.number("hi", d.hi);
    if (!(d.hi > d.lo)) r.fail("hi", "interval needs hi > lo");
  } else if (d.type == "halfline") {
    r.number("lo", d.lo);
  } else if (d.type == "ball") {
    r.point("center", d.center);
    r.number("radius", d.radius);
    if (!(d.radius > 0.0)) r.fail("radius", "radius must be positive");
  } else {
    r.fail("type", "unknown domain type '" + d.type + "' (interval, halfline, ball)");
  }
  r.finish();
}

void read_field(Reader& parent, const char* key, FieldSpec& f, std::vector<std::string>& errs) {
  const json* node = parent.object(key);
  if (!node) return;
  Reader r(*node, parent.at(key), errs);
  if (!r.ok()) return;
  r.string("type", f.type);
  if (f.type == "constant") {
    r.number("value", f.value);
  } else if (f.type == "sine") {
    r.number("amplitude", f.amplitude);
    r.number("frequency", f.frequency);
  } else if (f.type == "log_modulus") {
    r.number("c_g", f.c_g);
    r.number("delta", f.delta);
    r.number("R", f.R);
    r.point("center", f.center);
    if (!(f.c_g > 0.0)) r.fail("c_g", "c_g must be positive");
    if (!(f.delta > 0.0 && f.delta < 1.0)) r.fail("delta", "delta must lie in (0,1)");
    if (!(f.R > 0.0)) r.fail("R", "R must be positive");
  } else {
    r.fail("type", "unknown field type '" + f.type + "' (constant, sine, log_modulus)");
  }
  r.finish();
}

void read_problem(const json& node, ProblemSpec& pb, std::vector<std::string>& errs) {
  Reader r(node, "/problem", errs);
  if (!r.ok()) return;
  r.integer("dim", pb.dim);
  if (const json* box = r.object("box")) {
    Reader b(*box, "/problem/box", errs);
    b.number("lo", pb.box_lo);
    b.number("hi", pb.box_hi);
    b.integer("nodes", pb.nodes);
    b.number("r_inf", pb.r_inf);
    if (!(pb.box_hi > pb.box_lo)) b.fail("hi", "box needs hi > lo");
    if (pb.nodes < 3) b.fail("nodes", "at least 3 nodes per axis are required");
    const double diam = (pb.box_hi - pb.box_lo) * (pb.dim == 2 ? std::sqrt(2.0) : 1.0);
    if (!(pb.r_inf >= diam)) b.fail("r_inf", "truncation radius must be at least the box diameter");
    b.finish();
  }
  r.number("s", pb.s);
  r.number("p", pb.p);
  r.string("kernel", pb.kernel);
  r.number("lambda", pb.lambda);
  r.number("epsilon", pb.epsilon);
  r.number("T", pb.T);
  read_domain(r, "omega", pb.omega, errs);
  read_field(r, "g", pb.g, errs);
  read_field(r, "u0", pb.u0, errs);

  if (pb.dim != 1 && pb.dim != 2) r.fail("dim", "dimension must be 1 or 2");
  if (!(pb.p > 2.0)) r.fail("p", "p must exceed 2");
  if (!(pb.s > 0.0 && pb.s < 1.0)) r.fail("s", "s must lie in (0,1)");
  if (pb.kernel != "constant" && pb.kernel != "sinusoidal") {
    r.fail("kernel", "unknown kernel '" + pb.kernel + "' (constant, sinusoidal)");
  }
  if (!(pb.lambda >= 1.0)) r.fail("lambda", "lambda must be at least 1");
  if (pb.kernel == "sinusoidal" && pb.lambda < 2.0) r.fail("lambda", "the sinusoidal kernel needs lambda >= 2");
  if (!(pb.epsilon > 0.0 && pb.epsilon < 1.0)) r.fail("epsilon", "epsilon must lie in (0,1)");
  if (!(pb.T > 0.0)) r.fail("T", "T must be positive");
  r.finish();
}

void read_solver(const json& node, SolverConfig& sc, std::vector<std::string>& errs) {
  Reader r(node, "/solver", errs);
  if (!r.ok()) return;
  std::string policy = sc.dt_policy == DtPolicy::fixed ? "fixed" : "intrinsic";
  r.string("dt_policy", policy);
  if (policy == "fixed") {
    sc.dt_policy = DtPolicy::fixed;
  } else if (policy == "intrinsic") {
    sc.dt_policy = DtPolicy::intrinsic;
  } else {
    r.fail("dt_policy", "dt_policy must be 'fixed' or 'intrinsic'");
  }
  r.integer("steps", sc.steps);
  r.number("c_t", sc.c_t);
  r.number("newton_tol", sc.newton_tol);
  r.integer("newton_max", sc.newton_max);
  r.number("damping", sc.damping);
  if (sc.steps < 1) r.fail("steps", "steps must be positive");
  if (!(sc.c_t > 0.0)) r.fail("c_t", "c_t must be positive");
  if (!(sc.newton_tol > 0.0)) r.fail("newton_tol", "newton_tol must be positive");
  if (sc.newton_max < 1) r.fail("newton_max", "newton_max must be positive");
  if (!(sc.damping > 0.0 && sc.damping < 1.0)) r.fail("damping", "damping must lie in (0,1)");
  r.finish();
}

void read_analysis(const json& node, AnalysisSpec& an, std::vector<std::string>& errs) {
  Reader r(node, "/analysis", errs);
  if (!r.ok()) return;
  if (const json* lad = r.object("ladder")) {
    Reader l(*lad, "/analysis/ladder", errs);
    l.point("x0", an.ladder.x0);
    if (l.has("t0") && (*lad)["t0"].is_null()) {
      an.ladder_t0_is_T = true;
      l.object("t0");
    } else if (l.has("t0")) {
      l.number("t0", an.ladder.t0);
      an.ladder_t0_is_T = false;
    }
    l.number("rho0", an.ladder.rho0);
    l.number("ratio", an.ladder.ratio);
    l.integer("levels", an.ladder.levels);
    l.number("theta", an.ladder.theta);
    if (!(an.ladder.rho0 > 0.0)) l.fail("rho0", "rho0 must be positive");
    if (!(an.ladder.ratio > 0.0 && an.ladder.ratio < 1.0)) l.fail("ratio", "ratio must lie in (0,1)");
    if (an.ladder.levels < 3) l.fail("levels", "at least 3 levels are needed for a fit");
    if (!(an.ladder.theta > 0.0)) l.fail("theta", "theta must be positive");
    l.finish();
  }
  if (const json* tails = r.object("tails")) {
    if (!tails->is_array()) {
      r.fail("tails", "expected an array of objects");
    } else {
      an.tails.clear();
      for (std::size_t k = 0; k < tails->size(); ++k) {
        TailQuery q;
        Reader t((*tails)[k], "/analysis/tails/" + std::to_string(k), errs);
        if (!t.ok()) continue;
        t.point("x0", q.x0);
        t.number("rho", q.rho);
        t.number("t_lo", q.t_lo);
        t.number("t_hi", q.t_hi);
        if (!(q.rho > 0.0)) t.fail("rho", "rho must be positive");
        t.finish();
        an.tails.push_back(q);
      }
    }
  }
  if (const json* ca = r.object("caccioppoli")) {
    Reader c(*ca, "/analysis/caccioppoli", errs);
    c.point("x0", an.audit_x0);
    c.number("radius", an.audit_radius);
    c.number("theta", an.audit_theta);
    c.number("level", an.audit_level);
    c.integer("sign", an.audit_sign);
    c.number("c_audit", an.c_audit);
    if (!(an.audit_radius > 0.0)) c.fail("radius", "radius must be positive");
    if (!(an.audit_theta > 0.0)) c.fail("theta", "theta must be positive");
    if (an.audit_sign != 1 && an.audit_sign != -1) c.fail("sign", "sign must be 1 or -1");
    if (!(an.c_audit > 0.0)) c.fail("c_audit", "c_audit must be positive");
    c.finish();
  }
  if (const json* de = r.object("density")) {
    Reader d(*de, "/analysis/density", errs);
    d.point("x0", an.density_x0);
    d.numbers("radii", an.density_radii);
    d.number("alpha0", an.alpha0);
    if (an.density_radii.empty() ||
        !std::all_of(an.density_radii.begin(), an.density_radii.end(), [](double v) { return v > 0.0; })) {
      d.fail("radii", "radii must be a nonempty list of positive numbers");
    }
    if (!(an.alpha0 > 0.0 && an.alpha0 <= 1.0)) d.fail("alpha0", "alpha0 must lie in (0,1]");
    d.finish();
  }
  if (const json* le = r.object("lemma")) {
    Reader l(*le, "/analysis/lemma", errs);
    l.integer("n_max", an.lemma_n_max);
    l.integer("tech1_cases", an.tech1_cases);
    l.integer("tech1_n_max", an.tech1_n_max);
    if (an.lemma_n_max < 1) l.fail("n_max", "n_max must be positive");
    if (an.tech1_cases < 0) l.fail("tech1_cases", "tech1_cases must be nonnegative");
    if (an.tech1_n_max < 1) l.fail("tech1_n_max", "tech1_n_max must be positive");
    l.finish();
  }
  r.finish();
}

void read_continuation(const json& node, ContinuationSpec& cs, std::vector<std::string>& errs) {
  Reader r(node, "/continuation", errs);
  if (!r.ok()) return;
  r.numbers("eps_list", cs.eps_list);
  r.number("delta_resolve", cs.delta_resolve);
  r.number("max_band_fraction", cs.max_band_fraction);
  r.number("max_spread", cs.max_spread);
  if (cs.eps_list.empty()) r.fail("eps_list", "eps_list must not be empty");
  for (std::size_t i = 0; i < cs.eps_list.size(); ++i) {
    if (!(cs.eps_list[i] > 0.0 && cs.eps_list[i] < 1.0)) r.fail("eps_list", "each epsilon must lie in (0,1)");
    if (i > 0 && !(cs.eps_list[i] < cs.eps_list[i - 1])) r.fail("eps_list", "eps_list must be strictly decreasing");
  }
  if (!(cs.delta_resolve >= 0.0)) r.fail("delta_resolve", "delta_resolve must be nonnegative");
  if (!(cs.max_band_fraction > 0.0 && cs.max_band_fraction <= 1.0)) {
    r.fail("max_band_fraction", "max_band_fraction must lie in (0,1]");
  }
  if (!(cs.max_spread > 0.0)) r.fail("max_spread", "max_spread must be positive");
  r.finish();
}

ordered point_json(const Point& x, int dim) {
  return dim == 2 ? ordered::array({x[0], x[1]}) : ordered::array({x[0]});
}

ordered domain_json(const DomainSpec& d, int dim) {
  ordered o;
  o["type"] = d.type;
  if (d.type == "interval") {
    o["lo"] = d.lo;
    o["hi"] = d.hi;
  } else if (d.type == "halfline") {
    o["lo"] = d.lo;
  } else {
    o["center"] = point_json(d.center, dim);
    o["radius"] = d.radius;
  }
  return o;
}

ordered field_json(const FieldSpec& f, int dim) {
  ordered o;
  o["type"] = f.type;
  if (f.type == "constant") {
    o["value"] = f.value;
  } else if (f.type == "sine") {
    o["amplitude"] = f.amplitude;
    o["frequency"] = f.frequency;
  } else {
    o["c_g"] = f.c_g;
    o["delta"] = f.delta;
    o["R"] = f.R;
    o["center"] = point_json(f.center, dim);
  }
  return o;
}

}  // namespace

bool DomainSpec::contains(const Point& x, int dim) const {
  if (type == "interval") {
    const bool in0 = x[0] > lo && x[0] < hi;
    return dim == 1 ? in0 : in0 && x[1] > lo && x[1] < hi;
  }
  if (type == "halfline") return x[0] > lo;
  return distance(x, center, dim) < radius;
}

double FieldSpec::operator()(const Point& x, int dim) const {
  if (type == "constant") return value;
  if (type == "sine") return amplitude * std::sin(frequency * x[0]);
  const double r = distance(x, center, dim);
  if (r == 0.0) return 0.0;
  return c_g * std::pow(1.0 + std::log(R / std::min(r, R)), -delta);
}

double FieldSpec::far_value() const {
  if (type == "constant") return value;
  if (type == "log_modulus") return c_g;
  return 0.0;
}

LatticeProblem ProblemSpec::build() const {
  LatticeProblem pb;
  pb.name = preset.empty() ? "inline" : preset;
  pb.s = s;
  pb.p = p;
  pb.kernel = kernel == "sinusoidal" ? KernelSpec::sinusoidal() : KernelSpec::constant(1.0, lambda);
  if (kernel == "sinusoidal") pb.kernel.lambda = lambda;
  pb.grid = dim == 2 ? Grid::square(box_lo, box_hi, nodes, r_inf) : Grid::line(box_lo, box_hi, nodes, r_inf);
  const FieldSpec gs = g;
  const int d = dim;
  pb.g = [gs, d](const Point& x, double) { return gs(x, d); };
  pb.g_far = g.far_value();
  pb.T = T;
  pb.epsilon = epsilon;
  const std::size_t n = pb.grid.size();
  pb.omega_mask.resize(n);
  pb.u0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = pb.grid.coord(i);
    const bool in = omega.contains(x, dim);
    pb.omega_mask[i] = in ? 1 : 0;
    pb.u0[i] = in ? u0(x, dim) : g(x, dim);
  }
  return pb;
}

ConfigError::ConfigError(std::vector<std::string> v)
    : Error(Errc::schema_violation, "config rejected: " + join(v, "; ")), violations(std::move(v)) {}

std::vector<std::string> preset_names() { return {"melt1d", "twophase1d", "logbdy", "constant"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.solver.steps = 400;
  c.problem.preset = name;
  c.output = "out/" + name;
  ProblemSpec& pb = c.problem;
  AnalysisSpec& an = c.analysis;
  if (name == "melt1d") {
    pb.omega = {"interval", -1.0, 1.0};
    pb.g.type = "constant";
    pb.g.value = 1.0;
    pb.u0.type = "constant";
    pb.u0.value = -1.0;
    an.ladder = {{-0.5, 0.0}, 0.0, 0.5, 0.9, 8, 4.0};
    an.tails = {{{-0.5, 0.0}, 0.25, 0.0, 0.0}};
  } else if (name == "twophase1d") {
    pb.omega = {"interval", -1.0, 1.0};
    pb.g.type = "constant";
    pb.g.value = 0.0;
    pb.u0.type = "sine";
    pb.u0.amplitude = 0.8;
    pb.u0.frequency = std::numbers::pi;
    an.ladder = {{0.0, 0.0}, 0.0, 0.5, 0.9, 8, 4.0};
    an.tails = {{{0.0, 0.0}, 0.25, 0.0, 0.0}};
    an.audit_x0 = {0.5, 0.0};
  } else if (name == "logbdy") {
    pb.omega = {"interval", 0.0, 1.5};
    pb.g.type = "log_modulus";
    pb.g.c_g = 0.5;
    pb.g.delta = 0.9;
    pb.g.R = 1.0;
    pb.g.center = {0.0, 0.0};
    pb.u0.type = "constant";
    pb.u0.value = -0.5;
    an.ladder = {{0.0, 0.0}, 0.0, 0.5, 0.9, 8, 16.0};
    an.tails = {{{0.0, 0.0}, 0.25, 0.0, 0.0}};
    an.audit_x0 = {0.75, 0.0};
    an.density_x0 = {0.0, 0.0};
  } else if (name == "constant") {
    pb.omega = {"interval", -1.0, 1.0};
    pb.g.type = "constant";
    pb.g.value = 0.3;
    pb.u0.type = "constant";
    pb.u0.value = 0.3;
    pb.T = 0.1;
    c.solver.steps = 20;
    an.ladder = {{0.0, 0.0}, 0.0, 0.5, 0.9, 8, 4.0};
    an.tails = {{{0.0, 0.0}, 0.25, 0.0, 0.0}};
    an.audit_x0 = {0.0, 0.0};
    an.audit_level = 0.5;
  } else {
    throw Error(Errc::invalid_argument, "unknown preset '" + name + "' (melt1d, twophase1d, logbdy, constant)");
  }
  return c;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({"/: " + std::string(e.what())});
  }
  std::vector<std::string> errs;
  RunConfig cfg;
  cfg.solver.steps = 400;
  if (!doc.is_object()) throw ConfigError({"/: expected an object"});

  // A preset seeds every section before the explicit keys are applied.
  if (doc.contains("problem") && doc["problem"].is_object() && doc["problem"].contains("preset")) {
    const json& name = doc["problem"]["preset"];
    if (!name.is_string()) {
      errs.push_back("/problem/preset: expected a string");
    } else {
      try {
        cfg = preset(name.get<std::string>());
      } catch (const Error& e) {
        errs.push_back("/problem/preset: " + std::string(e.what()));
      }
    }
  }

  Reader top(doc, "", errs);
  if (const json* pb = top.object("problem")) {
    json stripped = *pb;
    if (stripped.is_object()) stripped.erase("preset");
    read_problem(stripped, cfg.problem, errs);
  }
  if (const json* s = top.object("solver")) read_solver(*s, cfg.solver, errs);
  if (const json* a = top.object("analysis")) read_analysis(*a, cfg.analysis, errs);
  if (const json* c = top.object("continuation")) read_continuation(*c, cfg.continuation, errs);
  top.string("output", cfg.output);
  top.finish();

  if (errs.empty()) {
    try {
      cfg.problem.build().validate();
    } catch (const Error& e) {
      errs.push_back("/problem: " + std::string(e.what()));
    }
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return cfg;
}

std::string emit_config(const RunConfig& c) {
  const ProblemSpec& pb = c.problem;
  const int dim = pb.dim;
  ordered problem;
  if (!pb.preset.empty()) problem["preset"] = pb.preset;
  problem["dim"] = pb.dim;
  problem["box"] = {{"lo", pb.box_lo}, {"hi", pb.box_hi}, {"nodes", pb.nodes}, {"r_inf", pb.r_inf}};
  problem["s"] = pb.s;
  problem["p"] = pb.p;
  problem["kernel"] = pb.kernel;
  problem["lambda"] = pb.lambda;
  problem["epsilon"] = pb.epsilon;
  problem["T"] = pb.T;
  problem["omega"] = domain_json(pb.omega, dim);
  problem["g"] = field_json(pb.g, dim);
  problem["u0"] = field_json(pb.u0, dim);

  ordered solver;
  solver["dt_policy"] = c.solver.dt_policy == DtPolicy::fixed ? "fixed" : "intrinsic";
  solver["steps"] = c.solver.steps;
  solver["c_t"] = c.solver.c_t;
  solver["newton_tol"] = c.solver.newton_tol;
  solver["newton_max"] = c.solver.newton_max;
  solver["damping"] = c.solver.damping;

  const AnalysisSpec& an = c.analysis;
  ordered ladder;
  ladder["x0"] = point_json(an.ladder.x0, dim);
  ladder["t0"] = an.ladder_t0_is_T ? ordered(nullptr) : ordered(an.ladder.t0);
  ladder["rho0"] = an.ladder.rho0;
  ladder["ratio"] = an.ladder.ratio;
  ladder["levels"] = an.ladder.levels;
  ladder["theta"] = an.ladder.theta;
  ordered tails = ordered::array();
  for (const TailQuery& q : an.tails) {
    ordered t;
    t["x0"] = point_json(q.x0, dim);
    t["rho"] = q.rho;
    t["t_lo"] = q.t_lo;
    t["t_hi"] = q.t_hi;
    tails.push_back(t);
  }
  ordered audit;
  audit["x0"] = point_json(an.audit_x0, dim);
  audit["radius"] = an.audit_radius;
  audit["theta"] = an.audit_theta;
  audit["level"] = an.audit_level;
  audit["sign"] = an.audit_sign;
  audit["c_audit"] = an.c_audit;
  ordered density;
  density["x0"] = point_json(an.density_x0, dim);
  density["radii"] = an.density_radii;
  density["alpha0"] = an.alpha0;
  ordered lemma;
  lemma["n_max"] = an.lemma_n_max;
  lemma["tech1_cases"] = an.tech1_cases;
  lemma["tech1_n_max"] = an.tech1_n_max;
  ordered analysis;
  analysis["ladder"] = ladder;
  analysis["tails"] = tails;
  analysis["caccioppoli"] = audit;
  analysis["density"] = density;
  analysis["lemma"] = lemma;

  ordered cont;
  cont["eps_list"] = c.continuation.eps_list;
  cont["delta_resolve"] = c.continuation.delta_resolve;
  cont["max_band_fraction"] = c.continuation.max_band_fraction;
  cont["max_spread"] = c.continuation.max_spread;

  ordered doc;
  doc["problem"] = problem;
  doc["solver"] = solver;
  doc["analysis"] = analysis;
  doc["continuation"] = cont;
  doc["output"] = c.output;
  return doc.dump(2) + "\n";
}

}  // namespace stefanlab
