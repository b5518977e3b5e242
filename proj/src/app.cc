#include "lpvi/app.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "lpvi/errors.h"

namespace lpvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::kSe2Vehicle:
      return "se2_vehicle";
    case ModelKind::kBallPlate:
      return "ball_plate";
    case ModelKind::kFreeRigidBody:
      return "free_rigid_body";
  }
  return "?";
}

double RunConfig::final_time() const {
  if (is_ocp() && convention == BoundaryConvention::kStaggered) return (N - 1) * h;
  return N * h;
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("config field `" + field + "`: " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) field_error(path + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) field_error(field, "must be finite");
  return d;
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) field_error(field, "expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) field_error(field, "expected a string");
  return v.get<std::string>();
}

VectorXd vector_of(const json& v, int size, const std::string& field) {
  if (!v.is_array() || static_cast<int>(v.size()) != size) {
    field_error(field, "expected an array of " + std::to_string(size) + " numbers");
  }
  VectorXd out(size);
  for (int i = 0; i < size; ++i) out(i) = number(v[i], field + "[" + std::to_string(i) + "]");
  return out;
}

// 3x3 row-major, flat or nested.
GroupElement group_of(const json& v, GroupTag tag, const std::string& field) {
  json flat = json::array();
  if (v.is_array() && v.size() == 3 && v[0].is_array()) {
    for (const auto& row : v) {
      if (!row.is_array() || row.size() != 3) field_error(field, "expected a 3x3 array");
      for (const auto& e : row) flat.push_back(e);
    }
  } else {
    flat = v;
  }
  const VectorXd e = vector_of(flat, 9, field);
  GroupElement g{Mat3::Identity(), tag};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g.matrix(i, j) = e(3 * i + j);
  }
  if (!is_valid(g, 1e-9)) {
    field_error(field, std::string("not an element of ") + group_name(tag));
  }
  return g;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) field_error(path + key, "unknown field");
  }
}

template <typename T>
void optional_number(const json& obj, const char* key, const std::string& path, T& out) {
  if (obj.contains(key)) out = number(obj.at(key), path + key);
}

}  // namespace

RunConfig parse_config(const json& j) {
  check_keys(j, {"model", "params", "boundary", "N", "h", "t0", "convention", "trivialization",
                 "retraction", "solver", "output"},
             "");
  RunConfig c;
  const std::string model = text(require(j, "model", ""), "model");
  if (model == "se2_vehicle") {
    c.model = ModelKind::kSe2Vehicle;
  } else if (model == "ball_plate") {
    c.model = ModelKind::kBallPlate;
    c.trivialization = Trivialization::kRight;
  } else if (model == "free_rigid_body") {
    c.model = ModelKind::kFreeRigidBody;
  } else {
    field_error("model", "expected se2_vehicle, ball_plate or free_rigid_body, got \"" + model +
                             "\"");
  }

  c.N = integer(require(j, "N", ""), "N");
  c.h = number(require(j, "h", ""), "h");
  if (!(c.h > 0.0)) field_error("h", "must be > 0");
  if (c.is_ocp() && c.N < 6) field_error("N", "must be >= 6");
  if (!c.is_ocp() && c.N < 1) field_error("N", "must be >= 1");
  optional_number(j, "t0", "", c.t0);

  if (j.contains("convention")) {
    const std::string v = text(j.at("convention"), "convention");
    if (v == "nodal") {
      c.convention = BoundaryConvention::kNodal;
    } else if (v == "staggered") {
      c.convention = BoundaryConvention::kStaggered;
    } else {
      field_error("convention", "expected nodal or staggered");
    }
  }
  if (j.contains("trivialization")) {
    const std::string v = text(j.at("trivialization"), "trivialization");
    if (v == "left") {
      c.trivialization = Trivialization::kLeft;
    } else if (v == "right") {
      c.trivialization = Trivialization::kRight;
    } else {
      field_error("trivialization", "expected left or right");
    }
  }
  if (j.contains("retraction")) c.retraction = text(j.at("retraction"), "retraction");

  const json params = j.contains("params") ? j.at("params") : json::object();
  switch (c.model) {
    case ModelKind::kSe2Vehicle:
      check_keys(params, {"m", "J1", "J2", "p", "rho1", "rho2"}, "params.");
      optional_number(params, "m", "params.", c.se2.m);
      optional_number(params, "J1", "params.", c.se2.J1);
      optional_number(params, "J2", "params.", c.se2.J2);
      optional_number(params, "p", "params.", c.se2.p);
      optional_number(params, "rho1", "params.", c.se2.rho1);
      optional_number(params, "rho2", "params.", c.se2.rho2);
      break;
    case ModelKind::kBallPlate:
      check_keys(params, {"r", "k2", "Omega", "amplitude", "frequency"}, "params.");
      optional_number(params, "r", "params.", c.ball.r);
      optional_number(params, "k2", "params.", c.ball.k2);
      optional_number(params, "Omega", "params.", c.ball.Omega);
      optional_number(params, "amplitude", "params.", c.ball.amplitude);
      optional_number(params, "frequency", "params.", c.ball.frequency);
      break;
    case ModelKind::kFreeRigidBody:
      check_keys(params, {"inertia"}, "params.");
      if (params.contains("inertia")) {
        c.inertia = vector_of(params.at("inertia"), 3, "params.inertia");
      }
      for (int i = 0; i < 3; ++i) {
        if (!(c.inertia(i) > 0.0)) field_error("params.inertia", "entries must be > 0");
      }
      break;
  }
  try {
    if (c.model == ModelKind::kSe2Vehicle) c.se2.validate();
    if (c.model == ModelKind::kBallPlate) c.ball.validate();
  } catch (const ConfigError& e) {
    field_error("params", e.what());
  }

  const json& b = require(j, "boundary", "");
  const GroupTag tag = c.model == ModelKind::kSe2Vehicle ? GroupTag::kSE2 : GroupTag::kSO3;
  if (c.is_ocp()) {
    check_keys(b, {"q0", "qd0", "qT", "qdT", "xi0", "xiT", "g0", "gT"}, "boundary.");
    const int n = c.model == ModelKind::kSe2Vehicle ? 1 : 2;
    c.boundary.q0 = vector_of(require(b, "q0", "boundary."), n, "boundary.q0");
    c.boundary.qd0 = vector_of(require(b, "qd0", "boundary."), n, "boundary.qd0");
    c.boundary.qT = vector_of(require(b, "qT", "boundary."), n, "boundary.qT");
    c.boundary.qdT = vector_of(require(b, "qdT", "boundary."), n, "boundary.qdT");
    c.boundary.xi0 = vector_of(require(b, "xi0", "boundary."), 3, "boundary.xi0");
    c.boundary.xiT = vector_of(require(b, "xiT", "boundary."), 3, "boundary.xiT");
    c.boundary.g0 = group_of(require(b, "g0", "boundary."), tag, "boundary.g0");
    c.boundary.gT = group_of(require(b, "gT", "boundary."), tag, "boundary.gT");
  } else {
    check_keys(b, {"g0", "xi0"}, "boundary.");
    c.boundary.g0 = b.contains("g0") ? group_of(b.at("g0"), tag, "boundary.g0")
                                     : GroupElement::identity(tag);
    c.boundary.xi0 = vector_of(require(b, "xi0", "boundary."), 3, "boundary.xi0");
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"tol", "max_iters", "jacobian"}, "solver.");
    optional_number(s, "tol", "solver.", c.solver.tol_residual);
    if (s.contains("max_iters")) c.solver.max_iters = integer(s.at("max_iters"), "solver.max_iters");
    if (s.contains("jacobian")) {
      const std::string v = text(s.at("jacobian"), "solver.jacobian");
      if (v == "model") {
        c.solver.jacobian_mode = JacobianMode::kModelSupplied;
      } else if (v == "fd") {
        c.solver.jacobian_mode = JacobianMode::kFiniteDifference;
      } else {
        field_error("solver.jacobian", "expected model or fd");
      }
    } else {
      c.solver.jacobian_mode = JacobianMode::kModelSupplied;
    }
  } else {
    c.solver.jacobian_mode = JacobianMode::kModelSupplied;
  }
  if (!(c.solver.tol_residual > 0.0)) field_error("solver.tol", "must be > 0");
  if (c.solver.max_iters < 1) field_error("solver.max_iters", "must be >= 1");

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir", "prefix"}, "output.");
    if (o.contains("dir")) c.out_dir = text(o.at("dir"), "output.dir");
    if (o.contains("prefix")) c.prefix = text(o.at("prefix"), "output.prefix");
  }
  if (c.prefix.empty()) c.prefix = model_name(c.model);

  try {
    Retraction::from_name(tag, c.retraction);
  } catch (const ConfigError& e) {
    field_error("retraction", e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.tol) {
    if (!(*o.tol > 0.0)) field_error("tol", "must be > 0");
    c.solver.tol_residual = *o.tol;
  }
  if (o.max_iters) {
    if (*o.max_iters < 1) field_error("max-iters", "must be >= 1");
    c.solver.max_iters = *o.max_iters;
  }
  if (o.retraction) {
    const GroupTag tag = c.model == ModelKind::kSe2Vehicle ? GroupTag::kSE2 : GroupTag::kSO3;
    try {
      Retraction::from_name(tag, *o.retraction);
    } catch (const ConfigError& e) {
      field_error("retraction", e.what());
    }
    c.retraction = *o.retraction;
  }
  if (o.out_dir) c.out_dir = *o.out_dir;
}

RunConfig with_step(const RunConfig& c, double h) {
  if (!(h > 0.0)) field_error("h", "must be > 0");
  const double t = c.final_time();
  const double steps = t / h;
  const double whole = std::round(steps);
  if (std::abs(steps - whole) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("h = " + std::to_string(h) + " does not divide the final time " +
                      std::to_string(t));
  }
  RunConfig out = c;
  out.h = h;
  out.N = static_cast<int>(whole);
  if (c.is_ocp() && c.convention == BoundaryConvention::kStaggered) out.N += 1;
  return out;
}

SecondOrderProblem build_problem(const RunConfig& c) {
  SecondOrderProblem p;
  switch (c.model) {
    case ModelKind::kSe2Vehicle:
      p = se2_vehicle_problem(c.se2, c.boundary, c.N, c.h);
      break;
    case ModelKind::kBallPlate:
      p = ball_plate_problem(c.ball, c.boundary, c.N, c.h);
      break;
    case ModelKind::kFreeRigidBody:
      throw ConfigError("free_rigid_body is an initial value problem, not an OCP");
  }
  p.t0 = c.t0;
  p.convention = c.convention;
  p.trivialization = c.trivialization;
  p.retraction = c.retraction;
  return p;
}

// ---------------------------------------------------------------------------
// Solve.

namespace {

json vec_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double max_abs(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Warm start on a finer grid from a converged coarser run: q and xi are
// interpolated in time, multipliers carry a factor h since lambda_d ~ h.
VectorXd prolongate(const OcpSystem& sys, const RunOutput& coarse) {
  const SecondOrderProblem& prob = sys.problem();
  const DiscretePath& cp = coarse.path;
  const double hc = coarse.times[1] - coarse.times[0];
  DiscretePath p = sys.scatter(sys.initial_guess());
  auto series = [](const auto& items, int size, int i) {
    std::vector<double> v;
    for (int k = 0; k < size; ++k) v.push_back(items[k](i));
    return v;
  };
  const int nq = static_cast<int>(cp.q.size());
  for (int i = 0; i < prob.n; ++i) {
    const std::vector<double> v = series(cp.q, nq, i);
    for (int k = 2; k <= prob.N - 2; ++k) {
      p.q[k](i) = interpolate(coarse.times, v, prob.window_time(k - 1));
    }
  }
  std::vector<double> txi;
  for (size_t k = 0; k < cp.xi.size(); ++k) txi.push_back(coarse.times[k] + 0.5 * hc);
  for (int i = 0; i < 3; ++i) {
    const std::vector<double> v = series(cp.xi, static_cast<int>(cp.xi.size()), i);
    for (int k = 1; k <= prob.N - 2; ++k) {
      p.xi[k](i) = interpolate(txi, v, prob.window_time(k - 1) + 0.5 * prob.h);
    }
  }
  std::vector<double> tl;
  for (size_t w = 0; w < cp.lambda.size(); ++w) tl.push_back(coarse.times[w + 1]);
  for (int i = 0; i < prob.m; ++i) {
    const std::vector<double> v = series(cp.lambda, static_cast<int>(cp.lambda.size()), i);
    for (int w = 0; w < prob.N - 1; ++w) {
      p.lambda[w](i) = (prob.h / hc) * interpolate(tl, v, prob.window_time(w));
    }
  }
  return sys.assemble(p);
}

RunOutput solve_ocp(const RunConfig& c, const RunOutput* coarse = nullptr) {
  const SecondOrderProblem prob = build_problem(c);
  const OcpSystem sys(prob);
  const int n = prob.n, m = prob.m, big_n = prob.N;
  const int want_unknowns = (big_n - 3) * n + 3 * (big_n - 2) + m * (big_n - 1);
  const int want_equations = (big_n - 3) * n + 3 * (big_n - 3) + 3 + m * (big_n - 1);
  if (sys.unknown_count() != sys.equation_count() || sys.unknown_count() != want_unknowns ||
      sys.equation_count() != want_equations) {
    throw Error("unknown/equation count mismatch: " + std::to_string(sys.unknown_count()) +
                " unknowns, " + std::to_string(sys.equation_count()) + " equations");
  }

  RunOutput out;
  json d;
  d["model"] = model_name(c.model);
  d["convention"] = convention_name(c.convention);
  d["trivialization"] = trivialization_name(c.trivialization);
  d["retraction"] = c.retraction;
  d["N"] = big_n;
  d["h"] = c.h;
  d["final_time"] = prob.final_time();
  d["warm_start"] = coarse ? "coarse solution" : "linear";
  d["counts"] = {{"unknowns", sys.unknown_count()},
                 {"equations", sys.equation_count()},
                 {"expected_unknowns", want_unknowns},
                 {"expected_equations", want_equations}};

  const ResidualFn f = [&](const VectorXd& x) { return sys.residual(x); };
  const JacobianFn jf = [&](const VectorXd& x) { return sys.jacobian(x); };
  const SolveResult res = solve(f, coarse ? prolongate(sys, *coarse) : sys.initial_guess(),
                                c.solver,
                                c.solver.jacobian_mode == JacobianMode::kModelSupplied
                                    ? jf
                                    : JacobianFn());
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.message = res.message;
  out.path = sys.scatter(res.x);
  for (int k = 0; k <= big_n; ++k) out.times.push_back(prob.window_time(k - 1));

  const OcpResidual r = sys.evaluate(out.path);
  double phi_max = 0.0;
  for (const auto& v : r.dlp.constraints) phi_max = std::max(phi_max, max_abs(v));
  d["converged"] = res.converged;
  d["message"] = res.message;
  d["iterations"] = res.iterations;
  d["residual_history"] = res.residual_history;
  d["residual_inf"] = max_abs(r.flat());
  d["max_constraint_violation"] = phi_max;
  d["closure_norm"] = max_abs(r.closure);
  d["target_error"] = (out.path.g.back().matrix - sys.g_target().matrix).cwiseAbs().maxCoeff();
  d["cost"] = sys.discrete_cost(out.path);
  out.diagnostics = d;
  return out;
}

RunOutput solve_rigid_body(const RunConfig& c) {
  const Retraction r = Retraction::from_name(GroupTag::kSO3, c.retraction);
  RunOutput out;
  json d;
  d["model"] = model_name(c.model);
  d["trivialization"] = trivialization_name(c.trivialization);
  d["retraction"] = c.retraction;
  d["N"] = c.N;
  d["h"] = c.h;
  d["final_time"] = c.final_time();
  RigidBodyRun run;
  try {
    run = march_free_rigid_body(c.inertia, c.boundary.g0, c.boundary.xi0, c.h, c.N, r,
                                c.trivialization, c.solver.tol_residual);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    out.converged = false;
    out.message = e.what();
    d["converged"] = false;
    d["message"] = out.message;
    out.diagnostics = d;
    return out;
  }
  out.converged = true;
  out.message = "converged";
  out.path.tag = GroupTag::kSO3;
  out.path.h = c.h;
  out.path.g = run.g;
  out.path.xi = run.xi;
  for (int k = 0; k <= c.N; ++k) out.times.push_back(c.t0 + k * c.h);
  for (int it : run.iterations) out.iterations = std::max(out.iterations, it);
  for (const Vec3& xi : run.xi) out.energies.push_back(rigid_body_energy(c.inertia, xi));
  if (c.trivialization == Trivialization::kLeft) {
    out.momenta = rigid_body_momenta(c.inertia, run, c.h, r);
  }

  d["converged"] = true;
  d["message"] = out.message;
  d["iterations"] = out.iterations;
  d["iterations_per_step"] = run.iterations;
  d["step_residuals"] = run.residuals;
  json mom = json::array();
  double spread = 0.0;
  for (const Vec3& j : out.momenta) {
    mom.push_back(vec_json(j));
    spread = std::max(spread, (j - out.momenta.front()).cwiseAbs().maxCoeff());
  }
  d["momentum"] = mom;
  if (!out.momenta.empty()) d["momentum_max_deviation"] = spread;
  double drift = 0.0;
  for (double e : out.energies) drift = std::max(drift, std::abs(e - out.energies.front()));
  d["energy_initial"] = out.energies.front();
  d["energy_max_drift"] = drift;
  out.diagnostics = d;
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

RunOutput run_solve(const RunConfig& c, const RunOutput* coarse) {
  return c.is_ocp() ? solve_ocp(c, coarse) : solve_rigid_body(c);
}

std::string trajectory_csv(const RunConfig& c, const RunOutput& out) {
  const int n = c.model == ModelKind::kSe2Vehicle ? 1 : c.model == ModelKind::kBallPlate ? 2 : 0;
  const int m = c.model == ModelKind::kSe2Vehicle ? 2 : c.model == ModelKind::kBallPlate ? 3 : 0;
  const bool rb = !c.is_ocp();
  std::ostringstream s;
  s << "t";
  for (int i = 1; i <= n; ++i) s << ",q" << i;
  s << ",xi1,xi2,xi3";
  for (int i = 1; i <= m; ++i) s << ",lambda" << i;
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) s << ",g" << i << j;
  }
  if (rb) s << ",J1,J2,J3,energy";
  s << "\n";
  const DiscretePath& p = out.path;
  for (size_t k = 0; k < out.times.size() && k < p.g.size(); ++k) {
    s << fmt(out.times[k]);
    for (int i = 0; i < n; ++i) s << "," << (k < p.q.size() ? fmt(p.q[k](i)) : "");
    for (int i = 0; i < 3; ++i) s << "," << (k < p.xi.size() ? fmt(p.xi[k](i)) : "");
    for (int i = 0; i < m; ++i) s << "," << (k < p.lambda.size() ? fmt(p.lambda[k](i)) : "");
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) s << "," << fmt(p.g[k].matrix(i, j));
    }
    if (rb) {
      for (int i = 0; i < 3; ++i) {
        s << "," << (k < out.momenta.size() ? fmt(out.momenta[k](i)) : "");
      }
      s << "," << (k < out.energies.size() ? fmt(out.energies[k]) : "");
    }
    s << "\n";
  }
  return s.str();
}

std::vector<std::string> write_outputs(const RunConfig& c, const RunOutput& out) {
  std::filesystem::create_directories(c.out_dir);
  const std::string stem = (std::filesystem::path(c.out_dir) / c.prefix).string();
  const std::string csv = stem + "_trajectory.csv";
  const std::string diag = stem + "_diagnostics.json";
  std::ofstream(csv) << trajectory_csv(c, out);
  std::ofstream(diag) << out.diagnostics.dump(2) << "\n";
  return {csv, diag};
}

// ---------------------------------------------------------------------------
// Convergence.

double interpolate(const std::vector<double>& t, const std::vector<double>& v, double at) {
  const int n = static_cast<int>(t.size());
  if (n < 4) throw SizeError("interpolate: need at least 4 samples");
  const int j = static_cast<int>(std::upper_bound(t.begin(), t.end(), at) - t.begin()) - 1;
  const int first = std::clamp(j - 1, 0, n - 4);
  double sum = 0.0;
  for (int a = first; a < first + 4; ++a) {
    double w = 1.0;
    for (int b = first; b < first + 4; ++b) {
      if (b != a) w *= (at - t[b]) / (t[a] - t[b]);
    }
    sum += w * v[a];
  }
  return sum;
}

namespace {

// Per-node samples compared across step sizes: q coordinates then g entries.
std::vector<std::vector<double>> node_features(const RunOutput& out) {
  const DiscretePath& p = out.path;
  const int nq = p.q.empty() ? 0 : static_cast<int>(p.q.front().size());
  std::vector<std::vector<double>> f(nq + 9);
  for (size_t k = 0; k < p.g.size(); ++k) {
    for (int i = 0; i < nq; ++i) f[i].push_back(p.q[k](i));
    for (int e = 0; e < 9; ++e) f[nq + e].push_back(p.g[k].matrix(e / 3, e % 3));
  }
  return f;
}

double trajectory_error(const RunConfig& c, const RunOutput& coarse, const RunOutput& fine) {
  const auto a = node_features(coarse);
  const auto b = node_features(fine);
  // Interior nodes only for the OCP; the rigid body is compared everywhere
  // after the initial node.
  const int last = c.is_ocp() ? static_cast<int>(coarse.times.size()) - 2
                              : static_cast<int>(coarse.times.size()) - 1;
  double err = 0.0;
  for (int k = 1; k <= last; ++k) {
    for (size_t f = 0; f < a.size(); ++f) {
      err = std::max(err, std::abs(a[f][k] - interpolate(fine.times, b[f], coarse.times[k])));
    }
  }
  return err;
}

}  // namespace

double fit_slope(const std::vector<double>& hs, const std::vector<double>& errors) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < hs.size(); ++i) {
    if (!std::isfinite(errors[i]) || errors[i] <= 0.0) continue;
    const double x = std::log(hs[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport run_convergence(const RunConfig& c, std::vector<double> hs, Reference ref) {
  if (hs.size() < 3) throw ConfigError("h-list: at least 3 values of h are required");
  std::sort(hs.begin(), hs.end(), std::greater<double>());
  for (size_t i = 1; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0) || hs[i] == hs[i - 1]) {
      throw ConfigError("h-list: values must be positive and distinct");
    }
  }
  const double ratio = hs[1] / hs[0];
  for (size_t i = 2; i < hs.size(); ++i) {
    if (std::abs(hs[i] / hs[i - 1] - ratio) > 1e-9) {
      throw ConfigError("h-list: values must form a geometric sequence");
    }
  }
  std::vector<RunConfig> configs;
  for (double h : hs) configs.push_back(with_step(c, h));

  std::vector<RunOutput> runs;
  for (const RunConfig& rc : configs) {
    RunOutput o;
    try {
      o = run_solve(rc, runs.empty() ? nullptr : &runs.back());
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw Error("convergence: solve failed at h = " + fmt(rc.h) + ": " + e.what());
    }
    if (!o.converged) {
      throw Error("convergence: solve failed at h = " + fmt(rc.h) + ": " + o.message);
    }
    runs.push_back(std::move(o));
  }

  ConvergenceReport rep;
  rep.reference = ref;
  std::vector<double> errors;
  for (size_t i = 0; i < runs.size(); ++i) {
    ConvergenceRow row;
    row.h = configs[i].h;
    row.N = configs[i].N;
    row.iterations = runs[i].iterations;
    row.error = std::numeric_limits<double>::quiet_NaN();
    if (i + 1 < runs.size()) {
      const RunOutput& fine = ref == Reference::kFinest ? runs.back() : runs[i + 1];
      row.error = trajectory_error(configs[i], runs[i], fine);
    }
    rep.rows.push_back(row);
    errors.push_back(row.error);
  }
  rep.slope = fit_slope(hs, errors);
  return rep;
}

std::string convergence_csv(const ConvergenceReport& r) {
  std::ostringstream s;
  s << "h,N,iterations,error,slope\n";
  for (const auto& row : r.rows) {
    s << fmt(row.h) << "," << row.N << "," << row.iterations << ","
      << (std::isfinite(row.error) ? fmt(row.error) : "") << "," << fmt(r.slope) << "\n";
  }
  return s.str();
}

// ---------------------------------------------------------------------------
// Oracle.

OracleOutcome run_oracle(const RunConfig& c, unsigned seed, bool flip_group_rows) {
  const SecondOrderProblem prob = build_problem(c);
  const OcpSystem sys(prob);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  VectorXd x = sys.initial_guess();
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += u(rng);

  const DiscretePath p = sys.scatter(x);
  const DiscreteConstraintSet* phi = prob.m > 0 ? &sys.discrete().phi : nullptr;
  DlpResidual assembled =
      dlp_k_residual(sys.discrete().ld, phi, p, sys.retraction(), prob.trivialization);
  if (flip_group_rows) {
    for (Vec3& g : assembled.g_part) g = -g;
  }
  const DlpResidual fd = augmented_action_gradient_fd(sys.discrete().ld, phi, p.q, p.g,
                                                      p.lambda, prob.h, sys.retraction(),
                                                      prob.trivialization);
  const OracleReport rep = compare_residuals(assembled, fd);
  OracleOutcome out;
  out.max_error = rep.max();
  out.worst_block = rep.worst_block();
  out.pass = out.max_error <= 1e-6;
  return out;
}

}  // namespace lpvi
