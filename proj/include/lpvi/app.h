#pragma once

// Run configuration, solve/convergence/oracle drivers and output writers
// behind the lpvi command line tool.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpvi/models.h"
#include "lpvi/ocp.h"
#include "lpvi/solver.h"

namespace lpvi {

enum class ModelKind { kSe2Vehicle, kBallPlate, kFreeRigidBody };

const char* model_name(ModelKind k);

struct RunConfig {
  ModelKind model = ModelKind::kSe2Vehicle;
  Se2VehicleParams se2;
  BallPlateParams ball;
  Vec3 inertia = Vec3(1, 2, 3);
  BoundaryData boundary;
  int N = 0;  // steps for the rigid body
  double h = 0.0;
  double t0 = 0.0;
  BoundaryConvention convention = BoundaryConvention::kNodal;
  Trivialization trivialization = Trivialization::kLeft;
  std::string retraction = "cayley";
  SolverConfig solver;
  std::string out_dir = ".";
  std::string prefix;  // output file stem, defaults to the model name

  bool is_ocp() const { return model != ModelKind::kFreeRigidBody; }
  double final_time() const;
};

// Throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

struct Overrides {
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<std::string> retraction;
  std::optional<std::string> out_dir;
};

void apply_overrides(RunConfig& c, const Overrides& o);

// The same configuration with step h and the step count that keeps the
// final time. Throws ConfigError if T / h is not an integer.
RunConfig with_step(const RunConfig& c, double h);

SecondOrderProblem build_problem(const RunConfig& c);

struct RunOutput {
  bool converged = false;
  int iterations = 0;
  std::string message;
  std::vector<double> times;      // node times
  DiscretePath path;              // q, xi, lambda, g per node
  std::vector<Vec3> momenta;      // rigid body, left trivialization only
  std::vector<double> energies;   // rigid body
  nlohmann::json diagnostics;
};

// With a converged coarser run of the same OCP, the warm start interpolates
// it onto the new grid instead of the linear guess.
RunOutput run_solve(const RunConfig& c, const RunOutput* coarse = nullptr);

// Fixed CSV layout: t, q*, xi1..3, lambda*, g11..g33 (and J1..J3, energy for
// the rigid body). Cells without data are empty.
std::string trajectory_csv(const RunConfig& c, const RunOutput& out);

// Writes <prefix>_trajectory.csv and <prefix>_diagnostics.json; returns the
// two paths.
std::vector<std::string> write_outputs(const RunConfig& c, const RunOutput& out);

enum class Reference { kFinest, kSuccessive };

struct ConvergenceRow {
  double h = 0.0;
  int N = 0;
  int iterations = 0;
  double error = 0.0;  // NaN for the reference run
};

struct ConvergenceReport {
  Reference reference = Reference::kFinest;
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;
};

// Solves at every h (final time fixed) and measures the max trajectory error
// over interior nodes against the finest run, or against the next finer run.
// Throws Error naming the failing h.
ConvergenceReport run_convergence(const RunConfig& c, std::vector<double> hs, Reference ref);

std::string convergence_csv(const ConvergenceReport& r);

// Least-squares slope of log(error) against log(h) over finite errors.
double fit_slope(const std::vector<double>& hs, const std::vector<double>& errors);

struct OracleOutcome {
  double max_error = 0.0;
  std::string worst_block;
  bool pass = false;
};

// Gradient-of-action check at the warm start perturbed by a seeded uniform
// draw. flip_group_rows negates the assembled group rows (negative control).
OracleOutcome run_oracle(const RunConfig& c, unsigned seed, bool flip_group_rows = false);

// Piecewise cubic Lagrange interpolation of samples (t_k, v_k) at t.
double interpolate(const std::vector<double>& t, const std::vector<double>& v, double at);

}  // namespace lpvi
