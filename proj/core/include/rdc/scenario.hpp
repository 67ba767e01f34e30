#pragma once

#include "rdc/config.hpp"
#include "rdc/material.hpp"
#include "rdc/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rdc {

// A fully resolved run: mesh (generated or loaded), material, load case,
// solver settings and output targets.
struct Scenario {
  std::string name;
  Config config;
  Mesh mesh;
  Material material;
  SolverConfig solver;
  LoadCase load;
  std::string outdir;
  bool write_vtk = false;
};

Scenario scenario_from_config(const Config& cfg);
Scenario load_scenario_file(const std::string& path);

// Field snapshot at the end of a load step, per slave-node arrays indexed
// like Mesh::slave_nodes.
struct StepFields {
  VecX d;
  std::vector<double> zn;     // normal multiplier component
  std::vector<double> gap;    // weighted gap
  std::vector<double> alpha;  // pointwise offset to the obstacle, NaN if unprojected
  std::vector<char> active;
};

struct StepCounters {
  Counters counters;             // summed over the step's iterations
  long long frame_dep_dofs = 0;  // DOF columns carrying normal derivatives of active nodes
  long long lin_nnz = 0;         // nonzeros of the step's last solved matrix
};

struct RunResult {
  bool all_converged = false;
  std::string error;  // set when a step failed
  SolveState state;
  double c_eta = 0.0;
  std::vector<StepFields> fields;
  std::vector<StepCounters> per_step;
  double seconds = 0.0;
};

RunResult run_scenario(const Scenario& sc, std::ostream* progress = nullptr);

// Writes config echo, mesh, per-step fields, convergence log, counters and
// timings (and optionally legacy VTK snapshots) under sc.outdir.  Every
// file except timings.csv is a deterministic function of the scenario.
void write_outputs(const Scenario& sc, const RunResult& r);

// Shortest decimal form that round-trips a double (17 significant digits).
std::string fmt17(double v);

// Central finite differences through the full saddle matrix at the final
// state of a run, free structural columns and all multiplier columns.
struct JacobianCheck {
  int ndof = 0;
  int rows = 0;
  int cols_checked = 0;
  double max_rel = 0.0;  // worst checked column, scaled column-wise
};

JacobianCheck jacobian_check(const Scenario& sc, const RunResult& r, int max_cols = 400);

}  // namespace rdc
