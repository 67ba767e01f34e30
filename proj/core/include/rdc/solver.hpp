#pragma once

#include "rdc/fem.hpp"
#include "rdc/frames.hpp"
#include "rdc/mortar.hpp"

#include <string>
#include <vector>

namespace rdc {

// The semi-smooth complementarity residual z - max{0, z - c g}.  Zero
// exactly when g >= 0, z >= 0 and g z = 0.
double ncp_residual(double zn, double gap, double c);

struct SolverConfig {
  double c_eta = -1.0;  // < 0: E over the mean non-mortar facet diameter
  double tol_rel = 1e-10;
  int max_newton = 30;
  int steps = 1;
  bool saddle_path = false;  // full saddle solve instead of condensation
  MortarOptions mortar;
  FrameMode frame_mode = FrameMode::projected;
};

// Load description at full load factor.  Fixed DOFs are held at
// factor * dirichlet_target, which is zero for plain supports.
struct LoadCase {
  std::vector<char> fixed;  // per DOF
  VecX dirichlet_target;    // per DOF, value at factor 1; may be empty if zero
  double pressure = 0.0;    // on the Neumann facets, at factor 1
  bool follower = false;
};

// Everything one Newton iterate assembles at state (d, z): frames, mortar
// data, the effective stiffness (material + contact-geometric + follower
// load), the structural residual r = f_int - f_ext without contact forces,
// and the contact force fc = D^T z.
struct ContactAssembly {
  FrameSet frames;
  MortarData mortar;
  std::vector<Triplet> Keff;
  VecX r;
  VecX fc;
  VecX fext;
  Counters counters;
};

void assemble_iterate(const Mesh& m, const Material& mat, const SolverConfig& cfg,
                      double pressure, bool follower, const VecX& d,
                      const std::vector<Vec3>& z, ContactAssembly& out);

// Nodes eligible to carry a multiplier: supported by the mortar integration
// and not fully constrained by Dirichlet conditions.
std::vector<char> eligible_nodes(const Mesh& m, const MortarData& mortar,
                                 const std::vector<char>& fixed);

// A = { j : z_j . n_j - c gap_j > 0 }, restricted to eligible nodes.
std::vector<char> update_active_set(const FrameSet& frames, const MortarData& mortar,
                                    const std::vector<Vec3>& z, double c_eta,
                                    const std::vector<char>& eligible);

// Full saddle system over (delta d, z): structural rows with D^T coupling,
// identity rows for inactive multipliers, weighted-gap rows and tangential
// rows for active nodes.  Dirichlet DOFs get identity rows.
struct SaddleSystem {
  int n = 0;
  std::vector<Triplet> A;
  VecX rhs;
};

SaddleSystem build_saddle(const Mesh& m, const std::vector<char>& fixed,
                          const ContactAssembly& sys, const std::vector<char>& act,
                          const std::vector<Vec3>& z);

// Solves one Newton iterate with the given active set; both paths produce
// the displacement increment and the directly-solved multipliers.  nnz,
// when given, receives the factorized matrix nonzero count.
void saddle_solve(const Mesh& m, const std::vector<char>& fixed, const ContactAssembly& sys,
                  const std::vector<char>& act, const std::vector<Vec3>& z, VecX& dd,
                  std::vector<Vec3>& znew, long long* nnz = nullptr);

void condensed_solve(const Mesh& m, const std::vector<char>& fixed, const ContactAssembly& sys,
                     const std::vector<char>& act, const std::vector<Vec3>& z, VecX& dd,
                     std::vector<Vec3>& znew, long long* nnz = nullptr);

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;
  double rel = 0.0;
  int active = 0;
  Counters counters;
  long long lin_nnz = 0;
  double assemble_ms = 0.0;
  double solve_ms = 0.0;
};

struct StepRecord {
  int step = 0;
  double factor = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRecord> iters;
};

struct SolveState {
  VecX d;
  std::vector<Vec3> z;       // per slave node
  std::vector<char> active;  // per slave node
  FrameSet frames;           // at the last assembled configuration
  MortarData mortar;
  std::vector<StepRecord> log;
  Counters totals;
};

// Load-stepping driver: primal-dual active set search wrapped around the
// Newton iteration, warm started across steps.
class ContactSolver {
 public:
  ContactSolver(const Mesh& mesh, const Material& material, const LoadCase& load,
                const SolverConfig& config);

  // Solves one load step at the given factor; appends to state().log.
  // Throws on non-convergence, active-set cycling or a singular system.
  void solve_step(int step, double factor);

  // Runs config.steps load steps with factors k / steps.
  void run();

  const SolveState& state() const { return state_; }
  SolveState& state() { return state_; }
  const Mesh& mesh() const { return mesh_; }
  double c_eta() const { return c_eta_; }

 private:
  const Mesh& mesh_;
  Material material_;
  LoadCase load_;
  SolverConfig config_;
  double c_eta_ = 0.0;
  double mesh_scale_ = 0.0;
  SolveState state_;
};

}  // namespace rdc
