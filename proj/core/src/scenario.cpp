#include "rdc/scenario.hpp"

#include "rdc/generators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace rdc {

namespace {

int comp_index(char c, int dim) {
  const int i = c == 'x' ? 0 : c == 'y' ? 1 : c == 'z' ? 2 : -1;
  if (i < 0 || i >= dim) throw Error(std::string("bad component '") + c + "'");
  return i;
}

const std::vector<NodeId>& named_set(const Mesh& m, const std::string& name) {
  auto it = m.sets.find(name);
  if (it != m.sets.end()) return it->second;
  std::string have;
  for (const auto& [k, v] : m.sets) have += (have.empty() ? "" : ", ") + k;
  throw Error("unknown node set '" + name + "' (mesh has: " + (have.empty() ? "none" : have) +
              ")");
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

int vtk_cell_type(ElementKind k) {
  switch (k) {
    case ElementKind::line2:
      return 3;
    case ElementKind::line3:
      return 21;
    case ElementKind::tri3:
      return 5;
    case ElementKind::tri6:
      return 22;
    case ElementKind::quad4:
    case ElementKind::quad4_bulk2d:
      return 9;
    case ElementKind::quad8:
    case ElementKind::quad8_bulk2d:
      return 23;
    case ElementKind::quad9:
      return 28;
    case ElementKind::hex8:
      return 12;
    case ElementKind::hex20:
      return 25;
  }
  throw Error("vtk_cell_type: unknown kind");
}

void write_vtk_step(const Scenario& sc, const RunResult& r, int step,
                    const std::filesystem::path& path) {
  const Mesh& m = sc.mesh;
  const StepFields& sf = r.fields[step];
  auto f = open_out(path);
  f << "# vtk DataFile Version 3.0\n"
    << sc.name << " step " << step + 1 << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << m.nnodes() << " double\n";
  for (NodeId v = 0; v < m.nnodes(); ++v)
    f << fmt17(m.X[v][0]) << ' ' << fmt17(m.X[v][1]) << ' ' << fmt17(m.X[v][2]) << '\n';
  size_t ncell = m.bulk.size() + m.rigid.size(), sz = 0;
  for (const auto& e : m.bulk) sz += 1 + e.nn;
  for (const auto& e : m.rigid) sz += 1 + e.nn;
  f << "CELLS " << ncell << ' ' << sz << '\n';
  for (const auto& e : m.bulk) {
    f << e.nn;
    for (int a = 0; a < e.nn; ++a) f << ' ' << e.nodes[a];
    f << '\n';
  }
  for (const auto& e : m.rigid) {
    f << e.nn;
    for (int a = 0; a < e.nn; ++a) f << ' ' << e.nodes[a];
    f << '\n';
  }
  f << "CELL_TYPES " << ncell << '\n';
  for (const auto& e : m.bulk) f << vtk_cell_type(e.kind) << '\n';
  for (const auto& e : m.rigid) f << vtk_cell_type(e.kind) << '\n';

  f << "POINT_DATA " << m.nnodes() << "\nVECTORS displacement double\n";
  for (NodeId v = 0; v < m.nnodes(); ++v) {
    Vec3 u = Vec3::Zero();
    if (m.node_dof[v] >= 0)
      for (int c = 0; c < m.dim; ++c) u[c] = sf.d[m.node_dof[v] + c];
    f << fmt17(u[0]) << ' ' << fmt17(u[1]) << ' ' << fmt17(u[2]) << '\n';
  }
  auto scalar = [&](const char* name, auto value) {
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (NodeId v = 0; v < m.nnodes(); ++v) {
      const int s = m.slave_index[v];
      f << fmt17(s >= 0 ? value(s) : 0.0) << '\n';
    }
  };
  scalar("pressure", [&](int s) { return sf.zn[s]; });
  scalar("gap", [&](int s) { return sf.gap[s]; });
  scalar("active", [&](int s) { return double(sf.active[s]); });
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Scenario scenario_from_config(const Config& cfg) {
  Scenario sc;
  sc.config = cfg;
  sc.name = cfg.get_or("scenario", "name", "scenario");

  if (cfg.has("mesh", "generator")) {
    const std::string g = cfg.get("mesh", "generator");
    if (g == "hertz")
      sc.mesh = gen_hertz(cfg.get_int("mesh", "n"), cfg.get_int("mesh", "order"));
    else if (g == "block3d")
      sc.mesh = gen_block3d(cfg.get_int_or("mesh", "nx", 6),
                            cfg.get_double_or("mesh", "amplitude", 0.05));
    else if (g == "punch3d")
      sc.mesh = gen_punch3d(cfg.get_int_or("mesh", "nb", 6));
    else
      throw Error("unknown mesh generator '" + g + "'");
  } else if (cfg.has("mesh", "file")) {
    sc.mesh = read_mesh_file(cfg.get("mesh", "file"));
  } else {
    throw Error("config: [mesh] needs generator or file");
  }

  sc.material.model = material_from_name(cfg.get_or("material", "model", "stvenant"));
  sc.material.E = cfg.get_double_or("material", "E", 1.0);
  sc.material.nu = cfg.get_double_or("material", "nu", 0.3);

  SolverConfig& s = sc.solver;
  s.steps = cfg.get_int_or("solver", "steps", 1);
  s.tol_rel = cfg.get_double_or("solver", "tol_rel", 1e-10);
  s.max_newton = cfg.get_int_or("solver", "max_newton", 30);
  {
    const std::string c = cfg.get_or("solver", "c_eta", "auto");
    s.c_eta = c == "auto" ? -1.0 : cfg.get_double("solver", "c_eta");
  }
  {
    const std::string p = cfg.get_or("solver", "solve_path", "condensed");
    if (p != "condensed" && p != "saddle") throw Error("solve_path must be condensed or saddle");
    s.saddle_path = p == "saddle";
  }
  s.mortar.weighting = weighting_from_name(cfg.get_or("solver", "gap_basis", "piecewise"));
  s.mortar.integration = integration_from_name(cfg.get_or("solver", "integration", "segment"));
  s.mortar.search_margin = cfg.get_double_or("solver", "search_margin", -1.0);
  s.frame_mode = frame_mode_from_name(cfg.get_or("solver", "frame_mode", "projected"));

  LoadCase& l = sc.load;
  l.pressure = cfg.get_double_or("load", "pressure", 0.0);
  l.follower = cfg.get_bool_or("load", "follower", false);
  l.fixed.assign(sc.mesh.ndof, 0);
  l.dirichlet_target = VecX::Zero(sc.mesh.ndof);
  for (const std::string& v : cfg.get_all("load", "fix")) {
    auto t = split_ws(v);
    if (t.size() != 2) throw Error("fix wants: <set> <components>, got '" + v + "'");
    for (NodeId nd : named_set(sc.mesh, t[0]))
      for (char c : t[1]) l.fixed[sc.mesh.dof(nd, comp_index(c, sc.mesh.dim))] = 1;
  }
  for (const std::string& v : cfg.get_all("load", "move")) {
    auto t = split_ws(v);
    if (t.size() != 3) throw Error("move wants: <set> <component> <target>, got '" + v + "'");
    const int c = comp_index(t[1].size() == 1 ? t[1][0] : '?', sc.mesh.dim);
    const double target = std::strtod(t[2].c_str(), nullptr);
    for (NodeId nd : named_set(sc.mesh, t[0])) {
      const Dof dof = sc.mesh.dof(nd, c);
      l.fixed[dof] = 1;
      l.dirichlet_target[dof] = target;
    }
  }

  sc.outdir = cfg.get_or("output", "dir", "out/" + sc.name);
  sc.write_vtk = cfg.get_bool_or("output", "vtk", false);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  return scenario_from_config(read_config_file(path));
}

RunResult run_scenario(const Scenario& sc, std::ostream* progress) {
  RunResult r;
  const auto t0 = std::chrono::steady_clock::now();
  ContactSolver solver(sc.mesh, sc.material, sc.load, sc.solver);
  r.c_eta = solver.c_eta();
  const Mesh& m = sc.mesh;
  const int ns = static_cast<int>(m.slave_nodes.size());

  r.all_converged = true;
  for (int k = 1; k <= sc.solver.steps; ++k) {
    try {
      solver.solve_step(k, double(k) / sc.solver.steps);
    } catch (const Error& e) {
      r.all_converged = false;
      r.error = e.what();
      break;
    }
    const SolveState& st = solver.state();

    StepFields sf;
    sf.d = st.d;
    sf.zn.resize(ns);
    sf.gap.resize(ns);
    sf.alpha.resize(ns);
    sf.active = st.active;
    for (int s = 0; s < ns; ++s) {
      const NodeFrame& fr = st.frames.frames[s];
      sf.zn[s] = fr.n.dot(st.z[s]);
      sf.gap[s] = st.mortar.gap[s];
      sf.alpha[s] = fr.projected ? fr.alpha : std::numeric_limits<double>::quiet_NaN();
    }
    r.fields.push_back(std::move(sf));

    StepCounters sk;
    const StepRecord& rec = st.log.back();
    for (const IterationRecord& ir : rec.iters) {
      sk.counters += ir.counters;
      if (ir.lin_nnz > 0) sk.lin_nnz = ir.lin_nnz;
    }
    for (int s = 0; s < ns; ++s) {
      if (!st.active[s]) continue;
      for (const NodeFrame::Dep& dep : st.frames.frames[s].deps)
        if (dep.dn.cwiseAbs().maxCoeff() > 0.0) sk.frame_dep_dofs += m.dim;
    }
    r.per_step.push_back(sk);

    if (progress) {
      const IterationRecord& last = rec.iters.back();
      *progress << sc.name << " step " << k << "/" << sc.solver.steps << ": " << rec.iterations
                << " iterations, active " << last.active << ", rel " << last.rel << "\n";
    }
  }

  r.state = std::move(solver.state());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_outputs(const Scenario& sc, const RunResult& r) {
  namespace fs = std::filesystem;
  const fs::path out(sc.outdir);
  fs::create_directories(out);
  const Mesh& m = sc.mesh;

  open_out(out / "config_echo.txt") << sc.config.raw;
  {
    auto f = open_out(out / "mesh.txt");
    write_mesh(m, f);
  }

  {
    auto f = open_out(out / "convergence.csv");
    f << "step,iter,residual,rel,active\n";
    for (const StepRecord& rec : r.state.log)
      for (const IterationRecord& ir : rec.iters)
        f << rec.step << ',' << ir.iter << ',' << fmt17(ir.residual) << ',' << fmt17(ir.rel)
          << ',' << ir.active << '\n';
  }
  {
    auto f = open_out(out / "timings.csv");
    f << "step,iter,assemble_ms,solve_ms\n";
    for (const StepRecord& rec : r.state.log)
      for (const IterationRecord& ir : rec.iters)
        f << rec.step << ',' << ir.iter << ',' << fmt17(ir.assemble_ms) << ','
          << fmt17(ir.solve_ms) << '\n';
  }
  {
    auto f = open_out(out / "counters.csv");
    f << "step,dual_evals,cells,gauss_points,clips,projections,frame_dep_dofs,matrix_nnz\n";
    for (size_t k = 0; k < r.per_step.size(); ++k) {
      const StepCounters& sk = r.per_step[k];
      f << k + 1 << ',' << sk.counters.dual_evals << ',' << sk.counters.cells << ','
        << sk.counters.gauss_points << ',' << sk.counters.clips << ','
        << sk.counters.projections << ',' << sk.frame_dep_dofs << ',' << sk.lin_nnz << '\n';
    }
  }

  for (size_t k = 0; k < r.fields.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "fields_%04zu.csv", k + 1);
    auto f = open_out(out / name);
    f << "node";
    for (int c = 0; c < m.dim; ++c) f << ",x" << c;
    for (int c = 0; c < m.dim; ++c) f << ",u" << c;
    f << ",pressure,gap,active\n";
    const StepFields& sf = r.fields[k];
    for (NodeId v = 0; v < m.nnodes(); ++v) {
      f << v;
      for (int c = 0; c < m.dim; ++c) f << ',' << fmt17(m.X[v][c]);
      for (int c = 0; c < m.dim; ++c)
        f << ',' << fmt17(m.node_dof[v] >= 0 ? sf.d[m.node_dof[v] + c] : 0.0);
      const int s = m.slave_index[v];
      if (s >= 0)
        f << ',' << fmt17(sf.zn[s]) << ',' << fmt17(sf.gap[s]) << ',' << int(sf.active[s]);
      else
        f << ",0,0,0";
      f << '\n';
    }
    if (sc.write_vtk) {
      std::snprintf(name, sizeof name, "solution_%04zu.vtk", k + 1);
      write_vtk_step(sc, r, static_cast<int>(k), out / name);
    }
  }

  {
    auto f = open_out(out / "summary.txt");
    f << "scenario: " << sc.name << '\n'
      << "nodes: " << m.nnodes() << "  dofs: " << m.ndof
      << "  slave nodes: " << m.slave_nodes.size() << '\n'
      << "c_eta: " << fmt17(r.c_eta) << '\n'
      << "steps converged: " << r.fields.size() << "/" << sc.solver.steps << '\n';
    int iters = 0;
    for (const StepRecord& rec : r.state.log) iters += rec.iterations;
    f << "newton iterations: " << iters << '\n';
    const Counters& c = r.state.totals;
    f << "dual basis evaluations: " << c.dual_evals << '\n'
      << "integration cells: " << c.cells << '\n'
      << "gauss points: " << c.gauss_points << '\n'
      << "polygon clips: " << c.clips << '\n'
      << "projections: " << c.projections << '\n';
    if (!r.all_converged) f << "error: " << r.error << '\n';
  }
}

JacobianCheck jacobian_check(const Scenario& sc, const RunResult& r, int max_cols) {
  const Mesh& m = sc.mesh;
  const int dim = m.dim, ndof = m.ndof;
  const int ns = static_cast<int>(m.slave_nodes.size());
  const int n = ndof + ns * dim;
  const VecX& d0 = r.state.d;
  const std::vector<Vec3>& zbar = r.state.z;
  const std::vector<char>& act = r.state.active;
  const std::vector<char>& fixed = sc.load.fixed;

  auto F = [&](const VecX& dv, const std::vector<Vec3>& zv) {
    ContactAssembly sys;
    assemble_iterate(m, sc.material, sc.solver, sc.load.pressure, sc.load.follower, dv, zv, sys);
    VecX out = VecX::Zero(n);
    for (Dof f = 0; f < ndof; ++f)
      if (!fixed[f]) out[f] = sys.r[f] + sys.fc[f];
    for (int s = 0; s < ns; ++s) {
      const int zrow = ndof + s * dim;
      if (!act[s]) {
        for (int i = 0; i < dim; ++i) out[zrow + i] = zv[s][i];
        continue;
      }
      out[zrow] = sys.mortar.gap[s];
      const NodeFrame& fr = sys.frames.frames[s];
      out[zrow + 1] = fr.t1.dot(zv[s]);
      if (dim == 3) out[zrow + 2] = fr.t2.dot(zv[s]);
    }
    return out;
  };

  ContactAssembly sys0;
  assemble_iterate(m, sc.material, sc.solver, sc.load.pressure, sc.load.follower, d0, zbar,
                   sys0);
  const SaddleSystem S = build_saddle(m, fixed, sys0, act, zbar);
  SpMat A(S.n, S.n);
  A.setFromTriplets(S.A.begin(), S.A.end());
  const MatX Ad = MatX(A);
  const double anorm = Ad.cwiseAbs().maxCoeff();

  double scale = 0;
  for (NodeId v = 0; v < m.nnodes(); ++v)
    for (NodeId u = 0; u < v; ++u) scale = std::max(scale, (m.X[v] - m.X[u]).norm());
  const double hd = 1e-6 * std::max(scale, 1.0);
  double zmax = 1.0;
  for (const Vec3& zz : zbar) zmax = std::max(zmax, zz.cwiseAbs().maxCoeff());
  const double hz = 1e-6 * zmax;

  // Slave-node displacement columns first, remaining free columns round
  // robin, then every multiplier column.
  std::vector<int> cols;
  for (NodeId v : m.slave_nodes)
    for (int c = 0; c < dim; ++c)
      if (!fixed[m.dof(v, c)]) cols.push_back(m.dof(v, c));
  {
    std::vector<char> seen(ndof, 0);
    for (int c : cols) seen[c] = 1;
    const int room = std::max(0, max_cols - static_cast<int>(cols.size()));
    int take = 0, stride = std::max(1, ndof / std::max(1, room));
    for (Dof f = 0; f < ndof && take < room; f += stride)
      if (!fixed[f] && !seen[f]) {
        cols.push_back(f);
        ++take;
      }
  }
  for (int s = 0; s < ns; ++s)
    for (int i = 0; i < dim; ++i) cols.push_back(ndof + s * dim + i);

  JacobianCheck jc;
  jc.ndof = ndof;
  jc.rows = n;
  VecX dp = d0;
  std::vector<Vec3> zp = zbar;
  for (int col : cols) {
    VecX fd(n);
    if (col < ndof) {
      dp[col] = d0[col] + hd;
      const VecX fp = F(dp, zbar);
      dp[col] = d0[col] - hd;
      const VecX fm = F(dp, zbar);
      dp[col] = d0[col];
      fd = (fp - fm) / (2 * hd);
    } else {
      const int s = (col - ndof) / dim, i = (col - ndof) % dim;
      zp[s][i] = zbar[s][i] + hz;
      const VecX fp = F(d0, zp);
      zp[s][i] = zbar[s][i] - hz;
      const VecX fm = F(d0, zp);
      zp[s][i] = zbar[s][i];
      fd = (fp - fm) / (2 * hz);
    }
    const VecX ac = Ad.col(col);
    const double err = (fd - ac).cwiseAbs().maxCoeff();
    const double ref = std::max(ac.cwiseAbs().maxCoeff(), 1e-6 * anorm);
    jc.max_rel = std::max(jc.max_rel, err / ref);
    ++jc.cols_checked;
  }
  return jc;
}

}  // namespace rdc
