#include "rdc/solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace rdc {

double ncp_residual(double zn, double gap, double c) {
  return zn - std::max(0.0, zn - c * gap);
}

namespace {

using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Row = std::map<Dof, double>;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

// Scalar multiplier index (slave node, component) for each displacement DOF,
// -1 off the non-mortar surface.
std::vector<int> slave_scalar_of_dof(const Mesh& m) {
  std::vector<int> map(m.ndof, -1);
  for (size_t s = 0; s < m.slave_nodes.size(); ++s)
    for (int i = 0; i < m.dim; ++i) map[m.dof(m.slave_nodes[s], i)] = static_cast<int>(s) * m.dim + i;
  return map;
}

// Append the frame-derivative row z . d(t)/d(d) of one tangential condition.
void append_frame_row(const Mesh& m, const NodeFrame& fr, const Vec3& z, int which, int row,
                      const std::vector<char>& fixed, std::vector<Triplet>& out) {
  for (const NodeFrame::Dep& dep : fr.deps) {
    const Mat3& dt = which == 0 ? dep.dt1 : dep.dt2;
    for (int c = 0; c < m.dim; ++c) {
      double v = 0.0;
      for (int i = 0; i < m.dim; ++i) v += z[i] * dt(i, c);
      const Dof col = m.dof(dep.node, c);
      if (v != 0.0 && !fixed[col]) out.emplace_back(row, col, v);
    }
  }
}

}  // namespace

void assemble_iterate(const Mesh& m, const Material& mat, const SolverConfig& cfg,
                      double pressure, bool follower, const VecX& d,
                      const std::vector<Vec3>& z, ContactAssembly& out) {
  out.counters = Counters{};
  out.frames = build_frames(m, d, cfg.frame_mode, &out.counters);
  out.mortar = assemble_mortar(m, d, out.frames, cfg.mortar);
  out.counters += out.mortar.counters;

  VecX fint = VecX::Zero(m.ndof);
  out.Keff.clear();
  internal_forces(m, mat, d, fint, &out.Keff);

  out.fext = VecX::Zero(m.ndof);
  if (pressure != 0.0) {
    std::vector<Triplet> Kp;
    pressure_forces(m, pressure, d, follower, out.fext, follower ? &Kp : nullptr);
    for (const Triplet& t : Kp) out.Keff.emplace_back(t.row(), t.col(), -t.value());
  }
  out.r = fint - out.fext;

  // Contact force D^T z and the contact-geometric stiffness: the mortar
  // matrix factors as diag(Dtilde) U with constant U, so both reduce to
  // Dtilde and its derivative.
  out.fc = VecX::Zero(m.ndof);
  const int ns = static_cast<int>(m.slave_nodes.size());
  const RowMat Ur = out.mortar.U;
  const RowMat dDt = out.mortar.dDtilde;
  for (int j = 0; j < ns; ++j) {
    for (RowMat::InnerIterator uit(Ur, j); uit; ++uit) {
      const int k = static_cast<int>(uit.col());
      const double ujk = uit.value();
      for (int i = 0; i < m.dim; ++i)
        out.fc[m.dof(m.slave_nodes[k], i)] += out.mortar.Dtilde[j] * ujk * z[j][i];
      for (RowMat::InnerIterator dit(dDt, j); dit; ++dit)
        for (int i = 0; i < m.dim; ++i) {
          const double v = z[j][i] * ujk * dit.value();
          if (v != 0.0)
            out.Keff.emplace_back(m.dof(m.slave_nodes[k], i), static_cast<Dof>(dit.col()), v);
        }
    }
  }
}

std::vector<char> eligible_nodes(const Mesh& m, const MortarData& mortar,
                                 const std::vector<char>& fixed) {
  std::vector<char> e(m.slave_nodes.size(), 0);
  for (size_t s = 0; s < m.slave_nodes.size(); ++s) {
    if (!mortar.supported[s]) continue;
    bool all_fixed = true;
    for (int i = 0; i < m.dim; ++i)
      if (!fixed[m.dof(m.slave_nodes[s], i)]) all_fixed = false;
    e[s] = all_fixed ? 0 : 1;
  }
  return e;
}

std::vector<char> update_active_set(const FrameSet& frames, const MortarData& mortar,
                                    const std::vector<Vec3>& z, double c_eta,
                                    const std::vector<char>& eligible) {
  std::vector<char> act(eligible.size(), 0);
  for (size_t s = 0; s < eligible.size(); ++s) {
    if (!eligible[s]) continue;
    const double zn = frames.frames[s].n.dot(z[s]);
    act[s] = zn - c_eta * mortar.gap[s] > 0.0 ? 1 : 0;
  }
  return act;
}

SaddleSystem build_saddle(const Mesh& m, const std::vector<char>& fixed,
                          const ContactAssembly& sys, const std::vector<char>& act,
                          const std::vector<Vec3>& z) {
  const int ns = static_cast<int>(m.slave_nodes.size());
  const int nz = ns * m.dim;
  const int B = m.ndof;
  SaddleSystem S;
  S.n = m.ndof + nz;
  S.rhs = VecX::Zero(S.n);

  for (const Triplet& t : sys.Keff)
    if (!fixed[t.row()] && !fixed[t.col()]) S.A.push_back(t);
  for (Dof f = 0; f < m.ndof; ++f) {
    if (fixed[f])
      S.A.emplace_back(f, f, 1.0);
    else
      S.rhs[f] = -sys.r[f];
  }

  // D^T couples slave displacement rows to the multipliers of the same
  // component.
  const RowMat Ur = sys.mortar.U;
  for (int j = 0; j < ns; ++j)
    for (RowMat::InnerIterator uit(Ur, j); uit; ++uit) {
      const int k = static_cast<int>(uit.col());
      const double djk = sys.mortar.Dtilde[j] * uit.value();
      for (int i = 0; i < m.dim; ++i) {
        const Dof row = m.dof(m.slave_nodes[k], i);
        if (!fixed[row]) S.A.emplace_back(row, B + j * m.dim + i, djk);
      }
    }

  const RowMat dgap = sys.mortar.dgap;
  for (int s = 0; s < ns; ++s) {
    const int zrow = B + s * m.dim;
    if (!act[s]) {
      for (int i = 0; i < m.dim; ++i) S.A.emplace_back(zrow + i, zrow + i, 1.0);
      continue;
    }
    // Weighted-gap row, then tangential rows t . z = 0 with their
    // frame-derivative terms.
    for (RowMat::InnerIterator git(dgap, s); git; ++git)
      if (!fixed[git.col()]) S.A.emplace_back(zrow, static_cast<Dof>(git.col()), git.value());
    S.rhs[zrow] = -sys.mortar.gap[s];
    const NodeFrame& fr = sys.frames.frames[s];
    for (int w = 0; w + 1 < m.dim; ++w) {
      const int row = zrow + 1 + w;
      const Vec3& t = w == 0 ? fr.t1 : fr.t2;
      for (int i = 0; i < m.dim; ++i)
        if (t[i] != 0.0) S.A.emplace_back(row, B + s * m.dim + i, t[i]);
      append_frame_row(m, fr, z[s], w, row, fixed, S.A);
    }
  }
  return S;
}

void saddle_solve(const Mesh& m, const std::vector<char>& fixed, const ContactAssembly& sys,
                  const std::vector<char>& act, const std::vector<Vec3>& z, VecX& dd,
                  std::vector<Vec3>& znew, long long* nnz) {
  const SaddleSystem S = build_saddle(m, fixed, sys, act, z);
  const VecX x = solve_sparse(S.n, S.A, S.rhs, nnz);
  dd = x.head(m.ndof);
  const int ns = static_cast<int>(m.slave_nodes.size());
  znew.assign(ns, Vec3::Zero());
  for (int s = 0; s < ns; ++s)
    for (int i = 0; i < m.dim; ++i) znew[s][i] = x[m.ndof + s * m.dim + i];
}

void condensed_solve(const Mesh& m, const std::vector<char>& fixed, const ContactAssembly& sys,
                     const std::vector<char>& act, const std::vector<Vec3>& z, VecX& dd,
                     std::vector<Vec3>& znew, long long* nnz) {
  const int ns = static_cast<int>(m.slave_nodes.size());
  const int dim = m.dim;
  const std::vector<int> dof2s = slave_scalar_of_dof(m);

  // Slave scalar rows of the effective stiffness, needed to express the
  // multipliers through the inverse mortar factor.
  std::vector<Row> srow(ns * dim);
  for (const Triplet& t : sys.Keff) {
    const int sc = dof2s[t.row()];
    if (sc >= 0) srow[sc][t.col()] += t.value();
  }

  // Multiplier expression z_(s,i) = -combo_rhs - combo_row . delta d for
  // active nodes, from the slave equilibrium rows mixed by the closed-form
  // inverse of the mortar factor.  A combination touching a Dirichlet row is
  // invalid: that row carries a reaction, not an equilibrium statement.
  const RowMat Tg = sys.mortar.Tglob;
  std::vector<std::array<Row, 3>> combo(ns);
  std::vector<std::array<double, 3>> combo_rhs(ns);
  std::vector<std::array<char, 3>> valid(ns);
  for (int s = 0; s < ns; ++s) {
    if (!act[s]) continue;
    for (int i = 0; i < dim; ++i) {
      combo_rhs[s][i] = 0.0;
      valid[s][i] = 1;
      Row& row = combo[s][i];
      for (RowMat::InnerIterator tit(Tg, s); tit; ++tit) {
        const int y = static_cast<int>(tit.col());
        const double w = tit.value() / sys.mortar.Dtilde[s];
        const Dof ydof = m.dof(m.slave_nodes[y], i);
        if (fixed[ydof]) {
          valid[s][i] = 0;
          continue;
        }
        for (const auto& [col, v] : srow[y * dim + i]) row[col] += w * v;
        combo_rhs[s][i] += w * sys.r[ydof];
      }
    }
  }

  std::vector<char> replaced(m.ndof, 0);
  for (int s = 0; s < ns; ++s)
    if (act[s])
      for (int i = 0; i < dim; ++i) replaced[m.dof(m.slave_nodes[s], i)] = 1;

  std::vector<Triplet> A;
  A.reserve(sys.Keff.size());
  VecX rhs = VecX::Zero(m.ndof);
  for (Dof f = 0; f < m.ndof; ++f)
    if (!fixed[f] && !replaced[f]) rhs[f] = -sys.r[f];

  for (const Triplet& t : sys.Keff)
    if (!fixed[t.row()] && !replaced[t.row()] && !fixed[t.col()]) A.push_back(t);

  // Eliminate the active multipliers from the remaining slave equilibrium
  // rows they load through D^T.
  const RowMat Ur = sys.mortar.U;
  for (int j = 0; j < ns; ++j) {
    if (!act[j]) continue;
    for (RowMat::InnerIterator uit(Ur, j); uit; ++uit) {
      const int k = static_cast<int>(uit.col());
      const double djk = sys.mortar.Dtilde[j] * uit.value();
      for (int i = 0; i < dim; ++i) {
        const Dof row = m.dof(m.slave_nodes[k], i);
        if (fixed[row] || replaced[row]) continue;
        if (!valid[j][i])
          throw Error("condensed path cannot eliminate the multiplier of a partially "
                      "constrained node; use the saddle path");
        for (const auto& [col, v] : combo[j][i])
          if (!fixed[col]) A.emplace_back(row, col, -djk * v);
        rhs[row] += djk * combo_rhs[j][i];
      }
    }
  }

  // Active nodes: the gap row and the tangential rows take over the node's
  // free DOF rows.  With q fixed DOFs the last q tangential rows are dropped;
  // the recovery below re-imposes them on the multiplier instead.
  const RowMat dgap = sys.mortar.dgap;
  for (int s = 0; s < ns; ++s) {
    if (!act[s]) continue;
    std::vector<Dof> hosts;
    for (int i = 0; i < dim; ++i) {
      const Dof dof = m.dof(m.slave_nodes[s], i);
      if (!fixed[dof]) hosts.push_back(dof);
    }
    if (hosts.empty()) throw Error("active node with every DOF constrained");
    const NodeFrame& fr = sys.frames.frames[s];

    for (RowMat::InnerIterator git(dgap, s); git; ++git)
      if (!fixed[git.col()]) A.emplace_back(hosts[0], static_cast<Dof>(git.col()), git.value());
    rhs[hosts[0]] = -sys.mortar.gap[s];

    for (size_t h = 1; h < hosts.size(); ++h) {
      const int w = static_cast<int>(h) - 1;
      const Vec3& t = w == 0 ? fr.t1 : fr.t2;
      append_frame_row(m, fr, z[s], w, hosts[h], fixed, A);
      double rv = 0.0;
      for (int i = 0; i < dim; ++i) {
        if (t[i] == 0.0) continue;
        if (!valid[s][i])
          throw Error("condensed path cannot form a tangential row at a partially "
                      "constrained node; use the saddle path");
        for (const auto& [col, v] : combo[s][i])
          if (!fixed[col]) A.emplace_back(hosts[h], col, -t[i] * v);
        rv += t[i] * combo_rhs[s][i];
      }
      rhs[hosts[h]] = rv;
    }
  }

  for (Dof f = 0; f < m.ndof; ++f)
    if (fixed[f]) A.emplace_back(f, f, 1.0);

  dd = solve_sparse(m.ndof, A, rhs, nnz);

  // Multiplier recovery; components whose combination was invalid are closed
  // with the tangential conditions instead.
  znew.assign(ns, Vec3::Zero());
  for (int s = 0; s < ns; ++s) {
    if (!act[s]) continue;
    const NodeFrame& fr = sys.frames.frames[s];
    std::vector<int> missing;
    for (int i = 0; i < dim; ++i) {
      if (!valid[s][i]) {
        missing.push_back(i);
        continue;
      }
      double v = -combo_rhs[s][i];
      for (const auto& [col, w] : combo[s][i]) v -= w * dd[col];
      znew[s][i] = v;
    }
    if (missing.empty()) continue;
    const int q = static_cast<int>(missing.size());
    MatX Aq = MatX::Zero(q, q);
    VecX bq = VecX::Zero(q);
    for (int r = 0; r < q; ++r) {
      const Vec3& t = r == 0 ? fr.t1 : fr.t2;
      for (int c = 0; c < q; ++c) Aq(r, c) = t[missing[c]];
      for (int i = 0; i < dim; ++i)
        if (std::find(missing.begin(), missing.end(), i) == missing.end())
          bq[r] -= t[i] * znew[s][i];
    }
    const Eigen::FullPivLU<MatX> lu(Aq);
    if (lu.isInvertible()) {
      const VecX x = lu.solve(bq);
      for (int c = 0; c < q; ++c) znew[s][missing[c]] = x[c];
    }
  }
}

ContactSolver::ContactSolver(const Mesh& mesh, const Material& material, const LoadCase& load,
                             const SolverConfig& config)
    : mesh_(mesh), material_(material), load_(load), config_(config) {
  if (static_cast<int>(load_.fixed.size()) != mesh_.ndof)
    throw Error("load case fixed flags do not match the mesh DOF count");
  if (load_.dirichlet_target.size() == 0) load_.dirichlet_target = VecX::Zero(mesh_.ndof);

  double hsum = 0.0;
  for (const Facet& f : mesh_.nonmortar) hsum += mesh_.facet_diameter(f);
  const double hbar = hsum / std::max<size_t>(1, mesh_.nonmortar.size());
  c_eta_ = config_.c_eta > 0.0 ? config_.c_eta : material_.E / hbar;

  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (const Vec3& x : mesh_.X) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  mesh_scale_ = (hi - lo).norm();

  state_.d = VecX::Zero(mesh_.ndof);
  state_.z.assign(mesh_.slave_nodes.size(), Vec3::Zero());
  state_.active.assign(mesh_.slave_nodes.size(), 0);
}

void ContactSolver::solve_step(int step, double factor) {
  StepRecord rec;
  rec.step = step;
  rec.factor = factor;

  for (Dof f = 0; f < mesh_.ndof; ++f)
    if (load_.fixed[f]) state_.d[f] = factor * load_.dirichlet_target[f];

  std::vector<char> active = state_.active;
  std::map<std::vector<char>, int> visits;
  ++visits[active];
  double scale = 1.0;

  ContactAssembly sys;
  bool converged = false;
  for (int it = 1; it <= config_.max_newton; ++it) {
    IterationRecord irec;
    irec.iter = it;
    double t0 = now_ms();
    assemble_iterate(mesh_, material_, config_, factor * load_.pressure, load_.follower,
                     state_.d, state_.z, sys);
    const std::vector<char> eligible = eligible_nodes(mesh_, sys.mortar, load_.fixed);

    // Combined residual: structural (with contact forces) at free DOFs,
    // complementarity and tangential conditions at eligible nodes.
    double rn2 = 0.0;
    for (Dof f = 0; f < mesh_.ndof; ++f)
      if (!load_.fixed[f]) {
        const double v = sys.r[f] + sys.fc[f];
        rn2 += v * v;
      }
    for (size_t s = 0; s < eligible.size(); ++s) {
      if (!eligible[s]) continue;
      const NodeFrame& fr = sys.frames.frames[s];
      const double c = ncp_residual(fr.n.dot(state_.z[s]), sys.mortar.gap[s], c_eta_);
      rn2 += c * c;
      for (int w = 0; w + 1 < mesh_.dim; ++w) {
        const double tv = (w == 0 ? fr.t1 : fr.t2).dot(state_.z[s]);
        rn2 += tv * tv;
      }
    }
    irec.residual = std::sqrt(rn2);

    std::vector<char> anew = update_active_set(sys.frames, sys.mortar, state_.z, c_eta_, eligible);
    if (it == 1) {
      double fe2 = 0.0;
      for (Dof f = 0; f < mesh_.ndof; ++f)
        if (!load_.fixed[f]) fe2 += sys.fext[f] * sys.fext[f];
      scale = std::max(irec.residual, std::sqrt(fe2));
      if (scale < 1e-300) scale = 1.0;
    }
    irec.rel = irec.residual / scale;
    irec.counters = sys.counters;
    state_.totals += sys.counters;
    irec.assemble_ms = now_ms() - t0;

    if (irec.rel < config_.tol_rel && anew == active) {
      irec.active = 0;
      for (char a : active) irec.active += a;
      rec.iters.push_back(irec);
      rec.iterations = it;
      converged = true;
      break;
    }

    // A body held only by contact needs a nonempty set before the first
    // solve; nodes initially touching the obstacle are then seeded.
    bool seed = false;
    if (step == 1 && it == 1) {
      bool any = false;
      for (char a : anew) any = any || a;
      if (!any) {
        for (size_t s = 0; s < eligible.size(); ++s)
          if (eligible[s] && sys.frames.frames[s].projected &&
              sys.frames.frames[s].alpha <= 1e-8 * mesh_scale_)
            anew[s] = 1;
        seed = true;
      }
    }
    if (anew != active) {
      active = std::move(anew);
      if (!seed && ++visits[active] > 3) {
        std::ostringstream os;
        int na = 0;
        for (char a : active) na += a;
        os << "step " << step << ": active-set cycling detected (set of " << na
           << " nodes revisited " << visits[active] << " times)";
        throw Error(os.str());
      }
    }
    irec.active = 0;
    for (char a : active) irec.active += a;

    t0 = now_ms();
    VecX dd;
    std::vector<Vec3> znew;
    if (config_.saddle_path)
      saddle_solve(mesh_, load_.fixed, sys, active, state_.z, dd, znew, &irec.lin_nnz);
    else
      condensed_solve(mesh_, load_.fixed, sys, active, state_.z, dd, znew, &irec.lin_nnz);
    irec.solve_ms = now_ms() - t0;
    rec.iters.push_back(irec);

    state_.d += dd;
    state_.z = std::move(znew);
    rec.iterations = it;
  }

  if (!converged) {
    std::ostringstream os;
    os << "step " << step << ": no convergence after " << config_.max_newton
       << " iterations (relative residual "
       << (rec.iters.empty() ? 0.0 : rec.iters.back().rel) << ")";
    throw Error(os.str());
  }

  state_.active = active;
  state_.frames = std::move(sys.frames);
  state_.mortar = std::move(sys.mortar);
  rec.converged = true;
  state_.log.push_back(std::move(rec));
}

void ContactSolver::run() {
  for (int k = 1; k <= config_.steps; ++k)
    solve_step(k, static_cast<double>(k) / config_.steps);
}

}  // namespace rdc
