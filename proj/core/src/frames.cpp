#include "rdc/frames.hpp"

#include <cmath>
#include <map>
#include <string>

namespace rdc {

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
  return s;
}

// Local parametric coordinates of node `loc` of facet f.
Vec2 local_xi(const Facet& f, int loc) {
  const Vec3 p = node_xi(f.kind, loc);
  return Vec2(p[0], p[1]);
}

}  // namespace

std::vector<Vec3> build_rigid_normals(const Mesh& m) {
  std::vector<Vec3> nr(m.nnodes(), Vec3::Zero());
  for (const Facet& f : m.rigid) {
    for (int a = 0; a < f.nn; ++a) {
      const Vec3 n = facet_normal(m, f, local_xi(f, a), nullptr);
      nr[f.nodes[a]] += n.normalized();
    }
  }
  for (int n = 0; n < m.nnodes(); ++n)
    if (m.is_rigid_node[n]) {
      const double len = nr[n].norm();
      if (len < 1e-14) throw Error("degenerate obstacle normal at node " + std::to_string(n));
      nr[n] /= len;
    }
  return nr;
}

FrameProjection project_to_rigid(const Mesh& m, const std::vector<Vec3>& rigid_normal,
                                 const Vec3& p, Counters* cnt) {
  FrameProjection best;
  double best_alpha = 0.0;

  for (size_t fi = 0; fi < m.rigid.size(); ++fi) {
    const Facet& f = m.rigid[fi];
    const int pd = param_dim(f.kind);
    const double diam = m.facet_diameter(f);

    // Newton on sum_k N_k(xi) (x_k + alpha nr_k) = p, unknowns (xi, alpha).
    Vec3 u = Vec3::Zero();
    if (f.kind == ElementKind::tri3 || f.kind == ElementKind::tri6) u.head<2>().setConstant(1.0 / 3.0);
    if (cnt) ++cnt->projections;
    bool conv = false;
    for (int it = 0; it < 40; ++it) {
      double N[kMaxInterfaceNodes], dN[kMaxInterfaceNodes][2];
      const double xi[2] = {u[0], u[1]};
      shapefn::values(f.kind, xi, N);
      shapefn::grads(f.kind, xi, dN);
      Vec3 R = -p;
      Mat3 W = Mat3::Zero();
      for (int a = 0; a < f.nn; ++a) {
        const Vec3 xa = m.X[f.nodes[a]] + u[pd] * rigid_normal[f.nodes[a]];
        R += N[a] * xa;
        for (int c = 0; c < pd; ++c) W.col(c) += dN[a][c] * xa;
        W.col(pd) += N[a] * rigid_normal[f.nodes[a]];
      }
      if (m.dim == 2) {
        W(2, 2) = 1.0;
        R[2] = 0.0;
      }
      if (R.norm() <= 1e-12 * std::max(diam, 1.0)) {
        conv = true;
        break;
      }
      const Vec3 step = W.partialPivLu().solve(-R);
      u += step;
      if (u.head<2>().norm() > 100.0) break;
    }
    if (!conv) continue;
    if (!inside_reference(f.kind, Vec2(u[0], u[1]), 1e-8)) continue;
    if (!best.ok || std::abs(u[pd]) < std::abs(best_alpha)) {
      best.ok = true;
      best.facet = static_cast<int>(fi);
      best.xi = Vec2(u[0], u[1]);
      best.alpha = u[pd];
      best_alpha = u[pd];
    }
  }
  return best;
}

FrameMode frame_mode_from_name(const std::string& s) {
  if (s == "projected") return FrameMode::projected;
  if (s == "averaged") return FrameMode::averaged;
  throw Error("unknown frame mode '" + s + "'");
}

const char* frame_mode_name(FrameMode f) {
  return f == FrameMode::projected ? "projected" : "averaged";
}

FrameSet build_frames(const Mesh& m, const VecX& d, FrameMode mode, Counters* cnt) {
  FrameSet fs;
  fs.rigid_normal = build_rigid_normals(m);
  fs.frames.resize(m.slave_nodes.size());

  // Non-mortar facets adjacent to each slave node, as (facet, local index).
  std::map<NodeId, std::vector<std::pair<int, int>>> adj;
  for (size_t fi = 0; fi < m.nonmortar.size(); ++fi)
    for (int a = 0; a < m.nonmortar[fi].nn; ++a)
      adj[m.nonmortar[fi].nodes[a]].push_back({static_cast<int>(fi), a});

  for (size_t s = 0; s < m.slave_nodes.size(); ++s) {
    const NodeId j = m.slave_nodes[s];
    NodeFrame& fr = fs.frames[s];
    const Vec3 p = m.xcur(j, d);

    // Averaged normal of the adjacent non-mortar facets in the current
    // configuration; depends on every node of those facets.  Computed for
    // every node: it is the fallback frame, and a projected frame is only
    // accepted when it roughly agrees with it.
    Vec3 avg_sum = Vec3::Zero();
    Vec3 ref_sum = Vec3::Zero();
    std::map<NodeId, Mat3> avg_dsum;
    for (const auto& [fi, loc] : adj[j]) {
      const Facet& f = m.nonmortar[fi];
      const Vec2 xiloc = local_xi(f, loc);
      double dN[kMaxInterfaceNodes][2];
      const double xi[2] = {xiloc[0], xiloc[1]};
      shapefn::grads(f.kind, xi, dN);
      Vec3 t1 = Vec3::Zero(), t2 = Vec3::Zero();
      Vec3 r1 = Vec3::Zero(), r2 = Vec3::Zero();
      for (int a = 0; a < f.nn; ++a) {
        const Vec3 x = m.xcur(f.nodes[a], d);
        t1 += dN[a][0] * x;
        t2 += dN[a][1] * x;
        r1 += dN[a][0] * m.X[f.nodes[a]];
        r2 += dN[a][1] * m.X[f.nodes[a]];
      }
      const Vec3 nfr = m.dim == 2 ? Vec3(r1[1], -r1[0], 0.0) : Vec3(r1.cross(r2));
      if (nfr.norm() > 1e-14) ref_sum += nfr.normalized();
      const Vec3 nf = m.dim == 2 ? Vec3(t1[1], -t1[0], 0.0) : Vec3(t1.cross(t2));
      const double lf = nf.norm();
      if (lf < 1e-14) continue;
      const Vec3 nhat = nf / lf;
      avg_sum += nhat;
      const Mat3 Pf = (Mat3::Identity() - nhat * nhat.transpose()) / lf;
      for (int a = 0; a < f.nn; ++a) {
        Mat3 dnf;
        if (m.dim == 2) {
          dnf.setZero();
          dnf(0, 1) = dN[a][0];
          dnf(1, 0) = -dN[a][0];
        } else {
          dnf = -dN[a][0] * skew(t2) + dN[a][1] * skew(t1);
        }
        avg_dsum.try_emplace(f.nodes[a], Mat3::Zero()).first->second += Pf * dnf;
      }
    }
    const double avg_len = avg_sum.norm();
    if (avg_len < 1e-14) throw Error("degenerate boundary normal at node " + std::to_string(j));
    const Vec3 avg_n = avg_sum / avg_len;

    FrameProjection proj;
    if (mode == FrameMode::projected) proj = project_to_rigid(m, fs.rigid_normal, p, cnt);
    Mat3 dn_dp = Mat3::Zero();

    if (proj.ok) {
      const Facet& f = m.rigid[proj.facet];
      const int pd = param_dim(f.kind);
      double N[kMaxInterfaceNodes], dN[kMaxInterfaceNodes][2];
      const double xi[2] = {proj.xi[0], proj.xi[1]};
      shapefn::values(f.kind, xi, N);
      shapefn::grads(f.kind, xi, dN);

      Vec3 nt = Vec3::Zero();  // interpolated obstacle normal, not unit
      Mat3 W = Mat3::Zero();
      Mat3 B = Mat3::Zero();  // column c < pd: d(nt)/d(xi_c)
      for (int a = 0; a < f.nn; ++a) {
        const Vec3 nra = fs.rigid_normal[f.nodes[a]];
        const Vec3 xa = m.X[f.nodes[a]] + proj.alpha * nra;
        nt += N[a] * nra;
        for (int c = 0; c < pd; ++c) {
          W.col(c) += dN[a][c] * xa;
          B.col(c) += dN[a][c] * nra;
        }
        W.col(pd) += N[a] * nra;
      }
      if (m.dim == 2) W(2, 2) = 1.0;
      const double len = nt.norm();
      // Reject projections that point sideways: they come from obstacle
      // regions that do not face this node, so their direction is not a
      // contact normal.
      if (len >= 1e-12 && -nt.dot(avg_n) >= 0.5 * len) {
        fr.projected = true;
        fr.alpha = proj.alpha;
        const Vec3 u = nt / len;
        fr.n = -u;
        // d(xi, alpha)/dp rows come from the inverse of the projection
        // Jacobian; only the xi rows feed the normal.
        const Mat3 Winv = W.inverse();
        Mat3 Bpad = Mat3::Zero();
        for (int c = 0; c < pd; ++c) Bpad.col(c) = B.col(c);
        const Mat3 dnt_dp = Bpad * Winv;
        dn_dp = -(Mat3::Identity() - u * u.transpose()) / len * dnt_dp;
        fr.deps.push_back({j, dn_dp, Mat3::Zero(), Mat3::Zero()});
      }
    }

    if (!fr.projected) {
      fr.n = avg_n;
      const Mat3 Pu = (Mat3::Identity() - avg_n * avg_n.transpose()) / avg_len;
      for (const auto& [q, ds] : avg_dsum)
        fr.deps.push_back({q, Pu * ds, Mat3::Zero(), Mat3::Zero()});
    }

    // Tangents and their chains from dn.
    if (m.dim == 2) {
      fr.t1 = Vec3(-fr.n[1], fr.n[0], 0.0);
      Mat3 Rz = Mat3::Zero();
      Rz(0, 1) = -1.0;
      Rz(1, 0) = 1.0;
      for (auto& dep : fr.deps) dep.dt1 = Rz * dep.dn;
    } else {
      // The in-plane axis is chosen from the reference normal, not the
      // current one: a current-normal argmin flips branches whenever two
      // components tie (symmetric meshes sit exactly on such ties), which
      // makes t1 discontinuous in d.  The reference choice is constant, so
      // the tangents inherit the smoothness of n.
      const Vec3 nsel = ref_sum.norm() > 1e-14 ? ref_sum : fr.n;
      int axis = 0;
      for (int i = 1; i < 3; ++i)
        if (std::abs(nsel[i]) < std::abs(nsel[axis])) axis = i;
      Vec3 e = Vec3::Unit(axis);
      if (e.cross(fr.n).norm() < 0.1) {
        // Degenerate only after an extreme rotation of the surface; pick a
        // better-conditioned axis even though the switch is non-smooth.
        axis = 0;
        for (int i = 1; i < 3; ++i)
          if (std::abs(fr.n[i]) < std::abs(fr.n[axis])) axis = i;
        e = Vec3::Unit(axis);
      }
      const Vec3 v = e.cross(fr.n);
      const double lv = v.norm();
      fr.t1 = v / lv;
      fr.t2 = fr.n.cross(fr.t1);
      for (auto& dep : fr.deps) {
        const Mat3 dv = skew(e) * dep.dn;
        dep.dt1 = (Mat3::Identity() - fr.t1 * fr.t1.transpose()) / lv * dv;
        dep.dt2 = -skew(fr.t1) * dep.dn + skew(fr.n) * dep.dt1;
      }
    }
  }
  return fs;
}

}  // namespace rdc
