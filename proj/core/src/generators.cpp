#include "rdc/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace rdc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Doubled-index node store: even lattice coordinates are element corners,
// odd ones midside nodes, so one code path emits both orders and quadratic
// nodes evaluate the exact geometry at parameter midpoints.
struct LatticeNodes {
  Mesh* m;
  std::map<std::array<long long, 4>, NodeId> ids;

  template <class Pos>
  NodeId get(int region, long long a, long long b, long long c, Pos pos) {
    std::array<long long, 4> key{region, a, b, c};
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    NodeId id = static_cast<NodeId>(m->X.size());
    m->X.push_back(pos());
    ids.emplace(key, id);
    return id;
  }
};

// k intervals growing geometrically from a previous size h0, scaled to fill
// span exactly.
std::vector<double> graded_intervals(double h0, int k, double span) {
  double lo = 1e-6, hi = 1e6;
  auto fill = [&](double q) {
    double s = 0, t = h0;
    for (int i = 0; i < k; ++i) s += (t *= q);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    double q = 0.5 * (lo + hi);
    (fill(q) < span ? lo : hi) = q;
  }
  double q = 0.5 * (lo + hi);
  std::vector<double> seg(k);
  double t = h0, sum = 0;
  for (int i = 0; i < k; ++i) sum += (seg[i] = (t *= q));
  for (double& s : seg) s *= span / sum;
  return seg;
}

std::vector<double> doubled(const std::vector<double>& v) {
  std::vector<double> d(2 * v.size() - 1);
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    d[2 * i] = v[i];
    d[2 * i + 1] = 0.5 * (v[i] + v[i + 1]);
  }
  d.back() = v.back();
  return d;
}

void orient_rigid(Mesh& m, Facet& f) {
  double N[kMaxInterfaceNodes];
  const Vec2 c(0, 0);
  Vec3 fc = Vec3::Zero();
  const double p[2] = {c[0], c[1]};
  shapefn::values(f.kind, p, N);
  for (int a = 0; a < f.nn; ++a) fc += N[a] * m.X[f.nodes[a]];
  if (facet_normal(m, f, c, nullptr).dot(fc - m.rigid_interior) > 0.0) return;
  if (param_dim(f.kind) == 1) {
    std::swap(f.nodes[0], f.nodes[1]);
  } else {
    std::swap(f.nodes[1], f.nodes[3]);
    if (f.nn == 8) std::swap(f.nodes[4], f.nodes[7]), std::swap(f.nodes[5], f.nodes[6]);
  }
}

void check_orientation(Mesh& m, const char* what) {
  if (!boundary_orientation_check(m).empty())
    throw Error(std::string(what) + ": generated facet orientation is wrong");
}

}  // namespace

Mesh gen_hertz(int n, int order) {
  if (order != 1 && order != 2) throw Error("hertz generator: order must be 1 or 2");
  {
    bool ok = false;
    for (int v : {4, 8, 16, 32, 64, 128, 256}) ok = ok || v == n;
    if (!ok) throw Error("hertz generator: n must be one of 4, 8, 16, 32, 64, 128, 256");
  }
  const double R = 8.0, w = 0.075, ac = 3.0;
  // Far-field interval counts follow n so the family refines everywhere, not
  // just at the contact zone: a direction whose count grows slower leaves
  // far-field elements of asymptotically fixed size, and their interpolation
  // error puts a floor under any convergence measurement on the family.  For
  // first order the counts are linear in n; for second order they follow
  // n^(3/4), which makes the far-field O(h_far^2) error track the contact
  // zone's O(h^(3/2)) instead of outrunning it.  Above n = 64 (reference
  // meshes) the growth is damped: the reference is always second order, and
  // its far field is already far more accurate than any level it serves.
  const double nf = order == 1 ? std::min(double(n), 64.0 * std::sqrt(n / 64.0))
                               : 2.0 * std::pow(double(n), 0.75);
  const int m = std::max(4, static_cast<int>(std::ceil(0.5 * nf)));
  const int ms = std::max(2, static_cast<int>(std::ceil(0.25 * nf)));
  const int nb = n + 2 * m;  // bottom block cells, band included

  // Angular nodes over [-pi/2, pi/2]: n uniform band intervals, then per
  // side m intervals to pi/4 and ms more to the chord, both graded.
  std::vector<double> right;
  {
    auto seg = graded_intervals(2 * w / n, m, kPi / 4 - w);
    double x = w;
    for (double s : seg) right.push_back(x += s);
    right.back() = kPi / 4;
    auto seg2 = graded_intervals(seg.back(), ms, kPi / 4);
    x = kPi / 4;
    for (double s : seg2) right.push_back(x += s);
    right.back() = kPi / 2;
  }
  std::vector<double> phis;
  for (size_t i = right.size(); i-- > 0;) phis.push_back(-right[i]);
  for (int j = 0; j <= n; ++j) phis.push_back(w * (2.0 * j / n - 1.0));
  phis.insert(phis.end(), right.begin(), right.end());
  const int nphi = static_cast<int>(phis.size()) - 1;  // = nb + 2*ms

  // Radial fractions, finest layer at the surface sized to the band facets
  // and growing inward.
  const double target = (R * 2 * w / n) / (R - ac * std::sqrt(2.0));
  const int nr = std::max(3, static_cast<int>(std::ceil(0.375 * nf)));
  std::vector<double> gs(nr + 1, 0.0);
  {
    auto seg = graded_intervals(target, nr, 1.0);
    double acc = 0;
    for (int k = 0; k < nr; ++k) gs[k + 1] = (acc += seg[nr - 1 - k]);
    for (double& g : gs) g /= acc;
    gs[nr] = 1.0;
  }

  const std::vector<double> phid = doubled(phis);
  const std::vector<double> gd = doubled(gs);
  // Core half-square grid coordinates, traced from the angular nodes so the
  // ring attaches conformally on all three inner edges.
  std::vector<double> xd(2 * nb + 1), yd(2 * ms + 1);
  for (int j = 0; j <= 2 * nb; ++j)
    xd[j] = -ac + 2 * ac * (phid[2 * ms + j] + kPi / 4) / (kPi / 2);
  for (int i = 0; i <= 2 * ms; ++i) yd[i] = R - ac * (phid[i] + kPi / 2) / (kPi / 4);

  Mesh msh;
  msh.dim = 2;
  LatticeNodes nodes{&msh, {}};

  auto core = [&](long long i, long long j) {
    return nodes.get(0, i, j, 0, [&] { return Vec3(xd[j], yd[i], 0); });
  };
  auto inner_pt = [&](long long a) {
    if (a <= 2 * ms) return Vec3(-ac, yd[a], 0);
    if (a <= 2 * (ms + nb)) return Vec3(xd[a - 2 * ms], R - ac, 0);
    return Vec3(ac, yd[2 * ms - (a - 2 * (ms + nb))], 0);
  };
  auto ring = [&](long long a, long long k) {
    if (k == 0) {
      if (a <= 2 * ms) return core(a, 0);
      if (a <= 2 * (ms + nb)) return core(2 * ms, a - 2 * ms);
      return core(2 * ms - (a - 2 * (ms + nb)), 2 * nb);
    }
    return nodes.get(1, a, k, 0, [&] {
      const double phi = phid[a];
      const Vec3 arc(R * std::sin(phi), R - R * std::cos(phi), 0);
      const Vec3 in = inner_pt(a);
      return Vec3(in + gd[k] * (arc - in));
    });
  };

  const ElementKind bk = order == 1 ? ElementKind::quad4_bulk2d : ElementKind::quad8_bulk2d;
  const ElementKind lk = order == 1 ? ElementKind::line2 : ElementKind::line3;
  // Midside entries are only instantiated for order 2, so the lattice never
  // holds nodes no element references.
  auto add_bulk = [&](auto node, const std::array<std::array<long long, 2>, 8>& at) {
    BulkElement e;
    e.kind = bk;
    e.nn = order == 1 ? 4 : 8;
    for (int a = 0; a < e.nn; ++a) e.nodes[a] = node(at[a][0], at[a][1]);
    msh.bulk.push_back(e);
  };
  auto add_facet = [&](std::vector<Facet>& list, NodeId a, NodeId b, NodeId mid) {
    Facet f;
    f.kind = lk;
    f.nn = order == 1 ? 2 : 3;
    f.nodes[0] = a;
    f.nodes[1] = b;
    f.nodes[2] = mid;
    list.push_back(f);
  };

  for (int i = 0; i < ms; ++i)
    for (int j = 0; j < nb; ++j)
      add_bulk(core, {{{2 * i + 2, 2 * j},
                       {2 * i + 2, 2 * j + 2},
                       {2 * i, 2 * j + 2},
                       {2 * i, 2 * j},
                       {2 * i + 2, 2 * j + 1},
                       {2 * i + 1, 2 * j + 2},
                       {2 * i, 2 * j + 1},
                       {2 * i + 1, 2 * j}}});
  for (int a = 0; a < nphi; ++a)
    for (int k = 0; k < nr; ++k)
      add_bulk(ring, {{{2 * a, 2 * k},
                       {2 * a, 2 * k + 2},
                       {2 * a + 2, 2 * k + 2},
                       {2 * a + 2, 2 * k},
                       {2 * a, 2 * k + 1},
                       {2 * a + 1, 2 * k + 2},
                       {2 * a + 2, 2 * k + 1},
                       {2 * a + 1, 2 * k}}});

  const int band0 = ms + m;
  for (int a = band0; a < band0 + n; ++a)
    add_facet(msh.nonmortar, ring(2 * a, 2 * nr), ring(2 * a + 2, 2 * nr),
              order == 2 ? ring(2 * a + 1, 2 * nr) : NodeId(-1));
  for (int k = 0; k < nr; ++k) {
    add_facet(msh.neumann, ring(0, 2 * k), ring(0, 2 * k + 2),
              order == 2 ? ring(0, 2 * k + 1) : NodeId(-1));
    add_facet(msh.neumann, ring(2 * nphi, 2 * k + 2), ring(2 * nphi, 2 * k),
              order == 2 ? ring(2 * nphi, 2 * k + 1) : NodeId(-1));
  }
  for (int j = 0; j < nb; ++j)
    add_facet(msh.neumann, core(0, 2 * j + 2), core(0, 2 * j),
              order == 2 ? core(0, 2 * j + 1) : NodeId(-1));

  // Rigid arc, center (0, -8), finer than the band and wider than any slide.
  msh.rigid_interior = Vec3(0, -R, 0);
  msh.has_rigid_interior = true;
  const double psmax = 0.2;
  const int nrig = 2 * n;
  auto rignode = [&](long long i) {
    return nodes.get(2, i, 0, 0, [&] {
      const double ps = -psmax + i * (2 * psmax / (2 * nrig));
      return Vec3(R * std::sin(ps), -R + R * std::cos(ps), 0);
    });
  };
  for (int i = 0; i < nrig; ++i) {
    add_facet(msh.rigid, rignode(2 * i + 2), rignode(2 * i),
              order == 2 ? rignode(2 * i + 1) : NodeId(-1));
    orient_rigid(msh, msh.rigid.back());
  }

  msh.finalize();
  std::vector<NodeId>& axis = msh.sets["axis"];
  for (NodeId v = 0; v < msh.nnodes(); ++v)
    if (msh.node_dof[v] >= 0 && std::abs(msh.X[v][0]) <= 1e-9) axis.push_back(v);
  check_orientation(msh, "hertz generator");
  return msh;
}

Mesh gen_block3d(int nx, double amplitude) {
  if (nx < 2) throw Error("block generator: nx must be at least 2");
  const int nz = std::max(2, nx / 2);
  Mesh msh;
  msh.dim = 3;
  LatticeNodes nodes{&msh, {}};

  auto block = [&](long long i, long long j, long long k) {
    return nodes.get(0, i, j, k, [&] {
      return Vec3(-1.0 + double(i) / nx, -1.0 + double(j) / nx, double(k) / (2 * nz));
    });
  };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nx; ++j)
      for (int k = 0; k < nz; ++k) {
        BulkElement e;
        e.kind = ElementKind::hex8;
        e.nn = 8;
        const long long i0 = 2 * i, j0 = 2 * j, k0 = 2 * k;
        const long long di[8] = {0, 2, 2, 0, 0, 2, 2, 0};
        const long long dj[8] = {0, 0, 2, 2, 0, 0, 2, 2};
        const long long dk[8] = {0, 0, 0, 0, 2, 2, 2, 2};
        for (int a = 0; a < 8; ++a) e.nodes[a] = block(i0 + di[a], j0 + dj[a], k0 + dk[a]);
        msh.bulk.push_back(e);
        if (k == 0) {
          Facet f;
          f.kind = ElementKind::quad4;
          f.nn = 4;
          for (int a = 0; a < 4; ++a) f.nodes[a] = e.nodes[std::array<int, 4>{0, 3, 2, 1}[a]];
          msh.nonmortar.push_back(f);
        }
      }

  msh.rigid_interior = Vec3(0, 0, -2.0);
  msh.has_rigid_interior = true;
  const double lr = 1.25;
  const int nrig = nx + 4;
  // The rigid lattice is shifted by a fraction of its own spacing so its
  // grid lines never coincide with deformable-face node columns; nodes then
  // project into facet interiors instead of onto facet edges.
  const double sx = 0.37 * 2 * lr / nrig, sy = -0.23 * 2 * lr / nrig;
  auto zr = [&](double x, double y) {
    return -0.02 - amplitude * 0.5 * (1.0 - std::cos(kPi * x) * std::cos(kPi * y));
  };
  auto rig = [&](long long i, long long j) {
    return nodes.get(2, i, j, 0, [&] {
      const double x = sx - lr + 2 * lr * double(i) / nrig;
      const double y = sy - lr + 2 * lr * double(j) / nrig;
      return Vec3(x, y, zr(x, y));
    });
  };
  for (int i = 0; i < nrig; ++i)
    for (int j = 0; j < nrig; ++j) {
      Facet f;
      f.kind = ElementKind::quad4;
      f.nn = 4;
      f.nodes[0] = rig(i, j);
      f.nodes[1] = rig(i + 1, j);
      f.nodes[2] = rig(i + 1, j + 1);
      f.nodes[3] = rig(i, j + 1);
      msh.rigid.push_back(f);
      orient_rigid(msh, msh.rigid.back());
    }

  msh.finalize();
  std::vector<NodeId>& top = msh.sets["top"];
  for (NodeId v = 0; v < msh.nnodes(); ++v)
    if (msh.node_dof[v] >= 0 && std::abs(msh.X[v][2] - 1.0) <= 1e-9) top.push_back(v);
  check_orientation(msh, "block generator");
  return msh;
}

Mesh gen_punch3d(int nb) {
  if (nb < 4) throw Error("punch generator: nb must be at least 4");
  const int nzb = std::max(2, nb / 2);
  const double hz = 0.8;
  Mesh msh;
  msh.dim = 3;
  LatticeNodes nodes{&msh, {}};

  auto base = [&](long long i, long long j, long long k) {
    return nodes.get(0, i, j, k, [&] {
      return Vec3(-1.0 + double(i) / nb, -1.0 + double(j) / nb, hz * double(k) / (2 * nzb));
    });
  };
  // hex20 corner/edge offsets in doubled lattice coordinates, matching the
  // reference node table.
  static const int off[20][3] = {{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0}, {0, 0, 2},
                                 {2, 0, 2}, {2, 2, 2}, {0, 2, 2}, {1, 0, 0}, {2, 1, 0},
                                 {1, 2, 0}, {0, 1, 0}, {1, 0, 2}, {2, 1, 2}, {1, 2, 2},
                                 {0, 1, 2}, {0, 0, 1}, {2, 0, 1}, {2, 2, 1}, {0, 2, 1}};
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nzb; ++k) {
        BulkElement e;
        e.kind = ElementKind::hex20;
        e.nn = 20;
        for (int a = 0; a < 20; ++a)
          e.nodes[a] = base(2 * i + off[a][0], 2 * j + off[a][1], 2 * k + off[a][2]);
        msh.bulk.push_back(e);
        if (k == nzb - 1) {
          Facet f;
          f.kind = ElementKind::quad8;
          f.nn = 8;
          static const int top[8] = {4, 5, 6, 7, 12, 13, 14, 15};
          for (int a = 0; a < 8; ++a) f.nodes[a] = e.nodes[top[a]];
          msh.nonmortar.push_back(f);
        }
      }

  // Rigid pin: butterfly disc of radius 0.4 at z0 plus a quarter-torus rim
  // out to radius 0.5, all quad8.
  const double z0 = hz + 0.02, rdisc = 0.4, rfil = 0.1, s = 0.16;
  msh.rigid_interior = Vec3(0, 0, z0 + 0.5);
  msh.has_rigid_interior = true;
  const int nc = std::max(2, nb / 3), nring = std::max(2, nb / 3), nfil = std::max(1, nb / 6);
  auto trace = [&](long long t) { return s * std::tan(-kPi / 4 + (kPi / 2) * t / (2 * nc)); };
  auto pcore = [&](long long i, long long j) {
    return nodes.get(3, i, j, 0, [&] { return Vec3(trace(j), trace(i), z0); });
  };
  auto pring = [&](long long a, long long k) {
    a %= 8 * nc;
    if (k == 0) {
      if (a <= 2 * nc) return pcore(a, 2 * nc);
      if (a <= 4 * nc) return pcore(2 * nc, 2 * nc - (a - 2 * nc));
      if (a <= 6 * nc) return pcore(2 * nc - (a - 4 * nc), 0);
      return pcore(0, a - 6 * nc);
    }
    return nodes.get(4, a, k, 0, [&] {
      const double th = -kPi / 4 + (kPi / 2) * a / (2 * nc);
      double rho, z;
      if (k <= 2 * nring) {
        const double rsq = s / std::max(std::abs(std::cos(th)), std::abs(std::sin(th)));
        rho = rsq + (rdisc - rsq) * double(k) / (2 * nring);
        z = z0;
      } else {
        const double beta = (kPi / 2) * double(k - 2 * nring) / (2 * nfil);
        rho = rdisc + rfil * std::sin(beta);
        z = z0 + rfil * (1.0 - std::cos(beta));
      }
      return Vec3(rho * std::cos(th), rho * std::sin(th), z);
    });
  };
  auto add_pin = [&](NodeId c0, NodeId c1, NodeId c2, NodeId c3, NodeId m01, NodeId m12,
                     NodeId m23, NodeId m30) {
    Facet f;
    f.kind = ElementKind::quad8;
    f.nn = 8;
    f.nodes = {c0, c1, c2, c3, m01, m12, m23, m30};
    msh.rigid.push_back(f);
    orient_rigid(msh, msh.rigid.back());
  };
  for (int i = 0; i < 2 * nc; i += 2)
    for (int j = 0; j < 2 * nc; j += 2)
      add_pin(pcore(i, j), pcore(i + 2, j), pcore(i + 2, j + 2), pcore(i, j + 2),
              pcore(i + 1, j), pcore(i + 2, j + 1), pcore(i + 1, j + 2), pcore(i, j + 1));
  for (int a = 0; a < 8 * nc; a += 2)
    for (int k = 0; k < 2 * (nring + nfil); k += 2)
      add_pin(pring(a, k), pring(a + 2, k), pring(a + 2, k + 2), pring(a, k + 2),
              pring(a + 1, k), pring(a + 2, k + 1), pring(a + 1, k + 2), pring(a, k + 1));

  msh.finalize();
  std::vector<NodeId>& clamp = msh.sets["clamp"];
  for (NodeId v = 0; v < msh.nnodes(); ++v)
    if (msh.node_dof[v] >= 0 &&
        (std::abs(msh.X[v][2]) <= 1e-9 || std::abs(std::abs(msh.X[v][0]) - 1.0) <= 1e-9 ||
         std::abs(std::abs(msh.X[v][1]) - 1.0) <= 1e-9))
      clamp.push_back(v);
  check_orientation(msh, "punch generator");
  return msh;
}

}  // namespace rdc
