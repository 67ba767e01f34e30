#include "rdc/mortar.hpp"

#include "rdc/jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace rdc {

GapWeighting weighting_from_name(const std::string& s) {
  if (s == "dual") return GapWeighting::dual;
  if (s == "standard") return GapWeighting::standard;
  if (s == "piecewise") return GapWeighting::piecewise;
  throw Error("unknown gap weighting '" + s + "'");
}

IntegrationMode integration_from_name(const std::string& s) {
  if (s == "segment") return IntegrationMode::segment;
  if (s == "element") return IntegrationMode::element;
  if (s == "boundary_segment") return IntegrationMode::boundary_segment;
  throw Error("unknown integration mode '" + s + "'");
}

const char* weighting_name(GapWeighting w) {
  switch (w) {
    case GapWeighting::dual:
      return "dual";
    case GapWeighting::standard:
      return "standard";
    default:
      return "piecewise";
  }
}

const char* integration_name(IntegrationMode i) {
  switch (i) {
    case IntegrationMode::segment:
      return "segment";
    case IntegrationMode::element:
      return "element";
    default:
      return "boundary_segment";
  }
}

namespace {

// Reference-coordinate tolerances: segment endpoint classification, the
// quadrature-point ray onto an obstacle facet, element-mode rays, and the
// pull-back of clipped points.
constexpr double kEndTol = 1e-9;
constexpr double kRayTol = 0.02;
constexpr double kElemRayTol = 1e-8;
constexpr double kPullbackTol = 0.05;

template <class T>
using V3 = std::array<T, 3>;

template <class T>
T dot3(const V3<T>& a, const V3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <class T>
V3<T> cross3(const V3<T>& a, const V3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
template <class T>
T norm3(const V3<T>& a) {
  return sqrt(dot3(a, a));
}
template <class T>
V3<T> sub3(const V3<T>& a, const V3<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

template <int N>
V3<Jet<N>> lift3(const Vec3& v) {
  return {Jet<N>(v[0]), Jet<N>(v[1]), Jet<N>(v[2])};
}
template <int N>
Vec3 val3(const V3<Jet<N>>& a) {
  return Vec3(a[0].v, a[1].v, a[2].v);
}

struct Box {
  Vec3 lo = Vec3::Constant(1e300);
  Vec3 hi = Vec3::Constant(-1e300);
  void absorb(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bool near(const Box& o, double margin) const {
    for (int c = 0; c < 3; ++c)
      if (lo[c] - margin > o.hi[c] || o.lo[c] - margin > hi[c]) return false;
    return true;
  }
};

Vec2 kind_center(ElementKind k) {
  if (k == ElementKind::tri3 || k == ElementKind::tri6) return Vec2(1.0 / 3.0, 1.0 / 3.0);
  return Vec2::Zero();
}

Vec2 sub_center_parent(const SubElementMap& sm) {
  const Vec2 c = kind_center(sm.sub);
  return Vec2(sm.XiInv * c + sm.bInv);
}

// Fixed data of one obstacle facet.
struct RigidFacet {
  const Facet* f = nullptr;
  int nn = 0;
  ElementKind kind{};
  Vec3 X[kMaxInterfaceNodes];
  Vec2 center_xi;
  Vec3 center_normal;  // unit, toward the deformable side
  Box box;
};

// First-order piece of an obstacle facet, used for clipping in 3d.
struct RigidSub {
  const RigidFacet* parent = nullptr;
  int nn = 0;
  Vec3 x[4];
  Vec3 normal;  // unit
};

const std::vector<QPoint>& cell_rule_1d(ElementKind parent) {
  return gauss_1d(is_quadratic(parent) ? 4 : 3);
}
const std::vector<QPoint>& cell_rule_tri(ElementKind parent) {
  return gauss_tri(is_quadratic(parent) ? 6 : 5);
}
const std::vector<QPoint>& cell_rule_quad(ElementKind parent) {
  return gauss_quad(is_quadratic(parent) ? 4 : 3);
}

template <int N>
struct Accum {
  Jet<N> Dt[kMaxInterfaceNodes];
  Jet<N> gp[kMaxInterfaceNodes];
  void add(const Accum& o, int nn) {
    for (int a = 0; a < nn; ++a) {
      Dt[a] += o.Dt[a];
      gp[a] += o.gp[a];
    }
  }
};

// One non-mortar facet with nodal positions and unit normals as jets.
// Seed layout: slot a*dim+i is position component i of local node a,
// slot nn*dim + a*dim + i the matching normal component.
template <int N>
struct SlaveCtx {
  const Mesh* m = nullptr;
  ElementKind kind{};
  int nn = 0, dim = 2, pd = 1;
  bool quadratic = false;
  GapWeighting weighting{};
  NodeId nodes[kMaxInterfaceNodes];
  V3<Jet<N>> x[kMaxInterfaceNodes];
  V3<Jet<N>> nrm[kMaxInterfaceNodes];
  const MatX* T = nullptr;
  MatX Adual;
  double diam = 0.0;
  Box box;
};

template <int N>
SlaveCtx<N> make_slave_ctx(const Mesh& m, const VecX& d, const FrameSet& fr, const Facet& f,
                           GapWeighting weighting) {
  SlaveCtx<N> C;
  C.m = &m;
  C.kind = f.kind;
  C.nn = f.nn;
  C.dim = m.dim;
  C.pd = param_dim(f.kind);
  C.quadratic = is_quadratic(f.kind);
  C.weighting = weighting;
  C.T = &modified_basis(f.kind);
  C.diam = m.facet_diameter(f);
  Eigen::Matrix<double, Eigen::Dynamic, 3> xc(f.nn, 3);
  for (int a = 0; a < f.nn; ++a) {
    C.nodes[a] = f.nodes[a];
    const Vec3 xa = m.xcur(f.nodes[a], d);
    const Vec3 na = fr.frames[m.slave_index[f.nodes[a]]].n;
    xc.row(a) = xa.transpose();
    C.box.absorb(xa);
    for (int i = 0; i < 3; ++i) {
      C.x[a][i] = Jet<N>(xa[i]);
      C.nrm[a][i] = Jet<N>(na[i]);
      if (i < C.dim) {
        C.x[a][i].d[a * C.dim + i] = 1.0;
        C.nrm[a][i].d[f.nn * C.dim + a * C.dim + i] = 1.0;
      }
    }
  }
  if (weighting == GapWeighting::dual) C.Adual = dual_coeffs(f.kind, xc, C.quadratic).A;
  return C;
}

template <int N>
struct SurfEval {
  Jet<N> Nv[kMaxInterfaceNodes];
  V3<Jet<N>> x;
  V3<Jet<N>> dx[2];
  V3<Jet<N>> nhat;
};

template <int N>
void eval_slave(const SlaveCtx<N>& C, const Jet<N> xi[2], SurfEval<N>& E) {
  Jet<N> dN[kMaxInterfaceNodes][2];
  shapefn::values(C.kind, xi, E.Nv);
  shapefn::grads(C.kind, xi, dN);
  V3<Jet<N>> nt;
  for (int k = 0; k < 3; ++k) {
    E.x[k] = Jet<N>(0.0);
    E.dx[0][k] = Jet<N>(0.0);
    E.dx[1][k] = Jet<N>(0.0);
    nt[k] = Jet<N>(0.0);
  }
  for (int a = 0; a < C.nn; ++a)
    for (int k = 0; k < 3; ++k) {
      E.x[k] += E.Nv[a] * C.x[a][k];
      E.dx[0][k] += dN[a][0] * C.x[a][k];
      E.dx[1][k] += dN[a][1] * C.x[a][k];
      nt[k] += E.Nv[a] * C.nrm[a][k];
    }
  const Jet<N> len = norm3(nt);
  for (int k = 0; k < 3; ++k) E.nhat[k] = nt[k] / len;
}

// Adds one quadrature point: transformed-function integrals plus the
// weighted gap via the configured weighting.  `sm` is the sub-element the
// point lies in, used by the piecewise weighting.
template <int N>
void accumulate_gp(const SlaveCtx<N>& C, const SubElementMap& sm, const Jet<N> xi[2],
                   const Jet<N> Nv[kMaxInterfaceNodes], const Jet<N>& wJ, const Jet<N>& g,
                   Accum<N>& acc, Counters& cnt) {
  const MatX& T = *C.T;
  Jet<N> Ntil[kMaxInterfaceNodes];
  for (int j = 0; j < C.nn; ++j) {
    Ntil[j] = Jet<N>(0.0);
    for (int k = 0; k < C.nn; ++k)
      if (T(j, k) != 0.0) Ntil[j] += T(j, k) * Nv[k];
    acc.Dt[j] += wJ * Ntil[j];
  }
  switch (C.weighting) {
    case GapWeighting::standard:
      for (int j = 0; j < C.nn; ++j) acc.gp[j] += wJ * Nv[j] * g;
      break;
    case GapWeighting::piecewise: {
      Jet<N> s[2], Ns[4];
      shapefn::sub_forward(sm, xi, s);
      shapefn::values(sm.sub, s, Ns);
      for (int i = 0; i < sm.nnodes; ++i) acc.gp[sm.nodes[i]] += wJ * Ns[i] * g;
      break;
    }
    case GapWeighting::dual: {
      ++cnt.dual_evals;
      const Jet<N>* B = C.quadratic ? Ntil : Nv;
      for (int j = 0; j < C.nn; ++j) {
        Jet<N> phi(0.0);
        for (int k = 0; k < C.nn; ++k) phi += C.Adual(j, k) * B[k];
        acc.gp[j] += wJ * phi * g;
      }
      break;
    }
  }
}

template <int N>
struct RayHit {
  bool ok = false;
  Jet<N> xi[2];
  Jet<N> t;
};

// Intersects the ray xs + t*dir with the patch of the given kind and node
// coordinates: Newton on the value parts, then one jet correction carrying
// the derivatives of xs and dir through the implicit solve.
template <int N>
RayHit<N> ray_newton(ElementKind kind, const Vec3* Xc, int nn, int dim, const V3<Jet<N>>& xs,
                     const V3<Jet<N>>& dir, const Vec2& start, double inside_tol, double scale,
                     Counters& cnt) {
  ++cnt.projections;
  RayHit<N> hit;
  const int pd = param_dim(kind);
  const Vec3 xsv = val3(xs), dirv = val3(dir);
  double u[3] = {start[0], start[1], 0.0};
  double& t = u[pd];
  if (pd == 1) u[1] = 0.0;
  Mat3 W = Mat3::Zero();
  double Nv[kMaxInterfaceNodes], dN[kMaxInterfaceNodes][2];
  bool conv = false;
  for (int it = 0; it < 40; ++it) {
    shapefn::values(kind, u, Nv);
    shapefn::grads(kind, u, dN);
    Vec3 R = -(xsv + t * dirv);
    W.setZero();
    for (int a = 0; a < nn; ++a) {
      R += Nv[a] * Xc[a];
      for (int c = 0; c < pd; ++c) W.col(c) += dN[a][c] * Xc[a];
    }
    W.col(pd) = -dirv;
    if (dim == 2) {
      W(2, 2) = 1.0;
      R[2] = 0.0;
    }
    if (R.norm() <= 1e-12 * scale) {
      conv = true;
      break;
    }
    const Vec3 du = W.partialPivLu().solve(-R);
    for (int c = 0; c <= pd; ++c) u[c] += du[c];
    if (std::abs(u[0]) > 100.0 || (pd == 2 && std::abs(u[1]) > 100.0)) break;
  }
  if (!conv) return hit;
  if (!inside_reference(kind, Vec2(u[0], pd == 2 ? u[1] : 0.0), inside_tol)) return hit;

  Jet<N> Rj[3];
  for (int k = 0; k < 3; ++k) {
    Rj[k] = -(xs[k] + t * dir[k]);
    for (int a = 0; a < nn; ++a) Rj[k] += Nv[a] * Xc[a][k];
  }
  if (dim == 2) Rj[2] = Jet<N>(0.0);
  const Mat3 Winv = W.inverse();
  Jet<N> du[3];
  for (int i = 0; i < 3; ++i) {
    du[i] = Jet<N>(0.0);
    for (int k = 0; k < 3; ++k) du[i] -= Winv(i, k) * Rj[k];
  }
  hit.ok = true;
  hit.xi[0] = u[0] + du[0];
  hit.xi[1] = pd == 2 ? u[1] + du[1] : Jet<N>(0.0);
  hit.t = t + du[pd];
  return hit;
}

// Projects an obstacle point onto a slave sub-element along the interpolated
// slave normal field (2d); returns the sub parameter.
template <int N>
struct AntiHit {
  bool ok = false;
  Jet<N> sigma;
};

template <int N>
AntiHit<N> anti_project_2d(const SlaveCtx<N>& C, const SubElementMap& sm, const Vec3& xr,
                           Counters& cnt) {
  ++cnt.projections;
  AntiHit<N> out;
  double s = 0.0, t = 0.0;
  Mat2 W = Mat2::Zero();
  double Nv[kMaxInterfaceNodes], dN[kMaxInterfaceNodes][2];
  double xip[2] = {0.0, 0.0};
  bool conv = false;
  for (int it = 0; it < 40; ++it) {
    xip[0] = sm.XiInv(0, 0) * s + sm.bInv[0];
    shapefn::values(C.kind, xip, Nv);
    shapefn::grads(C.kind, xip, dN);
    Vec3 xv = Vec3::Zero(), dxv = Vec3::Zero(), ntv = Vec3::Zero(), dnt = Vec3::Zero();
    for (int a = 0; a < C.nn; ++a) {
      const Vec3 xa = val3(C.x[a]), na = val3(C.nrm[a]);
      xv += Nv[a] * xa;
      dxv += dN[a][0] * xa;
      ntv += Nv[a] * na;
      dnt += dN[a][0] * na;
    }
    dxv *= sm.XiInv(0, 0);
    dnt *= sm.XiInv(0, 0);
    const double len = ntv.norm();
    if (len < 1e-14) return out;
    const Vec3 nh = ntv / len;
    const Vec2 R = (xv + t * nh - xr).head<2>();
    if (R.norm() <= 1e-12 * C.diam) {
      conv = true;
      break;
    }
    const Vec3 dnh = (Mat3::Identity() - nh * nh.transpose()) / len * dnt;
    W.col(0) = (dxv + t * dnh).head<2>();
    W.col(1) = nh.head<2>();
    if (std::abs(W.determinant()) < 1e-300) return out;
    const Vec2 du = W.inverse() * (-R);
    s += du[0];
    t += du[1];
    if (std::abs(s) > 50.0) break;
  }
  if (!conv) return out;

  // Jet correction: the parameter is frozen, the nodal data carries seeds.
  V3<Jet<N>> xj, ntj;
  for (int k = 0; k < 3; ++k) {
    xj[k] = Jet<N>(0.0);
    ntj[k] = Jet<N>(0.0);
  }
  for (int a = 0; a < C.nn; ++a)
    for (int k = 0; k < 3; ++k) {
      xj[k] += Nv[a] * C.x[a][k];
      ntj[k] += Nv[a] * C.nrm[a][k];
    }
  const Jet<N> len = norm3(ntj);
  Jet<N> Rj[2];
  for (int k = 0; k < 2; ++k) Rj[k] = xj[k] + t * (ntj[k] / len) - xr[k];
  const Mat2 Winv = W.inverse();
  out.ok = true;
  out.sigma = s - (Winv(0, 0) * Rj[0] + Winv(0, 1) * Rj[1]);
  return out;
}

// ----------------------------------------------------------------- 2d paths

template <int N>
void integrate_span_2d(const SlaveCtx<N>& C, const SubElementMap& sm, const RigidFacet& rf,
                       const Jet<N>& a, const Jet<N>& b, Accum<N>& acc, Counters& cnt) {
  ++cnt.cells;
  const Jet<N> len = b - a;
  SurfEval<N> E;
  for (const QPoint& q : cell_rule_1d(C.kind)) {
    const Jet<N> sigma = a + len * (0.5 * (q.xi[0] + 1.0));
    const Jet<N> xi[2] = {sm.XiInv(0, 0) * sigma + sm.bInv[0], Jet<N>(0.0)};
    eval_slave(C, xi, E);
    const Jet<N> J = norm3(E.dx[0]) * std::abs(sm.XiInv(0, 0));
    const Jet<N> wJ = (q.w * 0.5) * J * len;
    ++cnt.gauss_points;
    const RayHit<N> hit =
        ray_newton(rf.kind, rf.X, rf.nn, 2, E.x, E.nhat, rf.center_xi, kRayTol, C.diam, cnt);
    if (!hit.ok) continue;
    accumulate_gp(C, sm, xi, E.Nv, wJ, hit.t, acc, cnt);
  }
}

// Builds the overlap of one slave sub-element with one obstacle facet in the
// sub parameter and integrates it.  Cell ends come from the slave sub ends
// (kept when their normal ray meets the facet) and from the pulled-back
// obstacle facet ends, so cells break where the integrand loses smoothness.
template <int N>
void integrate_segment_pair_2d(const SlaveCtx<N>& C, const SubElementMap& sm,
                               const RigidFacet& rf, const Vec3& ncenter, Accum<N>& acc,
                               Counters& cnt) {
  if (ncenter.dot(rf.center_normal) >= 0.0) return;
  std::vector<Jet<N>> pts;
  for (int end = 0; end < 2; ++end) {
    const double sigma = end == 0 ? -1.0 : 1.0;
    const Jet<N> xi[2] = {Jet<N>(sm.XiInv(0, 0) * sigma + sm.bInv[0]), Jet<N>(0.0)};
    SurfEval<N> Ee;
    eval_slave(C, xi, Ee);
    const RayHit<N> hit =
        ray_newton(rf.kind, rf.X, rf.nn, 2, Ee.x, Ee.nhat, rf.center_xi, kEndTol, C.diam, cnt);
    if (hit.ok) pts.emplace_back(sigma);
  }
  for (int end = 0; end < 2; ++end) {
    const AntiHit<N> ah = anti_project_2d(C, sm, rf.X[end], cnt);
    if (ah.ok && std::abs(ah.sigma.v) <= 1.0 + kEndTol) pts.push_back(ah.sigma);
  }
  if (pts.size() < 2) return;
  Jet<N> a = pts[0], b = pts[0];
  for (const Jet<N>& p : pts) {
    if (p.v < a.v) a = p;
    if (p.v > b.v) b = p;
  }
  if (b.v - a.v < 1e-10) return;
  integrate_span_2d(C, sm, rf, a, b, acc, cnt);
}

template <int N>
void integrate_segment_sub_2d(const SlaveCtx<N>& C, const SubElementMap& sm,
                              const std::vector<const RigidFacet*>& cands, Accum<N>& acc,
                              Counters& cnt) {
  const Vec2 cxi = sub_center_parent(sm);
  const Jet<N> cxij[2] = {Jet<N>(cxi[0]), Jet<N>(cxi[1])};
  SurfEval<N> E;
  eval_slave(C, cxij, E);
  const Vec3 ncenter = val3(E.nhat);
  for (const RigidFacet* rf : cands)
    integrate_segment_pair_2d(C, sm, *rf, ncenter, acc, cnt);
}

// ----------------------------------------------------------------- 3d paths

template <int N>
using P2 = std::array<Jet<N>, 2>;

template <int N>
double cross2v(const P2<N>& o, const P2<N>& a, const P2<N>& b) {
  return (a[0].v - o[0].v) * (b[1].v - o[1].v) - (a[1].v - o[1].v) * (b[0].v - o[0].v);
}

template <int N>
double poly_area2(const std::vector<P2<N>>& p) {
  double s = 0.0;
  for (size_t i = 1; i + 1 < p.size(); ++i) s += cross2v(p[0], p[i], p[i + 1]);
  return s;
}

// Sutherland-Hodgman clip of `subject` against the convex counter-clockwise
// polygon `clip`.  Branch decisions use value parts; intersection vertices
// stay exact jets.
template <int N>
std::vector<P2<N>> clip_poly(std::vector<P2<N>> subject, const std::vector<P2<N>>& clip,
                             double scale) {
  const double eps = 1e-13 * scale * scale;
  for (size_t e = 0; e < clip.size() && subject.size() >= 3; ++e) {
    const P2<N>& A = clip[e];
    const P2<N>& B = clip[(e + 1) % clip.size()];
    std::vector<P2<N>> out;
    out.reserve(subject.size() + 2);
    auto inside = [&](const P2<N>& p) { return cross2v(A, B, p) >= -eps; };
    for (size_t i = 0; i < subject.size(); ++i) {
      const P2<N>& P = subject[i];
      const P2<N>& Q = subject[(i + 1) % subject.size()];
      const bool pin = inside(P), qin = inside(Q);
      if (pin) out.push_back(P);
      if (pin != qin) {
        const Jet<N> ex = B[0] - A[0], ey = B[1] - A[1];
        const Jet<N> den = ex * (Q[1] - P[1]) - ey * (Q[0] - P[0]);
        if (std::abs(den.v) < 1e-300) continue;
        const Jet<N> s = (ex * (A[1] - P[1]) - ey * (A[0] - P[0])) / den;
        out.push_back({P[0] + s * (Q[0] - P[0]), P[1] + s * (Q[1] - P[1])});
      }
    }
    subject = std::move(out);
  }
  if (subject.size() < 3) subject.clear();
  return subject;
}

template <int N>
void dedup_poly(std::vector<P2<N>>& p, double tol) {
  std::vector<P2<N>> out;
  for (const P2<N>& v : p) {
    if (!out.empty()) {
      const double dx = v[0].v - out.back()[0].v, dy = v[1].v - out.back()[1].v;
      if (dx * dx + dy * dy <= tol * tol) continue;
    }
    out.push_back(v);
  }
  while (out.size() >= 2) {
    const double dx = out.front()[0].v - out.back()[0].v;
    const double dy = out.front()[1].v - out.back()[1].v;
    if (dx * dx + dy * dy > tol * tol) break;
    out.pop_back();
  }
  p = std::move(out);
}

// Pulls a point of the auxiliary plane back to slave parent coordinates.
template <int N>
bool pull_back_slave(const SlaveCtx<N>& C, const Vec2& start, const V3<Jet<N>>& x0,
                     const V3<Jet<N>>& e1, const V3<Jet<N>>& e2, const Jet<N>& pu,
                     const Jet<N>& pv, Jet<N> xi_out[2], Counters& cnt) {
  ++cnt.projections;
  const Vec3 x0v = val3(x0), e1v = val3(e1), e2v = val3(e2);
  double xi[2] = {start[0], start[1]};
  Mat2 W = Mat2::Zero();
  double Nv[kMaxInterfaceNodes], dN[kMaxInterfaceNodes][2];
  bool conv = false;
  for (int it = 0; it < 40; ++it) {
    shapefn::values(C.kind, xi, Nv);
    shapefn::grads(C.kind, xi, dN);
    Vec3 xv = Vec3::Zero(), dx1 = Vec3::Zero(), dx2 = Vec3::Zero();
    for (int a = 0; a < C.nn; ++a) {
      const Vec3 xa = val3(C.x[a]);
      xv += Nv[a] * xa;
      dx1 += dN[a][0] * xa;
      dx2 += dN[a][1] * xa;
    }
    const Vec2 R(e1v.dot(xv - x0v) - pu.v, e2v.dot(xv - x0v) - pv.v);
    W << e1v.dot(dx1), e1v.dot(dx2), e2v.dot(dx1), e2v.dot(dx2);
    if (R.norm() <= 1e-12 * C.diam) {
      conv = true;
      break;
    }
    if (std::abs(W.determinant()) < 1e-300) return false;
    const Vec2 du = W.inverse() * (-R);
    xi[0] += du[0];
    xi[1] += du[1];
    if (std::abs(xi[0]) > 100.0 || std::abs(xi[1]) > 100.0) break;
  }
  if (!conv) return false;
  if (!inside_reference(C.kind, Vec2(xi[0], xi[1]), kPullbackTol)) return false;

  V3<Jet<N>> xj;
  for (int k = 0; k < 3; ++k) xj[k] = Jet<N>(0.0);
  for (int a = 0; a < C.nn; ++a)
    for (int k = 0; k < 3; ++k) xj[k] += Nv[a] * C.x[a][k];
  const V3<Jet<N>> rel = sub3(xj, x0);
  const Jet<N> Rj[2] = {dot3(e1, rel) - pu, dot3(e2, rel) - pv};
  const Mat2 Winv = W.inverse();
  xi_out[0] = xi[0] - (Winv(0, 0) * Rj[0] + Winv(0, 1) * Rj[1]);
  xi_out[1] = xi[1] - (Winv(1, 0) * Rj[0] + Winv(1, 1) * Rj[1]);
  return true;
}

template <int N>
void integrate_clip_sub_3d(const SlaveCtx<N>& C, const SubElementMap& sm,
                           const std::vector<const RigidSub*>& rsubs, Accum<N>& acc,
                           Counters& cnt) {
  // Auxiliary plane through the sub corners along the averaged slave normal.
  const int nc = sm.nnodes;
  V3<Jet<N>> x0, n0;
  for (int k = 0; k < 3; ++k) {
    x0[k] = Jet<N>(0.0);
    n0[k] = Jet<N>(0.0);
  }
  for (int i = 0; i < nc; ++i)
    for (int k = 0; k < 3; ++k) {
      x0[k] += C.x[sm.nodes[i]][k];
      n0[k] += C.nrm[sm.nodes[i]][k];
    }
  const Jet<N> inv_nc(1.0 / nc);
  for (int k = 0; k < 3; ++k) x0[k] *= inv_nc;
  {
    const Jet<N> len = norm3(n0);
    if (len.v < 1e-14) return;
    for (int k = 0; k < 3; ++k) n0[k] /= len;
  }
  const Vec3 n0v = val3(n0);
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n0v[i]) < std::abs(n0v[axis])) axis = i;
  V3<Jet<N>> e1 = cross3(lift3<N>(Vec3::Unit(axis)), n0);
  {
    const Jet<N> len = norm3(e1);
    for (int k = 0; k < 3; ++k) e1[k] /= len;
  }
  const V3<Jet<N>> e2 = cross3(n0, e1);

  auto plane_coords = [&](const V3<Jet<N>>& p) -> P2<N> {
    const V3<Jet<N>> rel = sub3(p, x0);
    return {dot3(e1, rel), dot3(e2, rel)};
  };

  std::vector<P2<N>> spoly(nc);
  for (int i = 0; i < nc; ++i) spoly[i] = plane_coords(C.x[sm.nodes[i]]);
  if (poly_area2(spoly) < 0.0) std::reverse(spoly.begin(), spoly.end());

  const Vec2 start = sub_center_parent(sm);
  const std::vector<QPoint>& rule = cell_rule_tri(C.kind);

  for (const RigidSub* rs : rsubs) {
    if (n0v.dot(rs->normal) >= 0.0) continue;
    std::vector<P2<N>> rpoly(rs->nn);
    for (int i = 0; i < rs->nn; ++i) rpoly[i] = plane_coords(lift3<N>(rs->x[i]));
    if (poly_area2(rpoly) < 0.0) std::reverse(rpoly.begin(), rpoly.end());

    ++cnt.clips;
    std::vector<P2<N>> poly = clip_poly(spoly, rpoly, C.diam);
    dedup_poly(poly, 1e-9 * C.diam);
    if (poly.size() < 3) continue;

    P2<N> c = {Jet<N>(0.0), Jet<N>(0.0)};
    for (const P2<N>& p : poly) {
      c[0] += p[0];
      c[1] += p[1];
    }
    const Jet<N> inv_np(1.0 / poly.size());
    c[0] *= inv_np;
    c[1] *= inv_np;

    const RigidFacet& rf = *rs->parent;
    for (size_t i = 0; i < poly.size(); ++i) {
      const P2<N>& v1 = poly[i];
      const P2<N>& v2 = poly[(i + 1) % poly.size()];
      Jet<N> area2 = (v1[0] - c[0]) * (v2[1] - c[1]) - (v1[1] - c[1]) * (v2[0] - c[0]);
      if (std::abs(area2.v) < 1e-14 * C.diam * C.diam) continue;
      if (area2.v < 0.0) area2 = -area2;
      ++cnt.cells;
      for (const QPoint& q : rule) {
        const Jet<N> pu = c[0] + q.xi[0] * (v1[0] - c[0]) + q.xi[1] * (v2[0] - c[0]);
        const Jet<N> pv = c[1] + q.xi[0] * (v1[1] - c[1]) + q.xi[1] * (v2[1] - c[1]);
        ++cnt.gauss_points;
        Jet<N> xi[2];
        if (!pull_back_slave(C, start, x0, e1, e2, pu, pv, xi, cnt)) continue;
        SurfEval<N> E;
        eval_slave(C, xi, E);
        // Plane cell measure times the ratio of the surface element to its
        // plane shadow, so cells of both integration schemes agree.
        const Jet<N> j11 = dot3(e1, E.dx[0]), j12 = dot3(e1, E.dx[1]);
        const Jet<N> j21 = dot3(e2, E.dx[0]), j22 = dot3(e2, E.dx[1]);
        Jet<N> detJp = j11 * j22 - j12 * j21;
        if (std::abs(detJp.v) < 1e-300) continue;
        if (detJp.v < 0.0) detJp = -detJp;
        const Jet<N> factor = norm3(cross3(E.dx[0], E.dx[1])) / detJp;
        const Jet<N> wJ = q.w * area2 * factor;  // weights sum 1/2, 2A * 1/2 = A
        const RayHit<N> hit =
            ray_newton(rf.kind, rf.X, rf.nn, 3, E.x, E.nhat, rf.center_xi, kRayTol, C.diam, cnt);
        if (!hit.ok) continue;
        accumulate_gp(C, sm, xi, E.Nv, wJ, hit.t, acc, cnt);
      }
    }
  }
}

// ------------------------------------------------------------ element path

struct ElemSubResult {
  int total = 0;
  int valid = 0;
  int parent = -1;  // common obstacle facet, -2 once mixed
};

template <int N>
ElemSubResult integrate_element_sub(const SlaveCtx<N>& C, const SubElementMap& sm,
                                    const std::vector<const RigidFacet*>& cands, Accum<N>& acc,
                                    Counters& cnt) {
  ElemSubResult res;
  const bool line = C.pd == 1;
  const bool tri = sm.sub == ElementKind::tri3;
  const std::vector<QPoint>& rule =
      line ? cell_rule_1d(C.kind) : (tri ? cell_rule_tri(C.kind) : cell_rule_quad(C.kind));
  const double dsub = std::abs(line ? sm.XiInv(0, 0) : sm.XiInv.determinant());
  SurfEval<N> E;
  bool any = false;
  for (const QPoint& q : rule) {
    ++res.total;
    Jet<N> xi[2];
    {
      const Vec2 xip = sm.XiInv * Vec2(q.xi[0], q.xi[1]) + sm.bInv;
      xi[0] = Jet<N>(xip[0]);
      xi[1] = Jet<N>(xip[1]);
    }
    eval_slave(C, xi, E);
    Jet<N> J =
        line ? norm3(E.dx[0]) : norm3(cross3(E.dx[0], E.dx[1]));
    J *= dsub;
    ++cnt.gauss_points;
    const Vec3 nv = val3(E.nhat);
    RayHit<N> hit;
    const RigidFacet* found = nullptr;
    for (const RigidFacet* rf : cands) {
      if (nv.dot(rf->center_normal) >= 0.0) continue;
      hit = ray_newton(rf->kind, rf->X, rf->nn, C.dim, E.x, E.nhat, rf->center_xi, kElemRayTol,
                       C.diam, cnt);
      if (hit.ok) {
        found = rf;
        break;
      }
    }
    if (!found) continue;
    ++res.valid;
    const int pidx = static_cast<int>(found - cands.front());
    if (res.parent == -1)
      res.parent = pidx;
    else if (res.parent != pidx)
      res.parent = -2;
    any = true;
    accumulate_gp(C, sm, xi, E.Nv, q.w * J, hit.t, acc, cnt);
  }
  if (any) ++cnt.cells;
  return res;
}

// ------------------------------------------------------------- assembly

struct RowMaps {
  std::vector<std::map<Dof, double>> dDt, dgp;
};

template <int N>
void scatter(const Mesh& m, const FrameSet& fr, const SlaveCtx<N>& C, const Accum<N>& acc,
             VecX& Dt, VecX& gp, RowMaps& rows) {
  const int dim = C.dim;
  // Expansion of each seed slot into (dof, weight) pairs.
  std::vector<std::vector<std::pair<Dof, double>>> expand(2 * C.nn * dim);
  for (int a = 0; a < C.nn; ++a) {
    const NodeId n = C.nodes[a];
    for (int i = 0; i < dim; ++i) expand[a * dim + i] = {{m.dof(n, i), 1.0}};
    const NodeFrame& f = fr.frames[m.slave_index[n]];
    for (int i = 0; i < dim; ++i) {
      auto& list = expand[C.nn * dim + a * dim + i];
      for (const NodeFrame::Dep& dep : f.deps)
        for (int c = 0; c < dim; ++c)
          if (dep.dn(i, c) != 0.0) list.emplace_back(m.dof(dep.node, c), dep.dn(i, c));
    }
  }
  for (int a = 0; a < C.nn; ++a) {
    const int row = m.slave_index[C.nodes[a]];
    Dt[row] += acc.Dt[a].v;
    gp[row] += acc.gp[a].v;
    for (int s = 0; s < 2 * C.nn * dim; ++s) {
      const double cd = acc.Dt[a].d[s];
      const double cg = acc.gp[a].d[s];
      if (cd == 0.0 && cg == 0.0) continue;
      for (const auto& [dof, w] : expand[s]) {
        if (cd != 0.0) rows.dDt[row][dof] += cd * w;
        if (cg != 0.0) rows.dgp[row][dof] += cg * w;
      }
    }
  }
}

// U couples each mid node to its two edge corners; Tglob is its inverse
// transpose.  Identity rows everywhere else.
void build_factors(const Mesh& m, SpMat& U, SpMat& Tg) {
  const int ns = static_cast<int>(m.slave_nodes.size());
  const double c = kBasisMix;
  std::map<std::pair<int, int>, double> u, t;
  for (int j = 0; j < ns; ++j) {
    u[{j, j}] = 1.0;
    t[{j, j}] = 1.0;
  }
  for (const Facet& f : m.nonmortar) {
    for (const auto& [corner, mid] : corner_mid_pairs(f.kind)) {
      const int jc = m.slave_index[f.nodes[corner]];
      const int jm = m.slave_index[f.nodes[mid]];
      u[{jm, jm}] = 1.0 / (1.0 - 2.0 * c);
      u[{jm, jc}] = -c / (1.0 - 2.0 * c);
      t[{jm, jm}] = 1.0 - 2.0 * c;
      t[{jc, jm}] = c;
    }
  }
  std::vector<Triplet> ut, tt;
  for (const auto& [k, v] : u) ut.emplace_back(k.first, k.second, v);
  for (const auto& [k, v] : t) tt.emplace_back(k.first, k.second, v);
  U.resize(ns, ns);
  Tg.resize(ns, ns);
  U.setFromTriplets(ut.begin(), ut.end());
  Tg.setFromTriplets(tt.begin(), tt.end());
}

template <int N>
MortarData assemble_impl(const Mesh& m, const VecX& d, const FrameSet& fr,
                         const MortarOptions& opt) {
  const int ns = static_cast<int>(m.slave_nodes.size());
  MortarData out;
  out.Dtilde = VecX::Zero(ns);
  out.gap = VecX::Zero(ns);
  build_factors(m, out.U, out.Tglob);
  RowMaps rows;
  rows.dDt.resize(ns);
  rows.dgp.resize(ns);
  Counters cnt;

  // Obstacle facet tables.
  std::vector<RigidFacet> rigid(m.rigid.size());
  std::vector<std::vector<RigidSub>> rigid_subs(m.rigid.size());
  for (size_t i = 0; i < m.rigid.size(); ++i) {
    RigidFacet& rf = rigid[i];
    rf.f = &m.rigid[i];
    rf.nn = rf.f->nn;
    rf.kind = rf.f->kind;
    for (int a = 0; a < rf.nn; ++a) {
      rf.X[a] = m.X[rf.f->nodes[a]];
      rf.box.absorb(rf.X[a]);
    }
    rf.center_xi = kind_center(rf.kind);
    rf.center_normal = facet_normal(m, *rf.f, rf.center_xi, nullptr).normalized();
    if (m.dim == 3) {
      for (const SubElementMap& sm : sub_elements(rf.kind)) {
        RigidSub rs;
        rs.parent = &rf;
        rs.nn = sm.nnodes;
        for (int i2 = 0; i2 < sm.nnodes; ++i2) rs.x[i2] = rf.X[sm.nodes[i2]];
        const Vec3 nrm = sm.nnodes == 3
                             ? Vec3((rs.x[1] - rs.x[0]).cross(rs.x[2] - rs.x[0]))
                             : Vec3((rs.x[2] - rs.x[0]).cross(rs.x[3] - rs.x[1]));
        rs.normal = nrm.normalized();
        rigid_subs[i].push_back(rs);
      }
    }
  }

  // A finite margin is an optimization knob only.  The default searches
  // every obstacle facet: a distance cutoff truncates the rows of nodes
  // whose support straddles the cutoff, and a truncated row integrated
  // against a sign-indefinite weighting can turn a positive gap into a
  // spurious negative one, which the active-set update then acts on.
  const bool unbounded = opt.search_margin < 0.0;
  const double margin = unbounded ? 0.0 : opt.search_margin;

  for (const Facet& sf : m.nonmortar) {
    SlaveCtx<N> C = make_slave_ctx<N>(m, d, fr, sf, opt.weighting);
    std::vector<const RigidFacet*> cands;
    std::vector<const RigidSub*> sub_cands;
    for (size_t i = 0; i < rigid.size(); ++i)
      if (unbounded || C.box.near(rigid[i].box, margin)) {
        cands.push_back(&rigid[i]);
        for (const RigidSub& rs : rigid_subs[i]) sub_cands.push_back(&rs);
      }
    if (cands.empty()) continue;

    Accum<N> acc;
    for (const SubElementMap& sm : sub_elements(C.kind)) {
      switch (opt.integration) {
        case IntegrationMode::element:
          integrate_element_sub(C, sm, cands, acc, cnt);
          break;
        case IntegrationMode::segment:
          if (m.dim == 2)
            integrate_segment_sub_2d(C, sm, cands, acc, cnt);
          else
            integrate_clip_sub_3d(C, sm, sub_cands, acc, cnt);
          break;
        case IntegrationMode::boundary_segment: {
          Accum<N> probe;
          Counters probe_cnt;
          const ElemSubResult r = integrate_element_sub(C, sm, cands, probe, probe_cnt);
          if (r.valid == r.total && r.parent >= 0) {
            acc.add(probe, C.nn);
            cnt += probe_cnt;
          } else {
            if (m.dim == 2)
              integrate_segment_sub_2d(C, sm, cands, acc, cnt);
            else
              integrate_clip_sub_3d(C, sm, sub_cands, acc, cnt);
          }
          break;
        }
      }
    }
    scatter(m, fr, C, acc, out.Dtilde, out.gap, rows);
  }

  std::vector<Triplet> t1, t2;
  for (int r = 0; r < ns; ++r) {
    for (const auto& [dof, v] : rows.dDt[r]) t1.emplace_back(r, dof, v);
    for (const auto& [dof, v] : rows.dgp[r]) t2.emplace_back(r, dof, v);
  }
  out.dDtilde.resize(ns, m.ndof);
  out.dgap.resize(ns, m.ndof);
  out.dDtilde.setFromTriplets(t1.begin(), t1.end());
  out.dgap.setFromTriplets(t2.begin(), t2.end());

  const double ref = out.Dtilde.cwiseAbs().maxCoeff();
  out.supported.assign(ns, 0);
  for (int j = 0; j < ns; ++j)
    if (std::abs(out.Dtilde[j]) > 1e-12 * ref) out.supported[j] = 1;
  out.counters = cnt;
  return out;
}

}  // namespace

MortarData assemble_mortar(const Mesh& m, const VecX& d, const FrameSet& fr,
                           const MortarOptions& opt) {
  if (m.slave_nodes.empty()) throw Error("mesh has no non-mortar facets");
  if (m.rigid.empty()) throw Error("mesh has no obstacle facets");
  if (m.dim == 2) return assemble_impl<12>(m, d, fr, opt);
  return assemble_impl<54>(m, d, fr, opt);
}

}  // namespace rdc
