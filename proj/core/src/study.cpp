#include "rdc/study.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rdc {

namespace {

void element_box(const Mesh& m, const BulkElement& e, Vec3& lo, Vec3& hi) {
  lo = Vec3::Constant(1e300);
  hi = Vec3::Constant(-1e300);
  for (int a = 0; a < e.nn; ++a) {
    lo = lo.cwiseMin(m.X[e.nodes[a]]);
    hi = hi.cwiseMax(m.X[e.nodes[a]]);
  }
}

double outside_excess(ElementKind k, const Vec3& xi) {
  double ex = 0.0;
  for (int c = 0; c < param_dim(k); ++c) ex = std::max(ex, std::abs(xi[c]) - 1.0);
  return ex;
}

}  // namespace

FieldSampler::FieldSampler(const Mesh& m, const VecX& d) : m_(m), d_(d) {
  lo_ = Vec3::Constant(1e300);
  hi_ = Vec3::Constant(-1e300);
  for (const auto& e : m.bulk)
    for (int a = 0; a < e.nn; ++a) {
      lo_ = lo_.cwiseMin(m.X[e.nodes[a]]);
      hi_ = hi_.cwiseMax(m.X[e.nodes[a]]);
    }
  scale_ = (hi_ - lo_).norm();
  const int target = std::max(1, static_cast<int>(std::pow(double(m.bulk.size()),
                                                           1.0 / m.dim)));
  int total = 1;
  for (int c = 0; c < m.dim; ++c) {
    nb_[c] = target;
    cell_[c] = std::max((hi_[c] - lo_[c]) / nb_[c], 1e-12 * scale_);
    total *= nb_[c];
  }
  buckets_.resize(total);
  auto clampi = [&](int v, int c) { return std::clamp(v, 0, nb_[c] - 1); };
  for (size_t e = 0; e < m.bulk.size(); ++e) {
    Vec3 blo, bhi;
    element_box(m, m.bulk[e], blo, bhi);
    int i0[3] = {0, 0, 0}, i1[3] = {0, 0, 0};
    for (int c = 0; c < m.dim; ++c) {
      i0[c] = clampi(static_cast<int>((blo[c] - lo_[c]) / cell_[c]), c);
      i1[c] = clampi(static_cast<int>((bhi[c] - lo_[c]) / cell_[c]), c);
    }
    for (int i = i0[0]; i <= i1[0]; ++i)
      for (int j = i0[1]; j <= i1[1]; ++j)
        for (int k = (m.dim == 3 ? i0[2] : 0); k <= (m.dim == 3 ? i1[2] : 0); ++k)
          buckets_[(k * nb_[1] + j) * nb_[0] + i].push_back(static_cast<int>(e));
  }
}

bool FieldSampler::invert(int e, const Vec3& X, Vec3& xi, double& excess) const {
  const BulkElement& el = m_.bulk[e];
  xi = Vec3::Zero();
  double N[kMaxBulkNodes], dN[kMaxBulkNodes][3];
  for (int it = 0; it < 40; ++it) {
    bulk_values(el.kind, xi, N);
    bulk_grads(el.kind, xi, dN);
    Vec3 x = Vec3::Zero();
    Mat3 J = Mat3::Identity();
    J.setZero();
    for (int a = 0; a < el.nn; ++a) {
      x += N[a] * m_.X[el.nodes[a]];
      for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) J(i, c) += m_.X[el.nodes[a]][i] * dN[a][c];
    }
    if (m_.dim == 2) J(2, 2) = 1.0;
    const Vec3 rhs = X - x;
    if (rhs.norm() < 1e-12 * scale_) {
      excess = outside_excess(el.kind, xi);
      return true;
    }
    const double det = J.determinant();
    if (std::abs(det) < 1e-30) return false;
    xi += J.inverse() * rhs;
    if (xi.cwiseAbs().maxCoeff() > 10.0) return false;
  }
  excess = outside_excess(el.kind, xi);
  return false;
}

void FieldSampler::sample(const Vec3& X, Vec3& u, Mat3& grad) const {
  auto clampi = [&](int v, int c) { return std::clamp(v, 0, nb_[c] - 1); };
  int ix = clampi(static_cast<int>((X[0] - lo_[0]) / cell_[0]), 0);
  int iy = clampi(static_cast<int>((X[1] - lo_[1]) / cell_[1]), 1);
  int iz = m_.dim == 3 ? clampi(static_cast<int>((X[2] - lo_[2]) / cell_[2]), 2) : 0;

  int best_e = -1;
  Vec3 best_xi = Vec3::Zero();
  double best_ex = 1e300;
  // Expand the search ring until a containing element is found.
  for (int ring = 0; ring < std::max({nb_[0], nb_[1], nb_[2]}) && best_ex > 1e-10; ++ring) {
    for (int k = (m_.dim == 3 ? iz - ring : 0); k <= (m_.dim == 3 ? iz + ring : 0); ++k)
      for (int j = iy - ring; j <= iy + ring; ++j)
        for (int i = ix - ring; i <= ix + ring; ++i) {
          if (i < 0 || j < 0 || k < 0 || i >= nb_[0] || j >= nb_[1] ||
              k >= (m_.dim == 3 ? nb_[2] : 1))
            continue;
          if (std::max({std::abs(i - ix), std::abs(j - iy), std::abs(k - iz)}) != ring)
            continue;
          for (int e : buckets_[(k * nb_[1] + j) * nb_[0] + i]) {
            Vec3 xi;
            double ex;
            if (!invert(e, X, xi, ex)) continue;
            if (ex < best_ex) {
              best_ex = ex;
              best_e = e;
              best_xi = xi;
              if (best_ex <= 1e-10) break;
            }
          }
        }
    if (ring > 1 && best_ex <= 0.05) break;
  }
  if (best_e < 0 || best_ex > 0.05)
    throw Error("field sample point lies outside the mesh");

  const BulkElement& el = m_.bulk[best_e];
  double N[kMaxBulkNodes], dN[kMaxBulkNodes][3];
  bulk_values(el.kind, best_xi, N);
  bulk_grads(el.kind, best_xi, dN);
  Mat3 J = Mat3::Zero();
  for (int a = 0; a < el.nn; ++a)
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 3; ++c) J(i, c) += m_.X[el.nodes[a]][i] * dN[a][c];
  if (m_.dim == 2) J(2, 2) = 1.0;
  const Mat3 Jinv = J.inverse();
  u = Vec3::Zero();
  grad = Mat3::Zero();
  for (int a = 0; a < el.nn; ++a) {
    const Dof d0 = m_.node_dof[el.nodes[a]];
    if (d0 < 0) continue;
    Vec3 ua = Vec3::Zero();
    for (int c = 0; c < m_.dim; ++c) ua[c] = d_[d0 + c];
    u += N[a] * ua;
    const Vec3 gX = Jinv.transpose() * Vec3(dN[a][0], dN[a][1], dN[a][2]);
    grad += ua * gX.transpose();
  }
}

void h1_difference(const Mesh& coarse, const VecX& dc, const FieldSampler& ref, double& norm,
                   double& seminorm, double& refnorm) {
  double e2 = 0, s2 = 0, r2 = 0;
  for (const auto& el : coarse.bulk) {
    const auto& rule = bulk_rule(el.kind);
    for (const auto& q : rule) {
      double N[kMaxBulkNodes], dN[kMaxBulkNodes][3];
      bulk_values(el.kind, q.xi, N);
      bulk_grads(el.kind, q.xi, dN);
      Vec3 X = Vec3::Zero(), uc = Vec3::Zero();
      Mat3 J = Mat3::Zero();
      for (int a = 0; a < el.nn; ++a) {
        X += N[a] * coarse.X[el.nodes[a]];
        for (int i = 0; i < 3; ++i)
          for (int c = 0; c < 3; ++c) J(i, c) += coarse.X[el.nodes[a]][i] * dN[a][c];
      }
      if (coarse.dim == 2) J(2, 2) = 1.0;
      const Mat3 Jinv = J.inverse();
      Mat3 gc = Mat3::Zero();
      for (int a = 0; a < el.nn; ++a) {
        const Dof d0 = coarse.node_dof[el.nodes[a]];
        if (d0 < 0) continue;
        Vec3 ua = Vec3::Zero();
        for (int c = 0; c < coarse.dim; ++c) ua[c] = dc[d0 + c];
        uc += N[a] * ua;
        gc += ua * (Jinv.transpose() * Vec3(dN[a][0], dN[a][1], dN[a][2])).transpose();
      }
      Vec3 ur;
      Mat3 gr;
      ref.sample(X, ur, gr);
      const double wj = q.w * std::abs(J.determinant());
      s2 += wj * (gc - gr).squaredNorm();
      e2 += wj * ((uc - ur).squaredNorm() + (gc - gr).squaredNorm());
      r2 += wj * (ur.squaredNorm() + gr.squaredNorm());
    }
  }
  norm = std::sqrt(e2);
  seminorm = std::sqrt(s2);
  refnorm = std::sqrt(r2);
}

std::vector<GapWeighting> study_bases(int order) {
  if (order == 1) return {GapWeighting::dual, GapWeighting::standard};
  return {GapWeighting::dual, GapWeighting::piecewise};
}

Config hertz_config(int n, int order, GapWeighting basis, int steps,
                    const std::string& outdir) {
  std::ostringstream s;
  s << "[scenario]\n"
    << "name = hertz_o" << order << "_" << weighting_name(basis) << "_n" << n << "\n\n"
    << "[mesh]\ngenerator = hertz\nn = " << n << "\norder = " << order << "\n\n"
    << "[material]\nmodel = stvenant\nE = 200\nnu = 0.3\n\n"
    << "[load]\npressure = -0.8\nfix = axis x\n\n"
    << "[solver]\nsteps = " << steps << "\ntol_rel = 1e-10\ngap_basis = "
    << weighting_name(basis)
    << "\nintegration = segment\nframe_mode = projected\nsolve_path = condensed\n\n"
    << "[output]\ndir = " << outdir << "\n";
  return parse_config(s.str());
}

double fit_slope(const StudySeries& s) {
  std::vector<double> xs, ys;
  for (const StudyLevel& l : s.levels)
    if (l.converged && l.err_h1 > 0) {
      xs.push_back(std::log(l.h));
      ys.push_back(std::log(l.err_h1));
    }
  if (xs.size() < 2) return 0.0;
  const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - xm) * (ys[i] - ym);
    sxx += (xs[i] - xm) * (xs[i] - xm);
  }
  return sxy / sxx;
}

StudyResult run_study_hertz(const StudyOptions& opt, std::ostream* progress) {
  StudyResult out;
  out.options = opt;

  const std::string runs = opt.outdir + "/runs";
  Config refcfg = hertz_config(opt.ref_n, 2, GapWeighting::piecewise, opt.steps,
                               runs + "/reference");
  if (progress) *progress << "reference: n = " << opt.ref_n << ", order 2\n";
  Scenario refsc = scenario_from_config(refcfg);
  RunResult refr = run_scenario(refsc, progress);
  if (!refr.all_converged)
    throw Error("reference run failed: " + refr.error);
  if (opt.keep_run_outputs) write_outputs(refsc, refr);
  FieldSampler ref(refsc.mesh, refr.state.d);

  for (int order : opt.orders)
    for (GapWeighting basis : study_bases(order)) {
      StudySeries series;
      series.order = order;
      series.basis = basis;
      for (int n : opt.levels) {
        Config cfg = hertz_config(n, order, basis, opt.steps,
                                  runs + "/hertz_o" + std::to_string(order) + "_" +
                                      weighting_name(basis) + "_n" + std::to_string(n));
        Scenario sc = scenario_from_config(cfg);
        if (progress) *progress << sc.name << ": " << sc.mesh.ndof << " dofs\n";
        RunResult r = run_scenario(sc, progress);
        if (opt.keep_run_outputs) write_outputs(sc, r);

        StudyLevel lvl;
        lvl.n = n;
        lvl.h = 8.0 * 0.15 / n;
        lvl.converged = r.all_converged;
        for (const StepRecord& rec : r.state.log) lvl.iterations += rec.iterations;
        if (r.all_converged) {
          double refnorm = 0;
          h1_difference(sc.mesh, r.state.d, ref, lvl.err_h1, lvl.err_semi, refnorm);
          lvl.rel_h1 = refnorm > 0 ? lvl.err_h1 / refnorm : 0.0;
          const StepFields& last = r.fields.back();
          std::vector<int> ord(sc.mesh.slave_nodes.size());
          std::iota(ord.begin(), ord.end(), 0);
          std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            return sc.mesh.X[sc.mesh.slave_nodes[a]][0] < sc.mesh.X[sc.mesh.slave_nodes[b]][0];
          });
          for (int s : ord) {
            lvl.profile_x.push_back(sc.mesh.X[sc.mesh.slave_nodes[s]][0]);
            lvl.profile_z.push_back(last.zn[s]);
            lvl.p_max = std::max(lvl.p_max, last.zn[s]);
          }
        }
        if (progress)
          *progress << sc.name << ": err_h1 = " << lvl.err_h1 << ", p_max = " << lvl.p_max
                    << "\n";
        series.levels.push_back(std::move(lvl));
      }
      series.slope = fit_slope(series);
      if (progress)
        *progress << "order " << order << " " << weighting_name(basis)
                  << ": slope = " << series.slope << "\n";
      out.series.push_back(std::move(series));
    }
  return out;
}

void write_study(const StudyResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(r.options.outdir);
  std::ofstream f(fs::path(r.options.outdir) / "study.csv");
  if (!f) throw Error("cannot write study results under " + r.options.outdir);
  f << "order,basis,n,h,err_h1,err_semi,rel_h1,p_max,iterations,converged\n";
  for (const StudySeries& s : r.series)
    for (const StudyLevel& l : s.levels)
      f << s.order << ',' << weighting_name(s.basis) << ',' << l.n << ',' << fmt17(l.h) << ','
        << fmt17(l.err_h1) << ',' << fmt17(l.err_semi) << ',' << fmt17(l.rel_h1) << ','
        << fmt17(l.p_max) << ',' << l.iterations << ',' << int(l.converged) << '\n';
  std::ofstream g(fs::path(r.options.outdir) / "slopes.csv");
  g << "order,basis,slope\n";
  for (const StudySeries& s : r.series)
    g << s.order << ',' << weighting_name(s.basis) << ',' << fmt17(s.slope) << '\n';
}

}  // namespace rdc
