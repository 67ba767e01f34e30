#pragma once

#include "rdc/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rdc {

// Evaluates a displacement field given on one mesh at arbitrary reference
// points: bucket search over element boxes, then the inverse isoparametric
// map.  Points slightly outside every element (different boundary
// resolution between meshes) are clamped to the nearest element.
class FieldSampler {
 public:
  FieldSampler(const Mesh& m, const VecX& d);

  // Displacement and material gradient du/dX at reference point X.
  void sample(const Vec3& X, Vec3& u, Mat3& grad) const;

 private:
  const Mesh& m_;
  VecX d_;
  Vec3 lo_, hi_;
  int nb_[3] = {1, 1, 1};
  double cell_[3] = {1, 1, 1};
  std::vector<std::vector<int>> buckets_;
  double scale_ = 1.0;

  bool invert(int e, const Vec3& X, Vec3& xi, double& excess) const;
};

// H1 norm and seminorm of the difference between a coarse solution and a
// reference field, integrated with the coarse mesh's bulk rules; refnorm
// receives the H1 norm of the reference field over the same points.
void h1_difference(const Mesh& coarse, const VecX& dc, const FieldSampler& ref, double& norm,
                   double& seminorm, double& refnorm);

struct StudyLevel {
  int n = 0;
  double h = 0.0;       // contact-band facet size
  double err_h1 = 0.0;  // H1 norm of the difference to the reference
  double err_semi = 0.0;
  double rel_h1 = 0.0;
  double p_max = 0.0;  // largest nodal normal multiplier at full load
  int iterations = 0;
  bool converged = false;
  // Final multiplier profile over the slave nodes, sorted by x.
  std::vector<double> profile_x, profile_z;
};

struct StudySeries {
  int order = 0;
  GapWeighting basis = GapWeighting::piecewise;
  std::vector<StudyLevel> levels;
  double slope = 0.0;  // least-squares d log(err) / d log(h)
};

struct StudyOptions {
  std::vector<int> orders = {1, 2};
  std::vector<int> levels = {8, 16, 32, 64};
  int ref_n = 256;
  int steps = 20;
  std::string outdir = "out/study_hertz";
  bool keep_run_outputs = false;  // also write per-run CSVs under outdir/runs
};

struct StudyResult {
  StudyOptions options;
  std::vector<StudySeries> series;
};

// Gap bases compared per interpolation order: dual against standard on
// linear interfaces, dual against piecewise-linear on quadratic ones.
std::vector<GapWeighting> study_bases(int order);

// Canonical half-disc benchmark configuration at a given refinement.
Config hertz_config(int n, int order, GapWeighting basis, int steps, const std::string& outdir);

// Runs the refinement study against an order-2 reference at ref_n.
StudyResult run_study_hertz(const StudyOptions& opt, std::ostream* progress = nullptr);

double fit_slope(const StudySeries& s);

void write_study(const StudyResult& r);

}  // namespace rdc
