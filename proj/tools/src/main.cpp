#include "rdc/scenario.hpp"
#include "rdc/study.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

void print_counters(const rdc::Scenario& sc, const rdc::RunResult& r) {
  std::printf("%s (%d dofs, %zu slave nodes)\n", sc.name.c_str(), sc.mesh.ndof,
              sc.mesh.slave_nodes.size());
  std::printf("%5s %12s %10s %12s %8s %12s %14s %12s\n", "step", "dual_evals", "cells",
              "gauss_pts", "clips", "projections", "frame_dep_dof", "matrix_nnz");
  long long dep_total = 0;
  for (size_t k = 0; k < r.per_step.size(); ++k) {
    const rdc::StepCounters& s = r.per_step[k];
    std::printf("%5zu %12lld %10lld %12lld %8lld %12lld %14lld %12lld\n", k + 1,
                s.counters.dual_evals, s.counters.cells, s.counters.gauss_points,
                s.counters.clips, s.counters.projections, s.frame_dep_dofs, s.lin_nnz);
    dep_total += s.frame_dep_dofs;
  }
  double assemble = 0, solve = 0;
  for (const rdc::StepRecord& rec : r.state.log)
    for (const rdc::IterationRecord& ir : rec.iters) {
      assemble += ir.assemble_ms;
      solve += ir.solve_ms;
    }
  std::printf("totals: frame_dep_dof %lld, assembly %.1f ms, solve %.1f ms, wall %.2f s\n\n",
              dep_total, assemble, solve, r.seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual mortar contact solver for a deformable body on a rigid obstacle"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* cmd_run = app.add_subcommand("run", "run a scenario and write its outputs");
  cmd_run->add_option("scenario", scenario_path, "scenario config file")->required();

  auto* cmd_study = app.add_subcommand("study", "mesh refinement study");
  std::string study_case;
  std::vector<int> orders{1, 2};
  std::vector<int> levels{8, 16, 32, 64};
  int ref_n = 256, steps = 20;
  std::string study_out = "out/study_hertz";
  bool keep_runs = false;
  cmd_study->add_option("case", study_case, "study case, only 'hertz'")->required();
  cmd_study->add_option("--orders", orders, "interface orders")->delimiter(',');
  cmd_study->add_option("--levels", levels, "contact band facet counts")->delimiter(',');
  cmd_study->add_option("--ref", ref_n, "reference band facet count (order 2)");
  cmd_study->add_option("--steps", steps, "load steps per run");
  cmd_study->add_option("--out", study_out, "output directory");
  cmd_study->add_flag("--keep-runs", keep_runs, "write full outputs of every run");

  std::string path_a, path_b;
  auto* cmd_cnt = app.add_subcommand("counters", "run two scenarios and compare their counters");
  cmd_cnt->add_option("scenarioA", path_a, "first scenario config")->required();
  cmd_cnt->add_option("scenarioB", path_b, "second scenario config")->required();

  std::string jac_path;
  int jac_cols = 400;
  auto* cmd_jac = app.add_subcommand(
      "check-jacobian", "finite-difference check of the assembled tangent at the final state");
  cmd_jac->add_option("scenario", jac_path, "scenario config file")->required();
  cmd_jac->add_option("--cols", jac_cols, "displacement columns to difference");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      rdc::Scenario sc = rdc::load_scenario_file(scenario_path);
      rdc::RunResult r = rdc::run_scenario(sc, &std::cout);
      rdc::write_outputs(sc, r);
      if (!r.all_converged) {
        std::cerr << "failed: " << r.error << "\n";
        return 1;
      }
      std::cout << "converged, outputs under " << sc.outdir << "\n";
      return 0;
    }
    if (*cmd_study) {
      if (study_case != "hertz") throw rdc::Error("unknown study case '" + study_case + "'");
      rdc::StudyOptions opt;
      opt.orders = orders;
      opt.levels = levels;
      opt.ref_n = ref_n;
      opt.steps = steps;
      opt.outdir = study_out;
      opt.keep_run_outputs = keep_runs;
      rdc::StudyResult res = rdc::run_study_hertz(opt, &std::cout);
      rdc::write_study(res);
      for (const rdc::StudySeries& s : res.series) {
        std::printf("order %d, %s basis: slope %.3f\n", s.order,
                    rdc::weighting_name(s.basis), s.slope);
        for (const rdc::StudyLevel& l : s.levels)
          std::printf("  n %4d  h %.5f  err_h1 %.6e  p_max %.4f  iters %d\n", l.n, l.h,
                      l.err_h1, l.p_max, l.iterations);
      }
      std::cout << "results under " << study_out << "\n";
      return 0;
    }
    if (*cmd_cnt) {
      rdc::Scenario sa = rdc::load_scenario_file(path_a);
      rdc::Scenario sb = rdc::load_scenario_file(path_b);
      rdc::RunResult ra = rdc::run_scenario(sa);
      rdc::RunResult rb = rdc::run_scenario(sb);
      print_counters(sa, ra);
      print_counters(sb, rb);
      if (!ra.all_converged || !rb.all_converged) {
        if (!ra.all_converged) std::cerr << sa.name << " failed: " << ra.error << "\n";
        if (!rb.all_converged) std::cerr << sb.name << " failed: " << rb.error << "\n";
        return 1;
      }
      return 0;
    }
    if (*cmd_jac) {
      rdc::Scenario sc = rdc::load_scenario_file(jac_path);
      rdc::RunResult r = rdc::run_scenario(sc, &std::cout);
      if (!r.all_converged) {
        std::cerr << "failed: " << r.error << "\n";
        return 1;
      }
      rdc::JacobianCheck jc = rdc::jacobian_check(sc, r, jac_cols);
      std::printf("saddle system %d rows, %d columns differenced, max relative error %.3e\n",
                  jc.rows, jc.cols_checked, jc.max_rel);
      return jc.max_rel < 1e-5 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
