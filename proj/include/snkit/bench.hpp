#ifndef SNKIT_BENCH_HPP
#define SNKIT_BENCH_HPP

#include <string>
#include <vector>

#include "snkit/problem.hpp"
#include "snkit/solver.hpp"

namespace snkit {

enum class Experiment { PipeSweep, FiveRegion, AmgStudy, VoidDemo, Custom };

struct SolverChoice {
  PreconditionerVariant variant = PreconditionerVariant::FullDsa;
  DsaKind kind = DsaKind::NIP;
  InnerSolver inner = InnerSolver::Direct;
};

struct BenchConfig {
  Experiment experiment = Experiment::PipeSweep;
  // pipe-sweep: two-region problems over this sigma_pipe list
  Vector sigma_pipe_list = {1e-6, 1e-4, 1e-2, 0.1, 10.0, 100.0};
  double sigma_out = 200.0;
  // five-region / amg-study: bundled problem numbers and cdt values
  std::vector<int> problems = {1, 2, 3, 4, 5};
  std::vector<std::optional<double>> cdt_list = {1.0, 1000.0};  // nullopt = sigma_a 0
  std::optional<double> cdt = 1000.0;                           // single-problem experiments
  double eta = 1.0;
  std::size_t quadrature_order = 8;
  std::size_t dg_order = 2;
  std::size_t refinement = 1;
  std::vector<SolverChoice> solvers = {{PreconditionerVariant::FullDsa, DsaKind::NIP,
                                        InnerSolver::Direct},
                                       {PreconditionerVariant::HetDsaDiag, DsaKind::NIP,
                                        InnerSolver::Direct}};
  KrylovConfig krylov{30, 500, 1e-8, 0.0, true};
  bool strict_paper = false;  // outer tolerance 1e-12, restart 30
  // custom experiment: an explicit problem description
  ProblemConfig custom_problem;
};

std::string bench_config_to_json(const BenchConfig& cfg);
BenchConfig bench_config_from_json(const std::string& json_text);
BenchConfig default_bench_config(Experiment experiment);

/// One experiment cell: identifying parameters plus the run statistics.
struct BenchRow {
  std::string problem;  // e.g. "pipe sp=1e-06", "#3", "void-pipe"
  std::string cdt;      // number or "sigma_a=0"
  std::size_t order = 2;
  std::size_t quadrature = 8;
  std::string variant;  // none / full-dsa / het-dsa-diag / het-dsa-tri
  std::string kind;     // SIP / NIP / mNIP
  double eta = 1.0;
  std::size_t outer_iters = 0;
  double mean_inner_amg_iters = 0.0;
  double thick_pct = 0.0;
  bool converged = false;
  // JSON-only extras (not part of the CSV schema)
  std::size_t dofs = 0;
  double wall_time_seconds = 0.0;
  std::string note;  // e.g. "void-in-scope" for assembly rejections

  bool operator==(const BenchRow&) const = default;
};

std::string variant_label(PreconditionerVariant v);
std::string kind_label(DsaKind k);

/// Runs every (problem x solver) cell of the experiment. A single cell
/// failing to converge or rejecting assembly is recorded, not fatal.
std::vector<BenchRow> run_experiment(const BenchConfig& cfg);

/// CSV ledger with the fixed column set
/// problem,cdt,order,N,variant,kind,eta,outer_iters,mean_inner_amg_iters,thick_pct,converged
std::string emit_csv(const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_csv(const std::string& csv_text);

/// Markdown summary shaped like the run ledger, one table per experiment.
std::string emit_report_markdown(const std::vector<BenchRow>& rows, const std::string& title);

/// sigma_pipe / iteration data file for external plotting, sorted by
/// ascending sigma_pipe then variant. Only meaningful for pipe-sweep rows.
std::string emit_pipe_sweep_data(const std::vector<BenchRow>& rows);

/// Full JSON dump of the rows (includes DOF counts and wall times).
std::string rows_to_json(const std::vector<BenchRow>& rows);

/// Writes results.csv, results.json, report.md (and pipe_sweep_data.csv for
/// pipe-sweep) under out_dir. Returns 0 on success, nonzero on I/O failure.
int write_outputs(const std::vector<BenchRow>& rows, const BenchConfig& cfg,
                  const std::string& out_dir);

} // namespace snkit

#endif
