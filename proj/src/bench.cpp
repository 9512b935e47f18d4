#include "snkit/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string experiment_label(Experiment e) {
  switch (e) {
    case Experiment::PipeSweep: return "pipe-sweep";
    case Experiment::FiveRegion: return "five-region";
    case Experiment::AmgStudy: return "amg-study";
    case Experiment::VoidDemo: return "void-demo";
    case Experiment::Custom: return "custom";
  }
  return "?";
}

Experiment experiment_from_label(const std::string& s) {
  if (s == "pipe-sweep") return Experiment::PipeSweep;
  if (s == "five-region") return Experiment::FiveRegion;
  if (s == "amg-study") return Experiment::AmgStudy;
  if (s == "void-demo") return Experiment::VoidDemo;
  if (s == "custom") return Experiment::Custom;
  throw ParseError("bench config: unknown experiment '" + s + "'");
}

PreconditionerVariant variant_from_label(const std::string& s) {
  if (s == "none") return PreconditionerVariant::None;
  if (s == "full-dsa") return PreconditionerVariant::FullDsa;
  if (s == "het-dsa-diag") return PreconditionerVariant::HetDsaDiag;
  if (s == "het-dsa-tri") return PreconditionerVariant::HetDsaTri;
  throw ParseError("bench config: unknown preconditioner variant '" + s + "'");
}

DsaKind kind_from_label(const std::string& s) {
  if (s == "SIP") return DsaKind::SIP;
  if (s == "NIP") return DsaKind::NIP;
  if (s == "mNIP") return DsaKind::MNIP;
  throw ParseError("bench config: unknown DSA kind '" + s + "'");
}

InnerSolver inner_from_label(const std::string& s) {
  if (s == "direct") return InnerSolver::Direct;
  if (s == "amg-fgmres") return InnerSolver::AmgFgmres;
  throw ParseError("bench config: unknown inner solver '" + s + "'");
}

std::string inner_label(InnerSolver s) {
  return s == InnerSolver::Direct ? "direct" : "amg-fgmres";
}

std::string cdt_label(const std::optional<double>& cdt) {
  return cdt ? fmt_short(*cdt) : std::string("sigma_a=0");
}

// One transport solve cell; assembly rejections become non-converged rows.
BenchRow run_cell(const ProblemSpec& problem, const std::string& problem_label,
                  const std::string& cdt_text, const SolverChoice& choice,
                  const BenchConfig& cfg) {
  BenchRow row;
  row.problem = problem_label;
  row.cdt = cdt_text;
  row.order = cfg.dg_order;
  row.quadrature = cfg.quadrature_order;
  row.variant = variant_label(choice.variant);
  row.kind = kind_label(choice.kind);
  row.eta = cfg.eta;

  const AngularQuadrature quad = build_quadrature(cfg.quadrature_order);
  const DGSpace space = make_dg_space(problem.mesh, cfg.dg_order);
  const TransportSystem sys = assemble_transport(space, quad, problem.field, problem.bc);
  row.dofs = sys.n_dofs();

  PreconditionerSpec spec;
  spec.variant = choice.variant;
  spec.kind = choice.kind;
  spec.inner = choice.inner;
  spec.eta = cfg.eta;

  KrylovConfig outer = cfg.krylov;
  if (cfg.strict_paper) {
    outer.rel_tol = 1e-12;
    outer.restart = 30;
  }

  try {
    auto [phi, stats] = solve_transport(sys, spec, outer);
    row.outer_iters = stats.outer_iterations;
    row.converged = stats.converged;
    row.thick_pct = 100.0 * stats.thick_dof_fraction;
    row.wall_time_seconds = stats.wall_time_seconds;
    if (!stats.inner_amg_iterations_per_outer.empty()) {
      double sum = 0.0;
      for (const std::size_t c : stats.inner_amg_iterations_per_outer)
        sum += static_cast<double>(c);
      row.mean_inner_amg_iters = sum / static_cast<double>(stats.inner_amg_iterations_per_outer.size());
    }
  } catch (const VoidInScopeError& e) {
    row.converged = false;
    row.note = std::string("void-in-scope: ") + e.what();
  } catch (const SingularMatrixError& e) {
    row.converged = false;
    row.note = std::string("singular-dsa: ") + e.what();
  }
  return row;
}

} // namespace

std::string variant_label(PreconditionerVariant v) {
  switch (v) {
    case PreconditionerVariant::None: return "none";
    case PreconditionerVariant::FullDsa: return "full-dsa";
    case PreconditionerVariant::HetDsaDiag: return "het-dsa-diag";
    case PreconditionerVariant::HetDsaTri: return "het-dsa-tri";
  }
  return "?";
}

std::string kind_label(DsaKind k) {
  switch (k) {
    case DsaKind::SIP: return "SIP";
    case DsaKind::NIP: return "NIP";
    case DsaKind::MNIP: return "mNIP";
  }
  return "?";
}

BenchConfig default_bench_config(Experiment experiment) {
  BenchConfig cfg;
  cfg.experiment = experiment;
  switch (experiment) {
    case Experiment::PipeSweep:
      cfg.strict_paper = true;
      break;
    case Experiment::FiveRegion:
      cfg.strict_paper = true;
      break;
    case Experiment::AmgStudy:
      cfg.strict_paper = true;
      cfg.solvers = {{PreconditionerVariant::FullDsa, DsaKind::NIP, InnerSolver::AmgFgmres},
                     {PreconditionerVariant::FullDsa, DsaKind::MNIP, InnerSolver::AmgFgmres},
                     {PreconditionerVariant::HetDsaDiag, DsaKind::NIP, InnerSolver::AmgFgmres}};
      break;
    case Experiment::VoidDemo:
      cfg.strict_paper = true;
      cfg.sigma_pipe_list = {0.0};
      cfg.cdt.reset();  // sigma_a = 0, so the pipe is true void
      cfg.solvers = {{PreconditionerVariant::HetDsaDiag, DsaKind::NIP, InnerSolver::Direct},
                     {PreconditionerVariant::HetDsaTri, DsaKind::NIP, InnerSolver::Direct},
                     {PreconditionerVariant::FullDsa, DsaKind::NIP, InnerSolver::Direct},
                     {PreconditionerVariant::FullDsa, DsaKind::MNIP, InnerSolver::Direct}};
      break;
    case Experiment::Custom:
      break;
  }
  return cfg;
}

std::vector<BenchRow> run_experiment(const BenchConfig& cfg) {
  if (cfg.solvers.empty()) throw UsageError("run_experiment: config field 'solvers' is empty");
  if (cfg.refinement < 1) throw UsageError("run_experiment: config field 'refinement' must be >= 1");
  std::vector<BenchRow> rows;

  switch (cfg.experiment) {
    case Experiment::PipeSweep:
    case Experiment::VoidDemo: {
      if (cfg.sigma_pipe_list.empty())
        throw UsageError("run_experiment: config field 'sigma_pipe_list' is empty");
      for (const double sp : cfg.sigma_pipe_list) {
        const ProblemSpec problem = make_crooked_pipe(
            CrookedPipeVariant::TwoRegion, {{"pipe", sp}, {"out", cfg.sigma_out}}, cfg.cdt,
            cfg.refinement, cfg.eta);
        const std::string label =
            (cfg.experiment == Experiment::VoidDemo && sp == 0.0)
                ? "void-pipe"
                : "pipe sp=" + fmt_short(sp);
        for (const SolverChoice& choice : cfg.solvers)
          rows.push_back(run_cell(problem, label, cdt_label(cfg.cdt), choice, cfg));
      }
      break;
    }
    case Experiment::FiveRegion:
    case Experiment::AmgStudy: {
      if (cfg.problems.empty())
        throw UsageError("run_experiment: config field 'problems' is empty");
      if (cfg.cdt_list.empty())
        throw UsageError("run_experiment: config field 'cdt_list' is empty");
      for (const auto& cdt : cfg.cdt_list) {
        for (const int pr : cfg.problems) {
          const ProblemSpec problem =
              make_crooked_pipe(CrookedPipeVariant::FiveRegion, five_region_problem(pr), cdt,
                                cfg.refinement, cfg.eta);
          const std::string label = "#" + std::to_string(pr);
          for (const SolverChoice& choice : cfg.solvers)
            rows.push_back(run_cell(problem, label, cdt_label(cdt), choice, cfg));
        }
      }
      break;
    }
    case Experiment::Custom: {
      const ProblemSpec problem = build_problem(cfg.custom_problem);
      BenchConfig local = cfg;
      local.eta = cfg.custom_problem.eta;
      local.quadrature_order = cfg.custom_problem.quadrature_order;
      local.dg_order = cfg.custom_problem.dg_order;
      for (const SolverChoice& choice : cfg.solvers)
        rows.push_back(run_cell(problem, "custom", cdt_label(cfg.custom_problem.cdt), choice,
                                local));
      break;
    }
  }
  return rows;
}

std::string emit_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "problem,cdt,order,N,variant,kind,eta,outer_iters,mean_inner_amg_iters,thick_pct,converged\n";
  for (const BenchRow& r : rows) {
    os << r.problem << "," << r.cdt << "," << r.order << "," << r.quadrature << "," << r.variant
       << "," << r.kind << "," << fmt_double(r.eta) << "," << r.outer_iters << ","
       << fmt_double(r.mean_inner_amg_iters) << "," << fmt_double(r.thick_pct) << ","
       << (r.converged ? "true" : "false") << "\n";
  }
  return os.str();
}

std::vector<BenchRow> parse_csv(const std::string& csv_text) {
  std::vector<BenchRow> rows;
  std::istringstream is(csv_text);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("csv: empty input");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 11) throw ParseError("csv: expected 11 fields, got line '" + line + "'");
    BenchRow r;
    r.problem = fields[0];
    r.cdt = fields[1];
    r.order = std::stoul(fields[2]);
    r.quadrature = std::stoul(fields[3]);
    r.variant = fields[4];
    r.kind = fields[5];
    r.eta = std::stod(fields[6]);
    r.outer_iters = std::stoul(fields[7]);
    r.mean_inner_amg_iters = std::stod(fields[8]);
    r.thick_pct = std::stod(fields[9]);
    r.converged = fields[10] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string emit_report_markdown(const std::vector<BenchRow>& rows, const std::string& title) {
  std::ostringstream os;
  os << "# " << title << "\n\n";
  os << "| problem | cdt | order | N | variant | kind | eta | Iters. | AMG it. | % Thick DOFs | converged |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const BenchRow& r : rows) {
    os << "| " << r.problem << " | " << r.cdt << " | " << r.order << " | " << r.quadrature
       << " | " << r.variant << " | " << r.kind << " | " << fmt_short(r.eta) << " | ";
    if (r.converged)
      os << r.outer_iters;
    else
      os << "DNC";
    os << " | " << fmt_short(r.mean_inner_amg_iters) << " | " << fmt_short(r.thick_pct) << " | "
       << (r.converged ? "yes" : "no") << " |\n";
  }
  os << "\n";
  return os.str();
}

std::string emit_pipe_sweep_data(const std::vector<BenchRow>& rows) {
  struct Entry {
    double sigma;
    const BenchRow* row;
  };
  std::vector<Entry> entries;
  for (const BenchRow& r : rows) {
    double sigma = 0.0;
    const auto pos = r.problem.find("sp=");
    if (r.problem == "void-pipe")
      sigma = 0.0;
    else if (pos != std::string::npos)
      sigma = std::stod(r.problem.substr(pos + 3));
    else
      continue;
    entries.push_back({sigma, &r});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.sigma != b.sigma) return a.sigma < b.sigma;
    if (a.row->variant != b.row->variant) return a.row->variant < b.row->variant;
    return a.row->kind < b.row->kind;
  });
  std::ostringstream os;
  os << "sigma_pipe,variant,kind,outer_iters,converged\n";
  for (const Entry& e : entries) {
    os << fmt_double(e.sigma) << "," << e.row->variant << "," << e.row->kind << ","
       << e.row->outer_iters << "," << (e.row->converged ? "true" : "false") << "\n";
  }
  return os.str();
}

std::string rows_to_json(const std::vector<BenchRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const BenchRow& r : rows) {
    nlohmann::json e;
    e["problem"] = r.problem;
    e["cdt"] = r.cdt;
    e["order"] = r.order;
    e["N"] = r.quadrature;
    e["variant"] = r.variant;
    e["kind"] = r.kind;
    e["eta"] = r.eta;
    e["outer_iters"] = r.outer_iters;
    e["mean_inner_amg_iters"] = r.mean_inner_amg_iters;
    e["thick_pct"] = r.thick_pct;
    e["converged"] = r.converged;
    e["dofs"] = r.dofs;
    e["wall_time_seconds"] = r.wall_time_seconds;
    if (!r.note.empty()) e["note"] = r.note;
    j.push_back(std::move(e));
  }
  return j.dump(2);
}

std::string bench_config_to_json(const BenchConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = experiment_label(cfg.experiment);
  j["sigma_pipe_list"] = cfg.sigma_pipe_list;
  j["sigma_out"] = cfg.sigma_out;
  j["problems"] = cfg.problems;
  nlohmann::json cdts = nlohmann::json::array();
  for (const auto& c : cfg.cdt_list) {
    if (c)
      cdts.push_back(*c);
    else
      cdts.push_back("no-absorption");
  }
  j["cdt_list"] = std::move(cdts);
  if (cfg.cdt)
    j["cdt"] = *cfg.cdt;
  else
    j["cdt"] = "no-absorption";
  j["eta"] = cfg.eta;
  j["quadrature_order"] = cfg.quadrature_order;
  j["dg_order"] = cfg.dg_order;
  j["refinement"] = cfg.refinement;
  nlohmann::json solvers = nlohmann::json::array();
  for (const SolverChoice& s : cfg.solvers) {
    solvers.push_back({{"variant", variant_label(s.variant)},
                       {"kind", kind_label(s.kind)},
                       {"inner", inner_label(s.inner)}});
  }
  j["solvers"] = std::move(solvers);
  j["krylov"] = {{"restart", cfg.krylov.restart},
                 {"max_iters", cfg.krylov.max_iters},
                 {"rel_tol", cfg.krylov.rel_tol}};
  j["strict_paper"] = cfg.strict_paper;
  j["custom_problem"] = nlohmann::json::parse(problem_config_to_json(cfg.custom_problem));
  return j.dump(2);
}

BenchConfig bench_config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bench config: invalid JSON: ") + e.what());
  }
  BenchConfig cfg;
  try {
    if (j.contains("experiment"))
      cfg.experiment = experiment_from_label(j["experiment"].get<std::string>());
    cfg = default_bench_config(cfg.experiment);
    if (j.contains("sigma_pipe_list")) cfg.sigma_pipe_list = j["sigma_pipe_list"].get<Vector>();
    if (j.contains("sigma_out")) cfg.sigma_out = j["sigma_out"].get<double>();
    if (j.contains("problems")) cfg.problems = j["problems"].get<std::vector<int>>();
    if (j.contains("cdt_list")) {
      cfg.cdt_list.clear();
      for (const auto& c : j["cdt_list"]) {
        if (c.is_string()) {
          if (c.get<std::string>() != "no-absorption")
            throw ParseError("bench config: cdt_list entries must be numbers or 'no-absorption'");
          cfg.cdt_list.push_back(std::nullopt);
        } else {
          cfg.cdt_list.push_back(c.get<double>());
        }
      }
    }
    if (j.contains("cdt")) {
      if (j["cdt"].is_string()) {
        if (j["cdt"].get<std::string>() != "no-absorption")
          throw ParseError("bench config: cdt must be a number or 'no-absorption'");
        cfg.cdt.reset();
      } else {
        cfg.cdt = j["cdt"].get<double>();
      }
    }
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("quadrature_order")) cfg.quadrature_order = j["quadrature_order"].get<std::size_t>();
    if (j.contains("dg_order")) cfg.dg_order = j["dg_order"].get<std::size_t>();
    if (j.contains("refinement")) cfg.refinement = j["refinement"].get<std::size_t>();
    if (j.contains("solvers")) {
      cfg.solvers.clear();
      for (const auto& s : j["solvers"]) {
        SolverChoice choice;
        choice.variant = variant_from_label(s.at("variant").get<std::string>());
        if (s.contains("kind")) choice.kind = kind_from_label(s["kind"].get<std::string>());
        if (s.contains("inner")) choice.inner = inner_from_label(s["inner"].get<std::string>());
        cfg.solvers.push_back(choice);
      }
    }
    if (j.contains("krylov")) {
      const auto& k = j["krylov"];
      if (k.contains("restart")) cfg.krylov.restart = k["restart"].get<std::size_t>();
      if (k.contains("max_iters")) cfg.krylov.max_iters = k["max_iters"].get<std::size_t>();
      if (k.contains("rel_tol")) cfg.krylov.rel_tol = k["rel_tol"].get<double>();
    }
    if (j.contains("strict_paper")) cfg.strict_paper = j["strict_paper"].get<bool>();
    if (j.contains("custom_problem"))
      cfg.custom_problem = problem_config_from_json(j["custom_problem"].dump());
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bench config: ") + e.what());
  }
  return cfg;
}

int write_outputs(const std::vector<BenchRow>& rows, const BenchConfig& cfg,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) return 1;
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
    if (!os) return false;
    os << content;
    return static_cast<bool>(os);
  };
  const std::string title = "snkit bench: " + experiment_label(cfg.experiment);
  if (!write("results.csv", emit_csv(rows))) return 1;
  if (!write("results.json", rows_to_json(rows))) return 1;
  if (!write("report.md", emit_report_markdown(rows, title))) return 1;
  if (cfg.experiment == Experiment::PipeSweep || cfg.experiment == Experiment::VoidDemo) {
    if (!write("pipe_sweep_data.csv", emit_pipe_sweep_data(rows))) return 1;
  }
  return 0;
}

} // namespace snkit
