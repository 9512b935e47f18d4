#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "snkit/bench.hpp"
#include "snkit/errors.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw snkit::ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_bench(const std::string& experiment, const std::string& config_path,
              const std::string& out_dir, bool strict_paper) {
  // The --experiment flag fills in when the config file does not name one.
  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    try {
      j = nlohmann::json::parse(read_file(config_path));
    } catch (const std::exception& e) {
      throw snkit::ParseError(std::string("bench config: invalid JSON: ") + e.what());
    }
  }
  if (!j.contains("experiment")) j["experiment"] = experiment;
  snkit::BenchConfig cfg = snkit::bench_config_from_json(j.dump());
  if (strict_paper) cfg.strict_paper = true;

  const std::vector<snkit::BenchRow> rows = snkit::run_experiment(cfg);
  if (snkit::write_outputs(rows, cfg, out_dir) != 0) {
    std::cerr << "snkit bench: failed to write outputs under '" << out_dir << "'\n";
    return 1;
  }
  std::size_t converged = 0;
  for (const auto& r : rows)
    if (r.converged) ++converged;
  std::cout << "snkit bench: " << rows.size() << " cells, " << converged << " converged, "
            << rows.size() - converged << " recorded as DNC; results in " << out_dir << "\n";
  return 0;
}

int run_export_dsa(const std::string& config_path, const std::string& kind_name,
                   const std::string& scope_name, const std::string& out_path) {
  snkit::ProblemConfig pcfg;
  if (!config_path.empty()) pcfg = snkit::problem_config_from_json(read_file(config_path));
  const snkit::ProblemSpec problem = snkit::build_problem(pcfg);
  const snkit::AngularQuadrature quad = snkit::build_quadrature(pcfg.quadrature_order);
  const snkit::DGSpace space = snkit::make_dg_space(problem.mesh, pcfg.dg_order);
  const snkit::TransportSystem sys =
      snkit::assemble_transport(space, quad, problem.field, problem.bc);

  snkit::DsaKind kind;
  if (kind_name == "SIP")
    kind = snkit::DsaKind::SIP;
  else if (kind_name == "NIP")
    kind = snkit::DsaKind::NIP;
  else if (kind_name == "mNIP")
    kind = snkit::DsaKind::MNIP;
  else
    throw snkit::UsageError("unknown DSA kind '" + kind_name + "' (use SIP, NIP or mNIP)");
  const snkit::DsaScope scope =
      scope_name == "thick" ? snkit::DsaScope::ThickOnly : snkit::DsaScope::Full;

  const snkit::DsaMatrix dsa = snkit::assemble_dsa(sys, kind, scope, pcfg.eta);
  snkit::write_matrix_market(dsa.matrix, out_path);
  std::cout << "wrote " << dsa.matrix.n_rows << "x" << dsa.matrix.n_cols << " " << kind_name
            << " matrix (" << dsa.matrix.nnz() << " entries) to " << out_path << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"snkit: deterministic 2D S_N transport benchmarks with heterogeneous DSA"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "run a benchmark experiment matrix");
  std::string experiment = "pipe-sweep";
  std::string config_path;
  std::string out_dir = "bench-out";
  bool strict_paper = false;
  bench->add_option("--experiment", experiment,
                    "pipe-sweep | five-region | amg-study | void-demo | custom")
      ->capture_default_str();
  bench->add_option("--config", config_path, "JSON config (defaults per experiment when omitted)");
  bench->add_option("--out", out_dir, "output directory")->capture_default_str();
  bench->add_flag("--strict-paper", strict_paper,
                  "outer tolerance 1e-12 and restart 30 for reporting runs");

  auto* export_dsa = app.add_subcommand("export-dsa", "assemble a DSA matrix and write Matrix Market");
  std::string dsa_config;
  std::string dsa_kind = "NIP";
  std::string dsa_scope = "thick";
  std::string dsa_out = "dsa.mtx";
  export_dsa->add_option("--config", dsa_config, "problem JSON config (bundled defaults when omitted)");
  export_dsa->add_option("--kind", dsa_kind, "SIP | NIP | mNIP")->capture_default_str();
  export_dsa->add_option("--scope", dsa_scope, "full | thick")->capture_default_str();
  export_dsa->add_option("--out", dsa_out, "output path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) return run_bench(experiment, config_path, out_dir, strict_paper);
    if (export_dsa->parsed()) return run_export_dsa(dsa_config, dsa_kind, dsa_scope, dsa_out);
  } catch (const snkit::UsageError& e) {
    std::cerr << "snkit: config error: " << e.what() << "\n";
    return 2;
  } catch (const snkit::ParseError& e) {
    std::cerr << "snkit: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "snkit: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
