#include "snkit/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

constexpr double kAmbientIncident = 1.0;
constexpr double kInletIncident = 1.0e4;  // inlet is 1e4 times the ambient field

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

} // namespace

const std::string& crooked_pipe_map_text() {
  static const std::string map =
      "EEEEEEEEEEEEEEEEEEEEEEEEEEEE\n"
      "EWWWWWWWWWWWWWWWWWWWWWWWWWWE\n"
      "EWWWWWWWWWWWWWWWWWWWBBBBBBWE\n"
      "PPPPPPPPPPPPPPPPPPWWBBBBBBWE\n"
      "PPPPPPPPPPPPPPPPPPWWBBBBBBWE\n"
      "EWWWWWWWWWWWWWWWPPWWBBBBBBWE\n"
      "EWWWWWWWWWWWWWWWPPWWBBBBBBWE\n"
      "EWWWWWWWWWWWWWWWPPWWWWWWWWWE\n"
      "EWWWWWWWWWWWWWWWPPWWWWWWWWWE\n"
      "EWWWWWWWWWWWWWWWPPPPPPPPPPPP\n"
      "EWWWWWWWWWWWWWWWPPPPPPPPPPPP\n"
      "EWWWWWWWWWWWWWWWWWWWWWWWWWWE\n"
      "EWWWWWWWWWWWWWWWWWWWWWWWWWWE\n"
      "EEEEEEEEEEEEEEEEEEEEEEEEEEEE\n";
  return map;
}

const std::string& crooked_pipe_legend_json() {
  static const std::string legend = R"({
  "cell_size": 0.5,
  "materials": [
    {"char": "P", "name": "pipe"},
    {"char": "W", "name": "wall"},
    {"char": "E", "name": "edge"},
    {"char": "B", "name": "block"}
  ]
})";
  return legend;
}

std::pair<StructuredMesh, MaterialMap> load_material_map_text(const std::string& grid_text,
                                                              const std::string& legend_json) {
  std::map<char, int> char_to_id;
  MaterialMap mat;
  double cell_size = 0.5;
  const bool have_legend = !legend_json.empty();
  if (have_legend) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(legend_json);
    } catch (const std::exception& e) {
      throw ParseError(std::string("legend: invalid JSON: ") + e.what());
    }
    cell_size = j.value("cell_size", 0.5);
    if (!j.contains("materials") || !j["materials"].is_array())
      throw ParseError("legend: missing 'materials' array");
    for (const auto& entry : j["materials"]) {
      const std::string c = entry.at("char").get<std::string>();
      if (c.size() != 1) throw ParseError("legend: material char must be a single character");
      char_to_id[c[0]] = mat.n_materials();
      mat.region_names.push_back(entry.at("name").get<std::string>());
    }
  }

  std::vector<std::string> lines;
  {
    std::istringstream is(grid_text);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.empty()) throw ParseError("material map: empty grid");
  const std::size_t nx = lines[0].size();
  for (std::size_t j = 0; j < lines.size(); ++j) {
    if (lines[j].size() != nx)
      throw ParseError("material map: ragged row at line " + std::to_string(j + 1) +
                       " (expected " + std::to_string(nx) + " columns, got " +
                       std::to_string(lines[j].size()) + ")");
  }

  StructuredMesh mesh;
  mesh.nx = nx;
  mesh.ny = lines.size();
  mesh.hx = mesh.hy = cell_size;
  mat.material_id.resize(mesh.n_elements());
  for (std::size_t j = 0; j < mesh.ny; ++j) {
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      const char c = lines[j][i];
      auto it = char_to_id.find(c);
      if (it == char_to_id.end()) {
        if (have_legend)
          throw ParseError(std::string("material map: unknown character '") + c + "' at line " +
                           std::to_string(j + 1) + ", column " + std::to_string(i + 1));
        char_to_id[c] = mat.n_materials();
        mat.region_names.push_back(std::string(1, c));
        it = char_to_id.find(c);
      }
      mat.material_id[mesh.element_id(i, j)] = it->second;
    }
  }
  return {mesh, mat};
}

std::pair<StructuredMesh, MaterialMap> load_material_map(const std::string& map_path,
                                                         const std::string& legend_path) {
  const std::string grid = read_file(map_path);
  const std::string legend = legend_path.empty() ? std::string() : read_file(legend_path);
  return load_material_map_text(grid, legend);
}

RegionSigmaMap five_region_problem(int number) {
  switch (number) {
    case 1: return {{"pipe", 1e-3}, {"wall", 500.0}, {"edge", 1e-4}, {"block", 100.0}};
    case 2: return {{"pipe", 0.1}, {"wall", 200.0}, {"edge", 200.0}, {"block", 5.0}};
    case 3: return {{"pipe", 1e-4}, {"wall", 10.0}, {"edge", 500.0}, {"block", 0.1}};
    case 4: return {{"pipe", 1e-6}, {"wall", 0.1}, {"edge", 100.0}, {"block", 1000.0}};
    case 5: return {{"pipe", 1e-4}, {"wall", 10.0}, {"edge", 500.0}, {"block", 100.0}};
    default: throw UsageError("five_region_problem: number must be 1..5");
  }
}

ProblemSpec make_crooked_pipe(CrookedPipeVariant variant, const RegionSigmaMap& sigma_s,
                              std::optional<double> cdt, std::size_t refinement, double eta) {
  if (refinement < 1) throw UsageError("make_crooked_pipe: refinement must be >= 1");
  if (cdt && !(*cdt > 0.0)) throw UsageError("make_crooked_pipe: cdt must be > 0");
  for (const auto& [name, value] : sigma_s) {
    if (value < 0.0)
      throw UsageError("make_crooked_pipe: negative sigma_s for region '" + name + "'");
  }

  auto [base_mesh, materials] = load_material_map_text(crooked_pipe_map_text(),
                                                       crooked_pipe_legend_json());

  auto region_id = [&](const std::string& name) {
    for (int k = 0; k < materials.n_materials(); ++k)
      if (materials.region_names[static_cast<std::size_t>(k)] == name) return k;
    throw UsageError("make_crooked_pipe: no region named '" + name + "'");
  };
  auto need = [&](const std::string& key) {
    auto it = sigma_s.find(key);
    if (it == sigma_s.end())
      throw UsageError("make_crooked_pipe: missing sigma_s entry '" + key + "'");
    return it->second;
  };

  Vector sigma_by_material(static_cast<std::size_t>(materials.n_materials()), 0.0);
  const int pipe_id = region_id("pipe");
  if (variant == CrookedPipeVariant::TwoRegion) {
    const double sp = need("pipe");
    const double so = need("out");
    for (int k = 0; k < materials.n_materials(); ++k)
      sigma_by_material[static_cast<std::size_t>(k)] = (k == pipe_id) ? sp : so;
  } else {
    for (const std::string name : {"pipe", "wall", "edge", "block"})
      sigma_by_material[static_cast<std::size_t>(region_id(name))] = need(name);
  }

  ProblemSpec spec;
  spec.eta = eta;
  spec.mesh = base_mesh;
  spec.mesh.nx = base_mesh.nx * refinement;
  spec.mesh.ny = base_mesh.ny * refinement;
  spec.mesh.hx = base_mesh.hx / static_cast<double>(refinement);
  spec.mesh.hy = base_mesh.hy / static_cast<double>(refinement);

  spec.materials.region_names = materials.region_names;
  spec.materials.material_id.resize(spec.mesh.n_elements());
  for (std::size_t j = 0; j < spec.mesh.ny; ++j) {
    for (std::size_t i = 0; i < spec.mesh.nx; ++i) {
      const std::size_t pe = base_mesh.element_id(i / refinement, j / refinement);
      spec.materials.material_id[spec.mesh.element_id(i, j)] = materials.material_id[pe];
    }
  }

  const double sigma_a = cdt ? 1.0 / *cdt : 0.0;
  const std::size_t n = spec.mesh.n_elements();
  spec.field.sigma_s.resize(n);
  spec.field.sigma_a.assign(n, sigma_a);
  spec.field.sigma_t.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    const double ss = sigma_by_material[static_cast<std::size_t>(spec.materials.material_id[e])];
    spec.field.sigma_s[e] = ss;
    spec.field.sigma_t[e] = ss + sigma_a;
  }

  spec.bc.psi_inc_left.assign(spec.mesh.ny, kAmbientIncident);
  spec.bc.psi_inc_right.assign(spec.mesh.ny, kAmbientIncident);
  spec.bc.psi_inc_bottom.assign(spec.mesh.nx, kAmbientIncident);
  spec.bc.psi_inc_top.assign(spec.mesh.nx, kAmbientIncident);
  spec.bc.q.assign(n, 0.0);
  // Inlet: left-boundary faces of pipe elements.
  for (std::size_t j = 0; j < spec.mesh.ny; ++j) {
    if (spec.materials.material_id[spec.mesh.element_id(0, j)] == pipe_id)
      spec.bc.psi_inc_left[j] = kInletIncident;
  }
  return spec;
}

ThickPartition partition_thick(const CoefficientField& field, double eta,
                               std::size_t dofs_per_element) {
  if (eta < 0.0) throw UsageError("partition_thick: eta must be >= 0");
  ThickPartition part;
  part.eta = eta;
  const std::size_t n = field.sigma_s.size();
  for (std::size_t e = 0; e < n; ++e) {
    if (field.sigma_s[e] >= eta)
      part.thick_elements.push_back(e);
    else
      part.thin_elements.push_back(e);
  }
  part.thick_dofs.reserve(part.thick_elements.size() * dofs_per_element);
  for (const std::size_t e : part.thick_elements)
    for (std::size_t k = 0; k < dofs_per_element; ++k)
      part.thick_dofs.push_back(e * dofs_per_element + k);
  part.thick_element_fraction =
      n == 0 ? 0.0 : static_cast<double>(part.thick_elements.size()) / static_cast<double>(n);
  return part;
}

PseudoScattering pseudo_scattering(double sigma, double cv, double temperature, double dt) {
  if (!(sigma > 0.0) || !(cv > 0.0) || !(temperature > 0.0) || !(dt > 0.0))
    throw UsageError("pseudo_scattering: all inputs must be > 0");
  constexpr double c = 2.9979e4;
  constexpr double a = 137.199;
  const double t3 = temperature * temperature * temperature;
  const double emission = 16.0 * std::numbers::pi * a * c * t3;
  const double denom = cv / dt + sigma * emission;
  PseudoScattering ps;
  ps.sigma_ps = sigma * sigma * emission / denom;
  const double sigma_abs = sigma - ps.sigma_ps;
  ps.q_ps = sigma_abs * a * c * t3 * temperature -
            sigma * sigma * emission * a * c * t3 * temperature / denom;
  return ps;
}

namespace {

std::string variant_name(CrookedPipeVariant v) {
  return v == CrookedPipeVariant::TwoRegion ? "two-region" : "five-region";
}

CrookedPipeVariant variant_from_name(const std::string& s) {
  if (s == "two-region") return CrookedPipeVariant::TwoRegion;
  if (s == "five-region") return CrookedPipeVariant::FiveRegion;
  throw UsageError("unknown problem variant '" + s + "'");
}

} // namespace

std::string problem_config_to_json(const ProblemConfig& cfg) {
  nlohmann::json j;
  j["variant"] = variant_name(cfg.variant);
  j["sigma_s"] = cfg.sigma_s;
  if (cfg.cdt)
    j["cdt"] = *cfg.cdt;
  else
    j["cdt"] = "no-absorption";
  j["eta"] = cfg.eta;
  j["quadrature_order"] = cfg.quadrature_order;
  j["dg_order"] = cfg.dg_order;
  j["refinement"] = cfg.refinement;
  return j.dump(2);
}

ProblemConfig problem_config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("problem config: invalid JSON: ") + e.what());
  }
  ProblemConfig cfg;
  try {
    if (j.contains("variant")) cfg.variant = variant_from_name(j["variant"].get<std::string>());
    if (j.contains("sigma_s")) cfg.sigma_s = j["sigma_s"].get<RegionSigmaMap>();
    if (j.contains("cdt")) {
      if (j["cdt"].is_string()) {
        const std::string s = j["cdt"].get<std::string>();
        if (s != "no-absorption") throw ParseError("problem config: cdt must be a number or 'no-absorption'");
        cfg.cdt.reset();
      } else {
        cfg.cdt = j["cdt"].get<double>();
      }
    }
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("quadrature_order")) cfg.quadrature_order = j["quadrature_order"].get<std::size_t>();
    if (j.contains("dg_order")) cfg.dg_order = j["dg_order"].get<std::size_t>();
    if (j.contains("refinement")) cfg.refinement = j["refinement"].get<std::size_t>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("problem config: ") + e.what());
  }
  return cfg;
}

ProblemSpec build_problem(const ProblemConfig& cfg) {
  return make_crooked_pipe(cfg.variant, cfg.sigma_s, cfg.cdt, cfg.refinement, cfg.eta);
}

} // namespace snkit
