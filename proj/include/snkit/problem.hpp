#ifndef SNKIT_PROBLEM_HPP
#define SNKIT_PROBLEM_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "snkit/sparse.hpp"

namespace snkit {

/// Uniform rectangular mesh. Element (i, j) has linear id j*nx + i; j counts
/// rows in material-map file order (first line of the map is row j = 0).
struct StructuredMesh {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double hx = 0.5;
  double hy = 0.5;
  double x0 = 0.0;
  double y0 = 0.0;

  std::size_t n_elements() const { return nx * ny; }
  std::size_t element_id(std::size_t i, std::size_t j) const { return j * nx + i; }
};

struct MaterialMap {
  std::vector<int> material_id;           // per element, dense ids 0..K-1
  std::vector<std::string> region_names;  // id -> label

  int n_materials() const { return static_cast<int>(region_names.size()); }
};

/// Per-element cross sections with sigma_t = sigma_s + sigma_a.
struct CoefficientField {
  Vector sigma_s;
  Vector sigma_t;
  Vector sigma_a;
};

/// Isotropic boundary/volume sources. The incident value on a boundary face
/// is used only for ordinates flowing into the domain through that face.
struct BoundarySource {
  Vector psi_inc_left;    // length ny
  Vector psi_inc_right;   // length ny
  Vector psi_inc_bottom;  // length nx
  Vector psi_inc_top;     // length nx
  Vector q;               // per element
};

struct ThickPartition {
  double eta = 0.0;
  std::vector<std::size_t> thick_elements;
  std::vector<std::size_t> thin_elements;
  std::vector<std::size_t> thick_dofs;  // all DOFs of thick elements, sorted
  double thick_element_fraction = 0.0;
};

struct ProblemSpec {
  StructuredMesh mesh;
  MaterialMap materials;
  CoefficientField field;
  BoundarySource bc;
  double eta = 1.0;
};

/// Parses an ASCII material grid. Lines are mesh rows (first line = j = 0);
/// every line must have the same length. With a legend, characters map to
/// the legend's material order; without one, ids follow first appearance in
/// reading order. legend_json may be empty.
std::pair<StructuredMesh, MaterialMap> load_material_map_text(const std::string& grid_text,
                                                              const std::string& legend_json = "");
std::pair<StructuredMesh, MaterialMap> load_material_map(const std::string& map_path,
                                                         const std::string& legend_path = "");

/// The bundled crooked-pipe geometry (28x14 cells of size 0.5x0.5): a pipe
/// two cells wide entering at the left, making two 90-degree bends, and
/// leaving at the right, surrounded by wall material, an edge band along the
/// domain boundary, and a dense block near the first bend.
const std::string& crooked_pipe_map_text();
const std::string& crooked_pipe_legend_json();

enum class CrookedPipeVariant { TwoRegion, FiveRegion };

/// Scattering cross sections per region. TwoRegion uses keys {"pipe", "out"};
/// FiveRegion uses {"pipe", "wall", "edge", "block"}.
using RegionSigmaMap = std::map<std::string, double>;

/// Builds a crooked-pipe benchmark problem: sigma_a = 1/cdt on every element
/// (or 0 when cdt is absent), sigma_t = sigma_s + sigma_a, ambient incident
/// field 1.0 on the whole boundary and an inlet source 1e4 on the left-edge
/// pipe faces. refinement r splits every map cell into r x r elements.
ProblemSpec make_crooked_pipe(CrookedPipeVariant variant, const RegionSigmaMap& sigma_s,
                              std::optional<double> cdt, std::size_t refinement = 1,
                              double eta = 1.0);

/// Region sigma_s values of the five bundled test problems (1-based index).
RegionSigmaMap five_region_problem(int number);

/// Elements with sigma_s >= eta are thick; all DOFs of a thick element are
/// thick. dofs_per_element is the DG block size ((p+1)^2 for order p).
ThickPartition partition_thick(const CoefficientField& field, double eta,
                               std::size_t dofs_per_element = 1);

struct PseudoScattering {
  double sigma_ps = 0.0;
  double q_ps = 0.0;
};

/// Pseudo-scattering linearization of grey thermal emission/absorption:
///   sigma_ps = sigma^2 16 pi a c T^3 / (Cv/dt + 16 pi sigma a c T^3)
///   q_ps     = sigma_a a c T^4 - sigma^2 16 pi a^2 c^2 T^7 / (Cv/dt + 16 pi sigma a c T^3)
/// with sigma_a = sigma - sigma_ps, c = 2.9979e4 and a = 137.199.
PseudoScattering pseudo_scattering(double sigma, double cv, double temperature, double dt);

/// Generator config consumed by the CLI; serializable to/from JSON.
struct ProblemConfig {
  CrookedPipeVariant variant = CrookedPipeVariant::TwoRegion;
  RegionSigmaMap sigma_s = {{"pipe", 0.2}, {"out", 200.0}};
  std::optional<double> cdt = 1000.0;  // nullopt: sigma_a = 0
  double eta = 1.0;
  std::size_t quadrature_order = 8;
  std::size_t dg_order = 2;
  std::size_t refinement = 1;
};

std::string problem_config_to_json(const ProblemConfig& cfg);
ProblemConfig problem_config_from_json(const std::string& json_text);
ProblemSpec build_problem(const ProblemConfig& cfg);

} // namespace snkit

#endif
