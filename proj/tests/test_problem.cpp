#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "snkit/errors.hpp"
#include "snkit/problem.hpp"

using namespace snkit;

TEST_CASE("tiny map assigns first-appearance ids") {
  const auto [mesh, mat] = load_material_map_text("AA\nAB");
  CHECK(mesh.nx == 2);
  CHECK(mesh.ny == 2);
  CHECK(mat.material_id == std::vector<int>{0, 0, 0, 1});
}

TEST_CASE("map parse errors carry position information") {
  try {
    load_material_map_text("AAA\nAA");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_material_map_text(""), ParseError);
  try {
    load_material_map_text("AX", crooked_pipe_legend_json());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'A'") != std::string::npos);
    CHECK(msg.find("column 1") != std::string::npos);
  }
}

TEST_CASE("bundled crooked pipe map has the recorded region census") {
  const auto [mesh, mat] = load_material_map_text(crooked_pipe_map_text(),
                                                  crooked_pipe_legend_json());
  CHECK(mesh.nx == 28);
  CHECK(mesh.ny == 14);
  CHECK(mesh.hx == 0.5);
  CHECK(mesh.hy == 0.5);
  REQUIRE(mat.region_names ==
          std::vector<std::string>{"pipe", "wall", "edge", "block"});
  std::array<int, 4> counts{0, 0, 0, 0};
  for (const int id : mat.material_id) ++counts[static_cast<std::size_t>(id)];
  CHECK(counts[0] == 68);   // pipe
  CHECK(counts[1] == 218);  // wall
  CHECK(counts[2] == 76);   // edge
  CHECK(counts[3] == 30);   // block
}

TEST_CASE("two-region preset reproduces the reference coefficients") {
  const ProblemSpec spec = make_crooked_pipe(CrookedPipeVariant::TwoRegion,
                                             {{"pipe", 0.2}, {"out", 200.0}}, 1000.0);
  bool saw_outside = false;
  for (std::size_t e = 0; e < spec.mesh.n_elements(); ++e) {
    if (spec.materials.material_id[e] != 0) {
      CHECK(spec.field.sigma_t[e] == doctest::Approx(200.001).epsilon(1e-15));
      saw_outside = true;
    } else {
      CHECK(spec.field.sigma_t[e] == doctest::Approx(0.201).epsilon(1e-15));
    }
  }
  CHECK(saw_outside);
}

TEST_CASE("five-region problem 1 coefficients") {
  const RegionSigmaMap p1 = five_region_problem(1);
  CHECK(p1.at("pipe") == 1e-3);
  CHECK(p1.at("wall") == 500.0);
  CHECK(p1.at("edge") == 1e-4);
  CHECK(p1.at("block") == 100.0);
  CHECK_THROWS_AS(five_region_problem(0), UsageError);
}

TEST_CASE("coefficient field invariants hold for every preset") {
  for (int pr = 1; pr <= 5; ++pr) {
    const ProblemSpec spec =
        make_crooked_pipe(CrookedPipeVariant::FiveRegion, five_region_problem(pr), 1000.0);
    for (std::size_t e = 0; e < spec.mesh.n_elements(); ++e) {
      CHECK(std::abs(spec.field.sigma_t[e] - spec.field.sigma_s[e] - spec.field.sigma_a[e]) <=
            1e-12 * std::max(1.0, spec.field.sigma_t[e]));
      CHECK(spec.field.sigma_s[e] >= 0.0);
      CHECK(spec.field.sigma_s[e] <= spec.field.sigma_t[e]);
    }
  }
}

TEST_CASE("zero-absorption variant gives sigma_t == sigma_s") {
  const ProblemSpec spec = make_crooked_pipe(CrookedPipeVariant::TwoRegion,
                                             {{"pipe", 0.0}, {"out", 200.0}}, std::nullopt);
  CHECK(spec.field.sigma_t == spec.field.sigma_s);
}

TEST_CASE("all-equal regions reduce to a homogeneous problem") {
  const ProblemSpec spec = make_crooked_pipe(
      CrookedPipeVariant::FiveRegion,
      {{"pipe", 3.0}, {"wall", 3.0}, {"edge", 3.0}, {"block", 3.0}}, 10.0);
  for (const double s : spec.field.sigma_s) CHECK(s == 3.0);
  for (const double t : spec.field.sigma_t) CHECK(t == doctest::Approx(3.1).epsilon(1e-15));
}

TEST_CASE("negative coefficients and bad keys are rejected") {
  CHECK_THROWS_AS(
      make_crooked_pipe(CrookedPipeVariant::TwoRegion, {{"pipe", -1.0}, {"out", 1.0}}, 1.0),
      UsageError);
  CHECK_THROWS_AS(make_crooked_pipe(CrookedPipeVariant::TwoRegion, {{"pipe", 1.0}}, 1.0),
                  UsageError);
}

TEST_CASE("inlet source sits on the left-boundary pipe faces") {
  const ProblemSpec spec = make_crooked_pipe(CrookedPipeVariant::TwoRegion,
                                             {{"pipe", 0.2}, {"out", 200.0}}, 1000.0);
  std::size_t inlet_faces = 0;
  for (std::size_t j = 0; j < spec.mesh.ny; ++j) {
    if (spec.bc.psi_inc_left[j] == 1e4) {
      ++inlet_faces;
      CHECK(spec.materials.material_id[spec.mesh.element_id(0, j)] == 0);
    } else {
      CHECK(spec.bc.psi_inc_left[j] == 1.0);
    }
  }
  CHECK(inlet_faces == 2);
  for (const double v : spec.bc.psi_inc_right) CHECK(v == 1.0);
  for (const double v : spec.bc.q) CHECK(v == 0.0);
}

TEST_CASE("refinement preserves geometry and coefficients") {
  const ProblemSpec base = make_crooked_pipe(CrookedPipeVariant::TwoRegion,
                                             {{"pipe", 0.2}, {"out", 200.0}}, 1000.0);
  const ProblemSpec fine = make_crooked_pipe(CrookedPipeVariant::TwoRegion,
                                             {{"pipe", 0.2}, {"out", 200.0}}, 1000.0, 2);
  CHECK(fine.mesh.nx == 2 * base.mesh.nx);
  CHECK(fine.mesh.hx == base.mesh.hx / 2.0);
  for (std::size_t j = 0; j < fine.mesh.ny; ++j)
    for (std::size_t i = 0; i < fine.mesh.nx; ++i)
      CHECK(fine.materials.material_id[fine.mesh.element_id(i, j)] ==
            base.materials.material_id[base.mesh.element_id(i / 2, j / 2)]);
  std::size_t base_inlet = 0, fine_inlet = 0;
  for (const double v : base.bc.psi_inc_left) base_inlet += v == 1e4;
  for (const double v : fine.bc.psi_inc_left) fine_inlet += v == 1e4;
  CHECK(fine_inlet == 2 * base_inlet);
}

TEST_CASE("thick partition membership, degeneracy and monotonicity") {
  const ProblemSpec p2 =
      make_crooked_pipe(CrookedPipeVariant::FiveRegion, five_region_problem(2), 1000.0);

  const ThickPartition part = partition_thick(p2.field, 1.0);
  // Problem 2: {pipe 0.1, wall 200, edge 200, block 5}; eta 1 keeps exactly
  // the wall, edge and block elements.
  for (const std::size_t e : part.thick_elements)
    CHECK(p2.materials.material_id[e] != 0);
  for (const std::size_t e : part.thin_elements)
    CHECK(p2.materials.material_id[e] == 0);
  CHECK(part.thick_elements.size() + part.thin_elements.size() == p2.mesh.n_elements());
  CHECK(part.thick_element_fraction ==
        doctest::Approx(324.0 / 392.0).epsilon(1e-15));

  const ThickPartition all = partition_thick(p2.field, 0.0);
  CHECK(all.thick_elements.size() == p2.mesh.n_elements());
  const ThickPartition none = partition_thick(p2.field, std::numeric_limits<double>::infinity());
  CHECK(none.thick_elements.empty());

  // Monotone in eta: larger eta gives a subset.
  const ThickPartition loose = partition_thick(p2.field, 0.05);
  const ThickPartition tight = partition_thick(p2.field, 150.0);
  CHECK(std::includes(loose.thick_elements.begin(), loose.thick_elements.end(),
                      tight.thick_elements.begin(), tight.thick_elements.end()));

  const ThickPartition dofs = partition_thick(p2.field, 1.0, 9);
  CHECK(dofs.thick_dofs.size() == 9 * part.thick_elements.size());
}

TEST_CASE("pseudo-scattering limits for all four material rows") {
  const struct {
    const char* name;
    double sigma, cv;
  } rows[] = {{"gold", 1e3, 1e5}, {"helium", 1e-3, 1e-2}, {"ch", 1e2, 1e3}, {"hydrogen", 1.0, 1.0}};
  const double temperature = 0.4;
  for (const auto& row : rows) {
    CAPTURE(row.name);
    const PseudoScattering big = pseudo_scattering(row.sigma, row.cv, temperature, 1e12);
    CHECK(std::abs(big.sigma_ps - row.sigma) / row.sigma < 1e-6);
    const PseudoScattering small = pseudo_scattering(row.sigma, row.cv, temperature, 1e-12);
    CHECK(std::abs(small.sigma_ps) / row.sigma < 1e-6);
  }
}

TEST_CASE("pseudo-scattering gold regression against a high-precision evaluation") {
  const PseudoScattering ps = pseudo_scattering(1e3, 1e5, 0.4, 1e-3);
  CHECK(ps.sigma_ps == doctest::Approx(992.49912007998030561).epsilon(1e-12));
  CHECK(ps.q_ps == doctest::Approx(-103715462.40784914539).epsilon(1e-12));
  CHECK_THROWS_AS(pseudo_scattering(0.0, 1.0, 1.0, 1.0), UsageError);
  CHECK_THROWS_AS(pseudo_scattering(1.0, 1.0, -0.5, 1.0), UsageError);
}

TEST_CASE("problem config JSON round trip") {
  ProblemConfig cfg;
  cfg.variant = CrookedPipeVariant::FiveRegion;
  cfg.sigma_s = five_region_problem(3);
  cfg.cdt.reset();
  cfg.eta = 2.5;
  cfg.quadrature_order = 4;
  cfg.dg_order = 1;
  cfg.refinement = 2;
  const ProblemConfig back = problem_config_from_json(problem_config_to_json(cfg));
  CHECK(back.variant == cfg.variant);
  CHECK(back.sigma_s == cfg.sigma_s);
  CHECK(back.cdt == cfg.cdt);
  CHECK(back.eta == cfg.eta);
  CHECK(back.quadrature_order == cfg.quadrature_order);
  CHECK(back.dg_order == cfg.dg_order);
  CHECK(back.refinement == cfg.refinement);

  const ProblemSpec spec = build_problem(back);
  CHECK(spec.mesh.nx == 56);
  CHECK_THROWS_AS(problem_config_from_json("{not json"), ParseError);
}
