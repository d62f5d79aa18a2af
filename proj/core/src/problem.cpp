// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/problem.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gpamr {

using nlohmann::json;

namespace {

bool divides(double part, double whole) {
  if (part <= 0) return false;
  const double q = whole / part;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

json bars_to_json(std::span<const BarComponent> bars) {
  json arr = json::array();
  for (const auto& b : bars) {
    arr.push_back({{"p0", {b.p0.x(), b.p0.y()}},
                   {"p1", {b.p1.x(), b.p1.y()}},
                   {"width", b.width},
                   {"alpha", b.alpha}});
  }
  return arr;
}

std::vector<BarComponent> bars_from_json(const json& arr) {
  std::vector<BarComponent> bars;
  for (const auto& b : arr) {
    bars.emplace_back(Vec2(b.at("p0").at(0), b.at("p0").at(1)),
                      Vec2(b.at("p1").at(0), b.at("p1").at(1)),
                      b.at("width").get<double>(), b.at("alpha").get<double>());
  }
  return bars;
}

// Crossed diagonal bars over each cell of an nx-by-ny tiling of the given
// rectangle; the usual seeding pattern for bar-based designs.
void add_crossed_bars(std::vector<BarComponent>& bars, const Vec2& lo, const Vec2& hi,
                      int nx, int ny, double width, double alpha) {
  const double dx = (hi.x() - lo.x()) / nx;
  const double dy = (hi.y() - lo.y()) / ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 a(lo.x() + i * dx, lo.y() + j * dy);
      const Vec2 b(lo.x() + (i + 1) * dx, lo.y() + (j + 1) * dy);
      bars.emplace_back(a, b, width, alpha);
      bars.emplace_back(Vec2(a.x(), b.y()), Vec2(b.x(), a.y()), width, alpha);
    }
  }
}

}  // namespace

bool ProblemConfig::inside_domain(const Vec2& p) const {
  if (!envelope.lshape) return true;
  return !(p.x() > envelope.len_x - envelope.cut_x &&
           p.y() > envelope.len_y - envelope.cut_y);
}

void ProblemConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (envelope.len_x <= 0 || envelope.len_y <= 0) fail("envelope extents must be positive");
  if (!divides(amr.coarse_size, envelope.len_x) || !divides(amr.coarse_size, envelope.len_y))
    fail("coarse_size must divide the envelope extents");
  if (envelope.lshape) {
    if (envelope.cut_x <= 0 || envelope.cut_y <= 0 || envelope.cut_x >= envelope.len_x ||
        envelope.cut_y >= envelope.len_y)
      fail("lbracket cut must be positive and smaller than the envelope");
    if (!divides(amr.coarse_size, envelope.cut_x) || !divides(amr.coarse_size, envelope.cut_y))
      fail("lbracket cut must be aligned with the coarse grid");
  }
  if (amr.levels < 0) fail("amr levels must be non-negative");
  if (!(amr.rho_th > 0 && amr.rho_th < 1)) fail("amr threshold must lie in (0,1)");
  if (amr.band_factor < 1) fail("amr band_factor must be >= 1");
  if (!(optimizer.move_limit > 0 && optimizer.move_limit <= 1))
    fail("move_limit must lie in (0,1]");
  if (optimizer.max_iterations < 1) fail("max_iterations must be positive");
  if (kind == ProblemKind::compliance && !(volume_limit > 0 && volume_limit <= 1))
    fail("compliance problems need a volume_limit in (0,1]");
  if (kind == ProblemKind::stress && !(stress.limit > 0))
    fail("stress problems need a positive stress limit");
  if (bars.empty()) fail("at least one bar component is required");
  if (!(width.min > 0 && width.max > width.min)) fail("width bounds must satisfy 0 < min < max");
  if (supports.empty()) fail("at least one support is required");
  if (point_loads.empty() && tractions.empty()) fail("at least one load is required");
  if (solver != "direct" && solver != "cg") fail("solver must be 'direct' or 'cg'");
  if (output.vtk_every < 1) fail("vtk_every must be >= 1");
  if (!(projection.simp_power >= 1)) fail("simp_power must be >= 1");
  if (!(projection.ks_k > 0)) fail("ks_aggregation must be positive");
  if (!(projection.rho_min > 0 && projection.rho_min < 1)) fail("rho_min must lie in (0,1)");
}

ProblemConfig mbb_preset() {
  ProblemConfig c;
  c.kind = ProblemKind::compliance;
  c.name = "mbb";
  c.envelope = {20.0, 5.0, false, 0.0, 0.0};
  c.material = {1e5, 0.3, true};
  c.projection = {0.0, 3.0, 10.0, 1e-4};
  c.amr = {0.25, 2, 0.9, 2.0};
  c.optimizer = {0.05, 10.0, 300, 5e-3};
  c.volume_limit = 0.3;
  c.width = {0.2, 2.0};
  add_crossed_bars(c.bars, {0.0, 0.0}, {20.0, 5.0}, 4, 2, 0.5, 0.5);
  c.supports.push_back({{0.0, 0.0}, {0.0, 5.0}, true, false, {0.0, 0.0}});    // symmetry rollers
  c.supports.push_back({{20.0, 0.0}, {20.0, 0.0}, false, true, {0.0, 0.0}});  // bottom-right support
  c.point_loads.push_back({{0.0, 5.0}, {0.0, -10.0}});
  c.output.directory = "out_mbb";
  return c;
}

ProblemConfig lbracket_preset() {
  ProblemConfig c;
  c.kind = ProblemKind::stress;
  c.name = "lbracket";
  c.envelope = {100.0, 100.0, true, 60.0, 60.0};
  c.material = {1e5, 0.3, true};
  c.projection = {0.0, 3.0, 10.0, 1e-4};
  c.amr = {2.0, 1, 0.9, 2.0};
  c.optimizer = {0.015, 10.0, 400, 5e-3};
  c.stress = {2.4, 30.0, 0.5};
  c.width = {2.0, 12.0};
  // Crossed bars along both legs of the bracket.
  add_crossed_bars(c.bars, {0.0, 60.0}, {40.0, 100.0}, 1, 1, 6.0, 0.5);
  add_crossed_bars(c.bars, {0.0, 30.0}, {40.0, 70.0}, 1, 1, 6.0, 0.5);
  add_crossed_bars(c.bars, {0.0, 0.0}, {40.0, 40.0}, 1, 1, 6.0, 0.5);
  add_crossed_bars(c.bars, {30.0, 0.0}, {70.0, 40.0}, 1, 1, 6.0, 0.5);
  add_crossed_bars(c.bars, {60.0, 0.0}, {100.0, 40.0}, 1, 1, 6.0, 0.5);
  c.supports.push_back({{0.0, 100.0}, {40.0, 100.0}, true, true, {0.0, 0.0}});  // clamped top edge
  c.tractions.push_back({{100.0, 34.0}, {100.0, 40.0}, {0.0, -0.5}});           // F = 3 total
  c.frozen_fine.push_back({98.0, 32.0, 100.0, 42.0});
  c.output.directory = "out_lbracket";
  return c;
}

std::string to_json_string(const ProblemConfig& c) {
  json j;
  j["problem"] = c.kind == ProblemKind::compliance ? "compliance" : "stress";
  j["name"] = c.name;
  if (c.envelope.lshape) {
    j["envelope"] = {{"type", "lbracket"},
                     {"size", {c.envelope.len_x, c.envelope.len_y}},
                     {"cut", {c.envelope.cut_x, c.envelope.cut_y}}};
  } else {
    j["envelope"] = {{"type", "rectangle"}, {"size", {c.envelope.len_x, c.envelope.len_y}}};
  }
  j["material"] = {{"youngs_modulus", c.material.youngs_modulus},
                   {"poisson_ratio", c.material.poisson_ratio},
                   {"formulation", c.material.plane_stress ? "plane_stress" : "plane_strain"}};
  j["projection"] = {{"simp_power", c.projection.simp_power},
                     {"ks_aggregation", c.projection.ks_k},
                     {"rho_min", c.projection.rho_min}};
  j["amr"] = {{"coarse_size", c.amr.coarse_size},
              {"levels", c.amr.levels},
              {"threshold", c.amr.rho_th},
              {"band_factor", c.amr.band_factor}};
  j["optimizer"] = {{"move_limit", c.optimizer.move_limit},
                    {"constraint_penalty", c.optimizer.constraint_penalty},
                    {"max_iterations", c.optimizer.max_iterations},
                    {"convergence_tol", c.optimizer.convergence_tol}};
  if (c.kind == ProblemKind::compliance) j["volume_limit"] = c.volume_limit;
  if (c.kind == ProblemKind::stress)
    j["stress"] = {{"limit", c.stress.limit},
                   {"ks_aggregation", c.stress.ks_k},
                   {"relaxation_exponent", c.stress.relax_exponent}};
  j["bounds"] = {{"width", {c.width.min, c.width.max}}};
  j["bars"] = bars_to_json(c.bars);
  json sup = json::array();
  for (const auto& s : c.supports) {
    std::string fix = s.fix_x && s.fix_y ? "xy" : (s.fix_x ? "x" : "y");
    sup.push_back({{"region", {s.lo.x(), s.lo.y(), s.hi.x(), s.hi.y()}},
                   {"fix", fix},
                   {"value", {s.value.x(), s.value.y()}}});
  }
  j["supports"] = sup;
  json pls = json::array();
  for (const auto& p : c.point_loads)
    pls.push_back({{"at", {p.at.x(), p.at.y()}}, {"force", {p.force.x(), p.force.y()}}});
  j["point_loads"] = pls;
  json trs = json::array();
  for (const auto& t : c.tractions)
    trs.push_back({{"region", {t.lo.x(), t.lo.y(), t.hi.x(), t.hi.y()}},
                   {"traction", {t.traction.x(), t.traction.y()}}});
  j["tractions"] = trs;
  json fr = json::array();
  for (const auto& r : c.frozen_fine) fr.push_back({r[0], r[1], r[2], r[3]});
  j["frozen_fine"] = fr;
  j["solver"] = c.solver;
  j["output"] = {{"directory", c.output.directory}, {"vtk_every", c.output.vtk_every}};
  return j.dump(2);
}

ProblemConfig config_from_json_string(const std::string& text) {
  const json j = json::parse(text);
  ProblemConfig c;
  const std::string kind = j.at("problem").get<std::string>();
  if (kind == "compliance") c.kind = ProblemKind::compliance;
  else if (kind == "stress") c.kind = ProblemKind::stress;
  else throw std::invalid_argument("config: unknown problem kind '" + kind + "'");
  c.name = j.value("name", "problem");

  const json& env = j.at("envelope");
  const std::string etype = env.at("type").get<std::string>();
  c.envelope.len_x = env.at("size").at(0);
  c.envelope.len_y = env.at("size").at(1);
  if (etype == "lbracket") {
    c.envelope.lshape = true;
    c.envelope.cut_x = env.at("cut").at(0);
    c.envelope.cut_y = env.at("cut").at(1);
  } else if (etype != "rectangle") {
    throw std::invalid_argument("config: unknown envelope type '" + etype + "'");
  }

  if (j.contains("material")) {
    const json& m = j["material"];
    c.material.youngs_modulus = m.value("youngs_modulus", c.material.youngs_modulus);
    c.material.poisson_ratio = m.value("poisson_ratio", c.material.poisson_ratio);
    c.material.plane_stress = m.value("formulation", "plane_stress") == "plane_stress";
  }
  if (j.contains("projection")) {
    const json& p = j["projection"];
    c.projection.simp_power = p.value("simp_power", c.projection.simp_power);
    c.projection.ks_k = p.value("ks_aggregation", c.projection.ks_k);
    c.projection.rho_min = p.value("rho_min", c.projection.rho_min);
  }
  const json& a = j.at("amr");
  c.amr.coarse_size = a.at("coarse_size");
  c.amr.levels = a.at("levels");
  c.amr.rho_th = a.value("threshold", c.amr.rho_th);
  c.amr.band_factor = a.value("band_factor", c.amr.band_factor);
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    c.optimizer.move_limit = o.value("move_limit", c.optimizer.move_limit);
    c.optimizer.constraint_penalty =
        o.value("constraint_penalty", c.optimizer.constraint_penalty);
    c.optimizer.max_iterations = o.value("max_iterations", c.optimizer.max_iterations);
    c.optimizer.convergence_tol = o.value("convergence_tol", c.optimizer.convergence_tol);
  }
  if (j.contains("volume_limit")) c.volume_limit = j["volume_limit"];
  if (j.contains("stress")) {
    const json& s = j["stress"];
    c.stress.limit = s.value("limit", c.stress.limit);
    c.stress.ks_k = s.value("ks_aggregation", c.stress.ks_k);
    c.stress.relax_exponent = s.value("relaxation_exponent", c.stress.relax_exponent);
  }
  if (j.contains("bounds")) {
    c.width.min = j["bounds"].at("width").at(0);
    c.width.max = j["bounds"].at("width").at(1);
  }
  c.bars = bars_from_json(j.at("bars"));
  for (const auto& s : j.value("supports", json::array())) {
    DirichletRegion r;
    r.lo = Vec2(s.at("region").at(0), s.at("region").at(1));
    r.hi = Vec2(s.at("region").at(2), s.at("region").at(3));
    const std::string fix = s.at("fix").get<std::string>();
    r.fix_x = fix.find('x') != std::string::npos;
    r.fix_y = fix.find('y') != std::string::npos;
    if (s.contains("value")) r.value = Vec2(s["value"].at(0), s["value"].at(1));
    c.supports.push_back(r);
  }
  for (const auto& p : j.value("point_loads", json::array()))
    c.point_loads.push_back({Vec2(p.at("at").at(0), p.at("at").at(1)),
                             Vec2(p.at("force").at(0), p.at("force").at(1))});
  for (const auto& t : j.value("tractions", json::array()))
    c.tractions.push_back({Vec2(t.at("region").at(0), t.at("region").at(1)),
                           Vec2(t.at("region").at(2), t.at("region").at(3)),
                           Vec2(t.at("traction").at(0), t.at("traction").at(1))});
  for (const auto& f : j.value("frozen_fine", json::array()))
    c.frozen_fine.push_back({f.at(0), f.at(1), f.at(2), f.at(3)});
  c.solver = j.value("solver", "direct");
  if (j.contains("output")) {
    c.output.directory = j["output"].value("directory", c.output.directory);
    c.output.vtk_every = j["output"].value("vtk_every", c.output.vtk_every);
  }
  c.validate();
  return c;
}

ProblemConfig load_config(const std::string& name_or_path) {
  if (name_or_path == "mbb") return mbb_preset();
  if (name_or_path == "lbracket") return lbracket_preset();
  std::ifstream in(name_or_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + name_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_string(ss.str());
}

void save_config(const ProblemConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path.string());
  out << to_json_string(config) << '\n';
}

void save_design(std::span<const BarComponent> bars, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write design: " + path.string());
  json j;
  j["bars"] = bars_to_json(bars);
  out << j.dump(2) << '\n';
}

std::vector<BarComponent> load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open design file: " + path.string());
  const json j = json::parse(in);
  return bars_from_json(j.is_array() ? j : j.at("bars"));
}

uint64_t config_fingerprint(const ProblemConfig& config) {
  ProblemConfig c = config;
  c.output = OutputConfig{};
  return std::hash<std::string>{}(to_json_string(c));
}

}  // namespace gpamr
