// Command line front end: junction angle tables, energy evaluation,
// minimization runs, gamma-trend sweeps, and pointwise curvature.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracluster/fracluster.hpp"

namespace {

using namespace fracluster;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_s_values(double s_single, const std::string& s_list,
                                   const std::string& s_range) {
  std::vector<double> out;
  if (!s_list.empty()) {
    std::stringstream ss(s_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  } else if (!s_range.empty()) {
    double lo = 0.0, hi = 0.0;
    int count = 0;
    if (std::sscanf(s_range.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 2)
      throw std::invalid_argument("--s-range expects lo:hi:count with count >= 2");
    for (int i = 0; i < count; ++i)
      out.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  } else {
    out.push_back(s_single);
  }
  for (double s : out)
    if (!(s > 0.01 && s < 0.996))
      throw std::invalid_argument("s values must lie in (0.01, 0.996)");
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::fwrite(text.data(), 1, text.size(), stdout);
  else
    atomic_write_file(out_path, text);
}

int run_cone_angles(const std::vector<double>& weights, double s_single,
                    const std::string& s_list, const std::string& s_range,
                    const std::string& out_path) {
  std::vector<double> svals = parse_s_values(s_single, s_list, s_range);
  std::string csv = "s,c1,c2,c3,alpha1,alpha2,alpha3,res12,res23,res31\n";
  for (double s : svals) {
    ConeAngles sol = solve_cone_angles(weights, s);
    csv += g17(s);
    for (double c : weights) csv += "," + g17(c);
    for (double a : sol.alpha) csv += "," + g17(a);
    csv += "," + g17(cone_residual(weights, sol.alpha, s, 0, 1));
    csv += "," + g17(cone_residual(weights, sol.alpha, s, 1, 2));
    csv += "," + g17(cone_residual(weights, sol.alpha, s, 2, 0));
    csv += "\n";
  }
  emit(csv, out_path);
  return 0;
}

int run_classical(const std::vector<double>& weights, const std::string& out_path) {
  std::array<double, 3> alpha = classical_angles({weights[0], weights[1], weights[2]});
  std::string csv = "c1,c2,c3,alpha1,alpha2,alpha3\n";
  for (double c : weights) csv += (csv.back() == '\n' ? "" : ",") + g17(c);
  for (double a : alpha) csv += "," + g17(a);
  csv += "\n";
  emit(csv, out_path);
  return 0;
}

json junction_json(const Grid& grid, const ProblemConfig& cfg, const JunctionReport& jr) {
  json out;
  out["found"] = jr.found;
  if (!jr.found) return out;
  out["location"] = {jr.location.x, jr.location.y};
  json rays = json::array();
  for (const auto& r : jr.rays)
    rays.push_back({{"angle", r.angle},
                    {"phases", {r.p, r.q}},
                    {"points", r.points},
                    {"rms", r.rms}});
  out["rays"] = rays;
  out["phase_angles"] = jr.phase_angles;
  out["grid_h"] = grid.h;

  ConeAngles pred = solve_cone_angles(cfg.weights, cfg.s);
  out["predicted_angles"] = pred.alpha;
  out["balanced_value"] = pred.k;
  json residuals = json::array();
  int k = static_cast<int>(cfg.weights.size());
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      if (static_cast<std::size_t>(i) >= jr.phase_angles.size() ||
          static_cast<std::size_t>(j) >= jr.phase_angles.size())
        continue;
      double ai = jr.phase_angles[static_cast<std::size_t>(i)];
      double aj = jr.phase_angles[static_cast<std::size_t>(j)];
      if (ai <= 0.0 || aj <= 0.0 || ai >= two_pi || aj >= two_pi) continue;
      double res = cfg.weights[static_cast<std::size_t>(i)] * wedge_potential(pi - ai, cfg.s) -
                   cfg.weights[static_cast<std::size_t>(j)] * wedge_potential(pi - aj, cfg.s);
      residuals.push_back({{"phases", {i, j}}, {"value", res}, {"relative", res / pred.k}});
    }
  out["balance_residuals"] = residuals;
  return out;
}

int run_minimize(const std::string& config_path, const std::string& prefix) {
  ProblemConfig cfg = load_config_file(config_path);
  Grid grid = build_grid(cfg.box, cfg.n, cfg.omega);
  std::vector<std::uint8_t> datum_labels = rasterize_datum(grid, cfg.datum);
  InteractionMatrix mat =
      matrix_for_problem(grid, cfg.datum, cfg.numerics, problem_key(cfg));
  EnergyModel model(grid, mat, cfg.weights);

  MinimizeResult res = minimize_labels(grid, model, datum_labels, cfg.minimize);
  JunctionReport jr = measure_junction(grid, res.labels);

  json report;
  report["config"] = resolved_config(cfg);
  report["energy"] = res.energy;
  report["datum_energy"] = model.total(datum_labels);
  report["tail_energy_bound"] = model.tail_energy_bound();
  report["phase_perimeters"] = model.phase_perimeters(res.labels);
  report["best_restart"] = res.best_restart;
  report["restart_energies"] = res.restart_energies;
  report["restart_sweeps"] = res.restart_sweeps;
  report["junction"] = junction_json(grid, cfg, jr);

  write_labels_pgm(prefix + "_labels.pgm", grid, res.labels,
                   {"fracluster labels", "phases " + std::to_string(cfg.datum.phase_count()),
                    "energy " + g17(res.energy)});
  atomic_write_file(prefix + "_report.json", report.dump(2) + "\n");

  std::printf("energy %.17g (datum %.17g), best restart %d of %d\n", res.energy,
              model.total(datum_labels), res.best_restart, cfg.minimize.restarts);
  if (jr.found) {
    std::printf("junction at (%.6g, %.6g), phase angles:", jr.location.x, jr.location.y);
    for (double a : jr.phase_angles) std::printf(" %.6g", a);
    std::printf("\n");
  } else {
    std::printf("no triple junction detected\n");
  }
  std::printf("wrote %s_labels.pgm and %s_report.json\n", prefix.c_str(), prefix.c_str());
  return 0;
}

int run_energy(const std::string& config_path, const std::string& labels_path) {
  ProblemConfig cfg = load_config_file(config_path);
  Grid grid = build_grid(cfg.box, cfg.n, cfg.omega);
  std::vector<std::uint8_t> lab = rasterize_datum(grid, cfg.datum);
  if (!labels_path.empty()) lab = labels_from_pgm(read_pgm(labels_path), grid);
  for (std::uint8_t v : lab)
    if (v >= cfg.datum.phase_count()) throw std::invalid_argument("label out of range in PGM");
  InteractionMatrix mat =
      matrix_for_problem(grid, cfg.datum, cfg.numerics, problem_key(cfg));
  EnergyModel model(grid, mat, cfg.weights);
  json out;
  out["energy"] = model.total(lab);
  out["phase_perimeters"] = model.phase_perimeters(lab);
  out["tail_energy_bound"] = model.tail_energy_bound();
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

int run_gamma_sweep(const std::string& config_path, const std::string& s_list,
                    const std::string& s_range, const std::string& out_path) {
  ProblemConfig cfg = load_config_file(config_path);
  std::vector<double> svals = parse_s_values(cfg.s, s_list, s_range);
  Grid grid = build_grid(cfg.box, cfg.n, cfg.omega);
  std::vector<std::uint8_t> lab = rasterize_datum(grid, cfg.datum);
  int k = cfg.datum.phase_count();

  std::string csv = "s,energy";
  for (int j = 0; j < k; ++j) csv += ",per" + std::to_string(j + 1);
  for (int j = 0; j < k; ++j) csv += ",scaled" + std::to_string(j + 1);
  csv += "\n";
  for (double s : svals) {
    ProblemConfig c2 = cfg;
    c2.s = s;
    c2.numerics.s = s;
    InteractionMatrix mat =
        matrix_for_problem(grid, c2.datum, c2.numerics, problem_key(c2));
    EnergyModel model(grid, mat, c2.weights);
    std::vector<double> per = model.phase_perimeters(lab);
    csv += g17(s) + "," + g17(model.total(lab));
    for (double p : per) csv += "," + g17(p);
    for (double p : per) csv += "," + g17((1.0 - s) * p);
    csv += "\n";
  }
  emit(csv, out_path);
  return 0;
}

int run_curvature(const std::string& shape, double opening, double offset,
                  std::vector<double> point, double s) {
  AnalyticRegion region = HalfPlane({0.0, 1.0}, offset);
  Vec2 x{0.0, offset};
  if (shape == "sector") {
    if (!(opening > 0.0 && opening < two_pi))
      throw std::invalid_argument("--opening must lie in (0, 2 pi)");
    region = Sector({0.0, 0.0}, 0.0, opening);
    x = {1.0, 0.0};
  } else if (shape != "half_plane") {
    throw std::invalid_argument("--shape must be sector or half_plane");
  }
  if (point.size() == 2) x = {point[0], point[1]};
  CurvatureResult r = fractional_curvature(region, x, s);
  json out;
  out["value"] = r.value;
  out["ladder"] = r.ladder;
  out["extrapolated"] = r.extrapolated;
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted nonlocal cluster energies on a grid"};
  app.require_subcommand(1);

  std::vector<double> weights;
  double s_single = 0.5;
  std::string s_list, s_range, out_path, config_path, prefix, labels_path;
  std::string shape = "sector";
  double opening = 2.0 * fracluster::pi / 3.0, offset = 0.0;
  std::vector<double> point;

  CLI::App* cone = app.add_subcommand("cone-angles", "balanced junction angles for three weights");
  cone->add_option("--weights", weights, "three positive phase weights")->required()->expected(3);
  cone->add_option("--s", s_single, "kernel order in (0.01, 0.996)");
  cone->add_option("--s-list", s_list, "comma separated s values");
  cone->add_option("--s-range", s_range, "lo:hi:count sweep");
  cone->add_option("--out", out_path, "write CSV here instead of stdout");

  CLI::App* classical = app.add_subcommand("classical-angles", "s -> 1 limit junction angles");
  classical->add_option("--weights", weights, "three positive phase weights")
      ->required()
      ->expected(3);
  classical->add_option("--out", out_path, "write CSV here instead of stdout");

  CLI::App* minimize = app.add_subcommand("minimize", "descend the energy from a config");
  minimize->add_option("--config", config_path, "JSON problem description")
      ->required()
      ->check(CLI::ExistingFile);
  minimize->add_option("--out-prefix", prefix, "output prefix for labels.pgm / report.json")
      ->required();

  CLI::App* energy = app.add_subcommand("energy", "evaluate the energy of a label field");
  energy->add_option("--config", config_path, "JSON problem description")
      ->required()
      ->check(CLI::ExistingFile);
  energy->add_option("--labels", labels_path, "PGM label field (default: rasterized datum)")
      ->check(CLI::ExistingFile);

  CLI::App* gamma = app.add_subcommand("gamma-sweep", "datum energy across s values");
  gamma->add_option("--config", config_path, "JSON problem description")
      ->required()
      ->check(CLI::ExistingFile);
  gamma->add_option("--s-list", s_list, "comma separated s values");
  gamma->add_option("--s-range", s_range, "lo:hi:count sweep");
  gamma->add_option("--out", out_path, "write CSV here instead of stdout");

  CLI::App* curv = app.add_subcommand("curvature", "pointwise curvature of an analytic region");
  curv->add_option("--shape", shape, "sector or half_plane");
  curv->add_option("--opening", opening, "sector opening angle");
  curv->add_option("--offset", offset, "half-plane boundary offset");
  curv->add_option("--point", point, "evaluation point on the boundary")->expected(2);
  curv->add_option("--s", s_single, "kernel order in (0.01, 0.996)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cone->parsed()) return run_cone_angles(weights, s_single, s_list, s_range, out_path);
    if (classical->parsed()) return run_classical(weights, out_path);
    if (minimize->parsed()) return run_minimize(config_path, prefix);
    if (energy->parsed()) return run_energy(config_path, labels_path);
    if (gamma->parsed()) return run_gamma_sweep(config_path, s_list, s_range, out_path);
    if (curv->parsed()) return run_curvature(shape, opening, offset, point, s_single);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
