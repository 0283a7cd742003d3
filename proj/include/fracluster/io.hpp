#pragma once

// Config files, label images, and the interaction-matrix cache.
//
// Configs are strict JSON: unknown keys are errors, so a typo cannot
// silently fall back to a default. The full schema, with defaults:
//
//   {
//     "s": 0.5,                          // required, in (0.01, 0.996)
//     "weights": [1.0, 1.0, 1.0],        // required, one per phase
//     "box": {"lo": [-1,-1], "hi": [1,1]},
//     "n": 32,                           // cells across the box width
//     "omega": {"type": "all"}           // or {"type":"disk","center":[0,0],"radius":0.9}
//     "datum": {"type": "steiner"}       // or {"type":"half_plane","normal":[0,1],"offset":0}
//                                        // or {"type":"sectors","vertex":[0,0],"cuts":[...]}
//     "numerics": {"r_cut": 1e6, "quad_tol": 1e-6, "threads": 0},
//     "minimize": {"restarts": 8, "seed": 1, "max_sweeps": 200,
//                  "anneal": {"enabled": false, "t0": 0.5,
//                             "cooling": 0.92, "sweeps": 60}}
//   }
//
// Label fields are stored as binary PGM (P5), one byte per cell, top row
// of the image = top row of the grid, with grid metadata in # comments.
// All writes go through a temp file + rename so readers never observe a
// torn file.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracluster/core.hpp"
#include "fracluster/energy.hpp"
#include "fracluster/geometry.hpp"
#include "fracluster/minimizer.hpp"

namespace fracluster {

using json = nlohmann::json;

namespace detail {

inline void require_keys(const json& obj, const char* where,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok)
      throw std::invalid_argument(std::string(where) + ": unknown key \"" + item.key() + "\"");
  }
}

inline Vec2 parse_vec2(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument(std::string(where) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

struct ProblemConfig {
  double s = 0.5;
  std::vector<double> weights;
  Box box{{-1.0, -1.0}, {1.0, 1.0}};
  int n = 32;
  OmegaShape omega = WholePlane{};
  Datum datum;
  MatrixParams numerics;
  MinimizeOptions minimize;
};

inline ProblemConfig parse_config(const json& root) {
  detail::require_keys(root, "config",
                       {"s", "weights", "box", "n", "omega", "datum", "numerics", "minimize"});
  ProblemConfig c;
  if (!root.contains("s") || !root["s"].is_number())
    throw std::invalid_argument("config: \"s\" is required and must be a number");
  c.s = root["s"].get<double>();
  if (!(c.s > 0.01 && c.s < 0.996))
    throw std::invalid_argument("config: s must lie in (0.01, 0.996)");

  if (!root.contains("weights") || !root["weights"].is_array() || root["weights"].empty())
    throw std::invalid_argument("config: \"weights\" is required, one positive number per phase");
  for (const auto& w : root["weights"]) {
    if (!w.is_number() || !(w.get<double>() > 0.0))
      throw std::invalid_argument("config: weights must be positive numbers");
    c.weights.push_back(w.get<double>());
  }

  if (root.contains("box")) {
    detail::require_keys(root["box"], "config.box", {"lo", "hi"});
    c.box.lo = detail::parse_vec2(root["box"].at("lo"), "config.box.lo");
    c.box.hi = detail::parse_vec2(root["box"].at("hi"), "config.box.hi");
    if (!(c.box.lo.x < c.box.hi.x && c.box.lo.y < c.box.hi.y))
      throw std::invalid_argument("config.box: lo must be strictly below hi");
  }
  if (root.contains("n")) {
    if (!root["n"].is_number_integer())
      throw std::invalid_argument("config: n must be an integer");
    c.n = root["n"].get<int>();
    if (c.n < 4 || c.n > 512)
      throw std::invalid_argument("config: n must lie in [4, 512]");
  }

  if (root.contains("omega")) {
    const json& om = root["omega"];
    detail::require_keys(om, "config.omega", {"type", "center", "radius"});
    std::string type = om.at("type").get<std::string>();
    if (type == "all") {
      c.omega = WholePlane{};
    } else if (type == "disk") {
      Disk dsk;
      dsk.c = om.contains("center") ? detail::parse_vec2(om["center"], "config.omega.center")
                                    : c.box.center();
      if (!om.contains("radius") || !om["radius"].is_number())
        throw std::invalid_argument("config.omega: disk needs a numeric radius");
      dsk.r = om["radius"].get<double>();
      if (!(dsk.r > 0.0)) throw std::invalid_argument("config.omega: radius must be positive");
      c.omega = dsk;
    } else {
      throw std::invalid_argument("config.omega: type must be \"all\" or \"disk\"");
    }
  }

  if (!root.contains("datum")) throw std::invalid_argument("config: \"datum\" is required");
  {
    const json& dt = root["datum"];
    detail::require_keys(dt, "config.datum", {"type", "normal", "offset", "vertex", "cuts"});
    std::string type = dt.at("type").get<std::string>();
    if (type == "steiner") {
      c.datum = steiner_datum();
    } else if (type == "half_plane") {
      Vec2 nrm = dt.contains("normal") ? detail::parse_vec2(dt["normal"], "config.datum.normal")
                                       : Vec2{0.0, 1.0};
      double off = dt.contains("offset") ? dt["offset"].get<double>() : 0.0;
      c.datum = half_plane_datum(nrm, off);
    } else if (type == "sectors") {
      Vec2 v = dt.contains("vertex") ? detail::parse_vec2(dt["vertex"], "config.datum.vertex")
                                     : Vec2{0.0, 0.0};
      if (!dt.contains("cuts") || !dt["cuts"].is_array() || dt["cuts"].size() < 2)
        throw std::invalid_argument("config.datum: sectors need at least two cut angles");
      std::vector<double> cuts;
      for (const auto& a : dt["cuts"]) cuts.push_back(a.get<double>());
      Datum d;
      for (std::size_t i = 0; i < cuts.size(); ++i)
        d.regions.push_back(Sector(v, cuts[i], cuts[(i + 1) % cuts.size()]));
      c.datum = std::move(d);
    } else {
      throw std::invalid_argument(
          "config.datum: type must be \"steiner\", \"half_plane\" or \"sectors\"");
    }
  }
  if (static_cast<int>(c.weights.size()) != c.datum.phase_count())
    throw std::invalid_argument("config: weights count must match the datum phase count");

  if (root.contains("numerics")) {
    const json& nm = root["numerics"];
    detail::require_keys(nm, "config.numerics", {"r_cut", "quad_tol", "threads"});
    if (nm.contains("r_cut")) c.numerics.r_cut = nm["r_cut"].get<double>();
    if (nm.contains("quad_tol")) c.numerics.quad_tol = nm["quad_tol"].get<double>();
    if (nm.contains("threads")) c.numerics.threads = nm["threads"].get<int>();
    if (!(c.numerics.quad_tol > 0.0 && c.numerics.quad_tol <= 1e-2))
      throw std::invalid_argument("config.numerics: quad_tol must lie in (0, 1e-2]");
  }
  c.numerics.s = c.s;

  if (root.contains("minimize")) {
    const json& mn = root["minimize"];
    detail::require_keys(mn, "config.minimize", {"restarts", "seed", "max_sweeps", "anneal"});
    if (mn.contains("restarts")) c.minimize.restarts = mn["restarts"].get<int>();
    if (mn.contains("seed")) c.minimize.seed = mn["seed"].get<std::uint64_t>();
    if (mn.contains("max_sweeps")) c.minimize.max_sweeps = mn["max_sweeps"].get<int>();
    if (mn.contains("anneal")) {
      const json& an = mn["anneal"];
      detail::require_keys(an, "config.minimize.anneal", {"enabled", "t0", "cooling", "sweeps"});
      if (an.contains("enabled")) c.minimize.anneal.enabled = an["enabled"].get<bool>();
      if (an.contains("t0")) c.minimize.anneal.t0 = an["t0"].get<double>();
      if (an.contains("cooling")) c.minimize.anneal.cooling = an["cooling"].get<double>();
      if (an.contains("sweeps")) c.minimize.anneal.sweeps = an["sweeps"].get<int>();
    }
    if (c.minimize.restarts < 1 || c.minimize.restarts > 1024)
      throw std::invalid_argument("config.minimize: restarts must lie in [1, 1024]");
  }
  c.minimize.threads = c.numerics.threads;
  return c;
}

inline ProblemConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return parse_config(root);
}

// canonical echo of a parsed config; also the basis of the cache key
inline json resolved_config(const ProblemConfig& c) {
  json om;
  if (std::holds_alternative<WholePlane>(c.omega)) {
    om = {{"type", "all"}};
  } else {
    const Disk& d = std::get<Disk>(c.omega);
    om = {{"type", "disk"}, {"center", {d.c.x, d.c.y}}, {"radius", d.r}};
  }
  json dt = json::array();
  for (const auto& r : c.datum.regions) {
    if (std::holds_alternative<HalfPlane>(r)) {
      const auto& hp = std::get<HalfPlane>(r);
      dt.push_back({{"half_plane", {{"normal", {hp.n.x, hp.n.y}}, {"offset", hp.b}}}});
    } else if (std::holds_alternative<Sector>(r)) {
      const auto& sc = std::get<Sector>(r);
      dt.push_back({{"sector",
                     {{"vertex", {sc.v.x, sc.v.y}}, {"start", sc.a0}, {"opening", sc.opening}}}});
    } else {
      const auto& pg = std::get<PolygonRegion>(r);
      json verts = json::array();
      for (Vec2 v : pg.v) verts.push_back({v.x, v.y});
      dt.push_back({{"polygon", {{"vertices", verts}}}});
    }
  }
  return json{{"s", c.s},
              {"weights", c.weights},
              {"box", {{"lo", {c.box.lo.x, c.box.lo.y}}, {"hi", {c.box.hi.x, c.box.hi.y}}}},
              {"n", c.n},
              {"omega", om},
              {"datum_regions", dt},
              {"numerics",
               {{"r_cut", c.numerics.r_cut},
                {"quad_tol", c.numerics.quad_tol},
                {"threads", c.numerics.threads}}},
              {"minimize",
               {{"restarts", c.minimize.restarts},
                {"seed", c.minimize.seed},
                {"max_sweeps", c.minimize.max_sweeps},
                {"anneal",
                 {{"enabled", c.minimize.anneal.enabled},
                  {"t0", c.minimize.anneal.t0},
                  {"cooling", c.minimize.anneal.cooling},
                  {"sweeps", c.minimize.anneal.sweeps}}}}}};
}

// hash of everything the interaction matrix depends on (weights and
// minimizer settings deliberately excluded)
inline std::uint64_t problem_key(const ProblemConfig& c) {
  json r = resolved_config(c);
  json key{{"v", 1},          {"s", r["s"]},
           {"box", r["box"]}, {"n", r["n"]},
           {"omega", r["omega"]}, {"datum_regions", r["datum_regions"]},
           {"r_cut", c.numerics.r_cut}, {"quad_tol", c.numerics.quad_tol}};
  Hash64 h;
  h.str(key.dump());
  return h.h;
}

// ---------------------------------------------------------------------
// atomic file output

inline void atomic_write_file(const std::string& path, const std::string& bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("rename failed: " + path);
  }
}

// ---------------------------------------------------------------------
// PGM label images

inline void write_labels_pgm(const std::string& path, const Grid& g,
                             const std::vector<std::uint8_t>& lab,
                             const std::vector<std::string>& comments = {}) {
  int maxval = 1;
  for (std::uint8_t v : lab) maxval = std::max(maxval, static_cast<int>(v));
  std::string out = "P5\n";
  for (const std::string& c : comments) out += "# " + c + "\n";
  char head[128];
  std::snprintf(head, sizeof(head), "# grid %d %d h %.17g\n%d %d\n%d\n", g.nx, g.ny, g.h, g.nx,
                g.ny, maxval);
  out += head;
  for (int j = g.ny - 1; j >= 0; --j)
    for (int i = 0; i < g.nx; ++i)
      out.push_back(static_cast<char>(lab[static_cast<std::size_t>(g.idx(i, j))]));
  atomic_write_file(path, out);
}

struct PgmImage {
  int w = 0, h = 0, maxval = 0;
  std::vector<std::uint8_t> data;  // file order: top row first
  std::vector<std::string> comments;
};

inline PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path);
  PgmImage img;
  auto next_token = [&](int& value) {
    // comments may appear between any header tokens
    while (true) {
      int ch = in.peek();
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
        if (!line.empty() && line.front() == '#') line.erase(0, line.find_first_not_of("# "));
        img.comments.push_back(line);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    in >> value;
  };
  next_token(img.w);
  next_token(img.h);
  next_token(img.maxval);
  in.get();  // single whitespace after maxval
  if (img.w <= 0 || img.h <= 0 || img.maxval <= 0 || img.maxval > 255)
    throw std::runtime_error("bad PGM header: " + path);
  img.data.resize(static_cast<std::size_t>(img.w) * img.h);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!in) throw std::runtime_error("truncated PGM: " + path);
  return img;
}

inline std::vector<std::uint8_t> labels_from_pgm(const PgmImage& img, const Grid& g) {
  if (img.w != g.nx || img.h != g.ny)
    throw std::runtime_error("PGM dimensions do not match the grid");
  std::vector<std::uint8_t> lab(static_cast<std::size_t>(g.cell_count()));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      lab[static_cast<std::size_t>(g.idx(i, j))] =
          img.data[static_cast<std::size_t>(g.ny - 1 - j) * g.nx + i];
  return lab;
}

// ---------------------------------------------------------------------
// interaction-matrix cache, keyed by problem_key; enabled when the
// FRACLUSTER_CACHE_DIR environment variable names a writable directory

namespace detail {

constexpr char matrix_magic[8] = {'F', 'R', 'A', 'C', 'M', 'A', 'T', '1'};

inline std::string cache_path(const std::string& dir, std::uint64_t key) {
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.mat", static_cast<unsigned long long>(key));
  return dir + "/" + name;
}

}  // namespace detail

inline bool try_load_matrix_cache(const std::string& dir, std::uint64_t key,
                                  InteractionMatrix& m) {
  std::ifstream in(detail::cache_path(dir, key), std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::matrix_magic, 8) != 0) return false;
  std::int32_t nx = 0, ny = 0, k = 0;
  in.read(reinterpret_cast<char*>(&nx), 4);
  in.read(reinterpret_cast<char*>(&ny), 4);
  in.read(reinterpret_cast<char*>(&k), 4);
  if (!in || nx <= 0 || ny <= 0 || k <= 0 || nx > 4096 || ny > 4096 || k > 255) return false;
  m.nx = nx;
  m.ny = ny;
  m.k = k;
  double scal[5];
  in.read(reinterpret_cast<char*>(scal), sizeof(scal));
  m.h = scal[0];
  m.params.s = scal[1];
  m.params.r_cut = scal[2];
  m.params.quad_tol = scal[3];
  m.cell_tail_bound = scal[4];
  m.offs.resize(static_cast<std::size_t>(nx) * ny);
  m.region.resize(static_cast<std::size_t>(nx) * ny * k);
  in.read(reinterpret_cast<char*>(m.offs.data()),
          static_cast<std::streamsize>(m.offs.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(m.region.data()),
          static_cast<std::streamsize>(m.region.size() * sizeof(double)));
  return static_cast<bool>(in);
}

inline void store_matrix_cache(const std::string& dir, std::uint64_t key,
                               const InteractionMatrix& m) {
  std::string bytes(detail::matrix_magic, 8);
  auto put = [&](const void* p, std::size_t nbytes) {
    bytes.append(static_cast<const char*>(p), nbytes);
  };
  std::int32_t dims[3] = {m.nx, m.ny, m.k};
  put(dims, sizeof(dims));
  double scal[5] = {m.h, m.params.s, m.params.r_cut, m.params.quad_tol, m.cell_tail_bound};
  put(scal, sizeof(scal));
  put(m.offs.data(), m.offs.size() * sizeof(double));
  put(m.region.data(), m.region.size() * sizeof(double));
  atomic_write_file(detail::cache_path(dir, key), bytes);
}

// builds the matrix, consulting FRACLUSTER_CACHE_DIR when set; a cache
// hit reproduces the computed matrix byte for byte
inline InteractionMatrix matrix_for_problem(const Grid& g, const Datum& d, const MatrixParams& p,
                                            std::uint64_t key) {
  const char* dir = std::getenv("FRACLUSTER_CACHE_DIR");
  InteractionMatrix m;
  if (dir && *dir && try_load_matrix_cache(dir, key, m)) {
    if (m.nx == g.nx && m.ny == g.ny && m.k == d.phase_count()) {
      m.params.threads = p.threads;
      return m;
    }
  }
  m = build_interaction_matrix(g, d, p);
  if (dir && *dir) store_matrix_cache(dir, key, m);
  return m;
}

}  // namespace fracluster
