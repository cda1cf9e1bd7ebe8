#pragma once

// Layered costmap: static obstacle layer with inflation, social layer
// rasterized from human states, pointwise-max master merge, and PGM I/O.
//
// Cost scale 0..255; 255 is lethal, 254 the inscribed band. Cell lookup uses
// the floor convention: a point on a cell boundary belongs to the lower-index
// cell. Out-of-bounds queries are a distinct result (treated as lethal by the
// planner).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"
#include "socnav/human_model.hpp"

namespace socnav {

inline constexpr uint8_t kLethalCost = 255;
inline constexpr uint8_t kInscribedCost = 254;

struct GridSpec {
  Point2 origin;           // world position of the lower-left corner of cell (0,0)
  double resolution{0.05}; // meters per cell
  int width{0};
  int height{0};

  Point2 cell_center(int i, int j) const {
    return {origin.x + (i + 0.5) * resolution,
            origin.y + (j + 0.5) * resolution};
  }
  bool contains(int i, int j) const {
    return i >= 0 && i < width && j >= 0 && j < height;
  }
  bool operator==(const GridSpec& o) const {
    return origin.x == o.origin.x && origin.y == o.origin.y &&
           resolution == o.resolution && width == o.width && height == o.height;
  }
};

class Costmap {
 public:
  Costmap() = default;
  explicit Costmap(const GridSpec& spec, uint8_t fill = 0)
      : spec_(spec),
        cells_(static_cast<size_t>(spec.width) * spec.height, fill) {
    if (!(spec.resolution > 0.0) || spec.width < 1 || spec.height < 1) {
      throw std::invalid_argument("Costmap: bad grid spec");
    }
  }

  const GridSpec& spec() const { return spec_; }
  uint8_t at(int i, int j) const { return cells_[idx(i, j)]; }
  uint8_t& at(int i, int j) { return cells_[idx(i, j)]; }
  const std::vector<uint8_t>& cells() const { return cells_; }

  /// Cost of the containing cell, floor convention; nullopt out of bounds.
  std::optional<uint8_t> query(const Point2& p) const {
    const int i = static_cast<int>(std::floor((p.x - spec_.origin.x) / spec_.resolution));
    const int j = static_cast<int>(std::floor((p.y - spec_.origin.y) / spec_.resolution));
    if (!spec_.contains(i, j)) return std::nullopt;
    return at(i, j);
  }

 private:
  size_t idx(int i, int j) const {
    return static_cast<size_t>(j) * spec_.width + i;
  }

  GridSpec spec_;
  std::vector<uint8_t> cells_;
};

namespace detail {

// Felzenszwalb & Huttenlocher 1D squared distance transform.
inline void edt_1d(std::vector<double>& f, std::vector<double>& d,
                   std::vector<int>& v, std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

// Squared Euclidean distance (in cells) to the nearest occupied cell.
inline std::vector<double> squared_edt(const std::vector<uint8_t>& occupied,
                                       int width, int height) {
  const double inf = 1e20;
  std::vector<double> g(static_cast<size_t>(width) * height);
  for (size_t i = 0; i < g.size(); ++i) g[i] = occupied[i] ? 0.0 : inf;

  const int n = std::max(width, height);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int i = 0; i < width; ++i) {  // columns
    for (int j = 0; j < height; ++j) f[j] = g[static_cast<size_t>(j) * width + i];
    edt_1d(f, d, v, z, height);
    for (int j = 0; j < height; ++j) g[static_cast<size_t>(j) * width + i] = d[j];
  }
  for (int j = 0; j < height; ++j) {  // rows
    for (int i = 0; i < width; ++i) f[i] = g[static_cast<size_t>(j) * width + i];
    edt_1d(f, d, v, z, width);
    for (int i = 0; i < width; ++i) g[static_cast<size_t>(j) * width + i] = d[i];
  }
  return g;
}

}  // namespace detail

/// Obstacle layer: occupied cells are lethal, cells within robot_radius of an
/// occupied cell inscribed (254), and beyond that the cost decays as
/// round(253 * exp(-decay_rate * (d - robot_radius))).
inline Costmap rasterize_static(const std::vector<uint8_t>& occupied,
                                double robot_radius, const GridSpec& spec,
                                double decay_rate = 3.0) {
  if (occupied.size() != static_cast<size_t>(spec.width) * spec.height) {
    throw std::invalid_argument("rasterize_static: occupancy/spec dimension mismatch");
  }
  Costmap map(spec);
  const auto d2 = detail::squared_edt(occupied, spec.width, spec.height);
  for (int j = 0; j < spec.height; ++j) {
    for (int i = 0; i < spec.width; ++i) {
      const double d = std::sqrt(d2[static_cast<size_t>(j) * spec.width + i]) *
                       spec.resolution;
      uint8_t cost = 0;
      if (d == 0.0) {
        cost = kLethalCost;
      } else if (d <= robot_radius) {
        cost = kInscribedCost;
      } else {
        const double c = 253.0 * std::exp(-decay_rate * (d - robot_radius));
        cost = static_cast<uint8_t>(std::lround(std::min(c, 253.0)));
      }
      map.at(i, j) = cost;
    }
  }
  return map;
}

// Scenario-level personal-space settings.
struct SocialParams {
  double amplitude{254.0};
  double velocity_scale{1.0};
  double r_d{0.3};              // physical disk radius, meters
  double static_threshold{0.1}; // m/s
  bool enabled{true};           // include the layer in the master merge
};

/// Social layer: per human, the physical disk is lethal and the surrounding
/// personal-space Gaussian is rasterized at cell centers; cells where the
/// continuous cost is below 1 stay untouched, which bounds the footprint to
/// an ellipse of about 3.3 sigma. Humans combine by pointwise max.
inline Costmap rasterize_social(const std::vector<HumanState>& humans,
                                const SocialParams& social,
                                const GridSpec& spec) {
  Costmap map(spec);
  const double res = spec.resolution;
  for (const auto& h : humans) {
    PersonalSpaceParams p = variance_schedule(h.speed(), social.velocity_scale);
    p.amplitude = social.amplitude;
    const double cutoff =
        p.sigma_h * std::sqrt(2.0 * std::max(std::log(social.amplitude), 0.0));
    const double reach = std::max(social.r_d, cutoff) + res;
    const int i0 = std::max(0, static_cast<int>(std::floor((h.x - reach - spec.origin.x) / res)));
    const int i1 = std::min(spec.width - 1, static_cast<int>(std::floor((h.x + reach - spec.origin.x) / res)));
    const int j0 = std::max(0, static_cast<int>(std::floor((h.y - reach - spec.origin.y) / res)));
    const int j1 = std::min(spec.height - 1, static_cast<int>(std::floor((h.y + reach - spec.origin.y) / res)));
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const Point2 q = spec.cell_center(i, j);
        const double d = distance(q, h.position());
        uint8_t& cell = map.at(i, j);
        if (d <= social.r_d) {
          cell = kLethalCost;
          continue;
        }
        const double c = personal_space_cost(h, q, p, social.static_threshold);
        if (c < 1.0) continue;
        const auto v = static_cast<uint8_t>(
            std::min<long>(std::lround(c), kInscribedCost));
        cell = std::max(cell, v);
      }
    }
  }
  return map;
}

/// Master merge: pointwise maximum over layers with identical specs.
inline Costmap merge(const std::vector<Costmap>& layers) {
  if (layers.empty()) throw std::invalid_argument("merge: no layers");
  Costmap out = layers.front();
  for (size_t l = 1; l < layers.size(); ++l) {
    if (!(layers[l].spec() == out.spec())) {
      throw std::invalid_argument("merge: grid spec mismatch");
    }
    for (int j = 0; j < out.spec().height; ++j) {
      for (int i = 0; i < out.spec().width; ++i) {
        out.at(i, j) = std::max(out.at(i, j), layers[l].at(i, j));
      }
    }
  }
  return out;
}

/// Robot-centered local window aligned to the phase of `align` so that crops
/// are cell-exact.
inline GridSpec local_window_spec(const Point2& center, double size_m,
                                  double resolution,
                                  const Point2& align = {0.0, 0.0}) {
  const int cells = std::max(1, static_cast<int>(std::lround(size_m / resolution)));
  GridSpec spec;
  spec.resolution = resolution;
  spec.width = cells;
  spec.height = cells;
  const double half = 0.5 * cells * resolution;
  spec.origin.x = align.x + std::floor((center.x - half - align.x) / resolution) * resolution;
  spec.origin.y = align.y + std::floor((center.y - half - align.y) / resolution) * resolution;
  return spec;
}

/// Copies `source` onto the window grid (same resolution); window cells
/// outside the source extent read as free.
inline Costmap crop(const Costmap& source, const GridSpec& window) {
  if (window.resolution != source.spec().resolution) {
    throw std::invalid_argument("crop: resolution mismatch");
  }
  Costmap out(window);
  for (int j = 0; j < window.height; ++j) {
    for (int i = 0; i < window.width; ++i) {
      const auto c = source.query(window.cell_center(i, j));
      out.at(i, j) = c.value_or(0);
    }
  }
  return out;
}

// ---- PGM and CSV I/O -------------------------------------------------------
//
// Map images follow the usual convention: row 0 of the image is the top of
// the map (max y), dark pixels are occupied. Costmap exports invert the cost
// (free = white) so they round-trip with that convention.

struct OccupancyGrid {
  GridSpec spec;
  std::vector<uint8_t> occupied;  // 1 = occupied, row-major like Costmap
};

inline OccupancyGrid load_occupancy_pgm(std::istream& in, double resolution,
                                        const Point2& origin,
                                        int occupied_threshold = 127) {
  auto next_token = [&in]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("pgm: truncated header");
  };
  const std::string magic = next_token();
  if (magic != "P2" && magic != "P5") {
    throw std::runtime_error("pgm: expected P2 or P5, got " + magic);
  }
  const int width = std::stoi(next_token());
  const int height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    throw std::runtime_error("pgm: bad dimensions");
  }
  OccupancyGrid grid;
  grid.spec = {origin, resolution, width, height};
  grid.occupied.assign(static_cast<size_t>(width) * height, 0);
  auto put = [&](int row, int col, long value) {
    const long scaled = value * 255 / maxval;
    const int j = height - 1 - row;  // image top row = max y
    grid.occupied[static_cast<size_t>(j) * width + col] =
        scaled <= occupied_threshold ? 1 : 0;
  };
  if (magic == "P2") {
    for (int row = 0; row < height; ++row) {
      for (int col = 0; col < width; ++col) {
        put(row, col, std::stol(next_token()));
      }
    }
  } else {
    in.get();  // single whitespace after maxval
    for (int row = 0; row < height; ++row) {
      for (int col = 0; col < width; ++col) {
        const int c = in.get();
        if (c == EOF) throw std::runtime_error("pgm: truncated data");
        put(row, col, c);
      }
    }
  }
  return grid;
}

inline OccupancyGrid load_occupancy_pgm(const std::string& path, double resolution,
                                        const Point2& origin,
                                        int occupied_threshold = 127) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pgm: " + path);
  return load_occupancy_pgm(in, resolution, origin, occupied_threshold);
}

inline void write_pgm(const Costmap& map, std::ostream& out) {
  const auto& spec = map.spec();
  out << "P5\n" << spec.width << " " << spec.height << "\n255\n";
  for (int row = 0; row < spec.height; ++row) {
    const int j = spec.height - 1 - row;
    for (int i = 0; i < spec.width; ++i) {
      out.put(static_cast<char>(255 - map.at(i, j)));
    }
  }
}

inline void write_pgm(const Costmap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write pgm: " + path);
  write_pgm(map, out);
}

inline void write_csv(const Costmap& map, std::ostream& out) {
  for (int row = 0; row < map.spec().height; ++row) {
    const int j = map.spec().height - 1 - row;
    for (int i = 0; i < map.spec().width; ++i) {
      if (i) out << ',';
      out << static_cast<int>(map.at(i, j));
    }
    out << '\n';
  }
}

}  // namespace socnav
