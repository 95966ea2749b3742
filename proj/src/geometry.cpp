#include "mfglab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "mfglab/errors.hpp"

namespace mfglab {

bool ObstacleSpec::contains(double px, double py) const {
  switch (shape) {
    case ObstacleShape::None:
      return false;
    case ObstacleShape::Rectangle:
      return std::abs(px - center[0]) < half_extents[0] &&
             std::abs(py - center[1]) < half_extents[1];
    case ObstacleShape::Disk: {
      const double dx = px - center[0], dy = py - center[1];
      return dx * dx + dy * dy < radius * radius;
    }
  }
  return false;
}

namespace {

void classify(Grid& g) {
  g.node_class.assign(static_cast<std::size_t>(g.nx) * g.ny, NodeClass::Interior);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      NodeClass& c = g.node_class[g.idx(i, j)];
      if (g.obstacle.contains(g.x(i), g.y(j))) {
        c = NodeClass::Excluded;
      } else if (i == 0 || i == g.nx - 1 || (g.ny > 1 && (j == 0 || j == g.ny - 1))) {
        c = NodeClass::OuterBoundary;
      }
    }
  }
  // Inner boundary: active nodes with an excluded axis neighbor.
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.cls(i, j) == NodeClass::Excluded) continue;
      for (int k = 0; k < 4; ++k) {
        const int ni = i + di[k], nj = j + dj[k];
        if (ni < 0 || ni >= g.nx || nj < 0 || nj >= g.ny) continue;
        if (g.cls(ni, nj) == NodeClass::Excluded) {
          if (g.node_class[g.idx(i, j)] == NodeClass::OuterBoundary) {
            throw GeometryError("obstacle reaches the outer boundary layer");
          }
          g.node_class[g.idx(i, j)] = NodeClass::InnerBoundary;
          break;
        }
      }
    }
  }
}

void index_active(Grid& g) {
  g.active_index.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
  g.active_nodes.clear();
  g.n_interior = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.idx(i, j);
      if (g.node_class[n] == NodeClass::Excluded) continue;
      g.active_index[n] = static_cast<int>(g.active_nodes.size());
      g.active_nodes.push_back(n);
      if (g.node_class[n] == NodeClass::Interior) ++g.n_interior;
    }
  }
  g.n_active = static_cast<int>(g.active_nodes.size());
}

void check_connected(const Grid& g) {
  if (g.n_active == 0) throw GeometryError("no active nodes");
  std::vector<char> seen(g.n_active, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    const int a = q.front();
    q.pop();
    const int n = g.active_nodes[a];
    const int i = n % g.nx, j = n / g.nx;
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k], nj = j + dj[k];
      if (ni < 0 || ni >= g.nx || nj < 0 || nj >= g.ny) continue;
      const int b = g.active_index[g.idx(ni, nj)];
      if (b >= 0 && !seen[b]) {
        seen[b] = 1;
        ++reached;
        q.push(b);
      }
    }
  }
  if (reached != g.n_active) throw GeometryError("active node set is disconnected");
}

// At least two active node layers between the obstacle and the outer boundary.
void check_margin(const Grid& g) {
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.cls(i, j) != NodeClass::Excluded) continue;
      if (i < 3 || i > g.nx - 4 || j < 3 || j > g.ny - 4) {
        throw GeometryError("obstacle too close to the outer boundary (need 2 active layers)");
      }
    }
  }
}

}  // namespace

Grid build_grid(std::array<double, 2> domain_size, std::array<int, 2> resolution,
                const ObstacleSpec& obstacle) {
  if (resolution[0] < 9 || resolution[1] < 9) {
    throw GeometryError("resolution must be at least 9 nodes per axis");
  }
  if (domain_size[0] <= 0 || domain_size[1] <= 0) {
    throw GeometryError("domain extents must be positive");
  }
  if (!obstacle.empty()) {
    // Closure strictly inside Omega.
    double x0, x1, y0, y1;
    if (obstacle.shape == ObstacleShape::Rectangle) {
      if (obstacle.half_extents[0] <= 0 || obstacle.half_extents[1] <= 0) {
        throw GeometryError("rectangle obstacle needs positive half extents");
      }
      x0 = obstacle.center[0] - obstacle.half_extents[0];
      x1 = obstacle.center[0] + obstacle.half_extents[0];
      y0 = obstacle.center[1] - obstacle.half_extents[1];
      y1 = obstacle.center[1] + obstacle.half_extents[1];
    } else {
      if (obstacle.radius <= 0) throw GeometryError("disk obstacle needs positive radius");
      x0 = obstacle.center[0] - obstacle.radius;
      x1 = obstacle.center[0] + obstacle.radius;
      y0 = obstacle.center[1] - obstacle.radius;
      y1 = obstacle.center[1] + obstacle.radius;
    }
    if (x0 <= 0 || y0 <= 0 || x1 >= domain_size[0] || y1 >= domain_size[1]) {
      throw GeometryError("obstacle closure must be strictly inside the domain");
    }
  }

  Grid g;
  g.nx = resolution[0];
  g.ny = resolution[1];
  g.extent = domain_size;
  g.hx = domain_size[0] / (g.nx - 1);
  g.hy = domain_size[1] / (g.ny - 1);
  g.obstacle = obstacle;
  classify(g);
  bool any_excluded = false;
  for (auto c : g.node_class) any_excluded |= (c == NodeClass::Excluded);
  if (!obstacle.empty() && any_excluded) check_margin(g);
  index_active(g);
  check_connected(g);
  return g;
}

Grid build_strip_grid(int n, double h) {
  Grid g;
  g.nx = n;
  g.ny = 1;
  g.hx = h;
  g.hy = 1.0;
  g.extent = {h * (n - 1), 1.0};
  g.node_class.assign(n, NodeClass::Interior);
  g.node_class.front() = NodeClass::OuterBoundary;
  g.node_class.back() = NodeClass::OuterBoundary;
  index_active(g);
  return g;
}

BoundaryPatch make_patch(const Grid& grid, const std::vector<EdgeSegment>& segments) {
  if (segments.empty()) throw GeometryError("boundary patch needs at least one segment");
  BoundaryPatch p;
  std::set<std::pair<int, int>> used;
  double arc = 0.0;
  for (const auto& seg : segments) {
    if (seg.from < 0 || seg.to > 1 || seg.from >= seg.to) {
      throw GeometryError("edge segment fractions must satisfy 0 <= from < to <= 1");
    }
    const bool vertical = (seg.edge == Edge::Left || seg.edge == Edge::Right);
    const int count = vertical ? grid.ny : grid.nx;
    const double h = vertical ? grid.hy : grid.hx;
    for (int k = 0; k < count; ++k) {
      const double frac = static_cast<double>(k) / (count - 1);
      if (frac < seg.from - 1e-12 || frac > seg.to + 1e-12) continue;
      int i, j;
      switch (seg.edge) {
        case Edge::Left: i = 0; j = k; break;
        case Edge::Right: i = grid.nx - 1; j = k; break;
        case Edge::Bottom: i = k; j = 0; break;
        case Edge::Top: i = k; j = grid.ny - 1; break;
        default: i = j = 0;
      }
      if (grid.cls(i, j) != NodeClass::OuterBoundary) {
        throw GeometryError("patch face is not on the outer boundary");
      }
      if (!used.insert({i, j}).second) continue;
      const bool endpoint = (k == 0 || k == count - 1);
      p.faces.push_back({i, j, seg.edge, endpoint ? h / 2 : h, arc});
      arc += endpoint ? h / 2 : h;
    }
  }
  if (p.faces.empty()) throw GeometryError("boundary patch is empty");
  p.total_length = arc;
  return p;
}

std::vector<ObstacleSpec> candidate_obstacles(std::array<double, 2> domain_size,
                                              std::array<int, 2> resolution,
                                              const CandidateFamily& family) {
  std::vector<ObstacleSpec> out;
  for (const auto& c : family.centers) {
    ObstacleSpec spec;
    spec.shape = family.shape;
    spec.center = c;
    // Only the shape-relevant size parameter is copied so that candidates
    // compare equal to hand-built specs of the same shape.
    if (family.shape == ObstacleShape::Rectangle) {
      spec.half_extents = family.half_extents;
    } else if (family.shape == ObstacleShape::Disk) {
      spec.radius = family.radius;
    }
    try {
      (void)build_grid(domain_size, resolution, spec);
    } catch (const GeometryError&) {
      continue;  // inadmissible candidate, dropped
    }
    if (std::find(out.begin(), out.end(), spec) == out.end()) out.push_back(spec);
  }
  if (out.empty()) throw ConfigError("candidate family contains no admissible obstacle");
  return out;
}

}  // namespace mfglab
