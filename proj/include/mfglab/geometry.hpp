#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mfglab {

enum class NodeClass : std::uint8_t { Interior, OuterBoundary, InnerBoundary, Excluded };

enum class ObstacleShape : std::uint8_t { None, Rectangle, Disk };

struct ObstacleSpec {
  ObstacleShape shape = ObstacleShape::None;
  std::array<double, 2> center{0.5, 0.5};
  std::array<double, 2> half_extents{0.0, 0.0};  // rectangle
  double radius = 0.0;                           // disk

  bool contains(double x, double y) const;
  bool empty() const { return shape == ObstacleShape::None; }
  bool operator==(const ObstacleSpec&) const = default;
};

// Rectangular lattice over the box [0,Lx] x [0,Ly] with an excluded obstacle
// region. Active nodes (everything except Excluded) carry field values; the
// inner boundary is the layer of active nodes adjacent to excluded ones.
// Immutable after construction.
class Grid {
 public:
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  std::array<double, 2> extent{1.0, 1.0};
  ObstacleSpec obstacle;

  std::vector<NodeClass> node_class;   // size nx*ny, lattice order j*nx+i
  std::vector<int> active_index;      // lattice -> active index, -1 if excluded
  std::vector<int> active_nodes;      // active index -> lattice index
  int n_active = 0;
  int n_interior = 0;

  int idx(int i, int j) const { return j * nx + i; }
  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  NodeClass cls(int i, int j) const { return node_class[idx(i, j)]; }
  bool is_active(int i, int j) const { return cls(i, j) != NodeClass::Excluded; }
  bool degenerate_1d() const { return ny == 1; }

  bool same_layout(const Grid& other) const {
    return nx == other.nx && ny == other.ny && hx == other.hx && hy == other.hy &&
           obstacle == other.obstacle;
  }
};

enum class Edge : std::uint8_t { Left, Right, Bottom, Top };

// A union of outer-boundary edge segments Gamma. Each entry is one boundary
// node together with the face length it represents in boundary quadrature.
struct BoundaryPatch {
  struct Face {
    int i, j;        // lattice coordinates of the boundary node
    Edge edge;       // which outer edge the face sits on
    double length;   // quadrature weight (face length)
    double arclength;  // position along the patch, used by weight profiles
  };
  std::vector<Face> faces;
  double total_length = 0.0;

  bool empty() const { return faces.empty(); }
};

struct EdgeSegment {
  Edge edge = Edge::Right;
  double from = 0.0;  // fractional position along the edge, in [0,1]
  double to = 1.0;
};

Grid build_grid(std::array<double, 2> domain_size, std::array<int, 2> resolution,
                const ObstacleSpec& obstacle);

// Degenerate strip of n nodes used by discretization unit tests only.
Grid build_strip_grid(int n, double h);

BoundaryPatch make_patch(const Grid& grid, const std::vector<EdgeSegment>& segments);

struct CandidateFamily {
  ObstacleShape shape = ObstacleShape::Rectangle;
  std::array<double, 2> half_extents{0.125, 0.125};
  double radius = 0.125;
  std::vector<std::array<double, 2>> centers;
};

std::vector<ObstacleSpec> candidate_obstacles(std::array<double, 2> domain_size,
                                              std::array<int, 2> resolution,
                                              const CandidateFamily& family);

}  // namespace mfglab
