#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "cutflux/geometry.hpp"

namespace cutflux {

/// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
struct Rect {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
};

/// Mesh edge with its global orientation.
///
/// `nodes` are stored so that the unit normal is the clockwise rotation of
/// the direction nodes[0] -> nodes[1]. For interior edges the normal points
/// from the `minus` triangle into the `plus` triangle; boundary edges have
/// `plus == -1` and an outward normal.
struct Edge {
  std::array<int, 2> nodes{};
  int minus = -1;
  int plus = -1;
  Vec2 normal = Vec2::Zero();
  double length = 0.0;

  bool boundary() const { return plus < 0; }
  int other_node(int n) const { return nodes[0] == n ? nodes[1] : nodes[0]; }
  int other_triangle(int t) const { return minus == t ? plus : minus; }
};

/// Conforming triangulation. Immutable after construction.
class Mesh {
 public:
  Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& node(int n) const { return nodes_[n]; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::array<Vec2, 3> vertices(int t) const;

  /// Local edge j of triangle t joins local vertices j and (j+1)%3.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }

  /// +1 when the global normal of the local edge j is outward for t.
  int edge_orientation(int t, int j) const { return edges_[triangle_edges_[t][j]].minus == t ? 1 : -1; }

  /// Local index (0..2) of node n in triangle t, or -1.
  int local_vertex(int t, int n) const;
  /// Local index (0..2) of edge e in triangle t, or -1.
  int local_edge(int t, int e) const;

  double area(int t) const { return areas_[t]; }
  /// Triangle diameter h_T (longest edge).
  double diameter(int t) const { return diameters_[t]; }
  double inradius(int t) const;
  Vec2 centroid(int t) const;

  const std::vector<int>& node_triangles(int n) const { return node_triangles_[n]; }
  const std::vector<int>& node_edges(int n) const { return node_edges_[n]; }
  bool boundary_node(int n) const { return boundary_node_[n]; }

  double max_diameter() const;
  /// max over triangles of h_T / rho_T with rho_T the inradius diameter.
  double max_shape_ratio() const;
  /// Diameter of the bounding box of all nodes.
  double domain_diameter() const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::vector<int>> node_triangles_;
  std::vector<std::vector<int>> node_edges_;
  std::vector<char> boundary_node_;
  std::vector<double> areas_;
  std::vector<double> diameters_;
};

/// Rectangle split into nx*ny quads, each cut by its lower-left to
/// upper-right diagonal.
Mesh build_structured_mesh(int nx, int ny, const Rect& rect = {});

/// Plain-text mesh: "nodes V", V lines "x y", "triangles F", F lines "i j k".
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

/// +1 iff the clockwise rotation of the unit vector from `node` towards the
/// other endpoint of `edge` equals the edge normal, -1 otherwise.
int node_edge_sign(const Mesh& mesh, int node, int edge);

struct NodePatch {
  int node = -1;
  std::vector<int> triangles;  // omega_N
  std::vector<int> edges;      // F_N
  bool interior = false;       // node not on the mesh boundary
};

NodePatch node_patch(const Mesh& mesh, int node);

}  // namespace cutflux
