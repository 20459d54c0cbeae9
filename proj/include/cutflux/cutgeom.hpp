#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "cutflux/geometry.hpp"
#include "cutflux/mesh.hpp"
#include "cutflux/quadrature.hpp"

namespace cutflux {

/// Phases are indexed 0 (Omega^1) and 1 (Omega^2) throughout.
inline constexpr int kNumPhases = 2;

/// Relative tolerance (times the domain diameter) below which a point counts
/// as lying on the interface.
inline constexpr double kOnInterfaceTolerance = 1e-12;

/// Cut cells whose smaller piece covers less than this fraction of the
/// triangle are rejected as slivers.
inline constexpr double kMinPieceAreaRatio = 1e-14;

/// Directed polyline. Omega^1 lies on its left, so the interface normal
/// (clockwise rotation of the direction) points from Omega^1 into Omega^2.
/// An open polyline is extended by rays beyond its two end points; a
/// polyline whose last vertex repeats the first is closed.
class InterfacePolyline {
 public:
  explicit InterfacePolyline(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  bool closed() const { return closed_; }
  int num_segments() const { return static_cast<int>(vertices_.size()) - 1; }
  Segment segment(int k) const { return {vertices_[k], vertices_[k + 1]}; }

  /// Distance to the (extended) polyline, positive on the Omega^1 side.
  double signed_distance(const Vec2& p) const;

  /// Parameters s in [0, 1] at which p + s (q - p) meets the polyline, with
  /// coincident hits merged. Throws unsupported-geometry when [p, q] overlaps
  /// a polyline segment.
  std::vector<double> crossings(const Vec2& p, const Vec2& q, double tol) const;

  /// The same polyline shifted by `offset`.
  InterfacePolyline translated(const Vec2& offset) const;

 private:
  bool segment_unbounded_before(int k) const { return !closed_ && k == 0; }
  bool segment_unbounded_after(int k) const { return !closed_ && k == num_segments() - 1; }

  std::vector<Vec2> vertices_;
  bool closed_ = false;
};

/// "interface n" followed by n lines "x y".
InterfacePolyline read_interface(std::istream& in);
InterfacePolyline read_interface_file(const std::string& path);
void write_interface(const InterfacePolyline& interface, std::ostream& out);

/// Geometry of one cut triangle.
struct CutCell {
  int triangle = -1;
  std::array<Vec2, 3> vertices{};
  std::array<int, 3> vertex_phase{};
  /// T^1 and T^2 as counter-clockwise convex polygons.
  std::array<std::vector<Vec2>, kNumPhases> piece;
  std::array<double, kNumPhases> area{};
  /// Gamma_T, oriented along the interface direction.
  Segment gamma;
  Vec2 normal = Vec2::Zero();   // n_Gamma, Omega^1 -> Omega^2
  Vec2 tangent = Vec2::Zero();  // t_Gamma
  /// fragment[j][i] = (local edge j) intersected with Omega^i; zero length
  /// when empty. Local edge j joins vertices j and j+1.
  std::array<std::array<Segment, kNumPhases>, 3> fragment{};

  double total_area() const { return area[0] + area[1]; }
  double fragment_length(int j, int i) const { return fragment[j][i].length(); }
  /// Complement T_C^i = T \ T^i.
  const std::vector<Vec2>& complement(int i) const { return piece[1 - i]; }
};

/// Clip a triangle against the interface. The triangle must be crossed by a
/// single straight piece of the interface through two distinct edges.
CutCell clip_triangle(const std::array<Vec2, 3>& triangle, const InterfacePolyline& interface,
                      double tol = kOnInterfaceTolerance);

struct InterfaceWeights {
  double omega1 = 0.5;
  double omega2 = 0.5;
  double k_gamma = 0.0;  // harmonic mean k1 k2 / (k1 + k2)
  double k_max = 0.0;

  double omega(int i) const { return i == 0 ? omega1 : omega2; }
};

InterfaceWeights interface_weights(double k1, double k2);

/// Classification of mesh entities against the interface. Holds a pointer to
/// the mesh, which must outlive it.
class CutTopology {
 public:
  CutTopology(const Mesh& mesh, InterfacePolyline interface, double tol);

  const Mesh& mesh() const { return *mesh_; }
  const InterfacePolyline& interface() const { return interface_; }

  /// Phase of the node position (nodes never lie on the interface).
  int node_phase(int n) const { return node_phase_[n]; }
  /// Node is a vertex of some triangle of T_h^i.
  bool node_in(int i, int n) const { return node_in_[i][n] != 0; }

  /// T in T_h^i.
  bool triangle_in(int i, int t) const { return tri_in_[i][t] != 0; }
  bool triangle_cut(int t) const { return cut_index_[t] >= 0; }
  /// Phase of an uncut triangle.
  int triangle_phase(int t) const { return node_phase_[mesh_->triangle(t)[0]]; }

  /// F in F_h^i.
  bool edge_in(int i, int e) const { return edge_in_[i][e] != 0; }
  bool edge_cut(int e) const { return edge_cut_[e] != 0; }
  /// F in F_g^i: interior edge of F_h^i with a neighbour in T_h^Gamma.
  bool ghost(int i, int e) const { return ghost_[i][e] != 0; }
  const Vec2& edge_crossing(int e) const { return crossing_[e]; }
  /// F intersected with Omega^i.
  Segment edge_fragment(int e, int i) const;

  const CutCell* cut_cell(int t) const { return cut_index_[t] >= 0 ? &cells_[cut_index_[t]] : nullptr; }
  const std::vector<CutCell>& cut_cells() const { return cells_; }

  /// |T intersected with Omega^i|.
  double piece_area(int t, int i) const;
  /// T intersected with Omega^i as a polygon (empty when T is not in T_h^i).
  std::vector<Vec2> piece(int t, int i) const;

  /// Quadrature on T intersected with Omega^i.
  QuadratureRule region_rule(int t, int i, int degree, int refinements = 0) const;

  std::vector<int> triangles(int i) const;
  std::vector<int> cut_triangles() const;
  std::vector<int> edges(int i) const;
  std::vector<int> cut_edges() const;
  std::vector<int> ghost_edges(int i) const;

  double tolerance() const { return tol_; }

 private:
  const Mesh* mesh_;
  InterfacePolyline interface_;
  double tol_;
  std::vector<int> node_phase_;
  std::array<std::vector<char>, kNumPhases> node_in_;
  std::array<std::vector<char>, kNumPhases> tri_in_;
  std::array<std::vector<char>, kNumPhases> edge_in_;
  std::array<std::vector<char>, kNumPhases> ghost_;
  std::vector<char> edge_cut_;
  std::vector<Vec2> crossing_;
  std::vector<int> cut_index_;
  std::vector<CutCell> cells_;
};

/// Classify the mesh against the interface. Errors: degenerate-cut when a
/// node lies on the interface; unsupported-geometry when some triangle is not
/// crossed by a single straight piece.
CutTopology classify(const Mesh& mesh, const InterfacePolyline& interface);

}  // namespace cutflux
