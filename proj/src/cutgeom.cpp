#include "cutflux/cutgeom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

Vec2 left_normal(const Vec2& d) { return Vec2(-d.y(), d.x()) / d.norm(); }

bool lexicographic_less(const Vec2& a, const Vec2& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

// Crossing point of the segment [p, q] with the interface, computed from a
// direction-independent ordering of the end points so that both triangles
// sharing an edge see the same point.
std::vector<Vec2> edge_crossings(const Vec2& p, const Vec2& q, const InterfacePolyline& interface, double tol) {
  const bool swap = lexicographic_less(q, p);
  const Vec2& a = swap ? q : p;
  const Vec2& b = swap ? p : q;
  std::vector<Vec2> out;
  for (double s : interface.crossings(a, b, tol)) out.push_back(a + s * (b - a));
  return out;
}

CutCell make_cut_cell(int triangle, const std::array<Vec2, 3>& v, const std::array<int, 3>& phase,
                      const std::array<Vec2, 3>& crossing, const InterfacePolyline& interface, double tol) {
  CutCell cell;
  cell.triangle = triangle;
  cell.vertices = v;
  cell.vertex_phase = phase;

  std::vector<Vec2> hits;
  for (int j = 0; j < 3; ++j) {
    const int jn = (j + 1) % 3;
    cell.piece[phase[j]].push_back(v[j]);
    if (phase[j] != phase[jn]) {
      cell.piece[0].push_back(crossing[j]);
      cell.piece[1].push_back(crossing[j]);
      hits.push_back(crossing[j]);
      cell.fragment[j][phase[j]] = {v[j], crossing[j]};
      cell.fragment[j][phase[jn]] = {crossing[j], v[jn]};
    } else {
      cell.fragment[j][phase[j]] = {v[j], v[jn]};
      cell.fragment[j][1 - phase[j]] = {v[j], v[j]};
    }
  }
  if (hits.size() != 2) {
    throw Error(ErrorKind::unsupported_geometry,
                "triangle " + std::to_string(triangle) + " is not crossed through exactly two edges");
  }
  for (int i = 0; i < kNumPhases; ++i) {
    if (cell.piece[i].size() < 3 || cell.piece[i].size() > 4) {
      throw Error(ErrorKind::unsupported_geometry, "clipped piece is not a triangle or quadrilateral");
    }
    cell.area[i] = polygon_area(cell.piece[i]);
  }

  Vec2 dir = hits[1] - hits[0];
  if (dir.norm() <= tol) throw Error(ErrorKind::degenerate_cut, "interface piece shorter than tolerance");
  // Orient Gamma_T so that Omega^1 lies on its left.
  int probe = phase[0] == 0 ? 0 : (phase[1] == 0 ? 1 : 2);
  if (cross(dir, v[probe] - hits[0]) < 0.0) std::swap(hits[0], hits[1]);
  cell.gamma = {hits[0], hits[1]};
  dir = (hits[1] - hits[0]).normalized();
  cell.tangent = dir;
  cell.normal = rotate_cw(dir);

  // Gamma_T must be a single straight piece of the interface.
  const double h = std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
  if (std::abs(interface.signed_distance(cell.gamma.midpoint())) > 1e-9 * h) {
    throw Error(ErrorKind::unsupported_geometry,
                "interface bends inside triangle " + std::to_string(triangle));
  }
  return cell;
}

int side_of(const InterfacePolyline& interface, const Vec2& p, double tol) {
  const double d = interface.signed_distance(p);
  if (std::abs(d) < tol) throw Error(ErrorKind::degenerate_cut, "mesh node lies on the interface", d);
  return d > 0.0 ? 0 : 1;
}

}  // namespace

InterfacePolyline::InterfacePolyline(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw Error(ErrorKind::invalid_argument, "interface needs at least two vertices");
  closed_ = vertices_.size() > 3 && vertices_.front() == vertices_.back();
  for (int k = 0; k < num_segments(); ++k) {
    if (segment(k).length() <= 0.0) throw Error(ErrorKind::invalid_argument, "zero-length interface segment");
  }
}

double InterfacePolyline::signed_distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  double sign = 1.0;
  const int ns = num_segments();
  for (int k = 0; k < ns; ++k) {
    const Vec2 a = vertices_[k];
    const Vec2 d = vertices_[k + 1] - a;
    double t = (p - a).dot(d) / d.squaredNorm();
    int at_vertex = -1;
    if (t <= 0.0 && !segment_unbounded_before(k)) {
      t = 0.0;
      at_vertex = k;
    } else if (t >= 1.0 && !segment_unbounded_after(k)) {
      t = 1.0;
      at_vertex = k + 1;
    }
    const double dist = (p - (a + t * d)).norm();
    if (dist < best) {
      best = dist;
      if (at_vertex < 0) {
        sign = cross(d, p - a) >= 0.0 ? 1.0 : -1.0;
      } else {
        // Pseudo-normal at a polyline corner.
        int prev = at_vertex - 1, next = at_vertex;
        if (closed_) {
          if (prev < 0) prev = ns - 1;
          if (next == ns) next = 0;
        }
        Vec2 pn = Vec2::Zero();
        if (prev >= 0) pn += left_normal(vertices_[prev + 1] - vertices_[prev]);
        if (next < ns) pn += left_normal(vertices_[next + 1] - vertices_[next]);
        sign = (p - vertices_[at_vertex]).dot(pn) >= 0.0 ? 1.0 : -1.0;
      }
    }
  }
  return sign * best;
}

std::vector<double> InterfacePolyline::crossings(const Vec2& p, const Vec2& q, double tol) const {
  const Vec2 r = q - p;
  const double rl = r.norm();
  std::vector<double> hits;
  for (int k = 0; k < num_segments(); ++k) {
    const Vec2 a = vertices_[k];
    const Vec2 d = vertices_[k + 1] - a;
    const double dl = d.norm();
    const double denom = cross(r, d);
    if (std::abs(denom) <= 1e-14 * rl * dl) {
      // Parallel: only an overlap matters.
      if (std::abs(cross(a - p, r)) / rl <= tol) {
        const double t0 = (p - a).dot(d) / (dl * dl), t1 = (q - a).dot(d) / (dl * dl);
        const double lo = segment_unbounded_before(k) ? -std::numeric_limits<double>::infinity() : 0.0;
        const double hi = segment_unbounded_after(k) ? std::numeric_limits<double>::infinity() : 1.0;
        if (std::max(t0, t1) >= lo && std::min(t0, t1) <= hi) {
          throw Error(ErrorKind::unsupported_geometry, "interface segment collinear with a mesh edge");
        }
      }
      continue;
    }
    const double s = cross(a - p, d) / denom;
    const double t = cross(a - p, r) / denom;
    const double es = tol / rl, et = tol / dl;
    if (s < -es || s > 1.0 + es) continue;
    if (!segment_unbounded_before(k) && t < -et) continue;
    if (!segment_unbounded_after(k) && t > 1.0 + et) continue;
    hits.push_back(std::clamp(s, 0.0, 1.0));
  }
  std::sort(hits.begin(), hits.end());
  std::vector<double> merged;
  for (double s : hits) {
    if (merged.empty() || (s - merged.back()) * rl > tol) merged.push_back(s);
  }
  return merged;
}

InterfacePolyline InterfacePolyline::translated(const Vec2& offset) const {
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p += offset;
  return InterfacePolyline(std::move(v));
}

InterfacePolyline read_interface(std::istream& in) {
  std::string tag;
  long long n = 0;
  if (!(in >> tag >> n) || tag != "interface" || n < 2) {
    throw Error(ErrorKind::io_error, "expected 'interface <n>' header");
  }
  std::vector<Vec2> v(static_cast<std::size_t>(n));
  for (auto& p : v) {
    if (!(in >> p.x() >> p.y())) throw Error(ErrorKind::io_error, "truncated interface vertex list");
  }
  return InterfacePolyline(std::move(v));
}

InterfacePolyline read_interface_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open interface file " + path);
  return read_interface(in);
}

void write_interface(const InterfacePolyline& interface, std::ostream& out) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "interface " << interface.vertices().size() << '\n';
  for (const auto& p : interface.vertices()) out << p.x() << ' ' << p.y() << '\n';
}

CutCell clip_triangle(const std::array<Vec2, 3>& triangle, const InterfacePolyline& interface, double tol) {
  std::array<int, 3> phase{};
  for (int j = 0; j < 3; ++j) phase[j] = side_of(interface, triangle[j], tol);
  if (phase[0] == phase[1] && phase[1] == phase[2]) {
    throw Error(ErrorKind::unsupported_geometry, "triangle is not cut by the interface");
  }
  std::array<Vec2, 3> crossing{};
  for (int j = 0; j < 3; ++j) {
    const int jn = (j + 1) % 3;
    const auto hits = edge_crossings(triangle[j], triangle[jn], interface, tol);
    const std::size_t expected = phase[j] != phase[jn] ? 1 : 0;
    if (hits.size() != expected) {
      throw Error(ErrorKind::unsupported_geometry, "triangle edge crossed more than once");
    }
    if (expected) crossing[j] = hits.front();
  }
  return make_cut_cell(-1, triangle, phase, crossing, interface, tol);
}

InterfaceWeights interface_weights(double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error(ErrorKind::invalid_argument, "diffusivities must be positive");
  InterfaceWeights w;
  w.omega1 = k2 / (k1 + k2);
  w.omega2 = k1 / (k1 + k2);
  w.k_gamma = k1 * k2 / (k1 + k2);
  w.k_max = std::max(k1, k2);
  return w;
}

CutTopology::CutTopology(const Mesh& mesh, InterfacePolyline interface, double tol)
    : mesh_(&mesh), interface_(std::move(interface)), tol_(tol) {
  const int nv = mesh.num_nodes(), nt = mesh.num_triangles(), ne = mesh.num_edges();

  node_phase_.resize(nv);
  for (int n = 0; n < nv; ++n) node_phase_[n] = side_of(interface_, mesh.node(n), tol_);

  // Interface vertices strictly inside a triangle break the straight-cut
  // assumption.
  for (const auto& p : interface_.vertices()) {
    for (int t = 0; t < nt; ++t) {
      const auto v = mesh.vertices(t);
      const Eigen::Vector3d l = barycentric(v[0], v[1], v[2], p);
      const double margin = tol_ / mesh.diameter(t);
      if (l.minCoeff() > margin) {
        throw Error(ErrorKind::unsupported_geometry,
                    "interface vertex inside triangle " + std::to_string(t));
      }
    }
  }

  edge_cut_.assign(ne, 0);
  crossing_.assign(ne, Vec2::Zero());
  for (int i = 0; i < kNumPhases; ++i) {
    edge_in_[i].assign(ne, 0);
    ghost_[i].assign(ne, 0);
    tri_in_[i].assign(nt, 0);
    node_in_[i].assign(nv, 0);
  }
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = mesh.edge(e);
    const int pa = node_phase_[edge.nodes[0]], pb = node_phase_[edge.nodes[1]];
    const auto hits = edge_crossings(mesh.node(edge.nodes[0]), mesh.node(edge.nodes[1]), interface_, tol_);
    const std::size_t expected = pa != pb ? 1 : 0;
    if (hits.size() != expected) {
      throw Error(ErrorKind::unsupported_geometry,
                  "edge " + std::to_string(e) + " crossed " + std::to_string(hits.size()) + " times");
    }
    if (pa != pb) {
      edge_cut_[e] = 1;
      crossing_[e] = hits.front();
      edge_in_[0][e] = edge_in_[1][e] = 1;
    } else {
      edge_in_[pa][e] = 1;
    }
  }

  cut_index_.assign(nt, -1);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    const std::array<int, 3> phase{node_phase_[tri[0]], node_phase_[tri[1]], node_phase_[tri[2]]};
    if (phase[0] == phase[1] && phase[1] == phase[2]) {
      tri_in_[phase[0]][t] = 1;
      continue;
    }
    std::array<Vec2, 3> crossing{};
    for (int j = 0; j < 3; ++j) crossing[j] = crossing_[mesh.triangle_edges(t)[j]];
    CutCell cell = make_cut_cell(t, mesh.vertices(t), phase, crossing, interface_, tol_);
    cut_index_[t] = static_cast<int>(cells_.size());
    cells_.push_back(std::move(cell));
    tri_in_[0][t] = tri_in_[1][t] = 1;
  }

  for (int i = 0; i < kNumPhases; ++i) {
    for (int t = 0; t < nt; ++t) {
      if (!tri_in_[i][t]) continue;
      for (int v : mesh.triangle(t)) node_in_[i][v] = 1;
    }
    for (int e = 0; e < ne; ++e) {
      const Edge& edge = mesh.edge(e);
      if (!edge_in_[i][e] || edge.boundary()) continue;
      ghost_[i][e] = (cut_index_[edge.minus] >= 0 || cut_index_[edge.plus] >= 0) ? 1 : 0;
    }
  }
}

Segment CutTopology::edge_fragment(int e, int i) const {
  const Edge& edge = mesh_->edge(e);
  const Vec2& a = mesh_->node(edge.nodes[0]);
  const Vec2& b = mesh_->node(edge.nodes[1]);
  if (edge_cut_[e]) {
    return node_phase_[edge.nodes[0]] == i ? Segment{a, crossing_[e]} : Segment{crossing_[e], b};
  }
  return edge_in_[i][e] ? Segment{a, b} : Segment{a, a};
}

double CutTopology::piece_area(int t, int i) const {
  if (const CutCell* c = cut_cell(t)) return c->area[i];
  return tri_in_[i][t] ? mesh_->area(t) : 0.0;
}

std::vector<Vec2> CutTopology::piece(int t, int i) const {
  if (const CutCell* c = cut_cell(t)) return c->piece[i];
  if (!tri_in_[i][t]) return {};
  const auto v = mesh_->vertices(t);
  return {v[0], v[1], v[2]};
}

QuadratureRule CutTopology::region_rule(int t, int i, int degree, int refinements) const {
  if (const CutCell* c = cut_cell(t)) return polygon_rule(c->piece[i], degree, refinements);
  if (!tri_in_[i][t]) {
    QuadratureRule empty;
    empty.degree = degree;
    return empty;
  }
  const auto v = mesh_->vertices(t);
  return triangle_rule(v[0], v[1], v[2], degree, refinements);
}

std::vector<int> CutTopology::triangles(int i) const {
  std::vector<int> out;
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (tri_in_[i][t]) out.push_back(t);
  }
  return out;
}

std::vector<int> CutTopology::cut_triangles() const {
  std::vector<int> out;
  for (const auto& c : cells_) out.push_back(c.triangle);
  return out;
}

std::vector<int> CutTopology::edges(int i) const {
  std::vector<int> out;
  for (int e = 0; e < mesh_->num_edges(); ++e) {
    if (edge_in_[i][e]) out.push_back(e);
  }
  return out;
}

std::vector<int> CutTopology::cut_edges() const {
  std::vector<int> out;
  for (int e = 0; e < mesh_->num_edges(); ++e) {
    if (edge_cut_[e]) out.push_back(e);
  }
  return out;
}

std::vector<int> CutTopology::ghost_edges(int i) const {
  std::vector<int> out;
  for (int e = 0; e < mesh_->num_edges(); ++e) {
    if (ghost_[i][e]) out.push_back(e);
  }
  return out;
}

CutTopology classify(const Mesh& mesh, const InterfacePolyline& interface) {
  return CutTopology(mesh, interface, kOnInterfaceTolerance * mesh.domain_diameter());
}

}  // namespace cutflux
