#include "cutflux/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include "cutflux/errors.hpp"

namespace cutflux {

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  const int nv = num_nodes();
  const int nt = num_triangles();
  if (nv < 3 || nt < 1) throw Error(ErrorKind::invalid_argument, "mesh needs at least one triangle");

  areas_.resize(nt);
  diameters_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) throw Error(ErrorKind::invalid_argument, "triangle references unknown node");
    }
    const auto p = vertices(t);
    areas_[t] = signed_area(p[0], p[1], p[2]);
    if (!(areas_[t] > 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "triangle " + std::to_string(t) + " is degenerate or not counter-clockwise");
    }
    diameters_[t] = std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
  }

  // Edges in order of first appearance; interior edges keyed by sorted node pair.
  std::unordered_map<long long, int> lookup;
  lookup.reserve(static_cast<std::size_t>(3 * nt));
  triangle_edges_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    for (int j = 0; j < 3; ++j) {
      const int a = triangles_[t][j];
      const int b = triangles_[t][(j + 1) % 3];
      const long long key = static_cast<long long>(std::min(a, b)) * nv + std::max(a, b);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Edge e;
        e.nodes = {a, b};
        e.minus = t;
        lookup.emplace(key, num_edges());
        triangle_edges_[t][j] = num_edges();
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.plus >= 0) throw Error(ErrorKind::invalid_argument, "edge shared by more than two triangles");
        if (e.nodes[0] != b || e.nodes[1] != a) {
          throw Error(ErrorKind::invalid_argument, "inconsistent triangle orientation across an edge");
        }
        e.plus = t;
        triangle_edges_[t][j] = it->second;
      }
    }
  }
  // Interior edges are re-oriented from the lower to the higher node id; the
  // minus triangle is the one traversing the edge in that direction.
  for (auto& e : edges_) {
    if (!e.boundary() && e.nodes[0] > e.nodes[1]) {
      std::swap(e.nodes[0], e.nodes[1]);
      std::swap(e.minus, e.plus);
    }
    const Vec2 d = nodes_[e.nodes[1]] - nodes_[e.nodes[0]];
    e.length = d.norm();
    e.normal = rotate_cw(d) / e.length;
  }

  node_triangles_.assign(nv, {});
  node_edges_.assign(nv, {});
  boundary_node_.assign(nv, 0);
  for (int t = 0; t < nt; ++t) {
    for (int v : triangles_[t]) node_triangles_[v].push_back(t);
  }
  for (int e = 0; e < num_edges(); ++e) {
    for (int v : edges_[e].nodes) {
      node_edges_[v].push_back(e);
      if (edges_[e].boundary()) boundary_node_[v] = 1;
    }
  }
}

std::array<Vec2, 3> Mesh::vertices(int t) const {
  const auto& tri = triangles_[t];
  return {nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]};
}

int Mesh::local_vertex(int t, int n) const {
  for (int j = 0; j < 3; ++j) {
    if (triangles_[t][j] == n) return j;
  }
  return -1;
}

int Mesh::local_edge(int t, int e) const {
  for (int j = 0; j < 3; ++j) {
    if (triangle_edges_[t][j] == e) return j;
  }
  return -1;
}

double Mesh::inradius(int t) const {
  const auto& te = triangle_edges_[t];
  const double perimeter = edges_[te[0]].length + edges_[te[1]].length + edges_[te[2]].length;
  return 2.0 * areas_[t] / perimeter;
}

Vec2 Mesh::centroid(int t) const {
  const auto p = vertices(t);
  return (p[0] + p[1] + p[2]) / 3.0;
}

double Mesh::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

double Mesh::max_shape_ratio() const {
  double r = 0.0;
  for (int t = 0; t < num_triangles(); ++t) r = std::max(r, diameters_[t] / (2.0 * inradius(t)));
  return r;
}

double Mesh::domain_diameter() const {
  Vec2 lo = nodes_.front(), hi = nodes_.front();
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

Mesh build_structured_mesh(int nx, int ny, const Rect& rect) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::invalid_argument, "cell counts must be positive");
  if (!(rect.xmax > rect.xmin) || !(rect.ymax > rect.ymin)) {
    throw Error(ErrorKind::invalid_argument, "degenerate rectangle");
  }
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Exact end points so boundary nodes sit exactly on the rectangle.
      const double x = i == nx ? rect.xmax : rect.xmin + (rect.xmax - rect.xmin) * i / nx;
      const double y = j == ny ? rect.ymax : rect.ymin + (rect.ymax - rect.ymin) * j / ny;
      nodes.emplace_back(x, y);
    }
  }
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      tris.push_back({ll, lr, ur});
      tris.push_back({ll, ur, ul});
    }
  }
  return Mesh(std::move(nodes), std::move(tris));
}

Mesh read_mesh(std::istream& in) {
  std::string tag;
  long long count = 0;
  if (!(in >> tag >> count) || tag != "nodes" || count < 3) {
    throw Error(ErrorKind::io_error, "expected 'nodes <V>' header");
  }
  std::vector<Vec2> nodes(static_cast<std::size_t>(count));
  for (auto& p : nodes) {
    if (!(in >> p.x() >> p.y())) throw Error(ErrorKind::io_error, "truncated node list");
  }
  if (!(in >> tag >> count) || tag != "triangles" || count < 1) {
    throw Error(ErrorKind::io_error, "expected 'triangles <F>' header");
  }
  std::vector<std::array<int, 3>> tris(static_cast<std::size_t>(count));
  for (auto& t : tris) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw Error(ErrorKind::io_error, "truncated triangle list");
  }
  return Mesh(std::move(nodes), std::move(tris));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "nodes " << mesh.num_nodes() << '\n';
  for (const auto& p : mesh.nodes()) out << p.x() << ' ' << p.y() << '\n';
  out << "triangles " << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

int node_edge_sign(const Mesh& mesh, int node, int edge) {
  if (edge < 0 || edge >= mesh.num_edges()) throw Error(ErrorKind::invalid_argument, "unknown edge");
  const Edge& e = mesh.edge(edge);
  if (e.nodes[0] != node && e.nodes[1] != node) {
    throw Error(ErrorKind::invalid_argument, "node is not an endpoint of the edge");
  }
  // nodes[0] -> nodes[1] rotated clockwise is the normal by construction.
  return e.nodes[0] == node ? 1 : -1;
}

NodePatch node_patch(const Mesh& mesh, int node) {
  if (node < 0 || node >= mesh.num_nodes()) throw Error(ErrorKind::invalid_argument, "unknown node");
  NodePatch p;
  p.node = node;
  p.triangles = mesh.node_triangles(node);
  p.edges = mesh.node_edges(node);
  p.interior = !mesh.boundary_node(node);
  return p;
}

}  // namespace cutflux
