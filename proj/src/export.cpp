#include "cutflux/export.hpp"

#include <fstream>
#include <limits>
#include <ostream>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

struct SubTriangle {
  std::array<Vec2, 3> v;
  int parent;
  int phase;
};

void header(std::ostream& out) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "# vtk DataFile Version 3.0\ncutflux\nASCII\nDATASET UNSTRUCTURED_GRID\n";
}

void cells_block(std::ostream& out, int n) {
  out << "CELLS " << n << ' ' << 4 * n << '\n';
  for (int t = 0; t < n; ++t) out << "3 " << 3 * t << ' ' << 3 * t + 1 << ' ' << 3 * t + 2 << '\n';
  out << "CELL_TYPES " << n << '\n';
  for (int t = 0; t < n; ++t) out << "5\n";
}

void scalars(std::ostream& out, const std::string& name, const std::vector<double>& values) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) out << v << '\n';
}

void vectors(std::ostream& out, const std::string& name, const std::vector<Vec2>& values) {
  out << "VECTORS " << name << " double\n";
  for (const Vec2& v : values) out << v.x() << ' ' << v.y() << " 0\n";
}

void check_sizes(const VtkFields& fields, std::size_t points, std::size_t cells) {
  for (const auto& [name, v] : fields.point_scalars) {
    if (v.size() != points) throw Error(ErrorKind::invalid_argument, "point field '" + name + "' has the wrong size");
  }
  for (const auto& [name, v] : fields.cell_scalars) {
    if (v.size() != cells) throw Error(ErrorKind::invalid_argument, "cell field '" + name + "' has the wrong size");
  }
  for (const auto& [name, v] : fields.cell_vectors) {
    if (v.size() != cells) throw Error(ErrorKind::invalid_argument, "cell field '" + name + "' has the wrong size");
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_vtk(const Mesh& mesh, const VtkFields& fields, std::ostream& out) {
  check_sizes(fields, mesh.num_nodes(), mesh.num_triangles());
  header(out);
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const Vec2& p : mesh.nodes()) out << p.x() << ' ' << p.y() << " 0\n";
  const int n = mesh.num_triangles();
  out << "CELLS " << n << ' ' << 4 * n << '\n';
  for (const auto& tri : mesh.triangles()) out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  out << "CELL_TYPES " << n << '\n';
  for (int t = 0; t < n; ++t) out << "5\n";
  if (!fields.point_scalars.empty()) {
    out << "POINT_DATA " << mesh.num_nodes() << '\n';
    for (const auto& [name, v] : fields.point_scalars) scalars(out, name, v);
  }
  if (!fields.cell_scalars.empty() || !fields.cell_vectors.empty()) {
    out << "CELL_DATA " << n << '\n';
    for (const auto& [name, v] : fields.cell_scalars) scalars(out, name, v);
    for (const auto& [name, v] : fields.cell_vectors) vectors(out, name, v);
  }
}

void write_vtk_clipped(const PrimalField& u, const FluxEval* sigma, const VtkFields& cell_fields, std::ostream& out) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  if (!cell_fields.point_scalars.empty()) {
    throw Error(ErrorKind::invalid_argument, "clipped export takes cell data only");
  }
  check_sizes(cell_fields, 0, mesh.num_triangles());

  std::vector<SubTriangle> subs;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const CutCell* cell = topology.cut_cell(t);
    if (!cell) {
      subs.push_back({mesh.vertices(t), t, topology.triangle_phase(t)});
      continue;
    }
    for (int i = 0; i < kNumPhases; ++i) {
      const auto& poly = cell->piece[i];
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) subs.push_back({{poly[0], poly[k], poly[k + 1]}, t, i});
    }
  }
  const int n = static_cast<int>(subs.size());
  header(out);
  out << "POINTS " << 3 * n << " double\n";
  for (const auto& s : subs) {
    for (const Vec2& p : s.v) out << p.x() << ' ' << p.y() << " 0\n";
  }
  cells_block(out, n);
  out << "POINT_DATA " << 3 * n << '\n';
  std::vector<double> values;
  for (const auto& s : subs) {
    for (const Vec2& p : s.v) values.push_back(u.value(s.phase, s.parent, p));
  }
  scalars(out, "u", values);
  out << "CELL_DATA " << n << '\n';
  std::vector<double> phase, parent;
  for (const auto& s : subs) {
    phase.push_back(s.phase + 1);
    parent.push_back(s.parent);
  }
  scalars(out, "phase", phase);
  scalars(out, "parent", parent);
  for (const auto& [name, v] : cell_fields.cell_scalars) {
    std::vector<double> rep;
    for (const auto& s : subs) rep.push_back(v[s.parent]);
    scalars(out, name, rep);
  }
  for (const auto& [name, v] : cell_fields.cell_vectors) {
    std::vector<Vec2> rep;
    for (const auto& s : subs) rep.push_back(v[s.parent]);
    vectors(out, name, rep);
  }
  if (sigma) {
    std::vector<Vec2> flux;
    for (const auto& s : subs) flux.push_back((*sigma)(s.parent, s.phase, (s.v[0] + s.v[1] + s.v[2]) / 3.0));
    vectors(out, "sigma", flux);
  }
}

void export_vtk(const Mesh& mesh, const VtkFields& fields, const std::string& path) {
  std::ofstream out = open_output(path);
  write_vtk(mesh, fields, out);
  if (!out) throw Error(ErrorKind::io_error, "failed writing '" + path + "'");
}

void export_vtk_clipped(const PrimalField& u, const FluxEval* sigma, const VtkFields& cell_fields,
                        const std::string& path) {
  std::ofstream out = open_output(path);
  write_vtk_clipped(u, sigma, cell_fields, out);
  if (!out) throw Error(ErrorKind::io_error, "failed writing '" + path + "'");
}

}  // namespace cutflux
