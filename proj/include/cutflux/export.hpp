#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cutflux/estimators.hpp"

namespace cutflux {

template <class T>
using NamedData = std::pair<std::string, std::vector<T>>;

/// Data attached to the mesh: point data per node, cell data per triangle.
struct VtkFields {
  std::vector<NamedData<double>> point_scalars;
  std::vector<NamedData<double>> cell_scalars;
  std::vector<NamedData<Vec2>> cell_vectors;
};

/// Legacy ASCII unstructured grid of the mesh triangles.
void write_vtk(const Mesh& mesh, const VtkFields& fields, std::ostream& out);

/// Cut cells split into their physical pieces (fan triangulated). Cell data
/// of a parent triangle is repeated on its pieces; the piecewise solution
/// "u" is sampled at the piece vertices, the flux at each sub-triangle
/// centroid, and a "phase" cell scalar is added.
void write_vtk_clipped(const PrimalField& u, const FluxEval* sigma, const VtkFields& cell_fields, std::ostream& out);

/// File variants; an unwritable path raises io-error.
void export_vtk(const Mesh& mesh, const VtkFields& fields, const std::string& path);
void export_vtk_clipped(const PrimalField& u, const FluxEval* sigma, const VtkFields& cell_fields,
                        const std::string& path);

}  // namespace cutflux
