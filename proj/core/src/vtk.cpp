// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/vtk.hpp"

#include <fstream>
#include <stdexcept>

namespace gpamr {

void write_vtk(const QuadMesh& mesh, const std::vector<CellField>& fields,
               const std::filesystem::path& path, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path.string());
  out.precision(12);

  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const Vec2& p = mesh.node(i);
    out << p.x() << ' ' << p.y() << " 0\n";
  }

  const int nc = mesh.n_active();
  out << "CELLS " << nc << ' ' << nc * 5 << '\n';
  for (int a = 0; a < nc; ++a) {
    const auto& conn = mesh.cell_nodes(a);
    out << "4 " << conn[0] << ' ' << conn[1] << ' ' << conn[2] << ' ' << conn[3] << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (int a = 0; a < nc; ++a) out << "9\n";

  if (!fields.empty()) {
    out << "CELL_DATA " << nc << '\n';
    for (const auto& [name, values] : fields) {
      if (static_cast<int>(values->size()) != nc)
        throw std::runtime_error("write_vtk: field '" + name + "' has wrong size for " +
                                 path.string());
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : *values) out << v << '\n';
    }
  }
  if (!out) throw std::runtime_error("write_vtk: write failed for " + path.string());
}

}  // namespace gpamr
