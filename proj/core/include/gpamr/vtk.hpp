// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gpamr/mesh.hpp"

namespace gpamr {

/// Named per-active-cell scalar field for export.
using CellField = std::pair<std::string, const std::vector<double>*>;

/// Write the mesh and cell fields as a legacy ASCII VTK unstructured grid
/// (quad cells). Throws on I/O failure with the path in the message.
void write_vtk(const QuadMesh& mesh, const std::vector<CellField>& fields,
               const std::filesystem::path& path,
               const std::string& title = "gpamr");

}  // namespace gpamr
