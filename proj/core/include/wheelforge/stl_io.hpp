#pragma once

#include <string>

#include "wheelforge/trimesh.hpp"

namespace wheelforge::mesh {

/// Binary STL: 80-byte header, little-endian uint32 triangle count, then
/// 50 bytes per triangle (normal + 3 vertices as float32, uint16 pad).
void write_binary_stl(const std::string& path, const TriMesh& mesh);

/// Read a binary STL back into an indexed mesh, welding vertices that
/// coincide bit-exactly.
TriMesh read_binary_stl(const std::string& path);

}  // namespace wheelforge::mesh
