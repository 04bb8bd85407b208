#include "wheelforge/stl_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <tuple>

#include "wheelforge/errors.hpp"

namespace wheelforge::mesh {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary STL writer assumes a little-endian host");

void put_f32(std::uint8_t*& p, float v) {
  std::memcpy(p, &v, 4);
  p += 4;
}

float get_f32(const std::uint8_t*& p) {
  float v;
  std::memcpy(&v, p, 4);
  p += 4;
  return v;
}

}  // namespace

void write_binary_stl(const std::string& path, const TriMesh& mesh) {
  if (mesh.empty()) throw EmptyMesh("write_binary_stl: no triangles");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);

  std::uint8_t header[84] = {};
  std::memcpy(header, "wheelforge mesh", 15);
  const std::uint32_t n = std::uint32_t(mesh.triangles.size());
  std::memcpy(header + 80, &n, 4);
  out.write(reinterpret_cast<const char*>(header), sizeof header);

  std::uint8_t rec[50];
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    const Eigen::Vector3d& b = mesh.vertices[t[1]];
    const Eigen::Vector3d& c = mesh.vertices[t[2]];
    Eigen::Vector3d nrm = (b - a).cross(c - a);
    const double len = nrm.norm();
    if (len > 0.0) nrm /= len;
    std::uint8_t* p = rec;
    for (int k = 0; k < 3; ++k) put_f32(p, float(nrm[k]));
    for (const Eigen::Vector3d* v : {&a, &b, &c})
      for (int k = 0; k < 3; ++k) put_f32(p, float((*v)[k]));
    p[0] = p[1] = 0;  // attribute byte count
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!out.good()) throw IoError("write failed: " + path);
}

TriMesh read_binary_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::uint8_t header[84];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in.good()) throw IoError("truncated STL header: " + path);
  std::uint32_t n;
  std::memcpy(&n, header + 80, 4);

  TriMesh mesh;
  mesh.triangles.reserve(n);
  std::map<std::tuple<float, float, float>, int> weld;
  std::uint8_t rec[50];
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(rec), sizeof rec);
    if (!in.good()) throw IoError("truncated STL record: " + path);
    const std::uint8_t* p = rec + 12;  // skip the stored normal
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const float x = get_f32(p), y = get_f32(p), z = get_f32(p);
      auto [it, inserted] = weld.try_emplace({x, y, z}, int(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back(Eigen::Vector3d(x, y, z));
      tri[k] = it->second;
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

}  // namespace wheelforge::mesh
