#include <Eigen/Core>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "wheelforge/depthsynth.hpp"
#include "wheelforge/errors.hpp"
#include "wheelforge/meshproc.hpp"
#include "wheelforge/raster_geom.hpp"
#include "wheelforge/recon.hpp"
#include "wheelforge/rim_template.hpp"
#include "wheelforge/rng.hpp"
#include "wheelforge/topo.hpp"
#include "wheelforge/trimesh.hpp"

using namespace wheelforge;
using depthsynth::DepthMap;
using mesh::TriMesh;
using recon::PointCloud;
using recon::VoxelGrid;

namespace {

constexpr double kPi = 3.14159265358979323846;

VoxelGrid sphere_grid(int n, double radius) {
  VoxelGrid g;
  g.nx = g.ny = g.nz = n;
  g.voxel_size = 1.0 / (n - 1);
  g.origin = Eigen::Vector3d(-0.5, -0.5, -0.5);
  g.field.resize(g.node_count());
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        g.field[g.index(ix, iy, iz)] =
            float(g.node_position(ix, iy, iz).norm() - radius);
  return g;
}

/// Subdivided icosahedron of the given radius; subdiv levels quadruple the
/// triangle count each (20 * 4^levels triangles).
TriMesh icosphere(double radius, int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : raw)
    m.vertices.push_back(Eigen::Vector3d(v[0], v[1], v[2]).normalized() * radius);
  const int f[20][3] = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10},
                        {0, 10, 11}, {1, 5, 9},   {5, 11, 4},  {11, 10, 2},
                        {10, 7, 6},  {7, 1, 8},   {3, 9, 4},   {3, 4, 2},
                        {3, 2, 6},   {3, 6, 8},   {3, 8, 9},   {4, 9, 5},
                        {2, 4, 11},  {6, 2, 10},  {8, 6, 7},   {9, 8, 1}};
  for (const auto& tr : f) m.triangles.push_back({tr[0], tr[1], tr[2]});

  for (int lv = 0; lv < levels; ++lv) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = int(m.vertices.size());
      m.vertices.push_back(
          (0.5 * (m.vertices[a] + m.vertices[b])).normalized() * radius);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tr : m.triangles) {
      const int ab = mid(tr[0], tr[1]), bc = mid(tr[1], tr[2]),
                ca = mid(tr[2], tr[0]);
      next.push_back({tr[0], ab, ca});
      next.push_back({tr[1], bc, ab});
      next.push_back({tr[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles.swap(next);
  }
  return m;
}

std::vector<std::uint8_t> wheel_mask(const Eigen::VectorXd& segment, int n_radial,
                                     int n_theta, int n_seg, int raster_size,
                                     const RimTemplate& tpl) {
  topo::DensityField f;
  f.segment = segment;
  f.n_radial = n_radial;
  f.n_theta = n_theta;
  f.n_seg = n_seg;
  topo::rasterize_wheel(f, raster_size, tpl);
  std::vector<std::uint8_t> mask(f.wheel_raster.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = f.wheel_raster[i] >= 0.5f ? 1 : 0;
  return mask;
}

Eigen::VectorXd spoke_segment(int n_radial, int n_theta, int c0, int c1) {
  Eigen::VectorXd seg = Eigen::VectorXd::Zero(Eigen::Index(n_radial) * n_theta);
  for (int r = 0; r < n_radial; ++r)
    for (int c = c0; c < c1; ++c) seg[Eigen::Index(r) * n_theta + c] = 1.0;
  return seg;
}

/// Hand-built solid-disc depth map: every pixel inside the face radius is
/// valid with the template's radial depth (no bolt or bore holes).
DepthMap solid_disc_depth(const RimTemplate& tpl, int n) {
  DepthMap d;
  d.width = d.height = n;
  d.mm_per_pixel = raster::mm_per_pixel(tpl, n);
  d.face_radius_mm = tpl.design_outer_radius();
  d.values.assign(d.pixel_count(), 0.0f);
  d.valid.assign(d.pixel_count(), 0);
  for (int py = 0; py < n; ++py)
    for (int px = 0; px < n; ++px) {
      const double u = 2.0 * px - (n - 1), v = 2.0 * py - (n - 1);
      const double r = std::sqrt(u * u + v * v) * 0.5 * d.mm_per_pixel;
      if (r > d.face_radius_mm) continue;
      const std::size_t i = std::size_t(py) * n + px;
      d.values[i] = float(tpl.spoke_depth_profile(r));
      d.valid[i] = 1;
    }
  return d;
}

}  // namespace

TEST_CASE("spoke_to_points back-projects valid pixels") {
  DepthMap d;
  d.width = d.height = 16;
  d.mm_per_pixel = 2.0;
  d.values.assign(d.pixel_count(), 7.5f);
  d.valid.assign(d.pixel_count(), 1);

  SUBCASE("uniform solid frame is a planar grid of points") {
    const PointCloud pc = recon::spoke_to_points(d);
    CHECK(pc.points.size() == d.pixel_count());
    for (const auto& p : pc.points) CHECK(p.z() == doctest::Approx(7.5));
    // center pixel (7.5, 7.5) maps to the axis
    double min_norm = 1e30;
    for (const auto& p : pc.points)
      min_norm = std::min(min_norm, std::hypot(p.x(), p.y()));
    CHECK(min_norm == doctest::Approx(std::sqrt(2.0) * 0.5 * 2.0).epsilon(1e-9));
  }

  SUBCASE("exactly four valid pixels give exactly four points") {
    std::fill(d.valid.begin(), d.valid.end(), std::uint8_t(0));
    d.valid[0] = d.valid[5] = d.valid[37] = d.valid[255] = 1;
    CHECK(recon::spoke_to_points(d).points.size() == 4);
  }

  SUBCASE("face radius excludes rim-ring pixels, count matches a pixel scan") {
    d.face_radius_mm = 10.0;  // pixels farther than 10 mm from center drop
    const PointCloud pc = recon::spoke_to_points(d);
    std::size_t expect = 0;
    for (int py = 0; py < 16; ++py)
      for (int px = 0; px < 16; ++px) {
        const double x = (px - 7.5) * 2.0, y = (py - 7.5) * 2.0;
        if (x * x + y * y <= 100.0) ++expect;
      }
    CHECK(pc.points.size() == expect);
    CHECK(expect > 0);
    CHECK(expect < d.pixel_count());
  }

  SUBCASE("no valid pixels is an error") {
    std::fill(d.valid.begin(), d.valid.end(), std::uint8_t(0));
    CHECK_THROWS_AS(recon::spoke_to_points(d), EmptyMask);
  }
}

TEST_CASE("spoke count on a synthesized five-spoke design matches the oracle") {
  RimTemplate tpl;
  const int N = 256;
  const auto mask = wheel_mask(spoke_segment(24, 32, 10, 18), 24, 32, 5, N, tpl);
  const DepthMap d = depthsynth::synthesize_depth(mask, N, N, tpl);
  const PointCloud pc = recon::spoke_to_points(d);

  std::size_t expect = 0;
  const double c = (N - 1) / 2.0;
  for (int py = 0; py < N; ++py)
    for (int px = 0; px < N; ++px) {
      if (!d.valid[std::size_t(py) * N + px]) continue;
      const double x = (px - c) * d.mm_per_pixel, y = (py - c) * d.mm_per_pixel;
      if (x * x + y * y <= d.face_radius_mm * d.face_radius_mm) ++expect;
    }
  CHECK(pc.points.size() == expect);
  CHECK(expect > 1000);
}

TEST_CASE("rim_reference_points samples the template surfaces") {
  RimTemplate tpl;

  SUBCASE("four angular samples land on the four axes") {
    const auto clouds = recon::rim_reference_points(tpl, 4, 4);
    REQUIRE(clouds.size() == 3);
    for (const auto& c : clouds) {
      REQUIRE(!c.points.empty());
      REQUIRE(c.points.size() % 4 == 0);
      for (std::size_t i = 0; i < c.points.size(); i += 4) {
        const double r = std::hypot(c.points[i].x(), c.points[i].y());
        CHECK(std::abs(c.points[i].y()) <= 1e-9 * std::max(1.0, r));
        CHECK(std::abs(c.points[i + 1].x()) <= 1e-9 * std::max(1.0, r));
        CHECK(std::abs(c.points[i + 2].y()) <= 1e-9 * std::max(1.0, r));
        CHECK(std::abs(c.points[i + 3].x()) <= 1e-9 * std::max(1.0, r));
      }
    }
  }

  SUBCASE("doubling angular samples doubles every cloud") {
    const auto a = recon::rim_reference_points(tpl, 16, 8);
    const auto b = recon::rim_reference_points(tpl, 32, 8);
    for (int i = 0; i < 3; ++i)
      CHECK(b[i].points.size() == 2 * a[i].points.size());
  }

  SUBCASE("barrel points sit exactly at the rim radius") {
    const auto clouds = recon::rim_reference_points(tpl, 32, 16);
    const double z_face = tpl.spoke_depth_profile(tpl.design_outer_radius());
    int barrel = 0;
    for (const auto& p : clouds[0].points) {
      if (p.z() <= z_face + 1e-12) continue;  // front flange ring
      CHECK(std::hypot(p.x(), p.y()) ==
            doctest::Approx(tpl.rim_radius()).epsilon(1e-12));
      ++barrel;
    }
    CHECK(barrel > 0);
  }

  SUBCASE("tags cover outer, inner, and disc groups") {
    const auto clouds = recon::rim_reference_points(tpl, 16, 8);
    CHECK(clouds[0].source_tag == recon::SourceTag::RimOuter);
    CHECK(clouds[1].source_tag == recon::SourceTag::RimInner);
    CHECK(clouds[2].source_tag == recon::SourceTag::Disc);
  }

  CHECK_THROWS_AS(recon::rim_reference_points(tpl, 3, 16), ConfigInvalid);
  CHECK_THROWS_AS(recon::rim_reference_points(tpl, 16, 3), ConfigInvalid);
}

TEST_CASE("fuse_to_grid centers, stamps, and stays in [0,1]") {
  SUBCASE("single point occupies one stamped neighborhood at grid center") {
    PointCloud c;
    c.points.emplace_back(3.0, -2.0, 5.0);
    const VoxelGrid g = recon::fuse_to_grid({c}, 1.0);
    const Eigen::Vector3d center =
        g.origin + 0.5 * g.voxel_size *
                       Eigen::Vector3d(g.nx - 1, g.ny - 1, g.nz - 1);
    CHECK(center.norm() <= 1e-12);  // centroid-centered coordinates

    float peak = 0.0f;
    Eigen::Vector3d peak_pos = Eigen::Vector3d::Zero();
    double far_mass = 0.0;
    for (int iz = 0; iz < g.nz; ++iz)
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
          const float v = g.at(ix, iy, iz);
          const Eigen::Vector3d pos = g.node_position(ix, iy, iz);
          if (v > peak) {
            peak = v;
            peak_pos = pos;
          }
          // stamp spans 2 nodes, the blur adds 2 more per side: Chebyshev 3
          if (pos.lpNorm<Eigen::Infinity>() > 3.5 * g.voxel_size) far_mass += v;
        }
    CHECK(peak > 0.0f);
    CHECK(peak_pos.norm() <= 2.0 * g.voxel_size);
    CHECK(far_mass == 0.0);
  }

  SUBCASE("fusing a cloud with its duplicate is idempotent") {
    Rng rng(99);
    PointCloud c;
    for (int i = 0; i < 200; ++i)
      c.points.emplace_back(rng.next_double() * 10, rng.next_double() * 8,
                            rng.next_double() * 6);
    const VoxelGrid one = recon::fuse_to_grid({c}, 1.5);
    const VoxelGrid two = recon::fuse_to_grid({c, c}, 1.5);
    REQUIRE(one.field.size() == two.field.size());
    CHECK(one.nx == two.nx);
    CHECK(one.field == two.field);
  }

  SUBCASE("sphere shell occupies a band at the shell radius") {
    PointCloud c;
    const double r = 50.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {  // Fibonacci sphere
      const double z = 1.0 - 2.0 * (i + 0.5) / n;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = kPi * (1.0 + std::sqrt(5.0)) * i;
      c.points.emplace_back(r * rho * std::cos(th), r * rho * std::sin(th),
                            r * z);
    }
    const VoxelGrid g = recon::fuse_to_grid({c}, 2.0);
    int occupied = 0;
    for (int iz = 0; iz < g.nz; ++iz)
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
          const float v = g.at(ix, iy, iz);
          CHECK(v >= 0.0f);
          CHECK(v <= 1.0f);
          if (v < 0.5f) continue;
          ++occupied;
          const double dist = g.node_position(ix, iy, iz).norm();
          CHECK(dist >= r - 2.0 * g.voxel_size);
          CHECK(dist <= r + 2.0 * g.voxel_size);
        }
    CHECK(occupied > 500);
  }

  CHECK_THROWS_AS(recon::fuse_to_grid({}, 1.0), EmptyList);
  PointCloud bad;
  bad.points.emplace_back(0.0, 0.0, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(recon::fuse_to_grid({bad}, 1.0), ConfigInvalid);
  PointCloud ok;
  ok.points.emplace_back(0, 0, 0);
  CHECK_THROWS_AS(recon::fuse_to_grid({ok}, 0.0), ConfigInvalid);
}

TEST_CASE("marching_cubes: analytic sphere comes out closed and sized right") {
  const VoxelGrid g = sphere_grid(64, 0.4);
  const TriMesh m = recon::marching_cubes(g, 0.0);
  REQUIRE(!m.empty());
  CHECK(mesh::is_watertight(m));
  CHECK(mesh::euler_characteristic(m) == 2);
  const double vol = mesh::signed_volume(m);
  const double expect = 4.0 / 3.0 * kPi * 0.4 * 0.4 * 0.4;
  CHECK(vol == doctest::Approx(expect).epsilon(0.02));

  SUBCASE("output is deterministic") {
    const TriMesh again = recon::marching_cubes(g, 0.0);
    REQUIRE(again.vertices.size() == m.vertices.size());
    REQUIRE(again.triangles.size() == m.triangles.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
      CHECK(again.vertices[i] == m.vertices[i]);
    CHECK(again.triangles == m.triangles);
  }

  SUBCASE("halving the voxel size moves the volume by under 3%") {
    const TriMesh coarse = recon::marching_cubes(sphere_grid(32, 0.4), 0.0);
    const double cv = mesh::signed_volume(coarse);
    CHECK(std::abs(cv - vol) / vol < 0.03);
  }
}

TEST_CASE("marching_cubes: degenerate fields and sheets") {
  SUBCASE("constant field has no surface") {
    VoxelGrid g;
    g.nx = g.ny = g.nz = 4;
    g.voxel_size = 1.0;
    g.field.assign(g.node_count(), 0.25f);
    CHECK_THROWS_AS(recon::marching_cubes(g, 0.5), NoSurface);
  }

  SUBCASE("axis-aligned half-space yields a planar sheet on the plane") {
    VoxelGrid g;
    g.nx = g.ny = g.nz = 8;
    g.voxel_size = 1.0;
    g.field.resize(g.node_count());
    for (int iz = 0; iz < 8; ++iz)
      for (int iy = 0; iy < 8; ++iy)
        for (int ix = 0; ix < 8; ++ix)
          g.field[g.index(ix, iy, iz)] = float(ix) - 3.4f;
    const TriMesh m = recon::marching_cubes(g, 0.0);
    REQUIRE(!m.empty());
    for (const auto& v : m.vertices)
      CHECK(v.x() == doctest::Approx(3.4).epsilon(1e-6));
    CHECK_FALSE(mesh::is_watertight(m));  // sheet touches the grid boundary
  }

  SUBCASE("random interior fields always close when padded by outside values") {
    Rng rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
      VoxelGrid g;
      g.nx = g.ny = g.nz = 12;
      g.voxel_size = 1.0;
      g.field.resize(g.node_count());
      for (int iz = 0; iz < 12; ++iz)
        for (int iy = 0; iy < 12; ++iy)
          for (int ix = 0; ix < 12; ++ix) {
            const bool boundary = ix == 0 || iy == 0 || iz == 0 || ix == 11 ||
                                  iy == 11 || iz == 11;
            g.field[g.index(ix, iy, iz)] =
                boundary ? 1.0f : float(rng.next_double() * 2.0 - 1.0);
          }
      TriMesh m;
      try {
        m = recon::marching_cubes(g, 0.0);
      } catch (const NoSurface&) {
        continue;  // all-positive draw
      }
      REQUIRE(mesh::is_watertight(m));
      CHECK(mesh::signed_volume(m) > 0.0);
    }
  }
}

TEST_CASE("postprocess: identity, component filter, decimation") {
  SUBCASE("no-op settings return the mesh unchanged") {
    const TriMesh s = icosphere(1.0, 3);
    const TriMesh r = recon::postprocess(s, 0, int(s.triangle_count()));
    REQUIRE(r.vertices.size() == s.vertices.size());
    REQUIRE(r.triangles.size() == s.triangles.size());
    for (std::size_t i = 0; i < s.vertices.size(); ++i)
      CHECK(r.vertices[i] == s.vertices[i]);
    CHECK(r.triangles == s.triangles);
  }

  SUBCASE("small artifact component is removed") {
    TriMesh s = icosphere(1.0, 3);
    const std::size_t keep = s.triangle_count();
    TriMesh tiny = icosphere(0.05, 0);
    const int off = int(s.vertices.size());
    for (const auto& v : tiny.vertices) s.vertices.push_back(v + Eigen::Vector3d(5, 5, 5));
    for (const auto& t : tiny.triangles)
      s.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
    const TriMesh r = recon::postprocess(s, 0, int(s.triangle_count()));
    CHECK(r.triangles.size() == keep);
    CHECK(mesh::is_watertight(r));
  }

  SUBCASE("smoothing keeps the volume within 5%") {
    const TriMesh s = icosphere(1.0, 4);
    const TriMesh r = recon::postprocess(s, 10, int(s.triangle_count()));
    CHECK(mesh::is_watertight(r));
    CHECK(std::abs(mesh::signed_volume(r) - mesh::signed_volume(s)) /
              mesh::signed_volume(s) <
          0.05);
  }

  SUBCASE("quadric decimation hits the budget and keeps the volume") {
    const TriMesh s = icosphere(1.0, 5);  // 20480 triangles
    const TriMesh r = recon::postprocess(s, 0, 4096);
    CHECK(r.triangle_count() <= 4096);
    CHECK(r.triangle_count() > 2000);
    CHECK(mesh::is_watertight(r));
    CHECK(mesh::euler_characteristic(r) == 2);
    const double dv = std::abs(mesh::signed_volume(r) - mesh::signed_volume(s));
    CHECK(dv / mesh::signed_volume(s) < 0.02);
  }

  CHECK_THROWS_AS(recon::postprocess(TriMesh{}, 0, 100), EmptyMesh);
}

TEST_CASE("reconstruct_wheel: solid disc becomes a closed genus-0 solid") {
  RimTemplate tpl;
  recon::ReconConfig cfg;
  cfg.voxel_size = 4.0;
  cfg.target_triangles = 30000;
  cfg.angular_samples = 512;
  cfg.axial_samples = 96;

  const DepthMap d = solid_disc_depth(tpl, 256);
  const TriMesh m = recon::reconstruct_wheel(d, tpl, cfg);

  CHECK(mesh::is_watertight(m));
  CHECK(mesh::euler_characteristic(m) == 2);
  CHECK(mesh::signed_volume(m) > 0.0);

  Eigen::Vector3d lo, hi;
  mesh::bounding_box(m, lo, hi);
  const double dia = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  CHECK(dia >= 0.95 * tpl.rim_diameter);
  CHECK(dia <= 1.05 * tpl.rim_diameter);
}

TEST_CASE("reconstruct_wheel: five-spoke design closes with genus > 0") {
  RimTemplate tpl;
  recon::ReconConfig cfg;
  cfg.voxel_size = 4.0;
  cfg.target_triangles = 30000;
  cfg.angular_samples = 512;
  cfg.axial_samples = 96;

  const int N = 256;
  const auto mask = wheel_mask(spoke_segment(24, 32, 12, 20), 24, 32, 5, N, tpl);
  const DepthMap d = depthsynth::synthesize_depth(mask, N, N, tpl);
  const TriMesh m = recon::reconstruct_wheel(d, tpl, cfg);

  CHECK(mesh::is_watertight(m));          // no boundary edges
  CHECK(mesh::euler_characteristic(m) < 2);  // spoke windows add genus
  CHECK(mesh::signed_volume(m) > 0.0);
}

TEST_CASE("spoke extrusion thickens the face into a slab") {
  RimTemplate tpl;
  recon::ReconConfig cfg;
  cfg.voxel_size = 4.0;
  cfg.target_triangles = 30000;
  cfg.angular_samples = 512;
  cfg.axial_samples = 96;

  const int N = 256;
  const auto mask = wheel_mask(spoke_segment(24, 32, 12, 20), 24, 32, 5, N, tpl);
  const DepthMap d = depthsynth::synthesize_depth(mask, N, N, tpl);

  // zero thickness keeps the legacy cloud set; a positive one appends
  // ceil(t / voxel) shifted copies of the face sheet
  const auto sheet = recon::wheel_point_clouds(d, tpl, cfg);
  auto thick_cfg = cfg;
  thick_cfg.spoke_thickness_mm = 18.0;
  const auto slab = recon::wheel_point_clouds(d, tpl, thick_cfg);
  const std::size_t layers = 5;  // ceil(18 / 4)
  REQUIRE(slab.size() == sheet.size() + layers);
  const auto& face = sheet.front();
  for (std::size_t k = 1; k <= layers; ++k) {
    const auto& layer = slab[k];
    REQUIRE(layer.points.size() == face.points.size());
    CHECK(layer.source_tag == recon::SourceTag::Spoke);
    const double dz = 18.0 * double(k) / double(layers);
    for (std::size_t i = 0; i < face.points.size(); i += 97) {
      CHECK(layer.points[i].x() == face.points[i].x());
      CHECK(layer.points[i].y() == face.points[i].y());
      CHECK(layer.points[i].z() == doctest::Approx(face.points[i].z() + dz));
    }
  }
  // the deepest layer never leaves the barrel envelope
  for (const auto& p : slab[layers].points)
    CHECK(p.z() <= tpl.rim_width);

  // the slab adds material behind the face; the rim barrel (shared by both
  // meshes) dominates total volume, so the relative growth is modest
  const TriMesh thin = recon::reconstruct_wheel(d, tpl, cfg);
  const TriMesh thick = recon::reconstruct_wheel(d, tpl, thick_cfg);
  CHECK(mesh::is_watertight(thick));
  CHECK(mesh::signed_volume(thick) > 1.03 * mesh::signed_volume(thin));

  auto bad = cfg;
  bad.spoke_thickness_mm = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
}

TEST_CASE("reconstruct_wheel: empty depth map propagates EmptyMask") {
  RimTemplate tpl;
  recon::ReconConfig cfg;
  DepthMap d;
  d.width = d.height = 64;
  d.mm_per_pixel = 1.0;
  d.values.assign(d.pixel_count(), 0.0f);
  d.valid.assign(d.pixel_count(), 0);
  CHECK_THROWS_AS(recon::reconstruct_wheel(d, tpl, cfg), EmptyMask);
}

TEST_CASE("four-fold design fuses to a four-fold grid within one voxel") {
  RimTemplate tpl;
  tpl.n_bolts = 4;
  const int N = 256;
  const auto mask = wheel_mask(spoke_segment(24, 32, 10, 22), 24, 32, 4, N, tpl);
  const DepthMap d = depthsynth::synthesize_depth(mask, N, N, tpl);

  std::vector<PointCloud> clouds;
  clouds.push_back(recon::spoke_to_points(d));
  for (auto& c : recon::rim_reference_points(tpl, 512, 96))
    clouds.push_back(std::move(c));
  const VoxelGrid g = recon::fuse_to_grid(clouds, 4.0);
  REQUIRE(g.nx == g.ny);

  auto occupied = [&](int ix, int iy, int iz) {
    return g.at(ix, iy, iz) >= 0.5f;
  };
  long long checked = 0, matched = 0;
  for (int iz = 0; iz < g.nz; ++iz)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        if (!occupied(ix, iy, iz)) continue;
        ++checked;
        const int rx = g.ny - 1 - iy, ry = ix;  // quarter turn in the xy plane
        bool hit = false;
        for (int dy = -1; dy <= 1 && !hit; ++dy)
          for (int dx = -1; dx <= 1 && !hit; ++dx) {
            const int qx = rx + dx, qy = ry + dy;
            if (qx < 0 || qy < 0 || qx >= g.nx || qy >= g.ny) continue;
            hit = occupied(qx, qy, iz);
          }
        if (hit) ++matched;
      }
  REQUIRE(checked > 1000);
  CHECK(matched == checked);
}
