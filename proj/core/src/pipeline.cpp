#include "wheelforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "wheelforge/csv.hpp"
#include "wheelforge/depthsynth.hpp"
#include "wheelforge/designspace.hpp"
#include "wheelforge/errors.hpp"
#include "wheelforge/metrics3d.hpp"
#include "wheelforge/png_io.hpp"
#include "wheelforge/raster_geom.hpp"
#include "wheelforge/rng.hpp"
#include "wheelforge/stl_io.hpp"

namespace fs = std::filesystem;

namespace wheelforge::pipeline {

namespace {

/// Full-precision double formatting for values that later runs re-read and
/// re-derive from; 17 significant digits round-trip exactly, so a resumed
/// run reproduces the same bytes as a fresh one.
std::string full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Progress ordering: a failure sits between the success of the stage
/// before it and the success of its own stage, so a success tag only ever
/// replaces states the design had actually not reached yet.
int status_order(const std::string& s) {
  if (s == "failed:generate") return -1;
  if (s == "generated") return 0;
  if (s == "failed:depth") return 1;
  if (s == "depth") return 2;
  if (s == "failed:recon") return 3;
  if (s == "recon") return 4;
  if (s == "failed:simulate") return 5;
  if (s == "ok") return 6;
  return -2;  // unknown / blank
}

void promote_status(ManifestRow& row, const char* success_tag) {
  if (status_order(row.status) < status_order(success_tag))
    row.status = success_tag;
}

/// Fan designs out over a small thread pool. `fn` must do its own error
/// capture: an exception escaping a worker would terminate the process.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  int w = workers > 0 ? workers : int(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  if (std::size_t(w) > n) w = int(n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& t : pool) t.join();
}

void finish_report(StageReport& r) {
  r.ok_count = r.failed_count = r.skipped_count = 0;
  for (const auto& o : r.outcomes) {
    if (o.ok) {
      ++r.ok_count;
      if (o.skipped) ++r.skipped_count;
    } else {
      ++r.failed_count;
    }
  }
}

fem2d::GridModel2D make_grid_model(const PipelineConfig& cfg) {
  fem2d::GridModel2D m;
  m.nx = cfg.n_theta;
  m.ny = cfg.n_radial;
  m.elem_size = 1.0;
  m.youngs_modulus_solid = 1.0;
  m.youngs_modulus_void = 1e-9;
  m.poisson_ratio = cfg.poisson_2d;
  m.penal = cfg.penal;
  return m;
}

/// The design set is references first, then the sweep's cartesian product;
/// ids are positional so a fixed config always names designs identically.
struct DesignDef {
  std::string id;
  std::string provenance;  // "reference" | "topo"
  int n_seg = 5;
  std::size_t reference_index = 0;
  topo::TopoParams params;  // topo designs only
};

std::vector<DesignDef> design_set(const PipelineConfig& cfg) {
  std::vector<DesignDef> defs;
  const int seg_cycle[3] = {4, 5, 6};
  for (int i = 0; i < cfg.reference_count; ++i) {
    DesignDef d;
    char buf[32];
    std::snprintf(buf, sizeof buf, "ref_%04d", i);
    d.id = buf;
    d.provenance = "reference";
    d.n_seg = seg_cycle[i % 3];
    d.reference_index = std::size_t(i);
    defs.push_back(std::move(d));
  }
  std::size_t idx = 0;
  for (int ri = 0; ri < cfg.topo_reference_count; ++ri)
    for (double lam : cfg.sweep.lambdas)
      for (double vf : cfg.sweep.volume_fractions)
        for (double ratio : cfg.sweep.normal_shear_ratios)
          for (int ns : cfg.sweep.n_segs) {
            DesignDef d;
            char buf[32];
            std::snprintf(buf, sizeof buf, "topo_%04zu", idx++);
            d.id = buf;
            d.provenance = "topo";
            d.n_seg = ns;
            d.reference_index = std::size_t(ri);
            d.params = cfg.sweep.base;
            d.params.lambda_sim = lam;
            d.params.volume_fraction = vf;
            d.params.normal_shear_ratio = ratio;
            d.params.n_seg = ns;
            defs.push_back(std::move(d));
          }
  if (cfg.max_designs > 0 && defs.size() > std::size_t(cfg.max_designs))
    defs.resize(std::size_t(cfg.max_designs));
  return defs;
}

pngio::GrayImage8 raster_to_mask(const topo::DensityField& field) {
  pngio::GrayImage8 img;
  img.width = img.height = field.raster_size;
  img.pixels.resize(std::size_t(field.raster_size) * field.raster_size);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = field.wheel_raster[i] >= 0.5f ? 255 : 0;
  return img;
}

depthsynth::DepthMap load_depth(const PipelineConfig& cfg,
                                const std::string& path) {
  pngio::DepthImage di = pngio::read_depth16(path);
  depthsynth::DepthMap d;
  d.width = di.width;
  d.height = di.height;
  d.values = std::move(di.depth_mm);
  d.valid = std::move(di.valid);
  d.mm_per_pixel = raster::mm_per_pixel(cfg.rim, cfg.raster_size);
  d.face_radius_mm = cfg.rim.design_outer_radius();
  return d;
}

struct SimRow {
  bool have = false;
  double mass = 0.0;
  std::vector<double> freqs;
  double mode7 = 0.0, mode11 = 0.0;
};

std::string manifest_path(const PipelineConfig& cfg) {
  return (fs::path(cfg.output_root) / "manifest.csv").string();
}
std::string results_path(const PipelineConfig& cfg) {
  return (fs::path(cfg.output_root) / "results.csv").string();
}

void require_manifest(const PipelineConfig& cfg, const char* needed_by) {
  if (!fs::exists(manifest_path(cfg)))
    throw MissingPredecessor(std::string(needed_by) +
                             " needs manifest.csv; run generate first");
}

/// Evidence that the predecessor stage ran: some design carries its
/// artifact, or some design failed in it. Without that the requested stage
/// has no inputs at all and was almost certainly invoked out of order.
void require_prior_stage(const Manifest& m,
                         std::string ManifestRow::*artifact,
                         const char* prior_name, const char* needed_by) {
  const std::string failed_tag = std::string("failed:") + prior_name;
  for (const auto& row : m.rows) {
    if (!(row.*artifact).empty()) return;
    if (row.status == failed_tag) return;
  }
  throw MissingPredecessor(std::string(needed_by) + " needs " + prior_name +
                           " outputs; run " + prior_name + " first");
}

}  // namespace

// ---------------------------------------------------------------- manifest

Manifest Manifest::read(const std::string& path) {
  const csvio::Table t = csvio::read(path);
  Manifest m;
  const int c_id = t.column("design_id"), c_prov = t.column("provenance");
  const int c_mask = t.column("mask_path"), c_depth = t.column("depth_path");
  const int c_mesh = t.column("mesh_path"), c_status = t.column("status");
  const int c_score = t.column("score");
  for (const auto& r : t.rows) {
    if (int(r.size()) <= std::max(c_score, c_status))
      throw IoError("manifest row is too short: " + path);
    ManifestRow row;
    row.design_id = r[c_id];
    row.provenance = r[c_prov];
    row.mask_path = r[c_mask];
    row.depth_path = r[c_depth];
    row.mesh_path = r[c_mesh];
    row.status = r[c_status];
    row.score = r[c_score];
    m.rows.push_back(std::move(row));
  }
  return m;
}

void Manifest::write(const std::string& path) const {
  csvio::Table t;
  t.header = {"design_id", "provenance", "mask_path", "depth_path",
              "mesh_path", "status",     "score"};
  for (const auto& r : rows)
    t.rows.push_back({r.design_id, r.provenance, r.mask_path, r.depth_path,
                      r.mesh_path, r.status, r.score});
  csvio::write(path, t);
}

// ------------------------------------------------------------- references

topo::ReferenceDesign parametric_reference(int index, int n_radial,
                                           int n_theta, int inner_rows,
                                           int outer_rows) {
  if (index < 0 || n_radial < 4 || n_theta < 4 || inner_rows < 1 ||
      outer_rows < 1 || inner_rows + outer_rows >= n_radial)
    throw ConfigInvalid("parametric_reference: bad segment grid");

  const int style = index % 4;              // straight, tapered, split, bent
  const int width_step = (index / 4) % 8;   // 8 width levels before repeats
  const double w = 0.28 + 0.045 * width_step;
  const double bend_sign = (index % 8) < 4 ? 1.0 : -1.0;

  topo::ReferenceDesign ref;
  char buf[32];
  std::snprintf(buf, sizeof buf, "pattern_%04d", index);
  ref.source_id = buf;
  ref.densities = Eigen::VectorXd::Zero(std::size_t(n_radial) * n_theta);

  auto wrapped_dist = [n_theta](double a, double b) {
    double d = std::abs(a - b);
    return std::min(d, double(n_theta) - d);
  };

  for (int r = 0; r < n_radial; ++r) {
    const double fr = (r + 0.5) / n_radial;
    const bool frozen = r < inner_rows || r >= n_radial - outer_rows;
    const double center = n_theta / 2.0;
    double centers[2] = {center, center};
    int n_centers = 1;
    double hw = 0.5 * w * n_theta;
    switch (style) {
      case 0:  // straight
        break;
      case 1:  // tapered: wide at the hub, narrow at the rim
        hw *= 1.25 - 0.9 * fr;
        break;
      case 2: {  // split: two lobes diverging outward
        const double spread = (0.15 + 0.20 * fr) * n_theta;
        centers[0] = center - spread;
        centers[1] = center + spread;
        n_centers = 2;
        hw *= 0.55;
        break;
      }
      default:  // bent: the center drifts with radius
        centers[0] = center + bend_sign * (fr - 0.5) * 0.5 * n_theta;
        break;
    }
    for (int c = 0; c < n_theta; ++c) {
      if (frozen) {
        ref.densities[std::size_t(r) * n_theta + c] = 1.0;
        continue;
      }
      double d = wrapped_dist(c + 0.5, centers[0]);
      if (n_centers == 2) d = std::min(d, wrapped_dist(c + 0.5, centers[1]));
      ref.densities[std::size_t(r) * n_theta + c] = d <= hw ? 1.0 : 0.0;
    }
  }
  return ref;
}

// --------------------------------------------------------------- generate

StageReport run_generate(const PipelineConfig& cfg, bool force) {
  cfg.validate();
  const fs::path root(cfg.output_root);
  fs::create_directories(root / "masks");

  const auto defs = design_set(cfg);
  std::vector<topo::ReferenceDesign> references;
  references.reserve(cfg.reference_count);
  for (int i = 0; i < cfg.reference_count; ++i)
    references.push_back(parametric_reference(i, cfg.n_radial, cfg.n_theta,
                                              cfg.inner_rows, cfg.outer_rows));

  Manifest old;
  std::map<std::string, const ManifestRow*> old_by_id;
  if (fs::exists(manifest_path(cfg))) {
    old = Manifest::read(manifest_path(cfg));
    for (const auto& r : old.rows) old_by_id[r.design_id] = &r;
  }

  const fem2d::GridModel2D model = make_grid_model(cfg);
  const auto roles = topo::wheel_passive_rows(cfg.n_theta, cfg.n_radial,
                                              cfg.inner_rows, cfg.outer_rows);

  StageReport report;
  report.stage = "generate";
  report.outcomes.resize(defs.size());
  Manifest manifest;
  manifest.rows.resize(defs.size());

  parallel_for(defs.size(), cfg.workers, [&](std::size_t i) {
    const DesignDef& def = defs[i];
    const std::string mask_rel = "masks/" + def.id + ".png";
    DesignOutcome& out = report.outcomes[i];
    out.design_id = def.id;
    ManifestRow& row = manifest.rows[i];
    row.design_id = def.id;
    row.provenance = def.provenance;

    if (!force && fs::exists(root / mask_rel)) {
      out.ok = true;
      out.skipped = true;
      const auto it = old_by_id.find(def.id);
      if (it != old_by_id.end()) row = *it->second;  // keep downstream state
      row.design_id = def.id;
      row.provenance = def.provenance;
      row.mask_path = mask_rel;
      promote_status(row, "generated");
      return;
    }
    try {
      topo::DensityField field;
      if (def.provenance == "reference") {
        field.segment = references[def.reference_index].densities;
        field.n_radial = cfg.n_radial;
        field.n_theta = cfg.n_theta;
        field.n_seg = def.n_seg;
      } else {
        const fem2d::LoadCase2D lc =
            topo::segment_load_case(model, def.params.normal_shear_ratio);
        topo::OptimizeResult r = topo::optimize_segment(
            def.params, references[def.reference_index], model, lc, &roles);
        field = std::move(r.field);
      }
      topo::rasterize_wheel(field, cfg.raster_size, cfg.rim);
      pngio::write_gray8((root / mask_rel).string(), raster_to_mask(field));
      row.mask_path = mask_rel;
      row.status = "generated";
      out.ok = true;
    } catch (const std::exception& e) {
      row.status = "failed:generate";
      out.ok = false;
      out.error = e.what();
    }
  });

  manifest.write(manifest_path(cfg));
  finish_report(report);
  return report;
}

// ------------------------------------------------------------------ depth

StageReport run_depth(const PipelineConfig& cfg, bool force) {
  cfg.validate();
  require_manifest(cfg, "depth");
  const fs::path root(cfg.output_root);
  fs::create_directories(root / "depths");
  Manifest manifest = Manifest::read(manifest_path(cfg));

  StageReport report;
  report.stage = "depth";
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    if (!manifest.rows[i].mask_path.empty()) eligible.push_back(i);
  report.outcomes.resize(eligible.size());

  parallel_for(eligible.size(), cfg.workers, [&](std::size_t e) {
    ManifestRow& row = manifest.rows[eligible[e]];
    DesignOutcome& out = report.outcomes[e];
    out.design_id = row.design_id;
    const std::string depth_rel = "depths/" + row.design_id + ".png";
    const fs::path depth_abs = root / depth_rel;

    if (!force && fs::exists(depth_abs) &&
        fs::exists(depth_abs.string() + ".txt")) {
      out.ok = true;
      out.skipped = true;
      row.depth_path = depth_rel;
      promote_status(row, "depth");
      return;
    }
    try {
      const pngio::GrayImage8 mask =
          pngio::read_gray8((root / row.mask_path).string());
      const depthsynth::DepthMap d = depthsynth::synthesize_depth(
          mask.pixels, mask.width, mask.height, cfg.rim);
      pngio::write_depth16(depth_abs.string(), d.width, d.height, d.values,
                           d.valid);
      row.depth_path = depth_rel;
      promote_status(row, "depth");
      out.ok = true;
    } catch (const std::exception& ex) {
      row.depth_path.clear();
      row.status = "failed:depth";
      out.ok = false;
      out.error = ex.what();
    }
  });

  manifest.write(manifest_path(cfg));
  finish_report(report);
  return report;
}

// ------------------------------------------------------------------ recon

StageReport run_recon(const PipelineConfig& cfg, bool force) {
  cfg.validate();
  require_manifest(cfg, "recon");
  const fs::path root(cfg.output_root);
  Manifest manifest = Manifest::read(manifest_path(cfg));
  require_prior_stage(manifest, &ManifestRow::depth_path, "depth", "recon");
  fs::create_directories(root / "meshes");

  StageReport report;
  report.stage = "recon";
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    if (!manifest.rows[i].depth_path.empty()) eligible.push_back(i);
  report.outcomes.resize(eligible.size());

  parallel_for(eligible.size(), cfg.workers, [&](std::size_t e) {
    ManifestRow& row = manifest.rows[eligible[e]];
    DesignOutcome& out = report.outcomes[e];
    out.design_id = row.design_id;
    const std::string mesh_rel = "meshes/" + row.design_id + ".stl";
    const fs::path mesh_abs = root / mesh_rel;

    if (!force && fs::exists(mesh_abs)) {
      out.ok = true;
      out.skipped = true;
      row.mesh_path = mesh_rel;
      promote_status(row, "recon");
      return;
    }
    try {
      const depthsynth::DepthMap d =
          load_depth(cfg, (root / row.depth_path).string());
      const mesh::TriMesh m = recon::reconstruct_wheel(d, cfg.rim, cfg.recon);
      mesh::write_binary_stl(mesh_abs.string(), m);
      row.mesh_path = mesh_rel;
      promote_status(row, "recon");
      out.ok = true;
    } catch (const std::exception& ex) {
      row.mesh_path.clear();
      row.status = "failed:recon";
      out.ok = false;
      out.error = ex.what();
    }
  });

  manifest.write(manifest_path(cfg));
  finish_report(report);
  return report;
}

// --------------------------------------------------------------- simulate

StageReport run_simulate(const PipelineConfig& cfg, bool force) {
  cfg.validate();
  require_manifest(cfg, "simulate");
  const fs::path root(cfg.output_root);
  Manifest manifest = Manifest::read(manifest_path(cfg));
  require_prior_stage(manifest, &ManifestRow::mesh_path, "recon", "simulate");

  // reuse earlier modal results when present (full-precision round-trip)
  std::map<std::string, SimRow> prior;
  if (!force && fs::exists(results_path(cfg))) {
    const csvio::Table t = csvio::read(results_path(cfg));
    if (int(t.header.size()) == cfg.n_modes + 5) {
      for (const auto& r : t.rows) {
        SimRow s;
        s.have = true;
        s.mass = std::stod(r[1]);
        for (int k = 0; k < cfg.n_modes; ++k)
          s.freqs.push_back(std::stod(r[2 + k]));
        s.mode7 = std::stod(r[2 + cfg.n_modes]);
        s.mode11 = std::stod(r[3 + cfg.n_modes]);
        prior[r[0]] = std::move(s);
      }
    }
  }

  StageReport report;
  report.stage = "simulate";
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    if (!manifest.rows[i].mesh_path.empty()) eligible.push_back(i);
  report.outcomes.resize(eligible.size());
  std::vector<SimRow> sims(eligible.size());

  parallel_for(eligible.size(), cfg.workers, [&](std::size_t e) {
    ManifestRow& row = manifest.rows[eligible[e]];
    DesignOutcome& out = report.outcomes[e];
    out.design_id = row.design_id;
    const auto it = prior.find(row.design_id);
    if (it != prior.end()) {
      sims[e] = it->second;
      out.ok = true;
      out.skipped = true;
      return;
    }
    try {
      const mesh::TriMesh m =
          mesh::read_binary_stl((root / row.mesh_path).string());
      const modal::HexModel hex = modal::voxel_hex_mesh(m, cfg.elem_size_mm);
      const modal::ModalResult res = modal::modal_analysis(
          hex, cfg.material, cfg.n_modes, cfg.shift_hz);
      SimRow s;
      s.have = true;
      s.mass = res.mass;
      s.freqs.assign(res.frequencies.begin(),
                     res.frequencies.begin() + cfg.n_modes);
      s.mode7 = res.mode7_hz;
      s.mode11 = res.mode11_hz;
      sims[e] = std::move(s);
      out.ok = true;
    } catch (const std::exception& ex) {
      out.ok = false;
      out.error = ex.what();
    }
  });

  // dataset-level scores over every design that has modal numbers
  std::vector<std::size_t> ok_idx;
  std::vector<modal::ModalResult> ok_results;
  for (std::size_t e = 0; e < eligible.size(); ++e) {
    if (!sims[e].have) continue;
    ok_idx.push_back(e);
    modal::ModalResult r;
    r.mass = sims[e].mass;
    r.mode7_hz = sims[e].mode7;
    r.mode11_hz = sims[e].mode11;
    ok_results.push_back(r);
  }
  std::vector<modal::PerformanceScore> scores;
  if (ok_results.size() >= 2)
    scores = modal::performance_score(ok_results);

  csvio::Table out;
  out.header = {"design_id", "mass_kg"};
  for (int k = 1; k <= cfg.n_modes; ++k)
    out.header.push_back("f" + std::to_string(k) + "_hz");
  out.header.push_back("mode7_hz");
  out.header.push_back("mode11_hz");
  out.header.push_back("score");

  for (std::size_t j = 0; j < ok_idx.size(); ++j) {
    const std::size_t e = ok_idx[j];
    ManifestRow& row = manifest.rows[eligible[e]];
    std::vector<std::string> cells{row.design_id, full(sims[e].mass)};
    for (double f : sims[e].freqs) cells.push_back(full(f));
    cells.push_back(full(sims[e].mode7));
    cells.push_back(full(sims[e].mode11));
    const std::string score_cell =
        scores.empty() ? std::string() : full(scores[j].overall);
    cells.push_back(score_cell);
    out.rows.push_back(std::move(cells));
    row.status = "ok";
    row.score = score_cell;
  }
  for (std::size_t e = 0; e < eligible.size(); ++e) {
    if (sims[e].have) continue;
    ManifestRow& row = manifest.rows[eligible[e]];
    row.status = "failed:simulate";
    row.score.clear();
  }

  csvio::write(results_path(cfg), out);
  manifest.write(manifest_path(cfg));
  finish_report(report);
  return report;
}

// ---------------------------------------------------------------- analyze

namespace {

struct OkDesign {
  std::size_t manifest_index;
  std::string id, provenance, mask_path, depth_path, mesh_path;
  double mass, mode7, mode11, score;
};

std::vector<OkDesign> collect_ok(const PipelineConfig& cfg,
                                 const Manifest& manifest) {
  if (!fs::exists(results_path(cfg)))
    throw MissingPredecessor("analyze needs results.csv; run simulate first");
  const csvio::Table t = csvio::read(results_path(cfg));
  const int c_id = t.column("design_id"), c_mass = t.column("mass_kg");
  const int c_m7 = t.column("mode7_hz"), c_m11 = t.column("mode11_hz");
  const int c_score = t.column("score");
  std::map<std::string, const std::vector<std::string>*> by_id;
  for (const auto& r : t.rows) by_id[r[c_id]] = &r;

  std::vector<OkDesign> ok;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const ManifestRow& row = manifest.rows[i];
    if (row.status != "ok") continue;
    const auto it = by_id.find(row.design_id);
    if (it == by_id.end()) continue;
    const auto& cells = *it->second;
    OkDesign d;
    d.manifest_index = i;
    d.id = row.design_id;
    d.provenance = row.provenance;
    d.mask_path = row.mask_path;
    d.depth_path = row.depth_path;
    d.mesh_path = row.mesh_path;
    d.mass = std::stod(cells[c_mass]);
    d.mode7 = std::stod(cells[c_m7]);
    d.mode11 = std::stod(cells[c_m11]);
    d.score = cells[c_score].empty() ? 0.0 : std::stod(cells[c_score]);
    ok.push_back(std::move(d));
  }
  return ok;
}

void write_histogram(const std::string& path, const std::vector<double>& v,
                     int bins, bool unit_domain) {
  double lo = 0.0, hi = 1.0;
  if (!unit_domain) {
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
  }
  const double width = (hi - lo) / bins;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : v) {
    int b = width > 0.0 ? int((x - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
  }
  csvio::Table t;
  t.header = {"bin_lo", "bin_hi", "count"};
  for (int b = 0; b < bins; ++b)
    t.rows.push_back({csvio::format_double(lo + b * width),
                      csvio::format_double(b + 1 == bins ? hi
                                                         : lo + (b + 1) * width),
                      std::to_string(counts[b])});
  csvio::write(path, t);
}

}  // namespace

void export_plots(const std::string& output_root, int hist_bins) {
  if (hist_bins < 1) throw ConfigInvalid("hist_bins must be at least 1");
  const fs::path root(output_root);
  if (!fs::exists(root / "manifest.csv"))
    throw MissingPredecessor("export_plots needs manifest.csv");
  PipelineConfig probe;  // only output_root is consulted by the helpers
  probe.output_root = output_root;
  const Manifest manifest = Manifest::read((root / "manifest.csv").string());
  const auto ok = collect_ok(probe, manifest);
  if (ok.empty())
    throw EmptyManifest("no design reached ok status; nothing to plot");

  fs::create_directories(root / "plots");
  std::vector<double> mass, m7, m11, score;
  for (const auto& d : ok) {
    mass.push_back(d.mass);
    m7.push_back(d.mode7);
    m11.push_back(d.mode11);
    score.push_back(d.score);
  }
  write_histogram((root / "plots/hist_mass.csv").string(), mass, hist_bins,
                  false);
  write_histogram((root / "plots/hist_mode7.csv").string(), m7, hist_bins,
                  false);
  write_histogram((root / "plots/hist_mode11.csv").string(), m11, hist_bins,
                  false);
  write_histogram((root / "plots/hist_score.csv").string(), score, hist_bins,
                  true);

  csvio::Table perf;
  perf.header = {"design_id", "mass_kg", "mode7_hz",
                 "mode11_hz", "score",   "provenance"};
  for (const auto& d : ok)
    perf.rows.push_back({d.id, csvio::format_double(d.mass),
                         csvio::format_double(d.mode7),
                         csvio::format_double(d.mode11),
                         csvio::format_double(d.score), d.provenance});
  csvio::write((root / "plots/scatter_performance.csv").string(), perf);

  if (fs::exists(root / "embedding.csv")) {
    const csvio::Table emb = csvio::read((root / "embedding.csv").string());
    const int c_id = emb.column("design_id");
    const int c_x = emb.column("x"), c_y = emb.column("y");
    std::map<std::string, std::string> prov;
    for (const auto& d : ok) prov[d.id] = d.provenance;
    csvio::Table t;
    t.header = {"design_id", "x", "y", "provenance"};
    for (const auto& r : emb.rows) {
      const auto it = prov.find(r[c_id]);
      if (it == prov.end()) continue;
      t.rows.push_back({r[c_id], r[c_x], r[c_y], it->second});
    }
    csvio::write((root / "plots/scatter_embedding.csv").string(), t);
  }
}

StageReport run_analyze(const PipelineConfig& cfg, bool force) {
  cfg.validate();
  require_manifest(cfg, "analyze");
  const fs::path root(cfg.output_root);
  const Manifest manifest = Manifest::read(manifest_path(cfg));
  const auto ok = collect_ok(cfg, manifest);

  StageReport report;
  report.stage = "analyze";
  report.outcomes.resize(ok.size());
  for (std::size_t i = 0; i < ok.size(); ++i)
    report.outcomes[i].design_id = ok[i].id;

  const std::vector<std::string> outputs = {
      "features.csv",   "embedding.csv",
      "clusters.csv",   "quality.csv",
      "sampled.csv",    "diversity.csv",
      "eval.csv",       "plots/hist_mass.csv",
      "plots/hist_mode7.csv", "plots/hist_mode11.csv",
      "plots/hist_score.csv", "plots/scatter_performance.csv",
      "plots/scatter_embedding.csv"};
  if (!force) {
    bool all_present = true;
    for (const auto& p : outputs)
      if (!fs::exists(root / p)) {
        all_present = false;
        break;
      }
    if (all_present) {
      for (auto& o : report.outcomes) o.ok = o.skipped = true;
      finish_report(report);
      return report;
    }
  }

  if (ok.size() < 3)
    throw InsufficientDesigns("analyze needs at least 3 ok designs");

  // ---- per-design depth features
  std::vector<designspace::FeatureVector> features(ok.size());
  parallel_for(ok.size(), cfg.workers, [&](std::size_t i) {
    const depthsynth::DepthMap d =
        load_depth(cfg, (root / ok[i].depth_path).string());
    features[i] = designspace::depth_features(d, ok[i].id);
  });
  {
    csvio::Table t;
    t.header = {"design_id"};
    for (Eigen::Index k = 0; k < features[0].values.size(); ++k)
      t.header.push_back("f" + std::to_string(k));
    for (const auto& f : features) {
      std::vector<std::string> cells{f.design_id};
      for (Eigen::Index k = 0; k < f.values.size(); ++k)
        cells.push_back(csvio::format_double(f.values[k]));
      t.rows.push_back(std::move(cells));
    }
    csvio::write((root / "features.csv").string(), t);
  }

  // ---- embedding, clustering, sampling
  bool rank_deficient = false;
  const auto embedding = designspace::reduce_2d(features, &rank_deficient);
  {
    csvio::Table t;
    t.header = {"design_id", "x", "y"};
    for (const auto& e : embedding)
      t.rows.push_back(
          {e.design_id, csvio::format_double(e.x), csvio::format_double(e.y)});
    csvio::write((root / "embedding.csv").string(), t);
  }

  const int k = std::min<int>(cfg.kmeans_k, int(embedding.size()));
  const auto km =
      designspace::kmeans(embedding, k, derive_seed(cfg.seed, 1001));
  {
    csvio::Table t;
    t.header = {"design_id", "label"};
    for (std::size_t i = 0; i < embedding.size(); ++i)
      t.rows.push_back(
          {embedding[i].design_id, std::to_string(km.labels[i])});
    csvio::write((root / "clusters.csv").string(), t);
  }
  {
    csvio::Table t;
    t.header = {"silhouette", "davies_bouldin", "calinski_harabasz"};
    try {
      const auto q = designspace::cluster_quality(embedding, km.labels);
      t.rows.push_back({csvio::format_double(q.silhouette),
                        csvio::format_double(q.davies_bouldin),
                        csvio::format_double(q.calinski_harabasz)});
    } catch (const DegenerateRange&) {
      t.rows.push_back({"", "", ""});  // coincident centroids: undefined
    }
    csvio::write((root / "quality.csv").string(), t);
  }
  {
    const std::size_t n_samples =
        std::min<std::size_t>(std::size_t(cfg.lhs_samples), embedding.size());
    const auto ids = designspace::lhs_sample(embedding, n_samples,
                                             derive_seed(cfg.seed, 1002));
    csvio::Table t;
    t.header = {"design_id"};
    for (const auto& id : ids) t.rows.push_back({id});
    csvio::write((root / "sampled.csv").string(), t);
  }

  // ---- diversity: design space on features, performance space on
  //      (mass, mode7, mode11)
  {
    std::vector<Eigen::VectorXd> feat_all, feat_ref, perf_all, perf_ref;
    for (std::size_t i = 0; i < ok.size(); ++i) {
      Eigen::Vector3d p(ok[i].mass, ok[i].mode7, ok[i].mode11);
      feat_all.push_back(features[i].values);
      perf_all.push_back(p);
      if (ok[i].provenance == "reference") {
        feat_ref.push_back(features[i].values);
        perf_ref.push_back(p);
      }
    }
    csvio::Table t;
    t.header = {"group", "dsd", "psd"};
    if (feat_ref.size() >= 2) {
      const auto dsd =
          designspace::diversity(feat_ref, feat_ref.size(), cfg.seed);
      const auto psd =
          designspace::diversity(perf_ref, perf_ref.size(), cfg.seed);
      t.rows.push_back({"reference", csvio::format_double(dsd.mean),
                        csvio::format_double(psd.mean)});
    }
    const auto dsd =
        designspace::diversity(feat_all, feat_all.size(), cfg.seed);
    const auto psd =
        designspace::diversity(perf_all, perf_all.size(), cfg.seed);
    t.rows.push_back({"overall", csvio::format_double(dsd.mean),
                      csvio::format_double(psd.mean)});
    csvio::write((root / "diversity.csv").string(), t);
  }

  // ---- per-design fidelity metrics: stored artifacts vs fresh recompute
  struct EvalRow {
    bool ok = false;
    double iou = 0, cd = 0, rmse = 0, absrel = 0, delta = 0;
    std::string error;
  };
  std::vector<EvalRow> evals(ok.size());
  parallel_for(ok.size(), cfg.workers, [&](std::size_t i) {
    EvalRow& ev = evals[i];
    try {
      const pngio::GrayImage8 mask =
          pngio::read_gray8((root / ok[i].mask_path).string());
      const depthsynth::DepthMap gt = depthsynth::synthesize_depth(
          mask.pixels, mask.width, mask.height, cfg.rim);
      const depthsynth::DepthMap pred =
          load_depth(cfg, (root / ok[i].depth_path).string());
      const auto dm = metrics::depth_errors(pred, gt);
      ev.rmse = dm.rmse;
      ev.absrel = dm.absrel;
      ev.delta = dm.delta_125;

      // raw isosurface straight from the stored depth map, no postprocess
      const auto clouds = recon::wheel_point_clouds(pred, cfg.rim, cfg.recon);
      const recon::VoxelGrid grid =
          recon::fuse_to_grid(clouds, cfg.recon.voxel_size);
      const mesh::TriMesh raw = recon::marching_cubes(grid, cfg.recon.iso);
      const mesh::TriMesh final_mesh =
          mesh::read_binary_stl((root / ok[i].mesh_path).string());
      ev.iou = metrics::mesh_iou(final_mesh, raw, cfg.iou_voxel_mm);
      ev.cd = metrics::chamfer(final_mesh, raw, cfg.chamfer_points,
                               derive_seed(cfg.seed, 2000 + i));
      ev.ok = true;
    } catch (const std::exception& ex) {
      ev.ok = false;
      ev.error = ex.what();
    }
  });
  {
    csvio::Table t;
    t.header = {"pair_id", "iou", "chamfer", "rmse", "absrel", "delta125"};
    for (std::size_t i = 0; i < ok.size(); ++i) {
      DesignOutcome& out = report.outcomes[i];
      if (evals[i].ok) {
        t.rows.push_back({ok[i].id, csvio::format_double(evals[i].iou),
                          csvio::format_double(evals[i].cd),
                          csvio::format_double(evals[i].rmse),
                          csvio::format_double(evals[i].absrel),
                          csvio::format_double(evals[i].delta)});
        out.ok = true;
      } else {
        t.rows.push_back({ok[i].id, "", "", "", "", ""});
        out.ok = false;
        out.error = evals[i].error;
      }
    }
    csvio::write((root / "eval.csv").string(), t);
  }

  export_plots(cfg.output_root, cfg.hist_bins);
  finish_report(report);
  return report;
}

std::vector<StageReport> run_all(const PipelineConfig& cfg, bool force) {
  std::vector<StageReport> reports;
  reports.push_back(run_generate(cfg, force));
  reports.push_back(run_depth(cfg, force));
  reports.push_back(run_recon(cfg, force));
  reports.push_back(run_simulate(cfg, force));
  reports.push_back(run_analyze(cfg, force));
  return reports;
}

// ------------------------------------------------------------------ config

PipelineConfig PipelineConfig::from_config(const Config& c) {
  PipelineConfig p;
  p.output_root = c.get_string("pipeline.output_root", p.output_root);
  if (c.has("pipeline.seed"))
    p.seed = std::stoull(c.get_string("pipeline.seed", "1"));
  p.workers = c.get_int("pipeline.workers", p.workers);
  p.max_designs = c.get_int("pipeline.designs", p.max_designs);

  p.rim.rim_diameter = c.get_double("rim.diameter", p.rim.rim_diameter);
  p.rim.rim_width = c.get_double("rim.width", p.rim.rim_width);
  p.rim.offset = c.get_double("rim.offset", p.rim.offset);
  p.rim.pcd = c.get_double("rim.pcd", p.rim.pcd);
  p.rim.hub_bore = c.get_double("rim.bore", p.rim.hub_bore);
  p.rim.disc_diameter =
      c.get_double("rim.disc_diameter", p.rim.disc_diameter);
  p.rim.bolt_hole_diameter =
      c.get_double("rim.bolt_hole_diameter", p.rim.bolt_hole_diameter);
  p.rim.rim_ring_width = c.get_double("rim.ring_width", p.rim.rim_ring_width);
  p.rim.depth_at_hub = c.get_double("rim.depth_at_hub", p.rim.depth_at_hub);
  p.rim.depth_at_rim = c.get_double("rim.depth_at_rim", p.rim.depth_at_rim);

  p.raster_size = c.get_int("raster.size", p.raster_size);

  p.n_theta = c.get_int("segment.n_theta", p.n_theta);
  p.n_radial = c.get_int("segment.n_radial", p.n_radial);
  p.inner_rows = c.get_int("segment.inner_rows", p.inner_rows);
  p.outer_rows = c.get_int("segment.outer_rows", p.outer_rows);
  p.penal = c.get_double("segment.penal", p.penal);
  p.poisson_2d = c.get_double("segment.poisson", p.poisson_2d);

  p.reference_count = c.get_int("references.count", p.reference_count);
  p.topo_reference_count =
      c.get_int("references.topo_count", p.topo_reference_count);

  p.sweep.lambdas = c.get_doubles("topo.lambdas", {0.5});
  p.sweep.volume_fractions = c.get_doubles("topo.volume_fractions", {0.45});
  p.sweep.normal_shear_ratios =
      c.get_doubles("topo.normal_shear_ratios", {1.0});
  p.sweep.n_segs = c.get_ints("topo.n_segs", {5});
  p.sweep.base.filter_radius =
      c.get_double("topo.filter_radius", p.sweep.base.filter_radius);
  p.sweep.base.max_iters = c.get_int("topo.max_iters", p.sweep.base.max_iters);
  p.sweep.base.move_limit =
      c.get_double("topo.move_limit", p.sweep.base.move_limit);
  p.sweep.base.change_tol =
      c.get_double("topo.change_tol", p.sweep.base.change_tol);

  p.recon.voxel_size = c.get_double("recon.voxel_size", p.recon.voxel_size);
  p.recon.smooth_iters = c.get_int("recon.smooth_iters", p.recon.smooth_iters);
  p.recon.smooth_step = c.get_double("recon.smooth_step", p.recon.smooth_step);
  p.recon.target_triangles =
      c.get_int("recon.target_triangles", p.recon.target_triangles);
  p.recon.angular_samples =
      c.get_int("recon.angular_samples", p.recon.angular_samples);
  p.recon.axial_samples =
      c.get_int("recon.axial_samples", p.recon.axial_samples);
  p.recon.iso = c.get_double("recon.iso", p.recon.iso);
  p.recon.spoke_thickness_mm =
      c.get_double("recon.spoke_thickness", p.recon.spoke_thickness_mm);

  p.elem_size_mm = c.get_double("modal.elem_size_mm", p.elem_size_mm);
  p.n_modes = c.get_int("modal.n_modes", p.n_modes);
  p.shift_hz = c.get_double("modal.shift_hz", p.shift_hz);
  p.material.density = c.get_double("modal.density", p.material.density);
  p.material.youngs_modulus =
      c.get_double("modal.youngs_modulus", p.material.youngs_modulus);
  p.material.poisson_ratio =
      c.get_double("modal.poisson_ratio", p.material.poisson_ratio);
  p.material.yield_strength =
      c.get_double("modal.yield_strength", p.material.yield_strength);
  p.material.ultimate_strength =
      c.get_double("modal.ultimate_strength", p.material.ultimate_strength);

  p.kmeans_k = c.get_int("analyze.kmeans_k", p.kmeans_k);
  p.lhs_samples = c.get_int("analyze.lhs_samples", p.lhs_samples);
  p.hist_bins = c.get_int("analyze.hist_bins", p.hist_bins);
  p.iou_voxel_mm = c.get_double("analyze.iou_voxel_mm", p.iou_voxel_mm);
  p.chamfer_points = c.get_int("analyze.chamfer_points", p.chamfer_points);
  return p;
}

void PipelineConfig::validate() const {
  if (output_root.empty()) throw ConfigInvalid("output_root is empty");
  rim.validate();
  recon.validate();
  material.validate();
  if (raster_size < 64) throw ConfigInvalid("raster.size must be >= 64");
  if (n_theta < 4 || n_radial < 4)
    throw ConfigInvalid("segment grid must be at least 4x4");
  if (inner_rows < 1 || outer_rows < 1 || inner_rows + outer_rows >= n_radial)
    throw ConfigInvalid("frozen rows must leave free rings in between");
  if (penal < 1.0) throw ConfigInvalid("segment.penal must be >= 1");
  if (poisson_2d <= -1.0 || poisson_2d >= 0.5)
    throw ConfigInvalid("segment.poisson out of range");
  if (reference_count < 1)
    throw ConfigInvalid("references.count must be >= 1");
  if (topo_reference_count < 0 || topo_reference_count > reference_count)
    throw ConfigInvalid(
        "references.topo_count must be in [0, references.count]");
  if (sweep.lambdas.empty() || sweep.volume_fractions.empty() ||
      sweep.normal_shear_ratios.empty() || sweep.n_segs.empty())
    throw ConfigInvalid("topo sweep lists must be non-empty");
  for (double l : sweep.lambdas)
    if (l < 0.0) throw ConfigInvalid("topo.lambdas must be >= 0");
  for (double v : sweep.volume_fractions)
    if (v <= 0.0 || v >= 1.0)
      throw ConfigInvalid("topo.volume_fractions must be in (0, 1)");
  for (double r : sweep.normal_shear_ratios)
    if (r < 0.0) throw ConfigInvalid("topo.normal_shear_ratios must be >= 0");
  for (int s : sweep.n_segs)
    if (s < 3) throw ConfigInvalid("topo.n_segs entries must be >= 3");
  if (elem_size_mm <= 0.0)
    throw ConfigInvalid("modal.elem_size_mm must be positive");
  if (n_modes < 12) throw ConfigInvalid("modal.n_modes must be >= 12");
  if (shift_hz <= 0.0) throw ConfigInvalid("modal.shift_hz must be positive");
  if (kmeans_k < 2) throw ConfigInvalid("analyze.kmeans_k must be >= 2");
  if (lhs_samples < 1)
    throw ConfigInvalid("analyze.lhs_samples must be >= 1");
  if (hist_bins < 1) throw ConfigInvalid("analyze.hist_bins must be >= 1");
  if (iou_voxel_mm <= 0.0)
    throw ConfigInvalid("analyze.iou_voxel_mm must be positive");
  if (chamfer_points < 100)
    throw ConfigInvalid("analyze.chamfer_points must be >= 100");
  if (workers < 0) throw ConfigInvalid("pipeline.workers must be >= 0");
  if (max_designs < 0) throw ConfigInvalid("pipeline.designs must be >= 0");
}

}  // namespace wheelforge::pipeline
