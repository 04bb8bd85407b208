#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wheelforge/config.hpp"
#include "wheelforge/modal.hpp"
#include "wheelforge/recon.hpp"
#include "wheelforge/rim_template.hpp"
#include "wheelforge/topo.hpp"

namespace wheelforge::pipeline {

/// Everything a batch run needs, loadable from a key=value config file
/// (see PipelineConfig::from_config for the key names). A fixed seed plus
/// a fixed config makes every output byte reproducible.
struct PipelineConfig {
  std::string output_root = "out";
  std::uint64_t seed = 1;
  int workers = 0;      ///< design-level fan-out; 0 = hardware concurrency
  int max_designs = 0;  ///< truncate the design set; 0 = no limit

  RimTemplate rim;
  int raster_size = 256;

  // segment grid for the 2-D layout stage
  int n_theta = 18;   ///< angular cells per segment
  int n_radial = 28;  ///< radial rings
  int inner_rows = 2;
  int outer_rows = 2;
  double penal = 3.0;
  double poisson_2d = 0.3;

  int reference_count = 20;       ///< parametric designs shipped as-is
  int topo_reference_count = 5;   ///< leading references the sweep pulls to
  topo::SweepGrid sweep;

  recon::ReconConfig recon;

  modal::Material material = modal::Material::cast_aluminum();
  double elem_size_mm = 7.0;
  int n_modes = 12;
  double shift_hz = 10.0;

  int kmeans_k = 10;
  int lhs_samples = 1000;  ///< clamped to the dataset size
  int hist_bins = 20;
  double iou_voxel_mm = 2.0;
  int chamfer_points = 10000;

  static PipelineConfig from_config(const Config& cfg);
  void validate() const;  // throws ConfigInvalid
};

struct DesignOutcome {
  std::string design_id;
  bool ok = false;
  bool skipped = false;  ///< output already present; counted towards ok
  std::string error;
};

struct StageReport {
  std::string stage;
  std::vector<DesignOutcome> outcomes;
  std::size_t ok_count = 0;
  std::size_t failed_count = 0;
  std::size_t skipped_count = 0;  ///< subset of ok_count
};

/// One design's row in manifest.csv. Paths are output_root-relative so two
/// runs into different roots still produce identical bytes.
struct ManifestRow {
  std::string design_id;
  std::string provenance;  ///< "reference" | "topo"
  std::string mask_path;
  std::string depth_path;
  std::string mesh_path;
  std::string status;  ///< generated|depth|recon|ok|failed:<stage>
  std::string score;   ///< overall performance score; empty until simulate
};

struct Manifest {
  std::vector<ManifestRow> rows;

  static Manifest read(const std::string& path);
  void write(const std::string& path) const;
};

/// Deterministic parametric spoke layout on the segment grid: the family
/// cycles through straight, tapered, split, and bent spokes with stepped
/// widths; hub- and rim-side rows are always solid so spokes stay attached.
topo::ReferenceDesign parametric_reference(int index, int n_radial,
                                           int n_theta, int inner_rows,
                                           int outer_rows);

/// Batch stages. Each is idempotent per design: existing outputs are kept
/// (and reported as skipped) unless `force` is set. Per-design failures are
/// recorded in the report and the manifest, never thrown; configuration and
/// ordering problems (missing predecessor stage, unreadable config) throw.
StageReport run_generate(const PipelineConfig& cfg, bool force = false);
StageReport run_depth(const PipelineConfig& cfg, bool force = false);
StageReport run_recon(const PipelineConfig& cfg, bool force = false);
StageReport run_simulate(const PipelineConfig& cfg, bool force = false);
StageReport run_analyze(const PipelineConfig& cfg, bool force = false);
std::vector<StageReport> run_all(const PipelineConfig& cfg,
                                 bool force = false);

/// Histogram tables (mass, mode7, mode11, score) and scatter tables
/// (embedding, performance) under <output_root>/plots/. Score bins span
/// [0, 1]; the other histograms span the data range. Throws EmptyManifest
/// when no design has reached ok status.
void export_plots(const std::string& output_root, int hist_bins = 20);

}  // namespace wheelforge::pipeline
