#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "wheelforge/config.hpp"
#include "wheelforge/errors.hpp"
#include "wheelforge/pipeline.hpp"

namespace {

using wheelforge::pipeline::StageReport;

void print_report(const StageReport& rep, double seconds) {
  std::printf("[%-8s] ok %zu/%zu (%zu failed, %zu skipped) in %.1fs\n",
              rep.stage.c_str(), rep.ok_count, rep.outcomes.size(),
              rep.failed_count, rep.skipped_count, seconds);
  for (const auto& o : rep.outcomes)
    if (!o.ok)
      std::printf("    failed %s: %s\n", o.design_id.c_str(),
                  o.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wheelforge: batch wheel design and performance dataset"};
  app.require_subcommand(1);

  std::string config_path, output_root, seed_text;
  int designs = -1, workers = -1;
  bool force = false;
  app.add_option("-c,--config", config_path,
                 "key=value config file ([section] headers, comma lists)")
      ->check(CLI::ExistingFile);
  app.add_option("-o,--output", output_root, "output directory");
  app.add_option("--seed", seed_text, "master seed (unsigned 64-bit)");
  app.add_option("--designs", designs, "keep only the first N designs");
  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  app.add_flag("--force", force, "regenerate outputs that already exist");

  const struct {
    const char* name;
    const char* help;
  } stages[] = {
      {"generate", "spoke layouts and wheel masks"},
      {"depth", "depth maps from wheel masks"},
      {"recon", "watertight surface meshes from depth maps"},
      {"simulate", "free-free modal analysis and scores"},
      {"analyze", "features, embedding, clusters, diversity, fidelity"},
      {"all", "every stage in order"},
  };
  for (const auto& s : stages) app.add_subcommand(s.name, s.help)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    wheelforge::Config file_cfg;
    if (!config_path.empty())
      file_cfg = wheelforge::Config::parse_file(config_path);
    if (!output_root.empty())
      file_cfg.set("pipeline.output_root", output_root);
    if (!seed_text.empty()) file_cfg.set("pipeline.seed", seed_text);
    if (designs >= 0)
      file_cfg.set("pipeline.designs", std::to_string(designs));
    if (workers >= 0)
      file_cfg.set("pipeline.workers", std::to_string(workers));

    const auto cfg = wheelforge::pipeline::PipelineConfig::from_config(file_cfg);
    cfg.validate();

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&t0] {
      return std::chrono::duration<double>(clock::now() - t0).count();
    };

    std::vector<StageReport> reports;
    double last = 0.0;
    auto run_one = [&](StageReport rep) {
      const double now = elapsed();
      print_report(rep, now - last);
      last = now;
      reports.push_back(std::move(rep));
    };
    using namespace wheelforge::pipeline;
    if (stage == "generate" || stage == "all") run_one(run_generate(cfg, force));
    if (stage == "depth" || stage == "all") run_one(run_depth(cfg, force));
    if (stage == "recon" || stage == "all") run_one(run_recon(cfg, force));
    if (stage == "simulate" || stage == "all") run_one(run_simulate(cfg, force));
    if (stage == "analyze" || stage == "all") run_one(run_analyze(cfg, force));
    std::printf("total: %.1fs, outputs in %s\n", elapsed(),
                cfg.output_root.c_str());
  } catch (const wheelforge::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
