// mrfgs: multi-resolution factor-graph stereo from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mrfgs/image_io.hpp"
#include "mrfgs/metrics.hpp"
#include "mrfgs/middlebury.hpp"
#include "mrfgs/pipeline.hpp"
#include "mrfgs/report.hpp"
#include "mrfgs/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mrfgs;

namespace {

struct CaseArgs {
  fs::path dir;
  int vintage = 2003;
  bool full = false;
};

struct ModeArgs {
  std::string prior_mode = "similarity";
  std::string res_potential = "band";
  std::string spatial_potential = "strict";
};

void add_case_options(CLI::App* cmd, CaseArgs& c) {
  cmd->add_option("dir", c.dir, "Middlebury case directory")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--vintage", c.vintage, "Dataset layout: 2003, 2005, 2006 or 2014")
      ->check(CLI::IsMember({2003, 2005, 2006, 2014}));
  auto* quarter = cmd->add_flag("--quarter", "Quarter-resolution inputs and ground truth (default)");
  cmd->add_flag("--full", c.full, "Full-resolution inputs")->excludes(quarter);
}

void add_config_options(CLI::App* cmd, bench::RunConfig& cfg, ModeArgs& m) {
  cmd->add_option("--levels", cfg.levels, "Resolution levels (1 = single-level mode)")->check(CLI::PositiveNumber);
  cmd->add_option("--tau", cfg.tau, "Convergence threshold on RMS label change");
  cmd->add_option("--max-iters", cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--damping", cfg.damping, "Message damping in [0,1)")->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--prior-mode", m.prior_mode, "literal|similarity")
      ->check(CLI::IsMember({"literal", "similarity"}));
  cmd->add_option("--res-potential", m.res_potential, "strict|band")->check(CLI::IsMember({"strict", "band"}));
  cmd->add_option("--spatial-potential", m.spatial_potential, "strict|relaxed")
      ->check(CLI::IsMember({"strict", "relaxed"}));
  cmd->add_option("--percentile", cfg.percentile, "Neighbour selection percentile")->check(CLI::Range(0.0, 100.0));
  cmd->add_option("--window", cfg.window, "Matching / neighbourhood window side");
  cmd->add_option("--max-disp", cfg.max_disparity, "Disparity search limit (0 = from calib or width/3)");
  cmd->add_option("--seed", cfg.seed, "Segmentation seed");
  cmd->add_flag("!--no-post", cfg.post_process, "Skip the weighted median filter");
}

void apply_modes(bench::RunConfig& cfg, const ModeArgs& m) {
  cfg.prior_mode = bench::parse_prior_mode(m.prior_mode);
  cfg.potentials.resolution = bench::parse_resolution_mode(m.res_potential);
  cfg.potentials.spatial = bench::parse_spatial_mode(m.spatial_potential);
}

bench::StereoCase load_case(const CaseArgs& c) {
  auto stereo = bench::load_middlebury_case(c.dir, c.vintage);
  return c.full ? stereo : bench::quarter_resolution(stereo);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <typename F>
void write_stream(const fs::path& path, F&& fn) {
  std::ofstream out(path, std::ios::binary);
  fn(out);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

int cmd_run(const CaseArgs& c, bench::RunConfig cfg, const ModeArgs& m, const fs::path& out, bool dump) {
  apply_modes(cfg, m);
  fs::create_directories(out);
  if (dump) cfg.dump_dir = out / "intermediate";
  const auto stereo = load_case(c);
  const auto result = bench::run_pipeline(stereo, cfg);

  io::write_pfm(result.final, out / "disparity.pfm");
  io::write_png(metrics::normalized_disparity(result.final), out / "disparity.png");
  io::write_pfm(result.raw, out / "disparity_raw.pfm");
  const auto err = metrics::error_map(result.final, stereo.ground_truth);
  io::write_pfm(err, out / "error.pfm");
  metrics::write_error_png(err, out / "error.png");
  write_text(out / "config.json", bench::config_json(cfg));
  write_stream(out / "report.csv", [&](std::ostream& os) { bench::write_report_csv(os, {result.report}); });
  write_stream(out / "report.txt", [&](std::ostream& os) { bench::write_report_table(os, {result.report}); });
  write_stream(out / "timings.csv", [&](std::ostream& os) { bench::write_timings_csv(os, result.report); });

  bench::write_report_table(std::cout, {result.report});
  return 0;
}

int cmd_compare(const CaseArgs& c, bench::RunConfig cfg, const ModeArgs& m, const fs::path& out) {
  apply_modes(cfg, m);
  const auto stereo = load_case(c);
  const auto cmp = bench::compare_modes(stereo, cfg);
  if (!out.empty()) {
    fs::create_directories(out);
    write_text(out / "config.json", bench::config_json(cfg));
    write_stream(out / "comparison.csv", [&](std::ostream& os) { bench::write_comparison_csv(os, cmp); });
    write_stream(out / "comparison.txt", [&](std::ostream& os) { bench::write_comparison_table(os, cmp); });
  }
  bench::write_comparison_table(std::cout, cmp);
  return 0;
}

DisparityMap load_disparity(const fs::path& path, double scale) {
  const auto raw = io::read_raw(path);
  if (raw.floating) return io::read_pfm_disparity(path);
  DisparityMap map(raw.width, raw.height);
  const auto stride = static_cast<std::size_t>(raw.channels);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double v = raw.samples[i * stride];
    if (v <= 0.0) {
      map.invalidate(i);
    } else {
      map.set(i, static_cast<float>(v / scale));
    }
  }
  return map;
}

int cmd_eval(const fs::path& est_path, const fs::path& gt_path, double scale) {
  const auto est = io::read_pfm_disparity(est_path);
  const auto gt = load_disparity(gt_path, scale);
  const auto row = bench::evaluate(est, gt);
  std::cout << "Avg.err    " << row.avg_err << "\n"
            << "PSNR(dB)   " << row.psnr.to_string() << "\n"
            << "Bad2.0(%)  " << row.bad2 << "\n";
  return 0;
}

int cmd_synth(const fs::path& out, std::uint64_t seed, bool zero) {
  bench::SyntheticOptions so;
  so.seed = seed;
  const auto c = zero ? bench::synthetic_zero_disparity(so) : bench::synthetic_planes(so);
  fs::create_directories(out);
  io::write_png(c.left, out / "im0.png");
  io::write_png(c.right, out / "im1.png");
  io::write_pfm(c.ground_truth, out / "disp0GT.pfm");
  write_text(out / "calib.txt", "ndisp=" + std::to_string(c.ndisp.value_or(0)) + "\n");
  std::cout << "wrote " << c.name << " scene to " << out.string() << " (2014 layout)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-resolution factor-graph stereo matching"};
  app.require_subcommand(1);

  CaseArgs run_case;
  bench::RunConfig run_cfg;
  ModeArgs run_modes;
  fs::path run_out = "mrfgs_out";
  bool run_dump = false;
  auto* run = app.add_subcommand("run", "Estimate disparity for one case and score it");
  add_case_options(run, run_case);
  add_config_options(run, run_cfg, run_modes);
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--dump", run_dump, "Write segments, cost volume, graph stats and BP trace");

  CaseArgs cmp_case;
  bench::RunConfig cmp_cfg;
  ModeArgs cmp_modes;
  fs::path cmp_out;
  auto* compare = app.add_subcommand("compare", "Single-level vs multi-resolution, with and without post-processing");
  add_case_options(compare, cmp_case);
  add_config_options(compare, cmp_cfg, cmp_modes);
  compare->add_option("--out", cmp_out, "Output directory for CSV and table");

  fs::path est_path;
  fs::path gt_path;
  double scale = 1.0;
  auto* eval = app.add_subcommand("eval", "Score a PFM disparity map against ground truth");
  eval->add_option("estimate", est_path, "Estimated disparity (PFM)")->required()->check(CLI::ExistingFile);
  eval->add_option("ground_truth", gt_path, "Ground truth (PFM, PGM or PNG)")->required()->check(CLI::ExistingFile);
  eval->add_option("--scale", scale, "Integer ground-truth scale factor")->check(CLI::PositiveNumber);

  fs::path synth_out = "synthetic";
  std::uint64_t synth_seed = 7;
  bool synth_zero = false;
  auto* synth = app.add_subcommand("synth", "Write the synthetic plane scene in the 2014 layout");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", synth_seed, "Texture seed");
  synth->add_flag("--zero", synth_zero, "Zero-disparity textured pair instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_case, run_cfg, run_modes, run_out, run_dump);
    if (*compare) return cmd_compare(cmp_case, cmp_cfg, cmp_modes, cmp_out);
    if (*eval) return cmd_eval(est_path, gt_path, scale);
    if (*synth) return cmd_synth(synth_out, synth_seed, synth_zero);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_FAILURE;
}
