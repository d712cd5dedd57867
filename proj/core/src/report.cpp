#include "mrfgs/report.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace mrfgs::bench {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

/// Left-aligned first column, right-aligned rest, two-space gutters.
void write_aligned(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string pad(width[c] - r[c].size(), ' ');
      if (c > 0) os << "  ";
      os << (c == 0 ? r[c] + pad : pad + r[c]);
    }
    os << '\n';
  }
}

}  // namespace

std::string to_string(priors::PriorMode mode) { return mode == priors::PriorMode::Literal ? "literal" : "similarity"; }
std::string to_string(graph::SpatialMode mode) { return mode == graph::SpatialMode::Relaxed ? "relaxed" : "strict"; }
std::string to_string(graph::ResolutionMode mode) { return mode == graph::ResolutionMode::Band ? "band" : "strict"; }

priors::PriorMode parse_prior_mode(const std::string& s) {
  if (s == "similarity") return priors::PriorMode::Similarity;
  if (s == "literal") return priors::PriorMode::Literal;
  throw std::invalid_argument("unknown prior mode '" + s + "'");
}

graph::SpatialMode parse_spatial_mode(const std::string& s) {
  if (s == "strict") return graph::SpatialMode::Strict;
  if (s == "relaxed") return graph::SpatialMode::Relaxed;
  throw std::invalid_argument("unknown spatial potential '" + s + "'");
}

graph::ResolutionMode parse_resolution_mode(const std::string& s) {
  if (s == "strict") return graph::ResolutionMode::Strict;
  if (s == "band") return graph::ResolutionMode::Band;
  throw std::invalid_argument("unknown resolution potential '" + s + "'");
}

void write_report_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
  os << "case,levels,post_processed,iterations,converged,max_disparity,"
        "raw_avg_err,raw_psnr_db,raw_bad2,final_avg_err,final_psnr_db,final_bad2\n";
  for (const auto& r : reports) {
    os << r.case_name << ',' << r.levels << ',' << (r.post_processed ? 1 : 0) << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',' << r.max_disparity << ',' << fixed(r.raw.avg_err, 6) << ','
       << r.raw.psnr.to_string() << ',' << fixed(r.raw.bad2, 4) << ',' << fixed(r.final.avg_err, 6) << ','
       << r.final.psnr.to_string() << ',' << fixed(r.final.bad2, 4) << '\n';
  }
}

void write_report_table(std::ostream& os, const std::vector<EvalReport>& reports) {
  std::vector<std::vector<std::string>> rows{
      {"case", "L", "stage", "Avg.err", "PSNR(dB)", "Bad2.0(%)", "iters", "converged"}};
  for (const auto& r : reports) {
    rows.push_back({r.case_name, std::to_string(r.levels), "raw", fixed(r.raw.avg_err, 2), r.raw.psnr.to_string(),
                    fixed(r.raw.bad2, 2), std::to_string(r.iterations), yes_no(r.converged)});
    if (r.post_processed) {
      rows.push_back({r.case_name, std::to_string(r.levels), "final", fixed(r.final.avg_err, 2),
                      r.final.psnr.to_string(), fixed(r.final.bad2, 2), std::to_string(r.iterations),
                      yes_no(r.converged)});
    }
  }
  write_aligned(os, rows);
}

void write_timings_csv(std::ostream& os, const EvalReport& report) {
  os << "stage,ms\n";
  for (const auto& [name, ms] : report.stage_ms) os << name << ',' << fixed(ms, 3) << '\n';
}

void write_comparison_csv(std::ostream& os, const Comparison& cmp) {
  os << "case,mode,levels,post_processed,avg_err,psnr_db,bad2,iterations,converged\n";
  for (const auto& r : cmp.rows) {
    os << cmp.case_name << ',' << r.mode << ',' << r.levels << ',' << (r.post_processed ? 1 : 0) << ','
       << fixed(r.metrics.avg_err, 6) << ',' << r.metrics.psnr.to_string() << ',' << fixed(r.metrics.bad2, 4) << ','
       << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_comparison_table(std::ostream& os, const Comparison& cmp) {
  std::vector<std::vector<std::string>> rows{{"mode", "L", "post", "Avg.err", "PSNR(dB)", "Bad2.0(%)", "iters"}};
  for (const auto& r : cmp.rows) {
    rows.push_back({r.mode, std::to_string(r.levels), yes_no(r.post_processed), fixed(r.metrics.avg_err, 2),
                    r.metrics.psnr.to_string(), fixed(r.metrics.bad2, 2), std::to_string(r.iterations)});
  }
  os << cmp.case_name << '\n';
  write_aligned(os, rows);
}

std::string config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["levels"] = cfg.levels;
  j["percentile"] = cfg.percentile;
  j["sigma_spatial"] = cfg.sigma_spatial;
  j["sigma_range"] = cfg.sigma_range;
  j["window"] = cfg.window;
  j["homomorphic_window"] = cfg.homomorphic_window;
  j["prior_mode"] = to_string(cfg.prior_mode);
  j["spatial_potential"] = to_string(cfg.potentials.spatial);
  j["lambda"] = cfg.potentials.lambda;
  j["resolution_potential"] = to_string(cfg.potentials.resolution);
  j["band"] = cfg.potentials.band;
  j["res_epsilon"] = cfg.potentials.res_epsilon;
  j["tau"] = cfg.tau;
  j["max_iters"] = cfg.max_iters;
  j["damping"] = cfg.damping;
  j["seed"] = cfg.seed;
  j["clusters"] = cfg.clusters;
  j["kmeans_replicates"] = cfg.kmeans_replicates;
  j["min_segment_size"] = cfg.min_segment_size;
  j["max_corners"] = cfg.max_corners;
  j["corner_quality"] = cfg.corner_quality;
  j["match_ratio"] = cfg.match_ratio;
  j["max_disparity"] = cfg.max_disparity;
  j["post_process"] = cfg.post_process;
  j["resolution_machinery"] = cfg.resolution_machinery;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunConfig c;
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("levels", c.levels);
  get("percentile", c.percentile);
  get("sigma_spatial", c.sigma_spatial);
  get("sigma_range", c.sigma_range);
  get("window", c.window);
  get("homomorphic_window", c.homomorphic_window);
  if (j.contains("prior_mode")) c.prior_mode = parse_prior_mode(j.at("prior_mode").get<std::string>());
  if (j.contains("spatial_potential")) {
    c.potentials.spatial = parse_spatial_mode(j.at("spatial_potential").get<std::string>());
  }
  get("lambda", c.potentials.lambda);
  if (j.contains("resolution_potential")) {
    c.potentials.resolution = parse_resolution_mode(j.at("resolution_potential").get<std::string>());
  }
  get("band", c.potentials.band);
  get("res_epsilon", c.potentials.res_epsilon);
  get("tau", c.tau);
  get("max_iters", c.max_iters);
  get("damping", c.damping);
  get("seed", c.seed);
  get("clusters", c.clusters);
  get("kmeans_replicates", c.kmeans_replicates);
  get("min_segment_size", c.min_segment_size);
  get("max_corners", c.max_corners);
  get("corner_quality", c.corner_quality);
  get("match_ratio", c.match_ratio);
  get("max_disparity", c.max_disparity);
  get("post_process", c.post_process);
  get("resolution_machinery", c.resolution_machinery);
  validate(c);
  return c;
}

}  // namespace mrfgs::bench
