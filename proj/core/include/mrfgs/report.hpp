#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrfgs/pipeline.hpp"

namespace mrfgs::bench {

/// Metric reports carry no timing so they are reproducible byte for byte;
/// stage timings are written separately.
void write_report_csv(std::ostream& os, const std::vector<EvalReport>& reports);
void write_report_table(std::ostream& os, const std::vector<EvalReport>& reports);
void write_timings_csv(std::ostream& os, const EvalReport& report);

void write_comparison_csv(std::ostream& os, const Comparison& cmp);
void write_comparison_table(std::ostream& os, const Comparison& cmp);

/// Indented JSON echo of every configuration field.
std::string config_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

std::string to_string(priors::PriorMode mode);
std::string to_string(graph::SpatialMode mode);
std::string to_string(graph::ResolutionMode mode);
priors::PriorMode parse_prior_mode(const std::string& s);
graph::SpatialMode parse_spatial_mode(const std::string& s);
graph::ResolutionMode parse_resolution_mode(const std::string& s);

}  // namespace mrfgs::bench
