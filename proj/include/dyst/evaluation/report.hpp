#pragma once

#include <span>
#include <string>

#include "dyst/evaluation/metrics.hpp"

namespace dyst::eval {

struct MetricReport {
  std::string label;  // usually the checkpoint's run name or mode
  int n_scenes = 0;
  RecombinationTable recombination;
  ContrastivenessReport camera;
  ContrastivenessReport dynamics;
};

/// Key = value text with a fixed key order, one block per report. With
/// several reports a side-by-side comparison table follows as comment
/// lines. LPIPS is listed as unavailable.
std::string format_report(std::span<const MetricReport> reports);

/// Comma-separated matrix, one row per line.
std::string matrix_csv(const Eigen::MatrixXd& m);

}  // namespace dyst::eval
