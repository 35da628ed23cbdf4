#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rotospec/speed_extraction.hpp"

namespace rotospec {

struct AggregationConfig {
  double zone_halfwidth_rpm = 60.0;  // +/- 1 Hz at l = 1, inclusive
  double reliable_loc_ratio = 0.95;
};

/// Zone-of-Convergence fusion of one machine's per-subcarrier estimates.
struct AggregateReport {
  std::size_t machine_index = 0;
  double fused_rpm = 0.0;
  std::size_t loc = 0;           // in-zone subcarriers
  std::size_t contributing = 0;  // N for this machine
  double loc_ratio = 0.0;
  double zone_center_rpm = 0.0;  // median of contributing estimates
  double zone_halfwidth_rpm = 60.0;
  std::vector<std::size_t> outlier_subcarriers;  // ascending
  bool reconfigure_flag = false;
};

/// Median-centred zone, mean of in-zone rpm values. The result does not
/// depend on input order. Throws std::invalid_argument on empty input or
/// mixed machine indices.
AggregateReport aggregate(std::span<const SpeedEstimate> estimates,
                          const AggregationConfig& config = {});

/// Median of a non-empty set (mean of the middle pair for even counts).
double median(std::vector<double> values);

/// Fuses an N x (<= M) table of per-subcarrier estimates (each row ascending
/// by rpm, as extract_speeds returns them) into one report per machine.
///
/// Machines are identified by rank on the subcarriers that detected the most
/// machines; the per-rank medians of those rows become reference speeds. A
/// row whose rank assignment leaves some estimate outside the zone of its
/// reference is re-matched: in-zone (estimate, reference) pairs are taken
/// nearest first, and whatever is left pairs up by rank. Missing detections
/// shrink N for that machine. One report per reference, ascending by speed.
std::vector<AggregateReport> aggregate_all(
    const std::vector<std::vector<SpeedEstimate>>& per_subcarrier,
    const AggregationConfig& config = {});

}  // namespace rotospec
