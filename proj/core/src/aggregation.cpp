#include "rotospec/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace rotospec {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AggregateReport aggregate(std::span<const SpeedEstimate> estimates,
                          const AggregationConfig& config) {
  if (estimates.empty()) throw std::invalid_argument("aggregate needs at least one estimate");
  const std::size_t machine = estimates.front().machine_index;
  for (const auto& e : estimates) {
    if (e.machine_index != machine) {
      throw std::invalid_argument("estimates belong to different machines");
    }
  }

  std::vector<double> rpms;
  rpms.reserve(estimates.size());
  for (const auto& e : estimates) rpms.push_back(e.rpm);

  AggregateReport r;
  r.machine_index = machine;
  r.contributing = estimates.size();
  r.zone_halfwidth_rpm = config.zone_halfwidth_rpm;
  r.zone_center_rpm = median(rpms);

  std::vector<double> inside;
  for (const auto& e : estimates) {
    if (std::abs(e.rpm - r.zone_center_rpm) <= config.zone_halfwidth_rpm) {
      inside.push_back(e.rpm);
    } else {
      r.outlier_subcarriers.push_back(e.subcarrier_index);
    }
  }
  std::sort(r.outlier_subcarriers.begin(), r.outlier_subcarriers.end());
  // Summing in sorted order keeps the mean independent of input order.
  std::sort(inside.begin(), inside.end());

  r.loc = inside.size();
  r.loc_ratio = static_cast<double>(r.loc) / static_cast<double>(r.contributing);
  r.fused_rpm = inside.empty()
                    ? r.zone_center_rpm
                    : std::accumulate(inside.begin(), inside.end(), 0.0) /
                          static_cast<double>(inside.size());
  r.reconfigure_flag = r.loc_ratio < config.reliable_loc_ratio;
  return r;
}

namespace {

// Assigns the estimates of one subcarrier row to reference machines.
// Returns, per estimate, the reference index or npos.
std::vector<std::size_t> match_row(const std::vector<SpeedEstimate>& row,
                                   const std::vector<double>& refs,
                                   double halfwidth) {
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> assignment(row.size(), npos);

  if (row.size() == refs.size()) {
    bool all_in_zone = true;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::abs(row[i].rpm - refs[i]) > halfwidth) {
        all_in_zone = false;
        break;
      }
    }
    if (all_in_zone) {
      std::iota(assignment.begin(), assignment.end(), std::size_t{0});
      return assignment;
    }
  }

  // In-zone pairs, nearest first.
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < row.size(); ++i) {
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const double d = std::abs(row[i].rpm - refs[j]);
      if (d <= halfwidth) pairs.emplace_back(d, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> ref_used(refs.size(), false);
  for (const auto& [d, i, j] : pairs) {
    if (assignment[i] != npos || ref_used[j]) continue;
    assignment[i] = j;
    ref_used[j] = true;
  }

  // Leftovers pair up by rank.
  std::size_t j = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (assignment[i] != npos) continue;
    while (j < refs.size() && ref_used[j]) ++j;
    if (j == refs.size()) break;
    assignment[i] = j;
    ref_used[j] = true;
  }
  return assignment;
}

}  // namespace

std::vector<AggregateReport> aggregate_all(
    const std::vector<std::vector<SpeedEstimate>>& per_subcarrier,
    const AggregationConfig& config) {
  std::size_t machines = 0;
  for (const auto& row : per_subcarrier) machines = std::max(machines, row.size());
  if (machines == 0) return {};

  std::vector<std::vector<SpeedEstimate>> rows = per_subcarrier;
  for (auto& row : rows) {
    std::stable_sort(row.begin(), row.end(), [](const SpeedEstimate& a, const SpeedEstimate& b) {
      return a.rpm < b.rpm;
    });
  }

  std::vector<double> refs(machines);
  for (std::size_t m = 0; m < machines; ++m) {
    std::vector<double> column;
    for (const auto& row : rows) {
      if (row.size() == machines) column.push_back(row[m].rpm);
    }
    refs[m] = median(std::move(column));
  }

  std::vector<std::vector<SpeedEstimate>> per_machine(machines);
  for (const auto& row : rows) {
    const auto assignment = match_row(row, refs, config.zone_halfwidth_rpm);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (assignment[i] >= machines) continue;
      SpeedEstimate e = row[i];
      e.machine_index = assignment[i];
      per_machine[assignment[i]].push_back(e);
    }
  }

  std::vector<AggregateReport> reports;
  reports.reserve(machines);
  for (std::size_t m = 0; m < machines; ++m) {
    // Every reference comes from at least one full row, so none is empty.
    reports.push_back(aggregate(per_machine[m], config));
  }
  return reports;
}

}  // namespace rotospec
