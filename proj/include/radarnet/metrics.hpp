#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "radarnet/simkit.hpp"

namespace radarnet::sim {

inline constexpr const char* kRecordsHeader = "tick,method,seed,scenario,utility,load_mean,coverage,conflicts";
inline constexpr const char* kAggregateHeader =
    "tick,method,scenario,n_seeds,utility_mean,utility_std,load_mean_mean,load_mean_std,"
    "coverage_mean,coverage_std,conflicts_mean,conflicts_std";

/// Locale-independent fixed formatting used by every CSV column.
std::string format_number(double v);

void write_records_header(std::ostream& out);
void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records, std::uint64_t seed,
                       const std::string& scenario);

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows, const std::string& scenario);

}  // namespace radarnet::sim
