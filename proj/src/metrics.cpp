#include "radarnet/metrics.hpp"

#include <cstdio>
#include <ostream>

namespace radarnet::sim {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

void write_records_header(std::ostream& out) { out << kRecordsHeader << '\n'; }

void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records, std::uint64_t seed,
                       const std::string& scenario) {
  for (const auto& r : records) {
    out << r.tick << ',' << method_name(r.method) << ',' << seed << ',' << scenario << ','
        << format_number(r.utility) << ',' << format_number(r.load_mean) << ',' << format_number(r.coverage) << ','
        << r.conflicts << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows, const std::string& scenario) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << r.tick << ',' << method_name(r.method) << ',' << scenario << ',' << r.n_seeds << ','
        << format_number(r.utility.mean) << ',' << format_number(r.utility.stddev) << ','
        << format_number(r.load_mean.mean) << ',' << format_number(r.load_mean.stddev) << ','
        << format_number(r.coverage.mean) << ',' << format_number(r.coverage.stddev) << ','
        << format_number(r.conflicts.mean) << ',' << format_number(r.conflicts.stddev) << '\n';
  }
}

}  // namespace radarnet::sim
