#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "xcast/bench/runner.hpp"

namespace xcast::bench {

/// Fixed column order, one row per report.
std::string csv_header();
void write_csv(std::ostream& out, const std::vector<MetricsReport>& reports);
void write_json(std::ostream& out, const std::vector<MetricsReport>& reports);

/// Writes `{stem}.csv` and `{stem}.json`; returns the two paths.
std::vector<std::string> emit_report(const std::vector<MetricsReport>& reports, const std::string& stem);

/// Summary of a JSON-lines trace: event counts and byte totals by kind and tag.
std::string summarize_trace(const std::vector<netsim::TraceEvent>& events);

}  // namespace xcast::bench
