#pragma once

#include <filesystem>
#include <string>

#include "hyperlens/pipeline.hpp"

namespace hyperlens {

// "%.6g" rendering used for every metric value in report outputs.
std::string format_sig6(double value);
double round_sig6(double value);

// The full report as one self-describing JSON document: toolkit version,
// effective config, bundle summary, one block per analysis (explicit null
// when an analysis was not run), warnings. Field order is fixed and metric
// values carry 6 significant digits, so identical inputs give identical
// bytes. The worker count is deliberately not part of the document; results
// are worker-count-invariant by contract.
std::string report_to_json(const AnalysisReport& report);
void write_report_json(const AnalysisReport& report, const std::filesystem::path& file);

// One RFC-4180 CSV (CRLF, header row) per analysis that ran, under `dir`:
// retrieval.csv, separation_samples.csv, norms.csv, hyperbolicity.csv,
// agreement.csv.
void write_report_csv(const AnalysisReport& report, const std::filesystem::path& dir);

} // namespace hyperlens
