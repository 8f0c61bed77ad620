// sdrtse/report.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_REPORT_H_
#define SDRTSE_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "sdrtse/metrics.h"

namespace sdrtse {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Self-contained SVG documents.
std::string SvgLineChart(const std::string &title, const std::string &x_label,
                         const std::vector<Series> &series);
// Counts of `values` over `bins` equal-width bins spanning [min, max].
std::vector<int64_t> HistogramCounts(const std::vector<double> &values, int bins,
                                     double *lo = nullptr, double *hi = nullptr);
std::string SvgHistogram(const std::string &title, const std::vector<double> &values, int bins);

// Markdown table, one row per report. The PESQ column appears only when some
// report carries PESQ values.
std::string ComparisonTable(const std::vector<EvalReport> &reports);

struct ReportOptions {
  int bins = 50;
};

struct ReportFiles {
  std::filesystem::path table;
  std::vector<std::filesystem::path> plots;
};

// Reads eval reports and (optionally) metrics logs, writes summary.md and
// SVG plots into out_dir.
ReportFiles WriteReport(const std::vector<std::filesystem::path> &eval_files,
                        const std::vector<std::filesystem::path> &metric_logs,
                        const std::filesystem::path &out_dir, const ReportOptions &opts = {});

}  // namespace sdrtse

#endif  // SDRTSE_REPORT_H_
