// report/report.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sdrtse/report.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdrtse/training.h"

namespace sdrtse {

namespace fs = std::filesystem;

namespace {

std::string Fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Optional(const std::optional<double> &v) { return v ? Fixed(*v) : "n/a"; }

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string ComparisonTable(const std::vector<EvalReport> &reports) {
  bool pesq = false;
  std::vector<AggregateMetrics> aggs;
  for (const auto &r : reports) {
    aggs.push_back(r.Aggregate());
    pesq = pesq || aggs.back().pesq.has_value();
  }
  std::ostringstream o;
  o << "| run | config | utterances | SI-SNRi (dB) | SDRi (dB) | r_scr (%) | pooled r_scr (%) |"
    << (pesq ? " PESQ |" : "") << "\n";
  o << "|---|---|---|---|---|---|---|" << (pesq ? "---|" : "") << "\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const auto &a = aggs[i];
    o << "| " << reports[i].label << " | " << reports[i].config_hash << " | " << a.utterances
      << " | " << Fixed(a.si_snri_db) << " | " << Fixed(a.sdri_db) << " | "
      << Optional(a.r_scr_pct) << " | " << Optional(a.pooled_r_scr_pct) << " |";
    if (pesq) o << " " << Optional(a.pesq) << " |";
    o << "\n";
  }
  return o.str();
}

ReportFiles WriteReport(const std::vector<fs::path> &eval_files,
                        const std::vector<fs::path> &metric_logs, const fs::path &out_dir,
                        const ReportOptions &opts) {
  if (eval_files.empty() && metric_logs.empty())
    throw std::invalid_argument("report needs at least one eval report or metrics log");
  fs::create_directories(out_dir);
  ReportFiles files;

  std::vector<EvalReport> reports;
  for (const auto &p : eval_files) {
    reports.push_back(ReadEvalReport(p));
    if (reports.back().label.empty()) reports.back().label = p.stem().string();
  }
  files.table = out_dir / "summary.md";
  WriteText(files.table, ComparisonTable(reports));

  for (size_t i = 0; i < reports.size(); ++i) {
    std::vector<double> sisnri, rscr;
    for (const auto &u : reports[i].utterances) {
      sisnri.push_back(u.si_snri_db);
      if (u.r_scr_pct) rscr.push_back(*u.r_scr_pct);
    }
    const std::string stem = "run" + std::to_string(i) + "_";
    auto p = out_dir / (stem + "si_snri_hist.svg");
    WriteText(p, SvgHistogram(reports[i].label + ": SI-SNRi (dB)", sisnri, opts.bins));
    files.plots.push_back(p);
    p = out_dir / (stem + "r_scr_hist.svg");
    WriteText(p, SvgHistogram(reports[i].label + ": r_scr (%)", rscr, opts.bins));
    files.plots.push_back(p);
  }

  if (!metric_logs.empty()) {
    const char *fields[] = {"l_sisnr", "l_rec", "l_kl", "i_vclub", "l_ll", "l_sim", "val_si_snri"};
    std::vector<std::vector<LossRecord>> logs;
    for (const auto &p : metric_logs) logs.push_back(ReadMetricsLog(p));
    for (const char *field : fields) {
      std::vector<Series> series;
      for (size_t k = 0; k < logs.size(); ++k) {
        Series s;
        s.name = metric_logs[k].parent_path().filename().string();
        if (s.name.empty()) s.name = metric_logs[k].stem().string();
        for (const auto &r : logs[k]) {
          const auto j = r.ToJson();
          if (!j.contains(field)) continue;
          s.x.push_back(static_cast<double>(r.step));
          s.y.push_back(j.at(field).get<double>());
        }
        series.push_back(std::move(s));
      }
      auto p = out_dir / (std::string("curve_") + field + ".svg");
      WriteText(p, SvgLineChart(field, "step", series));
      files.plots.push_back(p);
    }
  }
  return files;
}

}  // namespace sdrtse
