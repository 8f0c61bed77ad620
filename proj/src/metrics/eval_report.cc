// metrics/eval_report.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "sdrtse/metrics.h"

namespace sdrtse {

using nlohmann::json;

namespace {

json Optional(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

std::optional<double> OptionalField(const json &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

AggregateMetrics EvalReport::Aggregate() const {
  AggregateMetrics a;
  a.utterances = utterances.size();
  double r_sum = 0.0, pesq_sum = 0.0;
  size_t r_count = 0, pesq_count = 0;
  for (const auto &u : utterances) {
    a.si_snri_db += u.si_snri_db;
    a.sdri_db += u.sdri_db;
    a.chunks_total += u.chunks_total;
    a.chunks_sc += u.chunks_sc;
    a.chunks_valid += u.chunks_valid;
    if (u.r_scr_pct) {
      r_sum += *u.r_scr_pct;
      ++r_count;
    }
    if (u.pesq) {
      pesq_sum += *u.pesq;
      ++pesq_count;
    }
  }
  if (a.utterances > 0) {
    a.si_snri_db /= a.utterances;
    a.sdri_db /= a.utterances;
  }
  if (r_count > 0) a.r_scr_pct = r_sum / r_count;
  if (a.chunks_valid > 0)
    a.pooled_r_scr_pct = 100.0 * static_cast<double>(a.chunks_sc) / a.chunks_valid;
  if (pesq_count > 0) a.pesq = pesq_sum / pesq_count;
  return a;
}

void WriteEvalReport(const std::filesystem::path &path, const EvalReport &report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write report " + path.string());
  os << json{{"record", "header"},
             {"label", report.label},
             {"config_hash", report.config_hash},
             {"chunk_ms", report.sc.chunk_ms},
             {"hop_ms", report.sc.hop_ms},
             {"eta", report.sc.eta},
             {"strict", report.sc.strict}}
            .dump()
     << '\n';
  for (const auto &u : report.utterances) {
    json j{{"record", "utterance"},
           {"id", u.id},
           {"speaker_id", u.speaker_id},
           {"si_snri_db", u.si_snri_db},
           {"sdri_db", u.sdri_db},
           {"r_scr_pct", Optional(u.r_scr_pct)},
           {"chunks_total", u.chunks_total},
           {"chunks_sc", u.chunks_sc},
           {"chunks_valid", u.chunks_valid}};
    if (u.pesq) j["pesq"] = *u.pesq;
    os << j.dump() << '\n';
  }
  const auto a = report.Aggregate();
  json agg{{"record", "aggregate"},
           {"utterances", a.utterances},
           {"si_snri_db", a.si_snri_db},
           {"sdri_db", a.sdri_db},
           {"r_scr_pct", Optional(a.r_scr_pct)},
           {"pooled_r_scr_pct", Optional(a.pooled_r_scr_pct)},
           {"chunks_total", a.chunks_total},
           {"chunks_sc", a.chunks_sc},
           {"chunks_valid", a.chunks_valid}};
  if (a.pesq) agg["pesq"] = *a.pesq;
  os << agg.dump() << '\n';
  if (!os) throw std::runtime_error("failed writing report " + path.string());
}

EvalReport ReadEvalReport(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open report " + path.string());
  EvalReport report;
  bool header = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "header") {
        header = true;
        report.label = j.at("label").get<std::string>();
        report.config_hash = j.at("config_hash").get<std::string>();
        report.sc.chunk_ms = j.at("chunk_ms").get<double>();
        report.sc.hop_ms = j.at("hop_ms").get<double>();
        report.sc.eta = j.at("eta").get<double>();
        report.sc.strict = j.at("strict").get<bool>();
      } else if (kind == "utterance") {
        UtteranceMetrics u;
        u.id = j.at("id").get<std::string>();
        u.speaker_id = j.at("speaker_id").get<std::string>();
        u.si_snri_db = j.at("si_snri_db").get<double>();
        u.sdri_db = j.at("sdri_db").get<double>();
        u.r_scr_pct = OptionalField(j, "r_scr_pct");
        u.chunks_total = j.at("chunks_total").get<int64_t>();
        u.chunks_sc = j.at("chunks_sc").get<int64_t>();
        u.chunks_valid = j.at("chunks_valid").get<int64_t>();
        u.pesq = OptionalField(j, "pesq");
        report.utterances.push_back(std::move(u));
      } else if (kind != "aggregate") {
        throw std::runtime_error("unknown record type '" + kind + "'");
      }
    } catch (const std::exception &e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": malformed report record: " + e.what());
    }
  }
  if (!header) throw std::runtime_error(path.string() + ": report has no header record");
  return report;
}

}  // namespace sdrtse
