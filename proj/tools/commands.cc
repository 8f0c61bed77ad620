// tools/commands.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "commands.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "sdrtse/checkpoint.h"
#include "sdrtse/config.h"
#include "sdrtse/corpus.h"
#include "sdrtse/evaluate.h"
#include "sdrtse/report.h"
#include "sdrtse/training.h"

namespace sdrtse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Usage problems detected after parsing (bad config keys, missing inputs).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

fs::path OutputPath(const std::string &p) {
  fs::path path(p);
  const char *root = std::getenv(kOutputRootEnv);
  if (path.is_relative() && root != nullptr && *root != '\0') return fs::path(root) / path;
  return path;
}

json ReadJsonFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw UsageError("malformed config " + path + ": " + e.what());
  }
}

std::string ReadFile(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Flag > config file > default.
RunConfig BuildConfig(json doc, const std::vector<std::string> &sets,
                      const std::vector<std::pair<std::string, std::string>> &flags) {
  try {
    for (const auto &s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got " + s);
      SetConfigValue(doc, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto &[key, value] : flags) SetConfigValue(doc, key, value);
    return RunConfig::FromJson(doc);
  } catch (const UsageError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
}

Manifest LoadSplit(const std::string &manifest_path, const std::string &split) {
  if (!fs::exists(manifest_path)) throw UsageError("manifest " + manifest_path + " not found");
  auto m = FilterSplit(ReadManifest(manifest_path), split);
  if (m.empty()) throw UsageError("manifest has no '" + split + "' entries");
  return m;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
};

void AddCommon(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--set", c.sets, "override a config key, e.g. optim.max_steps=100");
}

int CmdSynth(const Common &common, const std::string &out, const std::optional<int> &speakers,
             const std::optional<uint64_t> &seed, std::ostream &os) {
  std::vector<std::pair<std::string, std::string>> flags;
  if (speakers) flags.emplace_back("corpus.speakers", std::to_string(*speakers));
  if (seed) flags.emplace_back("corpus.seed", std::to_string(*seed));
  auto cfg = BuildConfig(common.config.empty() ? json::object() : ReadJsonFile(common.config),
                         common.sets, flags);
  const auto dir = OutputPath(out);
  auto summary = SynthCorpus(cfg.corpus, dir);
  int train = 0, test = 0;
  std::set<std::string> ids;
  for (const auto &e : summary.manifest) {
    (e.split == "train" ? train : test)++;
    ids.insert(e.speaker_id);
  }
  os << "speakers      " << ids.size() << "\n"
     << "utterances    " << summary.num_utterances << "\n"
     << "triplets      " << train << " train, " << test << " test\n"
     << "manifest      " << summary.manifest_path.string() << "\n"
     << "manifest_hash " << Fnv1aHex(ReadFile(summary.manifest_path)) << "\n";
  return kExitOk;
}

int CmdTrain(const Common &common, const std::string &manifest, const std::string &out,
             const std::string &resume, const std::optional<int> &max_steps,
             const std::string &guidance, bool verbose, std::ostream &os) {
  json base = json::object();
  if (!common.config.empty()) {
    base = ReadJsonFile(common.config);
  } else if (!resume.empty()) {
    base = ReadCheckpointInfo(resume).config.ToJson();
  }
  std::vector<std::pair<std::string, std::string>> flags;
  if (max_steps) flags.emplace_back("optim.max_steps", std::to_string(*max_steps));
  if (!guidance.empty()) flags.emplace_back("sen.guidance", guidance);
  const auto cfg = BuildConfig(base, common.sets, flags);

  const auto train = TripletSet::Load(LoadSplit(manifest, "train"));
  const auto val = TripletSet::Load(LoadSplit(manifest, "test"));
  std::unique_ptr<TrainState> state =
      resume.empty() ? std::make_unique<TrainState>(cfg) : LoadCheckpoint(resume, cfg);

  const auto dir = OutputPath(out);
  fs::create_directories(dir);
  {
    std::ofstream c(dir / "config.json");
    c << cfg.ToJson().dump(2) << "\n";
  }
  TrainOptions opts;
  opts.out_dir = dir;
  opts.verbose = verbose;
  auto result = Train(*state, train, val, opts);
  os << "steps          " << result.steps << (result.converged ? " (converged)" : "") << "\n"
     << "best val SI-SNRi " << result.best_val << " dB at step " << result.best_step << "\n"
     << "config_hash    " << cfg.ModelHash() << "\n"
     << "final          " << result.final_checkpoint.string() << "\n"
     << "log            " << result.log_path.string() << "\n";
  return kExitOk;
}

int CmdEval(const Common &common, const std::string &checkpoint, const std::string &manifest,
            const std::string &out, const std::string &guidance, const std::string &est_dir,
            const std::string &split, std::string label, bool strict, std::ostream &os) {
  const auto entries = LoadSplit(manifest, split);
  EvalReport report;
  if (!est_dir.empty()) {
    json doc = common.config.empty() ? json::object() : ReadJsonFile(common.config);
    std::vector<std::pair<std::string, std::string>> flags;
    if (strict) flags.emplace_back("metric.strict", "true");
    const auto cfg = BuildConfig(doc, common.sets, flags);
    report = EvaluateEstimates(est_dir, entries, cfg.metric, label.empty() ? "estimates" : label);
  } else {
    if (checkpoint.empty()) throw UsageError("eval needs --checkpoint or --est-dir");
    const auto info = ReadCheckpointInfo(checkpoint);
    json doc = common.config.empty() ? info.config.ToJson() : ReadJsonFile(common.config);
    std::vector<std::pair<std::string, std::string>> flags;
    if (!guidance.empty()) flags.emplace_back("sen.guidance", guidance);
    if (strict) flags.emplace_back("metric.strict", "true");
    const auto cfg = BuildConfig(doc, common.sets, flags);
    auto state = LoadCheckpoint(checkpoint, cfg);
    if (label.empty()) label = ToString(cfg.sen.guidance);
    report = EvaluateModel(state->model, entries, cfg.metric, label);
  }
  const auto path = OutputPath(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteEvalReport(path, report);
  const auto a = report.Aggregate();
  os << "utterances " << a.utterances << "\n"
     << "si_snri_db " << a.si_snri_db << "\n"
     << "sdri_db    " << a.sdri_db << "\n"
     << "r_scr_pct  " << (a.r_scr_pct ? std::to_string(*a.r_scr_pct) : "n/a") << "\n";
  return kExitOk;
}

int CmdEmbedDump(const Common &common, const std::string &checkpoint, const std::string &manifest,
                 const std::string &out, const std::string &split, std::ostream &os) {
  const auto info = ReadCheckpointInfo(checkpoint);
  json doc = common.config.empty() ? info.config.ToJson() : ReadJsonFile(common.config);
  const auto cfg = BuildConfig(doc, common.sets, {});
  auto state = LoadCheckpoint(checkpoint, cfg);
  const auto rows = ComputeEmbeddings(state->model, LoadSplit(manifest, split));
  const auto path = OutputPath(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteEmbeddingTable(path, rows, cfg.ModelHash());
  os << "rows " << rows.size() << " -> " << path.string() << "\n";
  return kExitOk;
}

int CmdReport(const std::vector<std::string> &evals, const std::vector<std::string> &logs,
              const std::string &out, int bins, std::ostream &os) {
  if (bins < 1) throw UsageError("--bins must be positive");
  std::vector<fs::path> e(evals.begin(), evals.end()), l(logs.begin(), logs.end());
  ReportOptions opts;
  opts.bins = bins;
  auto files = WriteReport(e, l, OutputPath(out), opts);
  std::ifstream table(files.table);
  os << table.rdbuf();
  os << files.plots.size() << " plots in " << OutputPath(out).string() << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"sdrtse: reference-guided target speech extraction"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;

  auto *synth = app.add_subcommand("synth", "synthesise a corpus and its manifest");
  std::string synth_out;
  std::optional<int> speakers;
  std::optional<uint64_t> seed;
  AddCommon(synth, common);
  synth->add_option("--out", synth_out, "output directory (absent or empty)")->required();
  synth->add_option("--speakers", speakers, "number of synthetic speakers");
  synth->add_option("--seed", seed, "corpus seed");

  auto *train = app.add_subcommand("train", "train a model");
  std::string manifest, out_path, resume, guidance;
  std::optional<int> max_steps;
  bool verbose = false;
  AddCommon(train, common);
  train->add_option("--manifest", manifest, "manifest.tsv")->required();
  train->add_option("--out", out_path, "run directory")->required();
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->add_option("--max-steps", max_steps, "step cap");
  train->add_option("--guidance", guidance, "z_s, z_g, z_c, z_c+z_g or z_c+z_s");
  train->add_flag("--verbose", verbose, "print validation progress");

  auto *eval = app.add_subcommand("eval", "score a checkpoint or precomputed estimates");
  std::string checkpoint, est_dir, split = "test", label;
  bool strict = false;
  AddCommon(eval, common);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file");
  eval->add_option("--manifest", manifest, "manifest.tsv")->required();
  eval->add_option("--out", out_path, "report file (JSON lines)")->required();
  eval->add_option("--guidance", guidance, "guidance the checkpoint was trained with");
  eval->add_option("--est-dir", est_dir, "score estimates named like the target files");
  eval->add_option("--split", split, "manifest split");
  eval->add_option("--label", label, "run label in the report");
  eval->add_flag("--strict", strict, "count confused chunks among valid chunks only");

  auto *embed = app.add_subcommand("embed-dump", "export pooled z_c, pooled z_g and z_s");
  AddCommon(embed, common);
  embed->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  embed->add_option("--manifest", manifest, "manifest.tsv")->required();
  embed->add_option("--out", out_path, "CSV table")->required();
  embed->add_option("--split", split, "manifest split");

  auto *report = app.add_subcommand("report", "comparison table and plots");
  std::vector<std::string> evals, logs;
  int bins = 50;
  report->add_option("--eval", evals, "eval report files");
  report->add_option("--log", logs, "metrics.jsonl files");
  report->add_option("--out", out_path, "output directory")->required();
  report->add_option("--bins", bins, "histogram bins");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return CmdSynth(common, synth_out, speakers, seed, out);
    if (train->parsed())
      return CmdTrain(common, manifest, out_path, resume, max_steps, guidance, verbose, out);
    if (eval->parsed())
      return CmdEval(common, checkpoint, manifest, out_path, guidance, est_dir, split, label,
                     strict, out);
    if (embed->parsed()) return CmdEmbedDump(common, checkpoint, manifest, out_path, split, out);
    if (report->parsed()) return CmdReport(evals, logs, out_path, bins, out);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sdrtse
