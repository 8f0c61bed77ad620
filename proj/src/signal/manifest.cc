// signal/manifest.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sdrtse/corpus.h"

namespace sdrtse {

namespace fs = std::filesystem;

namespace {

constexpr const char *kHeader = "mixture_path\ttarget_path\treference_path\tspeaker_id\tsplit";

fs::path Relative(const fs::path &p, const fs::path &base) {
  if (p.is_relative()) return p;
  auto rel = p.lexically_relative(base);
  return rel.empty() ? p : rel;
}

}  // namespace

void WriteManifest(const fs::path &path, const Manifest &manifest) {
  const fs::path base = fs::absolute(path).parent_path();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest " + path.string());
  os << kHeader << '\n';
  for (const auto &e : manifest) {
    os << Relative(fs::absolute(e.mixture_path), base).generic_string() << '\t'
       << Relative(fs::absolute(e.target_path), base).generic_string() << '\t'
       << Relative(fs::absolute(e.reference_path), base).generic_string() << '\t'
       << e.speaker_id << '\t' << e.split << '\n';
  }
  if (!os) throw std::runtime_error("failed writing manifest " + path.string());
}

Manifest ReadManifest(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest " + path.string());
  const fs::path base = fs::absolute(path).parent_path();
  std::string line;
  if (!std::getline(is, line) || line != kHeader)
    throw std::runtime_error(path.string() + ": missing or malformed manifest header");
  Manifest manifest;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() != 5)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 5 tab-separated fields");
    auto resolve = [&](const std::string &p) {
      fs::path q(p);
      return q.is_absolute() ? q : (base / q).lexically_normal();
    };
    manifest.push_back({resolve(fields[0]), resolve(fields[1]), resolve(fields[2]),
                        fields[3], fields[4]});
  }
  return manifest;
}

Manifest FilterSplit(const Manifest &manifest, const std::string &split) {
  Manifest out;
  for (const auto &e : manifest)
    if (e.split == split) out.push_back(e);
  return out;
}

}  // namespace sdrtse
