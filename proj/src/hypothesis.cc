// src/hypothesis.cc

// Copyright 2026  The rcnnctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rcnnctc/hypothesis.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rcnnctc/error.h"

namespace rcnnctc {

namespace {
constexpr double kTimeTol = 1e-9;
}

void Hypothesis::Validate() const {
  if (utterance_id.empty()) RC_ERR << "hypothesis has empty utterance id";
  if (!(total_duration_s > 0.0))
    RC_ERR << "hypothesis for '" << utterance_id
           << "' must have positive total duration, got " << total_duration_s;
  double prev_end = 0.0;
  for (size_t i = 0; i < words.size(); ++i) {
    const TimedWord &w = words[i];
    if (w.word.empty())
      RC_ERR << "hypothesis for '" << utterance_id << "' has an empty word "
             << "string at position " << i;
    if (w.confidence < 0.0 || w.confidence > 1.0)
      RC_ERR << "word '" << w.word << "' in '" << utterance_id
             << "' has confidence " << w.confidence << " outside [0, 1]";
    if (w.start_s < -kTimeTol || w.duration_s < 0.0)
      RC_ERR << "word '" << w.word << "' in '" << utterance_id
             << "' has negative start or duration";
    if (w.start_s + kTimeTol < prev_end)
      RC_ERR << "word '" << w.word << "' in '" << utterance_id
             << "' overlaps the previous word";
    if (w.End() > total_duration_s + kTimeTol)
      RC_ERR << "word '" << w.word << "' in '" << utterance_id
             << "' ends at " << w.End() << ", past total duration "
             << total_duration_s;
    prev_end = w.End();
  }
}

std::vector<std::string> Hypothesis::Transcript() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const TimedWord &w : words) out.push_back(w.word);
  return out;
}

std::string HypothesisToJsonLine(const NBestEntry &entry) {
  nlohmann::ordered_json j;
  j["utt"] = entry.hyp.utterance_id;
  j["system"] = entry.hyp.system_id;
  j["total_dur"] = entry.hyp.total_duration_s;
  nlohmann::ordered_json words = nlohmann::ordered_json::array();
  for (const TimedWord &w : entry.hyp.words) {
    nlohmann::ordered_json jw;
    jw["w"] = w.word;
    jw["conf"] = w.confidence;
    jw["start"] = w.start_s;
    jw["dur"] = w.duration_s;
    words.push_back(std::move(jw));
  }
  j["words"] = std::move(words);
  if (entry.rank != 0 || entry.has_log_prob) j["rank"] = entry.rank;
  if (entry.has_log_prob) j["logp"] = entry.log_prob;
  return j.dump();
}

namespace {

const nlohmann::json &Field(const nlohmann::json &j, const char *key,
                            int lineno) {
  auto it = j.find(key);
  if (it == j.end())
    RC_ERR << "hypothesis line " << lineno << " is missing field '" << key
           << "'";
  return *it;
}

double NumberField(const nlohmann::json &j, const char *key, int lineno) {
  const nlohmann::json &f = Field(j, key, lineno);
  if (!f.is_number())
    RC_ERR << "hypothesis line " << lineno << " field '" << key
           << "' is not a number";
  return f.get<double>();
}

std::string StringField(const nlohmann::json &j, const char *key, int lineno) {
  const nlohmann::json &f = Field(j, key, lineno);
  if (!f.is_string())
    RC_ERR << "hypothesis line " << lineno << " field '" << key
           << "' is not a string";
  return f.get<std::string>();
}

}  // namespace

NBestEntry HypothesisFromJsonLine(const std::string &line, int lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    RC_ERR << "hypothesis line " << lineno << " is not valid JSON: "
           << e.what();
  }
  if (!j.is_object())
    RC_ERR << "hypothesis line " << lineno << " is not a JSON object";

  NBestEntry entry;
  entry.hyp.utterance_id = StringField(j, "utt", lineno);
  entry.hyp.system_id = StringField(j, "system", lineno);
  entry.hyp.total_duration_s = NumberField(j, "total_dur", lineno);
  const nlohmann::json &words = Field(j, "words", lineno);
  if (!words.is_array())
    RC_ERR << "hypothesis line " << lineno << " field 'words' is not an array";
  for (const auto &jw : words) {
    if (!jw.is_object())
      RC_ERR << "hypothesis line " << lineno << " has a non-object word entry";
    TimedWord w;
    w.word = StringField(jw, "w", lineno);
    w.confidence = NumberField(jw, "conf", lineno);
    w.start_s = NumberField(jw, "start", lineno);
    w.duration_s = NumberField(jw, "dur", lineno);
    entry.hyp.words.push_back(std::move(w));
  }
  if (j.contains("rank")) {
    if (!j["rank"].is_number_integer())
      RC_ERR << "hypothesis line " << lineno << " field 'rank' is not an "
             << "integer";
    entry.rank = j["rank"].get<int>();
    if (entry.rank < 0)
      RC_ERR << "hypothesis line " << lineno << " has negative rank";
  }
  if (j.contains("logp")) {
    if (!j["logp"].is_number())
      RC_ERR << "hypothesis line " << lineno << " field 'logp' is not a "
             << "number";
    entry.log_prob = j["logp"].get<double>();
    entry.has_log_prob = true;
  }
  entry.hyp.Validate();
  return entry;
}

std::vector<NBestEntry> ReadHypothesesJsonl(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) RC_ERR << "cannot open hypothesis file '" << path << "'";
  std::vector<NBestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(HypothesisFromJsonLine(line, lineno));
  }
  return out;
}

void WriteHypothesesJsonl(const std::string &path,
                          const std::vector<NBestEntry> &entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) RC_ERR << "cannot open '" << path << "' for writing";
  for (const NBestEntry &e : entries) {
    e.hyp.Validate();
    os << HypothesisToJsonLine(e) << "\n";
  }
  os.flush();
  if (!os) RC_ERR << "failed writing '" << path << "'";
}

void Write1BestJsonl(const std::string &path,
                     const std::vector<Hypothesis> &hyps) {
  std::vector<NBestEntry> entries;
  entries.reserve(hyps.size());
  for (const Hypothesis &h : hyps) entries.push_back(NBestEntry{h, 0, 0.0,
                                                                false});
  WriteHypothesesJsonl(path, entries);
}

std::vector<Hypothesis> OneBestOf(const std::vector<NBestEntry> &entries) {
  std::vector<Hypothesis> out;
  out.reserve(entries.size());
  for (const NBestEntry &e : entries) out.push_back(e.hyp);
  return out;
}

RefMap ReadReferences(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) RC_ERR << "cannot open reference file '" << path << "'";
  RefMap refs;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string utt;
    ls >> utt;
    if (utt.empty())
      RC_ERR << "reference line " << lineno << " has no utterance id";
    if (refs.count(utt))
      RC_ERR << "duplicate reference for utterance '" << utt << "' at line "
             << lineno;
    std::vector<std::string> words;
    std::string w;
    while (ls >> w) words.push_back(w);
    refs.emplace(std::move(utt), std::move(words));
  }
  return refs;
}

void WriteReferences(const std::string &path, const RefMap &refs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) RC_ERR << "cannot open '" << path << "' for writing";
  for (const auto &kv : refs) {
    os << kv.first;
    for (const std::string &w : kv.second) os << " " << w;
    os << "\n";
  }
  os.flush();
  if (!os) RC_ERR << "failed writing '" << path << "'";
}

}  // namespace rcnnctc
