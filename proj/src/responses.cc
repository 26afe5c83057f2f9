/*
 * Copyright 2026 The setfair Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "setfair/responses.h"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "setfair/error.h"

namespace setfair {

std::string ToString(Treatment t) {
  switch (t) {
    case Treatment::kControl: return "control";
    case Treatment::kAvgK: return "avgk";
    case Treatment::kMarginal: return "marginal";
    case Treatment::kConditional: return "conditional";
  }
  return "control";
}

Treatment TreatmentFromString(const std::string& s) {
  if (s == "control") return Treatment::kControl;
  if (s == "avgk") return Treatment::kAvgK;
  if (s == "marginal") return Treatment::kMarginal;
  if (s == "conditional" || s == "mondrian") return Treatment::kConditional;
  throw ParameterError("unknown treatment '" + s + "'");
}

void WriteResponsesCsv(std::ostream& out, std::span<const TrialResponse> rs) {
  out << "participant_id,trial_id,treatment,group,diff,correct,chosen_in_set\n";
  for (const auto& r : rs) {
    out << r.participant_id << ',' << r.trial_id << ',' << ToString(r.treatment)
        << ',' << r.group << ',' << r.diff << ',' << (r.correct ? 1 : 0) << ',';
    if (r.chosen_in_set) out << (*r.chosen_in_set ? 1 : 0);
    out << '\n';
  }
}

namespace {

int ToInt(const std::string& s, long line, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("cannot parse ") + what + " '" + s + "'", line);
  }
  return v;
}

bool ToBool(const std::string& s, long line, const char* what) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError(std::string("cannot parse ") + what + " '" + s + "'", line);
}

}  // namespace

std::vector<TrialResponse> ReadResponsesCsv(std::istream& in) {
  std::string line;
  long lineno = 0;
  bool header = false;
  std::vector<TrialResponse> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line !=
          "participant_id,trial_id,treatment,group,diff,correct,chosen_in_set") {
        throw ParseError("unexpected responses header", lineno);
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 7) {
      throw ParseError("expected 7 fields, got " + std::to_string(f.size()), lineno);
    }
    TrialResponse r;
    r.participant_id = ToInt(f[0], lineno, "participant_id");
    r.trial_id = f[1];
    try {
      r.treatment = TreatmentFromString(f[2]);
    } catch (const ParameterError& e) {
      throw ParseError(e.what(), lineno);
    }
    r.group = ToInt(f[3], lineno, "group");
    r.diff = ToInt(f[4], lineno, "diff");
    r.correct = ToBool(f[5], lineno, "correct");
    if (!f[6].empty()) r.chosen_in_set = ToBool(f[6], lineno, "chosen_in_set");
    if (r.diff < 1) throw ParseError("diff must be >= 1", lineno);
    if (r.group < 0) throw ParseError("negative group", lineno);
    if (r.treatment == Treatment::kControl && r.chosen_in_set) {
      throw ParseError("control responses cannot carry chosen_in_set", lineno);
    }
    out.push_back(std::move(r));
  }
  if (!header) throw ParseError("missing responses header", lineno);
  return out;
}

}  // namespace setfair
