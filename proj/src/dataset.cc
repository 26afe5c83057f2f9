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

#include "setfair/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "setfair/error.h"
#include "setfair/random.h"

namespace setfair {
namespace {

using json = nlohmann::json;

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

double ParseDouble(std::string_view s, long line, const char* what) {
  s = Trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("cannot parse ") + what + " '" +
                         std::string(s) + "'",
                     line);
  }
  return v;
}

int ParseInt(std::string_view s, long line, const char* what) {
  s = Trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("cannot parse ") + what + " '" +
                         std::string(s) + "'",
                     line);
  }
  return v;
}

bool SkipLine(const std::string& line) {
  return line.empty() || line == "\r" || line.front() == '#';
}

LabeledDataset ParseCsv(std::istream& in) {
  std::string line;
  long lineno = 0;
  int m = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (SkipLine(line)) continue;
    const auto cols = SplitFields(Trim(line));
    if (cols.size() < 4 || Trim(cols[0]) != "example_id" ||
        Trim(cols[1]) != "group" || Trim(cols[2]) != "label") {
      throw ParseError(
          "header must be example_id,group,label,p_0,...,p_{m-1}", lineno);
    }
    for (std::size_t j = 3; j < cols.size(); ++j) {
      if (Trim(cols[j]) != "p_" + std::to_string(j - 3)) {
        throw ParseError("expected column p_" + std::to_string(j - 3),
                         lineno);
      }
    }
    m = static_cast<int>(cols.size()) - 3;
    break;
  }
  if (m < 0) throw ParseError("missing CSV header", lineno);

  std::vector<ProbRecord> records;
  int max_group = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (SkipLine(line)) continue;
    const auto cols = SplitFields(Trim(line));
    if (static_cast<int>(cols.size()) != m + 3) {
      throw ParseError("expected " + std::to_string(m + 3) + " fields, got " +
                           std::to_string(cols.size()),
                       lineno);
    }
    ProbRecord rec;
    rec.example_id = std::string(Trim(cols[0]));
    rec.group = ParseInt(cols[1], lineno, "group");
    rec.label = ParseInt(cols[2], lineno, "label");
    rec.probs.reserve(m);
    for (int j = 0; j < m; ++j) {
      rec.probs.push_back(ParseDouble(cols[3 + j], lineno, "probability"));
    }
    max_group = std::max(max_group, rec.group);
    records.push_back(std::move(rec));
  }
  return LabeledDataset(std::move(records), m, max_group + 1);
}

LabeledDataset ParseJsonl(std::istream& in) {
  std::string line;
  long lineno = 0;
  int m = -1;
  int max_group = -1;
  std::vector<ProbRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (SkipLine(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
    ProbRecord rec;
    try {
      const auto& id = obj.at("example_id");
      rec.example_id = id.is_string() ? id.get<std::string>() : id.dump();
      rec.group = obj.at("group").get<int>();
      rec.label = obj.at("label").get<int>();
      rec.probs = obj.at("probs").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
    if (m < 0) m = rec.num_classes();
    if (rec.num_classes() != m) {
      throw ParseError("expected " + std::to_string(m) + " probabilities", lineno);
    }
    max_group = std::max(max_group, rec.group);
    records.push_back(std::move(rec));
  }
  return LabeledDataset(std::move(records), std::max(m, 0), max_group + 1);
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

LabeledDataset::LabeledDataset(std::vector<ProbRecord> records,
                               int num_classes, int num_groups,
                               std::vector<std::string> class_names,
                               std::vector<std::string> group_names)
    : records_(std::move(records)),
      num_classes_(num_classes),
      num_groups_(num_groups),
      class_names_(std::move(class_names)),
      group_names_(std::move(group_names)) {
  if (num_classes_ < 0 || num_groups_ < 0) {
    throw ValidationError("negative class or group count");
  }
  if (!class_names_.empty() &&
      static_cast<int>(class_names_.size()) != num_classes_) {
    throw ValidationError("class name table has " +
                          std::to_string(class_names_.size()) +
                          " entries for " + std::to_string(num_classes_) +
                          " classes");
  }
  if (!group_names_.empty() &&
      static_cast<int>(group_names_.size()) < num_groups_) {
    throw ValidationError("group name table does not cover all groups");
  }
  if (!group_names_.empty()) {
    num_groups_ = static_cast<int>(group_names_.size());
  }
  for (const auto& r : records_) {
    const auto bad = [&](const std::string& why) {
      return ValidationError("example '" + r.example_id + "': " + why);
    };
    if (r.num_classes() != num_classes_) {
      throw bad("has " + std::to_string(r.num_classes()) +
                " probabilities, expected " + std::to_string(num_classes_));
    }
    if (r.label < 0 || r.label >= num_classes_) {
      throw bad("label " + std::to_string(r.label) + " out of range");
    }
    if (r.group < 0 || r.group >= num_groups_) {
      throw bad("group " + std::to_string(r.group) + " out of range");
    }
    double sum = 0.0;
    for (double p : r.probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw bad("negative or non-finite probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw bad("probabilities sum to " + FormatDouble(sum));
    }
  }
}

LabeledDataset LabeledDataset::WithRecords(std::vector<ProbRecord> records) const {
  LabeledDataset out = *this;
  out.records_ = std::move(records);
  return out;
}

DataFormat FormatFromPath(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return DataFormat::kJsonl;
  return DataFormat::kCsv;
}

LabeledDataset ParseDataset(std::istream& in, DataFormat format) {
  return format == DataFormat::kCsv ? ParseCsv(in) : ParseJsonl(in);
}

LabeledDataset LoadDataset(const std::filesystem::path& path,
                           DataFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return ParseDataset(in, format);
}

LabeledDataset LoadDataset(const std::filesystem::path& path) {
  return LoadDataset(path, FormatFromPath(path));
}

LabeledDataset AttachNames(const LabeledDataset& ds,
                           const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw ParseError("cannot open " + sidecar.string(), 0);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 0);
  }
  auto groups = j.value("groups", std::vector<std::string>{});
  auto classes = j.value("classes", std::vector<std::string>{});
  return LabeledDataset(ds.records(), ds.num_classes(), ds.num_groups(),
                        std::move(classes), std::move(groups));
}

void WriteDataset(std::ostream& out, const LabeledDataset& ds,
                  DataFormat format) {
  if (format == DataFormat::kCsv) {
    out << "example_id,group,label";
    for (int j = 0; j < ds.num_classes(); ++j) out << ",p_" << j;
    out << '\n';
    for (const auto& r : ds.records()) {
      out << r.example_id << ',' << r.group << ',' << r.label;
      for (double p : r.probs) out << ',' << FormatDouble(p);
      out << '\n';
    }
    return;
  }
  for (const auto& r : ds.records()) {
    json obj = {{"example_id", r.example_id},
                {"group", r.group},
                {"label", r.label},
                {"probs", r.probs}};
    out << obj.dump() << '\n';
  }
}

void SaveDataset(const std::filesystem::path& path, const LabeledDataset& ds,
                 DataFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  WriteDataset(out, ds, format);
}

std::string ToString(Stratify s) {
  switch (s) {
    case Stratify::kNone: return "none";
    case Stratify::kClass: return "class";
    case Stratify::kGroup: return "group";
    case Stratify::kClassAndGroup: return "class-and-group";
  }
  return "none";
}

Stratify StratifyFromString(const std::string& s) {
  if (s == "none") return Stratify::kNone;
  if (s == "class") return Stratify::kClass;
  if (s == "group") return Stratify::kGroup;
  if (s == "class-and-group") return Stratify::kClassAndGroup;
  throw ParameterError("unknown stratification '" + s + "'");
}

DatasetSplits Split(const LabeledDataset& ds, const SplitSpec& spec) {
  double total = 0.0;
  int nonzero = 0;
  for (double f : spec.fractions) {
    if (!(f >= 0.0)) throw SplitError("split fractions must be non-negative");
    total += f;
    nonzero += f > 0.0;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw SplitError("split fractions sum to " + FormatDouble(total));
  }

  const auto stratum_of = [&](const ProbRecord& r) -> long {
    switch (spec.stratify_by) {
      case Stratify::kNone: return 0;
      case Stratify::kClass: return r.label;
      case Stratify::kGroup: return r.group;
      case Stratify::kClassAndGroup:
        return static_cast<long>(r.label) * ds.num_groups() + r.group;
    }
    return 0;
  };
  std::map<long, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    strata[stratum_of(ds[i])].push_back(i);
  }

  std::vector<int> part(ds.size(), 0);
  for (auto& [key, idx] : strata) {
    const std::size_t n = idx.size();
    if (static_cast<int>(n) < nonzero) {
      throw SplitError("stratum " + std::to_string(key) + " has " +
                       std::to_string(n) + " records for " +
                       std::to_string(nonzero) + " nonzero fractions");
    }
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
      const double target = spec.fractions[k] * static_cast<double>(n);
      counts[k] = static_cast<std::size_t>(std::floor(target + 1e-9));
      rem[k] = target - static_cast<double>(counts[k]);
      assigned += counts[k];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rem[a] > rem[b]; });
    for (int k = 0; assigned < n; k = (k + 1) % 3) {
      if (spec.fractions[order[k]] > 0.0) {
        ++counts[order[k]];
        ++assigned;
      }
    }
    auto engine = MakeEngine(spec.seed, static_cast<uint64_t>(key));
    std::shuffle(idx.begin(), idx.end(), engine);
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      for (std::size_t c = 0; c < counts[k]; ++c) part[idx[pos++]] = k;
    }
  }

  std::array<std::vector<ProbRecord>, 3> parts;
  for (std::size_t i = 0; i < ds.size(); ++i) parts[part[i]].push_back(ds[i]);
  return DatasetSplits{ds.WithRecords(std::move(parts[0])),
                       ds.WithRecords(std::move(parts[1])),
                       ds.WithRecords(std::move(parts[2]))};
}

}  // namespace setfair
