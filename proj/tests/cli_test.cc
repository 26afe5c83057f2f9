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

#include "setfair/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "setfair/audit.h"
#include "setfair/dataset.h"
#include "setfair/human_sim.h"
#include "setfair/json_io.h"
#include "setfair/setpred.h"
#include "test_util.h"

namespace setfair {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "setfair");
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteText(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Synthetic task with the standard biased groups, split into three files.
struct Files {
  fs::path dir, cal, calval, test;
};

Files MakeFiles(const std::string& name, uint64_t seed = 1, int n = 5000) {
  Files f;
  f.dir = testing::TempDir(name);
  SyntheticTaskSpec spec;
  spec.n = n;
  spec.seed = seed;
  const auto parts = Split(GenerateTask(spec), {{0.2, 0.4, 0.4}, Stratify::kGroup, seed});
  f.cal = f.dir / "cal.csv";
  f.calval = f.dir / "calval.jsonl";
  f.test = f.dir / "test.csv";
  SaveDataset(f.cal, parts.cal, DataFormat::kCsv);
  SaveDataset(f.calval, parts.calval, DataFormat::kJsonl);
  SaveDataset(f.test, parts.test, DataFormat::kCsv);
  return f;
}

std::string Field(const std::string& text, const std::string& key) {
  const auto at = text.find(key + "=");
  if (at == std::string::npos) return "";
  const auto start = at + key.size() + 1;
  return text.substr(start, text.find_first_of(" \n", start) - start);
}

TEST(CliTest, CalibrateMarginalPrintsCoverage) {
  const auto f = MakeFiles("cli_cal");
  const auto out = f.dir / "out";
  const auto r = Invoke({"calibrate", "--data", f.cal.string(), "--calval", f.calval.string(),
                      "--alpha", "0.1", "--seed", "1", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(Field(r.out, "q_hat"), "inf");
  const double cov = std::stod(Field(r.out, "calval_coverage"));
  EXPECT_GE(cov, 0.88);
  EXPECT_LE(cov, 0.92);
  const auto j = json::parse(Slurp(out / "predictor.json"));
  EXPECT_EQ(j["predictor"]["method"], "marginal");
  EXPECT_TRUE(j["provenance"].contains("config_hash"));
  EXPECT_EQ(j["provenance"]["seed"], 1);
}

TEST(CliTest, SameConfigTwiceIsByteIdentical) {
  const auto f = MakeFiles("cli_det");
  WriteText(f.dir / "cfg.json",
            R"({"method": "mondrian", "score": {"kind": "raps", "lambda": 0.05, "k_reg": 2,
                "randomized": true, "u_mode": "seeded"}, "seed": 9})");
  std::string first;
  for (const char* jobs : {"1", "3"}) {
    const auto out = f.dir / (std::string("o") + jobs);
    ASSERT_EQ(Invoke({"calibrate", "--config", (f.dir / "cfg.json").string(), "--data",
                   f.cal.string(), "--out", out.string(), "--jobs", jobs})
                  .code,
              0);
    ASSERT_EQ(Invoke({"predict", "--config", (f.dir / "cfg.json").string(), "--predictor",
                   (f.dir / "o1" / "predictor.json").string(), "--data", f.test.string(), "--out",
                   out.string(), "--jobs", jobs})
                  .code,
              0);
    // --out is not part of the config, and both runs predict from the first
    // run's artifact, so the inputs are identical.
    const std::string now = Slurp(out / "predictor.json") + Slurp(out / "sets.csv");
    if (first.empty()) {
      first = now;
    } else {
      EXPECT_EQ(now, first);
    }
  }
}

TEST(CliTest, SmallMondrianGroupIsUserError) {
  const auto dir = testing::TempDir("cli_small_group");
  std::ostringstream csv;
  csv << "example_id,group,label,p_0,p_1\n";
  for (int i = 0; i < 45; ++i) csv << "a" << i << ",0,0,0.7,0.3\n";
  for (int i = 0; i < 5; ++i) csv << "b" << i << ",1,1,0.4,0.6\n";
  WriteText(dir / "cal.csv", csv.str());
  const auto r = Invoke({"calibrate", "--data", (dir / "cal.csv").string(), "--method",
                      "mondrian", "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_NE(r.err.find("group 1"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("5"), std::string::npos) << r.err;
}

TEST(CliTest, PredictEdgeCases) {
  const auto dir = testing::TempDir("cli_predict");
  WriteText(dir / "pred.json",
            R"({"method": "marginal", "score": {"kind": "lac"}, "alpha": 0.1,
                "q_hat": "inf", "n_cal": 10, "seed": 0, "num_classes": 3, "num_groups": 1})");
  WriteText(dir / "data.csv",
            "example_id,group,label,p_0,p_1,p_2\nx,0,0,0.2,0.3,0.5\ny,0,1,0.6,0.3,0.1\n");
  auto r = Invoke({"predict", "--predictor", (dir / "pred.json").string(), "--data",
                (dir / "data.csv").string(), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "o" / "sets.csv");
  const auto sets = ReadSetsCsv(in);
  ASSERT_EQ(sets.size(), 2u);
  for (const auto& s : sets) EXPECT_EQ(s.size, 3);

  WriteText(dir / "empty.csv", "example_id,group,label,p_0,p_1,p_2\n");
  r = Invoke({"predict", "--predictor", (dir / "pred.json").string(), "--data",
           (dir / "empty.csv").string(), "--out", (dir / "e").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = Slurp(dir / "e" / "sets.csv");
  EXPECT_NE(text.find("example_id,group,label,set_size,covered,members\n"), std::string::npos);
  std::ifstream empty_in(dir / "e" / "sets.csv");
  EXPECT_TRUE(ReadSetsCsv(empty_in).empty());

  WriteText(dir / "wide.csv", "example_id,group,label,p_0,p_1\nx,0,0,0.5,0.5\n");
  r = Invoke({"predict", "--predictor", (dir / "pred.json").string(), "--data",
           (dir / "wide.csv").string(), "--out", (dir / "w").string()});
  EXPECT_EQ(r.code, kExitUser);
}

TEST(CliTest, AuditOfWrittenSetsMatchesInMemory) {
  const auto dir = testing::TempDir("cli_audit");
  std::vector<PredictionSet> sets(4);
  const int groups[4] = {0, 0, 1, 1};
  const std::vector<std::vector<int>> members{{0}, {0, 1, 2}, {1, 2}, {0, 1, 2, 3}};
  const int labels[4] = {0, 2, 0, 3};
  for (int i = 0; i < 4; ++i) {
    sets[i].example_id = "s" + std::to_string(i);
    sets[i].group = groups[i];
    sets[i].members = members[i];
    sets[i].size = static_cast<int>(members[i].size());
    sets[i].label = labels[i];
    sets[i].covered = sets[i].Contains(labels[i]);
  }
  {
    std::ofstream out(dir / "sets.csv");
    WriteSetsCsv(out, sets);
  }
  const auto r = Invoke({"audit", "--sets", (dir / "sets.csv").string(), "--out",
                      (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(Slurp(dir / "o" / "audit.json"));
  const auto mem = ToJson(AuditSets(sets, 2));
  EXPECT_EQ(j["reports"]["sets"], mem);
  EXPECT_EQ(j["reports"]["sets"]["delta_cov"], 0.5);
  EXPECT_EQ(j["reports"]["sets"]["delta_size"], 1.0);
  EXPECT_EQ(j["reports"]["sets"]["delta_singleton"], 0.5);
}

TEST(CliTest, SimulateStatsAndVerify) {
  const auto dir = testing::TempDir("cli_sim");
  WriteText(dir / "cfg.json",
            R"({"seed": 2, "task": {"synthetic": {"n": 6000}},
                "simulation": {"participants": 200, "trials_per_participant": 60}})");
  const auto cfg = (dir / "cfg.json").string();
  auto r = Invoke({"simulate", "--config", cfg, "--out", (dir / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sim = json::parse(Slurp(dir / "a" / "simulate.json"));
  EXPECT_TRUE(sim.contains("flags"));
  EXPECT_TRUE(sim["flags"]["mondrian_equalizes_coverage"].get<bool>());

  r = Invoke({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--jobs", "4"});
  ASSERT_EQ(r.code, 0);
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(Slurp(e.path()), Slurp(dir / "b" / e.path().filename()))
        << e.path().filename();
  }

  r = Invoke({"stats", "--responses", (dir / "a" / "responses.csv").string(), "--out",
           (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = json::parse(Slurp(dir / "s" / "stats.json"));
  ASSERT_TRUE(stats.contains("odds_ratios"));
  ASSERT_TRUE(stats.contains("max_ror"));
  for (const auto& o : stats["odds_ratios"]) {
    if (o["treatment"] == "control") EXPECT_EQ(o["odds_ratio"], 1.0);
  }

  for (const char* file : {"a/simulate.json", "a/responses.csv", "a/sets_conditional.csv",
                           "s/stats.json"}) {
    r = Invoke({"--verify", (dir / file).string()});
    EXPECT_EQ(r.code, 0) << file << r.err;
    EXPECT_EQ(r.out.rfind("OK", 0), 0u);
  }
  // Tampering with the embedded config breaks the hash.
  auto tampered = sim;
  tampered["provenance"]["config"]["alpha"] = 0.2;
  WriteText(dir / "tampered.json", tampered.dump(2));
  r = Invoke({"--verify", (dir / "tampered.json").string()});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_NE(r.err.find("MISMATCH"), std::string::npos);
}

TEST(CliTest, TuneAndAvgK) {
  const auto f = MakeFiles("cli_tune", 3);
  auto r = Invoke({"tune", "--data", f.cal.string(), "--calval", f.calval.string(), "--score",
                "raps", "--out", (f.dir / "t").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(Slurp(f.dir / "t" / "tuning.json"));
  EXPECT_EQ(j["candidates"].size(), 50u);
  r = Invoke({"tune", "--data", f.cal.string(), "--calval", f.calval.string(), "--method",
           "avgk", "--out", (f.dir / "k").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const double k = std::stod(Field(r.out, "k"));
  r = Invoke({"calibrate", "--data", f.cal.string(), "--method", "avgk", "--k",
           std::to_string(k), "--out", (f.dir / "k").string()});
  ASSERT_EQ(r.code, 0) << r.err;
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Invoke({"calibrate", "--method", "bogus"}).code, kExitUser);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUser);
  EXPECT_EQ(Invoke({"calibrate", "--alpha", "1.5", "--out",
                 testing::TempDir("cli_usage").string()})
                .code,
            kExitUser);
  EXPECT_EQ(Invoke({"--help"}).code, 0);
}

TEST(CliTest, ConfigHashIgnoresKeyOrder) {
  EXPECT_EQ(ConfigHash(json::parse(R"({"a": 1, "b": [1, 2]})")),
            ConfigHash(json::parse(R"({"b": [1, 2], "a": 1})")));
  EXPECT_NE(ConfigHash(json::parse(R"({"a": 1})")), ConfigHash(json::parse(R"({"a": 2})")));
  EXPECT_EQ(ConfigHash(json::object()).size(), 16u);
}

}  // namespace
}  // namespace setfair
