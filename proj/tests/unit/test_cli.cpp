// Copyright 2026 The Codescale Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "codescale/checkpoint.hpp"
#include "codescale/cli.hpp"
#include "codescale/common.hpp"
#include "test_util.hpp"

namespace codescale {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "codescale");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"corpus", "synth", "--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(run({"corpus"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(CliTest, RuntimeErrorsExitOne) {
  TempDir dir;
  const Result r = run({"--out", dir.path().string(), "corpus", "ingest", "--input", (dir / "absent.jsonl").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("absent.jsonl"), std::string::npos) << r.err;
  const json manifest = json::parse(read_file(dir / "run_manifest.json"));
  EXPECT_EQ(manifest.at("exit_code"), kExitFailure);
}

TEST(CliTest, ConfigFileMergesUnderFlags) {
  TempDir dir;
  write_file_atomic(dir / "cfg.json", R"({"n": 7, "preset": "expr", "seed": 4})");
  const Result r = run({"--out", dir.path().string(), "--config", (dir / "cfg.json").string(), "corpus", "synth",
                        "--n", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Corpus c = ingest_records(dir / "corpus.jsonl");
  EXPECT_EQ(c.size(), 5u);
  EXPECT_NE(r.err.find("\"source\":\"file\""), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("\"source\":\"flag\""), std::string::npos) << r.err;
  EXPECT_EQ(c.documents, synth_generate("expr", 5, 4).documents);

  write_file_atomic(dir / "bad.json", R"({"nonsense": 1})");
  EXPECT_EQ(run({"--out", dir.path().string(), "--config", (dir / "bad.json").string(), "corpus", "synth"}).code,
            kExitUsage);
}

TEST(CliTest, EndToEndPipeline) {
  TempDir dir;
  const std::string data = (dir / "data").string();
  ASSERT_EQ(run({"--out", data, "--seed", "1", "corpus", "synth", "--preset", "expr", "--n", "120"}).code, kExitOk);
  ASSERT_EQ(run({"--out", data, "corpus", "split", "--input", data + "/corpus.jsonl"}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir / "data" / "train.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "data" / "test.jsonl"));

  const std::string tok = (dir / "tok").string();
  ASSERT_EQ(run({"--out", tok, "tokenizer", "train", "--corpus", data + "/train.jsonl", "--vocab", "300"}).code,
            kExitOk);
  const std::string tok_file = tok + "/tokenizer.bpe";
  ASSERT_TRUE(fs::exists(tok_file));

  write_file_atomic(dir / "model.json", json{{"layers", 1}, {"hidden", 8}, {"heads", 2}, {"head_size", 4},
                                             {"intermediate", 32}, {"vocab", 300}, {"max_seq", 16}}
                                            .dump());
  const std::string pre = (dir / "pre").string();
  const Result p = run({"--out", pre, "pretrain", "--corpus", data + "/train.jsonl", "--tokenizer", tok_file,
                        "--model-config", (dir / "model.json").string(), "--steps", "4", "--batch", "4", "--warmup",
                        "1", "--eval-corpus", data + "/test.jsonl"});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  const json summary = json::parse(read_file(fs::path(pre) / "summary.json"));
  EXPECT_TRUE(summary.contains("test_error"));
  EXPECT_EQ(summary.at("train").at("total_steps"), 4);
  const std::string ckpt = pre + "/final.ckpt";
  EXPECT_EQ(load_checkpoint(ckpt).step, 4u);
  const json manifest = json::parse(read_file(fs::path(pre) / "run_manifest.json"));
  EXPECT_EQ(manifest.at("exit_code"), 0);

  const std::string ev = (dir / "eval").string();
  ASSERT_EQ(run({"--out", ev, "eval", "loss", "--checkpoint", ckpt, "--tokenizer", tok_file, "--corpus",
                 data + "/test.jsonl"})
                .code,
            kExitOk);
  const json loss = json::parse(read_file(fs::path(ev) / "eval_loss.json"));
  EXPECT_NEAR(loss.at("test_error").get<double>(), summary.at("test_error").get<double>(), 1e-12);

  const std::string ft = (dir / "ft").string();
  const Result f = run({"--out", ft, "finetune", "search", "--checkpoint", ckpt, "--tokenizer", tok_file, "--synth",
                        "8", "--steps", "3", "--batch", "4", "--warmup", "1"});
  ASSERT_EQ(f.code, kExitOk) << f.err;
  EXPECT_TRUE(fs::exists(fs::path(ft) / "finetuned.ckpt"));

  const std::string pg = (dir / "probe").string();
  ASSERT_EQ(run({"--out", pg, "probe", "gen", "--task", "typ", "--corpus", data + "/corpus.jsonl"}).code, kExitOk);
  const Result pr = run({"--out", pg, "probe", "layers", "--task", "typ", "--labels", pg + "/probe_typ.jsonl",
                         "--checkpoint", ckpt, "--tokenizer", tok_file});
  ASSERT_EQ(pr.code, kExitOk) << pr.err;
  EXPECT_TRUE(fs::exists(fs::path(pg) / "layers_typ.csv"));
}

TEST(CliTest, FitReadsCsv) {
  TempDir dir;
  std::string csv = "x,e\n";
  for (double x : {1e3, 1e4, 1e5, 1e6}) csv += std::to_string(x) + "," + std::to_string(2.5 * std::pow(x, -0.07)) + "\n";
  write_file_atomic(dir / "pts.csv", csv);
  const Result r = run({"--out", dir.path().string(), "fit", "--input", (dir / "pts.csv").string(), "--dimension",
                        "compute"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json fit = json::parse(read_file(dir / "fit.json"));
  EXPECT_NEAR(fit.at("alpha").get<double>(), 0.07, 1e-6);
  EXPECT_TRUE(fs::exists(dir / "fit.svg"));
  write_file_atomic(dir / "short.csv", "x,e\n1,2\n2,1\n");
  EXPECT_EQ(run({"--out", dir.path().string(), "fit", "--input", (dir / "short.csv").string()}).code, kExitFailure);
}

TEST(CliTest, OutputDirectoryFromEnvironment) {
  TempDir dir;
  ::setenv(kOutEnv, dir.path().c_str(), 1);
  const Result r = run({"corpus", "synth", "--n", "3"});
  ::unsetenv(kOutEnv);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "corpus.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "run_manifest.json"));
}

}  // namespace
}  // namespace codescale
