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

#include "codescale/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <optional>

#include "codescale/checkpoint.hpp"
#include "codescale/common.hpp"
#include "codescale/corpus.hpp"
#include "codescale/evaluation.hpp"
#include "codescale/tokenizer.hpp"

namespace codescale {

namespace fs = std::filesystem;
using json = nlohmann::json;

size_t SweepSpec::level_count() const {
  switch (dimension) {
    case ScaleDimension::kData: return train_corpora.size();
    case ScaleDimension::kModel: return models.size();
    case ScaleDimension::kCompute: return levels.size();
  }
  return 0;
}

void SweepSpec::validate() const {
  if (level_count() < 3) {
    throw Error("sweep: a " + to_string(dimension) + " sweep needs at least 3 levels, got " +
                std::to_string(level_count()));
  }
  if (dimension != ScaleDimension::kData && train_corpora.size() != 1) {
    throw Error("sweep: " + to_string(dimension) + " sweeps take exactly one training corpus");
  }
  if (test_corpus.empty()) throw Error("sweep: test_corpus is required");
  if (output.empty()) throw Error("sweep: output directory is required");
  train.validate();
  if (dimension == ScaleDimension::kModel) {
    if (!model_names.empty() && model_names.size() != models.size()) throw Error("sweep: one name per model required");
    for (const auto& m : models) {
      m.validate();
      if (m.max_seq != models.front().max_seq || m.vocab != models.front().vocab) {
        throw Error("sweep: models must share max_seq and vocab so they see the same evaluation set");
      }
    }
  } else {
    model.validate();
  }
  if (dimension == ScaleDimension::kCompute) {
    for (size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] == 0 || (i > 0 && levels[i] <= levels[i - 1])) {
        throw Error("sweep: compute levels must be strictly increasing positive step counts");
      }
    }
    if (train.warmup_steps > levels.back()) throw Error("sweep: warmup is longer than the longest compute level");
  }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.empty() || path.is_absolute() || base.empty() ? path : base / path;
}

EncoderConfig model_from_json(const json& j) {
  if (j.is_string()) return preset(j.get<std::string>());
  return j.get<EncoderConfig>();
}

}  // namespace

SweepSpec parse_sweep_spec(const json& j, const fs::path& base_dir) {
  SweepSpec s;
  try {
    s.dimension = parse_dimension(j.at("dimension").get<std::string>());
    if (j.contains("levels")) s.levels = j.at("levels").get<std::vector<uint64_t>>();
    if (j.contains("model")) s.model = model_from_json(j.at("model"));
    if (j.contains("models")) {
      for (const auto& m : j.at("models")) {
        s.models.push_back(model_from_json(m));
        s.model_names.push_back(m.is_string() ? m.get<std::string>() : "model" + std::to_string(s.models.size() - 1));
      }
    }
    if (j.contains("train")) s.train = j.at("train").get<TrainConfig>();
    for (const auto& c : j.value("train_corpora", std::vector<std::string>{})) {
      s.train_corpora.push_back(resolve(base_dir, c));
    }
    s.test_corpus = resolve(base_dir, j.at("test_corpus").get<std::string>());
    if (j.contains("tokenizer")) s.tokenizer = resolve(base_dir, j.at("tokenizer").get<std::string>());
    s.tokenizer_vocab = j.value("tokenizer_vocab", s.tokenizer_vocab);
    s.min_keep = j.value("min_keep", s.min_keep);
    s.checkpoint_every = j.value("checkpoint_every", s.checkpoint_every);
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      s.eval_sequences = e.value("sequences", s.eval_sequences);
      s.eval_seed = e.value("seed", s.eval_seed);
      s.eval_trials = e.value("trials", s.eval_trials);
      s.eval_trial_size = e.value("trial_size", s.eval_trial_size);
    }
    s.output = resolve(base_dir, j.at("output").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(std::string("sweep spec: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec load_sweep_spec(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return parse_sweep_spec(j, path.parent_path());
}

json to_json(const SweepSpec& s) {
  json j;
  j["dimension"] = to_string(s.dimension);
  j["levels"] = s.levels;
  j["model"] = s.model;
  j["models"] = json::array();
  for (const auto& m : s.models) j["models"].push_back(m);
  j["model_names"] = s.model_names;
  j["train"] = s.train;
  j["train_corpora"] = json::array();
  for (const auto& c : s.train_corpora) j["train_corpora"].push_back(c.string());
  j["test_corpus"] = s.test_corpus.string();
  j["tokenizer"] = s.tokenizer.string();
  j["tokenizer_vocab"] = s.tokenizer_vocab;
  j["min_keep"] = s.min_keep;
  j["checkpoint_every"] = s.checkpoint_every;
  j["eval"] = {{"sequences", s.eval_sequences},
               {"seed", s.eval_seed},
               {"trials", s.eval_trials},
               {"trial_size", s.eval_trial_size}};
  j["output"] = s.output.string();
  return j;
}

namespace {

struct Shared {
  TokenizerModel tokenizer;
  std::string tokenizer_checksum;
  std::vector<Sequence> eval_set;
  std::string eval_checksum;
};

std::string sequences_checksum(const std::vector<Sequence>& seqs) {
  std::string bytes;
  for (const auto& s : seqs) {
    for (int32_t id : s.ids) bytes.append(reinterpret_cast<const char*>(&id), sizeof id);
    bytes += std::to_string(s.length) + ";";
  }
  return sha256_hex(bytes);
}

size_t window_of(const SweepSpec& spec) {
  return static_cast<size_t>(spec.dimension == ScaleDimension::kModel ? spec.models.front().max_seq
                                                                       : spec.model.max_seq);
}

Shared prepare_shared(const SweepSpec& spec) {
  Shared shared;
  const fs::path tok_path = spec.output / "tokenizer.bpe";
  if (!spec.tokenizer.empty()) {
    shared.tokenizer = TokenizerModel::load(spec.tokenizer);
  } else if (fs::exists(tok_path)) {
    shared.tokenizer = TokenizerModel::load(tok_path);
  } else {
    log_info("sweep: training a " + std::to_string(spec.tokenizer_vocab) + "-token tokenizer on " +
             spec.train_corpora.front().string());
    shared.tokenizer = train_bpe(ingest_records(spec.train_corpora.front()), spec.tokenizer_vocab);
  }
  shared.tokenizer.save(tok_path);
  shared.tokenizer_checksum = shared.tokenizer.checksum();

  const ChunkOptions chunk{window_of(spec), spec.min_keep};
  std::vector<Sequence> eval = chunk_fixed(ingest_records(spec.test_corpus), shared.tokenizer, chunk);
  if (eval.empty()) throw Error("sweep: the test corpus yields no evaluation sequences");
  if (spec.eval_sequences > 0 && spec.eval_sequences < eval.size()) {
    std::vector<size_t> idx(eval.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(mix_seed(spec.eval_seed, 0x6576616c));
    rng.shuffle(std::span<size_t>(idx));
    idx.resize(spec.eval_sequences);
    std::sort(idx.begin(), idx.end());
    std::vector<Sequence> subset;
    for (size_t i : idx) subset.push_back(eval[i]);
    eval = std::move(subset);
  }
  shared.eval_set = std::move(eval);
  shared.eval_checksum = sequences_checksum(shared.eval_set);
  write_file_atomic(spec.output / "eval_set.sha256", shared.eval_checksum + "\n");
  return shared;
}

std::optional<json> read_manifest(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": unreadable manifest: " + e.what());
  }
}

void write_manifest(const fs::path& path, const json& manifest) {
  write_file_atomic(path, manifest.dump(2) + "\n");
}

// Latest step_<n>.ckpt in `dir` with n <= limit, if any.
std::optional<std::pair<uint64_t, fs::path>> latest_checkpoint(const fs::path& dir, uint64_t limit) {
  std::optional<std::pair<uint64_t, fs::path>> best;
  if (!fs::exists(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("step_", 0) != 0 || entry.path().extension() != ".ckpt") continue;
    try {
      const uint64_t step = std::stoull(name.substr(5, name.size() - 10));
      if (step <= limit && (!best || step > best->first)) best = {step, entry.path()};
    } catch (const std::exception&) {
      continue;
    }
  }
  return best;
}

struct LevelPlan {
  std::string run_id;
  size_t level = 0;
  EncoderConfig config;
  std::string model_name;
  fs::path corpus_path;
  uint64_t steps = 0;
};

struct TrainedCorpus {
  std::string checksum;
  size_t documents = 0;
  std::vector<Sequence> sequences;
  uint64_t tokens = 0;
};

TrainedCorpus load_train_corpus(const fs::path& path, const Shared& shared, size_t window, size_t min_keep) {
  const Corpus corpus = ingest_records(path);
  TrainedCorpus out;
  out.checksum = corpus_checksum(corpus);
  out.documents = corpus.size();
  out.sequences = chunk_fixed(corpus, shared.tokenizer, ChunkOptions{window, min_keep});
  if (out.sequences.empty()) throw Error(path.string() + ": corpus yields no training sequences");
  for (const auto& s : out.sequences) out.tokens += s.length;
  return out;
}

std::string config_key(const EncoderConfig& config) {
  return sha256_hex(json(config).dump()).substr(0, 16);
}

json base_manifest(const SweepSpec& spec, const Shared& shared, const LevelPlan& plan, const TrainConfig& train,
                   const TrainedCorpus& corpus) {
  const ParamCount pc = count_params(plan.config);
  json m;
  m["run_id"] = plan.run_id;
  m["dimension"] = to_string(spec.dimension);
  m["level"] = plan.level;
  m["model"] = plan.config;
  m["model_name"] = plan.model_name;
  m["train"] = train;
  m["steps"] = plan.steps;
  m["corpus"] = {{"path", plan.corpus_path.string()},
                 {"checksum", corpus.checksum},
                 {"documents", corpus.documents},
                 {"sequences", corpus.sequences.size()},
                 {"tokens", corpus.tokens}};
  m["tokenizer_checksum"] = shared.tokenizer_checksum;
  m["eval_set"] = {{"checksum", shared.eval_checksum},
                   {"sequences", shared.eval_set.size()},
                   {"seed", spec.eval_seed},
                   {"mask_rate", train.mask_rate}};
  m["params"] = {{"total", pc.total}, {"non_embedding", pc.non_embedding}};
  m["compute"] = compute_ledger(plan.config, plan.steps, train.batch_size, window_of(spec));
  m["keys"] = {{"data", corpus.checksum}, {"model", config_key(plan.config)}, {"compute", std::to_string(plan.steps)}};
  const json fingerprint_src = {m["model"], m["train"], m["steps"], corpus.checksum, shared.tokenizer_checksum,
                                shared.eval_checksum};
  m["fingerprint"] = sha256_hex(fingerprint_src.dump());
  return m;
}

double scale_value(const SweepSpec& spec, const json& manifest) {
  switch (spec.dimension) {
    case ScaleDimension::kData: return manifest["corpus"]["tokens"].get<double>();
    case ScaleDimension::kModel: return manifest["params"]["total"].get<double>();
    case ScaleDimension::kCompute: return manifest["compute"]["flops"].get<double>();
  }
  return 0.0;
}

// Evaluates `params` and finalizes the manifest.
void finish_level(const SweepSpec& spec, const Shared& shared, const LevelPlan& plan, const TrainConfig& train,
                  const ParameterSet& params, json& manifest, const fs::path& run_dir) {
  const double error =
      test_error(plan.config, params, shared.eval_set, shared.tokenizer.special(), train.mask_rate, spec.eval_seed);
  json eval = {{"test_error", error}, {"eval_set_checksum", shared.eval_checksum}};
  if (spec.eval_trials >= 2) {
    const size_t size = spec.eval_trial_size > 0 ? spec.eval_trial_size : shared.eval_set.size() / 2;
    const std::vector<size_t> sizes = {size};
    const auto reports = repeated_eval(plan.config, params, shared.eval_set, sizes, spec.eval_trials,
                                       shared.tokenizer.special(), train.mask_rate, spec.eval_seed);
    eval["reports"] = eval_reports_json(reports);
  }
  write_file_atomic(run_dir / "eval.json", eval.dump(2) + "\n");
  manifest["test_error"] = error;
  manifest["x"] = scale_value(spec, manifest);
  manifest["status"] = "complete";
  manifest["message"] = "";
}

RunRecord record_of(const json& manifest, bool skipped) {
  RunRecord r;
  r.run_id = manifest.value("run_id", "");
  r.level = manifest.value("level", size_t{0});
  r.status = manifest.value("status", "");
  r.message = manifest.value("message", "");
  r.x = manifest.value("x", 0.0);
  r.test_error = manifest.value("test_error", 0.0);
  r.skipped = skipped;
  return r;
}

bool already_complete(const fs::path& manifest_path, const json& expected) {
  const auto existing = read_manifest(manifest_path);
  return existing && existing->value("status", "") == "complete" &&
         existing->value("fingerprint", "") == expected["fingerprint"].get<std::string>();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Trains (or resumes) one independent data/model level.
RunRecord run_level(const SweepSpec& spec, const Shared& shared, const LevelPlan& plan) {
  const fs::path run_dir = spec.output / "runs" / plan.run_id;
  fs::create_directories(run_dir);
  const fs::path manifest_path = run_dir / "manifest.json";
  json manifest;
  const auto start = std::chrono::steady_clock::now();
  try {
    const TrainedCorpus corpus = load_train_corpus(plan.corpus_path, shared, window_of(spec), spec.min_keep);
    manifest = base_manifest(spec, shared, plan, spec.train, corpus);
    if (already_complete(manifest_path, manifest)) {
      log_info("sweep: " + plan.run_id + " already complete");
      return record_of(*read_manifest(manifest_path), true);
    }
    manifest["status"] = "running";
    manifest["artifacts"] = {{"checkpoint", "final.ckpt"}, {"loss", "loss.csv"}, {"eval", "eval.json"}};
    write_manifest(manifest_path, manifest);

    std::optional<Checkpoint> resume;
    if (auto ck = latest_checkpoint(run_dir, plan.steps)) {
      log_info("sweep: resuming " + plan.run_id + " from step " + std::to_string(ck->first));
      resume = load_checkpoint(ck->second);
    }
    CheckpointPolicy policy{run_dir, spec.checkpoint_every, {}, true};
    log_info("sweep: training " + plan.run_id + " (" + std::to_string(corpus.sequences.size()) + " sequences, " +
             std::to_string(count_params(plan.config).total) + " params)");
    PretrainResult trained =
        pretrain(corpus.sequences, shared.tokenizer.special(), plan.config, spec.train, policy, resume);
    Checkpoint final_ck{plan.config, trained.params, spec.train.total_steps, {spec.train.seed, 0}, std::nullopt};
    final_ck.stream.sequences_consumed = spec.train.total_steps * spec.train.batch_size;
    save_checkpoint(run_dir / "final.ckpt", final_ck);
    write_file_atomic(run_dir / "loss.csv", trained.trace.to_csv());
    finish_level(spec, shared, plan, spec.train, trained.params, manifest, run_dir);
  } catch (const std::exception& e) {
    log_warn("sweep: " + plan.run_id + " failed: " + e.what());
    if (manifest.is_null()) manifest = {{"run_id", plan.run_id}, {"level", plan.level}};
    manifest["status"] = "failed";
    manifest["message"] = e.what();
  }
  manifest["wall_seconds"] = seconds_since(start);
  write_manifest(manifest_path, manifest);
  return record_of(manifest, false);
}

std::vector<RunRecord> run_compute(const SweepSpec& spec, const Shared& shared) {
  std::vector<RunRecord> records;
  const fs::path long_dir = spec.output / "runs" / "long";
  fs::create_directories(long_dir);
  const uint64_t longest = spec.levels.back();
  TrainConfig train = spec.train;
  train.total_steps = longest;  // one schedule for every level

  std::vector<LevelPlan> plans;
  for (size_t i = 0; i < spec.levels.size(); ++i) {
    plans.push_back({"compute-" + std::to_string(i), i, spec.model, "", spec.train_corpora.front(), spec.levels[i]});
  }
  TrainedCorpus corpus;
  std::vector<json> manifests(plans.size());
  std::vector<bool> done(plans.size(), false);
  try {
    corpus = load_train_corpus(spec.train_corpora.front(), shared, window_of(spec), spec.min_keep);
    for (size_t i = 0; i < plans.size(); ++i) {
      manifests[i] = base_manifest(spec, shared, plans[i], train, corpus);
      manifests[i]["artifacts"] = {{"checkpoint", "../long/" + checkpoint_path("", plans[i].steps).string()},
                                   {"eval", "eval.json"}};
      done[i] = already_complete(spec.output / "runs" / plans[i].run_id / "manifest.json", manifests[i]);
    }
  } catch (const std::exception& e) {
    for (const auto& plan : plans) {
      const fs::path dir = spec.output / "runs" / plan.run_id;
      fs::create_directories(dir);
      json m = {{"run_id", plan.run_id}, {"level", plan.level}, {"status", "failed"}, {"message", e.what()}};
      write_manifest(dir / "manifest.json", m);
      records.push_back(record_of(m, false));
    }
    return records;
  }

  const bool all_done = std::all_of(done.begin(), done.end(), [](bool b) { return b; });
  const auto start = std::chrono::steady_clock::now();
  if (!all_done) {
    bool have_all = true;
    for (const auto& plan : plans) have_all = have_all && fs::exists(checkpoint_path(long_dir, plan.steps));
    if (!have_all) {
      std::optional<Checkpoint> resume;
      if (auto ck = latest_checkpoint(long_dir, longest)) {
        log_info("sweep: resuming the long compute run from step " + std::to_string(ck->first));
        resume = load_checkpoint(ck->second);
      }
      CheckpointPolicy policy{long_dir, spec.checkpoint_every, spec.levels, true};
      try {
        PretrainResult trained =
            pretrain(corpus.sequences, shared.tokenizer.special(), spec.model, train, policy, resume);
        std::string csv = trained.trace.to_csv();
        write_file_atomic(long_dir / (resume ? "loss_resumed.csv" : "loss.csv"), csv);
      } catch (const std::exception& e) {
        log_warn(std::string("sweep: long compute run failed: ") + e.what());
      }
    }
  }
  for (size_t i = 0; i < plans.size(); ++i) {
    const fs::path dir = spec.output / "runs" / plans[i].run_id;
    fs::create_directories(dir);
    if (done[i]) {
      records.push_back(record_of(*read_manifest(dir / "manifest.json"), true));
      continue;
    }
    json& m = manifests[i];
    try {
      const fs::path ck_path = checkpoint_path(long_dir, plans[i].steps);
      if (!fs::exists(ck_path)) throw Error("checkpoint for step " + std::to_string(plans[i].steps) + " is missing");
      const Checkpoint ck = load_checkpoint(ck_path);
      finish_level(spec, shared, plans[i], train, ck.params, m, dir);
    } catch (const std::exception& e) {
      log_warn("sweep: " + plans[i].run_id + " failed: " + e.what());
      m["status"] = "failed";
      m["message"] = e.what();
    }
    m["wall_seconds"] = seconds_since(start);
    write_manifest(dir / "manifest.json", m);
    records.push_back(record_of(m, false));
  }
  return records;
}

}  // namespace

std::vector<RunRecord> run_sweep(const SweepSpec& spec) {
  spec.validate();
  fs::create_directories(spec.output / "runs");
  const fs::path spec_path = spec.output / "sweep.json";
  const std::string spec_text = to_json(spec).dump(2) + "\n";
  if (fs::exists(spec_path) && read_file(spec_path) != spec_text) {
    throw Error("sweep: " + spec.output.string() + " already holds a different sweep");
  }
  write_file_atomic(spec_path, spec_text);
  const Shared shared = prepare_shared(spec);
  for (size_t i = 0; i < spec.level_count(); ++i) {
    const EncoderConfig& c = spec.dimension == ScaleDimension::kModel ? spec.models[i] : spec.model;
    if (static_cast<size_t>(c.vocab) < shared.tokenizer.vocab_size()) {
      throw Error("sweep: model vocab " + std::to_string(c.vocab) + " is smaller than the tokenizer's " +
                  std::to_string(shared.tokenizer.vocab_size()));
    }
  }

  std::vector<RunRecord> records;
  if (spec.dimension == ScaleDimension::kCompute) {
    records = run_compute(spec, shared);
  } else {
    for (size_t i = 0; i < spec.level_count(); ++i) {
      LevelPlan plan;
      plan.level = i;
      plan.steps = spec.train.total_steps;
      if (spec.dimension == ScaleDimension::kData) {
        plan.run_id = "data-" + std::to_string(i);
        plan.config = spec.model;
        plan.corpus_path = spec.train_corpora[i];
      } else {
        plan.run_id = "model-" + std::to_string(i);
        plan.config = spec.models[i];
        plan.model_name = spec.model_names.empty() ? "" : spec.model_names[i];
        plan.corpus_path = spec.train_corpora.front();
      }
      records.push_back(run_level(spec, shared, plan));
    }
  }
  const size_t ok = std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.status == "complete"; });
  if (ok < 3) log_warn("sweep: only " + std::to_string(ok) + " levels completed; a fit needs at least 3");
  return records;
}

std::vector<RunSummary> collect_runs(const fs::path& sweep_dir) {
  const fs::path runs = sweep_dir / "runs";
  if (!fs::is_directory(runs)) throw Error("collect: " + runs.string() + " does not exist");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<RunSummary> out;
  size_t incomplete = 0;
  for (const auto& dir : dirs) {
    const std::string id = dir.filename().string();
    json m;
    try {
      m = json::parse(read_file(dir / "manifest.json"));
    } catch (const std::exception& e) {
      throw Error("collect: run " + id + " has an unreadable manifest: " + e.what());
    }
    if (m.value("status", "") != "complete") {
      ++incomplete;
      continue;
    }
    try {
      out.push_back({id, m.at("keys").at("data").get<std::string>(), m.at("keys").at("model").get<std::string>(),
                     m.at("keys").at("compute").get<std::string>(), m.at("x").get<double>(),
                     m.at("test_error").get<double>()});
    } catch (const json::exception& e) {
      throw Error("collect: run " + id + " has a malformed manifest: " + e.what());
    }
  }
  if (incomplete > 0) log_warn("collect: ignoring " + std::to_string(incomplete) + " incomplete runs");
  if (out.empty()) throw Error("collect: no completed runs under " + runs.string());
  // Level order: sort by scale value, keeping run-id order for ties.
  std::stable_sort(out.begin(), out.end(), [](const RunSummary& a, const RunSummary& b) { return a.x < b.x; });
  return out;
}

std::vector<ScalePoint> collect(const fs::path& sweep_dir) {
  const fs::path spec_path = sweep_dir / "sweep.json";
  ScaleDimension dim;
  try {
    dim = parse_dimension(json::parse(read_file(spec_path)).at("dimension").get<std::string>());
  } catch (const json::exception& e) {
    throw Error("collect: " + spec_path.string() + ": " + e.what());
  }
  std::vector<ScalePoint> points;
  for (const auto& r : collect_runs(sweep_dir)) points.push_back({r.x, r.error, dim});
  return points;
}

}  // namespace codescale
