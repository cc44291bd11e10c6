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

#include "codescale/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "codescale/checkpoint.hpp"
#include "codescale/common.hpp"
#include "codescale/corpus.hpp"
#include "codescale/evaluation.hpp"
#include "codescale/model.hpp"
#include "codescale/orchestrator.hpp"
#include "codescale/plot.hpp"
#include "codescale/probing.hpp"
#include "codescale/retrieval.hpp"
#include "codescale/scaling.hpp"
#include "codescale/tokenizer.hpp"
#include "codescale/training.hpp"

namespace codescale {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

// Every option value the subcommands bind to.
struct Options {
  uint64_t seed = 0;
  std::string config;
  std::string out;
  unsigned threads = 0;

  std::string input, base, pool, corpus, tokenizer, checkpoint, resume, labels, pairs, candidates, spec, dir;
  std::string preset = "expr";
  std::string model = "desk-s";
  std::string model_config;
  std::string norm;
  std::string dimension = "data";
  std::string task = "len";
  std::string eval_corpus;
  size_t n = 1000;
  uint64_t multiplier = 2;
  std::vector<double> ratios = {0.8, 0.1, 0.1};
  size_t vocab = 0;
  std::string vocab_preset = "desk";
  uint64_t steps = 1000;
  size_t batch = 16;
  size_t accum = 1;
  double lr = 1e-3;
  uint64_t warmup = 100;
  double mask_rate = 0.15;
  double weight_decay = 0.01;
  double dropout = 0.0;
  double temperature = 0.05;
  uint64_t checkpoint_every = 0;
  size_t min_keep = 8;
  std::vector<size_t> sizes = kDefaultEvalSizes;
  size_t trials = kDefaultTrials;
  size_t synth = 0;
  size_t synth_classes = 0;
  size_t per_class = 4;
  std::vector<size_t> edges = kDefaultLenEdges;
  double rate = 0.5;
  size_t max_items = kDefaultProbeSize;
  int layer = -1;
};

struct Context {
  const Options& opt;
  fs::path out_dir;
  std::ostream& out;
  std::vector<std::string> artifacts;

  fs::path artifact(const std::string& name) {
    artifacts.push_back(name);
    return out_dir / name;
  }
  void write(const std::string& name, const std::string& contents) { write_file_atomic(artifact(name), contents); }
};

using Handler = std::function<void(Context&)>;

std::string fmt(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option --") + flag);
}

struct LoadedModel {
  EncoderConfig config;
  ParameterSet params;
};

LoadedModel load_model(const Options& o) {
  require(o.checkpoint, "checkpoint");
  Checkpoint ck = load_checkpoint(o.checkpoint);
  return {ck.config, std::move(ck.params)};
}

TokenizerModel load_tokenizer(const Options& o) {
  require(o.tokenizer, "tokenizer");
  return TokenizerModel::load(o.tokenizer);
}

std::vector<Sequence> load_sequences(const Options& o, const std::string& path, size_t window) {
  require(path, "corpus");
  return chunk_fixed(ingest_records(path), load_tokenizer(o), ChunkOptions{window, std::min(o.min_keep, window)});
}

// ---- corpus ---------------------------------------------------------------

void corpus_summary(Context& c, const Corpus& corpus, const std::string& file) {
  c.write(file, serialize_records(corpus));
  json j = {{"documents", corpus.size()}, {"checksum", corpus_checksum(corpus)}, {"path", (c.out_dir / file).string()}};
  for (const auto& [lang, count] : corpus.language_counts()) j["languages"][lang] = count;
  c.out << j.dump(2) << "\n";
}

void cmd_corpus_ingest(Context& c) {
  require(c.opt.input, "input");
  corpus_summary(c, ingest_records(c.opt.input), "corpus.jsonl");
}

void cmd_corpus_synth(Context& c) {
  corpus_summary(c, synth_generate(c.opt.preset, c.opt.n, c.opt.seed), "corpus.jsonl");
}

void cmd_corpus_sample(Context& c) {
  require(c.opt.base, "base");
  require(c.opt.pool, "pool");
  const ScaledCorpus scaled = sample_scaled(ingest_records(c.opt.base), ingest_records(c.opt.pool), c.opt.multiplier,
                                            c.opt.seed);
  json quotas;
  for (const auto& [lang, q] : scaled.quotas) {
    quotas[lang] = {{"base", q.base}, {"requested", q.requested}, {"available", q.available}, {"taken", q.taken}};
  }
  c.write("quotas.json", quotas.dump(2) + "\n");
  corpus_summary(c, scaled.corpus, "corpus_" + std::to_string(c.opt.multiplier) + "x.jsonl");
}

void cmd_corpus_split(Context& c) {
  require(c.opt.input, "input");
  if (c.opt.ratios.size() != 3) throw UsageError("--ratios takes three values: train,valid,test");
  const CorpusSplit parts =
      split(ingest_records(c.opt.input), {c.opt.ratios[0], c.opt.ratios[1], c.opt.ratios[2]}, c.opt.seed);
  json j;
  for (const auto& [name, part] : {std::pair<std::string, const Corpus*>{"train", &parts.train},
                                   {"valid", &parts.valid},
                                   {"test", &parts.test}}) {
    c.write(name + ".jsonl", serialize_records(*part));
    j[name] = {{"documents", part->size()}, {"checksum", corpus_checksum(*part)}};
  }
  c.out << j.dump(2) << "\n";
}

// ---- tokenizer ------------------------------------------------------------

void cmd_tokenizer_train(Context& c) {
  require(c.opt.corpus, "corpus");
  const size_t vocab = c.opt.vocab > 0 ? c.opt.vocab : tokenizer_preset_vocab(c.opt.vocab_preset);
  const TokenizerModel tok = train_bpe(ingest_records(c.opt.corpus), vocab);
  tok.save(c.artifact("tokenizer.bpe"));
  c.out << json{{"vocab_size", tok.vocab_size()}, {"merges", tok.merges().size()}, {"checksum", tok.checksum()}}.dump(2)
        << "\n";
}

// ---- pretrain -------------------------------------------------------------

EncoderConfig resolve_model(const Options& o) {
  EncoderConfig config = preset(o.model);
  if (!o.model_config.empty()) {
    try {
      config = json::parse(read_file(o.model_config)).get<EncoderConfig>();
    } catch (const json::exception& e) {
      throw Error(o.model_config + ": " + e.what());
    }
  }
  if (!o.norm.empty()) config.norm_placement = parse_norm_placement(o.norm);
  if (o.dropout > 0.0) config.dropout = o.dropout;
  config.validate();
  return config;
}

TrainConfig resolve_train(const Options& o) {
  TrainConfig t;
  t.batch_size = o.batch;
  t.accum_steps = o.accum;
  t.lr_peak = o.lr;
  t.warmup_steps = std::min(o.warmup, o.steps);
  t.total_steps = o.steps;
  t.mask_rate = o.mask_rate;
  t.weight_decay = o.weight_decay;
  t.seed = o.seed;
  t.validate();
  return t;
}

void cmd_pretrain(Context& c) {
  const Options& o = c.opt;
  require(o.corpus, "corpus");
  const EncoderConfig model = resolve_model(o);
  const TrainConfig train = resolve_train(o);
  const TokenizerModel tok = load_tokenizer(o);
  if (static_cast<size_t>(model.vocab) < tok.vocab_size()) {
    throw Error("model vocab " + std::to_string(model.vocab) + " is smaller than the tokenizer vocab " +
                std::to_string(tok.vocab_size()));
  }
  const Corpus corpus = ingest_records(o.corpus);
  const auto window = static_cast<size_t>(model.max_seq);
  const auto seqs = chunk_fixed(corpus, tok, ChunkOptions{window, std::min(o.min_keep, window)});
  std::optional<Checkpoint> resume;
  if (!o.resume.empty()) resume = load_checkpoint(o.resume);
  CheckpointPolicy policy{c.out_dir / "checkpoints", o.checkpoint_every, {}, true};
  if (o.checkpoint_every > 0) fs::create_directories(policy.directory);
  const PretrainResult result = pretrain(seqs, tok.special(), model, train, policy, resume);

  Checkpoint final_ck{model, result.params, train.total_steps, {train.seed, train.total_steps * train.batch_size},
                      result.optimizer};
  save_checkpoint(c.artifact("final.ckpt"), final_ck);
  c.write("loss.csv", result.trace.to_csv());
  const ComputeLedger ledger = compute_ledger(model, train.total_steps, train.batch_size, window);
  const ParamCount pc = count_params(model);
  json summary = {{"model", model},
                  {"train", train},
                  {"corpus_checksum", corpus_checksum(corpus)},
                  {"tokenizer_checksum", tok.checksum()},
                  {"sequences", seqs.size()},
                  {"params", {{"total", pc.total}, {"non_embedding", pc.non_embedding}}},
                  {"compute", ledger},
                  {"final_loss", result.trace.records.empty() ? 0.0 : result.trace.records.back().loss}};
  if (!o.eval_corpus.empty()) {
    const auto tests = load_sequences(o, o.eval_corpus, window);
    summary["test_error"] = test_error(model, result.params, tests, tok.special(), train.mask_rate, o.seed);
  }
  c.write("summary.json", summary.dump(2) + "\n");
  c.out << summary.dump(2) << "\n";
}

// ---- sweep ----------------------------------------------------------------

void cmd_sweep_run(Context& c) {
  require(c.opt.spec, "spec");
  SweepSpec spec = load_sweep_spec(c.opt.spec);
  if (!c.opt.out.empty()) spec.output = c.opt.out;
  const auto records = run_sweep(spec);
  json j = json::array();
  for (const auto& r : records) {
    j.push_back({{"run_id", r.run_id}, {"status", r.status}, {"x", r.x}, {"test_error", r.test_error},
                 {"skipped", r.skipped}, {"message", r.message}});
  }
  c.out << j.dump(2) << "\n";
  const bool any_failed = std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return r.status != "complete"; });
  if (any_failed) throw Error("sweep finished with failed levels; see the run manifests");
}

void cmd_sweep_collect(Context& c) {
  require(c.opt.dir, "dir");
  const auto points = collect(c.opt.dir);
  std::string csv = "x,e\n";
  for (const auto& p : points) csv += fmt(p.x, "%.17g") + "," + fmt(p.e, "%.17g") + "\n";
  c.write("points.csv", csv);
  c.out << csv;
}

void cmd_report(Context& c) {
  require(c.opt.dir, "sweep");
  const auto runs = collect_runs(c.opt.dir);
  const SweepReport report = sweep_report(runs);
  const std::string dim = to_string(report.dimension);
  c.write("scaling_" + dim + ".csv", report.csv);
  c.write("scaling_" + dim + ".svg", report.svg);
  const json fit = to_json(report.fit);
  c.write("scaling_" + dim + ".json", fit.dump(2) + "\n");
  c.out << fit.dump(2) << "\n";
}

// ---- fit ------------------------------------------------------------------

std::vector<ScalePoint> read_points(const std::string& path, ScaleDimension dim) {
  std::istringstream in(read_file(path));
  std::string line;
  int xcol = 0, ecol = 1;
  bool first = true;
  std::vector<ScalePoint> points;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      first = false;
      const auto x = std::find(cells.begin(), cells.end(), "x");
      const auto e = std::find(cells.begin(), cells.end(), "e");
      if (x != cells.end() && e != cells.end()) {
        xcol = static_cast<int>(x - cells.begin());
        ecol = static_cast<int>(e - cells.begin());
        continue;
      }
    }
    if (cells.size() <= static_cast<size_t>(std::max(xcol, ecol))) {
      throw Error(path + ":" + std::to_string(number) + ": expected x and e columns");
    }
    if (cells.size() > 0 && cells[0] == "fit") continue;  // fitted-line samples of a report table
    try {
      points.push_back({std::stod(cells[xcol]), std::stod(cells[ecol]), dim});
    } catch (const std::exception&) {
      throw Error(path + ":" + std::to_string(number) + ": not a number");
    }
  }
  return points;
}

void cmd_fit(Context& c) {
  require(c.opt.input, "input");
  const ScaleDimension dim = parse_dimension(c.opt.dimension);
  const auto points = read_points(c.opt.input, dim);
  std::vector<RunSummary> runs;
  const PowerLawFit fit = fit_power_law(points);
  // Reuse the report renderer by presenting the points as a one-dimension sweep.
  for (size_t i = 0; i < points.size(); ++i) {
    RunSummary r{"p" + std::to_string(i), "d", "m", "c", points[i].x, points[i].e};
    (dim == ScaleDimension::kData ? r.data_key : dim == ScaleDimension::kModel ? r.model_key : r.compute_key) =
        std::to_string(i);
    runs.push_back(r);
  }
  const SweepReport report = sweep_report(runs);
  c.write("fit.csv", report.csv);
  c.write("fit.svg", report.svg);
  const json j = to_json(fit);
  c.write("fit.json", j.dump(2) + "\n");
  c.out << "alpha " << fmt(fit.alpha, "%.10g") << "\nk " << fmt(fit.k, "%.10g") << "\nr_squared "
        << fmt(fit.r_squared, "%.10g") << "\n";
}

// ---- eval -----------------------------------------------------------------

void cmd_eval_loss(Context& c) {
  const LoadedModel m = load_model(c.opt);
  const TokenizerModel tok = load_tokenizer(c.opt);
  const auto tests = load_sequences(c.opt, c.opt.corpus, m.config.max_seq);
  const MlmLoss loss = test_loss(m.config, m.params, tests, tok.special(), c.opt.mask_rate, c.opt.seed);
  const json j = {{"test_error", loss.mean()}, {"masked_tokens", loss.count}, {"sequences", tests.size()}};
  c.write("eval_loss.json", j.dump(2) + "\n");
  c.out << j.dump(2) << "\n";
}

void cmd_eval_uncertainty(Context& c) {
  const LoadedModel m = load_model(c.opt);
  const TokenizerModel tok = load_tokenizer(c.opt);
  const auto pool = load_sequences(c.opt, c.opt.corpus, m.config.max_seq);
  const auto reports =
      repeated_eval(m.config, m.params, pool, c.opt.sizes, c.opt.trials, tok.special(), c.opt.mask_rate, c.opt.seed);
  c.write("uncertainty_trials.csv", eval_reports_csv(reports));
  std::string stats = "size,trials,mean,std,min,q1,median,q3,max\n";
  SvgPlot::Series series{"std of test error", {}, {}, true, "#1f77b4"};
  for (const auto& r : reports) {
    stats += std::to_string(r.test_size) + "," + std::to_string(r.trials);
    for (double v : {r.mean_error, r.std_error, r.min_error, r.q1, r.median, r.q3, r.max_error}) {
      stats += "," + fmt(v, "%.10g");
    }
    stats += "\n";
    series.x.push_back(static_cast<double>(r.test_size));
    series.y.push_back(r.std_error);
  }
  c.write("uncertainty.csv", stats);
  c.write("uncertainty.json", eval_reports_json(reports).dump(2) + "\n");
  SvgPlot plot("test error spread vs test size", "test sequences", "std of test error");
  plot.log_x().log_y().add(std::move(series));
  c.write("uncertainty.svg", plot.render());
  c.out << stats;
}

struct SearchData {
  Corpus candidates;
  std::vector<RetrievalPair> pairs;
};

SearchData load_search(const Options& o) {
  if (o.synth > 0) {
    SearchSet set = synth_search_set(o.synth, o.seed);
    return {std::move(set.candidates), std::move(set.pairs)};
  }
  require(o.pairs, "pairs");
  require(o.candidates, "candidates");
  return {ingest_records(o.candidates), read_pairs(o.pairs)};
}

double search_mrr(const EncoderConfig& config, const ParameterSet& params, const TokenizerModel& tok,
                  const SearchData& data) {
  std::vector<Sequence> q, d;
  for (const auto& p : data.pairs) q.push_back(encode_text(tok, p.query, config.max_seq));
  for (const auto& doc : data.candidates.documents) d.push_back(encode_text(tok, doc.content, config.max_seq));
  return mrr(score_matrix(embed_all(config, params, q), embed_all(config, params, d)),
             gold_indices(data.candidates, data.pairs));
}

std::vector<PoolItem> load_pool(const Options& o) {
  if (o.synth_classes > 0) return synth_clone_pool(o.synth_classes, o.per_class, o.seed);
  require(o.pool, "pool");
  return read_pool(o.pool);
}

std::pair<double, double> clone_metrics(const EncoderConfig& config, const ParameterSet& params,
                                        const TokenizerModel& tok, const std::vector<PoolItem>& pool) {
  std::vector<Sequence> items;
  std::vector<int> labels;
  for (const auto& p : pool) {
    items.push_back(encode_text(tok, p.content, config.max_seq));
    labels.push_back(p.class_id);
  }
  const Matrix e = embed_all(config, params, items);
  const Matrix s = score_matrix(e, e);
  return {map_at_r(s, labels), mean_average_precision(s, labels)};
}

void cmd_eval_mrr(Context& c) {
  const LoadedModel m = load_model(c.opt);
  const json j = {{"mrr", search_mrr(m.config, m.params, load_tokenizer(c.opt), load_search(c.opt))}};
  c.write("mrr.json", j.dump(2) + "\n");
  c.out << j.dump(2) << "\n";
}

void cmd_eval_map(Context& c) {
  const LoadedModel m = load_model(c.opt);
  const auto [mapr, map] = clone_metrics(m.config, m.params, load_tokenizer(c.opt), load_pool(c.opt));
  const json j = {{"map_at_r", mapr}, {"map", map}};
  c.write("map.json", j.dump(2) + "\n");
  c.out << j.dump(2) << "\n";
}

// ---- finetune -------------------------------------------------------------

FinetuneConfig finetune_config(const Options& o) {
  FinetuneConfig f;
  f.train = resolve_train(o);
  f.temperature = o.temperature;
  return f;
}

void save_finetuned(Context& c, const EncoderConfig& config, const FinetuneResult& result, json summary) {
  save_checkpoint(c.artifact("finetuned.ckpt"), Checkpoint{config, result.params, result.losses.size(), {}, {}});
  std::string csv = "step,loss\n";
  for (size_t i = 0; i < result.losses.size(); ++i) csv += std::to_string(i + 1) + "," + fmt(result.losses[i], "%.10g") + "\n";
  c.write("finetune_loss.csv", csv);
  summary["loss"] = "in-batch softmax cross-entropy, temperature " + fmt(c.opt.temperature);
  c.write("finetune.json", summary.dump(2) + "\n");
  c.out << summary.dump(2) << "\n";
}

void cmd_finetune_search(Context& c) {
  const LoadedModel m = load_model(c.opt);
  const TokenizerModel tok = load_tokenizer(c.opt);
  const SearchData data = load_search(c.opt);
  const auto gold = gold_indices(data.candidates, data.pairs);
  std::vector<EncodedPair> pairs;
  for (size_t i = 0; i < data.pairs.size(); ++i) {
    pairs.push_back({encode_text(tok, data.pairs[i].query, m.config.max_seq),
                     encode_text(tok, data.candidates.documents[gold[i]].content, m.config.max_seq)});
  }
  const double before = search_mrr(m.config, m.params, tok, data);
  const FinetuneResult result = finetune_contrastive(m.config, m.params, pairs, finetune_config(c.opt));
  const double after = search_mrr(m.config, result.params, tok, data);
  save_finetuned(c, m.config, result, {{"mrr_before", before}, {"mrr_after", after}});
}

void cmd_finetune_clone(Context& c) {
  const LoadedModel m = load_model(c.opt);
  const TokenizerModel tok = load_tokenizer(c.opt);
  const auto pool = load_pool(c.opt);
  std::map<int, std::vector<size_t>> members;
  for (size_t i = 0; i < pool.size(); ++i) members[pool[i].class_id].push_back(i);
  std::vector<EncodedPair> pairs;
  for (const auto& [cls, idx] : members) {
    for (size_t k = 0; k + 1 < idx.size(); k += 2) {
      pairs.push_back({encode_text(tok, pool[idx[k]].content, m.config.max_seq),
                       encode_text(tok, pool[idx[k + 1]].content, m.config.max_seq)});
    }
  }
  const auto before = clone_metrics(m.config, m.params, tok, pool);
  const FinetuneResult result = finetune_contrastive(m.config, m.params, pairs, finetune_config(c.opt));
  const auto after = clone_metrics(m.config, result.params, tok, pool);
  save_finetuned(c, m.config, result,
                 {{"map_at_r_before", before.first}, {"map_at_r_after", after.first}, {"map_before", before.second},
                  {"map_after", after.second}});
}

// ---- probe ----------------------------------------------------------------

void cmd_probe_gen(Context& c) {
  require(c.opt.corpus, "corpus");
  const ProbeTask task = parse_probe_task(c.opt.task);
  const Corpus corpus = ingest_records(c.opt.corpus);
  ProbeDataset dataset;
  if (task == ProbeTask::kLen) {
    dataset = gen_len_labels(corpus, load_tokenizer(c.opt), c.opt.edges, c.opt.seed, c.opt.max_items);
  } else if (task == ProbeTask::kTyp) {
    dataset = gen_typ_labels(corpus, synth_type_keywords(), c.opt.rate, c.opt.seed, c.opt.max_items);
  } else {
    throw UsageError("probe gen supports len and typ; ast and cpx labels are read from label files");
  }
  write_probe_dataset(dataset, c.artifact("probe_" + to_string(task) + ".jsonl"));
  json j = {{"task", to_string(task)}, {"items", dataset.items.size()}, {"histogram", dataset.histogram()}};
  c.out << j.dump(2) << "\n";
}

struct ProbeInputs {
  LoadedModel model;
  ProbeDataset dataset;
  std::vector<Sequence> sequences;
};

ProbeInputs probe_inputs(const Options& o) {
  require(o.labels, "labels");
  ProbeInputs in{load_model(o), read_probe_dataset(o.labels, parse_probe_task(o.task)), {}};
  in.sequences = encode_dataset(load_tokenizer(o), in.dataset, in.model.config.max_seq);
  return in;
}

void cmd_probe_run(Context& c) {
  const ProbeInputs in = probe_inputs(c.opt);
  const int layer = c.opt.layer < 0 ? in.model.config.layers : c.opt.layer;
  const Matrix features = extract_features(in.model.config, in.model.params, in.sequences, layer);
  const auto labels = in.dataset.labels();
  const IndexSplit split = probe_split(labels.size(), c.opt.seed);
  const Matrix train_x = select_rows(features, split.train);
  const Matrix test_x = select_rows(features, split.test);
  const auto train_y = select_labels(labels, split.train);
  const auto test_y = select_labels(labels, split.test);
  const LinearProbe probe = train_probe(train_x, train_y, in.dataset.class_count, c.opt.seed);
  const json j = {{"task", to_string(in.dataset.task)},
                  {"layer", layer},
                  {"train_acc", probe_accuracy(probe, train_x, train_y)},
                  {"test_acc", probe_accuracy(probe, test_x, test_y)},
                  {"chance", 1.0 / static_cast<double>(in.dataset.class_count)},
                  {"iterations", probe.iterations},
                  {"converged", probe.converged}};
  c.write("probe_" + to_string(in.dataset.task) + ".json", j.dump(2) + "\n");
  c.out << j.dump(2) << "\n";
}

void cmd_probe_layers(Context& c) {
  const ProbeInputs in = probe_inputs(c.opt);
  const LayerSweep sweep = layer_sweep(in.model.config, in.model.params, in.sequences, in.dataset.labels(),
                                       in.dataset.class_count, c.opt.seed);
  const std::string task = to_string(in.dataset.task);
  c.write("layers_" + task + ".csv", sweep.to_csv());
  c.write("layers_" + task + ".svg", sweep.to_svg(task + " probe accuracy by layer"));
  c.out << sweep.to_csv();
}

// ---- wiring ---------------------------------------------------------------

struct Cli {
  CLI::App app{"codescale: desk-scale scaling laws for masked code models", "codescale"};
  Options opt;
  std::map<CLI::App*, Handler> handlers;

  Cli() {
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--seed", opt.seed, "Random seed");
    app.add_option("--config", opt.config, "JSON config file; command-line flags take precedence");
    app.add_option("--out", opt.out, std::string("Output directory (default $") + kOutEnv + " or ./codescale_out)");
    app.add_option("--threads", opt.threads, "Worker thread cap (0 = all cores)");

    auto* corpus = app.add_subcommand("corpus", "Corpus preparation")->require_subcommand(1);
    auto* ingest = leaf(corpus, "ingest", "Validate a JSONL record file", cmd_corpus_ingest);
    ingest->add_option("--input", opt.input, "Record file");
    auto* synth = leaf(corpus, "synth", "Generate a synthetic code corpus", cmd_corpus_synth);
    synth->add_option("--preset", opt.preset, "Generator preset");
    synth->add_option("--n", opt.n, "Documents");
    auto* sample = leaf(corpus, "sample", "Scale a base corpus by a multiplier", cmd_corpus_sample);
    sample->add_option("--base", opt.base, "Base corpus");
    sample->add_option("--pool", opt.pool, "Extra-document pool");
    sample->add_option("--multiplier", opt.multiplier, "Scale multiplier");
    auto* sp = leaf(corpus, "split", "Seeded train/valid/test split", cmd_corpus_split);
    sp->add_option("--input", opt.input, "Record file");
    sp->add_option("--ratios", opt.ratios, "train,valid,test")->delimiter(',');

    auto* tok = app.add_subcommand("tokenizer", "Tokenizer training")->require_subcommand(1);
    auto* tt = leaf(tok, "train", "Train a byte-level BPE tokenizer", cmd_tokenizer_train);
    tt->add_option("--corpus", opt.corpus, "Training corpus");
    tt->add_option("--vocab", opt.vocab, "Vocabulary size (overrides --preset)");
    tt->add_option("--preset", opt.vocab_preset, "Vocabulary preset: desk or csn-paper");

    auto* pre = leaf(&app, "pretrain", "Masked-language-model pretraining", cmd_pretrain);
    add_model_options(pre);
    add_train_options(pre);
    pre->add_option("--corpus", opt.corpus, "Training corpus");
    pre->add_option("--tokenizer", opt.tokenizer, "Tokenizer file");
    pre->add_option("--checkpoint-every", opt.checkpoint_every, "Periodic checkpoint interval");
    pre->add_option("--resume", opt.resume, "Checkpoint to resume from");
    pre->add_option("--min-keep", opt.min_keep, "Shortest trailing window kept");
    pre->add_option("--eval-corpus", opt.eval_corpus, "Held-out corpus evaluated after training");

    auto* sweep = app.add_subcommand("sweep", "Scaling sweeps")->require_subcommand(1);
    auto* run = leaf(sweep, "run", "Run a sweep spec", cmd_sweep_run);
    run->add_option("--spec", opt.spec, "Sweep spec JSON");
    auto* col = leaf(sweep, "collect", "Collect scale points of a sweep", cmd_sweep_collect);
    col->add_option("--dir", opt.dir, "Sweep output directory");

    auto* eval = app.add_subcommand("eval", "Evaluation")->require_subcommand(1);
    auto* loss = leaf(eval, "loss", "Masked-token test error", cmd_eval_loss);
    add_eval_options(loss);
    auto* unc = leaf(eval, "uncertainty", "Repeated evaluation at several test sizes", cmd_eval_uncertainty);
    add_eval_options(unc);
    unc->add_option("--sizes", opt.sizes, "Test sizes")->delimiter(',');
    unc->add_option("--trials", opt.trials, "Trials per size");
    auto* emrr = leaf(eval, "mrr", "Code-search MRR", cmd_eval_mrr);
    add_search_options(emrr);
    auto* emap = leaf(eval, "map", "Clone-detection MAP@R", cmd_eval_map);
    add_pool_options(emap);

    auto* fit = leaf(&app, "fit", "Fit e = k x^-alpha to a CSV of x,e", cmd_fit);
    fit->add_option("--input", opt.input, "CSV with x and e columns");
    fit->add_option("--dimension", opt.dimension, "data, model or compute");

    auto* ft = app.add_subcommand("finetune", "Contrastive fine-tuning")->require_subcommand(1);
    auto* fts = leaf(ft, "search", "Fine-tune for code search", cmd_finetune_search);
    add_search_options(fts);
    add_finetune_options(fts);
    auto* ftc = leaf(ft, "clone", "Fine-tune for clone detection", cmd_finetune_clone);
    add_pool_options(ftc);
    add_finetune_options(ftc);

    auto* probe = app.add_subcommand("probe", "Linear probing")->require_subcommand(1);
    auto* pg = leaf(probe, "gen", "Generate LEN or TYP labels", cmd_probe_gen);
    pg->add_option("--task", opt.task, "len or typ");
    pg->add_option("--corpus", opt.corpus, "Source corpus");
    pg->add_option("--tokenizer", opt.tokenizer, "Tokenizer (len)");
    pg->add_option("--edges", opt.edges, "Length bin edges (len)")->delimiter(',');
    pg->add_option("--rate", opt.rate, "Corruption rate (typ)");
    pg->add_option("--max-items", opt.max_items, "Dataset size cap");
    for (auto [name, help, fn] : {std::tuple{"run", "Probe one layer", cmd_probe_run},
                                  std::tuple{"layers", "Probe every layer", cmd_probe_layers}}) {
      auto* p = leaf(probe, name, help, fn);
      p->add_option("--task", opt.task, "len, ast, cpx or typ");
      p->add_option("--labels", opt.labels, "Label record file");
      p->add_option("--checkpoint", opt.checkpoint, "Encoder checkpoint");
      p->add_option("--tokenizer", opt.tokenizer, "Tokenizer file");
      if (std::string(name) == "run") p->add_option("--layer", opt.layer, "Hidden layer (-1 = last)");
    }

    auto* rep = leaf(&app, "report", "Fit and plot a completed sweep", cmd_report);
    rep->add_option("--sweep", opt.dir, "Sweep output directory");
  }

  CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& help, Handler fn) {
    CLI::App* sub = parent->add_subcommand(name, help);
    handlers[sub] = std::move(fn);
    return sub;
  }

  void add_model_options(CLI::App* s) {
    s->add_option("--model", opt.model, "Model preset");
    s->add_option("--model-config", opt.model_config, "Model config JSON (overrides --model)");
    s->add_option("--norm", opt.norm, "Norm placement: pre or post");
    s->add_option("--dropout", opt.dropout, "Dropout probability");
  }
  void add_train_options(CLI::App* s) {
    s->add_option("--steps", opt.steps, "Optimizer steps");
    s->add_option("--batch", opt.batch, "Sequences per step");
    s->add_option("--accum", opt.accum, "Micro-batches per step");
    s->add_option("--lr", opt.lr, "Peak learning rate");
    s->add_option("--warmup", opt.warmup, "Warmup steps");
    s->add_option("--mask-rate", opt.mask_rate, "Masking probability");
    s->add_option("--weight-decay", opt.weight_decay, "AdamW weight decay");
  }
  void add_eval_options(CLI::App* s) {
    s->add_option("--checkpoint", opt.checkpoint, "Encoder checkpoint");
    s->add_option("--tokenizer", opt.tokenizer, "Tokenizer file");
    s->add_option("--corpus", opt.corpus, "Held-out corpus");
    s->add_option("--mask-rate", opt.mask_rate, "Masking probability");
    s->add_option("--min-keep", opt.min_keep, "Shortest trailing window kept");
  }
  void add_search_options(CLI::App* s) {
    s->add_option("--checkpoint", opt.checkpoint, "Encoder checkpoint");
    s->add_option("--tokenizer", opt.tokenizer, "Tokenizer file");
    s->add_option("--pairs", opt.pairs, "Pair record file");
    s->add_option("--candidates", opt.candidates, "Candidate corpus");
    s->add_option("--synth", opt.synth, "Use N synthetic pairs instead of files");
  }
  void add_pool_options(CLI::App* s) {
    s->add_option("--checkpoint", opt.checkpoint, "Encoder checkpoint");
    s->add_option("--tokenizer", opt.tokenizer, "Tokenizer file");
    s->add_option("--pool", opt.pool, "Pool record file");
    s->add_option("--synth-classes", opt.synth_classes, "Use a synthetic pool with this many classes");
    s->add_option("--per-class", opt.per_class, "Members per synthetic class");
  }
  void add_finetune_options(CLI::App* s) {
    add_train_options(s);
    s->add_option("--temperature", opt.temperature, "Softmax temperature");
  }

  CLI::App* selected() {
    CLI::App* cur = &app;
    while (true) {
      auto subs = cur->get_subcommands();
      if (subs.empty()) return cur;
      cur = subs.front();
    }
  }
};

std::vector<CLI::App*> chain(Cli& cli) {
  std::vector<CLI::App*> out{&cli.app};
  while (true) {
    auto subs = out.back()->get_subcommands();
    if (subs.empty()) return out;
    out.push_back(subs.front());
  }
}

CLI::Option* find_option(const std::vector<CLI::App*>& apps, const std::string& name) {
  for (auto it = apps.rbegin(); it != apps.rend(); ++it) {
    if (auto* o = (*it)->get_option_no_throw("--" + name)) return o;
  }
  return nullptr;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + scalar_text(e);
    return s;
  }
  return v.dump();
}

// Appends config-file values for options not given on the command line.
std::vector<std::string> merge_config(Cli& cli, const std::vector<std::string>& args,
                                      std::map<std::string, std::string>& sources) {
  const json config = [&] {
    try {
      return json::parse(read_file(cli.opt.config));
    } catch (const json::exception& e) {
      throw UsageError(cli.opt.config + ": " + e.what());
    }
  }();
  if (!config.is_object()) throw UsageError(cli.opt.config + ": config must be a JSON object");
  const auto apps = chain(cli);
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : config.items()) {
    if (key == "config") continue;
    CLI::Option* o = find_option(apps, key);
    if (!o) throw UsageError(cli.opt.config + ": unknown option '" + key + "' for this command");
    if (o->count() > 0) continue;
    merged.push_back("--" + key);
    merged.push_back(scalar_text(value));
    sources[key] = "file";
  }
  return merged;
}

json resolved_config(Cli& cli, const std::map<std::string, std::string>& sources) {
  json j;
  for (CLI::App* a : chain(cli)) {
    for (const CLI::Option* o : a->get_options()) {
      const std::string name = o->get_single_name();
      if (name.empty() || name == "help") continue;
      std::string value;
      if (o->count() > 0) {
        for (const auto& r : o->results()) value += (value.empty() ? "" : ",") + r;
      } else {
        value = o->get_default_str();
      }
      const auto it = sources.find(name);
      const std::string source = o->count() > 0 ? (it != sources.end() ? it->second : "flag") : "default";
      j[name] = {{"value", value}, {"source", source}};
    }
  }
  return j;
}

std::string command_name(Cli& cli) {
  std::string name;
  for (CLI::App* a : chain(cli)) {
    if (a == &cli.app) continue;
    name += (name.empty() ? "" : " ") + a->get_name();
  }
  return name;
}

json input_checksums(const Options& o) {
  json j = json::object();
  for (const std::string* p : {&o.input, &o.base, &o.pool, &o.corpus, &o.tokenizer, &o.checkpoint, &o.resume,
                               &o.labels, &o.pairs, &o.candidates, &o.spec, &o.model_config, &o.eval_corpus}) {
    if (!p->empty() && fs::is_regular_file(*p)) j[*p] = sha256_file(*p);
  }
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto parse = [](Cli& cli, const std::vector<std::string>& a) {
    // CLI11 consumes a reversed vector without argv[0].
    std::vector<std::string> rev = a.empty() ? std::vector<std::string>{} : std::vector<std::string>(a.rbegin(), a.rend() - 1);
    cli.app.parse(rev);
  };
  auto cli = std::make_unique<Cli>();
  std::map<std::string, std::string> sources;
  try {
    parse(*cli, args);
    if (!cli->opt.config.empty()) {
      const std::vector<std::string> merged = merge_config(*cli, args, sources);
      cli = std::make_unique<Cli>();
      parse(*cli, merged);
    }
  } catch (const CLI::CallForHelp&) {
    out << cli->app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << cli->selected()->help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  Options& opt = cli->opt;
  CLI::App* leaf = cli->selected();
  const auto handler = cli->handlers.find(leaf);
  if (handler == cli->handlers.end()) {
    err << leaf->help();
    return kExitUsage;
  }
  set_thread_limit(opt.threads);
  fs::path out_dir = opt.out;
  if (out_dir.empty()) {
    const char* env = std::getenv(kOutEnv);
    out_dir = env && *env ? fs::path(env) : fs::path("codescale_out");
  }
  const std::string command = command_name(*cli);
  const json resolved = resolved_config(*cli, sources);
  err << "codescale " << command << "\nconfig " << resolved.dump() << "\n";

  json manifest = {{"command", command},
                   {"argv", std::vector<std::string>(args.begin() + 1, args.end())},
                   {"config", resolved},
                   {"status", "running"}};
  const fs::path manifest_path = out_dir / "run_manifest.json";
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  Context ctx{opt, out_dir, out, {}};
  try {
    fs::create_directories(out_dir);
    manifest["inputs"] = input_checksums(opt);
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    handler->second(ctx);
    manifest["status"] = "ok";
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << leaf->help();
    manifest["status"] = "usage_error";
    manifest["message"] = e.what();
    code = kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    manifest["status"] = "failed";
    manifest["message"] = e.what();
    code = kExitFailure;
  }
  manifest["artifacts"] = ctx.artifacts;
  manifest["exit_code"] = code;
  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    if (fs::is_directory(out_dir)) write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "warning: could not write the run manifest: " << e.what() << "\n";
  }
  return code;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace codescale
