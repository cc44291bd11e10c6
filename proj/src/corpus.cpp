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

#include "codescale/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "codescale/tokenizer.hpp"

namespace codescale {

using nlohmann::json;

std::map<std::string, size_t> Corpus::language_counts() const {
  std::map<std::string, size_t> counts;
  for (const auto& doc : documents) ++counts[doc.language];
  return counts;
}

Corpus ingest_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open record file " + path.string());
  Corpus corpus;
  corpus.provenance = "ingest:" + path.string();
  std::set<uint64_t> seen;
  std::string line;
  size_t line_no = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  // A trailing newline produces no extra record; interior blank lines are errors.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(path.string() + ": empty record file");
  for (auto& text : lines) {
    ++line_no;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(where + "malformed record: " + e.what());
    }
    if (!rec.is_object()) throw Error(where + "record is not an object");
    if (!rec.contains("language") || !rec["language"].is_string()) {
      throw Error(where + "missing string field 'language'");
    }
    if (!rec.contains("content") || !rec["content"].is_string()) {
      throw Error(where + "missing string field 'content'");
    }
    Document doc;
    doc.language = rec["language"].get<std::string>();
    doc.content = rec["content"].get<std::string>();
    if (doc.content.empty()) throw Error(where + "empty 'content'");
    doc.id = line_no - 1;
    if (rec.contains("id")) {
      if (!rec["id"].is_number_unsigned()) throw Error(where + "'id' must be a non-negative integer");
      doc.id = rec["id"].get<uint64_t>();
    }
    if (!seen.insert(doc.id).second) throw Error(where + "duplicate id " + std::to_string(doc.id));
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::string serialize_records(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    json rec = {{"id", doc.id}, {"language", doc.language}, {"content", doc.content}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void write_records(const Corpus& corpus, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_records(corpus));
}

std::string corpus_checksum(const Corpus& corpus) { return sha256_hex(serialize_records(corpus)); }

std::map<std::string, LanguageQuota> scaled_quotas(const std::map<std::string, size_t>& base_counts,
                                                   const std::map<std::string, size_t>& pool_counts,
                                                   uint64_t multiplier) {
  if (multiplier == 0) throw Error("sample_scaled: multiplier must be >= 1");
  std::map<std::string, LanguageQuota> quotas;
  for (const auto& [lang, count] : base_counts) {
    LanguageQuota q;
    q.base = count;
    q.requested = static_cast<size_t>(multiplier - 1) * count;
    auto it = pool_counts.find(lang);
    q.available = it == pool_counts.end() ? 0 : it->second;
    q.taken = std::min(q.requested, q.available);
    quotas.emplace(lang, q);
  }
  return quotas;
}

ScaledCorpus sample_scaled(const Corpus& base, const Corpus& extra, uint64_t multiplier, uint64_t seed) {
  ScaledCorpus result;
  result.quotas = scaled_quotas(base.language_counts(), extra.language_counts(), multiplier);

  std::map<std::string, std::vector<size_t>> pools;
  for (size_t i = 0; i < extra.documents.size(); ++i) pools[extra.documents[i].language].push_back(i);

  std::vector<size_t> chosen;
  for (const auto& [lang, q] : result.quotas) {
    if (q.shortfall()) {
      log_warn("sample_scaled: language '" + lang + "' pool has " + std::to_string(q.available) +
               " documents, " + std::to_string(q.requested) + " requested; taking the whole pool");
    }
    if (q.taken == 0) continue;
    auto pool = pools[lang];
    Rng rng(mix_seed(seed, hash_string(lang)));
    // Partial Fisher-Yates: the first `taken` slots are a uniform sample.
    for (size_t i = 0; i < q.taken; ++i) {
      size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(q.taken));
  }
  std::sort(chosen.begin(), chosen.end());

  Corpus& out = result.corpus;
  out.seed = seed;
  out.provenance = "scaled x" + std::to_string(multiplier) + " of [" + base.provenance + "] + [" +
                   extra.provenance + "]";
  out.documents.reserve(base.size() + chosen.size());
  for (const auto& doc : base.documents) out.documents.push_back(doc);
  for (size_t idx : chosen) out.documents.push_back(extra.documents[idx]);
  for (size_t i = 0; i < out.documents.size(); ++i) out.documents[i].id = i;
  return result;
}

size_t chunk_count(size_t tokens, const ChunkOptions& options) {
  const size_t full = tokens / options.window;
  const size_t tail = tokens % options.window;
  return full + ((tail > 0 && tail >= options.min_keep) ? 1 : 0);
}

std::vector<Sequence> chunk_fixed(const Corpus& corpus, const TokenizerModel& tokenizer,
                                  const ChunkOptions& options) {
  if (options.window < 2) throw Error("chunk_fixed: window must be >= 2");
  std::vector<std::vector<int32_t>> streams(corpus.size());
  parallel_for(corpus.size(), [&](size_t i) { streams[i] = tokenizer.encode(corpus.documents[i].content); });

  std::vector<Sequence> out;
  const int32_t pad = tokenizer.special().pad;
  for (size_t d = 0; d < corpus.size(); ++d) {
    const auto& ids = streams[d];
    for (size_t start = 0; start < ids.size(); start += options.window) {
      const size_t len = std::min(options.window, ids.size() - start);
      if (len < options.window && len < options.min_keep) break;
      Sequence seq;
      seq.doc_id = corpus.documents[d].id;
      seq.length = len;
      seq.ids.assign(options.window, pad);
      std::copy_n(ids.begin() + static_cast<std::ptrdiff_t>(start), len, seq.ids.begin());
      out.push_back(std::move(seq));
    }
  }
  return out;
}

CorpusSplit split(const Corpus& corpus, const SplitRatios& ratios, uint64_t seed) {
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0) throw Error("split: ratios must be nonnegative");
  if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) {
    throw Error("split: ratios must sum to 1");
  }
  const size_t n = corpus.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<size_t>(order));

  const auto n_train = std::min(n, static_cast<size_t>(std::llround(static_cast<double>(n) * ratios.train)));
  const auto n_head = std::min(
      n, static_cast<size_t>(std::llround(static_cast<double>(n) * (ratios.train + ratios.valid))));

  auto take = [&](size_t lo, size_t hi, const char* name) {
    std::vector<size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(lo),
                            order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(idx.begin(), idx.end());
    Corpus part;
    part.seed = seed;
    part.provenance = std::string(name) + " split of [" + corpus.provenance + "]";
    for (size_t i : idx) part.documents.push_back(corpus.documents[i]);
    return part;
  };
  return {take(0, n_train, "train"), take(n_train, std::max(n_train, n_head), "valid"),
          take(std::max(n_train, n_head), n, "test")};
}

// ---------------------------------------------------------------------------
// Synthetic function generator

namespace {

const std::vector<std::string> kTypes = {"int", "float", "bool", "char", "long", "double", "string", "byte", "short"};

const std::vector<std::string> kNouns = {
    "count", "user", "item", "value", "index", "total", "name", "list", "node", "buffer", "size", "key",
    "path", "file", "data", "result", "error", "token", "score", "state", "order", "price", "record",
    "entry", "table", "row", "column", "page", "offset", "limit", "width", "height", "depth", "level",
    "weight", "rate", "step", "delta", "sum", "max", "min", "avg", "flag", "mode", "type", "kind", "group",
    "cache", "queue", "stack", "tree", "graph", "edge", "vertex", "point", "line", "word", "char", "text",
    "query", "match", "filter", "rule", "config", "option", "param", "arg", "field", "attr", "tag", "label",
    "event", "handler", "message", "request", "response", "client", "server", "session", "account", "balance",
    "amount", "invoice", "customer", "product", "stock", "store", "image", "pixel", "color", "frame", "time",
    "date", "hour", "minute", "second", "year", "month", "day", "block", "chunk", "segment", "slot", "bucket",
    "hash", "seed", "random", "sample", "batch", "epoch", "loss", "grad", "model", "layer", "input", "output",
    "target", "source", "dest", "left", "right", "head", "tail", "parent", "child", "root", "leaf", "range",
    "span", "window", "ratio", "factor", "bound", "margin", "budget", "quota", "retry", "timeout", "version"};

const std::vector<std::string> kVerbs = {
    "get", "set", "compute", "update", "find", "load", "parse", "build", "check", "merge", "sort", "count",
    "read", "write", "scan", "apply", "reset", "resolve", "collect", "filter", "render", "encode", "decode",
    "validate", "normalize", "split", "join", "insert", "remove", "append", "clamp", "scale", "sum", "init"};

const std::vector<std::string> kHelpers = {"log", "emit", "push", "notify", "touch", "mark", "flush", "trace"};

// Zipf-like rank sampling over a list of size n (exponent ~1).
size_t zipf_index(Rng& rng, size_t n) {
  const double u = rng.uniform();
  const double h = std::log(static_cast<double>(n) + 1.0);
  auto idx = static_cast<size_t>(std::exp(u * h) - 1.0);
  return std::min(idx, n - 1);
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string join_words(const std::vector<std::string>& words, bool camel) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (camel) {
      out += i == 0 ? words[i] : capitalize(words[i]);
    } else {
      if (i) out += '_';
      out += words[i];
    }
  }
  return out;
}

// Skeleton ------------------------------------------------------------------

struct Term {
  enum Kind { kVar, kLiteral, kCall } kind = kVar;
  int slot = 0;     // variable slot (kVar, kCall argument)
  int literal = 0;  // kLiteral
  int helper = 0;   // kCall helper slot
};

struct Expr {
  std::vector<Term> terms;
  std::vector<char> ops;  // between terms
};

struct Cond {
  Expr lhs, rhs;
  std::string cmp;
};

struct Stmt {
  enum Kind { kDecl, kAssign, kIf, kWhile, kFor, kCall, kReturn } kind = kDecl;
  int slot = 0;
  int type = 0;
  char op = '+';
  Expr expr;
  Cond cond;
  int helper = 0;
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
};

struct Skeleton {
  std::vector<int> param_types;  // slot i < params
  std::vector<int> slot_types;   // all slots
  int return_type = 0;
  int helper_count = 0;
  std::vector<Stmt> body;
};

class SkeletonBuilder {
 public:
  explicit SkeletonBuilder(Rng& rng) : rng_(rng) {}

  Skeleton build() {
    Skeleton sk;
    const int params = 1 + static_cast<int>(rng_.below(3));
    for (int i = 0; i < params; ++i) {
      const int t = static_cast<int>(zipf_index(rng_, kTypes.size()));
      sk.param_types.push_back(t);
      types_.push_back(t);
      scope_.push_back(i);
    }
    sk.return_type = static_cast<int>(zipf_index(rng_, kTypes.size()));
    const int statements = 2 + static_cast<int>(rng_.below(4));
    for (int i = 0; i < statements; ++i) sk.body.push_back(statement(0));
    Stmt ret;
    ret.kind = Stmt::kReturn;
    ret.expr = expr();
    sk.body.push_back(ret);
    sk.slot_types = types_;
    sk.helper_count = helpers_;
    return sk;
  }

 private:
  Term term() {
    Term t;
    const double u = rng_.uniform();
    if (u < 0.6) {
      t.kind = Term::kVar;
      t.slot = scope_[rng_.below(scope_.size())];
    } else if (u < 0.85) {
      t.kind = Term::kLiteral;
      t.literal = static_cast<int>(zipf_index(rng_, 100));
    } else {
      t.kind = Term::kCall;
      t.helper = new_helper();
      t.slot = scope_[rng_.below(scope_.size())];
    }
    return t;
  }

  Expr expr() {
    static constexpr char kOps[] = {'+', '-', '*', '/', '%'};
    Expr e;
    const int n = 1 + static_cast<int>(rng_.below(3));
    for (int i = 0; i < n; ++i) {
      if (i) e.ops.push_back(kOps[zipf_index(rng_, 5)]);
      e.terms.push_back(term());
    }
    return e;
  }

  Cond cond() {
    static const std::vector<std::string> kCmp = {"<", ">", "<=", ">=", "==", "!="};
    Cond c;
    c.lhs = expr();
    c.cmp = kCmp[rng_.below(kCmp.size())];
    c.rhs = expr();
    return c;
  }

  int new_helper() {
    if (helpers_ > 0 && rng_.uniform() < 0.5) return static_cast<int>(rng_.below(static_cast<uint64_t>(helpers_)));
    return helpers_++;
  }

  int new_slot(int type) {
    types_.push_back(type);
    return static_cast<int>(types_.size()) - 1;
  }

  std::vector<Stmt> block(int depth) {
    const size_t saved = scope_.size();
    std::vector<Stmt> body;
    const int n = 1 + static_cast<int>(rng_.below(3));
    for (int i = 0; i < n; ++i) body.push_back(statement(depth));
    scope_.resize(saved);
    return body;
  }

  Stmt statement(int depth) {
    Stmt s;
    const double u = rng_.uniform();
    const bool can_nest = depth < 2;
    if (u < 0.35 || (!can_nest && u < 0.6)) {
      s.kind = Stmt::kDecl;
      s.type = static_cast<int>(zipf_index(rng_, kTypes.size()));
      s.expr = expr();
      s.slot = new_slot(s.type);
      scope_.push_back(s.slot);
    } else if (u < 0.6 || !can_nest) {
      if (u >= 0.85 && !can_nest) {
        s.kind = Stmt::kCall;
        s.helper = new_helper();
        s.slot = scope_[rng_.below(scope_.size())];
      } else {
        s.kind = Stmt::kAssign;
        s.slot = scope_[rng_.below(scope_.size())];
        static constexpr char kOps[] = {'+', '-', '*'};
        s.op = kOps[rng_.below(3)];
        s.expr = expr();
      }
    } else if (u < 0.75) {
      s.kind = Stmt::kIf;
      s.cond = cond();
      s.body = block(depth + 1);
      if (rng_.uniform() < 0.3) s.orelse = block(depth + 1);
    } else if (u < 0.85) {
      s.kind = Stmt::kWhile;
      s.cond = cond();
      s.body = block(depth + 1);
    } else if (u < 0.95) {
      s.kind = Stmt::kFor;
      s.expr = expr();
      s.slot = new_slot(0);
      scope_.push_back(s.slot);
      s.body = block(depth + 1);
      scope_.pop_back();
    } else {
      s.kind = Stmt::kCall;
      s.helper = new_helper();
      s.slot = scope_[rng_.below(scope_.size())];
    }
    return s;
  }

  Rng& rng_;
  std::vector<int> types_;
  std::vector<int> scope_;
  int helpers_ = 0;
};

// Rendering -------------------------------------------------------------------

enum class Lang { kPython, kJava, kGo, kPhp, kJavascript, kRuby };

const std::vector<std::string> kLanguageNames = {"python", "java", "go", "php", "javascript", "ruby"};
// CodeSearchNet training-set function counts, used as mixing weights.
const std::vector<double> kLanguageWeights = {412176, 454451, 317832, 523712, 123889, 48791};

Lang parse_lang(const std::string& name) {
  for (size_t i = 0; i < kLanguageNames.size(); ++i) {
    if (kLanguageNames[i] == name) return static_cast<Lang>(i);
  }
  throw Error("unknown synthetic language '" + name + "'");
}

class Renderer {
 public:
  Renderer(Lang lang, const Skeleton& sk, Rng& naming) : lang_(lang), sk_(sk) {
    camel_ = lang == Lang::kJava || lang == Lang::kJavascript || lang == Lang::kGo;
    std::set<std::string> used;
    auto fresh = [&](std::vector<std::string> words) {
      std::string name = join_words(words, camel_);
      while (!used.insert(name).second) {
        words.push_back(kNouns[zipf_index(naming, kNouns.size())]);
        name = join_words(words, camel_);
      }
      return name;
    };
    verb_ = kVerbs[naming.below(kVerbs.size())];
    subject_ = {kNouns[zipf_index(naming, kNouns.size())]};
    if (naming.uniform() < 0.5) subject_.push_back(kNouns[zipf_index(naming, kNouns.size())]);
    std::vector<std::string> fn_words = {verb_};
    fn_words.insert(fn_words.end(), subject_.begin(), subject_.end());
    function_name_ = fresh(fn_words);
    for (size_t i = 0; i < sk.slot_types.size(); ++i) {
      std::vector<std::string> words = {kNouns[zipf_index(naming, kNouns.size())]};
      if (naming.uniform() < 0.3) words.push_back(kNouns[zipf_index(naming, kNouns.size())]);
      slot_words_.push_back(words);
      slot_names_.push_back(fresh(words));
    }
    for (int i = 0; i < sk.helper_count; ++i) {
      helper_names_.push_back(
          fresh({kHelpers[naming.below(kHelpers.size())], kNouns[zipf_index(naming, kNouns.size())]}));
    }
  }

  std::string summary() const {
    std::string s = verb_;
    for (const auto& w : subject_) s += " " + w;
    const size_t params = sk_.param_types.size();
    if (params > 0) {
      s += " from";
      for (size_t i = 0; i < params; ++i) {
        if (i) s += " and";
        for (const auto& w : slot_words_[i]) s += " " + w;
      }
    }
    return s;
  }

  std::string render() {
    out_.clear();
    header();
    for (const auto& st : sk_.body) statement(st, 1);
    footer();
    return out_;
  }

 private:
  std::string var(int slot) const {
    return lang_ == Lang::kPhp ? "$" + slot_names_[static_cast<size_t>(slot)]
                               : slot_names_[static_cast<size_t>(slot)];
  }
  const std::string& type(int t) const { return kTypes[static_cast<size_t>(t)]; }
  bool braces() const { return lang_ != Lang::kPython && lang_ != Lang::kRuby; }
  std::string semi() const { return (lang_ == Lang::kJava || lang_ == Lang::kPhp || lang_ == Lang::kJavascript) ? ";" : ""; }

  void line(int depth, const std::string& text) {
    out_.append(static_cast<size_t>(depth) * (lang_ == Lang::kPython ? 4 : 2), ' ');
    out_ += text;
    out_ += '\n';
  }

  std::string term(const Term& t) const {
    switch (t.kind) {
      case Term::kVar: return var(t.slot);
      case Term::kLiteral: return std::to_string(t.literal);
      case Term::kCall: return helper_names_[static_cast<size_t>(t.helper)] + "(" + var(t.slot) + ")";
    }
    return {};
  }

  std::string expr(const Expr& e) const {
    std::string s = term(e.terms[0]);
    for (size_t i = 1; i < e.terms.size(); ++i) {
      s += ' ';
      s += e.ops[i - 1];
      s += ' ';
      s += term(e.terms[i]);
    }
    return s;
  }

  std::string cond(const Cond& c) const {
    std::string s = expr(c.lhs) + " " + c.cmp + " " + expr(c.rhs);
    return (lang_ == Lang::kJava || lang_ == Lang::kPhp || lang_ == Lang::kJavascript) ? "(" + s + ")" : s;
  }

  void header() {
    std::string params;
    for (size_t i = 0; i < sk_.param_types.size(); ++i) {
      if (i) params += ", ";
      const auto& t = type(sk_.param_types[i]);
      const auto v = var(static_cast<int>(i));
      switch (lang_) {
        case Lang::kPython: params += v + ": " + t; break;
        case Lang::kJava: params += t + " " + v; break;
        case Lang::kGo: params += v + " " + t; break;
        case Lang::kPhp: params += t + " " + v; break;
        case Lang::kJavascript:
        case Lang::kRuby: params += v; break;
      }
    }
    const auto& rt = type(sk_.return_type);
    switch (lang_) {
      case Lang::kPython: line(0, "def " + function_name_ + "(" + params + ") -> " + rt + ":"); break;
      case Lang::kJava: line(0, "public static " + rt + " " + function_name_ + "(" + params + ") {"); break;
      case Lang::kGo: line(0, "func " + function_name_ + "(" + params + ") " + rt + " {"); break;
      case Lang::kPhp: line(0, "function " + function_name_ + "(" + params + "): " + rt + " {"); break;
      case Lang::kJavascript:
      case Lang::kRuby: {
        const std::string c = lang_ == Lang::kRuby ? "# " : "// ";
        for (size_t i = 0; i < sk_.param_types.size(); ++i) {
          line(0, c + "@param " + var(static_cast<int>(i)) + " " + type(sk_.param_types[i]));
        }
        line(0, c + "@return " + rt);
        if (lang_ == Lang::kRuby) {
          line(0, "def " + function_name_ + "(" + params + ")");
        } else {
          line(0, "function " + function_name_ + "(" + params + ") {");
        }
        break;
      }
    }
  }

  void footer() {
    if (lang_ == Lang::kRuby) line(0, "end");
    else if (braces()) line(0, "}");
  }

  void close(int depth) {
    if (lang_ == Lang::kRuby) line(depth, "end");
    else if (braces()) line(depth, "}");
  }

  void block(const std::vector<Stmt>& body, int depth) {
    for (const auto& st : body) statement(st, depth);
  }

  void statement(const Stmt& s, int depth) {
    switch (s.kind) {
      case Stmt::kDecl: {
        const auto v = var(s.slot);
        const auto& t = type(s.type);
        const auto e = expr(s.expr);
        switch (lang_) {
          case Lang::kPython: line(depth, v + ": " + t + " = " + e); break;
          case Lang::kJava: line(depth, t + " " + v + " = " + e + ";"); break;
          case Lang::kGo: line(depth, "var " + v + " " + t + " = " + e); break;
          case Lang::kPhp: line(depth, v + " = (" + t + ") (" + e + ");"); break;
          case Lang::kJavascript: line(depth, "let " + v + " = " + e + "; // " + t); break;
          case Lang::kRuby: line(depth, v + " = " + e + " # " + t); break;
        }
        break;
      }
      case Stmt::kAssign:
        line(depth, var(s.slot) + " " + s.op + "= " + expr(s.expr) + semi());
        break;
      case Stmt::kCall:
        line(depth, helper_names_[static_cast<size_t>(s.helper)] + "(" + var(s.slot) + ")" + semi());
        break;
      case Stmt::kReturn:
        line(depth, "return " + expr(s.expr) + semi());
        break;
      case Stmt::kIf: {
        const auto c = cond(s.cond);
        if (lang_ == Lang::kPython) line(depth, "if " + c + ":");
        else if (lang_ == Lang::kRuby) line(depth, "if " + c);
        else line(depth, "if " + c + " {");
        block(s.body, depth + 1);
        if (!s.orelse.empty()) {
          if (lang_ == Lang::kPython) line(depth, "else:");
          else if (lang_ == Lang::kRuby) line(depth, "else");
          else line(depth, "} else {");
          block(s.orelse, depth + 1);
        }
        if (lang_ != Lang::kPython) close(depth);
        break;
      }
      case Stmt::kWhile: {
        const auto c = cond(s.cond);
        switch (lang_) {
          case Lang::kPython: line(depth, "while " + c + ":"); break;
          case Lang::kRuby: line(depth, "while " + c); break;
          case Lang::kGo: line(depth, "for " + c + " {"); break;
          default: line(depth, "while " + c + " {"); break;
        }
        block(s.body, depth + 1);
        if (lang_ != Lang::kPython) close(depth);
        break;
      }
      case Stmt::kFor: {
        const auto v = var(s.slot);
        const auto bound = expr(s.expr);
        switch (lang_) {
          case Lang::kPython: line(depth, "for " + v + " in range(" + bound + "):"); break;
          case Lang::kRuby: line(depth, "(0...(" + bound + ")).each do |" + v + "|"); break;
          case Lang::kGo: line(depth, "for " + v + " := 0; " + v + " < " + bound + "; " + v + "++ {"); break;
          case Lang::kJava: line(depth, "for (int " + v + " = 0; " + v + " < " + bound + "; " + v + "++) {"); break;
          case Lang::kPhp: line(depth, "for (" + v + " = 0; " + v + " < " + bound + "; " + v + "++) {"); break;
          case Lang::kJavascript: line(depth, "for (let " + v + " = 0; " + v + " < " + bound + "; " + v + "++) {"); break;
        }
        block(s.body, depth + 1);
        if (lang_ != Lang::kPython) close(depth);
        break;
      }
    }
  }

  Lang lang_;
  const Skeleton& sk_;
  bool camel_ = false;
  std::string verb_;
  std::vector<std::string> subject_;
  std::string function_name_;
  std::vector<std::vector<std::string>> slot_words_;
  std::vector<std::string> slot_names_;
  std::vector<std::string> helper_names_;
  std::string out_;
};

std::string pick_language(Rng& rng) {
  const double total = std::accumulate(kLanguageWeights.begin(), kLanguageWeights.end(), 0.0);
  double u = rng.uniform() * total;
  for (size_t i = 0; i < kLanguageWeights.size(); ++i) {
    u -= kLanguageWeights[i];
    if (u < 0) return kLanguageNames[i];
  }
  return kLanguageNames.back();
}

}  // namespace

const std::vector<std::string>& synth_languages() { return kLanguageNames; }

const std::vector<std::string>& synth_type_keywords() { return kTypes; }

std::vector<std::string> synth_presets() { return {"expr", "expr-java"}; }

SynthSnippet synth_snippet(const std::string& language, uint64_t structure_seed, uint64_t naming_seed) {
  const Lang lang = parse_lang(language);
  Rng structure(structure_seed);
  Rng naming(naming_seed);
  const Skeleton sk = SkeletonBuilder(structure).build();
  Renderer renderer(lang, sk, naming);
  SynthSnippet snippet;
  snippet.language = language;
  snippet.code = renderer.render();
  snippet.summary = renderer.summary();
  return snippet;
}

Corpus synth_generate(const std::string& preset, size_t n, uint64_t seed) {
  const auto presets = synth_presets();
  if (std::find(presets.begin(), presets.end(), preset) == presets.end()) {
    std::string known;
    for (const auto& p : presets) known += (known.empty() ? "" : ", ") + p;
    throw Error("synth_generate: unknown preset '" + preset + "' (known: " + known + ")");
  }
  Corpus corpus;
  corpus.seed = seed;
  corpus.provenance = "synth:" + preset + " n=" + std::to_string(n) + " seed=" + std::to_string(seed);
  corpus.documents.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Rng pick(mix_seed(seed, i, 0));
    const std::string lang = preset == "expr-java" ? "java" : pick_language(pick);
    auto snippet = synth_snippet(lang, mix_seed(seed, i, 1), mix_seed(seed, i, 2));
    const char* comment = (lang == "python" || lang == "ruby") ? "# " : "// ";
    Document doc;
    doc.language = lang;
    doc.content = comment + snippet.summary + "\n" + snippet.code;
    doc.id = i;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace codescale
