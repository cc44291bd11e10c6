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

#include "codescale/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace codescale {

namespace {

const char* const kSpecialNames[TokenizerModel::kSpecialCount] = {"[CLS]", "[SEP]", "[MASK]", "[PAD]", "[UNK]"};

std::string to_hex(const std::string& bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 15]);
  }
  return out;
}

}  // namespace

TokenizerModel::TokenizerModel() : TokenizerModel(std::vector<Merge>{}) {}

TokenizerModel::TokenizerModel(std::vector<Merge> merges) : merges_(std::move(merges)) {
  token_bytes_.resize(kBaseVocab);
  for (int b = 0; b < 256; ++b) token_bytes_[static_cast<size_t>(kByteOffset + b)] = std::string(1, static_cast<char>(b));
  for (const auto& [a, b] : merges_) {
    const auto next = static_cast<int32_t>(token_bytes_.size());
    if (a < kByteOffset || b < kByteOffset || a >= next || b >= next) {
      throw Error("tokenizer: merge (" + std::to_string(a) + ", " + std::to_string(b) + ") references an invalid id");
    }
    if (!rank_.emplace(pair_key(a, b), next - kBaseVocab).second) {
      throw Error("tokenizer: duplicate merge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    token_bytes_.push_back(token_bytes_[static_cast<size_t>(a)] + token_bytes_[static_cast<size_t>(b)]);
  }
}

const std::string& TokenizerModel::token_bytes(int32_t id) const {
  if (id < 0 || static_cast<size_t>(id) >= token_bytes_.size()) {
    throw Error("tokenizer: id " + std::to_string(id) + " out of range");
  }
  return token_bytes_[static_cast<size_t>(id)];
}

std::string TokenizerModel::token_name(int32_t id) const {
  if (is_special(id)) return kSpecialNames[id];
  return token_bytes(id);
}

std::vector<int32_t> TokenizerModel::encode(std::string_view text, bool add_specials) const {
  const size_t n = text.size();
  std::vector<int32_t> sym(n);
  std::vector<int32_t> prev(n), next(n);
  std::vector<bool> alive(n, true);
  for (size_t i = 0; i < n; ++i) {
    sym[i] = kByteOffset + static_cast<unsigned char>(text[i]);
    prev[i] = static_cast<int32_t>(i) - 1;
    next[i] = i + 1 < n ? static_cast<int32_t>(i + 1) : -1;
  }

  // Min-heap on (rank, position): equal ranks resolve left to right, which is
  // exactly the order a training-time pass over the unit applies them.
  using Item = std::pair<int32_t, int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto push = [&](int32_t pos) {
    if (pos < 0) return;
    const int32_t nx = next[static_cast<size_t>(pos)];
    if (nx < 0) return;
    auto it = rank_.find(pair_key(sym[static_cast<size_t>(pos)], sym[static_cast<size_t>(nx)]));
    if (it != rank_.end()) heap.emplace(it->second, pos);
  };
  for (size_t i = 0; i + 1 < n; ++i) push(static_cast<int32_t>(i));

  while (!heap.empty()) {
    const auto [rank, pos] = heap.top();
    heap.pop();
    const auto p = static_cast<size_t>(pos);
    if (!alive[p]) continue;
    const int32_t nx = next[p];
    if (nx < 0) continue;
    auto it = rank_.find(pair_key(sym[p], sym[static_cast<size_t>(nx)]));
    if (it == rank_.end() || it->second != rank) continue;
    sym[p] = kBaseVocab + rank;
    alive[static_cast<size_t>(nx)] = false;
    next[p] = next[static_cast<size_t>(nx)];
    if (next[p] >= 0) prev[static_cast<size_t>(next[p])] = pos;
    push(prev[p]);
    push(pos);
  }

  std::vector<int32_t> out;
  out.reserve(n + 2);
  if (add_specials) out.push_back(special_.cls);
  for (int32_t i = n > 0 ? 0 : -1; i >= 0; i = next[static_cast<size_t>(i)]) out.push_back(sym[static_cast<size_t>(i)]);
  if (add_specials) out.push_back(special_.sep);
  return out;
}

std::string TokenizerModel::decode(std::span<const int32_t> ids) const {
  std::string out;
  for (int32_t id : ids) {
    const auto& bytes = token_bytes(id);
    if (!is_special(id)) out += bytes;
  }
  return out;
}

std::string TokenizerModel::serialize() const {
  std::ostringstream os;
  os << "codescale-bpe 1\n";
  os << "vocab_size " << vocab_size() << "\n";
  os << "specials cls=" << special_.cls << " sep=" << special_.sep << " mask=" << special_.mask
     << " pad=" << special_.pad << " unk=" << special_.unk << "\n";
  os << "merges " << merges_.size() << "\n";
  for (const auto& [a, b] : merges_) os << a << ' ' << b << '\n';
  os << "vocab " << vocab_size() << "\n";
  for (size_t id = 0; id < vocab_size(); ++id) {
    os << id << ' ';
    if (is_special(static_cast<int32_t>(id))) {
      os << kSpecialNames[id];
    } else {
      os << to_hex(token_bytes_[id]);
    }
    os << '\n';
  }
  return os.str();
}

TokenizerModel TokenizerModel::parse(std::string_view text) {
  std::istringstream is{std::string(text)};
  auto fail = [](const std::string& what) -> TokenizerModel { throw Error("tokenizer file: " + what); };
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "codescale-bpe" || version != 1) return fail("bad magic/version");
  size_t vocab = 0;
  if (!(is >> word >> vocab) || word != "vocab_size") return fail("missing vocab_size");
  if (!(is >> word) || word != "specials") return fail("missing specials");
  const SpecialIds expected;
  const std::string specials[] = {"cls=" + std::to_string(expected.cls), "sep=" + std::to_string(expected.sep),
                                  "mask=" + std::to_string(expected.mask), "pad=" + std::to_string(expected.pad),
                                  "unk=" + std::to_string(expected.unk)};
  for (const auto& s : specials) {
    if (!(is >> word) || word != s) return fail("unexpected special-id layout '" + word + "'");
  }
  size_t count = 0;
  if (!(is >> word >> count) || word != "merges") return fail("missing merges");
  std::vector<Merge> merges(count);
  for (auto& m : merges) {
    if (!(is >> m.first >> m.second)) return fail("truncated merge list");
  }
  TokenizerModel model(std::move(merges));
  if (model.vocab_size() != vocab) return fail("vocab_size disagrees with merge count");
  size_t listed = 0;
  if (!(is >> word >> listed) || word != "vocab" || listed != vocab) return fail("missing vocab section");
  for (size_t i = 0; i < vocab; ++i) {
    size_t id = 0;
    std::string repr;
    if (!(is >> id >> repr) || id != i) return fail("bad vocab entry " + std::to_string(i));
    const std::string want = model.is_special(static_cast<int32_t>(i)) ? kSpecialNames[i] : to_hex(model.token_bytes_[i]);
    if (repr != want) return fail("vocab entry " + std::to_string(i) + " disagrees with merges");
  }
  return model;
}

void TokenizerModel::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

TokenizerModel TokenizerModel::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string TokenizerModel::checksum() const { return sha256_hex(serialize()); }

namespace {

struct Unit {
  std::vector<int32_t> syms;
  int64_t weight = 0;
};

uint64_t key_of(int32_t a, int32_t b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

TokenizerModel train_bpe(const Corpus& corpus, size_t vocab_size) {
  if (corpus.empty()) throw Error("train_bpe: empty corpus");
  if (vocab_size <= static_cast<size_t>(TokenizerModel::kBaseVocab)) {
    throw Error("train_bpe: vocab_size must exceed " + std::to_string(TokenizerModel::kBaseVocab));
  }

  std::map<std::string, int64_t> distinct;
  for (const auto& doc : corpus.documents) ++distinct[doc.content];
  std::vector<Unit> units;
  units.reserve(distinct.size());
  for (const auto& [text, weight] : distinct) {
    Unit u;
    u.weight = weight;
    u.syms.reserve(text.size());
    for (unsigned char c : text) u.syms.push_back(TokenizerModel::kByteOffset + c);
    units.push_back(std::move(u));
  }

  std::vector<std::string> bytes(TokenizerModel::kBaseVocab);
  for (int b = 0; b < 256; ++b) bytes[static_cast<size_t>(TokenizerModel::kByteOffset + b)] = std::string(1, static_cast<char>(b));

  struct Entry {
    int64_t count;
    int32_t a, b;
  };
  auto less = [&bytes](const Entry& x, const Entry& y) {
    if (x.count != y.count) return x.count > y.count;
    const auto& xa = bytes[static_cast<size_t>(x.a)];
    const auto& ya = bytes[static_cast<size_t>(y.a)];
    if (xa != ya) return xa < ya;
    const auto& xb = bytes[static_cast<size_t>(x.b)];
    const auto& yb = bytes[static_cast<size_t>(y.b)];
    if (xb != yb) return xb < yb;
    // Distinct ids can spell the same bytes; keep them distinct in the set.
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  };
  std::set<Entry, decltype(less)> ranked(less);
  std::unordered_map<uint64_t, int64_t> counts;
  std::unordered_map<uint64_t, std::vector<uint32_t>> where;

  for (uint32_t u = 0; u < units.size(); ++u) {
    const auto& s = units[u].syms;
    for (size_t i = 0; i + 1 < s.size(); ++i) {
      const auto k = key_of(s[i], s[i + 1]);
      counts[k] += units[u].weight;
      auto& w = where[k];
      if (w.empty() || w.back() != u) w.push_back(u);
    }
  }
  for (const auto& [k, c] : counts) {
    ranked.insert(Entry{c, static_cast<int32_t>(k >> 32), static_cast<int32_t>(k & 0xffffffffu)});
  }

  std::vector<TokenizerModel::Merge> merges;
  std::unordered_map<uint64_t, int64_t> delta;
  while (bytes.size() < vocab_size && !ranked.empty()) {
    const Entry best = *ranked.begin();
    if (best.count < 2) break;
    const auto new_id = static_cast<int32_t>(bytes.size());
    bytes.push_back(bytes[static_cast<size_t>(best.a)] + bytes[static_cast<size_t>(best.b)]);
    merges.emplace_back(best.a, best.b);

    const auto best_key = key_of(best.a, best.b);
    auto touched = std::move(where[best_key]);
    where.erase(best_key);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    delta.clear();
    for (uint32_t u : touched) {
      auto& s = units[u].syms;
      const int64_t w = units[u].weight;
      bool present = false;
      for (size_t i = 0; i + 1 < s.size() && !present; ++i) present = s[i] == best.a && s[i + 1] == best.b;
      if (!present) continue;
      for (size_t i = 0; i + 1 < s.size(); ++i) delta[key_of(s[i], s[i + 1])] -= w;
      std::vector<int32_t> merged;
      merged.reserve(s.size());
      for (size_t i = 0; i < s.size();) {
        if (i + 1 < s.size() && s[i] == best.a && s[i + 1] == best.b) {
          merged.push_back(new_id);
          i += 2;
        } else {
          merged.push_back(s[i]);
          i += 1;
        }
      }
      s = std::move(merged);
      for (size_t i = 0; i + 1 < s.size(); ++i) {
        const auto k = key_of(s[i], s[i + 1]);
        delta[k] += w;
        if (s[i] == new_id || s[i + 1] == new_id) {
          auto& wl = where[k];
          if (wl.empty() || wl.back() != u) wl.push_back(u);
        }
      }
    }
    for (const auto& [k, d] : delta) {
      if (d == 0) continue;
      const auto a = static_cast<int32_t>(k >> 32);
      const auto b = static_cast<int32_t>(k & 0xffffffffu);
      auto it = counts.find(k);
      const int64_t old = it == counts.end() ? 0 : it->second;
      if (old > 0) ranked.erase(Entry{old, a, b});
      const int64_t now = old + d;
      if (now > 0) {
        counts[k] = now;
        ranked.insert(Entry{now, a, b});
      } else if (it != counts.end()) {
        counts.erase(it);
      }
    }
  }
  return TokenizerModel(std::move(merges));
}

size_t tokenizer_preset_vocab(const std::string& name) {
  if (name == "csn-paper") return kCsnVocabSize;
  if (name == "desk") return kDefaultVocabSize;
  throw Error("unknown tokenizer preset '" + name + "' (known: csn-paper, desk)");
}

}  // namespace codescale
