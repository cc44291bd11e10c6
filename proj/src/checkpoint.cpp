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

#include "codescale/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace codescale {

using nlohmann::json;

void to_json(json& j, const EncoderConfig& c) {
  j = json{{"layers", c.layers},
           {"hidden", c.hidden},
           {"heads", c.heads},
           {"head_size", c.head_size},
           {"intermediate", c.intermediate},
           {"vocab", c.vocab},
           {"max_seq", c.max_seq},
           {"norm_placement", to_string(c.norm_placement)},
           {"tied_head", c.tied_head},
           {"dropout", c.dropout},
           {"layer_norm_eps", c.layer_norm_eps}};
}

void from_json(const json& j, EncoderConfig& c) {
  EncoderConfig d;
  c.layers = j.value("layers", d.layers);
  c.hidden = j.value("hidden", d.hidden);
  c.heads = j.value("heads", d.heads);
  c.head_size = j.value("head_size", d.head_size);
  c.intermediate = j.value("intermediate", 4 * c.hidden);
  c.vocab = j.value("vocab", d.vocab);
  c.max_seq = j.value("max_seq", d.max_seq);
  c.norm_placement = parse_norm_placement(j.value("norm_placement", std::string("post")));
  c.tied_head = j.value("tied_head", d.tied_head);
  c.dropout = j.value("dropout", d.dropout);
  c.layer_norm_eps = j.value("layer_norm_eps", d.layer_norm_eps);
  c.validate();
}

namespace {

constexpr char kMagic[4] = {'C', 'S', 'C', 'K'};

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::string_view bytes, size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw Error("checkpoint: truncated file");
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, bytes.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void put_tensors(std::string& out, const ParameterSet& p) {
  for (const auto& t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) put_le<double>(out, t.data[i]);
  }
}

void get_tensors(std::string_view bytes, size_t& pos, ParameterSet& p) {
  for (auto& t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = get_le<double>(bytes, pos);
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json header;
  header["config"] = ck.config;
  header["step"] = ck.step;
  header["stream"] = {{"seed", ck.stream.seed}, {"sequences_consumed", ck.stream.sequences_consumed}};
  header["has_optimizer"] = ck.optimizer.has_value();
  if (ck.optimizer) header["optimizer_step"] = ck.optimizer->step;
  json table = json::array();
  for (const auto& t : ck.params.tensors()) table.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  header["tensors"] = table;
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  put_le<uint32_t>(out, kCheckpointVersion);
  put_le<uint64_t>(out, text.size());
  out += text;
  put_tensors(out, ck.params);
  if (ck.optimizer) {
    put_tensors(out, ck.optimizer->m);
    put_tensors(out, ck.optimizer->v);
  }
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error("checkpoint: bad magic in " + path.string());
  }
  size_t pos = 4;
  const auto version = get_le<uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) throw Error("checkpoint: unsupported version " + std::to_string(version));
  const auto len = get_le<uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw Error("checkpoint: truncated header");
  const json header = json::parse(bytes.substr(pos, len));
  pos += len;

  Checkpoint ck;
  ck.config = header.at("config").get<EncoderConfig>();
  ck.step = header.at("step").get<uint64_t>();
  ck.stream.seed = header.at("stream").at("seed").get<uint64_t>();
  ck.stream.sequences_consumed = header.at("stream").at("sequences_consumed").get<uint64_t>();
  ck.params = ParameterSet::zeros(ck.config);
  const auto views = ck.params.tensors();
  const auto& table = header.at("tensors");
  if (table.size() != views.size()) throw Error("checkpoint: tensor table does not match config");
  for (size_t i = 0; i < views.size(); ++i) {
    if (table[i].at("name").get<std::string>() != views[i].name || table[i].at("rows").get<Eigen::Index>() != views[i].rows ||
        table[i].at("cols").get<Eigen::Index>() != views[i].cols) {
      throw Error("checkpoint: tensor " + views[i].name + " has unexpected layout");
    }
  }
  get_tensors(bytes, pos, ck.params);
  if (header.at("has_optimizer").get<bool>()) {
    AdamState st = AdamState::zeros(ck.config);
    st.step = header.at("optimizer_step").get<uint64_t>();
    get_tensors(bytes, pos, st.m);
    get_tensors(bytes, pos, st.v);
    ck.optimizer = std::move(st);
  }
  if (pos != bytes.size()) throw Error("checkpoint: trailing bytes in " + path.string());
  return ck;
}

}  // namespace codescale
