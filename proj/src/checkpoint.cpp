// Copyright (c) 2026 The nvsr Authors. All Rights Reserved.
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

#include "nvsr/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <sstream>

#include "nvsr/config.hpp"
#include "nvsr/error.hpp"

namespace nvsr {

namespace {

constexpr std::string_view kStatePrefix = "state.";
constexpr std::uint64_t kMaxExtent = std::uint64_t(1) << 40;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width, const char* what) {
    need(std::size_t(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += std::size_t(width);
    return v;
  }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw DecodeError(std::string("checkpoint: truncated ") + what, pos_);
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

NamedArray to_array(const std::string& name, const Tensor<float>& t) {
  return {name, t.shape(), t.storage()};
}

}  // namespace

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

void Checkpoint::set_state(const std::string& key, const std::string& value) {
  text += std::string(kStatePrefix) + key + " = " + value + "\n";
}

std::map<std::string, std::string> Checkpoint::state() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, entry] : parse_entries(text))
    if (key.rfind(kStatePrefix, 0) == 0) out[key.substr(kStatePrefix.size())] = entry.value;
  return out;
}

std::string Checkpoint::config_text() const {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind(kStatePrefix, 0) != 0) out += line + "\n";
  return out;
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& checkpoint) {
  std::vector<unsigned char> out{'N', 'V', 'C', 'K'};
  put_u32(out, kCheckpointVersion);
  put_u32(out, std::uint32_t(checkpoint.text.size()));
  out.insert(out.end(), checkpoint.text.begin(), checkpoint.text.end());
  put_u32(out, std::uint32_t(checkpoint.arrays.size()));
  for (const auto& a : checkpoint.arrays) {
    if (shape_numel(a.shape) != a.values.size())
      throw ContractError("checkpoint: array '" + a.name + "' has " + std::to_string(a.values.size()) +
                          " values for shape " + shape_str(a.shape));
    put_u32(out, std::uint32_t(a.name.size()));
    out.insert(out.end(), a.name.begin(), a.name.end());
    put_u32(out, std::uint32_t(a.shape.size()));
    for (std::size_t e : a.shape) put_u64(out, e);
    for (float v : a.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  if (r.text(4, "magic") != "NVCK") throw DecodeError("checkpoint: missing NVCK magic", 0);
  const auto version = r.uint(4, "version");
  if (version != kCheckpointVersion)
    throw UnsupportedFormat("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  c.text = r.text(r.uint(4, "text length"), "text block");
  const auto count = r.uint(4, "array count");
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.text(r.uint(4, "name length"), "array name");
    const auto rank = r.uint(4, "rank");
    if (rank > 8) throw DecodeError("checkpoint: implausible rank " + std::to_string(rank), r.pos() - 4);
    std::uint64_t numel = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      const auto e = r.uint(8, "extent");
      if (e > kMaxExtent || (e && numel > kMaxExtent / e))
        throw DecodeError("checkpoint: implausible extent", r.pos() - 8);
      numel *= e;
      a.shape.push_back(std::size_t(e));
    }
    r.need(std::size_t(numel) * 4, "array values");
    a.values.resize(std::size_t(numel));
    for (auto& v : a.values) v = std::bit_cast<float>(std::uint32_t(r.uint(4, "array values")));
    c.arrays.push_back(std::move(a));
  }
  if (!r.done()) throw DecodeError("checkpoint: trailing bytes", r.pos());
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

Checkpoint model_checkpoint(const VideoModel<float>& model) {
  Checkpoint c;
  c.text = serialize_model_config(model.config());
  for (const auto& [name, t] : model.named_parameters()) c.arrays.push_back(to_array(name, t));
  return c;
}

void load_parameters(const NamedTensors<float>& params, const Checkpoint& checkpoint) {
  for (const auto& [name, t] : params) {
    const NamedArray* a = checkpoint.find(name);
    if (!a) throw ConfigError("checkpoint has no tensor '" + name + "'");
    if (a->shape != t.shape())
      throw ConfigError("checkpoint tensor '" + name + "' has shape " + shape_str(a->shape) + ", model expects " +
                        shape_str(t.shape()));
    auto copy = t;
    copy.storage() = a->values;
  }
}

VideoModel<float> model_from_checkpoint(const Checkpoint& checkpoint) {
  VideoModel<float> model(parse_model_config(checkpoint.config_text()), 0);
  load_parameters(model.named_parameters(), checkpoint);
  return model;
}

Checkpoint srb_checkpoint(const SRModel<float>& srb) {
  Checkpoint c;
  const auto& s = srb.config();
  c.text = "model.srb_channels = " + std::to_string(s.channels) + "\nmodel.srb_blocks = " +
           std::to_string(s.num_res_blocks) + "\nmodel.srb_scale = " + std::to_string(s.scale) + "\n";
  NamedTensors<float> named;
  srb.collect("srb", named);
  for (const auto& [name, t] : named) c.arrays.push_back(to_array(name, t));
  return c;
}

SRModel<float> srb_from_checkpoint(const Checkpoint& checkpoint) {
  const auto entries = parse_entries(checkpoint.config_text());
  auto get = [&](const std::string& key) {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError("SR block checkpoint lacks " + key);
    int v = 0;
    const auto& s = it->second.value;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("SR block checkpoint: bad " + key);
    return v;
  };
  const SrbConfig config{get("model.srb_channels"), get("model.srb_blocks"), get("model.srb_scale")};
  Rng rng(0);
  SRModel<float> srb(config, rng);
  NamedTensors<float> named;
  srb.collect("srb", named);
  load_parameters(named, checkpoint);
  return srb;
}

void add_optimizer_state(Checkpoint& checkpoint, const Adam<float>& optimizer) {
  checkpoint.set_state("adam.step_count", std::to_string(optimizer.step_count()));
  for (const auto& g : optimizer.groups()) {
    const auto& m = optimizer.moments(g.name);
    checkpoint.set_state("adam." + g.name + ".steps", std::to_string(m.steps));
    checkpoint.set_state("adam." + g.name + ".trainable", g.trainable ? "1" : "0");
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      const std::string base = "adam." + g.name + "." + std::to_string(i);
      checkpoint.arrays.push_back({base + ".m", g.params[i].shape(), m.first[i]});
      checkpoint.arrays.push_back({base + ".v", g.params[i].shape(), m.second[i]});
    }
  }
}

void restore_optimizer_state(Adam<float>& optimizer, const Checkpoint& checkpoint) {
  const auto state = checkpoint.state();
  auto integer = [&](const std::string& key) {
    const auto it = state.find(key);
    if (it == state.end()) throw ConfigError("checkpoint lacks optimizer state '" + key + "'");
    return std::stoll(it->second);
  };
  optimizer.set_step_count(integer("adam.step_count"));
  for (const auto& g : optimizer.groups()) {
    const bool trainable = integer("adam." + g.name + ".trainable") != 0;
    // Restore the flag before the moments: unfreezing clears them.
    optimizer.set_trainable(g.name, trainable);
    auto& m = optimizer.moments(g.name);
    m.steps = integer("adam." + g.name + ".steps");
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      const std::string base = "adam." + g.name + "." + std::to_string(i);
      const NamedArray* first = checkpoint.find(base + ".m");
      const NamedArray* second = checkpoint.find(base + ".v");
      if (!first || !second || first->values.size() != m.first[i].size() ||
          second->values.size() != m.second[i].size())
        throw ConfigError("checkpoint optimizer moments for '" + base + "' are missing or mis-sized");
      m.first[i] = first->values;
      m.second[i] = second->values;
    }
  }
}

}  // namespace nvsr
