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

#include "nvsr/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

#include "nvsr/error.hpp"
#include "nvsr/synthetic.hpp"

namespace nvsr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const ConfigEntry& e, const char* expected) {
  throw ConfigError("line " + std::to_string(e.line) + ": " + key + " expects " + expected + ", got '" + e.value + "'");
}

template <typename N>
N parse_number(const std::string& key, const ConfigEntry& e, const char* expected) {
  N v{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) bad_value(key, e, expected);
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const ConfigEntry& e) {
  std::vector<int> out;
  for (const auto& item : split_list(e.value)) out.push_back(parse_number<int>(key, {item, e.line}, "a list of integers"));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const ConfigEntry&)> set;
};

template <typename Access>
Field int_field(std::string key, Access access) {
  return {key, [access](const ExperimentConfig& c) { return std::to_string(access(c)); },
          [access](ExperimentConfig& c, const std::string& k, const ConfigEntry& e) {
            access(c) = parse_number<int>(k, e, "an integer");
          }};
}

template <typename Access>
Field double_field(std::string key, Access access) {
  return {key, [access](const ExperimentConfig& c) { return format_double(access(c)); },
          [access](ExperimentConfig& c, const std::string& k, const ConfigEntry& e) {
            access(c) = parse_number<double>(k, e, "a number");
          }};
}

template <typename Access>
Field string_field(std::string key, Access access) {
  return {key,
          [key, access](const ExperimentConfig& c) {
            const std::string& v = access(c);
            if (v.find_first_of("#\n") != std::string::npos || trim(v) != v)
              throw ConfigError(key + " cannot be written: '#', newlines and outer spaces do not survive parsing");
            return v;
          },
          [access](ExperimentConfig& c, const std::string&, const ConfigEntry& e) { access(c) = e.value; }};
}

template <typename Access>
Field list_field(std::string key, Access access) {
  return {key, [access](const ExperimentConfig& c) { return format_list(access(c)); },
          [access](ExperimentConfig& c, const std::string& k, const ConfigEntry& e) {
            access(c) = parse_int_list(k, e);
          }};
}

#define NVSR_ACCESS(expr) [](auto& c) -> auto& { return c.expr; }

// Order here is the canonical serialization order.
const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"model.variant", [](const ExperimentConfig& c) { return std::string(variant_name(c.model.variant)); },
       [](ExperimentConfig& c, const std::string&, const ConfigEntry& e) { c.model.variant = parse_variant(e.value); }},
      list_field("model.strides", NVSR_ACCESS(model.strides)),
      int_field("model.base_width", NVSR_ACCESS(model.base_width)),
      double_field("model.width_decay", NVSR_ACCESS(model.width_decay)),
      int_field("model.min_width", NVSR_ACCESS(model.min_width)),
      int_field("model.final_width", NVSR_ACCESS(model.final_width)),
      int_field("model.stem_hidden", NVSR_ACCESS(model.stem_hidden)),
      double_field("model.pe_base", NVSR_ACCESS(model.pe.freq_base)),
      int_field("model.pe_freqs", NVSR_ACCESS(model.pe.num_freqs)),
      int_field("model.embedding_channels", NVSR_ACCESS(model.embedding.channels)),
      int_field("model.encoder_width", NVSR_ACCESS(model.embedding.encoder_width)),
      int_field("model.srb_channels", NVSR_ACCESS(model.srb.channels)),
      int_field("model.srb_blocks", NVSR_ACCESS(model.srb.num_res_blocks)),
      int_field("model.srb_scale", NVSR_ACCESS(model.srb.scale)),
      int_field("model.output_h", NVSR_ACCESS(model.output_h)),
      int_field("model.output_w", NVSR_ACCESS(model.output_w)),

      int_field("schedule.total_epochs", NVSR_ACCESS(schedule.total_epochs)),
      int_field("schedule.srb_finetune_start", NVSR_ACCESS(schedule.srb_finetune_start)),
      double_field("schedule.base_lr", NVSR_ACCESS(schedule.base_lr)),
      double_field("schedule.warmup_fraction", NVSR_ACCESS(schedule.warmup_fraction)),
      int_field("schedule.eval_every", NVSR_ACCESS(schedule.eval_every)),

      list_field("degrade.kernel_sizes", NVSR_ACCESS(degradation.kernel_sizes)),
      double_field("degrade.sigma_min", NVSR_ACCESS(degradation.sigma.min)),
      double_field("degrade.sigma_max", NVSR_ACCESS(degradation.sigma.max)),
      double_field("degrade.saturation_min", NVSR_ACCESS(degradation.saturation.min)),
      double_field("degrade.saturation_max", NVSR_ACCESS(degradation.saturation.max)),
      double_field("degrade.gain_min", NVSR_ACCESS(degradation.gain.min)),
      double_field("degrade.gain_max", NVSR_ACCESS(degradation.gain.max)),
      double_field("degrade.bias_min", NVSR_ACCESS(degradation.bias.min)),
      double_field("degrade.bias_max", NVSR_ACCESS(degradation.bias.max)),

      int_field("pretrain.epochs", NVSR_ACCESS(pretrain.epochs)),
      int_field("pretrain.crops_per_epoch", NVSR_ACCESS(pretrain.crops_per_epoch)),
      int_field("pretrain.crop_size", NVSR_ACCESS(pretrain.crop_size)),
      double_field("pretrain.lr", NVSR_ACCESS(pretrain.lr)),

      string_field("paths.corpus", NVSR_ACCESS(paths.corpus)),
      string_field("paths.video", NVSR_ACCESS(paths.video)),
      string_field("paths.output", NVSR_ACCESS(paths.output)),
      string_field("paths.srb", NVSR_ACCESS(paths.srb)),

      string_field("synthetic.kind", NVSR_ACCESS(synthetic.kind)),
      int_field("synthetic.frames", NVSR_ACCESS(synthetic.frames)),
      int_field("synthetic.height", NVSR_ACCESS(synthetic.height)),
      int_field("synthetic.width", NVSR_ACCESS(synthetic.width)),
      {"synthetic.seed", [](const ExperimentConfig& c) { return std::to_string(c.synthetic.seed); },
       [](ExperimentConfig& c, const std::string& k, const ConfigEntry& e) {
         c.synthetic.seed = parse_number<std::uint64_t>(k, e, "a non-negative integer");
       }},

      {"experiment.seed", [](const ExperimentConfig& c) { return std::to_string(c.experiment.seed); },
       [](ExperimentConfig& c, const std::string& k, const ConfigEntry& e) {
         c.experiment.seed = parse_number<std::uint64_t>(k, e, "a non-negative integer");
       }},
      {"experiment.budget", [](const ExperimentConfig& c) { return std::to_string(c.experiment.budget); },
       [](ExperimentConfig& c, const std::string& k, const ConfigEntry& e) {
         c.experiment.budget = parse_number<std::size_t>(k, e, "a non-negative integer");
       }},
      int_field("experiment.seeds", NVSR_ACCESS(experiment.seeds)),
      list_field("experiment.ablate_starts", NVSR_ACCESS(experiment.ablate_starts)),
  };
  return table;
}

#undef NVSR_ACCESS

void validate_experiment(const ExperimentConfig& c) {
  c.model.validate();
  c.schedule.validate();
  c.degradation.validate();
  if (c.pretrain.epochs < 1 || c.pretrain.crops_per_epoch < 1)
    throw ConfigError("pretrain.epochs and pretrain.crops_per_epoch must be positive");
  if (c.pretrain.crop_size < 4 || c.pretrain.crop_size % 2)
    throw ConfigError("pretrain.crop_size must be even and at least 4");
  if (!(c.pretrain.lr > 0)) throw ConfigError("pretrain.lr must be positive");
  if (c.synthetic.frames < 1 || c.synthetic.height < 1 || c.synthetic.width < 1)
    throw ConfigError("synthetic frames, height and width must be positive");
  parse_synthetic_kind(c.synthetic.kind);
  if (c.experiment.seeds < 1) throw ConfigError("experiment.seeds must be >= 1");
  for (int s : c.experiment.ablate_starts)
    if (s < 0 || s > c.schedule.total_epochs)
      throw ConfigError("experiment.ablate_starts entries must lie in [0, schedule.total_epochs]");
}

ExperimentConfig apply_entries(const ConfigEntries& entries, bool model_only) {
  ExperimentConfig c;
  // Variant-dependent defaults come first so explicit keys override them.
  if (auto it = entries.find("model.variant"); it != entries.end()) {
    const Variant v = parse_variant(it->second.value);
    c.model = desk_config(v);
  }
  for (const auto& [key, entry] : entries) {
    const Field* field = nullptr;
    for (const auto& f : fields())
      if (f.key == key) field = &f;
    if (!field || (model_only && key.rfind("model.", 0) != 0))
      throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
    field->set(c, key, entry);
  }
  if (!entries.count("schedule.srb_finetune_start")) c.schedule.srb_finetune_start = c.schedule.total_epochs / 2;
  return c;
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return serialize_config(*this) == serialize_config(other);
}

ConfigEntries parse_entries(const std::string& text) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected 'section.key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
        key.find_first_of(" \t") != std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": malformed key '" + key + "' (expected section.key)");
    auto [it, inserted] = entries.emplace(key, ConfigEntry{value, line});
    if (!inserted)
      throw ConfigError("duplicate key '" + key + "' on lines " + std::to_string(it->second.line) + " and " +
                        std::to_string(line));
  }
  return entries;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c = apply_entries(parse_entries(text), false);
  validate_experiment(c);
  return c;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string serialize_model_config(const ModelConfig& model) {
  ExperimentConfig c;
  c.model = model;
  std::string out;
  for (const auto& f : fields())
    if (f.key.rfind("model.", 0) == 0) out += f.key + " = " + f.get(c) + "\n";
  return out;
}

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig m = apply_entries(parse_entries(text), true).model;
  m.validate();
  return m;
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nvsr
