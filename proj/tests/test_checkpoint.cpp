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


#include <cmath>
#include <cstring>

#include "doctest.h"
#include "nvsr/checkpoint.hpp"
#include "nvsr/error.hpp"
#include "support/tempdir.hpp"

using namespace nvsr;

namespace {

Checkpoint sample() {
  Checkpoint c;
  c.text = "model.variant = nerv\n";
  c.set_state("epochs_done", "3");
  c.arrays.push_back({"a", {2, 3}, {1.f, -2.f, 3.5f, 0.f, -0.f, 1e-30f}});
  c.arrays.push_back({"scalar", {}, {7.f}});
  c.arrays.push_back({"empty", {0, 4}, {}});
  return c;
}

std::size_t decode_error_offset(std::span<const unsigned char> bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const DecodeError& e) {
    return e.offset();
  }
  return std::size_t(-1);
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("encoding round-trips bit-exactly") {
  const Checkpoint c = sample();
  const auto bytes = encode_checkpoint(c);
  CHECK(std::memcmp(bytes.data(), "NVCK", 4) == 0);
  CHECK(bytes[4] == kCheckpointVersion);
  const Checkpoint back = decode_checkpoint(bytes);
  CHECK(back == c);
  CHECK(std::signbit(back.find("a")->values[4]));
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.state().at("epochs_done") == "3");
  CHECK(back.config_text() == "model.variant = nerv\n");

  testing::TempDir dir;
  save_checkpoint(c, dir / "c.nvck");
  CHECK(load_checkpoint(dir / "c.nvck") == c);
}

TEST_CASE("decode errors carry the failing offset") {
  auto bytes = encode_checkpoint(sample());
  // Header is magic(4) version(4) text length(4); the text follows.
  const std::size_t text_len = sample().text.size();
  CHECK(decode_error_offset(std::span(bytes).first(2)) == 0);
  CHECK(decode_error_offset(std::span(bytes).first(10)) == 8);
  CHECK(decode_error_offset(std::span(bytes).first(12 + text_len - 1)) == 12);
  CHECK(decode_error_offset(std::span(bytes).first(bytes.size() - 1)) < bytes.size());
  for (std::size_t n = 0; n < bytes.size(); ++n) CHECK_THROWS_AS(decode_checkpoint(std::span(bytes).first(n)), DecodeError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(decode_error_offset(trailing) == bytes.size());

  auto magic = bytes;
  magic[0] = 'X';
  CHECK(decode_error_offset(magic) == 0);

  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(version), UnsupportedFormat);
}

TEST_CASE("models survive a save and load") {
  for (Variant v : {Variant::nerv, Variant::sr_hnerv}) {
    VideoModel<float> model(desk_config(v), 3);
    const auto loaded = model_from_checkpoint(decode_checkpoint(encode_checkpoint(model_checkpoint(model))));
    CHECK(loaded.config() == model.config());
    const auto a = model.named_parameters(), b = loaded.named_parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].first == b[i].first);
      CHECK(same_bits(a[i].second.storage(), b[i].second.storage()));
    }
  }
  Rng rng(4);
  SRModel<float> srb({6, 3, 2}, rng);
  const auto back = srb_from_checkpoint(srb_checkpoint(srb));
  CHECK(back.config() == srb.config());
  const auto pa = srb.parameters(), pb = back.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(same_bits(pa[i].storage(), pb[i].storage()));
}

TEST_CASE("loading into a different shape is refused") {
  VideoModel<float> small(desk_config(Variant::nerv), 0);
  auto wide_config = desk_config(Variant::nerv);
  wide_config.base_width += 4;
  VideoModel<float> wide(wide_config, 0);
  CHECK_THROWS_AS(load_parameters(wide.named_parameters(), model_checkpoint(small)), ConfigError);
  Checkpoint empty;
  CHECK_THROWS_AS(load_parameters(small.named_parameters(), empty), ConfigError);
}

TEST_CASE("optimizer state round-trips") {
  TensorF a({3}, {1.f, 2.f, 3.f}), b({2}, {0.5f, -0.5f});
  Adam<float> opt({{"decoder", {a}, true}, {"srb", {b}, false}});
  for (int i = 0; i < 4; ++i) {
    sum(mul(a, a)).backward();
    opt.step(1e-2);
  }
  opt.set_trainable("srb", true);
  add(sum(mul(a, a)), sum(mul(b, b))).backward();
  opt.step(1e-2);

  Checkpoint c;
  add_optimizer_state(c, opt);
  const Checkpoint back = decode_checkpoint(encode_checkpoint(c));

  TensorF a2({3}), b2({2});
  Adam<float> restored({{"decoder", {a2}, true}, {"srb", {b2}, false}});
  restore_optimizer_state(restored, back);
  CHECK(restored.step_count() == opt.step_count());
  for (const char* g : {"decoder", "srb"}) {
    CHECK(restored.trainable(g) == opt.trainable(g));
    CHECK(restored.moments(g).steps == opt.moments(g).steps);
    for (std::size_t i = 0; i < opt.moments(g).first.size(); ++i) {
      CHECK(same_bits(restored.moments(g).first[i], opt.moments(g).first[i]));
      CHECK(same_bits(restored.moments(g).second[i], opt.moments(g).second[i]));
    }
  }
  CHECK(restored.moments("srb").steps == 1);

  Checkpoint missing;
  CHECK_THROWS_AS(restore_optimizer_state(restored, missing), ConfigError);
}
