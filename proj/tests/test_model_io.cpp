#include <doctest.h>

#include <cstring>
#include <fstream>

#include "support.hpp"
#include "vitnt/error.hpp"
#include "vitnt/model_init.hpp"
#include "vitnt/model_io.hpp"

using namespace vitnt;
using vitnt::test::scratch_dir;
using vitnt::test::slurp;
using vitnt::test::tiny_config;

TEST_CASE("config arithmetic") {
  const VitConfig c = tiny_config();
  CHECK(c.num_patches() == 4);
  CHECK(c.sequence_length() == 4);
  CHECK(tiny_config(true).sequence_length() == 5);
  CHECK(c.head_dim() == 4);
  CHECK(c.mlp_hidden_dim() == 16);
  CHECK(c.patch_dim() == 48);
  CHECK(c.check().empty());

  VitConfig bad = c;
  bad.image_size = 10;
  CHECK(bad.check().size() == 1);
  bad = c;
  bad.num_heads = 3;
  CHECK(bad.check().size() == 1);
  bad = c;
  bad.mlp_ratio = 0.3;  // 8 * 0.3 = 2.4
  CHECK(bad.check().size() == 1);
}

TEST_CASE("validate_model") {
  const VitModel model = make_random_model(tiny_config(), 1);
  CHECK(validate_model(model).empty());

  SUBCASE("missing tensor is named") {
    VitModel broken = model;
    broken.tensors.erase("block0.qkv.weight");
    const auto v = validate_model(broken);
    REQUIRE(v.size() == 1);
    CHECK(v[0].subject == "block0.qkv.weight");
    CHECK(v[0].expected == Shape{24, 8});
    CHECK_FALSE(v[0].found.has_value());
  }
  SUBCASE("positional embedding without the class-token row") {
    VitModel broken = make_random_model(tiny_config(true), 1);
    broken.tensors["pos_embed"] = Tensor({4, 8});
    const auto v = validate_model(broken);
    REQUIRE(v.size() == 1);
    CHECK(v[0].subject == "pos_embed");
    CHECK(v[0].expected == Shape{5, 8});
    CHECK(v[0].found == Shape{4, 8});
    CHECK(v[0].describe().find("expected [5x8], found [4x8]") != std::string::npos);
  }
  SUBCASE("inconsistent config is reported as a config violation") {
    VitModel broken = model;
    broken.config.num_heads = 3;
    const auto v = validate_model(broken);
    REQUIRE(v.size() == 1);
    CHECK(v[0].subject == "config");
  }
}

TEST_CASE("VWTF round trip") {
  const auto dir = scratch_dir("model_io");
  const VitModel model = make_random_model(tiny_config(true), 42);
  const auto a = dir / "a.vwtf", b = dir / "b.vwtf";
  write_model(model, a);
  write_model(model, b);

  CHECK(slurp(a) == slurp(b));

  const VitModel back = read_model(a);
  CHECK(back.config == model.config);
  CHECK(back.config.num_blocks == 2);
  REQUIRE(back.tensors.size() == model.tensors.size());
  for (const auto& [name, t] : model.tensors) {
    const auto& u = back.at(name);
    CHECK(u.shape() == t.shape());
    CHECK(std::memcmp(u.data().data(), t.data().data(), t.size() * sizeof(float)) == 0);
  }
  CHECK(validate_model(back).empty());
}

TEST_CASE("VWTF byte layout") {
  const auto dir = scratch_dir("model_layout");
  const VitModel model = make_random_model(tiny_config(), 3);
  const auto path = dir / "m.vwtf";
  write_model(model, path);
  const std::string bytes = slurp(path);
  auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    return v;
  };
  CHECK(bytes.substr(0, 4) == "VWTF");
  CHECK(u32(4) == 1);
  const auto header_len = u32(8);
  CHECK(bytes.substr(12, header_len) == encode_config_header(model.config));
  CHECK(u32(12 + header_len) == model.tensors.size());
  // First tensor is the alphabetically smallest name.
  const auto name_len = u32(16 + header_len);
  CHECK(bytes.substr(20 + header_len, name_len) == model.tensors.begin()->first);
}

TEST_CASE("VWTF errors") {
  const auto dir = scratch_dir("model_errors");
  const VitModel model = make_random_model(tiny_config(), 3);
  const auto good = dir / "good.vwtf";
  write_model(model, good);
  const std::string bytes = slurp(good);

  SUBCASE("bad magic") {
    std::string b = bytes;
    b.replace(0, 4, "XXXX");
    std::ofstream(dir / "magic.vwtf", std::ios::binary) << b;
    CHECK_THROWS_AS(read_model(dir / "magic.vwtf"), FormatError);
  }
  SUBCASE("truncated payload") {
    std::ofstream(dir / "short.vwtf", std::ios::binary) << bytes.substr(0, bytes.size() - 7);
    CHECK_THROWS_AS(read_model(dir / "short.vwtf"), LengthError);
  }
  SUBCASE("trailing garbage") {
    std::ofstream(dir / "long.vwtf", std::ios::binary) << bytes << "xx";
    CHECK_THROWS_AS(read_model(dir / "long.vwtf"), LengthError);
  }
  SUBCASE("shape mismatch surfaces as a validation error naming the tensor") {
    VitModel broken = model;
    broken.tensors["norm.gamma"] = Tensor({7});
    try {
      write_model(broken, dir / "bad.vwtf");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("norm.gamma") != std::string::npos);
    }
  }
  SUBCASE("empty tensor map is rejected before writing") {
    VitModel empty{tiny_config(), {}};
    CHECK_THROWS_AS(write_model(empty, dir / "empty.vwtf"), ValidationError);
    CHECK_FALSE(std::filesystem::exists(dir / "empty.vwtf"));
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_model(dir / "nope.vwtf"), IoError); }
}

TEST_CASE("read_model rejects files that parse but do not validate") {
  // Hand-assemble a file whose single tensor is wrong for the config.
  const auto dir = scratch_dir("model_invalid");
  std::string buf = "VWTF";
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto put64 = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  const std::string header = encode_config_header(tiny_config());
  put32(1);
  put32(static_cast<std::uint32_t>(header.size()));
  buf += header;
  put32(1);
  put32(10);
  buf += "norm.gamma";
  put32(1);
  put64(2);
  buf.append(8, '\0');
  std::ofstream(dir / "one.vwtf", std::ios::binary) << buf;

  const VitModel raw = read_model_unchecked(dir / "one.vwtf");
  CHECK(raw.tensors.size() == 1);
  CHECK_FALSE(validate_model(raw).empty());
  CHECK_THROWS_AS(read_model(dir / "one.vwtf"), ValidationError);
}
