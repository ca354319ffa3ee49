#include "walkcut/error.hpp"
#include "walkcut/manifest.hpp"
#include "walkcut/tensor_store.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

using namespace walkcut;

namespace {

TensorFile random_tensor(std::mt19937_64& rng) {
  TensorFile t;
  t.dtype = static_cast<DType>(rng() % 3);
  const auto ndim = 1 + rng() % 4;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < ndim; ++i) {
    t.shape.push_back(1 + rng() % 6);
    count *= t.shape.back();
  }
  t.data.resize(count * dtype_size(t.dtype));
  for (auto& b : t.data) b = static_cast<std::byte>(rng());
  return t;
}

std::vector<std::byte> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<char> c((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(c.size());
  std::memcpy(out.data(), c.data(), c.size());
  return out;
}

FormatErrc decode_error(const std::vector<std::byte>& bytes) {
  try {
    decode_tensor(bytes);
  } catch (const FormatError& e) {
    return e.code();
  }
  FAIL("decode_tensor accepted malformed input");
  return FormatErrc::io;
}

}  // namespace

TEST_CASE("tensor header layout") {
  const std::vector<float> v{1.0f, -2.5f};
  const auto bytes = encode_tensor(TensorFile::from_floats({2}, v));
  REQUIRE(bytes.size() == tensor_header_size(1) + 8);
  CHECK(tensor_header_size(1) == 21);
  CHECK(std::memcmp(bytes.data(), "SATN", 4) == 0);
  CHECK(std::to_integer<int>(bytes[4]) == 1);  // version, little-endian
  CHECK(std::to_integer<int>(bytes[5]) == 0);
  CHECK(std::to_integer<int>(bytes[8]) == 0);  // float32
  CHECK(std::to_integer<int>(bytes[9]) == 1);  // ndim
  CHECK(std::to_integer<int>(bytes[13]) == 2);  // dims[0]
  // 1.0f = 0x3f800000 stored little-endian.
  CHECK(std::to_integer<int>(bytes[21]) == 0x00);
  CHECK(std::to_integer<int>(bytes[24]) == 0x3f);
}

TEST_CASE("full-size attention file length") {
  // 64 x 64 x 4096 float32: 37 header bytes + 4 * 64 * 64 * 4096 payload.
  CHECK(tensor_header_size(3) + 4ull * 64 * 64 * 4096 == 67108901ull);
}

TEST_CASE("tensor round trip through a file is byte-identical") {
  testutil::TempDir dir("tensor");
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const TensorFile t = random_tensor(rng);
    const auto p = dir / "t.satn";
    write_tensor(t, p);
    const TensorFile back = read_tensor(p);
    CHECK(back == t);
    CHECK(file_bytes(p) == encode_tensor(t));
  }
}

TEST_CASE("typed accessors") {
  const std::vector<std::int32_t> v{-3, 0, 7, 1 << 30};
  const auto t = TensorFile::from_int32({2, 2}, v);
  CHECK(t.element_count() == 4);
  CHECK(t.to_int32() == v);
  CHECK_THROWS_AS(t.to_floats(), InvalidArgument);
  const std::vector<std::uint8_t> u{1, 2, 3};
  CHECK(TensorFile::from_uint8({3}, u).to_uint8() == u);
  CHECK_THROWS(TensorFile::from_uint8({4}, u));
}

TEST_CASE("malformed tensor files are rejected with distinct errors") {
  const std::vector<float> v{1, 2, 3, 4};
  const auto good = encode_tensor(TensorFile::from_floats({2, 2}, v));

  auto bad_magic = good;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  CHECK(decode_error(bad_magic) == FormatErrc::bad_magic);

  auto short_payload = good;
  short_payload.resize(good.size() - 4);
  CHECK(decode_error(short_payload) == FormatErrc::truncated);

  auto short_header = good;
  short_header.resize(20);
  CHECK(decode_error(short_header) == FormatErrc::truncated);

  auto trailing = good;
  trailing.push_back(std::byte{0});
  CHECK(decode_error(trailing) == FormatErrc::trailing_data);

  auto version = good;
  version[4] = std::byte{2};
  CHECK(decode_error(version) == FormatErrc::unsupported_version);

  auto dtype = good;
  dtype[8] = std::byte{9};
  CHECK(decode_error(dtype) == FormatErrc::unsupported_dtype);

  auto ndim = good;
  ndim[9] = std::byte{0};
  CHECK(decode_error(ndim) == FormatErrc::invalid_shape);

  auto huge = good;
  for (int i = 13; i < 21; ++i) huge[static_cast<std::size_t>(i)] = std::byte{0xff};
  const auto code = decode_error(huge);
  CHECK((code == FormatErrc::shape_overflow || code == FormatErrc::truncated));
}

TEST_CASE("missing file is an io error") {
  try {
    read_tensor("/nonexistent/walkcut.satn");
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(e.code() == FormatErrc::io);
  }
}

TEST_CASE("byte-swapped fixture decodes after swapping") {
  // A big-endian writer would emit 1.0f as 3f 80 00 00.
  TensorFile t;
  t.dtype = DType::float32;
  t.shape = {1};
  t.data = {std::byte{0x3f}, std::byte{0x80}, std::byte{0x00}, std::byte{0x00}};
  byteswap_payload(t);
  CHECK(t.to_floats()[0] == 1.0f);
  const auto before = t;
  byteswap_payload(t);
  byteswap_payload(t);
  CHECK(t == before);

  TensorFile bytes = TensorFile::from_uint8({2}, std::vector<std::uint8_t>{1, 2});
  const auto copy = bytes;
  byteswap_payload(bytes);
  CHECK(bytes == copy);  // single-byte elements are unaffected
}

TEST_CASE("matrix conversion") {
  Matrix m(2, 3);
  m << 0.25, 0.5, 0.25, 1, 0, 0;
  const Matrix back = tensor_to_matrix(matrix_to_tensor(m));
  CHECK(back == m);
  CHECK_THROWS_AS(tensor_to_matrix(TensorFile::from_floats({6}, std::vector<float>(6))), InvalidArgument);
}

TEST_CASE("manifest parsing") {
  testutil::TempDir dir("manifest");
  testutil::write_text(dir / "a64.satn", "");
  testutil::write_text(dir / "a_gt.png", "");

  SUBCASE("entries, relative paths and blank lines") {
    testutil::write_text(dir / "m.jsonl",
                         "{\"image_id\":\"a\",\"attention\":{\"64\":\"a64.satn\"},\"gt\":\"a_gt.png\",\"size\":[512,512]}\n"
                         "\n"
                         "{\"image_id\":\"b\",\"attention\":{\"64\":\"a64.satn\"},\"gt\":null,\"size\":[480,640]}\n");
    const auto m = load_manifest(dir / "m.jsonl");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].attention.at(64) == dir / "a64.satn");
    CHECK(*m.entries[0].gt == dir / "a_gt.png");
    CHECK(!m.entries[1].gt);
    CHECK(m.entries[1].height == 480);
    CHECK(m.entries[1].width == 640);
  }

  SUBCASE("empty manifest") {
    testutil::write_text(dir / "m.jsonl", "");
    CHECK(load_manifest(dir / "m.jsonl").entries.empty());
  }

  SUBCASE("duplicate id") {
    const std::string line = "{\"image_id\":\"a\",\"attention\":{\"64\":\"a64.satn\"},\"gt\":null,\"size\":[8,8]}\n";
    testutil::write_text(dir / "m.jsonl", line + line);
    try {
      load_manifest(dir / "m.jsonl");
      FAIL("expected duplicate-id error");
    } catch (const ManifestError& e) {
      CHECK(e.code() == ManifestErrc::duplicate_id);
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("parse error carries the line number") {
    testutil::write_text(dir / "m.jsonl",
                         "{\"image_id\":\"a\",\"attention\":{},\"gt\":null,\"size\":[8,8]}\n{not json}\n");
    try {
      load_manifest(dir / "m.jsonl");
      FAIL("expected parse error");
    } catch (const ManifestError& e) {
      CHECK(e.code() == ManifestErrc::parse);
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("bad fields") {
    for (const char* text : {"{\"attention\":{},\"size\":[8,8]}", "{\"image_id\":\"a\",\"attention\":{\"x\":\"p\"},\"size\":[8,8]}",
                             "{\"image_id\":\"a\",\"attention\":{},\"size\":[8]}", "[1,2]"}) {
      testutil::write_text(dir / "m.jsonl", text);
      CHECK_THROWS_AS(load_manifest(dir / "m.jsonl"), ManifestError);
    }
  }

  SUBCASE("missing referenced file") {
    testutil::write_text(dir / "m.jsonl", "{\"image_id\":\"a\",\"attention\":{\"64\":\"nope.satn\"},\"gt\":null,\"size\":[8,8]}\n");
    CHECK_THROWS_AS(load_manifest(dir / "m.jsonl"), ManifestError);
    CHECK(load_manifest(dir / "m.jsonl", {.check_paths = false}).entries.size() == 1);
  }

  SUBCASE("write then load") {
    DatasetManifest m;
    for (int i = 0; i < 2174; ++i) {
      ManifestEntry e;
      e.image_id = "img" + std::to_string(i);
      e.attention = {{8, dir / "a64.satn"}, {64, dir / "a64.satn"}};
      if (i % 2) e.gt = dir / "a_gt.png";
      e.height = 512;
      e.width = 512;
      m.entries.push_back(e);
    }
    write_manifest(m, dir / "big.jsonl");
    const auto back = load_manifest(dir / "big.jsonl");
    REQUIRE(back.entries.size() == 2174);
    CHECK(back.entries[3].attention == m.entries[3].attention);
    CHECK(back.entries[3].gt == m.entries[3].gt);
    CHECK(!back.entries[4].gt);
  }
}
