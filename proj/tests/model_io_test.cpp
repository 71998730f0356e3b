#include <doctest.h>

#include <cstring>

#include "dehaze/error.hpp"
#include "dehaze/nn/adadelta.hpp"
#include "dehaze/nn/model_io.hpp"
#include "support.hpp"

using namespace dehaze;
using namespace dehaze::nn;

TEST_SUITE_BEGIN("model-io");

namespace {

constexpr std::size_t kHeaderBytes = 37;  // revision line with its newline
constexpr std::size_t kCountOffset = kHeaderBytes + 4 + 4;
constexpr std::size_t kDescriptorOffset = kCountOffset + 4;
constexpr std::size_t kDescriptorBytes = 13;

void put_u32(std::vector<unsigned char>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<unsigned char>(v >> (8 * i));
}

NetworkParams trained_like(std::uint64_t seed) {
  auto p = NetworkParams::initialized(seed);
  Rng rng(seed);
  std::vector<double> g(p.values.size());
  for (double& v : g) v = rng.uniform(-1.0, 1.0);
  adadelta_step(p, g);
  return p;
}

}  // namespace

TEST_CASE("model roundtrip is bit exact") {
  test::TempDir dir;
  const auto p = trained_like(3);
  save_model(p, dir / "m.bin");
  const auto q = load_model(dir / "m.bin");
  CHECK(q == p);
  CHECK(std::memcmp(q.values.data(), p.values.data(), p.values.size() * sizeof(double)) == 0);

  const auto bytes = encode_model(p);
  CHECK(std::string(bytes.begin(), bytes.begin() + kHeaderBytes) ==
        "dehaze-joint-estimator three-path-r1\n");
  CHECK(bytes.size() == kDescriptorOffset + 16 * kDescriptorBytes + 1 + 3 * 163860 * 8);
  // Little-endian layer count and first descriptor (conv 1x1 3->8).
  CHECK(bytes[kCountOffset] == 16);
  CHECK(bytes[kCountOffset + 1] == 0);
  CHECK(bytes[kDescriptorOffset] == 0);
  CHECK(bytes[kDescriptorOffset + 1] == 1);
  CHECK(bytes[kDescriptorOffset + 5] == 3);
  CHECK(bytes[kDescriptorOffset + 9] == 8);
  CHECK(test::file_bytes(dir / "m.bin") == bytes);
}

TEST_CASE("parameters without optimizer state roundtrip") {
  auto p = NetworkParams::initialized(1);
  p.grad_sq_avg.clear();
  p.update_sq_avg.clear();
  const auto bytes = encode_model(p);
  CHECK(bytes.size() == kDescriptorOffset + 16 * kDescriptorBytes + 1 + 163860 * 8);
  const auto q = decode_model(bytes);
  CHECK(q.values == p.values);
}

TEST_CASE("truncated and padded files are corrupt") {
  const auto bytes = encode_model(trained_like(2));
  for (std::size_t cut : {std::size_t{40}, kDescriptorOffset + 5, bytes.size() - 1, bytes.size() / 2}) {
    const std::vector<unsigned char> t(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    CHECK_THROWS_AS(decode_model(t), CorruptFileError);
  }
  auto padded = bytes;
  padded.push_back(0);
  CHECK_THROWS_AS(decode_model(padded), CorruptFileError);
}

TEST_CASE("foreign files are format errors") {
  test::TempDir dir;
  test::write_text(dir / "x.bin", "P6\n1 1\n255\nabc");
  CHECK_THROWS_AS(load_model(dir / "x.bin"), FormatError);
  auto bytes = encode_model(trained_like(2));
  put_u32(bytes, kHeaderBytes + 4, 2);
  CHECK_THROWS_AS(decode_model(bytes), FormatError);
  CHECK_THROWS_AS(load_model(dir / "missing.bin"), IoError);
}

TEST_CASE("shape mismatches name the offending layer") {
  const auto bytes = encode_model(trained_like(4));

  auto fewer = bytes;
  put_u32(fewer, kCountOffset, 15);
  const auto at15 = static_cast<long>(kDescriptorOffset + 15 * kDescriptorBytes);
  fewer.erase(fewer.begin() + at15, fewer.begin() + at15 + static_cast<long>(kDescriptorBytes));
  try {
    decode_model(fewer, "fewer");
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 15") != std::string::npos);
  }

  auto more = bytes;
  put_u32(more, kCountOffset, 17);
  const auto at16 = static_cast<long>(kDescriptorOffset + 16 * kDescriptorBytes);
  const std::vector<unsigned char> extra(bytes.begin() + at15, bytes.begin() + at16);
  more.insert(more.begin() + at16, extra.begin(), extra.end());
  try {
    decode_model(more, "more");
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 16") != std::string::npos);
  }

  auto changed = bytes;
  put_u32(changed, kDescriptorOffset + 9 * kDescriptorBytes + 1, 5);
  try {
    decode_model(changed, "changed");
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 9") != std::string::npos);
  }
}

TEST_SUITE_END();
