#include "dehaze/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dehaze/error.hpp"

namespace dehaze {
namespace {

// Decoded raster before conversion to the library containers.
struct RawRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;  // 1 or 3
  std::uint32_t max_code = 255;
  std::vector<std::uint16_t> codes;  // interleaved
};

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void spill(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

// ---------------------------------------------------------------- PNM

class PnmHeaderReader {
 public:
  PnmHeaderReader(const std::vector<unsigned char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  unsigned long next_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) corrupt("malformed header");
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (v > 1u << 30) corrupt("header value out of range");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) corrupt("malformed header");
    return pos_ + 1;
  }

  void set_pos(std::size_t p) { pos_ = p; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void corrupt(const std::string& what) const {
    throw CorruptFileError("'" + name_ + "': " + what);
  }

  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

RawRaster decode_pnm(const std::vector<unsigned char>& bytes, const std::string& name) {
  RawRaster raw;
  raw.channels = bytes[1] == '6' ? 3 : 1;
  PnmHeaderReader reader(bytes, name);
  reader.set_pos(2);
  raw.width = reader.next_number();
  raw.height = reader.next_number();
  raw.max_code = static_cast<std::uint32_t>(reader.next_number());
  if (raw.width == 0 || raw.height == 0) throw CorruptFileError("'" + name + "': zero dimension");
  if (raw.max_code == 0 || raw.max_code > 65535) {
    throw CorruptFileError("'" + name + "': maxval out of range");
  }
  const std::size_t offset = reader.raster_offset();
  const std::size_t bytes_per_sample = raw.max_code > 255 ? 2 : 1;
  const std::size_t n = raw.width * raw.height * raw.channels;
  if (bytes.size() < offset + n * bytes_per_sample) {
    throw CorruptFileError("'" + name + "': truncated raster");
  }
  raw.codes.resize(n);
  const unsigned char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t code = bytes_per_sample == 2 ? (std::uint32_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
    if (code > raw.max_code) throw CorruptFileError("'" + name + "': sample exceeds maxval");
    raw.codes[i] = static_cast<std::uint16_t>(code);
  }
  return raw;
}

std::vector<unsigned char> encode_pnm(const RawRaster& raw) {
  const std::string header = std::string(raw.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(raw.width) + " " + std::to_string(raw.height) + "\n" +
                             std::to_string(raw.max_code) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  const bool wide = raw.max_code > 255;
  out.reserve(out.size() + raw.codes.size() * (wide ? 2 : 1));
  for (std::uint16_t c : raw.codes) {
    if (wide) out.push_back(static_cast<unsigned char>(c >> 8));
    out.push_back(static_cast<unsigned char>(c & 0xff));
  }
  return out;
}

// ---------------------------------------------------------------- PNG
//
// libpng reports errors through longjmp. The decode/encode routines keep
// only trivially destructible locals between setjmp and any libpng call;
// all owned storage lives in the caller-provided RawRaster.

struct PngSource {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos;
};

struct PngErrorSlot {
  char message[256];
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->size) png_error(png, "unexpected end of data");
  std::memcpy(out, src->data + src->pos, n);
  src->pos += n;
}

void png_error_to_slot(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

// Returns false and fills slot on failure.
bool decode_png_raw(const std::vector<unsigned char>& bytes, RawRaster* raw,
                    std::vector<png_bytep>* rows, std::vector<unsigned char>* pixels,
                    PngErrorSlot* slot) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, slot, png_error_to_slot, png_warning_ignore);
  if (png == nullptr) {
    std::snprintf(slot->message, sizeof(slot->message), "libpng initialisation failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  PngSource src{bytes.data(), bytes.size(), 0};
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &src, png_read_from_memory);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
  png_read_update_info(png, info);

  const png_byte out_color = png_get_color_type(png, info);
  const png_byte out_depth = png_get_bit_depth(png, info);
  raw->width = png_get_image_width(png, info);
  raw->height = png_get_image_height(png, info);
  raw->channels = (out_color == PNG_COLOR_TYPE_GRAY) ? 1 : 3;
  raw->max_code = out_depth == 16 ? 65535 : 255;

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels->resize(rowbytes * raw->height);
  rows->resize(raw->height);
  for (std::size_t r = 0; r < raw->height; ++r) (*rows)[r] = pixels->data() + r * rowbytes;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

RawRaster decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
  RawRaster raw;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> pixels;
  PngErrorSlot slot{};
  if (!decode_png_raw(bytes, &raw, &rows, &pixels, &slot)) {
    throw CorruptFileError("'" + name + "': " + slot.message);
  }
  const std::size_t n = raw.width * raw.height * raw.channels;
  raw.codes.resize(n);
  if (raw.max_code == 65535) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t v;
      std::memcpy(&v, pixels.data() + 2 * i, 2);
      raw.codes[i] = v;
    }
  } else {
    std::copy(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(n), raw.codes.begin());
  }
  return raw;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

bool encode_png_raw(const RawRaster& raw, std::vector<png_bytep>* rows, std::vector<unsigned char>* out,
                    PngErrorSlot* slot) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, slot, png_error_to_slot, png_warning_ignore);
  if (png == nullptr) {
    std::snprintf(slot->message, sizeof(slot->message), "libpng initialisation failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  const int depth = raw.max_code > 255 ? 16 : 8;
  png_set_IHDR(png, info, static_cast<png_uint_32>(raw.width), static_cast<png_uint_32>(raw.height),
               depth, raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::vector<unsigned char> encode_png(const RawRaster& raw, const std::string& name) {
  const bool wide = raw.max_code > 255;
  const std::size_t row_samples = raw.width * raw.channels;
  const std::size_t rowbytes = row_samples * (wide ? 2 : 1);
  std::vector<unsigned char> rowbuf(rowbytes * raw.height);
  for (std::size_t i = 0; i < raw.codes.size(); ++i) {
    if (wide) {
      rowbuf[2 * i] = static_cast<unsigned char>(raw.codes[i] >> 8);  // PNG is big-endian
      rowbuf[2 * i + 1] = static_cast<unsigned char>(raw.codes[i] & 0xff);
    } else {
      rowbuf[i] = static_cast<unsigned char>(raw.codes[i]);
    }
  }
  std::vector<png_bytep> rows(raw.height);
  for (std::size_t r = 0; r < raw.height; ++r) rows[r] = rowbuf.data() + r * rowbytes;
  std::vector<unsigned char> out;
  PngErrorSlot slot{};
  if (!encode_png_raw(raw, &rows, &out, &slot)) {
    throw IoError("'" + name + "': PNG encoding failed: " + slot.message);
  }
  return out;
}

// ---------------------------------------------------------------- dispatch

enum class Container { kPng, kPpm, kPgm };

RawRaster decode_any(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const std::string name = path.string();
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    return decode_png(bytes, name);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return decode_pnm(bytes, name);
  }
  throw FormatError("'" + name + "': unsupported raster format");
}

Container container_for(const std::filesystem::path& path, bool color) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return Container::kPng;
  if (color && ext == ".ppm") return Container::kPpm;
  if (!color && ext == ".pgm") return Container::kPgm;
  throw FormatError("'" + path.string() + "': unsupported output extension '" + ext + "'");
}

void encode_to(const RawRaster& raw, const std::filesystem::path& path, Container c) {
  spill(c == Container::kPng ? encode_png(raw, path.string()) : encode_pnm(raw), path);
}

}  // namespace

std::uint16_t quantize(double value, std::uint16_t max_code) {
  const double v = std::clamp(value, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(v * max_code));
}

RgbImage read_image(const std::filesystem::path& path) {
  const RawRaster raw = decode_any(path);
  const double scale = 1.0 / raw.max_code;
  std::vector<double> samples(raw.width * raw.height * 3);
  for (std::size_t i = 0; i < raw.width * raw.height; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      samples[3 * i + c] = raw.codes[i * raw.channels + (raw.channels == 3 ? c : 0)] * scale;
    }
  }
  return RgbImage(raw.height, raw.width, std::move(samples));
}

void write_image(const RgbImage& image, const std::filesystem::path& path) {
  const Container c = container_for(path, true);
  RawRaster raw;
  raw.width = image.width();
  raw.height = image.height();
  raw.channels = 3;
  raw.max_code = 255;
  raw.codes.reserve(image.samples().size());
  for (double v : image.samples()) raw.codes.push_back(quantize(v, 255));
  encode_to(raw, path, c);
}

GrayMap read_gray(const std::filesystem::path& path) {
  const RawRaster raw = decode_any(path);
  if (raw.channels != 1) {
    throw FormatError("'" + path.string() + "': expected a single-channel raster");
  }
  const double scale = 1.0 / raw.max_code;
  std::vector<double> values(raw.codes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = raw.codes[i] * scale;
  return GrayMap(raw.height, raw.width, std::move(values));
}

void write_gray(const GrayMap& map, const std::filesystem::path& path, GrayBits bits) {
  const Container c = container_for(path, false);
  RawRaster raw;
  raw.width = map.width();
  raw.height = map.height();
  raw.channels = 1;
  raw.max_code = bits == GrayBits::k16 ? 65535 : 255;
  raw.codes.reserve(map.size());
  for (double v : map.values()) raw.codes.push_back(quantize(v, static_cast<std::uint16_t>(raw.max_code)));
  encode_to(raw, path, c);
}

}  // namespace dehaze
