#include "dehaze/nn/model_io.hpp"

#include <string>

#include "../binary_io.hpp"
#include "dehaze/error.hpp"

namespace dehaze::nn {

std::vector<unsigned char> encode_model(const NetworkParams& params) {
  if (params.values.size() != parameter_count()) {
    throw ShapeError("encode_model: parameters do not match the architecture");
  }
  const bool has_state = params.grad_sq_avg.size() == params.values.size() &&
                         params.update_sq_avg.size() == params.values.size();
  detail::ByteWriter w;
  w.text(std::string(kModelHeaderLine) + "\n");
  w.text("DHZM");
  w.u32(kModelFormatVersion);
  const auto& arch = architecture();
  w.u32(static_cast<std::uint32_t>(arch.size()));
  for (const auto& d : arch) {
    w.u8(static_cast<std::uint8_t>(d.kind));
    w.u32(d.kernel);
    w.u32(d.in_channels);
    w.u32(d.out_channels);
  }
  w.u8(has_state ? 1 : 0);
  w.f64s(params.values);
  if (has_state) {
    w.f64s(params.grad_sq_avg);
    w.f64s(params.update_sq_avg);
  }
  return w.buffer();
}

NetworkParams decode_model(std::span<const unsigned char> bytes, const std::string& name) {
  detail::ByteReader r(bytes, name);
  const std::string header = r.line(256);
  if (header != kModelHeaderLine) {
    throw FormatError("'" + name + "': not a joint-estimator model file (header '" +
                      header.substr(0, 64) + "')");
  }
  char magic[4];
  r.bytes(magic, 4);
  if (std::string(magic, 4) != "DHZM") throw FormatError("'" + name + "': bad magic");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("'" + name + "': unsupported format version " + std::to_string(version));
  }

  const auto& arch = architecture();
  const std::uint32_t count = r.u32();
  if (count > 4096) throw CorruptFileError("'" + name + "': implausible layer count");
  std::vector<LayerDescriptor> found;
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerDescriptor d{};
    const std::uint8_t kind = r.u8();
    if (kind > 1) throw CorruptFileError("'" + name + "': layer " + std::to_string(i) + " has unknown kind");
    d.kind = static_cast<LayerKind>(kind);
    d.kernel = r.u32();
    d.in_channels = r.u32();
    d.out_channels = r.u32();
    found.push_back(d);
  }
  for (std::size_t i = 0; i < std::max(found.size(), arch.size()); ++i) {
    if (i >= found.size()) {
      throw ShapeError("'" + name + "': layer " + std::to_string(i) + " (" + arch[i].describe() +
                       ") missing; file has " + std::to_string(found.size()) + " layers, expected " +
                       std::to_string(arch.size()));
    }
    if (i >= arch.size()) {
      throw ShapeError("'" + name + "': unexpected extra layer " + std::to_string(i) + " (" +
                       found[i].describe() + "); expected " + std::to_string(arch.size()) +
                       " layers");
    }
    if (!(found[i] == arch[i])) {
      throw ShapeError("'" + name + "': layer " + std::to_string(i) + " is " + found[i].describe() +
                       ", expected " + arch[i].describe());
    }
  }

  const std::uint8_t has_state = r.u8();
  if (has_state > 1) throw CorruptFileError("'" + name + "': bad optimizer-state flag");
  NetworkParams p = NetworkParams::zeros();
  r.f64s(p.values);
  if (has_state) {
    r.f64s(p.grad_sq_avg);
    r.f64s(p.update_sq_avg);
  }
  if (r.remaining() != 0) {
    throw CorruptFileError("'" + name + "': " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return p;
}

void save_model(const NetworkParams& params, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), encode_model(params));
}

NetworkParams load_model(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path.string());
  return decode_model(bytes, path.string());
}

}  // namespace dehaze::nn
