#include "dehaze/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "dehaze/error.hpp"
#include "dehaze/image_io.hpp"

namespace dehaze {
namespace {

constexpr std::uint32_t kPatchSetVersion = 1;

double missing_fraction(const GrayMap& valid, PatchOrigin o, std::size_t size) {
  std::size_t missing = 0;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      if (!(valid.at(o.row + y, o.col + x) > 0.5)) ++missing;
    }
  }
  return static_cast<double>(missing) / static_cast<double>(size * size);
}

}  // namespace

void SynthConfig::validate() const {
  if (!(beta_range.low > 0.0 && beta_range.low <= beta_range.high) ||
      !std::isfinite(beta_range.high)) {
    throw_domain("beta range must satisfy 0 < low <= high");
  }
  if (!(airlight_range.low > 0.0 && airlight_range.low <= airlight_range.high &&
        airlight_range.high <= 1.0)) {
    throw_domain("airlight range must lie inside (0, 1]");
  }
  if (patch_size == 0 || stride == 0) throw_domain("patch size and stride must be positive");
  if (!(variance_threshold >= 0.0)) throw_domain("variance threshold must be >= 0");
  if (!(max_missing_depth_fraction >= 0.0 && max_missing_depth_fraction <= 1.0)) {
    throw_domain("max missing depth fraction must lie in [0, 1]");
  }
}

SynthStats& SynthStats::operator+=(const SynthStats& o) {
  extracted += o.extracted;
  rejected_smooth += o.rejected_smooth;
  rejected_missing_depth += o.rejected_missing_depth;
  emitted += o.emitted;
  return *this;
}

HazeParams sample_haze_params(const SynthConfig& config, Rng& rng) {
  const double beta = rng.uniform(config.beta_range.low, config.beta_range.high);
  std::array<double, 3> a{};
  for (double& c : a) c = rng.uniform(config.airlight_range.low, config.airlight_range.high);
  return HazeParams{ScatteringCoefficient(beta), Airlight(a)};
}

double label_patch(const TransmittanceMap& t, PatchOrigin origin, std::size_t size) {
  if (origin.row + size > t.height() || origin.col + size > t.width()) {
    throw ShapeError("label_patch: footprint at (" + std::to_string(origin.row) + "," +
                     std::to_string(origin.col) + ") out of bounds");
  }
  double sum = 0.0;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) sum += t.at(origin.row + y, origin.col + x);
  }
  return sum / static_cast<double>(size * size);
}

GrayMap normalize_depth(const GrayMap& depth, const GrayMap& valid) {
  if (!depth.same_shape(valid)) throw ShapeError("depth and validity mask differ in size");
  double max_depth = 0.0, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!(valid[i] > 0.5)) continue;
    const double d = depth[i];
    if (!std::isfinite(d) || d < 0.0) throw DomainError("negative or non-finite depth value");
    max_depth = std::max(max_depth, d);
    sum += d;
    ++count;
  }
  if (count == 0) throw DomainError("depth map has no valid pixels");
  const double scale = max_depth > 0.0 ? 1.0 / max_depth : 0.0;
  const double fill = sum / static_cast<double>(count) * scale;
  GrayMap out(depth.height(), depth.width());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    out[i] = valid[i] > 0.5 ? depth[i] * scale : fill;
  }
  return out;
}

std::vector<PatchSample> synthesize_item_patches(const DepthItem& item,
                                                 ScatteringCoefficient beta,
                                                 const Airlight& airlight,
                                                 const SynthConfig& config, SynthStats* stats) {
  if (!item.image.same_shape(item.depth) || !item.depth.same_shape(item.valid)) {
    throw ShapeError("dataset item image, depth and mask differ in size");
  }
  const GrayMap depth = normalize_depth(item.depth, item.valid);
  const TransmittanceMap t = transmittance_from_depth(depth, beta);
  const RgbImage hazy = synthesize_haze(item.image, t, airlight);

  SynthStats local;
  std::vector<PatchSample> out;
  for (auto& patch : extract_patches(hazy, config.patch_size, config.stride)) {
    ++local.extracted;
    if (!(patch_variance(patch) > config.variance_threshold)) {
      ++local.rejected_smooth;
      continue;
    }
    if (missing_fraction(item.valid, patch.origin, config.patch_size) >
        config.max_missing_depth_fraction) {
      ++local.rejected_missing_depth;
      continue;
    }
    patch.label = PatchLabel{label_patch(t, patch.origin, config.patch_size), airlight};
    out.push_back(std::move(patch));
  }
  local.emitted = out.size();
  if (stats) *stats += local;
  return out;
}

std::vector<PatchSample> build_training_set(const DepthDataset& dataset, const SynthConfig& config,
                                            SynthStats* stats) {
  config.validate();
  if (dataset.empty()) throw DomainError("build_training_set: empty dataset");
  std::vector<std::vector<PatchSample>> per_item(dataset.size());
  std::vector<SynthStats> per_stats(dataset.size());
  std::vector<std::exception_ptr> errors(dataset.size());
  const auto n = static_cast<std::int64_t>(dataset.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      Rng rng(mix_seed(config.seed, i));
      const HazeParams hp = sample_haze_params(config, rng);
      per_item[i] = synthesize_item_patches(dataset[i], hp.beta, hp.airlight, config, &per_stats[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<PatchSample> out;
  for (std::size_t i = 0; i < per_item.size(); ++i) {
    if (stats) *stats += per_stats[i];
    for (auto& p : per_item[i]) out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------- files

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.empty()) continue;
    if (parts.size() < 2 || parts.size() > 3) {
      throw FormatError("manifest '" + path.string() + "' line " + std::to_string(lineno) +
                        ": expected 'image depth [mask]'");
    }
    ManifestEntry e{resolve(parts[0]), resolve(parts[1]), std::nullopt};
    if (parts.size() == 3) e.mask = resolve(parts[2]);
    entries.push_back(std::move(e));
  }
  return entries;
}

DepthDataset load_dataset(const std::filesystem::path& manifest) {
  DepthDataset out;
  for (const auto& e : read_manifest(manifest)) {
    RgbImage image = read_image(e.image);
    GrayMap depth = read_gray(e.depth);
    GrayMap valid = e.mask ? read_gray(*e.mask) : GrayMap(depth.height(), depth.width(), 1.0);
    if (!image.same_shape(depth) || !depth.same_shape(valid)) {
      throw ShapeError("manifest entry '" + e.image.string() + "': image/depth/mask sizes differ");
    }
    out.push_back(DepthItem{std::move(image), std::move(depth), std::move(valid)});
  }
  return out;
}

void save_patch_set(std::span<const PatchSample> patches, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.text("DHZP");
  w.u32(kPatchSetVersion);
  const std::size_t size = patches.empty() ? kPatchSize : patches.front().size;
  w.u32(static_cast<std::uint32_t>(size));
  w.u64(patches.size());
  for (const auto& p : patches) {
    if (p.size != size || p.pixels.size() != size * size * 3) {
      throw ShapeError("save_patch_set: patches must share one size");
    }
    w.u64(p.origin.row);
    w.u64(p.origin.col);
    w.u8(p.label ? 1 : 0);
    w.f64s(p.pixels);
    if (p.label) {
      w.f64(p.label->t);
      for (std::size_t c = 0; c < 3; ++c) w.f64(p.label->a[c]);
    }
  }
  detail::write_file_bytes(path.string(), w.buffer());
}

std::vector<PatchSample> load_patch_set(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path.string());
  detail::ByteReader r(bytes, path.string());
  char magic[4];
  r.bytes(magic, 4);
  if (std::string(magic, 4) != "DHZP") throw FormatError("'" + path.string() + "': not a patch set");
  if (r.u32() != kPatchSetVersion) throw FormatError("'" + path.string() + "': unsupported version");
  const std::size_t size = r.u32();
  const std::uint64_t count = r.u64();
  const std::size_t min_record = 17 + size * size * 3 * 8;
  if (size == 0 || count > r.remaining() / min_record) {
    throw CorruptFileError("'" + path.string() + "': count header exceeds file size");
  }
  std::vector<PatchSample> out(count);
  for (auto& p : out) {
    p.size = size;
    p.origin.row = r.u64();
    p.origin.col = r.u64();
    const std::uint8_t labeled = r.u8();
    if (labeled > 1) throw CorruptFileError("'" + path.string() + "': bad label flag");
    p.pixels.resize(size * size * 3);
    r.f64s(p.pixels);
    if (labeled) {
      const double t = r.f64();
      std::array<double, 3> a{};
      for (double& c : a) c = r.f64();
      p.label = PatchLabel{t, Airlight(a)};
    }
  }
  if (r.remaining() != 0) throw CorruptFileError("'" + path.string() + "': trailing bytes");
  return out;
}

}  // namespace dehaze
