#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "dehaze/dataset.hpp"
#include "dehaze/error.hpp"
#include "dehaze/haze_model.hpp"
#include "dehaze/image_io.hpp"
#include "dehaze/metrics.hpp"
#include "dehaze/nn/model_io.hpp"
#include "dehaze/nn/train.hpp"
#include "dehaze/pipeline.hpp"

namespace dehaze::cli {
namespace {

namespace fs = std::filesystem;

const std::array<std::string, 5> kSubcommands = {"synth", "build-dataset", "train", "dehaze",
                                                 "eval"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    double v = 0.0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw DomainError(std::string(what) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.size() != expected) {
    throw DomainError(std::string(what) + ": expected " + std::to_string(expected) +
                      " comma-separated values, got '" + text + "'");
  }
  return out;
}

Interval parse_interval(const std::string& text, const char* what) {
  const auto v = parse_list(text, 2, what);
  return {v[0], v[1]};
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw IoError(std::string(what) + " '" + path + "' does not exist or is not a file");
  }
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

fs::path sibling(const fs::path& base, const std::string& suffix, const std::string& ext) {
  return base.parent_path() / (base.stem().string() + suffix + ext);
}

// ---------------------------------------------------------------- options

struct SynthOptions {
  std::size_t patch_size = kPatchSize;
  std::size_t stride = kPatchStride;
  double variance_threshold = kDefaultVarianceThreshold;
  std::string beta_range = "0.5,1.0";
  std::string airlight_range = "0.7,1.0";
  double max_missing_depth = 0.1;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app) {
    app->add_option("--patch-size", patch_size, "Patch side length")->capture_default_str();
    app->add_option("--stride", stride, "Patch stride")->capture_default_str();
    app->add_option("--variance-threshold", variance_threshold,
                    "Discard patches whose intensity variance does not exceed this")
        ->capture_default_str();
    app->add_option("--beta-range", beta_range, "Scattering coefficient range lo,hi")
        ->capture_default_str();
    app->add_option("--airlight-range", airlight_range, "Per-channel airlight range lo,hi")
        ->capture_default_str();
    app->add_option("--max-missing-depth", max_missing_depth,
                    "Discard patches with a larger fraction of unknown depth")
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  SynthConfig config() const {
    SynthConfig c;
    c.patch_size = patch_size;
    c.stride = stride;
    c.variance_threshold = variance_threshold;
    c.beta_range = parse_interval(beta_range, "--beta-range");
    c.airlight_range = parse_interval(airlight_range, "--airlight-range");
    c.max_missing_depth_fraction = max_missing_depth;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct SynthCommand {
  std::string clean, depth, mask, out, tmap_out, airlight;
  double beta = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--clean", clean, "Haze-free RGB image")->required();
    app->add_option("--depth", depth, "Depth map (PGM or gray PNG)")->required();
    app->add_option("--mask", mask, "Optional depth validity mask");
    app->add_option("--beta", beta, "Scattering coefficient (>= 0)")->required();
    app->add_option("--airlight", airlight, "Environmental illumination r,g,b")->required();
    app->add_option("--out", out, "Output hazy image")->required();
    app->add_option("--tmap-out", tmap_out,
                    "Ground-truth transmittance (16-bit gray); default <out>_t.png");
  }

  int run(std::ostream& out_stream) const {
    require_file(clean, "clean image");
    require_file(depth, "depth map");
    if (!mask.empty()) require_file(mask, "mask");
    const auto a = parse_list(airlight, 3, "--airlight");
    const Airlight light(a[0], a[1], a[2]);
    const ScatteringCoefficient sc(beta);

    const RgbImage image = read_image(clean);
    const GrayMap d = read_gray(depth);
    const GrayMap valid = mask.empty() ? GrayMap(d.height(), d.width(), 1.0) : read_gray(mask);
    if (!image.same_shape(d) || !d.same_shape(valid)) {
      throw ShapeError("clean image, depth and mask must have equal dimensions");
    }
    const TransmittanceMap t = transmittance_from_depth(normalize_depth(d, valid), sc);
    write_image(synthesize_haze(image, t, light), out);
    const fs::path tpath = tmap_out.empty() ? sibling(out, "_t", ".png") : fs::path(tmap_out);
    write_gray(t.map(), tpath, GrayBits::k16);
    out_stream << "wrote " << out << " and " << tpath.string() << "\n";
    return kOk;
  }
};

struct BuildDatasetCommand {
  std::string manifest, out;
  SynthOptions synth;

  void add_to(CLI::App* app) {
    app->add_option("--manifest", manifest, "Dataset manifest")->required();
    app->add_option("--out", out, "Output patch-set file")->required();
    synth.add_to(app);
  }

  int run(std::ostream& out_stream) const {
    require_file(manifest, "manifest");
    const SynthConfig cfg = synth.config();
    SynthStats stats;
    const auto patches = build_training_set(load_dataset(manifest), cfg, &stats);
    save_patch_set(patches, out);
    out_stream << "extracted=" << stats.extracted << " smooth=" << stats.rejected_smooth
               << " missing_depth=" << stats.rejected_missing_depth << " emitted=" << stats.emitted
               << "\n";
    return kOk;
  }
};

struct TrainCommand {
  std::string manifest, patches, model_out, loss_log, init_model;
  std::size_t epochs = 90;
  std::size_t batch_size = 1000;
  bool quiet = false;
  SynthOptions synth;

  void add_to(CLI::App* app) {
    auto* src = app->add_option_group("source", "Training data");
    src->add_option("--manifest", manifest, "Dataset manifest (patches are synthesized)");
    src->add_option("--patches", patches, "Patch set written by build-dataset");
    src->require_option(1);
    app->add_option("--model-out", model_out, "Output model file")->required();
    app->add_option("--loss-log", loss_log, "Per-epoch loss log; default <model-out>.loss.csv");
    app->add_option("--init-model", init_model, "Start from this model instead of a fresh one");
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str();
    app->add_flag("--quiet", quiet, "No per-epoch progress");
    synth.add_to(app);
  }

  int run(std::ostream& out_stream, std::ostream& err) const {
    std::vector<PatchSample> data;
    if (!manifest.empty()) {
      require_file(manifest, "manifest");
      SynthStats stats;
      data = build_training_set(load_dataset(manifest), synth.config(), &stats);
      if (data.empty()) {
        throw DomainError("no training patches survived filtering (extracted " +
                          std::to_string(stats.extracted) + ", smooth " +
                          std::to_string(stats.rejected_smooth) + ", missing depth " +
                          std::to_string(stats.rejected_missing_depth) + ")");
      }
    } else {
      require_file(patches, "patch set");
      data = load_patch_set(patches);
      if (data.empty()) throw DomainError("patch set '" + patches + "' is empty");
    }
    if (!init_model.empty()) require_file(init_model, "initial model");

    nn::NetworkParams params =
        init_model.empty() ? nn::NetworkParams::initialized(synth.seed) : nn::load_model(init_model);
    nn::TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.seed = synth.seed;
    if (!quiet) {
      tc.on_epoch = [&](std::size_t e, double loss) {
        err << "epoch " << e + 1 << "/" << epochs << " loss " << loss << "\n";
      };
    }
    const auto result = nn::train(std::move(params), data, tc);
    nn::save_model(result.params, model_out);

    const std::string log_path = loss_log.empty() ? model_out + ".loss.csv" : loss_log;
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw IoError("cannot write loss log '" + log_path + "'");
    for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
      log << e + 1 << "," << shortest(result.loss_history[e]) << "\n";
    }
    if (!log) throw IoError("write failure on '" + log_path + "'");
    out_stream << "trained on " << data.size() << " patches; model " << model_out << ", log "
               << log_path << "\n";
    return kOk;
  }
};

struct DehazeCommand {
  std::string input, model, out, tmap_out;
  bool emit_tmap = false;
  std::size_t patch_size = kPatchSize;
  std::size_t stride = kPatchStride;
  double variance_threshold = kDefaultVarianceThreshold;
  InterpolationConfig interp;

  void add_to(CLI::App* app) {
    app->add_option("--input", input, "Hazy RGB image")->required();
    app->add_option("--model", model, "Trained model file")->required();
    app->add_option("--out", out, "Output dehazed image")->required();
    app->add_flag("--emit-tmap", emit_tmap, "Also write the interpolated transmittance map");
    app->add_option("--tmap-out", tmap_out, "Transmittance path; default <out>_tmap.png");
    app->add_option("--patch-size", patch_size, "Patch side length")->capture_default_str();
    app->add_option("--stride", stride, "Patch stride")->capture_default_str();
    app->add_option("--variance-threshold", variance_threshold, "Smooth-patch threshold")
        ->capture_default_str();
    app->add_option("--lambda", interp.lambda, "Smoothness strength")->capture_default_str();
    app->add_option("--eps-w", interp.eps_w, "Edge-weight guard constant")->capture_default_str();
    app->add_option("--cg-tol", interp.cg_tol, "CG relative residual tolerance")
        ->capture_default_str();
    app->add_option("--cg-max-iters", interp.cg_max_iters, "CG iteration cap")
        ->capture_default_str();
  }

  int run(std::ostream& out_stream, std::ostream& err) const {
    require_file(input, "input image");
    require_file(model, "model");
    DehazeConfig cfg;
    cfg.patch_size = patch_size;
    cfg.stride = stride;
    cfg.variance_threshold = variance_threshold;
    cfg.interpolation = interp;
    cfg.interpolation.validate();

    const RgbImage hazy = read_image(input);
    if (hazy.height() < patch_size || hazy.width() < patch_size) {
      throw ShapeError("input image " + std::to_string(hazy.height()) + "x" +
                       std::to_string(hazy.width()) + " is smaller than the patch size");
    }
    const NetworkEstimator estimator(nn::load_model(model));
    const DehazeResult result = dehaze(hazy, estimator, cfg);
    if (result.used_all_patches_fallback) {
      err << "warning: every patch was below the variance threshold; estimating from all "
          << result.patches_total << " patches\n";
    }
    write_image(result.radiance, out);
    if (emit_tmap || !tmap_out.empty()) {
      const fs::path tpath = tmap_out.empty() ? sibling(out, "_tmap", ".png") : fs::path(tmap_out);
      write_gray(result.transmittance.map(), tpath, GrayBits::k16);
    }
    out_stream << "airlight=" << shortest(result.airlight[0]) << ","
               << shortest(result.airlight[1]) << "," << shortest(result.airlight[2])
               << " patches=" << result.patches_used << "/" << result.patches_total
               << " cg_iters=" << result.solve.iterations << "\n";
    return kOk;
  }
};

struct EvalCommand {
  std::string dehazed, reference;
  bool machine = false;

  void add_to(CLI::App* app) {
    app->add_option("--dehazed", dehazed, "Image under test")->required();
    app->add_option("--reference", reference, "Ground-truth clean image")->required();
    app->add_flag("--machine", machine, "Also print a 'psnr=<v> ssim=<v>' line");
  }

  int run(std::ostream& out_stream) const {
    require_file(dehazed, "dehazed image");
    require_file(reference, "reference image");
    const RgbImage test = read_image(dehazed);
    const RgbImage ref = read_image(reference);
    const Psnr p = psnr(ref, test);
    const double s = ssim(ref, test);
    out_stream << "PSNR: " << (p.is_infinite() ? "inf" : p.to_string() + " dB") << "\n";
    out_stream << "SSIM: " << shortest(s) << "\n";
    if (machine) out_stream << "psnr=" << p.to_string() << " ssim=" << shortest(s) << "\n";
    return kOk;
  }
};

std::string option_name(const std::string& arg) {
  return arg.substr(0, arg.find('='));
}

bool known_anywhere(const CLI::App& app, const std::string& name) {
  for (const auto* sub : app.get_subcommands({})) {
    if (sub->get_option_no_throw(name) != nullptr) return true;
  }
  return false;
}

// Inserts config-file arguments right after the subcommand name so that
// explicit command-line flags, parsed later, take precedence. Keys that
// belong to other subcommands are skipped so one file can serve a workflow.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file path");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  const auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) {
    return std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end();
  });
  if (sub == rest.end()) return rest;
  const CLI::App* target = app.get_subcommand(*sub);
  std::vector<std::string> extra;
  for (const auto& a : config_arguments(*config)) {
    const std::string name = option_name(a);
    if (target->get_option_no_throw(name) != nullptr) {
      extra.push_back(a);
    } else if (!known_anywhere(app, name)) {
      throw CLI::ConversionError("config '" + *config + "': unknown key '" + name.substr(2) + "'");
    }
  }
  rest.insert(sub + 1, extra.begin(), extra.end());
  return rest;
}

}  // namespace

std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError("config '" + path + "' line " + std::to_string(lineno) +
                                 ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-image dehazing with a joint transmittance/airlight estimator", "dehaze"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "Flat key=value file; command-line flags override it");

  SynthCommand synth;
  BuildDatasetCommand build;
  TrainCommand train_cmd;
  DehazeCommand dehaze_cmd;
  EvalCommand eval;
  auto* s1 = app.add_subcommand("synth", "Synthesize a hazy image from a clean image and depth");
  auto* s2 = app.add_subcommand("build-dataset", "Synthesize and store labeled training patches");
  auto* s3 = app.add_subcommand("train", "Train the estimator");
  auto* s4 = app.add_subcommand("dehaze", "Dehaze an image with a trained model");
  auto* s5 = app.add_subcommand("eval", "PSNR and SSIM against a ground-truth image");
  synth.add_to(s1);
  build.add_to(s2);
  train_cmd.add_to(s3);
  dehaze_cmd.add_to(s4);
  eval.add_to(s5);

  try {
    std::vector<std::string> args = expand_config(app, raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }

  try {
    if (s1->parsed()) return synth.run(out);
    if (s2->parsed()) return build.run(out);
    if (s3->parsed()) return train_cmd.run(out, err);
    if (s4->parsed()) return dehaze_cmd.run(out, err);
    return eval.run(out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const CorruptFileError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace dehaze::cli
