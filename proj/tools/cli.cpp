// Copyright 2026 The stainbench Authors.
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

#include "cli.hpp"

#include <fnmatch.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <optional>

#include "json.hpp"
#include "stainbench/error.hpp"
#include "stainbench/formats.hpp"
#include "stainbench/harness.hpp"
#include "stainbench/png_io.hpp"
#include "stainbench/postproc.hpp"
#include "stainbench/stain.hpp"
#include "stainbench/synth.hpp"
#include "stainbench/tensor_io.hpp"
#include "stainbench/version.hpp"

namespace stainbench::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kThreadsEnv = "STAINBENCH_THREADS";

// --threads wins, then STAINBENCH_THREADS, then all hardware threads (0).
unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') throw ValidationError(std::string(kThreadsEnv) + " must be a non-negative integer");
    return static_cast<unsigned>(v);
  }
  return 0;
}

bool has_glob_chars(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

// Expands shell-style patterns in the final path component; literal paths
// pass through. Matches are sorted so runs are order-stable.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> out;
  for (const auto& pattern : patterns) {
    const fs::path p(pattern);
    if (!has_glob_chars(p.filename().string())) {
      out.push_back(p);
      continue;
    }
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::vector<fs::path> matches;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_regular_file() && fnmatch(p.filename().c_str(), entry.path().filename().c_str(), 0) == 0) {
        matches.push_back(entry.path());
      }
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    if (matches.empty()) throw ValidationError("no files match " + pattern);
    std::sort(matches.begin(), matches.end());
    out.insert(out.end(), matches.begin(), matches.end());
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(output, text.back() == '\n' ? text : text + "\n");
  }
}

std::string stem_without(const fs::path& p, const std::string& suffix) {
  std::string s = p.stem().string();
  if (s.size() > suffix.size() && s.ends_with(suffix)) s.resize(s.size() - suffix.size());
  return s;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string out_dir;
};

void cmd_synth(const SynthArgs& a) {
  const auto specs = synth_specs_from_json(read_text_file(a.spec));
  const fs::path out(a.out_dir);
  ensure_dir(out);

  nlohmann::ordered_json oracle;
  oracle["tool"] = kName;
  oracle["version"] = kVersion;
  auto& images = oracle["images"] = nlohmann::ordered_json::array();
  Counts total;
  for (const auto& spec : specs) {
    const StainedImage stained = make_stained(spec);
    write_png_rgb(out / (spec.image_id + ".png"), stained.image);

    const SynthProbabilityMap pm = make_probability_map(spec);
    write_probability_map_png(out / (spec.image_id + ".probmap.png"), pm.map);

    AnnotationSet ann{spec.image_id, spec.width, spec.height, spec.scanner, stained.annotations};
    write_text_file(out / (spec.image_id + ".annotations.json"), annotation_set_to_json(ann) + "\n");

    const Counts c = expected_counts(pm);
    total += c;
    nlohmann::ordered_json e;
    e["image_id"] = spec.image_id;
    e["scanner"] = spec.scanner;
    e["tp"] = c.tp;
    e["fp"] = c.fp;
    e["fn"] = c.fn;
    auto& m = e["stain_matrix"] = nlohmann::ordered_json::array();
    for (int r = 0; r < 3; ++r) m.push_back({spec.stain_matrix(r, 0), spec.stain_matrix(r, 1)});
    images.push_back(std::move(e));
  }
  const Scores s = prf1(total);
  oracle["total"] = {{"tp", total.tp}, {"fp", total.fp}, {"fn", total.fn},
                     {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  write_text_file(out / "expected.json", oracle.dump(2) + "\n");
  std::cout << fmt::format("wrote {} synthetic images to {}\n", specs.size(), out.string());
}

// ---- tile --------------------------------------------------------------------

struct TileArgs {
  std::string image;
  int tile_size = kDefaultTileSize;
  std::string out_dir = ".";
};

void cmd_tile(const TileArgs& a) {
  const RasterImage img = read_png_rgb(a.image);
  const TileGrid grid = tile(img, a.tile_size);
  const fs::path out(a.out_dir);
  ensure_dir(out);
  const std::string stem = fs::path(a.image).stem().string();
  for (const auto& o : grid.origins) {
    write_png_rgb(out / fmt::format("{}_x{}_y{}.png", stem, o.x, o.y), img.crop(o.x, o.y, grid.tile_size, grid.tile_size));
  }
  write_text_file(out / "manifest.json", tile_manifest_to_json(grid) + "\n");
  std::cout << fmt::format("{} tiles of {}px\n", grid.origins.size(), grid.tile_size);
}

// ---- fit-stain ---------------------------------------------------------------

struct FitArgs {
  std::vector<std::string> inputs;
  double beta = 0.15;
  double alpha = 1.0;
  std::string output;
};

void cmd_fit_stain(const FitArgs& a, unsigned threads) {
  std::vector<RasterImage> images;
  for (const auto& p : expand_inputs(a.inputs)) images.push_back(read_png_rgb(p));
  StainFitOptions options;
  options.beta = a.beta;
  options.alpha = a.alpha;
  options.threads = threads;
  emit(stain_profile_to_json(fit_stain_profile(images, options)), a.output);
}

// ---- normalize ---------------------------------------------------------------

struct NormalizeArgs {
  std::string image;
  std::string source;
  std::string target;
  std::string output;
};

void cmd_normalize(const NormalizeArgs& a, unsigned threads) {
  const StainProfile source = stain_profile_from_json(read_text_file(a.source));
  const StainProfile target = stain_profile_from_json(read_text_file(a.target));
  const RasterImage img = read_png_rgb(a.image);
  write_png_rgb(a.output, normalize(img, source, target, kDefaultReferenceWhite, threads));
}

// ---- postprocess -------------------------------------------------------------

struct PostprocessArgs {
  std::string probmap;
  PostprocessOptions options;
  std::string image_id;
  std::string output;
};

void cmd_postprocess(const PostprocessArgs& a) {
  const fs::path path(a.probmap);
  const ProbabilityMap pm = path.extension() == ".json" ? probability_map_from_json(read_text_file(path))
                                                         : read_probability_map_png(path);
  DetectionSet set;
  set.image_id = a.image_id.empty() ? stem_without(path, ".probmap") : a.image_id;
  set.detections = postprocess(pm, a.options);
  emit(detection_set_to_json(set), a.output);
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> dets;
  std::vector<std::string> anns;
  std::string tiles;
  std::string resample_unit = "crop";
  std::string out_dir = ".";
  EvalConfig config;
};

void cmd_evaluate(EvaluateArgs a, unsigned threads) {
  a.config.threads = threads;
  a.config.resample_unit = resample_unit_from_string(a.resample_unit);
  if (!a.tiles.empty()) a.config.manifest = tile_manifest_from_json(read_text_file(a.tiles));
  const auto annotations = read_annotation_files(expand_inputs(a.anns));
  const auto detections = read_detection_files(expand_inputs(a.dets));
  const RunReport report = evaluate_run(detections, annotations, a.config);

  const fs::path out(a.out_dir);
  ensure_dir(out);
  write_text_file(out / "report.json", run_report_to_json(report));
  write_text_file(out / "report.csv", run_report_to_csv(report));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  const auto& pooled = report.reports.front();
  std::cout << fmt::format("tp={} fp={} fn={} precision={:.4f} recall={:.4f} f1={:.4f} ci=[{:.4f}, {:.4f}]\n",
                           pooled.counts.tp, pooled.counts.fp, pooled.counts.fn, pooled.precision, pooled.recall,
                           pooled.f1, pooled.ci_low, pooled.ci_high);
}

// ---- fid ---------------------------------------------------------------------

struct FidArgs {
  std::string a;
  std::string b;
};

void cmd_fid(const FidArgs& a) {
  const double value = fid(read_feature_set(a.a), read_feature_set(a.b));
  std::cout << fmt::format("{:.17g}\n", value);
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Stain normalization, detection post-processing and mitosis evaluation toolkit", "stainbench"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::optional<unsigned> threads_flag;
  app.add_option("--threads", threads_flag, "Worker threads (0 = all cores); overrides STAINBENCH_THREADS");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with ground-truth oracle files");
  synth_cmd->add_option("spec", synth.spec, "Synth or corpus spec JSON")->required();
  synth_cmd->add_option("out_dir", synth.out_dir, "Output directory")->required();

  TileArgs tile_args;
  auto* tile_cmd = app.add_subcommand("tile", "Cut an image into non-overlapping square crops");
  tile_cmd->add_option("image", tile_args.image, "Input PNG")->required();
  tile_cmd->add_option("--tile-size", tile_args.tile_size, "Crop edge in pixels")->capture_default_str();
  tile_cmd->add_option("--out-dir,-o", tile_args.out_dir, "Output directory")->capture_default_str();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-stain", "Fit a Macenko stain profile to a set of images");
  fit_cmd->add_option("images", fit.inputs, "PNG files or glob patterns")->required();
  fit_cmd->add_option("--beta", fit.beta, "OD threshold for tissue pixels")->capture_default_str();
  fit_cmd->add_option("--alpha", fit.alpha, "Angle percentile")->capture_default_str();
  fit_cmd->add_option("--output,-o", fit.output, "Profile JSON (default stdout)");

  NormalizeArgs norm;
  auto* norm_cmd = app.add_subcommand("normalize", "Re-render an image from a source to a target stain profile");
  norm_cmd->add_option("image", norm.image, "Input PNG")->required();
  norm_cmd->add_option("--source", norm.source, "Source profile JSON")->required();
  norm_cmd->add_option("--target", norm.target, "Target profile JSON")->required();
  norm_cmd->add_option("--output,-o", norm.output, "Output PNG")->required();

  PostprocessArgs post;
  auto* post_cmd = app.add_subcommand("postprocess", "Convert a probability map into detections");
  post_cmd->add_option("probmap", post.probmap, "16-bit grayscale PNG or JSON map")->required();
  post_cmd->add_option("--threshold", post.options.threshold, "Foreground iff p >= threshold")->capture_default_str();
  post_cmd->add_option("--box-size", post.options.box_size, "Emitted box edge in pixels")->capture_default_str();
  post_cmd->add_option("--min-extent", post.options.min_extent, "Drop regions narrower or shorter than this")
      ->capture_default_str();
  post_cmd->add_option("--image-id", post.image_id, "image_id to record (default: file stem)");
  post_cmd->add_option("--output,-o", post.output, "Detections JSON (default stdout)");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Cell-wise F1 with bootstrap CIs per scanner");
  eval_cmd->add_option("--dets", eval.dets, "Detection JSON files or globs")->required();
  eval_cmd->add_option("--anns", eval.anns, "Annotation JSON files or globs")->required();
  eval_cmd->add_option("--tiles", eval.tiles, "Tile manifest applied to every image");
  eval_cmd->add_option("--tile-size", eval.config.tile_size, "Crop edge when no manifest is given")->capture_default_str();
  eval_cmd->add_option("--radius", eval.config.radius, "Match radius in pixels")->capture_default_str();
  eval_cmd->add_option("--resamples", eval.config.n_resamples, "Bootstrap resamples")->capture_default_str();
  eval_cmd->add_option("--seed", eval.config.seed, "Bootstrap seed")->capture_default_str();
  eval_cmd->add_option("--resample-unit", eval.resample_unit, "crop or image")->capture_default_str();
  eval_cmd->add_option("--threshold", eval.config.postprocess.threshold, "Recorded post-processing threshold")
      ->capture_default_str();
  eval_cmd->add_option("--box-size", eval.config.postprocess.box_size, "Recorded box size")->capture_default_str();
  eval_cmd->add_option("--min-extent", eval.config.postprocess.min_extent, "Recorded minimum extent")
      ->capture_default_str();
  eval_cmd->add_option("--out-dir,-o", eval.out_dir, "Directory for report.json and report.csv")->capture_default_str();

  FidArgs fid_args;
  auto* fid_cmd = app.add_subcommand("fid", "Frechet distance between two feature sets");
  fid_cmd->add_option("features_a", fid_args.a, "JSON or tensor blob")->required();
  fid_cmd->add_option("features_b", fid_args.b, "JSON or tensor blob")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  return guarded([&] {
    const unsigned threads = resolve_threads(threads_flag);
    if (*synth_cmd) cmd_synth(synth);
    else if (*tile_cmd) cmd_tile(tile_args);
    else if (*fit_cmd) cmd_fit_stain(fit, threads);
    else if (*norm_cmd) cmd_normalize(norm, threads);
    else if (*post_cmd) cmd_postprocess(post);
    else if (*eval_cmd) cmd_evaluate(eval, threads);
    else if (*fid_cmd) cmd_fid(fid_args);
  });
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"stainbench"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace stainbench::cli
