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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "stainbench/error.hpp"
#include "stainbench/formats.hpp"
#include "stainbench/png_io.hpp"
#include "stainbench/postproc.hpp"
#include "stainbench/tensor_io.hpp"

using namespace stainbench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli_run(std::vector<std::string> args) { return cli::run(args); }

fs::path make_corpus_dir(const std::string& name, const std::string& spec_json) {
  const auto dir = oracle::temp_dir(name);
  write_text_file(dir / "spec.json", spec_json);
  REQUIRE(cli_run({"synth", (dir / "spec.json").string(), (dir / "corpus").string()}) == cli::kExitOk);
  return dir;
}

}  // namespace

TEST_CASE("synth, postprocess and evaluate on planted perfect detections") {
  const auto dir = make_corpus_dir("cli_perfect", R"({"scanner": "s1", "count": 3, "width": 512, "height": 512, "seed": 3})");
  const auto corpus = dir / "corpus";
  CHECK(fs::exists(corpus / "expected.json"));
  for (int i = 0; i < 3; ++i) {
    const std::string id = "s1_000" + std::to_string(i);
    CHECK(cli_run({"postprocess", (corpus / (id + ".probmap.png")).string(), "-o",
                   (dir / (id + ".dets.json")).string()}) == cli::kExitOk);
    const auto dets = detection_sets_from_json(read_text_file(dir / (id + ".dets.json")));
    CHECK(dets[0].image_id == id);
  }
  CHECK(cli_run({"evaluate", "--dets", (dir / "*.dets.json").string(), "--anns",
                 (corpus / "*.annotations.json").string(), "--resamples", "200", "--seed", "7", "-o",
                 (dir / "report").string()}) == cli::kExitOk);
  const auto report = slurp(dir / "report" / "report.json");
  CHECK(report.find("\"f1\": 1.0") != std::string::npos);
  const auto csv = slurp(dir / "report" / "report.csv");
  CHECK(csv.find("all,24,0,0,1,1,1,1,1,") != std::string::npos);

  CHECK(cli_run({"evaluate", "--dets", (dir / "*.dets.json").string(), "--anns",
                 (corpus / "*.annotations.json").string(), "--resamples", "200", "--seed", "7", "-o",
                 (dir / "again").string()}) == cli::kExitOk);
  CHECK(slurp(dir / "again" / "report.json") == report);
  CHECK(slurp(dir / "again" / "report.csv") == csv);
}

TEST_CASE("synth output is byte-identical across runs") {
  const auto a = make_corpus_dir("cli_repeat_a", R"({"scanner": "s", "count": 2, "width": 512, "height": 512, "seed": 9})");
  const auto b = make_corpus_dir("cli_repeat_b", R"({"scanner": "s", "count": 2, "width": 512, "height": 512, "seed": 9})");
  for (const auto& entry : fs::directory_iterator(a / "corpus")) {
    CHECK(slurp(entry.path()) == slurp(b / "corpus" / entry.path().filename()));
  }
}

TEST_CASE("postprocess drops a planted 5x5 blob") {
  const auto dir = oracle::temp_dir("cli_small_blob");
  ProbabilityMap pm{64, 64, std::vector<double>(64 * 64, 0.0)};
  for (int y = 20; y < 25; ++y) {
    for (int x = 20; x < 25; ++x) pm.data[static_cast<std::size_t>(y * 64 + x)] = 0.9;
  }
  write_probability_map_png(dir / "small.probmap.png", pm);
  REQUIRE(cli_run({"postprocess", (dir / "small.probmap.png").string(), "--min-extent", "10", "-o",
                   (dir / "out.json").string()}) == cli::kExitOk);
  const auto sets = detection_sets_from_json(read_text_file(dir / "out.json"));
  CHECK(sets[0].image_id == "small");
  CHECK(sets[0].detections.empty());
  REQUIRE(cli_run({"postprocess", (dir / "small.probmap.png").string(), "--min-extent", "5", "-o",
                   (dir / "out5.json").string()}) == cli::kExitOk);
  CHECK(detection_sets_from_json(read_text_file(dir / "out5.json"))[0].detections.size() == 1);
}

TEST_CASE("tile, fit-stain, normalize and fid commands") {
  const auto dir = make_corpus_dir("cli_chain", R"({"scanner": "s", "count": 2, "width": 1024, "height": 1024, "tile_size": 512, "blobs_per_image": 30, "seed": 2})");
  const auto corpus = dir / "corpus";
  REQUIRE(cli_run({"tile", (corpus / "s_0000.png").string(), "--tile-size", "512", "-o", (dir / "tiles").string()}) ==
          cli::kExitOk);
  CHECK(fs::exists(dir / "tiles" / "s_0000_x512_y512.png"));
  CHECK(tile_manifest_from_json(read_text_file(dir / "tiles" / "manifest.json")).origins.size() == 4);

  REQUIRE(cli_run({"fit-stain", (corpus / "s_*[0-9].png").string(), "-o", (dir / "p.json").string()}) == cli::kExitOk);
  const auto profile = read_text_file(dir / "p.json");
  CHECK(profile.find("stain_matrix") != std::string::npos);
  REQUIRE(cli_run({"normalize", (corpus / "s_0001.png").string(), "--source", (dir / "p.json").string(), "--target",
                   (dir / "p.json").string(), "-o", (dir / "n.png").string()}) == cli::kExitOk);
  CHECK(read_png_rgb(dir / "n.png").width() == 1024);

  write_text_file(dir / "a.json", "[[0], [2]]");
  write_text_file(dir / "b.json", "[[2], [4]]");
  CHECK(cli_run({"fid", (dir / "a.json").string(), (dir / "b.json").string()}) == cli::kExitOk);
}

TEST_CASE("exit codes") {
  const auto dir = oracle::temp_dir("cli_exit");
  CHECK(cli_run({}) == cli::kExitValidation);
  CHECK(cli_run({"frobnicate"}) == cli::kExitValidation);
  CHECK(cli_run({"postprocess", (dir / "missing.png").string()}) == cli::kExitIo);
  CHECK(cli_run({"fid", (dir / "missing.json").string(), (dir / "missing.json").string()}) == cli::kExitIo);

  write_text_file(dir / "bad.json", R"({"scanner": "s", "count": 0})");
  CHECK(cli_run({"synth", (dir / "bad.json").string(), (dir / "out").string()}) == cli::kExitValidation);

  write_text_file(dir / "one.json", "[[1, 2]]");
  CHECK(cli_run({"fid", (dir / "one.json").string(), (dir / "one.json").string()}) == cli::kExitValidation);
  CHECK(cli_run({"postprocess", (dir / "one.json").string(), "--threshold", "abc"}) == cli::kExitValidation);

  write_text_file(dir / "white.json", R"({"image_id": "w", "width": 200, "height": 200, "noise_sigma": 0})");
  REQUIRE(cli_run({"synth", (dir / "white.json").string(), (dir / "white").string()}) == cli::kExitOk);
  CHECK(cli_run({"fit-stain", (dir / "white" / "w.png").string()}) == cli::kExitValidation);

  CHECK(cli_run({"--threads", "2", "fid", (dir / "missing.json").string(), (dir / "missing.json").string()}) ==
        cli::kExitIo);
}

TEST_CASE("thread count environment variable is validated") {
  const auto dir = oracle::temp_dir("cli_env");
  write_text_file(dir / "a.json", "[[0], [2]]");
  ::setenv("STAINBENCH_THREADS", "many", 1);
  CHECK(cli_run({"fid", (dir / "a.json").string(), (dir / "a.json").string()}) == cli::kExitValidation);
  CHECK(cli_run({"--threads", "1", "fid", (dir / "a.json").string(), (dir / "a.json").string()}) == cli::kExitOk);
  ::setenv("STAINBENCH_THREADS", "2", 1);
  CHECK(cli_run({"fid", (dir / "a.json").string(), (dir / "a.json").string()}) == cli::kExitOk);
  ::unsetenv("STAINBENCH_THREADS");
}
