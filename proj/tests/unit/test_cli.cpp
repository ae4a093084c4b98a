#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "doctest.h"
#include "scratch.hpp"

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = geohealth::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json read_json(const std::filesystem::path& p) { return nlohmann::json::parse(scratch::slurp(p)); }

std::string s(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST_CASE("synth 5x5 then build-graph gives the 72-edge queen grid") {
  scratch::Dir dir("cli_grid");
  REQUIRE(run({"synth", "--rows", "5", "--cols", "5", "--out", s(dir / "data")}).code == 0);
  const Result r = run({"build-graph", "--regions", s(dir / "data" / "regions.geojson"), "--out", s(dir / "g")});
  REQUIRE(r.code == 0);
  const auto summary = read_json(dir / "g" / "graph_summary.json");
  CHECK(summary["edges"] == 72);
  CHECK(summary["nodes"] == 25);
  CHECK(summary["components"] == 1);
  const auto manifest = read_json(dir / "g" / "manifest.json");
  CHECK(manifest["command"] == "build-graph");
  CHECK(manifest["inputs"].size() == 1);
  CHECK(manifest["outputs"].size() == 3);
  CHECK(manifest["outputs"][0]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("graph hops grow the edge set monotonically") {
  scratch::Dir dir("cli_hops");
  REQUIRE(run({"synth", "--rows", "6", "--cols", "6", "--out", s(dir / "data")}).code == 0);
  std::size_t previous = 0;
  for (int h = 1; h <= 3; ++h) {
    const auto out = dir / ("h" + std::to_string(h));
    REQUIRE(run({"build-graph", "--regions", s(dir / "data" / "regions.geojson"), "--hops", std::to_string(h),
                 "--out", s(out)})
                .code == 0);
    const std::size_t edges = read_json(out / "graph_summary.json")["edges"];
    CHECK(edges > previous);
    previous = edges;
    // queen hop distance on a grid is the Chebyshev distance
    std::size_t want = 0;
    for (int a = 0; a < 36; ++a)
      for (int b = a + 1; b < 36; ++b)
        if (std::max(std::abs(a / 6 - b / 6), std::abs(a % 6 - b % 6)) <= h) ++want;
    CHECK(edges == want);
  }
}

TEST_CASE("error exit codes") {
  scratch::Dir dir("cli_err");
  const Result missing = run({"build-graph", "--regions", s(dir / "nope.geojson"), "--out", s(dir / "o")});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.geojson") != std::string::npos);
  CHECK(missing.err.find("FileNotFound") != std::string::npos);

  CHECK(run({"build-graph", "--out", s(dir / "o")}).code == 4);
  CHECK(run({"frobnicate"}).code == 4);
  CHECK(run({"synth", "--rho", "1.5", "--out", s(dir / "o")}).code == 4);
  dir.write("bad.json", "{not json");
  CHECK(run({"--config", s(dir / "bad.json"), "synth"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("full pipeline with manifest replay") {
  scratch::Dir dir("cli_pipe");
  const std::string data = s(dir / "data");
  REQUIRE(run({"synth", "--rows", "6", "--cols", "6", "--n-features", "3", "--collinear", "0:0.001", "--seed",
               "3", "--out", data})
              .code == 0);
  const std::string regions = data + "/regions.geojson", targets = data + "/targets.csv";

  Result r = run({"preprocess", "--features", data + "/features.csv", "--regions", regions, "--out", s(dir / "pp")});
  REQUIRE(r.code == 0);
  const auto pp = read_json(dir / "pp" / "preprocess_summary.json");
  CHECK(scratch::slurp(dir / "pp" / "vif_removals.csv").find("f0_copy0") != std::string::npos);
  (void)pp;

  r = run({"encode", "--regions", regions, "--features", s(dir / "pp" / "features_selected.csv"), "--encodings",
           "laplacian,random_walk", "--laplacian-dim", "2", "--out", s(dir / "enc")});
  REQUIRE(r.code == 0);
  const std::string nodes = s(dir / "enc" / "node_features.csv");
  CHECK(scratch::slurp(nodes).rfind("id,f0,f1,f2,", 0) == 0);

  const std::vector<std::string> common{"--regions", regions, "--features", nodes, "--targets", targets,
                                        "--hidden1", "8", "--hidden2", "4", "--epochs", "5"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  r = run(with({"train"}, {"--arch", "gcn", "--out", s(dir / "train")}));
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "train" / "model.json"));

  r = run(with({"cv"}, {"--out", s(dir / "cv")}));
  REQUIRE(r.code == 0);
  const auto cv = read_json(dir / "cv" / "cv_summary.json");
  CHECK(cv["folds"] == 10);
  CHECK(cv["config"]["hops"] == 2);

  r = run(with({"cv"}, {"--scheme", "loocv", "--groups", "Q1,Q3", "--out", s(dir / "loocv")}));
  REQUIRE(r.code == 0);
  CHECK(read_json(dir / "loocv" / "cv_summary.json")["folds"] == 2);

  r = run({"baselines", "--regions", regions, "--features", nodes, "--targets", targets, "--models", "ols,slm",
           "--mode", "both", "--out", s(dir / "bl")});
  REQUIRE(r.code == 0);
  const auto bl = read_json(dir / "bl" / "baselines_summary.json");
  CHECK(bl["dropped_constant_columns"] == nlohmann::json::array({"random_walk_1"}));
  CHECK(bl["slm"].contains("cv"));
  CHECK(r.err.find("random_walk_1") != std::string::npos);

  r = run({"explain", "--regions", regions, "--features", nodes, "--targets", targets, "--model",
           s(dir / "train" / "model.json"), "--out", s(dir / "ex")});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "ex" / "layers.geojson"));
  CHECK(std::filesystem::exists(dir / "ex" / "correlations.csv"));

  // replaying the cv manifest reproduces every output hash
  const auto first = read_json(dir / "cv" / "manifest.json");
  REQUIRE(run({"--config", s(dir / "cv" / "manifest.json"), "--out", s(dir / "cv2")}).code == 0);
  const auto second = read_json(dir / "cv2" / "manifest.json");
  CHECK(first["outputs"] == second["outputs"]);
  CHECK(first["inputs"] == second["inputs"]);
  CHECK(scratch::slurp(dir / "cv" / "cv_predictions.csv") == scratch::slurp(dir / "cv2" / "cv_predictions.csv"));
}

TEST_CASE("baselines drop columns spanned by earlier ones") {
  scratch::Dir dir("cli_dep");
  const std::string data = s(dir / "data");
  REQUIRE(run({"synth", "--rows", "8", "--cols", "8", "--n-features", "2", "--seed", "5", "--out", data}).code == 0);
  const std::string regions = data + "/regions.geojson";
  REQUIRE(run({"encode", "--regions", regions, "--features", data + "/features.csv", "--encodings", "location",
               "--out", s(dir / "enc")})
              .code == 0);
  const Result r = run({"baselines", "--regions", regions, "--features", s(dir / "enc" / "node_features.csv"),
                        "--targets", data + "/targets.csv", "--models", "ols", "--mode", "insample", "--out",
                        s(dir / "bl")});
  REQUIRE(r.code == 0);
  const auto bl = read_json(dir / "bl" / "baselines_summary.json");
  REQUIRE(bl.contains("dropped_dependent_columns"));
  CHECK_FALSE(bl["dropped_dependent_columns"].empty());
  CHECK_FALSE(bl.contains("dropped_constant_columns"));
  CHECK(r.err.find("linearly dependent") != std::string::npos);
}
