// Runs the aeroseg executable end to end on a tiny generated dataset.

#include "aeroseg/dataset.hpp"
#include "aeroseg/mesh_io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace aeroseg;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run run(const std::string& args) {
  const auto log = fs::temp_directory_path() / "aeroseg_cli_output.txt";
  const std::string cmd = std::string(AEROSEG_CLI) + " " + args + " > " + log.string() + " 2>&1";
  Run r;
  const int raw = std::system(cmd.c_str());
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "aeroseg_cli_test";
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(root_ / "small.json") << R"({
      "model": {"priming_widths": [16, 16], "gat_layers": 2, "gat_heads": 2, "gat_head_width": 8,
                "post_widths": [16, 16], "classifier_hidden": 16, "tnet_hidden": 2},
      "lr": {"base": 1e-3}
    })";
  }
  static fs::path root_;
  std::string dir(const char* name) const { return (root_ / name).string(); }
};

fs::path Cli::root_;

}  // namespace

TEST_F(Cli, FullPipelineOnFiveSamples) {
  const std::string cfg = " --config " + dir("small.json");
  auto r = run("gen --out " + dir("train") + " --bases 1 --variations 5 --densities 1 --seed 3");
  ASSERT_EQ(r.status, 0) << r.output;
  r = run("gen --out " + dir("val") + " --bases 1 --variations 2 --densities 1 --first-base 8 --seed 3");
  ASSERT_EQ(r.status, 0) << r.output;

  r = run("train --train " + dir("train") + " --val " + dir("val") + " --out " + dir("run") +
          " --epochs 3 --seed 1" + cfg);
  ASSERT_EQ(r.status, 0) << r.output;
  ASSERT_TRUE(fs::exists(root_ / "run" / "model.ckpt"));
  const auto metrics = read_file(root_ / "run" / "metrics.csv");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 4);

  const std::string ckpt = " --checkpoint " + dir("run/model.ckpt");
  r = run("calibrate" + ckpt + " --data " + dir("val") + " --out " + dir("cal.json") + cfg);
  ASSERT_EQ(r.status, 0) << r.output;

  const std::string mesh = dir("val/b08_v00_d0.mesh");
  r = run("predict" + ckpt + " --calibrator " + dir("cal.json") + " --mesh " + mesh + " --out " +
          dir("pred.csv") + cfg);
  ASSERT_EQ(r.status, 0) << r.output;

  r = run("project --predictions " + dir("pred.csv") + " --mesh " + mesh + " --surfaces " +
          dir("val/b08_v00_d0.surfaces") + " --out " + dir("classes.csv") + cfg);
  ASSERT_EQ(r.status, 0) << r.output;

  r = run("emit --classifications " + dir("classes.csv") + " --out " + dir("settings.txt") + cfg);
  ASSERT_EQ(r.status, 0) << r.output;
  const auto settings = read_file(root_ / "settings.txt");
  EXPECT_NE(settings.find(" | quad-dominant/hex-dominant | "), std::string::npos);

  r = run("eval" + ckpt + " --calibrator " + dir("cal.json") + " --data " + dir("val") + " --out " +
          dir("report.json") + cfg);
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("face accuracy"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "report.json"));
}

TEST_F(Cli, EvalWithPerfectPredictions) {
  const auto data = root_ / "perfect";
  write_dataset(data, plan_dataset(1, 2, 1, 9));
  const auto preds = root_ / "perfect_preds";
  fs::create_directories(preds);
  for (const char* name : {"b00_v00_d0", "b00_v01_d0"}) {
    const auto mesh = load_mesh(data / (std::string(name) + ".mesh"),
                                data / (std::string(name) + ".labels.csv"));
    std::string csv = "face,p_fuselage,p_wing,p_stabilizer,p_engine,argmax,set\n";
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
      const auto l = (*mesh.face_labels)[f];
      csv += std::to_string(f);
      for (auto c : kAllParts) csv += c == l ? ",1" : ",0";
      csv += "," + std::string(to_string(l)) + "," + std::string(to_string(l)) + "\n";
    }
    write_file_atomic(preds / (std::string(name) + ".predictions.csv"), csv);
  }
  const auto r = run("eval --predictions " + preds.string() + " --data " + data.string() +
                     " --out " + dir("perfect.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto report = nlohmann::json::parse(read_file(root_ / "perfect.json"));
  EXPECT_EQ(report["face_accuracy"]["pooled"], 1.0);
  for (const char* mode : {"top1", "conformal"}) {
    EXPECT_EQ(report["surfaces"][mode]["under_refined"], 0);
    EXPECT_EQ(report["surfaces"][mode]["over_refined"], 0);
    EXPECT_EQ(report["surfaces"][mode]["incorrect"], 0);
  }
}

TEST_F(Cli, MissingCheckpointNamesThePath) {
  const std::string missing = dir("nowhere/model.ckpt");
  const auto r = run("predict --checkpoint " + missing + " --mesh " + dir("x.mesh") + " --out " +
                     dir("y.csv"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find(missing), std::string::npos) << r.output;
}

TEST_F(Cli, BadArgumentsFail) {
  EXPECT_NE(run("frobnicate").status, 0);
  EXPECT_NE(run("gen").status, 0);
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_NE(run("gen --out " + dir("g") + " --alpha 2").status, 0);
}
