#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "mpa/mpa.hpp"
#include "mpa/plot.hpp"
#include "test_support.hpp"

using namespace mpa;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mpa");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("mpa-cli-" + std::to_string(::getpid()) + "-" + info->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::vector<std::string> iris_fit(const std::string& output) const {
    return {"fit",       "-i",        test::data_path("iris.csv"),
            "--label-col", "Species", "--positive-label",
            "Iris-setosa", "--features", "SepalLengthCm,SepalWidthCm",
            "--classes", "Iris-setosa,Iris-versicolor",
            "--eta",     "0.5",       "--epochs",
            "200",       "-o",        output};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FitIrisReachesFullTrainingAccuracy) {
  const auto r = run(iris_fit(path("iris.model")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("loaded 100 rows"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("training accuracy: 1\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(path("iris.model")));
  EXPECT_TRUE(fs::exists(path("iris.model.log")));
  const auto model = from_text<double>(slurp(path("iris.model")));
  EXPECT_EQ(model.dim(), 2);
  EXPECT_EQ(model.feature_names(), (std::vector<std::string>{"SepalLengthCm", "SepalWidthCm"}));
}

TEST_F(CliTest, FitIsDeterministic) {
  ASSERT_EQ(run(iris_fit(path("a.model"))).code, 0);
  ASSERT_EQ(run(iris_fit(path("b.model"))).code, 0);
  EXPECT_EQ(slurp(path("a.model")), slurp(path("b.model")));
  EXPECT_EQ(slurp(path("a.model.log")), slurp(path("b.model.log")));
}

TEST_F(CliTest, MissingLabelColumnIsInputError) {
  const auto r = run({"fit", "-i", test::data_path("iris.csv"), "--label-col", "Kind", "-o", path("m")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("MissingColumn"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("Kind"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("[load data]"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("m")));
}

TEST_F(CliTest, EmptyDatasetIsInputError) {
  std::ofstream(path("empty.csv")) << "a,b,label\n";
  const auto r = run({"fit", "-i", path("empty.csv"), "--label-col", "label", "-o", path("m")});
  EXPECT_EQ(r.code, cli::kExitInput) << r.err;
}

TEST_F(CliTest, MissingInputFileIsInputError) {
  const auto r = run({"fit", "-i", path("nope.csv"), "--label-col", "x", "-o", path("m")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("[parse arguments]"), std::string::npos) << r.err;
}

TEST_F(CliTest, PredictWritesCsvAndAccuracy) {
  ASSERT_EQ(run(iris_fit(path("iris.model"))).code, 0);
  const auto r = run({"predict", "-m", path("iris.model"), "-i", test::data_path("iris.csv"), "--label-col", "Species",
                      "--positive-label", "Iris-setosa", "--classes", "Iris-setosa,Iris-versicolor", "-o",
                      path("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy: 1\n"), std::string::npos) << r.out;

  std::istringstream csv(slurp(path("pred.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "row,prediction");
  int rows = 0, positives = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(rows));
    positives += line.back() == '1';
    ++rows;
  }
  EXPECT_EQ(rows, 100);
  EXPECT_EQ(positives, 50);
}

TEST_F(CliTest, PredictToStdoutWithoutLabels) {
  ASSERT_EQ(run(iris_fit(path("iris.model"))).code, 0);
  const auto r = run({"predict", "-m", path("iris.model"), "-i", test::data_path("iris.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("row,prediction\n0,1\n", 0), 0u) << r.out.substr(0, 40);
  EXPECT_EQ(r.out.find("accuracy"), std::string::npos);
}

TEST_F(CliTest, PredictRejectsWrongFeatureCount) {
  ASSERT_EQ(run(iris_fit(path("iris.model"))).code, 0);
  const auto r = run({"predict", "-m", path("iris.model"), "-i", test::data_path("iris.csv"), "--features",
                      "SepalLengthCm,SepalWidthCm,PetalLengthCm"});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("DimensionMismatch"), std::string::npos) << r.err;
}

TEST_F(CliTest, PredictRejectsCorruptModel) {
  std::ofstream(path("bad.model")) << "not a model\n";
  const auto r = run({"predict", "-m", path("bad.model"), "-i", test::data_path("iris.csv")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("[load model]"), std::string::npos) << r.err;
}

TEST_F(CliTest, BenchSyntheticSmoke) {
  const auto r = run({"bench", "synthetic", "--seeds", "2", "--stds", "2", "--n-per-class", "30", "-o",
                      path("synth.tsv"), "--table", path("synth.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("16 records over 4 datasets\n", 0), 0u) << r.out;
  const std::string tsv = slurp(path("synth.tsv"));
  EXPECT_FALSE(tsv.empty());
  EXPECT_EQ(slurp(path("synth.txt")), r.out.substr(r.out.find('\n') + 1));

  ASSERT_EQ(run({"bench", "synthetic", "--seeds", "2", "--stds", "2", "--n-per-class", "30", "-o", path("again.tsv")})
                .code,
            0);
  EXPECT_EQ(tsv, slurp(path("again.tsv")));
}

TEST_F(CliTest, BenchDatasetPreset) {
  const auto r = run({"bench", "dataset", "-i", test::data_path("iris.csv"), "--preset", "iris", "--reps", "2",
                      "--epochs", "100", "-o", path("iris.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("loaded 100 rows"), std::string::npos) << r.out;
  const std::string tsv = slurp(path("iris.tsv"));
  EXPECT_NE(tsv.find("epochs\t100"), std::string::npos);
  EXPECT_NE(tsv.find("pipeline\tsplit > standardize > pca"), std::string::npos);
}

TEST_F(CliTest, BenchDatasetNeedsLabelOrPreset) {
  const auto r = run({"bench", "dataset", "-i", test::data_path("iris.csv")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("InvalidParams"), std::string::npos) << r.err;
}

TEST_F(CliTest, BenchDatasetUnknownPreset) {
  const auto r = run({"bench", "dataset", "-i", test::data_path("iris.csv"), "--preset", "wine"});
  EXPECT_EQ(r.code, cli::kExitInput);
}

namespace {

double attr(const std::string& svg, const std::string& name) {
  const std::regex re(name + "=\"([^\"]+)\"");
  std::smatch m;
  EXPECT_TRUE(std::regex_search(svg, m, re)) << name;
  return std::stod(m[1]);
}

// Pixel centres of the markers inside the group with the given id.
std::vector<Eigen::Vector2d> markers(const std::string& svg, const std::string& group) {
  const auto begin = svg.find("<g id=\"" + group + "\"");
  const auto end = svg.find("</g>", begin);
  const std::string body = svg.substr(begin, end - begin);
  std::vector<Eigen::Vector2d> out;
  const std::regex circle("cx=\"([^\"]+)\" cy=\"([^\"]+)\"");
  const std::regex rect("<rect x=\"([^\"]+)\" y=\"([^\"]+)\" width=\"7\"");
  for (auto it = std::sregex_iterator(body.begin(), body.end(), circle); it != std::sregex_iterator(); ++it)
    out.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  for (auto it = std::sregex_iterator(body.begin(), body.end(), rect); it != std::sregex_iterator(); ++it)
    out.emplace_back(std::stod((*it)[1]) + 3.5, std::stod((*it)[2]) + 3.5);
  return out;
}

}  // namespace

TEST_F(CliTest, PlotBoundarySeparatesClasses) {
  ASSERT_EQ(run(iris_fit(path("iris.model"))).code, 0);
  const auto r = run({"plot", "-m", path("iris.model"), "-i", test::data_path("iris.csv"), "--label-col", "Species",
                      "--positive-label", "Iris-setosa", "--classes", "Iris-setosa,Iris-versicolor", "-o",
                      path("iris.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = slurp(path("iris.svg"));
  const auto model = from_text<double>(slurp(path("iris.model")));

  const PlotBox box{attr(svg, "data-xmin"), attr(svg, "data-xmax"), attr(svg, "data-ymin"), attr(svg, "data-ymax")};
  const PlotFrame frame = plot_frame(box, PlotOptions{});
  const Eigen::Vector2d a = frame.to_data({attr(svg, "x1"), attr(svg, "y1")});
  const Eigen::Vector2d b = frame.to_data({attr(svg, "x2"), attr(svg, "y2")});

  // Endpoints lie on the model's boundary up to the 1e-3 px rounding.
  const auto& h = model.hyperplane();
  const double pixel = (box.xmax - box.xmin) / (frame.right - frame.left);
  EXPECT_LT(std::abs(signed_displacement(h, a)), 2e-3 * pixel);
  EXPECT_LT(std::abs(signed_displacement(h, b)), 2e-3 * pixel);

  // The drawn line puts all class-0 markers on one side and all class-1
  // markers on the other.
  const auto side = [&](const Eigen::Vector2d& px) {
    const Eigen::Vector2d p = frame.to_data(px);
    const Eigen::Vector2d d = b - a;
    return d(0) * (p(1) - a(1)) - d(1) * (p(0) - a(0)) > 0;
  };
  const auto zeros = markers(svg, "class0");
  const auto ones = markers(svg, "class1");
  ASSERT_EQ(zeros.size(), 50u);
  ASSERT_EQ(ones.size(), 50u);
  const bool s0 = side(zeros.front());
  for (const auto& p : zeros) EXPECT_EQ(side(p), s0);
  for (const auto& p : ones) EXPECT_NE(side(p), s0);

  const std::regex diamond("<path d=\"M ");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), diamond), std::sregex_iterator()), 2);
  EXPECT_NE(svg.find(">SepalLengthCm</text>"), std::string::npos);
}

TEST_F(CliTest, PlotRefusesNon2DModel) {
  ASSERT_EQ(run({"fit", "-i", test::data_path("iris.csv"), "--label-col", "Species", "--positive-label", "Iris-setosa",
                 "--features", "SepalLengthCm,SepalWidthCm,PetalLengthCm", "--classes", "Iris-setosa,Iris-versicolor",
                 "-o", path("m3")})
                .code,
            0);
  const auto r = run({"plot", "-m", path("m3"), "-i", test::data_path("iris.csv"), "--label-col", "Species",
                      "--positive-label", "Iris-setosa", "-o", path("m3.svg")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("RefuseNon2D"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("m3.svg")));
}

TEST_F(CliTest, ConfigFileWithFlagPrecedence) {
  std::ofstream(path("run.ini")) << "[fit]\nepochs=3\nno-early-stop=true\n";
  auto args = std::vector<std::string>{"--config", path("run.ini"), "fit", "-i", test::data_path("iris.csv"),
                                       "--label-col", "Species", "--positive-label", "Iris-setosa", "--classes",
                                       "Iris-setosa,Iris-versicolor", "-o", path("m")};
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epochs run: 3\n"), std::string::npos) << r.out;

  args.insert(args.end(), {"--epochs", "5"});
  r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epochs run: 5\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, HelpAndBadArguments) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("fit"), std::string::npos);
  EXPECT_EQ(run({"fit", "--help"}).code, 0);
  EXPECT_EQ(run({}).code, cli::kExitInput);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInput);
  r = run({"fit", "-i", test::data_path("iris.csv"), "--label-col", "Species", "--eta", "fast", "-o", path("m")});
  EXPECT_EQ(r.code, cli::kExitInput);
  r = run({"fit", "-i", test::data_path("iris.csv"), "--label-col", "Species", "--positive-label", "Iris-setosa",
           "--eta", "-1", "-o", path("m")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("InvalidParams"), std::string::npos) << r.err;
}
