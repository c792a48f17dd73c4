#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli.hpp"
#include "riklr/error.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace riklr;
using riklr::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

// Two well-separated clusters, labels in the last column.
void write_blobs(const std::string& file, int n, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  std::ofstream os(file);
  os.precision(17);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    os << normal(rng) + (y ? separation : 0.0) << ',' << normal(rng) << ',' << y << '\n';
  }
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  auto c = cli::default_config();
  CHECK(c["model"]["tau"] == 1e-6);
  CHECK(c["solver"]["max_outer"] == 500);
  CHECK(c["experiment"]["grid"].size() == 7);
  cli::apply_override(c, "model.lambda=0.5");
  CHECK(c["model"]["lambda"] == 0.5);
  cli::apply_override(c, "data.path=some file.csv");
  CHECK(c["data"]["path"] == "some file.csv");
  cli::apply_override(c, "experiment.grid=[1,2]");
  CHECK(c["experiment"]["grid"].size() == 2);
  cli::apply_override(c, "model.eta=null");
  CHECK(c["model"]["eta"].is_null());
  cli::apply_override(c, "data.label_map={\"N\":0,\"O\":1}");
  CHECK(c["data"]["label_map"]["O"] == 1);
  CHECK_THROWS_AS(cli::apply_override(c, "model.lambda=abc"), config_error);
  CHECK_THROWS_AS(cli::apply_override(c, "solver.max_outer=2.5"), config_error);
  CHECK_THROWS_AS(cli::apply_override(c, "model.nope=1"), config_error);
  CHECK_THROWS_AS(cli::apply_override(c, "lambda"), config_error);
  CHECK_THROWS_AS(cli::apply_override(c, "data.header=1"), config_error);
  CHECK_THROWS_AS(cli::apply_override(c, "data.label_map={\"a\":2}"), config_error);
  CHECK_THROWS_AS(cli::merge_config(c, nlohmann::json::parse(R"({"bogus":{}})")), config_error);
  CHECK_THROWS_AS(cli::merge_config(c, nlohmann::json::parse(R"({"model":{"lambda":"x"}})")), config_error);
}

TEST_CASE("config translation") {
  auto c = cli::default_config();
  cli::apply_override(c, "model.variant=klr");
  cli::apply_override(c, "model.sigma=0.5");
  ModelSpec m = cli::model_spec(c, 4);
  CHECK(std::get<RbfKernel>(m.kernel).sigma == 0.5);
  cli::apply_override(c, "model.kernel=tl1");
  m = cli::model_spec(c, 4);
  CHECK(std::get<Tl1Kernel>(m.kernel).eta == doctest::Approx(2.8));
  cli::apply_override(c, "model.eta=3");
  CHECK(std::get<Tl1Kernel>(cli::model_spec(c, 4).kernel).eta == 3.0);
  cli::apply_override(c, "model.kernel=poly");
  CHECK_THROWS_AS(cli::model_spec(c, 4), config_error);

  auto e = cli::default_config();
  cli::apply_override(e, "data.path=/x/haberman.data");
  cli::apply_override(e, "experiment.variants=[\"iklr\",\"l1-riklr\"]");
  cli::apply_override(e, "experiment.kernel_overrides={\"iklr\":\"rbf\"}");
  cli::apply_override(e, "data.delimiter=whitespace");
  const ExperimentSpec spec = cli::experiment_spec(e);
  CHECK(spec.name == "haberman");
  CHECK(spec.variants.size() == 2);
  CHECK(spec.kernel_kind(Variant::iklr) == KernelKind::rbf);
  CHECK(spec.csv.delimiter == ' ');
  cli::apply_override(e, "experiment.grid=[]");
  CHECK_THROWS_AS(cli::experiment_spec(e), config_error);
}

TEST_CASE("config file paths resolve against the file") {
  TempDir dir("riklr_cli_cfg");
  fs::create_directories(dir.path / "sub");
  {
    std::ofstream os(dir / "sub/c.json");
    os << R"({"data": {"path": "data.csv"}, "model": {"lambda": 0.25}})";
  }
  const auto c = cli::build_config(dir / "sub/c.json", {"model.lambda1=0.5"});
  CHECK(c["data"]["path"] == (dir.path / "sub" / "data.csv").lexically_normal().string());
  CHECK(c["model"]["lambda"] == 0.25);
  CHECK(c["model"]["lambda1"] == 0.5);
  CHECK_THROWS_AS(cli::build_config(dir / "missing.json", {}), input_error);
  {
    std::ofstream os(dir / "bad.json");
    os << "{ not json";
  }
  CHECK_THROWS_AS(cli::build_config(dir / "bad.json", {}), config_error);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"predict"}).code == 1);  // --model is required
  CHECK(run({"kernel-stats", "--kernel", "poly"}).code == 1);
}

TEST_CASE("train, predict and eval") {
  TempDir dir("riklr_cli_train");
  write_blobs(dir / "train.csv", 30, 4.0, 1);
  write_blobs(dir / "test.csv", 20, 4.0, 2);
  const std::vector<std::string> base = {"train", "-d", dir / "train.csv", "--model-out", dir / "m.json",
                                         "--trace-out", dir / "t.csv", "-s", "model.lambda=1", "-s",
                                         "model.lambda1=0.001", "-s", "model.kernel=rbf"};
  const Result r = run(base);
  CHECK_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("status: converged") != std::string::npos);
  CHECK(r.out.find("active_coefficients:") != std::string::npos);
  CHECK(fs::exists(dir / "m.json"));
  CHECK(slurp(dir / "t.csv").rfind("k,f,f_decrease", 0) == 0);

  SUBCASE("outputs are reproducible") {
    const std::string model = slurp(dir / "m.json"), trace = slurp(dir / "t.csv");
    CHECK(run(base).code == 0);
    CHECK(slurp(dir / "m.json") == model);
    CHECK(slurp(dir / "t.csv") == trace);
  }
  SUBCASE("eval") {
    const Result e = run({"eval", "-m", dir / "m.json", "-d", dir / "test.csv"});
    CHECK(e.code == 0);
    CHECK(e.out.find("accuracy: 1\n") != std::string::npos);
  }
  SUBCASE("predict to stdout and file") {
    const Result p = run({"predict", "-m", dir / "m.json", "-d", dir / "test.csv", "--labelled"});
    CHECK(p.code == 0);
    CHECK(p.out.rfind("probability,label\n", 0) == 0);
    CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 21);
    const Result f = run({"predict", "-m", dir / "m.json", "-d", dir / "test.csv", "--labelled", "-o", dir / "p.csv"});
    CHECK(f.code == 0);
    CHECK(slurp(dir / "p.csv") == p.out);
  }
  SUBCASE("predict on a feature-only file") {
    {
      std::ofstream os(dir / "features.csv");
      os << "0,0\n4,0\n";
    }
    const Result p = run({"predict", "-m", dir / "m.json", "-d", dir / "features.csv"});
    CHECK(p.code == 0);
    CHECK(p.out.find(",0\n") != std::string::npos);
    CHECK(p.out.find(",1\n") != std::string::npos);
  }
  SUBCASE("test accuracy from data.test_path") {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"-s", "data.test_path=" + (dir / "test.csv")});
    const Result t = run(args);
    CHECK(t.out.find("test_accuracy: 1\n") != std::string::npos);
  }
}

TEST_CASE("train exit codes") {
  TempDir dir("riklr_cli_exit");
  write_blobs(dir / "train.csv", 30, 1.0, 3);

  const Result missing = run({"train", "-d", dir / "absent.csv", "--model-out", dir / "m.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find(dir / "absent.csv") != std::string::npos);

  const Result capped = run({"train", "-d", dir / "train.csv", "--model-out", dir / "m.json", "--trace-out",
                             dir / "t.csv", "-s", "solver.max_outer=1", "-s", "solver.epsilon_outer=1e-12",
                             "-s", "model.lambda=0.001"});
  CHECK(capped.code == 2);
  CHECK(capped.out.find("status: max_iterations") != std::string::npos);
  CHECK(fs::exists(dir / "m.json"));

  const Result bad_type = run({"train", "-d", dir / "train.csv", "-s", "solver.max_outer=many"});
  CHECK(bad_type.code == 1);
  const Result standardize = run({"train", "-d", dir / "train.csv", "-s", "data.standardize=true"});
  CHECK(standardize.code == 1);
  const Result bad_model = run({"eval", "-m", dir / "absent.json", "-d", dir / "train.csv"});
  CHECK(bad_model.code == 1);
}

TEST_CASE("kernel stats") {
  TempDir dir("riklr_cli_stats");
  {
    // two points at l1 distance 1 in three dimensions: K = [[2.1, 1.1], [1.1, 2.1]]
    std::ofstream os(dir / "two.csv");
    os << "0,0,0,0\n0.5,0.25,0.25,1\n";
  }
  const Result r = run({"kernel-stats", "-d", dir / "two.csv"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["d"] == 3);
  CHECK(j["n"] == 2);
  CHECK(j["mu_max"].get<double>() == doctest::Approx(3.2).epsilon(1e-14));
  CHECK(j["mu_min"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(j["dataset"] == "two");

  write_blobs(dir / "blobs.csv", 30, 1.0, 4);
  const Result rbf = run({"kernel-stats", "-d", dir / "blobs.csv", "--kernel", "rbf", "-s", "model.sigma=2"});
  REQUIRE(rbf.code == 0);
  CHECK(nlohmann::json::parse(rbf.out)["mu_min"].get<double>() >= -1e-12);
  CHECK(run({"kernel-stats", "-d", dir / "blobs.csv"}).out == run({"kernel-stats", "-d", dir / "blobs.csv"}).out);
}

TEST_CASE("bench") {
  TempDir dir("riklr_cli_bench");
  write_blobs(dir / "data.csv", 24, 2.0, 5);
  {
    std::ofstream os(dir / "bench.json");
    os << R"({"data": {"path": "data.csv", "name": "tiny"},
              "experiment": {"variants": ["l1-riklr"], "grid": [0.1], "repeats": 1, "cv_folds": 3}})";
  }
  const Result r = run({"bench", "-c", dir / "bench.json", "-o", dir / "out"});
  CHECK_MESSAGE(r.code == 0, r.err);
  const auto report = nlohmann::json::parse(slurp(dir / "out/report.json"));
  CHECK(report["format"] == "riklr-bench");
  REQUIRE(report["reports"].size() == 1);
  CHECK(report["reports"][0]["dataset"] == "tiny");
  CHECK(report["reports"][0]["variants"].size() == 1);
  const std::string text = slurp(dir / "out/report.txt");
  CHECK(text.find("tiny") != std::string::npos);

  SUBCASE("reports are reproducible") {
    const std::string json = slurp(dir / "out/report.json");
    CHECK(run({"bench", "-c", dir / "bench.json", "-o", dir / "out"}).code == 0);
    CHECK(slurp(dir / "out/report.json") == json);
    CHECK(slurp(dir / "out/report.txt") == text);
  }
  SUBCASE("empty grid") {
    const Result e = run({"bench", "-c", dir / "bench.json", "-o", dir / "out2", "-s", "experiment.grid=[]"});
    CHECK(e.code == 1);
    CHECK_FALSE(fs::exists(dir / "out2/report.json"));
  }
  SUBCASE("every run failing") {
    {
      std::ofstream os(dir / "one_class.csv");
      for (int i = 0; i < 10; ++i) os << i << ",0\n";
    }
    const Result f = run({"bench", "-c", dir / "bench.json", "-o", dir / "out3", "-s",
                          "data.path=" + (dir / "one_class.csv")});
    CHECK(f.code == 1);
    CHECK(f.err.find("every run failed") != std::string::npos);
  }
}
