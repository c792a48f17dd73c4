#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "riklr/error.hpp"
#include "riklr/experiment.hpp"
#include "riklr/random.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace riklr;

namespace {

Dataset parse(const std::string& text, CsvOptions opts = {}) {
  std::istringstream is(text);
  return parse_csv(is, opts);
}

Dataset blobs(std::uint64_t seed, Eigen::Index n, Eigen::Index d, double separation = 2.0) {
  std::mt19937_64 rng(seed);
  return riklr::testing::two_blobs(rng, n, d, separation);
}

Dataset with_labels(const std::vector<int>& labels) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(labels.size());
  d.features.resize(n, 1);
  d.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.features(i, 0) = static_cast<double>(i);
    d.labels[i] = labels[static_cast<std::size_t>(i)];
  }
  return d;
}

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.grid = {0.01, 1.0};
  s.repeats = 2;
  s.cv_folds = 3;
  s.threads = 2;
  return s;
}

}  // namespace

TEST_CASE("csv ingestion") {
  SUBCASE("three rows") {
    const Dataset d = parse("1.5,2,0\n-3,4e-1,1\n+0.25, 7 ,1\n");
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    CHECK(d.labels == Eigen::Vector3i(0, 1, 1));
    CHECK(d.features(2, 0) == 0.25);
    CHECK(d.features(1, 1) == 0.4);
  }
  SUBCASE("signed labels are normalized") {
    const Dataset d = parse("1,-1\n2,+1\n3,1\n4,-1\n");
    CHECK(d.labels == Eigen::Vector4i(0, 1, 1, 0));
  }
  SUBCASE("header, whitespace delimiter and leading label") {
    CsvOptions o;
    o.header = true;
    o.delimiter = ' ';
    o.label_column = 0;
    const Dataset d = parse("y a b\n1  2\t3\n0 4 5\n", o);
    CHECK(d.size() == 2);
    CHECK(d.features(0, 1) == 3.0);
    CHECK(d.labels == Eigen::Vector2i(1, 0));
  }
  SUBCASE("label map") {
    CsvOptions o;
    o.label_map = {{"N", 0}, {"O", 1}};
    const Dataset d = parse("0.1,N\n0.2,O\n0.3,\"N\"\n", o);
    CHECK(d.labels == Eigen::Vector3i(0, 1, 0));
  }
  SUBCASE("blank lines are skipped and row order is kept") {
    const Dataset d = parse("3,1\n\n1,0\n2,1\n");
    CHECK(d.features.col(0) == Eigen::Vector3d(3, 1, 2));
  }
}

TEST_CASE("csv ingestion errors") {
  SUBCASE("non-numeric cell reports row and column") {
    try {
      parse("1,2,0\n1,abc,1\n");
      FAIL("expected a parse error");
    } catch (const parse_error& e) {
      CHECK(e.row() == 2);
      CHECK(e.column() == 2);
      CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
    }
  }
  SUBCASE("missing label column") {
    CsvOptions o;
    o.label_column = 5;
    CHECK_THROWS_AS(parse("1,2,0\n1,2,1\n", o), config_error);
  }
  SUBCASE("labels outside the accepted set") {
    CHECK_THROWS_AS(parse("1,2\n1,3\n"), input_error);
    CHECK_THROWS_AS(parse("1,0.5\n1,1\n"), input_error);
  }
  SUBCASE("ragged rows") { CHECK_THROWS_AS(parse("1,2,0\n1,1\n"), input_error); }
  SUBCASE("missing file names the path") {
    try {
      ingest_csv("/nonexistent/file.csv", {});
      FAIL("expected an input error");
    } catch (const input_error& e) {
      CHECK(std::string(e.what()).find("/nonexistent/file.csv") != std::string::npos);
    }
  }
}

TEST_CASE("csv ingestion from a file") {
  const auto path = std::filesystem::temp_directory_path() / "riklr_ingest_test.csv";
  {
    std::ofstream os(path);
    os << "a,b,label\n0.5,1,1\n1.5,2,0\n";
  }
  CsvOptions o;
  o.header = true;
  const Dataset d = ingest_csv(path.string(), o);
  CHECK(d.size() == 2);
  CHECK(d.labels == Eigen::Vector2i(1, 0));
  std::filesystem::remove(path);
}

TEST_CASE("half split sizes") {
  for (Eigen::Index n : {4, 5, 6, 7, 100, 306, 267}) {
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);
    const Split s = half_split(with_labels(labels), 9);
    CHECK(s.train.size() == (n + 1) / 2);
    CHECK(s.test.size() == n / 2);
    CHECK(s.stratified);
    std::set<Eigen::Index> all(s.train_rows.begin(), s.train_rows.end());
    all.insert(s.test_rows.begin(), s.test_rows.end());
    CHECK(static_cast<Eigen::Index>(all.size()) == n);
    CHECK(s.train.positives() > 0);
    CHECK(s.test.positives() > 0);
    CHECK(std::abs(s.train.positives() - s.test.positives()) <= 1);
  }
  CHECK_THROWS_AS(half_split(with_labels({0, 1, 1}), 1), input_error);
}

TEST_CASE("half split determinism and seed dependence") {
  const Dataset d = blobs(1, 50, 2);
  const Split a = half_split(d, 42), b = half_split(d, 42), c = half_split(d, 43);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
  CHECK(a.train_rows != c.train_rows);
}

TEST_CASE("half split falls back when a class has one sample") {
  const Split s = half_split(with_labels({0, 0, 0, 0, 1}), 3);
  CHECK_FALSE(s.stratified);
  CHECK(s.train.size() == 3);
  CHECK(s.test.size() == 2);
}

TEST_CASE("stratified folds") {
  std::vector<int> labels;
  for (int i = 0; i < 53; ++i) labels.push_back(i % 4 == 0 ? 1 : 0);
  const Dataset d = with_labels(labels);
  const auto folds = stratified_folds(d.labels, 5, 7);
  std::vector<int> size(5, 0), pos(5, 0);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    ++size[static_cast<std::size_t>(folds[i])];
    pos[static_cast<std::size_t>(folds[i])] += labels[i];
  }
  CHECK(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
  CHECK(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1);
  CHECK(stratified_folds(d.labels, 5, 7) == folds);
  CHECK_THROWS_AS(stratified_folds(d.labels, 1, 7), input_error);
}

TEST_CASE("seed mixing and portable shuffle") {
  CHECK(mix_seed(0, 1) != mix_seed(0, 2));
  CHECK(mix_seed(5, 1) == mix_seed(5, 1));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = uniform_below(rng, 7);
    REQUIRE(v < 7);
  }
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  std::mt19937_64 r1(3), r2(3);
  std::vector<int> a = v, b = v;
  portable_shuffle(a, r1);
  portable_shuffle(b, r2);
  CHECK(a == b);
  std::sort(a.begin(), a.end());
  CHECK(a == v);
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.grid == std::vector<double>{0.0001, 0.001, 0.01, 0.1, 1.0, 5.0, 10.0});
  CHECK(s.repeats == 10);
  CHECK(s.cv_folds == 5);
  s.grid.clear();
  CHECK_THROWS_AS(s.validate(), config_error);
  s = ExperimentSpec{};
  s.grid = {0.1, -1.0};
  CHECK_THROWS_AS(s.validate(), config_error);
  s = ExperimentSpec{};
  s.repeats = 0;
  CHECK_THROWS_AS(s.validate(), config_error);
  s = ExperimentSpec{};
  s.cv_folds = 1;
  CHECK_THROWS_AS(s.validate(), config_error);
}

TEST_CASE("grid shapes per variant") {
  const ExperimentSpec s;
  CHECK(make_grid(s, Variant::iklr).size() == 7);
  CHECK(make_grid(s, Variant::l1_riklr).size() == 49);
  CHECK(make_grid(s, Variant::klr).size() == 49);
  CHECK(make_grid(s, Variant::l1_rklr).size() == 343);
  for (const auto& p : make_grid(s, Variant::iklr)) {
    CHECK(p.lambda1 == 0.0);
    CHECK_FALSE(p.sigma.has_value());
  }
  const ModelSpec ms = model_spec_for(s, Variant::l1_rklr, {0.1, 0.01, 5.0}, 4);
  CHECK(std::get<RbfKernel>(ms.kernel).sigma == 5.0);
  CHECK(ms.lambda == 0.1);
  CHECK(ms.lambda1 == 0.01);
  CHECK(std::get<Tl1Kernel>(model_spec_for(s, Variant::iklr, {0.1, 0.0, {}}, 9).kernel).eta ==
        doctest::Approx(6.3));
}

TEST_CASE("cv with a single grid point") {
  ExperimentSpec s = small_spec();
  s.grid = {0.1};
  const CvResult r = cv_select(s, Variant::l1_riklr, blobs(2, 30, 2), 11);
  CHECK(r.best.lambda == 0.1);
  CHECK(r.best.lambda1 == 0.1);
  CHECK(r.scores.size() == 1);
  CHECK(r.audit.fits == 3);
}

TEST_CASE("cv ties go to the larger lambda1, then lambda") {
  ExperimentSpec s = small_spec();
  s.grid = {1e-4, 1e-3};
  const CvResult r = cv_select(s, Variant::l1_riklr, blobs(3, 30, 2, 12.0), 5);
  for (const auto& g : r.scores) CHECK(g.mean_accuracy == r.scores.front().mean_accuracy);
  CHECK(r.best.lambda1 == 1e-3);
  CHECK(r.best.lambda == 1e-3);

  ExperimentSpec rbf = small_spec();
  rbf.grid = {0.5, 1.0};
  const CvResult rr = cv_select(rbf, Variant::klr, blobs(3, 30, 2, 12.0), 5);
  for (const auto& g : rr.scores) CHECK(g.mean_accuracy == rr.scores.front().mean_accuracy);
  CHECK(rr.best.lambda == 1.0);
  CHECK(*rr.best.sigma == 1.0);
}

TEST_CASE("cv picks the most accurate point") {
  ExperimentSpec s = small_spec();
  s.grid = {1e-3, 10.0};
  const CvResult r = cv_select(s, Variant::l1_riklr, blobs(4, 40, 2, 3.0), 5);
  double best = 0.0;
  for (const auto& g : r.scores) best = std::max(best, g.mean_accuracy);
  CHECK(r.best_accuracy == best);
  CHECK(best > 0.5);
}

TEST_CASE("cv fails when every grid point fails") {
  // a single positive sample leaves one training fold with one class
  std::vector<int> labels(12, 0);
  labels[3] = 1;
  Dataset d = with_labels(labels);
  ExperimentSpec s = small_spec();
  CHECK_THROWS_AS(cv_select(s, Variant::iklr, d, 1), numerical_error);
}

TEST_CASE("cv results do not depend on the worker count") {
  ExperimentSpec a = small_spec(), b = small_spec();
  a.threads = 1;
  b.threads = 4;
  const Dataset d = blobs(5, 30, 2, 1.0);
  const CvResult ra = cv_select(a, Variant::l1_rklr, d, 3), rb = cv_select(b, Variant::l1_rklr, d, 3);
  REQUIRE(ra.scores.size() == rb.scores.size());
  for (std::size_t i = 0; i < ra.scores.size(); ++i) CHECK(ra.scores[i].mean_accuracy == rb.scores[i].mean_accuracy);
}

TEST_CASE("mean and sample std") {
  CHECK(mean({}) == 0.0);
  CHECK(sample_std({0.7}) == 0.0);
  CHECK(mean({1, 2, 3, 4}) == 2.5);
  CHECK(sample_std({1, 2, 3, 4}) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("run experiment") {
  const Dataset d = blobs(6, 40, 2, 2.0);
  ExperimentSpec s = small_spec();
  const ExperimentReport r = run_experiment(s, d);
  CHECK(r.n == 40);
  CHECK(r.d == 2);
  CHECK(r.tl1_eta == doctest::Approx(1.4));
  CHECK(r.tl1_stats.n == 40);
  CHECK(r.variants.size() == 4);
  for (const auto& v : r.variants) {
    CHECK(v.runs.size() == 2);
    CHECK(v.runs_ok == 2);
    CHECK(v.std_accuracy >= 0.0);
    for (const auto& run : v.runs) {
      CHECK(run.accuracy >= 0.0);
      CHECK(run.accuracy <= 1.0);
      CHECK(run.selected <= run.train_size);
      CHECK(run.train_size == 20);
      if (!has_l1_penalty(v.variant)) CHECK(run.selected == 20);
    }
    CHECK(v.audit.fits > 0);
    CHECK(v.audit.min_descent_slack >= -1e-12);
  }
  CHECK(r.variants[0].kernel == KernelKind::rbf);
  CHECK(r.variants[2].kernel == KernelKind::tl1);
}

TEST_CASE("single repeat has zero spread") {
  ExperimentSpec s = small_spec();
  s.repeats = 1;
  s.variants = {Variant::iklr};
  const ExperimentReport r = run_experiment(s, blobs(7, 30, 2));
  CHECK(r.variants[0].std_accuracy == 0.0);
}

TEST_CASE("majority baseline") {
  std::vector<int> labels(40, 0);
  for (int i = 0; i < 10; ++i) labels[static_cast<std::size_t>(i)] = 1;
  Dataset d = with_labels(labels);
  ExperimentSpec s = small_spec();
  s.variants = {Variant::iklr};
  s.repeats = 3;
  const ExperimentReport r = run_experiment(s, d);
  CHECK(r.majority_baseline == doctest::Approx(0.75));
}

TEST_CASE("experiment reports are deterministic") {
  const Dataset d = blobs(8, 30, 3, 1.5);
  ExperimentSpec a = small_spec(), b = small_spec();
  b.threads = 1;
  const std::string ja = report_to_json(run_experiment(a, d));
  const std::string jb = report_to_json(run_experiment(b, d));
  CHECK(ja == jb);
  std::ostringstream ta, tb;
  write_report_text(ta, {run_experiment(a, d)});
  write_report_text(tb, {run_experiment(a, d)});
  CHECK(ta.str() == tb.str());
  CHECK(ta.str().find("l1-riklr") != std::string::npos);
  CHECK(ja.find("\"format\": \"riklr-report\"") != std::string::npos);
}

TEST_CASE("standardization uses training-half statistics") {
  Dataset d = blobs(9, 30, 2, 3.0);
  d.features.col(1) *= 1000.0;
  ExperimentSpec s = small_spec();
  s.standardize = true;
  s.variants = {Variant::iklr};
  s.repeats = 1;
  const ExperimentReport r = run_experiment(s, d);
  CHECK(r.standardized);
  CHECK(r.variants[0].runs_ok == 1);
}

TEST_CASE("experiment spec errors propagate") {
  ExperimentSpec s = small_spec();
  s.grid.clear();
  CHECK_THROWS_AS(run_experiment(s, blobs(10, 20, 2)), config_error);
  s = small_spec();
  s.data_path = "/nonexistent/data.csv";
  CHECK_THROWS_AS(run_experiment(s), input_error);
}
