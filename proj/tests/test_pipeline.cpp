#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <unistd.h>
#include <sstream>

#include "csen/cli.hpp"
#include "csen/config.hpp"
#include "csen/dataset.hpp"
#include "csen/error.hpp"
#include "csen/experiment.hpp"
#include "csen/folds.hpp"
#include "csen/model.hpp"
#include "csen/model_io.hpp"
#include "csen/report.hpp"
#include "reference_tables.hpp"

using namespace csen;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("csen_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string drop_first_line(const std::string& s) { return s.substr(s.find('\n') + 1); }

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

ExperimentConfig quick(Method m) {
  ExperimentConfig cfg;
  cfg.method = m;
  cfg.atoms_per_class = 16;
  cfg.csen_train.epochs = 4;
  cfg.mlp_train.epochs = 4;
  cfg.mlp_hidden = {16, 8};
  cfg.k_folds = 3;
  return cfg;
}

}  // namespace

TEST_CASE("csv dataset parsing") {
  std::istringstream in("label,f0,f1,f2\ncat,1,2,3\ndog,4.5,-1e-3,0\n");
  const auto d = read_csv_dataset(in, "mem");
  CHECK(d.size() == 2);
  CHECK(d.dim() == 3);
  CHECK(d.class_names == std::vector<std::string>{"cat", "dog"});
  CHECK(d.labels == std::vector<int>{0, 1});
  CHECK(d.features(1, 1) == -1e-3);
}

TEST_CASE("csv dataset errors carry line numbers") {
  auto expect = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_csv_dataset(in, "mem");
      FAIL("expected a parse error for: " << text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  expect("name,f0\na,1\n", ":1");
  expect("label,f0,f1\na,1,2\nb,3\n", ":3");
  expect("label,f0\na,1\nb,nan\n", ":3");
  expect("label,f0\na,abc\n", ":2");
  expect("label,f0\n", "no samples");
}

TEST_CASE("dataset round trips") {
  TempDir tmp;
  const auto d = generate_synthetic(3, 7, 5, 2.0, 11);
  save_dataset(d, tmp / "d.bin", DatasetFormat::packed_binary);
  const auto b = load_dataset(tmp / "d.bin", DatasetFormat::packed_binary);
  CHECK(b.features == d.features);
  CHECK(b.labels == d.labels);
  CHECK(b.class_names == d.class_names);
  save_dataset(d, tmp / "d.csv", DatasetFormat::csv);
  const auto c = load_dataset(tmp / "d.csv", DatasetFormat::csv);
  CHECK(c.features == d.features);
  CHECK(c.labels == d.labels);
  CHECK(slurp(tmp / "d.bin").substr(0, 5) == "SPKD1");
}

TEST_CASE("packed dataset corruption is reported") {
  const auto d = generate_synthetic(2, 3, 4, 1.0, 1);
  std::ostringstream out;
  write_packed_dataset(d, out);
  std::string bytes = out.str();
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_packed_dataset(in, "mem"), Error);
  }
  {
    std::istringstream in(bytes.substr(0, bytes.size() - 5));
    try {
      read_packed_dataset(in, "mem");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
  }
}

TEST_CASE("study-shaped dataset loads with its class counts") {
  TempDir tmp;
  FeatureDataset d;
  d.labels = csen::testing::study_labels();
  d.class_names = csen::testing::kStudyClasses;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  d.features.resize(static_cast<Index>(d.labels.size()), 1024);
  for (Index i = 0; i < d.features.size(); ++i) d.features.data()[i] = n(rng);
  save_dataset(d, tmp / "study.bin", DatasetFormat::packed_binary);
  const auto back = load_dataset(tmp / "study.bin", DatasetFormat::packed_binary);
  CHECK(back.size() == 6286);
  CHECK(back.dim() == 1024);
  const auto counts = back.class_counts();
  CHECK(std::equal(counts.begin(), counts.end(), csen::testing::kClassSizes.begin()));
  CHECK(back.features == d.features);
}

TEST_CASE("synthetic generator") {
  const auto a = generate_synthetic(4, 10, 8, 3.0, 5), b = generate_synthetic(4, 10, 8, 3.0, 5);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.features != generate_synthetic(4, 10, 8, 3.0, 6).features);
  CHECK(a.class_counts() == std::vector<std::size_t>(4, 10));
  CHECK_THROWS_AS(generate_synthetic(5, 10, 4, 1.0, 0), Error);
  CHECK_THROWS_AS(generate_synthetic(1, 10, 4, 1.0, 0), Error);
  CHECK_THROWS_AS(generate_synthetic(2, 10, 4, -1.0, 0), Error);

  // class means sit at distance `separation` from the origin
  const auto big = generate_synthetic(3, 4000, 6, 5.0, 7);
  for (int c = 0; c < 3; ++c) {
    Vector mean = Vector::Zero(6);
    for (Index i = 0; i < big.size(); ++i)
      if (big.labels[static_cast<std::size_t>(i)] == c) mean += big.sample(i);
    mean /= 4000.0;
    CHECK(mean.norm() == doctest::Approx(5.0).epsilon(0.02));
  }
}

TEST_CASE("well separated synthetic data is easy for crc") {
  const auto data = generate_synthetic(4, 100, 64, 8.0, 21);
  auto cfg = quick(Method::crc);
  cfg.k_folds = 5;
  cfg.crc_normalized_residual = false;
  CHECK(run_experiment(data, cfg).cumulative_metrics.overall_accuracy >= 0.99);
  // the coefficient-normalized rule trails the plain one on this geometry
  cfg.crc_normalized_residual = true;
  CHECK(run_experiment(data, cfg).cumulative_metrics.overall_accuracy >= 0.95);
}

TEST_CASE("zero separation is at chance level") {
  const auto data = generate_synthetic(4, 100, 16, 0.0, 22);
  auto cfg = quick(Method::knn);
  cfg.k_folds = 5;
  const auto report = run_experiment(data, cfg);
  CHECK(report.cumulative_metrics.overall_accuracy < 0.40);
  CHECK(report.cumulative_metrics.overall_accuracy > 0.10);
}

TEST_CASE("config defaults") {
  const ExperimentConfig cfg;
  CHECK(cfg.pca_cr == 0.5);
  CHECK(cfg.atoms_per_class == 625);
  CHECK(cfg.lambda == 2e-12);
  CHECK(cfg.proxy_mode == ProxyMode::ridge);
  CHECK(cfg.csen_train.learning_rate == 1e-3);
  CHECK(cfg.csen_train.beta1 == 0.9);
  CHECK(cfg.csen_train.beta2 == 0.999);
  CHECK(cfg.csen_train.epochs == 15);
  CHECK(cfg.mlp_train.learning_rate == 1e-4);
  CHECK(cfg.mlp_train.epochs == 50);
  CHECK(cfg.mlp_hidden == std::vector<int>{512, 256, 128, 64});
  CHECK(cfg.k_folds == 5);
  CHECK(cfg.src_lambda_scale == 0.01);
  CHECK(cfg.crc_normalized_residual);
  CHECK(!cfg.src_normalized_residual);
}

TEST_CASE("config file parsing") {
  std::istringstream in(
      "# sweep\nmethod = csen2\npca_cr = 0.25\natoms_per_class=36\n"
      "csen_epochs = 7\nmlp_learning_rate = 0.01\nmlp_hidden = 32, 16\n"
      "knn_metric = cosine\ncrc_residual = plain\nseed = 99\n\n");
  const auto cfg = parse_config(in, "mem");
  CHECK(cfg.method == Method::csen2);
  CHECK(cfg.pca_cr == 0.25);
  CHECK(cfg.atoms_per_class == 36);
  CHECK(cfg.csen_train.epochs == 7);
  CHECK(cfg.mlp_train.learning_rate == 0.01);
  CHECK(cfg.mlp_hidden == std::vector<int>{32, 16});
  CHECK(cfg.knn_metric == DistanceMetric::cosine);
  CHECK(!cfg.crc_normalized_residual);
  CHECK(cfg.seed == 99);

  // to_text round trips through the parser
  std::istringstream again(cfg.to_text());
  CHECK(parse_config(again, "mem").to_text() == cfg.to_text());

  std::istringstream typo("atom_per_class = 3\n");
  CHECK_THROWS_AS(parse_config(typo, "mem"), Error);
  std::istringstream range("pca_cr = 1.5\n");
  CHECK_THROWS_AS(parse_config(range, "mem"), Error);
  std::istringstream junk("method\n");
  CHECK_THROWS_AS(parse_config(junk, "mem"), Error);
  CHECK_THROWS_AS(parse_method("svm"), Error);
}

TEST_CASE("model round trip reproduces predictions for every method") {
  const auto data = generate_synthetic(4, 40, 12, 5.0, 31);
  const auto probe = generate_synthetic(4, 3, 12, 5.0, 32);
  for (Method m : all_methods()) {
    const auto model = fit_model(data, quick(m), 3);
    std::stringstream buf;
    write_model(model, buf);
    const auto back = read_model(buf, "mem");
    CHECK(back.method == m);
    const auto before = predict_all(model, probe);
    const auto after = predict_all(back, probe);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(before[i].class_index == after[i].class_index);
      CHECK(before[i].scores == after[i].scores);
    }
    std::stringstream again;
    write_model(back, again);
    CHECK(again.str() == buf.str());
  }
}

TEST_CASE("csen1 artifact holds the full network") {
  const auto data = generate_synthetic(4, 630, 10, 5.0, 33);
  auto cfg = quick(Method::csen1);
  cfg.atoms_per_class = 625;
  cfg.csen_train.epochs = 1;
  const auto model = fit_model(data, cfg, 4);
  std::stringstream buf;
  write_model(model, buf);
  const auto back = read_model(buf, "mem");
  REQUIRE(back.network);
  CHECK(back.network->parameter_count() == 11089);
  REQUIRE(back.dictionary);
  CHECK(back.dictionary->D.cols() == 2500);
  CHECK(back.dictionary->layout.plane_rows() == 50);
}

TEST_CASE("corrupted model containers are rejected") {
  const auto data = generate_synthetic(3, 20, 6, 5.0, 34);
  const auto model = fit_model(data, quick(Method::crc), 5);
  std::stringstream buf;
  write_model(model, buf);
  const std::string bytes = buf.str();
  auto expect_persistence = [](const std::string& b) {
    std::istringstream in(b);
    try {
      read_model(in, "mem");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::persistence);
    }
  };
  std::string magic = bytes;
  magic[0] ^= 0x20;
  expect_persistence(magic);
  std::string version = bytes;
  version[8] = 9;
  expect_persistence(version);
  expect_persistence(bytes.substr(0, bytes.size() / 2));
  expect_persistence(bytes.substr(0, bytes.size() - 1));
  expect_persistence(bytes + "x");
}

TEST_CASE("report rendering") {
  EvaluationReport r;
  r.method = "csen2";
  r.class_names = csen::testing::kStudyClasses;
  r.cumulative = ConfusionMatrix(r.class_names, csen::testing::kCsen2Confusion);
  r.cumulative_metrics = compute_metrics(r.cumulative);
  r.fold_mean_metrics = r.cumulative_metrics;
  const auto text = render_report(r, ReportFormat::text, "T");
  for (const char* s : {"0.659", "0.646", "0.904", "0.985", "0.900", "0.852", "0.934", "0.957"})
    CHECK_MESSAGE(text.find(s) != std::string::npos, s);
  // accuracy, sensitivity, specificity column order
  const auto header = text.find("accuracy");
  CHECK(header < text.find("sensitivity"));
  CHECK(text.find("sensitivity") < text.find("specificity"));
  CHECK(text.rfind("# generated T\n", 0) == 0);

  ConfusionMatrix id({"a", "b"});
  id.add(0, 0, 4);
  id.add(1, 1, 2);
  EvaluationReport p;
  p.method = "crc";
  p.class_names = {"a", "b"};
  p.cumulative = id;
  p.cumulative_metrics = compute_metrics(id);
  p.fold_mean_metrics = p.cumulative_metrics;
  const auto t = render_report(p, ReportFormat::text, "T");
  CHECK(t.find("1.000        1.000        1.000") != std::string::npos);
  CHECK(t.find("0.") == std::string::npos);
}

TEST_CASE("csv report parses back to the same report") {
  const auto data = generate_synthetic(3, 15, 6, 4.0, 35);
  const auto r = run_experiment(data, quick(Method::knn));
  std::istringstream in(render_report(r, ReportFormat::csv, "2026-01-01T00:00:00Z"));
  const auto back = read_report_csv(in, "mem");
  CHECK(back.method == r.method);
  CHECK(back.seed == r.seed);
  CHECK(back.class_names == r.class_names);
  CHECK(back.cumulative == r.cumulative);
  CHECK(back.cumulative_metrics == r.cumulative_metrics);
  CHECK(back.fold_mean_metrics == r.fold_mean_metrics);
  REQUIRE(back.folds.size() == r.folds.size());
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    CHECK(back.folds[f].confusion == r.folds[f].confusion);
    CHECK(back.folds[f].metrics == r.folds[f].metrics);
    CHECK(back.folds[f].train_size == r.folds[f].train_size);
  }
}

TEST_CASE("report formats and unwritable paths") {
  CHECK(parse_report_format("json") == ReportFormat::json);
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
  CHECK(report_format_for_path("a/b.csv") == ReportFormat::csv);
  CHECK(report_format_for_path("r.json") == ReportFormat::json);
  CHECK(report_format_for_path("r.txt") == ReportFormat::text);
  EvaluationReport r;
  CHECK_THROWS_AS(write_report(r, "/nonexistent-dir/x/r.txt", ReportFormat::text), Error);
}

TEST_CASE("cli usage errors exit with 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  const auto r = cli({"evaluate", "--bogus"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(cli({"evaluate", "--data", "x.csv", "--method", "svm"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli data and numeric errors") {
  TempDir tmp;
  CHECK(cli({"evaluate", "--data", tmp / "missing.csv"}).code == 2);
  std::ofstream(tmp / "bad.csv") << "label,f0\na,1\nb,zz\n";
  const auto r = cli({"train", "--data", tmp / "bad.csv", "--output", tmp / "m.bin"});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.csv:3") != std::string::npos);
  // unit-variance integer features keep every intermediate exact, so a query
  // at the training mean projects to exactly zero
  std::ofstream(tmp / "train.csv") << "label,f0,f1\na,1,1\na,1,-1\nb,-1,1\nb,-1,-1\n";
  std::ofstream(tmp / "mean.csv") << "label,f0,f1\na,0,0\n";
  CHECK(cli({"train", "--data", tmp / "train.csv", "--method", "crc", "--output", tmp / "z.bin"}).code == 0);
  const auto r3 = cli({"classify", "--model", tmp / "z.bin", "--data", tmp / "mean.csv"});
  CHECK(r3.code == 3);
  CHECK(r3.err.find("numeric") != std::string::npos);
}

TEST_CASE("cli synth, train, classify and inspect") {
  TempDir tmp;
  REQUIRE(cli({"synth", "--classes", "4", "--per-class", "30", "--dim", "16", "--separation", "6",
               "--seed", "3", "--output", tmp / "d.csv"}).code == 0);
  const auto train = cli({"train", "--data", tmp / "d.csv", "--method", "csen2", "--set",
                          "atoms_per_class=16", "--set", "csen_epochs=30", "--seed", "4", "--output",
                          tmp / "m.bin"});
  REQUIRE_MESSAGE(train.code == 0, train.err);
  const auto before = slurp(tmp / "m.bin");
  const auto before_time = fs::last_write_time(tmp / "m.bin");

  const auto pred = cli({"classify", "--model", tmp / "m.bin", "--data", tmp / "d.csv"});
  REQUIRE(pred.code == 0);
  std::istringstream lines(pred.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "index,predicted,score_0,score_1,score_2,score_3");
  const auto data = load_dataset(tmp / "d.csv", DatasetFormat::csv);
  int rows = 0, correct = 0;
  while (std::getline(lines, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    const auto name = line.substr(a + 1, b - a - 1);
    correct += name == data.class_names[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(rows)])];
    ++rows;
  }
  CHECK(rows == 120);
  CHECK(correct == 120);
  CHECK(slurp(tmp / "m.bin") == before);
  CHECK(fs::last_write_time(tmp / "m.bin") == before_time);

  const auto info = cli({"inspect", "--model", tmp / "m.bin"});
  CHECK(info.code == 0);
  CHECK(info.out.find("method: csen2") != std::string::npos);
  CHECK(info.out.find("trainable parameters: 16297") != std::string::npos);
  CHECK(info.out.find("transposed_conv2d") != std::string::npos);

  CHECK(cli({"classify", "--model", tmp / "m.bin", "--data", tmp / "d.csv", "--output", tmp / "p.csv"}).code == 0);
  CHECK(slurp(tmp / "p.csv") == pred.out);
}

TEST_CASE("cli evaluate is reproducible apart from the timestamp line") {
  TempDir tmp;
  REQUIRE(cli({"synth", "--per-class", "20", "--dim", "10", "--seed", "8", "--output", tmp / "d.bin"}).code == 0);
  std::ofstream(tmp / "c.cfg") << "atoms_per_class = 9\ncsen_epochs = 2\nk_folds = 3\n";
  for (const char* ext : {".txt", ".csv", ".json"}) {
    const std::string a = tmp / (std::string("a") + ext), b = tmp / (std::string("b") + ext);
    CHECK(cli({"evaluate", "--data", tmp / "d.bin", "--config", tmp / "c.cfg", "--seed", "2", "--output", a}).code == 0);
    CHECK(cli({"evaluate", "--data", tmp / "d.bin", "--config", tmp / "c.cfg", "--seed", "2", "--threads", "2",
               "--output", b}).code == 0);
    CHECK(drop_first_line(slurp(a)) == drop_first_line(slurp(b)));
    CHECK(!drop_first_line(slurp(a)).empty());
  }
  CHECK(cli({"evaluate", "--data", tmp / "d.bin", "--config", tmp / "missing.cfg"}).code == 2);
}

TEST_CASE("cli benchmark") {
  TempDir tmp;
  REQUIRE(cli({"synth", "--per-class", "20", "--dim", "10", "--seed", "9", "--output", tmp / "d.bin"}).code == 0);
  const auto r = cli({"benchmark", "--data", tmp / "d.bin", "--methods", "crc,knn", "--set", "atoms_per_class=9"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("method,seconds,samples,ms_per_sample\n", 0) == 0);
  CHECK(r.out.find("\ncrc,") != std::string::npos);
  CHECK(r.out.find("\nknn,") != std::string::npos);
}
