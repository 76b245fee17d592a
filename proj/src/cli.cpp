#include "csen/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csen/config.hpp"
#include "csen/dataset.hpp"
#include "csen/error.hpp"
#include "csen/experiment.hpp"
#include "csen/model.hpp"
#include "csen/model_io.hpp"
#include "csen/report.hpp"

namespace csen {

namespace {

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  bool threads_set = false;
  std::string output;
};

std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ExperimentConfig resolve_config(const GlobalOptions& g, const std::string& method) {
  ExperimentConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos, ErrorKind::usage, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!method.empty()) cfg.method = parse_method(method);
  if (g.seed_set) cfg.seed = g.seed;
  if (g.threads_set) cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

FeatureDataset load_any(const std::string& path, const std::string& format) {
  DatasetFormat f = format_for_path(path);
  if (format == "csv") f = DatasetFormat::csv;
  else if (format == "binary") f = DatasetFormat::packed_binary;
  return load_dataset(path, f);
}

void write_predictions(std::ostream& out, const ModelArtifact& model,
                       const std::vector<ClassDecision>& decisions) {
  out << "index,predicted";
  for (int c = 0; c < model.classes(); ++c) out << ",score_" << c;
  out << '\n';
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    out << i << ',' << model.class_names[static_cast<std::size_t>(d.class_index)];
    for (Index c = 0; c < d.scores.size(); ++c) out << ',' << exact(d.scores[c]);
    out << '\n';
  }
}

void inspect_model(std::ostream& out, const ModelArtifact& m) {
  out << "method: " << to_string(m.method) << '\n';
  out << "classes: " << m.classes();
  for (const auto& n : m.class_names) out << ' ' << n;
  out << '\n';
  out << "input dimension: " << m.input_dim() << '\n';
  out << "projection: " << m.projection.reduced_dim() << "x" << m.projection.input_dim() << '\n';
  if (m.dictionary) {
    const auto& d = *m.dictionary;
    out << "dictionary Phi: " << d.phi.rows() << "x" << d.phi.cols() << '\n';
    out << "dictionary D: " << d.D.rows() << "x" << d.D.cols() << '\n';
    out << "denoiser B: " << d.B.rows() << "x" << d.B.cols() << '\n';
    out << "lambda: " << exact(d.lambda) << '\n';
    out << "layout: " << d.layout.block_rows() << "x" << d.layout.block_cols() << " blocks in a "
        << d.layout.grid_rows() << "x" << d.layout.grid_cols() << " grid, plane "
        << d.layout.plane_rows() << "x" << d.layout.plane_cols() << '\n';
  }
  if (m.reference) {
    out << "reference set: " << m.reference->points.rows() << "x" << m.reference->points.cols()
        << " (k=" << m.settings.knn_k << ", " << to_string(m.settings.knn_metric) << ")\n";
  }
  if (m.network) {
    const auto& net = *m.network;
    out << "network: " << net.name << " input " << nn::to_string(net.input) << '\n';
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const auto& l = net.layers[i];
      out << "  " << i << ": " << nn::to_string(l.spec.kind);
      if (l.spec.kind == nn::LayerKind::conv2d || l.spec.kind == nn::LayerKind::transposed_conv2d)
        out << ' ' << l.spec.kernel << "x" << l.spec.kernel;
      out << "  " << nn::to_string(l.input) << " -> " << nn::to_string(l.output);
      if (l.parameter_count() > 0) out << "  params " << l.parameter_count();
      out << '\n';
    }
    out << "head: " << (net.head.kind == nn::HeadKind::class_average ? "class average" : "identity")
        << '\n';
    out << "trainable parameters: " << net.parameter_count() << '\n';
  }
  if (!m.training_loss.empty()) {
    out << "training loss:";
    for (double v : m.training_loss) out << ' ' << exact(v);
    out << '\n';
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convolutional support estimation and representation-based classifiers", "csen"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Key = value experiment configuration file");
  app.add_option("--set", g.overrides, "Override one configuration key (key=value)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  auto* threads_opt = app.add_option("--threads", g.threads, "Fold-level worker threads")
                          ->check(CLI::PositiveNumber);
  app.add_option("--output", g.output, "Output path");

  std::vector<std::string> method_names;
  for (Method m : all_methods()) method_names.emplace_back(to_string(m));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic Gaussian-cluster dataset");
  int syn_classes = 4;
  long syn_per_class = 200;
  long syn_dim = 64;
  double syn_sep = 6.0;
  std::string syn_format;
  synth->add_option("--classes", syn_classes, "Number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--per-class", syn_per_class, "Samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--dim", syn_dim, "Feature dimension")->check(CLI::PositiveNumber);
  synth->add_option("--separation", syn_sep, "Distance of class means from the origin");
  synth->add_option("--format", syn_format, "csv or binary (default: from extension)")
      ->check(CLI::IsMember({"csv", "binary"}));

  // train
  auto* train = app.add_subcommand("train", "Fit one method on a dataset and save the model");
  std::string data_path, data_format, method;
  train->add_option("--data", data_path, "Dataset path")->required();
  train->add_option("--data-format", data_format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));
  train->add_option("--method", method, "Method")->check(CLI::IsMember(method_names));

  // classify
  auto* classify = app.add_subcommand("classify", "Predict classes with a saved model");
  std::string model_path;
  classify->add_option("--model", model_path, "Model path")->required();
  classify->add_option("--data", data_path, "Dataset path")->required();
  classify->add_option("--data-format", data_format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Stratified cross-validated evaluation");
  std::string report_format;
  evaluate->add_option("--data", data_path, "Dataset path")->required();
  evaluate->add_option("--data-format", data_format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));
  evaluate->add_option("--method", method, "Method")->check(CLI::IsMember(method_names));
  evaluate->add_option("--format", report_format, "text, csv or json (default: from extension)")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Inference timing on one cross-validation split");
  std::vector<std::string> bench_methods{"csen1", "crc"};
  bench->add_option("--data", data_path, "Dataset path")->required();
  bench->add_option("--data-format", data_format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));
  bench->add_option("--methods", bench_methods, "Methods to time")
      ->delimiter(',')
      ->check(CLI::IsMember(method_names));

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print model shapes and parameter counts");
  inspect->add_option("--model", model_path, "Model path")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  g.seed_set = seed_opt->count() > 0;
  g.threads_set = threads_opt->count() > 0;

  try {
    if (synth->parsed()) {
      require(!g.output.empty(), ErrorKind::usage, "synth needs --output");
      const auto data = generate_synthetic(syn_classes, syn_per_class, syn_dim, syn_sep, g.seed);
      DatasetFormat f = format_for_path(g.output);
      if (syn_format == "csv") f = DatasetFormat::csv;
      else if (syn_format == "binary") f = DatasetFormat::packed_binary;
      save_dataset(data, g.output, f);
      out << "wrote " << data.size() << " samples (" << data.class_count() << " classes, d="
          << data.dim() << ") to " << g.output << '\n';
    } else if (train->parsed()) {
      require(!g.output.empty(), ErrorKind::usage, "train needs --output");
      const auto cfg = resolve_config(g, method);
      const auto data = load_any(data_path, data_format);
      const auto model = fit_model(data, cfg, cfg.seed);
      save_model(model, g.output);
      out << "trained " << to_string(model.method) << " on " << data.size() << " samples; model written to "
          << g.output << '\n';
    } else if (classify->parsed()) {
      const auto model = load_model(model_path);
      const auto data = load_any(data_path, data_format);
      const auto decisions = predict_all(model, data);
      if (g.output.empty()) {
        write_predictions(out, model, decisions);
      } else {
        std::ofstream file(g.output, std::ios::trunc);
        require(static_cast<bool>(file), ErrorKind::data, "cannot write " + g.output);
        write_predictions(file, model, decisions);
        out << "wrote " << decisions.size() << " predictions to " << g.output << '\n';
      }
    } else if (evaluate->parsed()) {
      const auto cfg = resolve_config(g, method);
      const auto data = load_any(data_path, data_format);
      const auto report = run_experiment(data, cfg);
      if (g.output.empty()) {
        const auto fmt = report_format.empty() ? ReportFormat::text : parse_report_format(report_format);
        out << render_report(report, fmt, utc_timestamp());
      } else {
        const auto fmt = report_format.empty() ? report_format_for_path(g.output)
                                               : parse_report_format(report_format);
        write_report(report, g.output, fmt);
        char acc[32];
        std::snprintf(acc, sizeof acc, "%.4f", report.cumulative_metrics.overall_accuracy);
        out << report.method << ": overall accuracy " << acc << "; report written to " << g.output
            << '\n';
      }
    } else if (bench->parsed()) {
      const auto cfg = resolve_config(g, "");
      const auto data = load_any(data_path, data_format);
      const auto plan = stratified_kfold(data.labels, cfg.k_folds, cfg.seed);
      const auto train_set = data.subset(plan.train[0]);
      const auto test_set = data.subset(plan.test[0]);
      std::vector<Method> methods;
      for (const auto& m : bench_methods) methods.push_back(parse_method(m));
      const auto entries = benchmark_inference(train_set, test_set, methods, cfg);
      std::ostringstream table;
      table << "method,seconds,samples,ms_per_sample\n";
      for (const auto& e : entries) {
        const double per = e.samples ? 1e3 * e.seconds / static_cast<double>(e.samples) : 0.0;
        table << to_string(e.method) << ',' << exact(e.seconds) << ',' << e.samples << ','
              << exact(per) << '\n';
      }
      if (g.output.empty()) {
        out << table.str();
      } else {
        std::ofstream file(g.output, std::ios::trunc);
        require(static_cast<bool>(file), ErrorKind::data, "cannot write " + g.output);
        file << table.str();
        out << table.str();
      }
    } else if (inspect->parsed()) {
      inspect_model(out, load_model(model_path));
    }
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace csen
