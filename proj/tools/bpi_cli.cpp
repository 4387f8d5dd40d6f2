// bpi: blockwise PCA imputation for monotone missing data.
//
//   bpi detect INPUT.csv
//   bpi generate-missing INPUT.csv --missing 100,200,300 --seed 1 --out masked.csv
//   bpi reduce INPUT.csv --imputer soft --ev-target 0.95 --out z.csv
//   bpi baseline INPUT.csv --imputer soft --q 40 --out scores.csv
//   bpi bounds INPUT.csv --q 2,1,1 --out bounds.txt
//   bpi bounds --synthetic diag:4,3,2,1 --blocks 2,2 --q 1,1
//   bpi bench configs/bench-smoke.json --out report.txt --long-out report.csv
//
// Diagnostics go to stderr; the exit code is 0 only on success.

#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpi/bench.hpp"
#include "bpi/bounds.hpp"
#include "bpi/csv.hpp"
#include "bpi/monotone.hpp"
#include "bpi/pipeline.hpp"
#include "bpi/report.hpp"
#include "bpi/synthetic.hpp"

namespace {

constexpr const char *kVersion = "0.1.0";

/// Error tagged with the pipeline stage that raised it.
struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string &what) : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <class F>
auto stage(const std::string &name, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(name, e.what());
  }
}

struct ImputerFlags {
  std::string name = "soft";
  bpi::Index knn_k = 5;
  double lambda = 0.0;
  std::optional<double> lambda_ratio;
  bpi::Index max_rank = 0;
  double tolerance = 1e-5;
  int max_iters = 200;
  int path_steps = 0;

  void add(CLI::App *cmd) {
    cmd->add_option("--imputer", name, "mean, knn or soft")->check(CLI::IsMember({"mean", "knn", "soft"}));
    cmd->add_option("--knn-k", knn_k, "neighbours for the knn imputer")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", lambda, "soft-impute shrinkage")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda-ratio", lambda_ratio, "soft-impute shrinkage as a fraction of the top singular value");
    cmd->add_option("--max-rank", max_rank, "soft-impute rank cap (0 = min(n, p, 100))");
    cmd->add_option("--tolerance", tolerance, "soft-impute relative change tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters, "soft-impute iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--path-steps", path_steps, "soft-impute warm-start stages on a decreasing lambda grid")
        ->check(CLI::NonNegativeNumber);
  }

  std::unique_ptr<bpi::Imputer> make(const bpi::MaskedMatrix &target) const {
    bpi::SoftImputeOptions soft{lambda, max_rank, tolerance, max_iters, path_steps};
    if (lambda_ratio && name == "soft" && !target.complete()) {
      const bpi::Vector sv = bpi::singular_values(bpi::impute_mean(target));
      soft.lambda = *lambda_ratio * sv(0);
    }
    return bpi::make_imputer(name, knn_k, soft);
  }
};

struct Output {
  std::string path;

  std::ofstream open() const {
    std::ofstream out(path);
    if (!out) throw bpi::DataError("cannot write '" + path + "'");
    return out;
  }
};

bpi::CanonicalDataset load_canonical(const std::string &path, bool label_col, bpi::CsvTable &table) {
  table = stage("read", [&] { return bpi::read_csv(path, label_col); });
  return stage("detect", [&] { return bpi::detect_monotone(bpi::MaskedMatrix(table.values)); });
}

std::string join(const std::vector<bpi::Index> &v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string join(const std::vector<double> &v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << bpi::format_number(v[i]);
  return os.str();
}

bpi::MixtureSpec parse_mixture(const std::string &text) {
  bpi::MixtureSpec spec;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw bpi::ConfigError("--synthetic expects key=value pairs, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "samples") {
      spec.samples = std::stol(value);
    } else if (key == "features") {
      spec.features = std::stol(value);
    } else if (key == "classes") {
      spec.classes = std::stoi(value);
    } else if (key == "rank") {
      spec.rank = std::stol(value);
    } else if (key == "noise") {
      spec.noise = std::stod(value);
    } else if (key == "separation") {
      spec.separation = std::stod(value);
    } else {
      throw bpi::ConfigError("--synthetic: unknown key '" + key + "'");
    }
  }
  return spec;
}

// identity:P | diag:a,b,c | random:P[:SEED]
bpi::Matrix parse_covariance_spec(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw bpi::ConfigError("--synthetic expects kind:args");
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);
  if (kind == "identity") {
    const long p = std::stol(args);
    if (p < 1) throw bpi::ConfigError("identity size must be >= 1");
    return bpi::Matrix::Identity(p, p);
  }
  if (kind == "diag") {
    std::vector<double> d;
    std::istringstream ss(args);
    std::string item;
    while (std::getline(ss, item, ',')) d.push_back(std::stod(item));
    if (d.empty()) throw bpi::ConfigError("diag needs at least one entry");
    return bpi::Vector::Map(d.data(), static_cast<bpi::Index>(d.size())).asDiagonal();
  }
  if (kind == "random") {
    const auto c2 = args.find(':');
    const long p = std::stol(args.substr(0, c2));
    const std::uint64_t seed = c2 == std::string::npos ? 1 : std::stoull(args.substr(c2 + 1));
    return bpi::random_spd(p, seed, 0.0);
  }
  throw bpi::ConfigError("unknown synthetic covariance '" + kind + "' (identity, diag or random)");
}

std::vector<bpi::FeatureRange> ranges_from_widths(const std::vector<bpi::Index> &widths, bpi::Index p) {
  std::vector<bpi::FeatureRange> out;
  bpi::Index begin = 0;
  for (bpi::Index w : widths) {
    if (w < 1) throw bpi::ConfigError("--blocks widths must be positive");
    out.push_back({begin, w});
    begin += w;
  }
  if (begin != p) {
    throw bpi::ConfigError("--blocks widths sum to " + std::to_string(begin) + " but there are " + std::to_string(p) +
                           " features");
  }
  return out;
}

void write_meta_header(std::ostream &out, const std::string &command, const std::string &input) {
  out << "tool: bpi " << kVersion << '\n';
  out << "command: " << command << '\n';
  out << "input: " << input << '\n';
}

void write_imputer_meta(std::ostream &out, const bpi::Imputer &imputer, const bpi::ImputationTiming &timing) {
  out << "imputer:\n";
  out << "  name: " << imputer.name() << '\n';
  for (const auto &[k, v] : imputer.settings()) out << "  " << k << ": " << v << '\n';
  out << "  calls: " << timing.calls << '\n';
  out << "  iterations: " << timing.iterations << '\n';
  out << "  converged: " << (timing.converged ? "true" : "false") << '\n';
}

int cmd_detect(const std::string &input, bool label_col) {
  bpi::CsvTable table = stage("read", [&] { return bpi::read_csv(input, label_col); });
  const bpi::MaskedMatrix m(table.values);
  try {
    const bpi::CanonicalDataset ds = bpi::detect_monotone(m);
    std::cout << "monotone, k=" << ds.spec.k() << '\n';
    std::cout << "samples: " << m.rows() << '\n';
    std::cout << "features: " << m.cols() << '\n';
    std::cout << "widths: " << join(ds.spec.widths()) << '\n';
    std::cout << "observed_counts: " << join(ds.spec.observed_counts) << '\n';
    std::cout << "missing_cells: " << m.missing_count() << '\n';
    std::cout << "feature_order:";
    for (bpi::Index f : ds.feature_perm) std::cout << ' ' << table.header[static_cast<std::size_t>(f)];
    std::cout << '\n';
    return 0;
  } catch (const bpi::NotMonotone &e) {
    std::cout << "not monotone\n";
    std::cout << "violating_cell: sample " << e.sample() << ", feature " << e.feature() << " ("
              << table.header[e.feature()] << ")\n";
    std::cerr << "error [detect]: " << e.what() << '\n';
    return 1;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Blockwise PCA imputation for monotone missing data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string input;
  bool label_col = false;
  Output out;
  std::string meta_path;
  std::string format = "text";
  std::uint64_t seed = 42;

  auto *detect = app.add_subcommand("detect", "Report the monotone block structure of a CSV");
  detect->add_option("input", input, "CSV file")->required()->check(CLI::ExistingFile);
  detect->add_flag("--label-col", label_col, "first column holds integer labels");

  // generate-missing
  std::vector<bpi::Index> missing;
  std::string synthetic_mixture;
  std::string truth_path;
  auto *gen = app.add_subcommand("generate-missing", "Apply a staircase missingness pattern to complete data");
  gen->add_option("input", input, "complete CSV file")->check(CLI::ExistingFile);
  gen->add_option("--synthetic", synthetic_mixture,
                  "generate labelled mixture data instead: samples=N,features=P,classes=C,rank=R,noise=S,separation=D");
  gen->add_option("--missing", missing, "trailing features removed per later partition, e.g. 100,200,300")
      ->required()
      ->delimiter(',');
  gen->add_option("--seed", seed, "shuffle seed");
  gen->add_option("--out", out.path, "output CSV")->required();
  gen->add_option("--truth-out", truth_path, "also write the complete matrix");
  gen->add_flag("--label-col", label_col, "first column holds integer labels");

  // reduce / baseline share their flags
  ImputerFlags imputer_flags;
  std::vector<bpi::Index> q_list;
  double ev_target = 0.0;
  bpi::Index passthrough = 4;
  bool standardize = false;
  auto add_reduce_flags = [&](CLI::App *cmd, bool per_block) {
    cmd->add_option("input", input, "monotone CSV file")->required()->check(CLI::ExistingFile);
    imputer_flags.add(cmd);
    auto *q = cmd->add_option("--q", q_list, per_block ? "fixed dimension per block, e.g. 2,1,1" : "fixed dimension")
                  ->delimiter(',');
    auto *ev = cmd->add_option("--ev-target", ev_target, "explained-variance target in (0, 1]");
    q->excludes(ev);
    if (per_block) cmd->add_option("--passthrough-width", passthrough, "blocks this narrow keep every dimension");
    cmd->add_flag("--standardize", standardize, "scale features to unit variance before PCA");
    cmd->add_option("--out", out.path, "output CSV")->required();
    cmd->add_option("--meta", meta_path, "metadata file (default: OUT.meta.txt)");
    cmd->add_flag("--label-col", label_col, "first column holds integer labels, passed through");
  };
  auto *reduce = app.add_subcommand("reduce", "Blockwise PCA, stacking and imputation of the reduced stack");
  add_reduce_flags(reduce, true);
  auto *baseline = app.add_subcommand("baseline", "Impute the full matrix, then fit one PCA");
  add_reduce_flags(baseline, false);

  // bounds
  std::string synthetic_cov;
  std::vector<bpi::Index> block_widths;
  std::string mode = "complete-case";
  auto *bounds = app.add_subcommand("bounds", "Explained-variance bounds and interlacing/trace certificates");
  bounds->add_option("input", input, "monotone CSV file")->check(CLI::ExistingFile);
  bounds->add_option("--synthetic", synthetic_cov, "covariance instead of data: identity:P, diag:a,b,..., random:P[:SEED]");
  bounds->add_option("--blocks", block_widths, "contiguous block widths (default: detected blocks)")->delimiter(',');
  auto *bq = bounds->add_option("--q", q_list, "retained dimension per block")->delimiter(',');
  auto *bev = bounds->add_option("--ev-target", ev_target, "pick each q_i from its block spectrum");
  bq->excludes(bev);
  bounds->add_option("--mode", mode, "covariance for CSV input")
      ->check(CLI::IsMember({"complete-case", "ground-truth"}));
  bounds->add_option("--out", out.path, "report file (default: stdout only)");
  bounds->add_option("--format", format, "text or long")->check(CLI::IsMember({"text", "long", "csv"}));
  bounds->add_flag("--label-col", label_col, "first column holds integer labels");

  // bench
  std::string config_path;
  std::string long_path;
  auto *bench = app.add_subcommand("bench", "Baseline vs blockwise PCA imputation over repeated trials");
  bench->add_option("config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out.path, "report file")->required();
  bench->add_option("--format", format, "text or long")->check(CLI::IsMember({"text", "long", "csv"}));
  bench->add_option("--long-out", long_path, "plot-ready long CSV (arm,repeat,metric,value)");
  bench->add_option("--seed", seed, "override the config's master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) return cmd_detect(input, label_col);

    if (gen->parsed()) {
      if (input.empty() == synthetic_mixture.empty()) {
        throw StageError("config", "give either an input CSV or --synthetic");
      }
      bpi::CsvTable table;
      if (!synthetic_mixture.empty()) {
        const bpi::MixtureSpec spec = stage("config", [&] { return parse_mixture(synthetic_mixture); });
        bpi::LabeledData data = bpi::gaussian_mixture(spec, seed);
        table.values = std::move(data.x);
        table.labels = std::move(data.labels);
        table.has_labels = true;
        table.label_name = "label";
        for (bpi::Index c = 0; c < table.values.cols(); ++c) table.header.push_back("f" + std::to_string(c));
      } else {
        table = stage("read", [&] { return bpi::read_csv(input, label_col); });
        if (table.values.hasNaN()) throw StageError("read", "input must be complete");
      }
      const bpi::MaskedMatrix masked =
          stage("generate", [&] { return bpi::generate_monotone_missing(table.values, missing, seed); });
      stage("write", [&] {
        bpi::write_masked_csv(out.path, table, masked);
        if (!truth_path.empty()) bpi::write_masked_csv(truth_path, table, bpi::MaskedMatrix::fully_observed(table.values));
        return 0;
      });
      std::cerr << "wrote " << masked.rows() << "x" << masked.cols() << " with " << masked.missing_count()
                << " missing cells to " << out.path << '\n';
      return 0;
    }

    if (reduce->parsed() || baseline->parsed()) {
      const bool is_reduce = reduce->parsed();
      bpi::CsvTable table;
      const bpi::CanonicalDataset ds = load_canonical(input, label_col, table);
      bpi::PcaOptions pca;
      pca.standardize = standardize;
      const auto imputer = stage("config", [&] {
        return imputer_flags.make(is_reduce ? bpi::MaskedMatrix(bpi::Matrix::Zero(1, 1)) : ds.data);
      });

      bpi::CsvColumns leading;
      leading.names.push_back("row");
      leading.columns.emplace_back(ds.sample_perm.begin(), ds.sample_perm.end());
      if (table.has_labels) {
        leading.names.push_back(table.label_name);
        std::vector<long long> labels;
        for (bpi::Index r : ds.sample_perm) labels.push_back(table.labels[static_cast<std::size_t>(r)]);
        leading.columns.push_back(std::move(labels));
      }
      if (meta_path.empty()) meta_path = out.path + ".meta.txt";

      if (is_reduce) {
        bpi::BlockRetention retention;
        retention.pca = pca;
        retention.passthrough_width = passthrough;
        if (!q_list.empty()) {
          if (q_list.size() != ds.spec.k()) {
            throw StageError("config", "--q needs " + std::to_string(ds.spec.k()) + " values, one per block");
          }
          for (bpi::Index q : q_list) retention.overrides.emplace_back(bpi::FixedDim{q});
        } else if (ev_target > 0.0) {
          retention.default_rule = bpi::VarianceTarget{ev_target};
        }
        bpi::ReducedStack stack = stage("pca", [&] { return bpi::bpi_reduce(ds, retention); });
        // Re-derive the imputer against z* so a --lambda-ratio scales to the reduced data.
        const auto stack_imputer = stage("config", [&] { return imputer_flags.make(stack.z_star); });
        stage("impute", [&] {
          bpi::bpi_impute(stack, *stack_imputer);
          return 0;
        });

        std::vector<std::string> header;
        for (std::size_t i = 0; i < stack.block_models.size(); ++i) {
          for (bpi::Index j = 0; j < stack.block_models[i].q; ++j) {
            header.push_back("b" + std::to_string(i + 1) + "_pc" + std::to_string(j + 1));
          }
        }
        stage("write", [&] {
          auto f = out.open();
          bpi::write_csv(f, leading, header, *stack.z);
          std::ofstream meta(meta_path);
          if (!meta) throw bpi::DataError("cannot write '" + meta_path + "'");
          write_meta_header(meta, "reduce", input);
          std::vector<bpi::Index> qs;
          for (const auto &m : stack.block_models) qs.push_back(m.q);
          meta << "k: " << ds.spec.k() << '\n';
          meta << "widths: " << join(ds.spec.widths()) << '\n';
          meta << "observed_counts: " << join(ds.spec.observed_counts) << '\n';
          meta << "q: " << join(qs) << '\n';
          meta << "block_ev: " << join(stack.block_ev) << '\n';
          meta << "missing_cells_x: " << ds.data.missing_count() << '\n';
          meta << "missing_cells_z_star: " << stack.z_star.missing_count() << '\n';
          meta << "output_shape: " << stack.z->rows() << "x" << stack.z->cols() << '\n';
          meta << "standardize: " << (standardize ? "true" : "false") << '\n';
          write_imputer_meta(meta, *stack_imputer, stack.timing);
          for (std::size_t i = 0; i < stack.block_models.size(); ++i) {
            for (const auto &w : stack.block_models[i].warnings) meta << "warning: block " << i + 1 << ": " << w << '\n';
          }
          meta << "imputation_seconds: " << bpi::format_number(stack.timing.seconds) << '\n';
          meta << "pca_seconds: " << bpi::format_number(stack.pca_seconds) << '\n';
          return 0;
        });
        std::cout << "reduced " << ds.data.rows() << "x" << ds.data.cols() << " to " << stack.z->rows() << "x"
                  << stack.z->cols() << " (missing cells " << ds.data.missing_count() << " -> "
                  << stack.z_star.missing_count() << ")\n";
        return 0;
      }

      bpi::RetentionRule rule = bpi::VarianceTarget{0.95};
      if (!q_list.empty()) {
        if (q_list.size() != 1) throw StageError("config", "baseline takes a single --q");
        rule = bpi::FixedDim{q_list.front()};
      } else if (ev_target > 0.0) {
        rule = bpi::VarianceTarget{ev_target};
      }
      const bpi::BaselineResult result =
          stage("impute", [&] { return bpi::baseline_impute_then_pca(ds, *imputer, rule, pca); });
      std::vector<std::string> header;
      for (bpi::Index j = 0; j < result.model.q; ++j) header.push_back("pc" + std::to_string(j + 1));
      stage("write", [&] {
        auto f = out.open();
        bpi::write_csv(f, leading, header, result.scores);
        std::ofstream meta(meta_path);
        if (!meta) throw bpi::DataError("cannot write '" + meta_path + "'");
        write_meta_header(meta, "baseline", input);
        meta << "q: " << result.model.q << '\n';
        meta << "ev: " << bpi::format_number(bpi::explained_variance(result.model, result.model.q)) << '\n';
        meta << "missing_cells_x: " << ds.data.missing_count() << '\n';
        meta << "output_shape: " << result.scores.rows() << "x" << result.scores.cols() << '\n';
        write_imputer_meta(meta, *imputer, result.timing);
        meta << "imputation_seconds: " << bpi::format_number(result.timing.seconds) << '\n';
        meta << "pca_seconds: " << bpi::format_number(result.pca_seconds) << '\n';
        return 0;
      });
      std::cout << "baseline scores " << result.scores.rows() << "x" << result.scores.cols() << '\n';
      return 0;
    }

    if (bounds->parsed()) {
      if (input.empty() == synthetic_cov.empty()) throw StageError("config", "give either an input CSV or --synthetic");
      bpi::Matrix s;
      std::vector<bpi::FeatureRange> ranges;
      if (!synthetic_cov.empty()) {
        s = stage("config", [&] { return parse_covariance_spec(synthetic_cov); });
        if (block_widths.empty()) throw StageError("config", "--blocks is required with --synthetic");
        ranges = stage("config", [&] { return ranges_from_widths(block_widths, s.rows()); });
      } else {
        bpi::CsvTable table;
        const bpi::CanonicalDataset ds = load_canonical(input, label_col, table);
        s = stage("covariance", [&] {
          if (mode == "ground-truth") {
            if (!ds.data.complete()) throw bpi::ConfigError("ground-truth mode needs complete data");
            return bpi::estimate_covariance_for_bounds(ds, bpi::CovarianceMode::GroundTruth, ds.data.values());
          }
          return bpi::estimate_covariance_for_bounds(ds, bpi::CovarianceMode::CompleteCase);
        });
        ranges = block_widths.empty() ? ds.spec.feature_ranges
                                      : stage("config", [&] { return ranges_from_widths(block_widths, s.rows()); });
      }
      const bpi::BlockSets sets = bpi::block_sets(ranges);
      std::vector<bpi::Index> qs = q_list;
      if (qs.empty()) {
        if (!(ev_target > 0.0)) throw StageError("config", "give --q or --ev-target");
        for (const auto &b : sets) {
          const bpi::Vector spec = bpi::sym_eig(bpi::principal_submatrix(s, b), bpi::SpectrumKind::Covariance).eigenvalues;
          bpi::Index q = 1;
          while (q < spec.size() && bpi::explained_variance(spec, q) < ev_target) ++q;
          qs.push_back(q);
        }
      }
      if (qs.size() != sets.size()) {
        throw StageError("config", "--q needs " + std::to_string(sets.size()) + " values, one per block");
      }
      const bpi::EvBoundsReport report = stage("bounds", [&] { return bpi::ev_bounds(s, sets, qs); });
      bpi::print_summary_table(std::cout, report);
      if (!out.path.empty()) {
        stage("write", [&] {
          auto f = out.open();
          bpi::write_report(f, report, bpi::parse_report_format(format));
          return 0;
        });
      }
      return 0;
    }

    if (bench->parsed()) {
      bpi::ExperimentConfig cfg = stage("config", [&] { return bpi::load_experiment_config(config_path); });
      if (bench->count("--seed")) cfg.seed = seed;
      const bpi::ExperimentReport report = stage("bench", [&] { return bpi::run_experiment(cfg); });
      bpi::print_summary_table(std::cout, report);
      stage("write", [&] {
        auto f = out.open();
        bpi::write_report(f, report, bpi::parse_report_format(format));
        if (!long_path.empty()) {
          std::ofstream lf(long_path);
          if (!lf) throw bpi::DataError("cannot write '" + long_path + "'");
          bpi::write_report(lf, report, bpi::ReportFormat::Long);
        }
        return 0;
      });
      return 0;
    }
  } catch (const StageError &e) {
    std::cerr << "error [" << e.stage << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
