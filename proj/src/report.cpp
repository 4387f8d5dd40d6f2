#include "bpi/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <type_traits>

#include "bpi/csv.hpp"

namespace bpi {

using nlohmann::json;

namespace {

std::string num(double v) { return format_number(v); }

template <class T>
std::string list(const std::vector<T> &v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    if constexpr (std::is_floating_point_v<T>) {
      os << num(v[i]);
    } else {
      os << v[i];
    }
  }
  os << ']';
  return os.str();
}

std::string list(const Vector &v) { return list(std::vector<double>(v.data(), v.data() + v.size())); }

class TextWriter {
public:
  explicit TextWriter(std::ostream &out) : out_(out) {}

  void key(const std::string &k, const std::string &v) { out_ << pad() << k << ": " << v << '\n'; }
  void section(const std::string &k) {
    out_ << pad() << k << ":\n";
    ++depth_;
  }
  void item() {
    out_ << pad() << "-\n";
    ++depth_;
  }
  void end() { --depth_; }

private:
  std::string pad() const { return std::string(static_cast<std::size_t>(depth_) * 2, ' '); }
  std::ostream &out_;
  int depth_ = 0;
};

void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto &[k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

void write_bounds_text(TextWriter &w, const EvBoundsReport &r) {
  w.key("applicable", r.applicable ? "true" : "false");
  if (!r.applicable) w.key("note", r.applicability_note);
  w.key("k", std::to_string(r.block_widths.size()));
  w.key("p", std::to_string(r.full_spectrum.size()));
  w.key("block_widths", list(r.block_widths));
  w.key("q", list(r.q));
  w.key("block_ev", list(r.block_ev));
  w.key("mean_ev", num(r.mean_ev));
  w.key("total_q", std::to_string(r.total_q));
  w.key("total_ev_q", num(r.total_ev_q));
  w.key("lower_index", std::to_string(r.lower_index));
  w.key("lambda_lower", num(r.lambda_lower));
  w.key("lambda_p", num(r.lambda_p));
  w.key("spectrum_sum", num(r.spectrum_sum));
  w.key("lower_bound", num(r.lower_bound));
  w.key("upper_bound", num(r.upper_bound));
  w.key("bound_holds", r.holds() ? "true" : "false");
  w.key("interlacing_ok", r.interlacing_ok ? "true" : "false");
  w.key("trace_ok", r.trace_ok ? "true" : "false");
  w.key("full_spectrum", list(r.full_spectrum));
  w.section("blocks");
  for (std::size_t i = 0; i < r.block_spectra.size(); ++i) {
    w.item();
    w.key("index", std::to_string(i + 1));
    w.key("spectrum", list(r.block_spectra[i]));
    const auto &cert = r.interlacing[i];
    w.key("interlacing_tolerance", num(cert.tolerance));
    w.section("interlacing");
    for (std::size_t j = 0; j < cert.rows.size(); ++j) {
      const auto &row = cert.rows[j];
      w.key("j" + std::to_string(j + 1),
            num(row.upper) + " >= " + num(row.middle) + " >= " + num(row.lower) + (row.ok ? " ok" : " FAIL"));
    }
    w.end();
    w.end();
  }
  w.end();
  w.section("trace");
  w.key("trace", num(r.trace.trace));
  w.key("block_trace_sum", num(r.trace.block_trace_sum));
  w.key("eigenvalue_sum", num(r.trace.eigenvalue_sum));
  w.key("block_eigenvalue_sum", num(r.trace.block_eigenvalue_sum));
  w.end();
}

void bounds_long_rows(std::ostream &out, const EvBoundsReport &r, const std::string &prefix) {
  auto row = [&](const std::string &section, const std::string &index, const std::string &metric,
                 const std::string &value) { out << prefix << section << ',' << index << ',' << metric << ',' << value << '\n'; };
  row("summary", "", "applicable", r.applicable ? "1" : "0");
  row("summary", "", "mean_ev", num(r.mean_ev));
  row("summary", "", "lower_bound", num(r.lower_bound));
  row("summary", "", "upper_bound", num(r.upper_bound));
  row("summary", "", "total_q", std::to_string(r.total_q));
  row("summary", "", "total_ev_q", num(r.total_ev_q));
  row("summary", "", "lower_index", std::to_string(r.lower_index));
  row("summary", "", "lambda_lower", num(r.lambda_lower));
  row("summary", "", "lambda_p", num(r.lambda_p));
  row("summary", "", "spectrum_sum", num(r.spectrum_sum));
  row("summary", "", "interlacing_ok", r.interlacing_ok ? "1" : "0");
  row("summary", "", "trace_ok", r.trace_ok ? "1" : "0");
  for (Index j = 0; j < r.full_spectrum.size(); ++j) row("spectrum", std::to_string(j + 1), "lambda", num(r.full_spectrum(j)));
  for (std::size_t i = 0; i < r.block_ev.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    row("block", idx, "width", std::to_string(r.block_widths[i]));
    row("block", idx, "q", std::to_string(r.q[i]));
    row("block", idx, "ev", num(r.block_ev[i]));
    row("block", idx, "interlacing_ok", r.interlacing[i].ok ? "1" : "0");
  }
}

void arm_text(TextWriter &w, const std::string &name, const ArmTrial &a) {
  w.section(name);
  w.key("accuracy", num(a.accuracy));
  w.key("dims", std::to_string(a.dims));
  w.key("imputer_calls", std::to_string(a.imputer_calls));
  w.key("iterations", std::to_string(a.iterations));
  w.key("converged", a.converged ? "true" : "false");
  w.key("rmse_missing", num(a.rmse_missing));
  w.key("imputation_seconds", num(a.imputation_seconds));
  w.key("pca_seconds", num(a.pca_seconds));
  w.end();
}

void arm_long(std::ostream &out, const std::string &arm, int repeat, const ArmTrial &a) {
  const std::string prefix = arm + ',' + std::to_string(repeat) + ',';
  out << prefix << "accuracy," << num(a.accuracy) << '\n';
  out << prefix << "imputation_seconds," << num(a.imputation_seconds) << '\n';
  out << prefix << "pca_seconds," << num(a.pca_seconds) << '\n';
  out << prefix << "dims," << a.dims << '\n';
  out << prefix << "iterations," << a.iterations << '\n';
  out << prefix << "converged," << (a.converged ? 1 : 0) << '\n';
  out << prefix << "rmse_missing," << num(a.rmse_missing) << '\n';
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

} // namespace

ReportFormat parse_report_format(const std::string &name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "long" || name == "csv") return ReportFormat::Long;
  throw ConfigError("unknown report format '" + name + "' (expected text or long)");
}

void write_report(std::ostream &out, const EvBoundsReport &report, ReportFormat format) {
  if (format == ReportFormat::Long) {
    out << "section,index,metric,value\n";
    bounds_long_rows(out, report, "");
    return;
  }
  TextWriter w(out);
  w.section("ev_bounds");
  write_bounds_text(w, report);
  w.end();
}

void write_report(std::ostream &out, const ExperimentReport &report, ReportFormat format) {
  const ExperimentConfig &cfg = report.config;
  if (format == ReportFormat::Long) {
    out << "arm,repeat,metric,value\n";
    for (const auto &t : report.trials) {
      arm_long(out, "baseline", t.repeat, t.baseline);
      arm_long(out, "bpi", t.repeat, t.bpi);
      out << "trial," << t.repeat << ",trial_seconds," << num(t.trial_seconds) << '\n';
    }
    return;
  }

  TextWriter w(out);
  w.section("experiment");
  w.key("name", cfg.name);
  w.section("config");
  if (cfg.csv_path) {
    w.key("data", "csv " + *cfg.csv_path);
  } else {
    const auto &s = cfg.synthetic;
    w.key("data", "gaussian-mixture");
    w.key("samples", std::to_string(s.samples));
    w.key("features", std::to_string(s.features));
    w.key("classes", std::to_string(s.classes));
    w.key("rank", std::to_string(s.rank));
    w.key("noise", num(s.noise));
    w.key("separation", num(s.separation));
  }
  w.key("missing_counts", list(cfg.missing_counts));
  w.key("imputer", cfg.imputer);
  w.key("retention", describe(cfg.retention.default_rule));
  w.key("passthrough_width", std::to_string(cfg.retention.passthrough_width));
  w.key("standardize", cfg.retention.pca.standardize ? "true" : "false");
  w.key("baseline_retention", cfg.baseline_rule ? describe(*cfg.baseline_rule) : "match-bpi-total");
  w.key("classifier", to_string(cfg.classifier));
  if (cfg.classifier == ClassifierKind::Knn) w.key("classifier_k", std::to_string(cfg.classifier_k));
  w.key("repeats", std::to_string(cfg.repeats));
  w.key("train_fraction", num(cfg.train_fraction));
  w.key("seed", std::to_string(cfg.seed));
  w.end();

  w.section("imputer_settings");
  if (report.imputer_settings.empty()) w.key("none", "-");
  for (const auto &[k, v] : report.imputer_settings) w.key(k, v);
  w.end();

  w.section("summary");
  w.section("baseline");
  w.key("accuracy_mean", num(report.baseline_accuracy.mean));
  w.key("accuracy_std", num(report.baseline_accuracy.std));
  w.key("imputation_seconds_mean", num(report.baseline_seconds.mean));
  w.key("imputation_seconds_std", num(report.baseline_seconds.std));
  w.end();
  w.section("bpi");
  w.key("accuracy_mean", num(report.bpi_accuracy.mean));
  w.key("accuracy_std", num(report.bpi_accuracy.std));
  w.key("imputation_seconds_mean", num(report.bpi_seconds.mean));
  w.key("imputation_seconds_std", num(report.bpi_seconds.std));
  w.end();
  w.end();

  w.section("trials");
  for (const auto &t : report.trials) {
    w.item();
    w.key("repeat", std::to_string(t.repeat));
    w.key("seed", std::to_string(t.seed));
    w.key("block_widths", list(t.block_widths));
    w.key("block_counts", list(t.block_counts));
    w.key("q", list(t.q));
    w.key("block_ev", list(t.block_ev));
    w.key("mean_block_ev", num(t.mean_block_ev));
    w.key("baseline_ev", num(t.baseline_ev));
    arm_text(w, "baseline", t.baseline);
    arm_text(w, "bpi", t.bpi);
    w.key("trial_seconds", num(t.trial_seconds));
    if (t.bounds) {
      w.section("ev_bounds");
      write_bounds_text(w, *t.bounds);
      w.end();
    }
    w.end();
  }
  w.end();

  w.section("notes");
  for (const auto &n : report.notes) w.key("-", n);
  w.end();
  w.end();
}

void print_summary_table(std::ostream &out, const ExperimentReport &report) {
  out << "experiment " << report.config.name << " (" << report.config.imputer << ", "
      << to_string(report.config.classifier) << ", " << report.config.repeats << " repeats)\n";
  // Timing lines all carry "seconds" so they can be filtered out when diffing runs.
  auto line = [&](const std::string &arm, const Summary &acc) {
    out << std::left << std::setw(10) << arm << "accuracy " << fixed(acc.mean, 3) << " +/- " << fixed(acc.std, 3)
        << '\n';
  };
  auto time = [&](const std::string &arm, const Summary &sec) {
    out << std::left << std::setw(10) << arm << "imputation_seconds " << fixed(sec.mean, 3) << " +/- "
        << fixed(sec.std, 3) << '\n';
  };
  line("baseline", report.baseline_accuracy);
  line("bpi", report.bpi_accuracy);
  time("baseline", report.baseline_seconds);
  time("bpi", report.bpi_seconds);
  if (report.baseline_seconds.mean > 0.0) {
    out << "reduction in imputation seconds: "
        << fixed(100.0 * (1.0 - report.bpi_seconds.mean / report.baseline_seconds.mean), 1) << "%\n";
  }
}

void print_summary_table(std::ostream &out, const EvBoundsReport &r) {
  out << "blocks k=" << r.block_widths.size() << " widths=" << list(r.block_widths) << " q=" << list(r.q) << '\n';
  out << "lower bound  " << fixed(r.lower_bound, 6) << "  (lambda_" << r.lower_index << " = " << num(r.lambda_lower)
      << ")\n";
  out << "mean EV      " << fixed(r.mean_ev, 6) << '\n';
  out << "upper bound  " << fixed(r.upper_bound, 6) << "  (lambda_p = " << num(r.lambda_p) << ")\n";
  out << "EV_q (q=" << r.total_q << ")  " << fixed(r.total_ev_q, 6) << '\n';
  if (!r.applicable) out << r.applicability_note << '\n';
  out << "interlacing " << (r.interlacing_ok ? "ok" : "FAILED") << ", trace identity " << (r.trace_ok ? "ok" : "FAILED")
      << '\n';
}

RetentionRule parse_rule(const json &j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "keep-all") return KeepAll{};
    throw ConfigError("retention rule: unknown name '" + j.get<std::string>() + "'");
  }
  check_keys(j, {"fixed", "variance"}, "retention rule");
  if (j.size() != 1) throw ConfigError("retention rule: give exactly one of fixed or variance");
  if (j.contains("fixed")) return FixedDim{j.at("fixed").get<Index>()};
  const double ratio = j.at("variance").get<double>();
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("variance target must lie in (0, 1]");
  return VarianceTarget{ratio};
}

ExperimentConfig parse_experiment_config(const json &j) {
  check_keys(j, {"name", "data", "missing_counts", "imputer", "retention", "baseline_retention", "classifier", "repeats",
                 "train_fraction", "seed", "bounds"},
             "config");
  ExperimentConfig cfg;
  try {
    cfg.name = j.value("name", cfg.name);
    if (j.contains("data")) {
      const json &d = j.at("data");
      check_keys(d, {"csv", "synthetic"}, "data");
      if (d.contains("csv")) cfg.csv_path = d.at("csv").get<std::string>();
      if (d.contains("synthetic")) {
        const json &s = d.at("synthetic");
        check_keys(s, {"samples", "features", "classes", "rank", "noise", "separation"}, "data.synthetic");
        cfg.synthetic.samples = s.value("samples", cfg.synthetic.samples);
        cfg.synthetic.features = s.value("features", cfg.synthetic.features);
        cfg.synthetic.classes = s.value("classes", cfg.synthetic.classes);
        cfg.synthetic.rank = s.value("rank", cfg.synthetic.rank);
        cfg.synthetic.noise = s.value("noise", cfg.synthetic.noise);
        cfg.synthetic.separation = s.value("separation", cfg.synthetic.separation);
      }
    }
    if (j.contains("missing_counts")) cfg.missing_counts = j.at("missing_counts").get<std::vector<Index>>();
    if (j.contains("imputer")) {
      const json &im = j.at("imputer");
      check_keys(im, {"name", "k", "lambda", "lambda_ratio", "max_rank", "tolerance", "max_iters", "path_steps"}, "imputer");
      cfg.imputer = im.value("name", cfg.imputer);
      cfg.knn_impute_k = im.value("k", cfg.knn_impute_k);
      cfg.soft.lambda = im.value("lambda", cfg.soft.lambda);
      if (im.contains("lambda_ratio")) cfg.soft_lambda_ratio = im.at("lambda_ratio").get<double>();
      cfg.soft.max_rank = im.value("max_rank", cfg.soft.max_rank);
      cfg.soft.tolerance = im.value("tolerance", cfg.soft.tolerance);
      cfg.soft.max_iters = im.value("max_iters", cfg.soft.max_iters);
      cfg.soft.path_steps = im.value("path_steps", cfg.soft.path_steps);
    }
    if (j.contains("retention")) {
      const json &r = j.at("retention");
      check_keys(r, {"default", "overrides", "passthrough_width", "standardize"}, "retention");
      if (r.contains("default")) cfg.retention.default_rule = parse_rule(r.at("default"));
      cfg.retention.passthrough_width = r.value("passthrough_width", cfg.retention.passthrough_width);
      cfg.retention.pca.standardize = r.value("standardize", false);
      if (r.contains("overrides")) {
        for (const auto &o : r.at("overrides")) {
          if (o.is_null()) {
            cfg.retention.overrides.emplace_back();
          } else {
            cfg.retention.overrides.emplace_back(parse_rule(o));
          }
        }
      }
    }
    if (j.contains("baseline_retention")) {
      const json &b = j.at("baseline_retention");
      if (!(b.is_string() && b.get<std::string>() == "match")) cfg.baseline_rule = parse_rule(b);
    }
    if (j.contains("classifier")) {
      const json &c = j.at("classifier");
      check_keys(c, {"name", "k"}, "classifier");
      const std::string name = c.value("name", std::string("knn"));
      if (name == "knn") {
        cfg.classifier = ClassifierKind::Knn;
      } else if (name == "nearest-centroid") {
        cfg.classifier = ClassifierKind::NearestCentroid;
      } else {
        throw ConfigError("classifier: unknown name '" + name + "'");
      }
      cfg.classifier_k = c.value("k", cfg.classifier_k);
    }
    cfg.repeats = j.value("repeats", cfg.repeats);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.bounds = j.value("bounds", cfg.bounds);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  ExperimentConfig cfg = parse_experiment_config(j);
  if (cfg.csv_path && std::filesystem::path(*cfg.csv_path).is_relative()) {
    cfg.csv_path = (std::filesystem::path(path).parent_path() / *cfg.csv_path).string();
  }
  return cfg;
}

} // namespace bpi
