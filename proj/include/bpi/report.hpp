#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bpi/bench.hpp"
#include "bpi/bounds.hpp"

namespace bpi {

// Report formats.
//
// text: nested "key: value" lines, two-space indentation per level; list
//       items start with "- ".
// long: CSV with header "arm,repeat,metric,value" (experiments) or
//       "section,index,metric,value" (bounds).
//
// Every wall-clock field has "seconds" in its key or metric name; all other
// content is a deterministic function of the inputs and seeds.

enum class ReportFormat { Text, Long };

ReportFormat parse_report_format(const std::string &name);

void write_report(std::ostream &out, const ExperimentReport &report, ReportFormat format);
void write_report(std::ostream &out, const EvBoundsReport &report, ReportFormat format);

/// Side-by-side summary table for standard output.
void print_summary_table(std::ostream &out, const ExperimentReport &report);
void print_summary_table(std::ostream &out, const EvBoundsReport &report);

/// Reads an experiment description. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const nlohmann::json &j);
ExperimentConfig load_experiment_config(const std::string &path);

RetentionRule parse_rule(const nlohmann::json &j);

} // namespace bpi
