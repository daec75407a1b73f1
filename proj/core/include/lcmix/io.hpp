#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lcmix/simulation.hpp"
#include "lcmix/types.hpp"

namespace lcmix {

enum class ColumnRole { Indicator, External, Ignore };
enum class ColumnType { Dichotomous, Nominal, Continuous };

/// Column spec file: one line per column, `name = role,type[,labels...]`,
/// '#' comments. role: indicator|external|ignore; type: dichotomous,
/// nominal(K), continuous. Optional category labels map to codes 0..K-1 by
/// position; without labels, indicator cells must already hold integer
/// codes. A `log` token after continuous requests a natural-log transform
/// of the external column.
struct ColumnSpec {
  struct Column {
    std::string name;
    ColumnRole role = ColumnRole::Ignore;
    ColumnType type = ColumnType::Continuous;
    int cardinality = 2;
    std::vector<std::string> labels;
    bool log_transform = false;
  };
  std::vector<Column> columns;

  static ColumnSpec parse(std::istream& in, const std::string& origin = "<stream>");
  static ColumnSpec parse_file(const std::string& path);
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;

  const Column* find(const std::string& name) const;
  std::vector<const Column*> indicators() const;
  const Column* external() const;  // nullptr if absent

  /// At least one indicator and exactly one external continuous column.
  void validate() const;
};

struct IngestReport {
  int rows_read = 0;
  int dropped_missing = 0;
  int dropped_nonpositive_log = 0;
};

/// Reads a comma-separated, header-first, '.'-decimal CSV into a Dataset.
/// Rows with a missing value (empty cell or NA) in any used column are
/// dropped listwise and counted. With a log directive (from the spec or
/// force_log_external), non-positive external values are dropped and counted
/// separately. Item order follows the column-spec order, not the CSV order.
Dataset ingest(const std::string& csv_path, const ColumnSpec& spec, IngestReport* report = nullptr,
               bool force_log_external = false);

/// Writes the CSV dialect ingest reads; codes as integers, z at %.17g.
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Column spec describing a dataset as written by write_dataset_csv.
ColumnSpec column_spec_for(const Dataset& data);

struct TruthFile {
  StudyDesign design;
  std::uint64_t seed = 0;
  Partition labels;
};

/// Sidecar with the generating design, seed, and true labels, in
/// line-oriented `key = value` form (vectors comma-separated).
void write_truth_file(const std::string& path, const StudyDesign& design, std::uint64_t seed,
                      const Partition& labels);
TruthFile read_truth_file(const std::string& path);

/// Writes `result.json` plus `posteriors.csv` under `directory`. The JSON
/// document carries the model spec, parameters, fit statistics, optional
/// SEs/covariance, and the posteriors path, and can be reloaded for
/// re-scoring or comparison.
std::string save_fit_result(const std::string& directory, const FitResult& fit,
                            const std::vector<std::string>& column_names, std::uint64_t seed);

struct LoadedFit {
  FitResult fit;
  std::vector<std::string> column_names;
  std::uint64_t seed = 0;
};
LoadedFit load_fit_result(const std::string& result_json_path);

}  // namespace lcmix
