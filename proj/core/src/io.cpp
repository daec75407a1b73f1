#include "lcmix/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lcmix/diagnostics.hpp"
#include "lcmix/model.hpp"
#include "lcmix/param_layout.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lcmix {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

bool is_missing(const std::string& cell) {
  const std::string t = trim(cell);
  return t.empty() || t == "NA" || t == "na" || t == ".";
}

double parse_double(const std::string& cell, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != trim(cell).size() && pos != cell.size())
      throw InputError("trailing characters in numeric value at " + where);
    return v;
  } catch (const std::exception&) {
    throw InputError("cannot parse numeric value '" + cell + "' at " + where);
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ColumnSpec ColumnSpec::parse(std::istream& in, const std::string& origin) {
  ColumnSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("missing '=' in column spec at " + where);
    Column col;
    col.name = trim(line.substr(0, eq));
    if (col.name.empty()) throw InputError("empty column name at " + where);
    std::vector<std::string> fields = split(trim(line.substr(eq + 1)), ',');
    for (auto& f : fields) f = trim(f);
    if (fields.empty() || fields[0].empty())
      throw InputError("missing column role at " + where);

    const std::string& role = fields[0];
    if (role == "ignore") {
      col.role = ColumnRole::Ignore;
      spec.columns.push_back(std::move(col));
      continue;
    }
    if (role == "indicator") {
      col.role = ColumnRole::Indicator;
    } else if (role == "external") {
      col.role = ColumnRole::External;
    } else {
      throw InputError("unknown column role '" + role + "' at " + where);
    }
    if (fields.size() < 2) throw InputError("missing column type at " + where);
    const std::string& type = fields[1];
    std::vector<std::string> rest(fields.begin() + 2, fields.end());
    if (type == "dichotomous") {
      col.type = ColumnType::Dichotomous;
      col.cardinality = 2;
    } else if (type.rfind("nominal(", 0) == 0 && type.back() == ')') {
      col.type = ColumnType::Nominal;
      col.cardinality = static_cast<int>(parse_double(type.substr(8, type.size() - 9), where));
      if (col.cardinality < 2) throw InputError("nominal cardinality must be >= 2 at " + where);
    } else if (type == "continuous") {
      col.type = ColumnType::Continuous;
    } else {
      throw InputError("unknown column type '" + type + "' at " + where);
    }
    if (col.role == ColumnRole::External) {
      if (col.type != ColumnType::Continuous)
        throw InputError("external column must be continuous at " + where);
      if (!rest.empty() && rest[0] == "log") {
        col.log_transform = true;
        rest.erase(rest.begin());
      }
      if (!rest.empty()) throw InputError("unexpected tokens after external column at " + where);
    } else {
      if (col.type == ColumnType::Continuous)
        throw InputError("indicator columns must be categorical at " + where);
      if (!rest.empty()) {
        if (static_cast<int>(rest.size()) != col.cardinality)
          throw InputError("expected " + std::to_string(col.cardinality) + " labels at " + where);
        col.labels = std::move(rest);
      }
    }
    spec.columns.push_back(std::move(col));
  }
  return spec;
}

ColumnSpec ColumnSpec::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open column spec file: " + path);
  return parse(in, path);
}

void ColumnSpec::write(std::ostream& out) const {
  for (const auto& col : columns) {
    out << col.name << " = ";
    switch (col.role) {
      case ColumnRole::Ignore:
        out << "ignore";
        break;
      case ColumnRole::External:
        out << "external,continuous";
        if (col.log_transform) out << ",log";
        break;
      case ColumnRole::Indicator:
        if (col.type == ColumnType::Dichotomous) {
          out << "indicator,dichotomous";
        } else {
          out << "indicator,nominal(" << col.cardinality << ")";
        }
        for (const auto& l : col.labels) out << "," << l;
        break;
    }
    out << "\n";
  }
}

void ColumnSpec::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write column spec file: " + path);
  write(out);
}

const ColumnSpec::Column* ColumnSpec::find(const std::string& name) const {
  for (const auto& col : columns)
    if (col.name == name) return &col;
  return nullptr;
}

std::vector<const ColumnSpec::Column*> ColumnSpec::indicators() const {
  std::vector<const Column*> out;
  for (const auto& col : columns)
    if (col.role == ColumnRole::Indicator) out.push_back(&col);
  return out;
}

const ColumnSpec::Column* ColumnSpec::external() const {
  for (const auto& col : columns)
    if (col.role == ColumnRole::External) return &col;
  return nullptr;
}

void ColumnSpec::validate() const {
  int n_external = 0;
  int n_indicator = 0;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (std::size_t k = i + 1; k < columns.size(); ++k)
      if (columns[i].name == columns[k].name)
        throw InputError("duplicate column name '" + columns[i].name + "'");
    if (columns[i].role == ColumnRole::External) ++n_external;
    if (columns[i].role == ColumnRole::Indicator) ++n_indicator;
  }
  if (n_indicator < 1) throw InputError("column spec needs at least one indicator");
  if (n_external != 1)
    throw InputError("column spec needs exactly one external continuous column, found " +
                     std::to_string(n_external));
}

Dataset ingest(const std::string& csv_path, const ColumnSpec& spec, IngestReport* report,
               bool force_log_external) {
  spec.validate();
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot open data file: " + csv_path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw InputError("empty data file: " + csv_path);
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  const std::vector<std::string> header = split(header_line, ',');

  // Map every CSV column to a spec entry; unknown columns are an error so
  // typos do not silently drop data.
  std::vector<const ColumnSpec::Column*> by_csv(header.size(), nullptr);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    by_csv[c] = spec.find(name);
    if (by_csv[c] == nullptr)
      throw InputError("CSV column '" + name +
                       "' has no column-spec entry (use role 'ignore' to skip it)");
  }
  const auto indicator_cols = spec.indicators();
  const ColumnSpec::Column* external_col = spec.external();
  std::vector<int> indicator_csv_index(indicator_cols.size(), -1);
  int external_csv_index = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (by_csv[c] == external_col) external_csv_index = static_cast<int>(c);
    for (std::size_t k = 0; k < indicator_cols.size(); ++k)
      if (by_csv[c] == indicator_cols[k]) indicator_csv_index[k] = static_cast<int>(c);
  }
  for (std::size_t k = 0; k < indicator_cols.size(); ++k)
    if (indicator_csv_index[k] < 0)
      throw InputError("indicator column '" + indicator_cols[k]->name + "' not found in CSV");
  if (external_csv_index < 0)
    throw InputError("external column '" + external_col->name + "' not found in CSV");

  const bool log_external = external_col->log_transform || force_log_external;

  Dataset data;
  data.j = static_cast<int>(indicator_cols.size());
  for (const auto* col : indicator_cols) {
    data.cardinalities.push_back(col->cardinality);
    data.column_names.push_back(col->name);
  }
  data.column_names.push_back(external_col->name);

  IngestReport rep;
  std::string line;
  int line_no = 1;
  std::vector<std::uint8_t> row_codes(data.j);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++rep.rows_read;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size())
      throw InputError("row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " fields, header has " +
                       std::to_string(header.size()));
    bool missing = is_missing(cells[external_csv_index]);
    for (std::size_t k = 0; k < indicator_cols.size() && !missing; ++k)
      missing = is_missing(cells[indicator_csv_index[k]]);
    if (missing) {
      ++rep.dropped_missing;
      continue;
    }

    double z = parse_double(cells[external_csv_index],
                            "row " + std::to_string(line_no) + ", column '" +
                                external_col->name + "'");
    if (log_external) {
      if (!(z > 0.0)) {
        ++rep.dropped_nonpositive_log;
        continue;
      }
      z = std::log(z);
    }
    if (!std::isfinite(z))
      throw InputError("non-finite external value at row " + std::to_string(line_no));

    for (std::size_t k = 0; k < indicator_cols.size(); ++k) {
      const ColumnSpec::Column& col = *indicator_cols[k];
      const std::string cell = trim(cells[indicator_csv_index[k]]);
      const std::string where = "row " + std::to_string(line_no) + ", column '" + col.name + "'";
      int code = -1;
      if (!col.labels.empty()) {
        for (std::size_t l = 0; l < col.labels.size(); ++l)
          if (col.labels[l] == cell) code = static_cast<int>(l);
        if (code < 0) throw InputError("unknown category label '" + cell + "' at " + where);
      } else {
        const double v = parse_double(cell, where);
        code = static_cast<int>(v);
        if (static_cast<double>(code) != v)
          throw InputError("non-integer category code at " + where);
        if (code < 0 || code >= col.cardinality)
          throw InputError("category code " + std::to_string(code) + " out of range [0, " +
                           std::to_string(col.cardinality) + ") at " + where);
      }
      row_codes[k] = static_cast<std::uint8_t>(code);
    }
    data.codes.insert(data.codes.end(), row_codes.begin(), row_codes.end());
    data.z.push_back(z);
  }
  data.n = static_cast<int>(data.z.size());
  if (data.n == 0) throw InputError("no usable rows in " + csv_path);
  data.validate();
  if (report != nullptr) *report = rep;
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write data file: " + path);
  for (int item = 0; item < data.j; ++item) out << data.column_names[item] << ",";
  out << data.column_names[data.j] << "\n";
  for (int row = 0; row < data.n; ++row) {
    for (int item = 0; item < data.j; ++item) out << int{data.code(row, item)} << ",";
    out << format_double(data.z[row]) << "\n";
  }
}

ColumnSpec column_spec_for(const Dataset& data) {
  ColumnSpec spec;
  for (int item = 0; item < data.j; ++item) {
    ColumnSpec::Column col;
    col.name = data.column_names[item];
    col.role = ColumnRole::Indicator;
    col.type = data.cardinalities[item] == 2 ? ColumnType::Dichotomous : ColumnType::Nominal;
    col.cardinality = data.cardinalities[item];
    spec.columns.push_back(std::move(col));
  }
  ColumnSpec::Column ext;
  ext.name = data.column_names[data.j];
  ext.role = ColumnRole::External;
  ext.type = ColumnType::Continuous;
  spec.columns.push_back(std::move(ext));
  return spec;
}

namespace {

template <typename T>
std::string join_csv(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ",";
    if constexpr (std::is_same_v<T, double>) {
      out << format_double(values[i]);
    } else {
      out << values[i];
    }
  }
  return out.str();
}

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  for (const auto& tok : split(value, ','))
    if (!trim(tok).empty()) out.push_back(parse_double(tok, "truth file"));
  return out;
}

}  // namespace

void write_truth_file(const std::string& path, const StudyDesign& design, std::uint64_t seed,
                      const Partition& labels) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write truth file: " + path);
  out << "design = " << to_string(design.generator) << "\n";
  out << "seed = " << seed << "\n";
  out << "n = " << design.n << "\n";
  out << "classes = " << design.n_classes << "\n";
  out << "items = " << design.n_items << "\n";
  out << "mix = " << join_csv(design.mix) << "\n";
  if (design.generator != ModelVariant::LCreg) {
    out << "z_means = " << join_csv(design.z_means) << "\n";
    out << "z_variance = " << format_double(design.z_variance) << "\n";
  }
  if (design.generator != ModelVariant::LCdist)
    out << "slopes = " << join_csv(design.slopes) << "\n";
  out << "intercept_magnitude = " << format_double(design.intercept_magnitude) << "\n";
  out << "labels = " << join_csv(labels.labels) << "\n";
}

TruthFile read_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open truth file: " + path);
  TruthFile out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("malformed truth line: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "design") {
      out.design.generator = model_variant_from_string(value);
    } else if (key == "seed") {
      out.seed = std::stoull(value);
    } else if (key == "n") {
      out.design.n = std::stoi(value);
    } else if (key == "classes") {
      out.design.n_classes = std::stoi(value);
    } else if (key == "items") {
      out.design.n_items = std::stoi(value);
    } else if (key == "mix") {
      out.design.mix = parse_double_list(value);
    } else if (key == "z_means") {
      out.design.z_means = parse_double_list(value);
    } else if (key == "z_variance") {
      out.design.z_variance = parse_double(value, path);
    } else if (key == "slopes") {
      out.design.slopes = parse_double_list(value);
    } else if (key == "intercept_magnitude") {
      out.design.intercept_magnitude = parse_double(value, path);
    } else if (key == "labels") {
      for (const auto& tok : split(value, ','))
        if (!trim(tok).empty()) out.labels.labels.push_back(std::stoi(tok));
    } else {
      throw InputError("unknown truth file key '" + key + "'");
    }
  }
  out.design.validate();
  return out;
}

std::string save_fit_result(const std::string& directory, const FitResult& fit,
                            const std::vector<std::string>& column_names, std::uint64_t seed) {
  fs::create_directories(directory);
  const ModelSpec& spec = fit.spec;
  const ParameterLayout layout(spec);

  json doc;
  doc["model"] = to_string(spec.variant);
  doc["classes"] = spec.n_classes;
  doc["variance_mode"] = to_string(spec.variance_mode);
  doc["cardinalities"] = spec.cardinalities;
  {
    std::vector<std::string> constraints;
    for (auto c : spec.slope_constraints) constraints.push_back(to_string(c));
    doc["slope_constraints"] = constraints;
  }
  doc["column_names"] = column_names;
  doc["n_obs"] = static_cast<int>(fit.posteriors.rows());
  doc["loglik"] = fit.loglik;
  doc["n_params"] = fit.n_params;
  doc["bic"] = bic(fit.loglik, fit.n_params, static_cast<int>(fit.posteriors.rows()));
  doc["entropy_r2"] = entropy_r2(fit.posteriors, fit.params.class_proportions());
  doc["classification_error"] = classification_error(fit.posteriors);
  doc["converged"] = fit.converged;
  doc["n_iterations"] = fit.n_iterations;
  doc["start_index"] = fit.start_index;
  doc["seed"] = seed;
  doc["flags"] = fit.flags;

  json params;
  params["theta"] = fit.params.theta;
  params["class_proportions"] = fit.params.class_proportions();
  if (spec.models_z()) {
    params["mu"] = fit.params.mu;
    params["sigma2"] = fit.params.sigma2;
  }
  params["beta0"] = fit.params.beta0;
  params["beta"] = fit.params.beta;
  doc["parameters"] = std::move(params);

  std::vector<std::string> item_names(column_names.begin(),
                                      column_names.size() > 1 ? column_names.end() - 1
                                                              : column_names.end());
  doc["free_parameter_names"] = layout.names(item_names);
  if (fit.se.has_value())
    doc["se"] = std::vector<double>(fit.se->data(), fit.se->data() + fit.se->size());
  if (fit.covariance.has_value()) {
    json cov = json::array();
    for (Eigen::Index i = 0; i < fit.covariance->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < fit.covariance->cols(); ++k) row.push_back((*fit.covariance)(i, k));
      cov.push_back(std::move(row));
    }
    doc["covariance"] = std::move(cov);
  }
  doc["posteriors_csv"] = "posteriors.csv";

  const fs::path post_path = fs::path(directory) / "posteriors.csv";
  {
    std::ofstream out(post_path);
    if (!out) throw InputError("cannot write " + post_path.string());
    for (int s = 0; s < spec.n_classes; ++s) out << (s > 0 ? "," : "") << "class" << (s + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < fit.posteriors.rows(); ++i) {
      for (int s = 0; s < spec.n_classes; ++s)
        out << (s > 0 ? "," : "") << format_double(fit.posteriors(i, s));
      out << "\n";
    }
  }

  const fs::path result_path = fs::path(directory) / "result.json";
  std::ofstream out(result_path);
  if (!out) throw InputError("cannot write " + result_path.string());
  out << doc.dump(2) << "\n";
  return result_path.string();
}

LoadedFit load_fit_result(const std::string& result_json_path) {
  std::ifstream in(result_json_path);
  if (!in) throw InputError("cannot open result file: " + result_json_path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw InputError("malformed result document " + result_json_path + ": " + e.what());
  }

  LoadedFit out;
  std::vector<SlopeConstraint> constraints;
  for (const auto& c : doc.at("slope_constraints"))
    constraints.push_back(slope_constraint_from_string(c.get<std::string>()));
  out.fit.spec = ModelSpec::make(model_variant_from_string(doc.at("model").get<std::string>()),
                                 doc.at("classes").get<int>(),
                                 doc.at("cardinalities").get<std::vector<int>>(),
                                 variance_mode_from_string(doc.at("variance_mode").get<std::string>()),
                                 std::move(constraints));
  const ModelSpec& spec = out.fit.spec;

  Parameters p = Parameters::zeros(spec);
  const json& jp = doc.at("parameters");
  p.theta = jp.at("theta").get<std::vector<double>>();
  if (spec.models_z()) {
    p.mu = jp.at("mu").get<std::vector<double>>();
    p.sigma2 = jp.at("sigma2").get<std::vector<double>>();
  }
  p.beta0 = jp.at("beta0").get<std::vector<std::vector<double>>>();
  p.beta = jp.at("beta").get<std::vector<std::vector<double>>>();
  p.validate(spec);
  out.fit.params = std::move(p);

  out.fit.loglik = doc.at("loglik").get<double>();
  out.fit.n_params = doc.at("n_params").get<int>();
  out.fit.converged = doc.at("converged").get<bool>();
  out.fit.n_iterations = doc.at("n_iterations").get<int>();
  out.fit.start_index = doc.at("start_index").get<int>();
  out.fit.flags = doc.at("flags").get<std::vector<std::string>>();
  out.column_names = doc.at("column_names").get<std::vector<std::string>>();
  out.seed = doc.at("seed").get<std::uint64_t>();

  if (doc.contains("se")) {
    const auto se = doc.at("se").get<std::vector<double>>();
    out.fit.se = Eigen::Map<const Eigen::VectorXd>(se.data(), se.size());
  }
  if (doc.contains("covariance")) {
    const auto& jc = doc.at("covariance");
    Eigen::MatrixXd cov(jc.size(), jc.size());
    for (std::size_t i = 0; i < jc.size(); ++i)
      for (std::size_t k = 0; k < jc.size(); ++k) cov(i, k) = jc[i][k].get<double>();
    out.fit.covariance = std::move(cov);
  }

  const fs::path post_path =
      fs::path(result_json_path).parent_path() / doc.at("posteriors_csv").get<std::string>();
  std::ifstream pin(post_path);
  if (!pin) throw InputError("cannot open posteriors file: " + post_path.string());
  std::string line;
  std::getline(pin, line);  // header
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(pin, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ','))
      row.push_back(parse_double(cell, post_path.string() + ":" + std::to_string(line_no)));
    if (static_cast<int>(row.size()) != spec.n_classes)
      throw InputError("posterior row has wrong width at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  out.fit.posteriors.resize(rows.size(), spec.n_classes);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int s = 0; s < spec.n_classes; ++s) out.fit.posteriors(i, s) = rows[i][s];
  return out;
}

}  // namespace lcmix
