#include "statlim/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "statlim/errors.hpp"

namespace statlim::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw InvalidArgument(fmt::format("line {}: '{}' is not a finite number", line, text));
  }
  return v;
}

Eigen::VectorXd vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw InvalidArgument(fmt::format("predictor field '{}' must be an array", name));
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(fmt::format("predictor field '{}' must hold numbers", name));
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  for (Eigen::Index j = 0; j < data.dimension(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dimension(); ++j) out << format_double(data.features(i, j)) << ',';
    out << format_double(data.labels[i]) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") {
    throw InvalidArgument("line 1: header must be x0,...,x{d-1},y");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw InvalidArgument(fmt::format("line 1: expected column 'x{}', found '{}'", j, header[j]));
    }
  }
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != d + 1) {
      throw InvalidArgument(fmt::format("line {}: expected {} fields, found {}", line_no, d + 1, fields.size()));
    }
    for (const std::string& f : fields) values.push_back(parse_number(f, line_no));
    ++rows;
  }
  if (rows == 0) throw InvalidArgument("dataset has no samples");
  Dataset data{Eigen::MatrixXd(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d)),
               Eigen::VectorXd(static_cast<Eigen::Index>(rows)), 0};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (d + 1) + j];
    }
    data.labels[static_cast<Eigen::Index>(i)] = values[i * (d + 1) + d];
  }
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ostringstream ss;
  write_dataset_csv(data, ss);
  write_text_file(path, ss.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("cannot open dataset '{}'", path.string()));
  return read_dataset_csv(in);
}

json predictor_to_json(const Predictor& predictor) {
  if (predictor.is_primal()) {
    return {{"form", "primal"}, {"weights", vector_to_json(predictor.primal_form().weights)}};
  }
  const DualForm& f = predictor.dual_form();
  json landmarks = json::array();
  for (Eigen::Index i = 0; i < f.landmarks.rows(); ++i) {
    landmarks.push_back(vector_to_json(f.landmarks.row(i).transpose()));
  }
  json kernel = {{"kind", std::string(to_string(f.kernel.kind))}};
  if (f.kernel.kind == Kernel::Kind::gaussian) kernel["bandwidth"] = f.kernel.bandwidth;
  return {{"form", "dual"}, {"coefficients", vector_to_json(f.coefficients)}, {"landmarks", landmarks},
          {"kernel", kernel}};
}

Predictor predictor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("form") || !j["form"].is_string()) {
    throw InvalidArgument("predictor JSON needs a string 'form'");
  }
  const std::string form = j["form"].get<std::string>();
  if (form == "primal") {
    if (!j.contains("weights")) throw InvalidArgument("primal predictor needs 'weights'");
    return Predictor::primal(vector_from_json(j["weights"], "weights"));
  }
  if (form != "dual") throw InvalidArgument("unknown predictor form '" + form + "'");
  for (const char* key : {"coefficients", "landmarks", "kernel"}) {
    if (!j.contains(key)) throw InvalidArgument(fmt::format("dual predictor needs '{}'", key));
  }
  const Eigen::VectorXd coefficients = vector_from_json(j["coefficients"], "coefficients");
  const json& rows = j["landmarks"];
  if (!rows.is_array()) throw InvalidArgument("predictor field 'landmarks' must be an array");
  const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd landmarks(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::VectorXd row = vector_from_json(rows[i], "landmarks");
    if (row.size() != d) throw InvalidArgument("landmark rows differ in length");
    landmarks.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  const json& k = j["kernel"];
  if (!k.is_object() || !k.contains("kind") || !k["kind"].is_string()) {
    throw InvalidArgument("predictor kernel needs a string 'kind'");
  }
  const Kernel::Kind kind = parse_kernel_kind(k["kind"].get<std::string>());
  const Kernel kernel = kind == Kernel::Kind::linear ? Kernel::linear() : Kernel::gaussian(k.value("bandwidth", 0.0));
  return Predictor::dual(coefficients, std::move(landmarks), kernel);
}

json risk_to_json(const RiskEstimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"n_eval", e.n_eval}};
}

RiskEstimate risk_from_json(const json& j) {
  return {j.at("value").get<double>(), j.at("std_error").get<double>(), j.at("n_eval").get<std::size_t>()};
}

json fit_to_json(const scaling::ScalingFit& fit) {
  return {{"exponent", fit.exponent},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"stderr_exponent", fit.stderr_exponent},
          {"points", fit.points}};
}

void write_cost_header(std::ostream& out) { out << "algorithm,n,kappa,gamma,cost_units\n"; }

void write_cost_row(std::ostream& out, const qmodel::CostModel& model, double cost) {
  out << qmodel::to_string(model.algorithm) << ',' << model.n << ',' << format_double(model.kappa) << ','
      << format_double(model.gamma) << ',' << format_double(cost) << '\n';
}

void write_table1_csv(std::ostream& out) {
  out << "entry,algorithm,train_exp,test_exp,is_quantum,retrain_per_test_round\n";
  for (qmodel::Table1Entry e : qmodel::table1_entries()) {
    const qmodel::ComplexityRow row = qmodel::table1_complexity(e);
    out << qmodel::to_string(e) << ',' << row.algorithm << ',' << qmodel::to_string(row.train_exp) << ','
        << qmodel::to_string(row.test_exp) << ',' << (row.is_quantum ? "true" : "false") << ','
        << (row.retrain_per_test_round ? "true" : "false") << '\n';
  }
}

void write_report_header(std::ostream& out) { out << "series,n,statistic,value\n"; }

void write_report_row(std::ostream& out, const std::string& series, std::size_t n, const std::string& statistic,
                      double value) {
  out << series << ',' << n << ',' << statistic << ',' << format_double(value) << '\n';
}

void write_sweep_rows(std::ostream& out, const std::string& series, const scaling::SweepTable& table) {
  for (const scaling::SweepRow& r : table.rows) {
    write_report_row(out, series, r.n, "median_excess_risk", r.median);
    write_report_row(out, series, r.n, "q1", r.q1);
    write_report_row(out, series, r.n, "q3", r.q3);
    write_report_row(out, series, r.n, "iqr", r.iqr);
    write_report_row(out, series, r.n, "median_std_error", r.median_std_error);
    write_report_row(out, series, r.n, "trials_ok", static_cast<double>(r.ok));
    write_report_row(out, series, r.n, "trials_failed", static_cast<double>(r.failed));
  }
}

void write_ratio_rows(std::ostream& out, const scaling::Comparison& comparison, double max_ratio) {
  for (const scaling::RatioRow& r : comparison.ratios) {
    write_report_row(out, comparison.label, r.n, "ratio_to_exact", r.ratio);
    write_report_row(out, comparison.label, r.n, "ratio_mc_tolerance", r.mc_tolerance);
    write_report_row(out, comparison.label, r.n, "ratio_within_budget", r.ratio <= max_ratio ? 1.0 : 0.0);
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument(fmt::format("cannot write '{}'", path.string()));
  out << contents;
  if (!out) throw InvalidArgument(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace statlim::io
