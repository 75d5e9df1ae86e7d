#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "statlim/predictor.hpp"
#include "statlim/qmodel.hpp"
#include "statlim/risk.hpp"
#include "statlim/scaling.hpp"
#include "statlim/synth.hpp"

namespace statlim::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

/// Header `x0,...,x{d-1},y`, one sample per row.
void write_dataset_csv(const Dataset& data, std::ostream& out);
/// Strict reader; malformed input throws InvalidArgument naming the line.
Dataset read_dataset_csv(std::istream& in);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// {"form": "primal", "weights": [...]} or
/// {"form": "dual", "coefficients": [...], "landmarks": [[...], ...],
///  "kernel": {"kind": "gaussian", "bandwidth": b}}
json predictor_to_json(const Predictor& predictor);
Predictor predictor_from_json(const json& j);

json risk_to_json(const RiskEstimate& estimate);
RiskEstimate risk_from_json(const json& j);

json fit_to_json(const scaling::ScalingFit& fit);

/// Header `algorithm,n,kappa,gamma,cost_units`.
void write_cost_header(std::ostream& out);
void write_cost_row(std::ostream& out, const qmodel::CostModel& model, double cost);

/// Header `entry,algorithm,train_exp,test_exp,is_quantum,retrain_per_test_round`.
void write_table1_csv(std::ostream& out);

/// Report rows `series,n,statistic,value`.
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const std::string& series, std::size_t n, const std::string& statistic,
                      double value);
void write_sweep_rows(std::ostream& out, const std::string& series, const scaling::SweepTable& table);
void write_ratio_rows(std::ostream& out, const scaling::Comparison& comparison, double max_ratio);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace statlim::io
