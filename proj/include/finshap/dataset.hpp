#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "finshap/common.hpp"
#include "finshap/schema.hpp"

namespace finshap {

// Ratio denominators with magnitude below this are zero-guarded.
inline constexpr double kZeroDenominator = 1e-12;

struct PanelRow {
  std::string company_id;
  int year = 0;
  Vector values;              // length F
  std::vector<bool> missing;  // true where the source cell was empty before imputation
};

// Company-year feature matrix; (company_id, year) pairs are unique.
class PanelDataset {
 public:
  PanelDataset() = default;
  PanelDataset(FeatureSchema schema, std::vector<PanelRow> rows);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<PanelRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Row index by (company_id, year), or npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find_row(const std::string& company_id, int year) const;

 private:
  FeatureSchema schema_;
  std::vector<PanelRow> rows_;
  std::unordered_map<std::string, std::size_t> index_;  // "company\x1fyear" -> row
};

struct LabelDiagnostics {
  std::size_t ties = 0;             // pairs with unchanged ROI, labeled 0
  std::size_t dropped_missing = 0;  // consecutive-year pairs lost to a missing ROI
};

struct LabeledDataset {
  Matrix X;
  std::vector<int> y;  // 1 = ROI increased the following year
  std::vector<int> years;
  std::vector<std::string> company_ids;
  FeatureSchema schema;
  LabelDiagnostics diagnostics;

  std::size_t rows() const { return y.size(); }
};

struct YearSplit {
  LabeledDataset train;
  LabeledDataset test;
  std::size_t discarded = 0;  // rows in neither partition
};

struct RatioTerm {
  std::string feature;
  double sign = 1.0;
};

struct RatioDef {
  std::string name;
  std::vector<RatioTerm> numerator;
  std::vector<RatioTerm> denominator;
};

struct RatioSpec {
  std::vector<RatioDef> ratios;

  nlohmann::json to_json() const;
  static RatioSpec from_json(const nlohmann::json& doc);
  static RatioSpec load(const std::string& path);
  void save(const std::string& path) const;
};

// CSV contract: UTF-8, header `company_id,year,<names in schema order>`,
// '.' decimal separator, empty string = missing (imputed to 0 and flagged).
PanelDataset load_panel(const std::string& csv_path, const std::string& schema_path);
PanelDataset load_panel_csv(const std::string& csv_path, const FeatureSchema& schema);
void save_panel_csv(const PanelDataset& panel, const std::string& csv_path);

// One labeled row per company and consecutive-year pair (t, t+1) with both
// ROI values present: features at t, y = 1 iff ROI rose. Ties label 0.
LabeledDataset build_labels(const PanelDataset& panel, const std::string& roi_feature);

// Same labeling rule, but features come from feature_panel while the ROI
// series is read from roi_panel; rows are matched on (company_id, year).
LabeledDataset build_labels(const PanelDataset& feature_panel, const PanelDataset& roi_panel,
                            const std::string& roi_feature);

// train = rows with year <= train_last_year, test = rows with year == test_year.
YearSplit split_by_year(const LabeledDataset& ds, int train_last_year, int test_year);

// Row-wise ratio panel; output schema holds only the ratio features, all in
// the RatioAnalysis group. Near-zero denominators emit 0 with the mask set.
PanelDataset compute_ratios(const PanelDataset& panel, const RatioSpec& spec);

}  // namespace finshap
