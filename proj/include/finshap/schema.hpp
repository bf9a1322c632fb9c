#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "finshap/common.hpp"

namespace finshap {

// The four parts of a statutory financial statement, read top to bottom.
enum class FeatureGroup { FinancialProfile, BalanceSheet, IncomeStatement, RatioAnalysis };

inline constexpr std::size_t kFeatureGroupCount = 4;

std::string to_string(FeatureGroup group);
FeatureGroup feature_group_from_string(const std::string& name);

struct FeatureInfo {
  std::string name;
  FeatureGroup group = FeatureGroup::FinancialProfile;
  std::size_t position = 0;

  bool operator==(const FeatureInfo&) const = default;
};

// Ordered feature catalog. Positions are 0..F-1 with no gaps, names are
// unique, and each group's features form one contiguous block.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureInfo> features);

  std::size_t size() const { return features_.size(); }
  const FeatureInfo& at(std::size_t position) const { return features_.at(position); }
  const std::vector<FeatureInfo>& features() const { return features_; }

  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;  // throws DataError if absent

  std::vector<std::size_t> group_positions(FeatureGroup group) const;

  bool operator==(const FeatureSchema& other) const { return features_ == other.features_; }

  nlohmann::json to_json() const;
  static FeatureSchema from_json(const nlohmann::json& doc);
  static FeatureSchema load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<FeatureInfo> features_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace finshap
