#include "finshap/schema.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

namespace finshap {

std::string to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::FinancialProfile: return "FinancialProfile";
    case FeatureGroup::BalanceSheet: return "BalanceSheet";
    case FeatureGroup::IncomeStatement: return "IncomeStatement";
    case FeatureGroup::RatioAnalysis: return "RatioAnalysis";
  }
  return "unknown";
}

FeatureGroup feature_group_from_string(const std::string& name) {
  if (name == "FinancialProfile") return FeatureGroup::FinancialProfile;
  if (name == "BalanceSheet") return FeatureGroup::BalanceSheet;
  if (name == "IncomeStatement") return FeatureGroup::IncomeStatement;
  if (name == "RatioAnalysis") return FeatureGroup::RatioAnalysis;
  throw DataError("unknown feature group: " + name);
}

FeatureSchema::FeatureSchema(std::vector<FeatureInfo> features) : features_(std::move(features)) {
  std::sort(features_.begin(), features_.end(),
            [](const FeatureInfo& a, const FeatureInfo& b) { return a.position < b.position; });
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureInfo& f = features_[i];
    if (f.position != i) {
      throw DataError("schema: positions must be 0..F-1 without gaps or duplicates (saw " +
                      std::to_string(f.position) + " at slot " + std::to_string(i) + ")");
    }
    if (!by_name_.emplace(f.name, i).second) {
      throw DataError("schema: duplicate feature name '" + f.name + "'");
    }
  }
  // Group blocks must be contiguous, mirroring a document read top to bottom.
  std::vector<bool> closed(kFeatureGroupCount, false);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto g = static_cast<std::size_t>(features_[i].group);
    if (closed[g]) {
      throw DataError("schema: group " + to_string(features_[i].group) +
                      " is not contiguous (resumes at position " + std::to_string(i) + ")");
    }
    if (i + 1 == features_.size() || features_[i + 1].group != features_[i].group) {
      closed[g] = true;
    }
  }
}

std::optional<std::size_t> FeatureSchema::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
  auto pos = find(name);
  if (!pos) throw DataError("schema: no feature named '" + name + "'");
  return *pos;
}

std::vector<std::size_t> FeatureSchema::group_positions(FeatureGroup group) const {
  std::vector<std::size_t> out;
  for (const auto& f : features_) {
    if (f.group == group) out.push_back(f.position);
  }
  return out;
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : features_) {
    arr.push_back({{"name", f.name}, {"group", to_string(f.group)}, {"position", f.position}});
  }
  return arr;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw DataError("schema: expected a JSON array");
  std::vector<FeatureInfo> features;
  features.reserve(doc.size());
  for (const auto& item : doc) {
    FeatureInfo f;
    f.name = item.at("name").get<std::string>();
    f.group = feature_group_from_string(item.at("group").get<std::string>());
    f.position = item.at("position").get<std::size_t>();
    features.push_back(std::move(f));
  }
  return FeatureSchema(std::move(features));
}

FeatureSchema FeatureSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("schema: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema: " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

void FeatureSchema::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("schema: cannot write " + path);
  out << to_json().dump(2) << '\n';
}

}  // namespace finshap
