#include "finshap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace finshap {

namespace {

std::string row_key(const std::string& company_id, int year) {
  return company_id + '\x1f' + std::to_string(year);
}

// Shortest representation that parses back to the same double.
void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t line, const std::string& column) {
  double v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DataError("panel csv: non-numeric cell at line " + std::to_string(line) + ", column '" +
                    column + "': '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace

PanelDataset::PanelDataset(FeatureSchema schema, std::vector<PanelRow> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  const auto F = static_cast<Eigen::Index>(schema_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const PanelRow& row = rows_[i];
    if (row.values.size() != F || row.missing.size() != schema_.size()) {
      throw DataError("panel: row " + std::to_string(i) + " has " +
                      std::to_string(row.values.size()) + " values, schema has " +
                      std::to_string(schema_.size()));
    }
    if (!index_.emplace(row_key(row.company_id, row.year), i).second) {
      throw DataError("panel: duplicate (company_id, year) = ('" + row.company_id + "', " +
                      std::to_string(row.year) + ")");
    }
  }
}

std::size_t PanelDataset::find_row(const std::string& company_id, int year) const {
  auto it = index_.find(row_key(company_id, year));
  return it == index_.end() ? npos : it->second;
}

PanelDataset load_panel(const std::string& csv_path, const std::string& schema_path) {
  return load_panel_csv(csv_path, FeatureSchema::load(schema_path));
}

PanelDataset load_panel_csv(const std::string& csv_path, const FeatureSchema& schema) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("panel csv: cannot open " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("panel csv: " + csv_path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  if (header.size() != schema.size() + 2 || header[0] != "company_id" || header[1] != "year") {
    throw DataError("panel csv: header must be company_id,year,<" + std::to_string(schema.size()) +
                    " schema columns>; got " + std::to_string(header.size()) + " columns");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (header[i + 2] != schema.at(i).name) {
      throw DataError("panel csv: column " + std::to_string(i + 2) + " is '" +
                      std::string(header[i + 2]) + "', schema expects '" + schema.at(i).name + "'");
    }
  }

  std::vector<PanelRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != schema.size() + 2) {
      throw DataError("panel csv: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(schema.size() + 2));
    }
    PanelRow row;
    row.company_id = std::string(fields[0]);
    int year{};
    auto res = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), year);
    if (res.ec != std::errc{} || res.ptr != fields[1].data() + fields[1].size()) {
      throw DataError("panel csv: non-integer year at line " + std::to_string(line_no));
    }
    row.year = year;
    row.values = Vector::Zero(static_cast<Eigen::Index>(schema.size()));
    row.missing.assign(schema.size(), false);
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const auto cell = fields[f + 2];
      if (cell.empty()) {
        row.missing[f] = true;  // imputed to 0
      } else {
        row.values[static_cast<Eigen::Index>(f)] = parse_double(cell, line_no, schema.at(f).name);
      }
    }
    rows.push_back(std::move(row));
  }
  return PanelDataset(schema, std::move(rows));
}

void save_panel_csv(const PanelDataset& panel, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw DataError("panel csv: cannot write " + csv_path);
  std::string buf = "company_id,year";
  for (const auto& f : panel.schema().features()) {
    buf += ',';
    buf += f.name;
  }
  buf += '\n';
  for (const PanelRow& row : panel.rows()) {
    buf += row.company_id;
    buf += ',';
    buf += std::to_string(row.year);
    for (std::size_t f = 0; f < panel.schema().size(); ++f) {
      buf += ',';
      if (!row.missing[f]) append_double(buf, row.values[static_cast<Eigen::Index>(f)]);
    }
    buf += '\n';
    out << buf;
    buf.clear();
  }
}

LabeledDataset build_labels(const PanelDataset& panel, const std::string& roi_feature) {
  return build_labels(panel, panel, roi_feature);
}

LabeledDataset build_labels(const PanelDataset& feature_panel, const PanelDataset& roi_panel,
                            const std::string& roi_feature) {
  if (feature_panel.size() == 0) throw DataError("build_labels: empty panel");
  const auto roi_pos = static_cast<Eigen::Index>(roi_panel.schema().index_of(roi_feature));

  LabeledDataset out;
  out.schema = feature_panel.schema();

  std::vector<std::size_t> kept;
  std::vector<int> labels;
  for (std::size_t i = 0; i < feature_panel.size(); ++i) {
    const PanelRow& row = feature_panel.rows()[i];
    const std::size_t cur = roi_panel.find_row(row.company_id, row.year);
    const std::size_t next = roi_panel.find_row(row.company_id, row.year + 1);
    if (cur == PanelDataset::npos || next == PanelDataset::npos) continue;
    const PanelRow& roi_now = roi_panel.rows()[cur];
    const PanelRow& roi_next = roi_panel.rows()[next];
    if (roi_now.missing[static_cast<std::size_t>(roi_pos)] ||
        roi_next.missing[static_cast<std::size_t>(roi_pos)]) {
      ++out.diagnostics.dropped_missing;
      continue;
    }
    const double a = roi_now.values[roi_pos];
    const double b = roi_next.values[roi_pos];
    if (b == a) ++out.diagnostics.ties;  // unchanged ROI counts as "no increase"
    kept.push_back(i);
    labels.push_back(b > a ? 1 : 0);
  }
  if (kept.empty()) throw DataError("build_labels: no labelable rows (need consecutive years)");

  const auto F = static_cast<Eigen::Index>(feature_panel.schema().size());
  out.X.resize(static_cast<Eigen::Index>(kept.size()), F);
  out.y = std::move(labels);
  out.years.reserve(kept.size());
  out.company_ids.reserve(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const PanelRow& row = feature_panel.rows()[kept[r]];
    out.X.row(static_cast<Eigen::Index>(r)) = row.values.transpose();
    out.years.push_back(row.year);
    out.company_ids.push_back(row.company_id);
  }
  return out;
}

namespace {

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& keep) {
  LabeledDataset out;
  out.schema = ds.schema;
  out.diagnostics = LabelDiagnostics{};
  out.X.resize(static_cast<Eigen::Index>(keep.size()), ds.X.cols());
  out.y.reserve(keep.size());
  out.years.reserve(keep.size());
  out.company_ids.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.X.row(static_cast<Eigen::Index>(r)) = ds.X.row(static_cast<Eigen::Index>(keep[r]));
    out.y.push_back(ds.y[keep[r]]);
    out.years.push_back(ds.years[keep[r]]);
    out.company_ids.push_back(ds.company_ids[keep[r]]);
  }
  return out;
}

}  // namespace

YearSplit split_by_year(const LabeledDataset& ds, int train_last_year, int test_year) {
  if (test_year <= train_last_year) {
    throw ConfigError("split_by_year: test_year must be after train_last_year");
  }
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::size_t discarded = 0;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    if (ds.years[i] <= train_last_year) {
      train_rows.push_back(i);
    } else if (ds.years[i] == test_year) {
      test_rows.push_back(i);
    } else {
      ++discarded;
    }
  }
  if (train_rows.empty() || test_rows.empty()) {
    std::map<int, std::size_t> histogram;
    for (int year : ds.years) ++histogram[year];
    std::ostringstream oss;
    oss << "split_by_year: empty " << (train_rows.empty() ? "train" : "test")
        << " partition (train <= " << train_last_year << ", test = " << test_year
        << "); year histogram:";
    for (const auto& [year, count] : histogram) oss << ' ' << year << 'x' << count;
    throw DataError(oss.str());
  }
  YearSplit split;
  split.train = take_rows(ds, train_rows);
  split.test = take_rows(ds, test_rows);
  split.discarded = discarded;
  return split;
}

nlohmann::json RatioSpec::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  auto side = [](const std::vector<RatioTerm>& terms) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& t : terms) s.push_back(t.sign < 0 ? "-" + t.feature : t.feature);
    return s;
  };
  for (const auto& r : ratios) {
    arr.push_back({{"name", r.name}, {"numerator", side(r.numerator)},
                   {"denominator", side(r.denominator)}});
  }
  return arr;
}

namespace {

std::vector<RatioTerm> parse_side(const nlohmann::json& node, const std::string& ratio) {
  std::vector<RatioTerm> terms;
  auto add = [&](const std::string& raw) {
    RatioTerm t;
    if (!raw.empty() && raw[0] == '-') {
      t.sign = -1.0;
      t.feature = raw.substr(1);
    } else {
      t.feature = raw;
    }
    if (t.feature.empty()) throw DataError("ratio spec: empty term in '" + ratio + "'");
    terms.push_back(std::move(t));
  };
  if (node.is_string()) {
    add(node.get<std::string>());
  } else if (node.is_array()) {
    for (const auto& item : node) add(item.get<std::string>());
  } else {
    throw DataError("ratio spec: '" + ratio + "' sides must be a name or array of names");
  }
  if (terms.empty()) throw DataError("ratio spec: '" + ratio + "' has an empty side");
  return terms;
}

}  // namespace

RatioSpec RatioSpec::from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw DataError("ratio spec: expected a JSON array");
  RatioSpec spec;
  for (const auto& item : doc) {
    RatioDef def;
    def.name = item.at("name").get<std::string>();
    def.numerator = parse_side(item.at("numerator"), def.name);
    def.denominator = parse_side(item.at("denominator"), def.name);
    spec.ratios.push_back(std::move(def));
  }
  return spec;
}

RatioSpec RatioSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("ratio spec: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("ratio spec: " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

void RatioSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("ratio spec: cannot write " + path);
  out << to_json().dump(2) << '\n';
}

PanelDataset compute_ratios(const PanelDataset& panel, const RatioSpec& spec) {
  // Resolve names once; this is also the precondition check.
  struct Resolved {
    std::vector<std::pair<Eigen::Index, double>> num;
    std::vector<std::pair<Eigen::Index, double>> den;
  };
  std::vector<Resolved> resolved;
  std::vector<FeatureInfo> features;
  for (std::size_t r = 0; r < spec.ratios.size(); ++r) {
    const RatioDef& def = spec.ratios[r];
    Resolved res;
    for (const auto& t : def.numerator) {
      res.num.emplace_back(static_cast<Eigen::Index>(panel.schema().index_of(t.feature)), t.sign);
    }
    for (const auto& t : def.denominator) {
      res.den.emplace_back(static_cast<Eigen::Index>(panel.schema().index_of(t.feature)), t.sign);
    }
    resolved.push_back(std::move(res));
    features.push_back({def.name, FeatureGroup::RatioAnalysis, r});
  }
  FeatureSchema out_schema{std::move(features)};

  std::vector<PanelRow> out_rows;
  out_rows.reserve(panel.size());
  for (const PanelRow& row : panel.rows()) {
    PanelRow out;
    out.company_id = row.company_id;
    out.year = row.year;
    out.values = Vector::Zero(static_cast<Eigen::Index>(resolved.size()));
    out.missing.assign(resolved.size(), false);
    for (std::size_t r = 0; r < resolved.size(); ++r) {
      double num = 0.0;
      double den = 0.0;
      for (const auto& [pos, sign] : resolved[r].num) num += sign * row.values[pos];
      for (const auto& [pos, sign] : resolved[r].den) den += sign * row.values[pos];
      if (std::abs(den) < kZeroDenominator) {
        out.missing[r] = true;  // zero-guard: emit 0, flag as missing
      } else {
        out.values[static_cast<Eigen::Index>(r)] = num / den;
      }
    }
    out_rows.push_back(std::move(out));
  }
  return PanelDataset(std::move(out_schema), std::move(out_rows));
}

}  // namespace finshap
