#include "finshap/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace finshap {

std::string to_string(ClassScope scope) {
  switch (scope) {
    case ClassScope::Class0: return "class0";
    case ClassScope::Class1: return "class1";
    case ClassScope::Both: return "both";
  }
  return "unknown";
}

std::string to_string(RankDirection direction) {
  return direction == RankDirection::Highest ? "highest" : "lowest";
}

std::string to_string(ValueMode mode) { return mode == ValueMode::Signed ? "signed" : "absolute"; }

namespace {

ClassScope class_scope_from_string(const std::string& s) {
  if (s == "class0") return ClassScope::Class0;
  if (s == "class1") return ClassScope::Class1;
  if (s == "both") return ClassScope::Both;
  throw ConfigError("unknown class scope: " + s);
}

RankDirection direction_from_string(const std::string& s) {
  if (s == "highest") return RankDirection::Highest;
  if (s == "lowest") return RankDirection::Lowest;
  throw ConfigError("unknown rank direction: " + s);
}

ValueMode mode_from_string(const std::string& s) {
  if (s == "signed") return ValueMode::Signed;
  if (s == "absolute") return ValueMode::Absolute;
  throw ConfigError("unknown value mode: " + s);
}

void append_csv_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

nlohmann::json AttributionMatrix::to_json() const {
  nlohmann::json doc;
  doc["n_instances"] = n_;
  doc["n_columns"] = m_;
  doc["group_level"] = group_level;
  doc["method"] = to_string(method);
  doc["seed"] = seed;
  doc["column_names"] = column_names;
  doc["instance_ids"] = instance_ids;
  doc["evaluations"] = evaluations;
  doc["values"] = values_;  // [instance][column][class] flattened
  return doc;
}

AttributionMatrix AttributionMatrix::from_json(const nlohmann::json& doc) {
  AttributionMatrix attr(doc.at("n_instances").get<std::size_t>(),
                         doc.at("n_columns").get<std::size_t>());
  attr.group_level = doc.at("group_level").get<bool>();
  attr.method = attribution_method_from_string(doc.at("method").get<std::string>());
  attr.seed = doc.at("seed").get<std::uint64_t>();
  attr.column_names = doc.at("column_names").get<std::vector<std::string>>();
  attr.instance_ids = doc.at("instance_ids").get<std::vector<std::string>>();
  attr.evaluations = doc.at("evaluations").get<std::vector<std::uint64_t>>();
  auto values = doc.at("values").get<std::vector<double>>();
  if (values.size() != attr.values_.size()) {
    throw DataError("attribution json: payload size mismatch");
  }
  attr.values_ = std::move(values);
  return attr;
}

Partition schema_partition(const FeatureSchema& schema) {
  std::vector<Coalition> groups;
  const FeatureGroup order[kFeatureGroupCount] = {
      FeatureGroup::FinancialProfile, FeatureGroup::BalanceSheet, FeatureGroup::IncomeStatement,
      FeatureGroup::RatioAnalysis};
  for (FeatureGroup g : order) {
    const auto positions = schema.group_positions(g);
    if (positions.empty()) continue;
    Coalition c(schema.size());
    for (std::size_t p : positions) c.insert(p);
    groups.push_back(std::move(c));
  }
  return Partition(schema.size(), std::move(groups));
}

namespace {

ShapleyResult run_estimator(const CoalitionGame& game, const ExplainConfig& config,
                            const Partition* partition, std::uint64_t sub_seed) {
  switch (config.method) {
    case AttributionMethod::Exact:
      return exact_shapley(game, config.exact_cap);
    case AttributionMethod::Permutation:
      return sampled_shapley(game, config.n_permutations, sub_seed);
    case AttributionMethod::Kernel:
      return kernel_shap(game, config.effective_kernel_budget(game.players()), sub_seed,
                         config.regularization);
    case AttributionMethod::Partition:
      return partition_shapley(game, *partition, config.exact_cap);
  }
  throw ConfigError("explain: unknown attribution method");
}

}  // namespace

AttributionMatrix explain_dataset(const Model& model, const LabeledDataset& test,
                                  const Matrix& background, const ExplainConfig& config,
                                  std::uint64_t seed, std::size_t workers) {
  const std::size_t M = model.feature_count();
  if (static_cast<std::size_t>(test.X.cols()) != M) {
    throw ShapeError("explain_dataset: test width != model feature count");
  }
  if (static_cast<std::size_t>(background.cols()) != M) {
    throw ShapeError("explain_dataset: background width != model feature count");
  }

  const bool partitioned = config.method == AttributionMethod::Partition;
  Partition partition = partitioned ? schema_partition(test.schema) : Partition::singletons(1);

  const std::size_t n = test.rows();
  const std::size_t n_cols = partitioned ? partition.groups().size() : M;
  AttributionMatrix attr(n, n_cols);
  attr.method = config.method;
  attr.seed = seed;
  attr.group_level = partitioned;
  attr.instance_ids.resize(n);
  attr.evaluations.assign(n, 0);
  if (partitioned) {
    for (const auto& group : partition.groups()) {
      attr.column_names.push_back(to_string(test.schema.at(group.members().front()).group));
    }
  } else {
    for (const auto& f : test.schema.features()) attr.column_names.push_back(f.name);
  }

  parallel_for(n, workers, [&](std::size_t i) {
    const Vector instance = test.X.row(static_cast<Eigen::Index>(i)).transpose();
    const std::uint64_t sub_seed = derive_seed(seed, "instance", i);
    attr.instance_ids[i] = test.company_ids[i] + "@" + std::to_string(test.years[i]);
    for (int cls = 0; cls < 2; ++cls) {
      auto game = masking_game(model, instance, background, cls, config.baseline);
      const ShapleyResult result =
          run_estimator(*game, config, partitioned ? &partition : nullptr, sub_seed);
      for (std::size_t col = 0; col < n_cols; ++col) {
        attr.at(i, col, static_cast<std::size_t>(cls)) = result.phi[col];
      }
      attr.evaluations[i] += result.evaluations_used;
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t col = 0; col < n_cols; ++col) {
      if (!std::isfinite(attr.at(i, col, 0)) || !std::isfinite(attr.at(i, col, 1))) {
        throw NumericalError("explain_dataset: non-finite attribution at instance " +
                             std::to_string(i));
      }
    }
  }
  return attr;
}

namespace {

// Deterministic per-instance top-k column selection.
std::vector<std::size_t> select_topk(const AttributionMatrix& attr, std::size_t instance,
                                     std::size_t k, ClassScope scope, RankDirection direction,
                                     ValueMode mode) {
  const std::size_t m = attr.columns();
  std::vector<std::pair<double, std::size_t>> scored(m);
  for (std::size_t col = 0; col < m; ++col) {
    double v;
    if (scope == ClassScope::Both) {
      v = std::max(std::abs(attr.at(instance, col, 0)), std::abs(attr.at(instance, col, 1)));
    } else {
      v = attr.at(instance, col, scope == ClassScope::Class0 ? 0 : 1);
      if (mode == ValueMode::Absolute) v = std::abs(v);
    }
    scored[col] = {v, col};
  }
  if (direction == RankDirection::Highest) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
  } else {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second < b.second);
    });
  }
  std::vector<std::size_t> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = scored[j].second;
  return out;
}

}  // namespace

RankingReport rank_by_topk_frequency(const AttributionMatrix& attr, std::size_t k,
                                     ClassScope scope, RankDirection direction, ValueMode mode) {
  if (k > attr.columns()) {
    throw ConfigError("rank_by_topk_frequency: k = " + std::to_string(k) + " exceeds " +
                      std::to_string(attr.columns()) + " columns");
  }
  RankingReport report;
  report.k = k;
  report.scope = scope;
  report.direction = direction;
  report.mode = scope == ClassScope::Both ? ValueMode::Absolute : mode;
  report.n_instances = attr.instances();
  report.column_names = attr.column_names;
  report.counts.assign(attr.columns(), 0);
  for (std::size_t i = 0; i < attr.instances(); ++i) {
    for (std::size_t col : select_topk(attr, i, k, scope, direction, mode)) {
      ++report.counts[col];
    }
  }
  report.rank_order.resize(attr.columns());
  std::iota(report.rank_order.begin(), report.rank_order.end(), std::size_t{0});
  std::sort(report.rank_order.begin(), report.rank_order.end(), [&](std::size_t a, std::size_t b) {
    return report.counts[a] > report.counts[b] || (report.counts[a] == report.counts[b] && a < b);
  });
  return report;
}

RankingReport per_class_ranking(const AttributionMatrix& attr, std::size_t k, int class_id,
                                RankDirection direction) {
  if (class_id != 0 && class_id != 1) {
    throw ConfigError("per_class_ranking: class_id must be 0 or 1");
  }
  return rank_by_topk_frequency(attr, k, class_id == 0 ? ClassScope::Class0 : ClassScope::Class1,
                                direction, ValueMode::Signed);
}

nlohmann::json RankingReport::to_json() const {
  nlohmann::json doc;
  doc["k"] = k;
  doc["scope"] = to_string(scope);
  doc["direction"] = to_string(direction);
  doc["mode"] = to_string(mode);
  doc["n_instances"] = n_instances;
  doc["counts"] = counts;
  doc["rank_order"] = rank_order;
  doc["column_names"] = column_names;
  nlohmann::json ranked = nlohmann::json::array();
  for (std::size_t r = 0; r < rank_order.size(); ++r) {
    const std::size_t col = rank_order[r];
    ranked.push_back({{"rank", r}, {"position", col}, {"name", column_names[col]},
                      {"count", counts[col]}});
  }
  doc["ranking"] = std::move(ranked);
  return doc;
}

RankingReport RankingReport::from_json(const nlohmann::json& doc) {
  RankingReport report;
  report.k = doc.at("k").get<std::size_t>();
  report.scope = class_scope_from_string(doc.at("scope").get<std::string>());
  report.direction = direction_from_string(doc.at("direction").get<std::string>());
  report.mode = mode_from_string(doc.at("mode").get<std::string>());
  report.n_instances = doc.at("n_instances").get<std::size_t>();
  report.counts = doc.at("counts").get<std::vector<std::uint64_t>>();
  report.rank_order = doc.at("rank_order").get<std::vector<std::size_t>>();
  report.column_names = doc.at("column_names").get<std::vector<std::string>>();
  if (report.rank_order.size() != report.counts.size() ||
      report.column_names.size() != report.counts.size()) {
    throw DataError("ranking json: inconsistent array lengths");
  }
  return report;
}

GroupFrequencyHistogram group_frequency_histogram(const AttributionMatrix& attr,
                                                  const FeatureSchema& schema, std::size_t k,
                                                  ClassScope scope) {
  if (attr.group_level) {
    throw DataError("group_frequency_histogram: needs feature-level attributions");
  }
  if (schema.size() != attr.columns()) {
    throw ShapeError("group_frequency_histogram: schema size != attribution columns");
  }
  if (k > attr.columns()) throw ConfigError("group_frequency_histogram: k exceeds feature count");

  GroupFrequencyHistogram hist;
  hist.k = k;
  hist.n_instances = attr.instances();
  std::array<std::uint64_t, kFeatureGroupCount> counts = {};
  for (std::size_t g = 0; g < kFeatureGroupCount; ++g) {
    hist.group_sizes[g] = schema.group_positions(static_cast<FeatureGroup>(g)).size();
  }
  for (std::size_t i = 0; i < attr.instances(); ++i) {
    for (std::size_t col :
         select_topk(attr, i, k, scope, RankDirection::Highest, ValueMode::Absolute)) {
      ++counts[static_cast<std::size_t>(schema.at(col).group)];
    }
  }
  for (std::size_t g = 0; g < kFeatureGroupCount; ++g) {
    const double denom = static_cast<double>(hist.group_sizes[g]) *
                         static_cast<double>(std::max<std::size_t>(hist.n_instances, 1));
    hist.frequency[g] = hist.group_sizes[g] == 0 ? 0.0 : static_cast<double>(counts[g]) / denom;
  }
  return hist;
}

std::string GroupFrequencyHistogram::to_csv() const {
  std::string out = "group,group_size,normalized_frequency\n";
  const FeatureGroup order[kFeatureGroupCount] = {
      FeatureGroup::FinancialProfile, FeatureGroup::BalanceSheet, FeatureGroup::IncomeStatement,
      FeatureGroup::RatioAnalysis};
  for (std::size_t g = 0; g < kFeatureGroupCount; ++g) {
    out += to_string(order[g]);
    out += ',';
    out += std::to_string(group_sizes[g]);
    out += ',';
    append_csv_double(out, frequency[g]);
    out += '\n';
  }
  return out;
}

PositionalDistribution positional_distribution(const AttributionMatrix& attr,
                                               const FeatureSchema& schema, std::size_t n_top,
                                               std::size_t n_worst, std::size_t n_bins,
                                               ClassScope scope) {
  if (attr.group_level) {
    throw DataError("positional_distribution: needs feature-level attributions");
  }
  const std::size_t m = attr.columns();
  if (schema.size() != m) {
    throw ShapeError("positional_distribution: schema size != attribution columns");
  }
  if (n_top > m || n_worst > m) {
    throw ConfigError("positional_distribution: n_top and n_worst must not exceed feature count");
  }
  if (n_bins == 0 || n_bins > m) n_bins = m;

  std::vector<std::uint64_t> top_by_pos(m, 0);
  std::vector<std::uint64_t> worst_by_pos(m, 0);
  for (std::size_t i = 0; i < attr.instances(); ++i) {
    for (std::size_t col :
         select_topk(attr, i, n_top, scope, RankDirection::Highest, ValueMode::Absolute)) {
      ++top_by_pos[col];
    }
    for (std::size_t col :
         select_topk(attr, i, n_worst, scope, RankDirection::Lowest, ValueMode::Absolute)) {
      ++worst_by_pos[col];
    }
  }

  PositionalDistribution dist;
  dist.n_top = n_top;
  dist.n_worst = n_worst;
  dist.n_instances = attr.instances();
  dist.bin_start.resize(n_bins);
  dist.bin_end.resize(n_bins);
  dist.top_counts.assign(n_bins, 0);
  dist.worst_counts.assign(n_bins, 0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    dist.bin_start[b] = b * m / n_bins;
    dist.bin_end[b] = (b + 1) * m / n_bins;
  }
  for (std::size_t p = 0; p < m; ++p) {
    const std::size_t b = std::min(p * n_bins / m, n_bins - 1);
    dist.top_counts[b] += top_by_pos[p];
    dist.worst_counts[b] += worst_by_pos[p];
  }
  return dist;
}

std::string PositionalDistribution::to_csv() const {
  std::string out = "bin,position_start,position_end,top_count,worst_count\n";
  for (std::size_t b = 0; b < bin_start.size(); ++b) {
    out += std::to_string(b);
    out += ',';
    out += std::to_string(bin_start[b]);
    out += ',';
    out += std::to_string(bin_end[b]);
    out += ',';
    out += std::to_string(top_counts[b]);
    out += ',';
    out += std::to_string(worst_counts[b]);
    out += '\n';
  }
  return out;
}

Matrix select_columns(const Matrix& X, const std::vector<std::size_t>& positions) {
  Matrix out(X.rows(), static_cast<Eigen::Index>(positions.size()));
  for (std::size_t j = 0; j < positions.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(positions[j]));
  }
  return out;
}

SubsetValidationReport subset_validation(const LabeledDataset& train, const LabeledDataset& test,
                                         const RankingReport& ranking, std::size_t keep_top_n,
                                         std::size_t drop_bottom_m, const ModelHyper& hyper,
                                         std::uint64_t seed, std::size_t workers) {
  const std::size_t m = ranking.rank_order.size();
  if (static_cast<std::size_t>(train.X.cols()) != m ||
      static_cast<std::size_t>(test.X.cols()) != m) {
    throw ShapeError("subset_validation: ranking covers " + std::to_string(m) +
                     " features, data has " + std::to_string(train.X.cols()));
  }
  if (keep_top_n == 0 || keep_top_n > m) {
    throw ConfigError("subset_validation: keep_top_n must be in 1.." + std::to_string(m));
  }
  if (drop_bottom_m >= m) {
    throw ConfigError("subset_validation: dropping " + std::to_string(drop_bottom_m) +
                      " of " + std::to_string(m) + " features leaves an empty subset");
  }

  auto run = [&](std::string label, std::vector<std::size_t> features) {
    std::sort(features.begin(), features.end());
    const Matrix Xtr = select_columns(train.X, features);
    const Matrix Xte = select_columns(test.X, features);
    const auto model = train_model(Xtr, train.y, hyper, seed, workers);
    const Vector scores = model->predict_proba(Xte);
    SubsetRun out;
    out.label = std::move(label);
    out.features = std::move(features);
    out.eval = evaluate(test.y, {scores.data(), scores.data() + scores.size()});
    return out;
  };

  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> top(ranking.rank_order.begin(),
                               ranking.rank_order.begin() + static_cast<std::ptrdiff_t>(keep_top_n));
  std::vector<std::size_t> kept(ranking.rank_order.begin(),
                                ranking.rank_order.end() - static_cast<std::ptrdiff_t>(drop_bottom_m));

  SubsetValidationReport report;
  report.keep_top_n = keep_top_n;
  report.drop_bottom_m = drop_bottom_m;
  report.model_kind = hyper.kind;
  report.seed = seed;
  report.all_features = run("all_features", std::move(all));
  report.top_subset = run("top_" + std::to_string(keep_top_n), std::move(top));
  report.drop_subset = run("drop_bottom_" + std::to_string(drop_bottom_m), std::move(kept));
  return report;
}

nlohmann::json SubsetValidationReport::to_json() const {
  auto run_json = [](const SubsetRun& run) {
    return nlohmann::json{{"label", run.label},
                          {"n_features", run.features.size()},
                          {"features", run.features},
                          {"accuracy", run.eval.accuracy},
                          {"roc_auc", run.eval.roc_auc},
                          {"n_test", run.eval.n_test}};
  };
  nlohmann::json doc;
  doc["keep_top_n"] = keep_top_n;
  doc["drop_bottom_m"] = drop_bottom_m;
  doc["model_kind"] = to_string(model_kind);
  doc["seed"] = seed;
  doc["all_features"] = run_json(all_features);
  doc["top_subset"] = run_json(top_subset);
  doc["drop_subset"] = run_json(drop_subset);
  return doc;
}

}  // namespace finshap
