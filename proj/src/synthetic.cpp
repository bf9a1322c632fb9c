#include "finshap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "finshap/metrics.hpp"

namespace finshap {

namespace {

const std::vector<std::string>& canonical_names(std::size_t group) {
  static const std::vector<std::string> profile = {
      "roi", "roe", "ebitda_margin", "net_financial_position", "debt_coverage"};
  static const std::vector<std::string> balance = {
      "total_assets",        "current_assets", "inventory",  "cash",
      "accounts_receivable", "current_liabilities", "total_debt", "shareholders_equity"};
  static const std::vector<std::string> income = {
      "revenue",      "gross_profit",       "operating_income", "net_income",
      "cost_of_goods_sold", "interest_expense", "taxes"};
  static const std::vector<std::string> ratios = {};
  switch (group) {
    case 0: return profile;
    case 1: return balance;
    case 2: return income;
    default: return ratios;
  }
}

const char* filler_prefix(std::size_t group) {
  switch (group) {
    case 0: return "fp_item_";
    case 1: return "bs_item_";
    case 2: return "is_item_";
    default: return "ra_item_";
  }
}

// Statement amounts that serve as ratio denominators; shifted off zero so the
// default ratio set stays numerically tame.
const std::set<std::string>& shifted_items() {
  static const std::set<std::string> items = {
      "total_assets", "current_assets", "inventory", "cash", "accounts_receivable",
      "current_liabilities", "total_debt", "shareholders_equity", "revenue",
      "cost_of_goods_sold", "interest_expense"};
  return items;
}

std::string zero_padded(std::size_t v) {
  std::string s = std::to_string(v);
  while (s.size() < 3) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

FeatureSchema synthetic_schema(const GeneratorConfig& config) {
  if (config.group_sizes[0] == 0) {
    throw ConfigError("generator: the FinancialProfile group must hold at least the roi feature");
  }
  std::vector<FeatureInfo> features;
  std::size_t position = 0;
  const FeatureGroup groups[4] = {FeatureGroup::FinancialProfile, FeatureGroup::BalanceSheet,
                                  FeatureGroup::IncomeStatement, FeatureGroup::RatioAnalysis};
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& canon = canonical_names(g);
    for (std::size_t i = 0; i < config.group_sizes[g]; ++i) {
      FeatureInfo f;
      f.name = i < canon.size() ? canon[i] : filler_prefix(g) + zero_padded(i - canon.size());
      f.group = groups[g];
      f.position = position++;
      features.push_back(std::move(f));
    }
  }
  return FeatureSchema(std::move(features));
}

SyntheticPanel synthesize_panel(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.n_companies == 0) throw ConfigError("generator: n_companies must be >= 1");
  if (config.year_last <= config.year_first) {
    throw ConfigError("generator: need at least two years of data");
  }
  if (config.informative_group && *config.informative_group >= 4) {
    throw ConfigError("generator: informative_group must be in 0..3");
  }
  if (config.group_correlation < 0.0 || config.group_correlation >= 1.0) {
    throw ConfigError("generator: group_correlation must be in [0, 1)");
  }
  if (config.noise_level < 0.0) throw ConfigError("generator: noise_level must be >= 0");

  const FeatureSchema schema = synthetic_schema(config);
  const std::size_t F = schema.size();
  const std::size_t roi_pos = schema.index_of(kRoiFeature);

  // Informative candidates are filler items: never roi, never a canonical
  // statement amount that the default ratio set references.
  std::vector<std::size_t> eligible;
  for (const auto& f : schema.features()) {
    if (f.name.find("_item_") == std::string::npos) continue;
    if (config.informative_group &&
        static_cast<std::size_t>(f.group) != *config.informative_group) {
      continue;
    }
    eligible.push_back(f.position);
  }
  if (config.n_informative > eligible.size()) {
    throw ConfigError("generator: n_informative = " + std::to_string(config.n_informative) +
                      " exceeds the " + std::to_string(eligible.size()) +
                      " eligible feature slots");
  }

  SyntheticTruth truth;
  truth.weights.assign(F, 0.0);
  {
    Rng rng(derive_seed(seed, "informative"));
    auto picks = rng.sample_without_replacement(eligible.size(), config.n_informative);
    for (std::size_t p : picks) truth.informative_features.push_back(eligible[p]);
    std::sort(truth.informative_features.begin(), truth.informative_features.end());
    for (std::size_t pos : truth.informative_features) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      truth.weights[pos] = sign * rng.uniform(0.7, 1.3);
    }
    if (config.n_informative >= 2) {
      std::set<std::pair<std::size_t, std::size_t>> seen;
      while (truth.interaction_pairs.size() < config.n_interactions &&
             seen.size() < config.n_informative * (config.n_informative - 1) / 2) {
        const std::size_t a = truth.informative_features[rng.below(config.n_informative)];
        std::size_t b = truth.informative_features[rng.below(config.n_informative)];
        if (a == b) continue;
        const auto key = std::minmax(a, b);
        if (!seen.insert(key).second) continue;
        truth.interaction_pairs.push_back(key);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        truth.interaction_weights.push_back(sign * rng.uniform(0.25, 0.5));
      }
    }
  }

  const double rho = config.group_correlation;
  auto group_of = [&](std::size_t pos) { return static_cast<std::size_t>(schema.at(pos).group); };
  auto pair_correlation = [&](std::size_t a, std::size_t b) {
    return a == b ? 1.0 : (group_of(a) == group_of(b) ? rho : 0.0);
  };

  // Scale the planted signal to unit variance so noise_level is an absolute
  // signal-to-noise knob.
  {
    double var = 0.0;
    for (std::size_t a : truth.informative_features) {
      for (std::size_t b : truth.informative_features) {
        var += truth.weights[a] * truth.weights[b] * pair_correlation(a, b);
      }
    }
    for (std::size_t p = 0; p < truth.interaction_pairs.size(); ++p) {
      const auto [a, b] = truth.interaction_pairs[p];
      const double r = pair_correlation(a, b);
      var += truth.interaction_weights[p] * truth.interaction_weights[p] * (1.0 + r * r);
    }
    if (var > 0.0) {
      const double scale = 1.0 / std::sqrt(var);
      for (double& w : truth.weights) w *= scale;
      for (double& w : truth.interaction_weights) w *= scale;
    }
  }

  std::vector<bool> shifted(F, false);
  for (const auto& f : schema.features()) {
    if (shifted_items().count(f.name)) shifted[f.position] = true;
  }

  auto signal_of = [&](const Vector& x) {
    double s = 0.0;
    for (std::size_t pos : truth.informative_features) {
      s += truth.weights[pos] * x[static_cast<Eigen::Index>(pos)];
    }
    for (std::size_t p = 0; p < truth.interaction_pairs.size(); ++p) {
      const auto [a, b] = truth.interaction_pairs[p];
      const double centered = x[static_cast<Eigen::Index>(a)] * x[static_cast<Eigen::Index>(b)] -
                              pair_correlation(a, b);
      s += truth.interaction_weights[p] * centered;
    }
    return s;
  };

  const double factor_load = std::sqrt(rho);
  const double idio_load = std::sqrt(1.0 - rho);
  const int n_years = config.year_last - config.year_first + 1;

  std::vector<PanelRow> rows;
  rows.reserve(config.n_companies * static_cast<std::size_t>(n_years));
  Rng rng(derive_seed(seed, "panel"));
  for (std::size_t c = 0; c < config.n_companies; ++c) {
    std::string company = "C" + zero_padded(c + 1);
    double roi_level = rng.normal(5.0, 2.0);
    for (int t = 0; t < n_years; ++t) {
      PanelRow row;
      row.company_id = company;
      row.year = config.year_first + t;
      row.values.resize(static_cast<Eigen::Index>(F));
      row.missing.assign(F, false);
      double factors[4];
      for (double& g : factors) g = rng.normal();
      for (std::size_t f = 0; f < F; ++f) {
        double x = factor_load * factors[group_of(f)] + idio_load * rng.normal();
        if (shifted[f]) x += 4.0;
        row.values[static_cast<Eigen::Index>(f)] = x;
      }
      row.values[static_cast<Eigen::Index>(roi_pos)] = roi_level;
      roi_level += signal_of(row.values) + config.noise_level * rng.normal();
      rows.push_back(std::move(row));
    }
  }

  // Simulated optimum: score fresh draws with the true signal.
  {
    Rng sim(derive_seed(seed, "bayes"));
    const std::size_t K = 100000;
    std::vector<int> labels(K);
    std::vector<double> scores(K);
    Vector x = Vector::Zero(static_cast<Eigen::Index>(F));
    for (std::size_t k = 0; k < K; ++k) {
      double factors[4];
      for (double& g : factors) g = sim.normal();
      for (std::size_t pos : truth.informative_features) {
        x[static_cast<Eigen::Index>(pos)] =
            factor_load * factors[group_of(pos)] + idio_load * sim.normal();
      }
      const double s = signal_of(x);
      labels[k] = s + config.noise_level * sim.normal() > 0.0 ? 1 : 0;
      scores[k] = s;
    }
    const bool both_classes =
        std::count(labels.begin(), labels.end(), 1) > 0 &&
        std::count(labels.begin(), labels.end(), 0) > 0;
    truth.bayes_auc = both_classes ? roc_auc(labels, scores) : 1.0;
  }

  return SyntheticPanel{PanelDataset(schema, std::move(rows)), std::move(truth)};
}

nlohmann::json SyntheticTruth::to_json() const {
  nlohmann::json doc;
  doc["informative_features"] = informative_features;
  doc["weights"] = weights;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : interaction_pairs) pairs.push_back({a, b});
  doc["interaction_pairs"] = pairs;
  doc["interaction_weights"] = interaction_weights;
  doc["bayes_auc"] = bayes_auc;
  return doc;
}

SyntheticTruth SyntheticTruth::from_json(const nlohmann::json& doc) {
  SyntheticTruth truth;
  truth.informative_features = doc.at("informative_features").get<std::vector<std::size_t>>();
  truth.weights = doc.at("weights").get<std::vector<double>>();
  for (const auto& p : doc.at("interaction_pairs")) {
    truth.interaction_pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
  }
  truth.interaction_weights = doc.at("interaction_weights").get<std::vector<double>>();
  truth.bayes_auc = doc.at("bayes_auc").get<double>();
  return truth;
}

RatioSpec default_ratio_spec() {
  auto term = [](std::string name, double sign = 1.0) { return RatioTerm{std::move(name), sign}; };
  RatioSpec spec;
  auto add = [&](std::string name, std::vector<RatioTerm> num, std::vector<RatioTerm> den) {
    spec.ratios.push_back({std::move(name), std::move(num), std::move(den)});
  };
  add("current_ratio", {term("current_assets")}, {term("current_liabilities")});
  add("quick_ratio", {term("current_assets"), term("inventory", -1.0)},
      {term("current_liabilities")});
  add("cash_ratio", {term("cash")}, {term("current_liabilities")});
  add("working_capital_to_assets", {term("current_assets"), term("current_liabilities", -1.0)},
      {term("total_assets")});
  add("debt_to_equity", {term("total_debt")}, {term("shareholders_equity")});
  add("debt_ratio", {term("total_debt")}, {term("total_assets")});
  add("equity_ratio", {term("shareholders_equity")}, {term("total_assets")});
  add("gross_margin", {term("gross_profit")}, {term("revenue")});
  add("operating_margin", {term("operating_income")}, {term("revenue")});
  add("net_margin", {term("net_income")}, {term("revenue")});
  add("return_on_assets", {term("net_income")}, {term("total_assets")});
  add("return_on_equity", {term("net_income")}, {term("shareholders_equity")});
  add("asset_turnover", {term("revenue")}, {term("total_assets")});
  add("inventory_turnover", {term("cost_of_goods_sold")}, {term("inventory")});
  add("receivables_turnover", {term("revenue")}, {term("accounts_receivable")});
  add("interest_coverage", {term("operating_income")}, {term("interest_expense")});
  return spec;
}

}  // namespace finshap
