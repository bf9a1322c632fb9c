#include "finshap/run_config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace finshap {

namespace {

std::string to_string(BaselineMode mode) {
  return mode == BaselineMode::MeanBackground ? "mean_background" : "fixed_half";
}

BaselineMode baseline_from_string(const std::string& s) {
  if (s == "mean_background") return BaselineMode::MeanBackground;
  if (s == "fixed_half") return BaselineMode::FixedHalf;
  throw ConfigError("unknown baseline mode: " + s);
}

template <typename T>
void read_if(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["out"] = out;
  doc["workers"] = workers;

  nlohmann::json data;
  if (synthetic) {
    const GeneratorConfig& g = *synthetic;
    nlohmann::json s;
    s["n_companies"] = g.n_companies;
    s["year_first"] = g.year_first;
    s["year_last"] = g.year_last;
    s["group_sizes"] = g.group_sizes;
    s["n_informative"] = g.n_informative;
    s["n_interactions"] = g.n_interactions;
    s["noise_level"] = g.noise_level;
    s["group_correlation"] = g.group_correlation;
    if (g.informative_group) {
      s["informative_group"] = *g.informative_group;
    } else {
      s["informative_group"] = nullptr;
    }
    data["synthetic"] = std::move(s);
  }
  if (csv) {
    data["csv"] = {{"panel", csv->panel_path},
                   {"schema", csv->schema_path},
                   {"ratios", csv->ratios_path}};
  }
  doc["data"] = std::move(data);

  doc["roi_feature"] = roi_feature;
  doc["split"] = {{"train_last_year", train_last_year}, {"test_year", test_year}};

  doc["model"] = {
      {"kind", to_string(model.kind)},
      {"logistic",
       {{"l2", model.logistic.l2}, {"max_iters", model.logistic.max_iters},
        {"tol", model.logistic.tol}}},
      {"forest",
       {{"n_trees", model.forest.n_trees}, {"max_depth", model.forest.max_depth},
        {"min_leaf", model.forest.min_leaf}, {"mtry", model.forest.mtry},
        {"bootstrap", model.forest.bootstrap}}},
      {"gbt",
       {{"n_rounds", model.gbt.n_rounds}, {"learning_rate", model.gbt.learning_rate},
        {"max_depth", model.gbt.max_depth}, {"lambda", model.gbt.lambda},
        {"min_child_weight", model.gbt.min_child_weight}}},
      {"svm",
       {{"C", model.svm.C}, {"gamma", model.svm.gamma}, {"tol", model.svm.tol},
        {"max_passes", model.svm.max_passes}}}};

  doc["explain"] = {{"method", finshap::to_string(explain.method)},
                    {"kernel_budget", explain.kernel_budget},
                    {"n_permutations", explain.n_permutations},
                    {"regularization", explain.regularization},
                    {"background_size", explain.background_size},
                    {"baseline", to_string(explain.baseline)},
                    {"exact_cap", explain.exact_cap}};

  doc["ranking"] = {{"k", ranking_k},
                    {"group_hist_k", group_hist_k},
                    {"n_top", n_top},
                    {"n_worst", n_worst},
                    {"n_bins", n_bins}};
  doc["validate"] = {{"keep_top_n", keep_top_n}, {"drop_bottom_m", drop_bottom_m}};
  return doc;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  try {
    read_if(doc, "seed", cfg.seed);
    read_if(doc, "out", cfg.out);
    read_if(doc, "workers", cfg.workers);

    if (!doc.contains("data")) throw ConfigError("config: missing 'data' section");
    const auto& data = doc.at("data");
    cfg.synthetic.reset();
    if (data.contains("synthetic") && data.contains("csv")) {
      throw ConfigError("config: 'data' must name exactly one of synthetic/csv");
    }
    if (data.contains("synthetic")) {
      GeneratorConfig g;
      const auto& s = data.at("synthetic");
      read_if(s, "n_companies", g.n_companies);
      read_if(s, "year_first", g.year_first);
      read_if(s, "year_last", g.year_last);
      read_if(s, "group_sizes", g.group_sizes);
      read_if(s, "n_informative", g.n_informative);
      read_if(s, "n_interactions", g.n_interactions);
      read_if(s, "noise_level", g.noise_level);
      read_if(s, "group_correlation", g.group_correlation);
      if (s.contains("informative_group") && !s.at("informative_group").is_null()) {
        g.informative_group = s.at("informative_group").get<std::size_t>();
      }
      cfg.synthetic = g;
    } else if (data.contains("csv")) {
      CsvSource src;
      const auto& c = data.at("csv");
      src.panel_path = c.at("panel").get<std::string>();
      src.schema_path = c.at("schema").get<std::string>();
      read_if(c, "ratios", src.ratios_path);
      cfg.csv = std::move(src);
    } else {
      throw ConfigError("config: 'data' must name one of synthetic/csv");
    }

    read_if(doc, "roi_feature", cfg.roi_feature);
    if (doc.contains("split")) {
      read_if(doc.at("split"), "train_last_year", cfg.train_last_year);
      read_if(doc.at("split"), "test_year", cfg.test_year);
    }

    if (doc.contains("model")) {
      const auto& m = doc.at("model");
      if (m.contains("kind")) cfg.model.kind = model_kind_from_string(m.at("kind").get<std::string>());
      if (m.contains("logistic")) {
        const auto& s = m.at("logistic");
        read_if(s, "l2", cfg.model.logistic.l2);
        read_if(s, "max_iters", cfg.model.logistic.max_iters);
        read_if(s, "tol", cfg.model.logistic.tol);
      }
      if (m.contains("forest")) {
        const auto& s = m.at("forest");
        read_if(s, "n_trees", cfg.model.forest.n_trees);
        read_if(s, "max_depth", cfg.model.forest.max_depth);
        read_if(s, "min_leaf", cfg.model.forest.min_leaf);
        read_if(s, "mtry", cfg.model.forest.mtry);
        read_if(s, "bootstrap", cfg.model.forest.bootstrap);
      }
      if (m.contains("gbt")) {
        const auto& s = m.at("gbt");
        read_if(s, "n_rounds", cfg.model.gbt.n_rounds);
        read_if(s, "learning_rate", cfg.model.gbt.learning_rate);
        read_if(s, "max_depth", cfg.model.gbt.max_depth);
        read_if(s, "lambda", cfg.model.gbt.lambda);
        read_if(s, "min_child_weight", cfg.model.gbt.min_child_weight);
      }
      if (m.contains("svm")) {
        const auto& s = m.at("svm");
        read_if(s, "C", cfg.model.svm.C);
        read_if(s, "gamma", cfg.model.svm.gamma);
        read_if(s, "tol", cfg.model.svm.tol);
        read_if(s, "max_passes", cfg.model.svm.max_passes);
      }
    }

    if (doc.contains("explain")) {
      const auto& e = doc.at("explain");
      if (e.contains("method")) {
        cfg.explain.method = attribution_method_from_string(e.at("method").get<std::string>());
      }
      read_if(e, "kernel_budget", cfg.explain.kernel_budget);
      read_if(e, "n_permutations", cfg.explain.n_permutations);
      read_if(e, "regularization", cfg.explain.regularization);
      read_if(e, "background_size", cfg.explain.background_size);
      if (e.contains("baseline")) {
        cfg.explain.baseline = baseline_from_string(e.at("baseline").get<std::string>());
      }
      read_if(e, "exact_cap", cfg.explain.exact_cap);
    }

    if (doc.contains("ranking")) {
      const auto& r = doc.at("ranking");
      read_if(r, "k", cfg.ranking_k);
      read_if(r, "group_hist_k", cfg.group_hist_k);
      read_if(r, "n_top", cfg.n_top);
      read_if(r, "n_worst", cfg.n_worst);
      read_if(r, "n_bins", cfg.n_bins);
    }
    if (doc.contains("validate")) {
      read_if(doc.at("validate"), "keep_top_n", cfg.keep_top_n);
      read_if(doc.at("validate"), "drop_bottom_m", cfg.drop_bottom_m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("config: cannot write " + path);
  out << to_json().dump(2) << '\n';
}

}  // namespace finshap
