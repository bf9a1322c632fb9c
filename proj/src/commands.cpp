#include "finshap/commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "finshap/game.hpp"

namespace fs = std::filesystem;

namespace finshap {

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

fs::path prepare_out_dir(const RunConfig& config) {
  fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory " + dir.string());
  }
  config.save((dir / "config.json").string());
  return dir;
}

struct LoadedData {
  PanelDataset panel;
  RatioSpec ratios;
  std::optional<SyntheticTruth> truth;
};

LoadedData load_data(const RunConfig& config) {
  LoadedData data;
  if (config.synthetic) {
    SyntheticPanel synth = synthesize_panel(*config.synthetic, config.seed);
    data.panel = std::move(synth.panel);
    data.truth = std::move(synth.truth);
    data.ratios = default_ratio_spec();
  } else if (config.csv) {
    data.panel = load_panel(config.csv->panel_path, config.csv->schema_path);
    data.ratios = config.csv->ratios_path.empty() ? default_ratio_spec()
                                                  : RatioSpec::load(config.csv->ratios_path);
  } else {
    throw ConfigError("config: no data source");
  }
  return data;
}

YearSplit labeled_split(const RunConfig& config, const PanelDataset& features,
                        const PanelDataset& roi_source) {
  LabeledDataset labeled = build_labels(features, roi_source, config.roi_feature);
  return split_by_year(labeled, config.train_last_year, config.test_year);
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Shared by cmd_explain and cmd_validate: trains the configured model on the
// raw-feature split and explains the test partition.
struct ExplainRun {
  YearSplit split;
  std::unique_ptr<Model> model;
  AttributionMatrix attributions;
};

ExplainRun run_explain(const RunConfig& config, const LoadedData& data) {
  ExplainRun run;
  run.split = labeled_split(config, data.panel, data.panel);
  run.model = train_model(run.split.train.X, run.split.train.y, config.model,
                          derive_seed(config.seed, "model"), config.effective_workers());
  const Matrix background = sample_background(run.split.train.X, config.explain.background_size,
                                              derive_seed(config.seed, "background"));
  run.attributions = explain_dataset(*run.model, run.split.test, background, config.explain,
                                     derive_seed(config.seed, "explain"),
                                     config.effective_workers());
  return run;
}

}  // namespace

ArtifactList cmd_synthesize(const RunConfig& config) {
  if (!config.synthetic) throw ConfigError("synthesize: config has no synthetic data source");
  const fs::path dir = prepare_out_dir(config);
  SyntheticPanel synth = synthesize_panel(*config.synthetic, config.seed);

  save_panel_csv(synth.panel, (dir / "panel.csv").string());
  synth.panel.schema().save((dir / "schema.json").string());
  write_json(dir / "truth.json", synth.truth.to_json());
  default_ratio_spec().save((dir / "ratios.json").string());
  return {"config.json", "panel.csv", "schema.json", "truth.json", "ratios.json"};
}

ArtifactList cmd_train_eval(const RunConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  const LoadedData data = load_data(config);

  const YearSplit raw = labeled_split(config, data.panel, data.panel);
  const PanelDataset ratio_panel = compute_ratios(data.panel, data.ratios);
  const YearSplit ratios = labeled_split(config, ratio_panel, data.panel);

  const ModelKind kinds[4] = {ModelKind::GradientBoostedTrees, ModelKind::RandomForest,
                              ModelKind::SvmRbf, ModelKind::Logistic};
  nlohmann::json grid = nlohmann::json::array();
  std::string csv = "model,features,accuracy,roc_auc,n_test,class_balance\n";
  for (std::size_t k = 0; k < 4; ++k) {
    for (int variant = 0; variant < 2; ++variant) {
      const YearSplit& split = variant == 0 ? raw : ratios;
      ModelHyper hyper = config.model;
      hyper.kind = kinds[k];
      const auto model = train_model(split.train.X, split.train.y, hyper,
                                     derive_seed(config.seed, "train_eval", k * 2 +
                                                 static_cast<std::size_t>(variant)),
                                     config.effective_workers());
      const Vector scores = model->predict_proba(split.test.X);
      const EvalReport report =
          evaluate(split.test.y, {scores.data(), scores.data() + scores.size()});
      const std::string features = variant == 0 ? "raw" : "ratios";
      grid.push_back({{"model", to_string(kinds[k])},
                      {"features", features},
                      {"accuracy", report.accuracy},
                      {"roc_auc", report.roc_auc},
                      {"n_test", report.n_test},
                      {"class_balance", report.class_balance}});
      csv += to_string(kinds[k]) + "," + features + "," + format_double(report.accuracy) + "," +
             format_double(report.roc_auc) + "," + std::to_string(report.n_test) + "," +
             format_double(report.class_balance) + "\n";
    }
  }
  write_json(dir / "eval_grid.json", grid);
  write_text(dir / "eval_grid.csv", csv);
  return {"config.json", "eval_grid.json", "eval_grid.csv"};
}

ArtifactList cmd_explain(const RunConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  const LoadedData data = load_data(config);
  ExplainRun run = run_explain(config, data);

  save_model(*run.model, (dir / "model.json").string());
  write_json(dir / "attributions.json", run.attributions.to_json());
  ArtifactList artifacts = {"config.json", "model.json", "attributions.json"};

  if (run.attributions.group_level) {
    // Partition estimator: per-part values instead of feature rankings.
    std::string csv = "part,mean_phi_class1,mean_abs_phi_class1\n";
    for (std::size_t g = 0; g < run.attributions.columns(); ++g) {
      double mean = 0.0;
      double mean_abs = 0.0;
      for (std::size_t i = 0; i < run.attributions.instances(); ++i) {
        mean += run.attributions.at(i, g, 1);
        mean_abs += std::abs(run.attributions.at(i, g, 1));
      }
      const double n = static_cast<double>(std::max<std::size_t>(run.attributions.instances(), 1));
      csv += run.attributions.column_names[g] + "," + format_double(mean / n) + "," +
             format_double(mean_abs / n) + "\n";
    }
    write_text(dir / "partition_values.csv", csv);
    artifacts.push_back("partition_values.csv");
    return artifacts;
  }

  const RankingReport both = rank_by_topk_frequency(run.attributions, config.ranking_k,
                                                    ClassScope::Both, RankDirection::Highest);
  const RankingReport class0 = per_class_ranking(run.attributions, config.ranking_k, 0);
  const RankingReport class1 = per_class_ranking(run.attributions, config.ranking_k, 1);
  write_json(dir / "ranking_both.json", both.to_json());
  write_json(dir / "ranking_class0.json", class0.to_json());
  write_json(dir / "ranking_class1.json", class1.to_json());

  const auto hist =
      group_frequency_histogram(run.attributions, run.split.test.schema, config.group_hist_k);
  write_text(dir / "group_frequency.csv", hist.to_csv());
  const auto dist = positional_distribution(run.attributions, run.split.test.schema, config.n_top,
                                            config.n_worst, config.n_bins);
  write_text(dir / "positional_distribution.csv", dist.to_csv());

  artifacts.insert(artifacts.end(),
                   {"ranking_both.json", "ranking_class0.json", "ranking_class1.json",
                    "group_frequency.csv", "positional_distribution.csv"});
  return artifacts;
}

ArtifactList cmd_validate(const RunConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  const LoadedData data = load_data(config);

  RankingReport both;
  RankingReport class0;
  RankingReport class1;
  YearSplit split;

  const fs::path both_path = dir / "ranking_both.json";
  const fs::path c0_path = dir / "ranking_class0.json";
  const fs::path c1_path = dir / "ranking_class1.json";
  if (fs::exists(both_path) && fs::exists(c0_path) && fs::exists(c1_path)) {
    auto read = [](const fs::path& p) {
      std::ifstream in(p);
      nlohmann::json doc;
      in >> doc;
      return RankingReport::from_json(doc);
    };
    both = read(both_path);
    class0 = read(c0_path);
    class1 = read(c1_path);
    split = labeled_split(config, data.panel, data.panel);
  } else {
    ExplainRun run = run_explain(config, data);
    both = rank_by_topk_frequency(run.attributions, config.ranking_k, ClassScope::Both,
                                  RankDirection::Highest);
    class0 = per_class_ranking(run.attributions, config.ranking_k, 0);
    class1 = per_class_ranking(run.attributions, config.ranking_k, 1);
    split = std::move(run.split);
  }

  const std::uint64_t seed = derive_seed(config.seed, "validate");
  nlohmann::json doc;
  doc["model_kind"] = to_string(config.model.kind);
  doc["keep_top_n"] = config.keep_top_n;
  doc["drop_bottom_m"] = config.drop_bottom_m;
  const struct {
    const char* key;
    const RankingReport* ranking;
  } sections[3] = {{"both", &both}, {"class0", &class0}, {"class1", &class1}};
  for (const auto& section : sections) {
    const SubsetValidationReport report =
        subset_validation(split.train, split.test, *section.ranking, config.keep_top_n,
                          config.drop_bottom_m, config.model, seed, config.effective_workers());
    doc[section.key] = report.to_json();
  }
  write_json(dir / "validation.json", doc);
  return {"config.json", "validation.json"};
}

}  // namespace finshap
