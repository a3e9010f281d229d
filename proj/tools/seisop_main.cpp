// seisop command-line front end.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "seisop/binio.hpp"
#include "seisop/config.hpp"
#include "seisop/dataset.hpp"
#include "seisop/error.hpp"
#include "seisop/metrics.hpp"
#include "seisop/pipeline.hpp"
#include "seisop/refine.hpp"

namespace fs = std::filesystem;
using namespace seisop;

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

// Files written so far by the running subcommand; removed if it fails.
std::vector<std::string> g_written;
// output_dir of the loaded configuration.
std::string g_output_dir;

// Relative outputs go under $SEISOP_OUTPUT_ROOT, else under output_dir.
std::string resolve(const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  if (const char* root = std::getenv("SEISOP_OUTPUT_ROOT"); root && *root) return (fs::path(root) / p).string();
  if (!g_output_dir.empty()) return (fs::path(g_output_dir) / p).string();
  return path;
}

void emit(const std::string& path, std::string_view contents) {
  const std::string full = resolve(path);
  binio::write_file_atomic(full, contents);
  g_written.push_back(full);
}

void log(const Common& c, const std::string& msg) {
  if (!c.quiet) std::cerr << msg << "\n";
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    cfg = load_config(c.config_path);
  } else if (c.preset == "desk") {
    cfg = ExperimentConfig::desk();
  } else if (c.preset.empty() || c.preset == "full") {
    cfg = ExperimentConfig::full();
  } else {
    throw InvalidArgument("--preset: expected full or desk");
  }
  if (c.seed) cfg.seed = *c.seed;
  g_output_dir = cfg.output_dir;
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

std::string model_label(const Checkpoint& ckpt) {
  return ckpt.mode == Mode::Baseline ? "fno" : "cphysfno-" + ckpt.simplifier().to_string();
}

std::array<PairedDataset, 3> split_from(const PairedDataset& data, const ExperimentConfig& cfg) {
  return split(data, cfg.splits.train, cfg.splits.validation, cfg.splits.test, cfg.seed);
}

std::string history_csv(const Checkpoint& ckpt) {
  std::string out = "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < ckpt.history.size(); ++e) {
    out += std::to_string(e) + "," + fmt(ckpt.history[e].train) + "," + fmt(ckpt.history[e].validation) + "\n";
  }
  return out;
}

Checkpoint fit(const ExperimentConfig& cfg, const PairedDataset& data, Mode mode, const Common& c) {
  auto [tr, va, te] = split_from(data, cfg);
  Checkpoint ckpt = train(tr, va, cfg.network, cfg.training, cfg.seed, mode, [&](std::size_t e, const EpochLoss& l) {
    if (e % 10 == 0 || e + 1 == cfg.training.epochs) {
      log(c, "epoch " + std::to_string(e) + "  train " + fmt(l.train) + "  validation " + fmt(l.validation));
    }
  });
  ExperimentConfig recorded = cfg;
  recorded.simplifier = mode == Mode::Composite ? data.simplifier : simplify::SimplifierKind::none();
  ckpt.set_config(recorded);
  ckpt.metadata["split"] = {{"seed", cfg.seed},
                            {"train", cfg.splits.train},
                            {"validation", cfg.splits.validation},
                            {"test", cfg.splits.test},
                            {"dataset_records", data.size()},
                            {"dataset_hash", data.content_hash()}};
  return ckpt;
}

int cmd_synth(const Common& c, std::size_t count, const std::string& out) {
  const ExperimentConfig cfg = load(c);
  const std::size_t n = count ? count : cfg.splits.total();
  log(c, "synthesizing " + std::to_string(n) + " ground motions (seed " + std::to_string(cfg.seed) + ")");
  emit(out, encode_srd1(synthesize_motions(cfg, n, cfg.seed)));
  return 0;
}

int cmd_build(const Common& c, const std::string& simplifier, std::size_t count, const std::string& input,
              const std::string& out, std::size_t csv_records) {
  ExperimentConfig cfg = load(c);
  if (!simplifier.empty()) cfg.simplifier = simplify::SimplifierKind::parse(simplifier);
  cfg.simplifier.validate(cfg.model.n_dof());
  PairedDataset motions;
  if (!input.empty()) {
    motions = load_dataset(input);
    if (!(motions.grid == cfg.excitation.grid)) throw InvalidArgument("--input: grid differs from the configuration");
  } else {
    const std::size_t n = count ? count : cfg.splits.total();
    motions = synthesize_motions(cfg, n, cfg.seed);
  }
  log(c, "simulating " + std::to_string(motions.size()) + " records, simplifier " + cfg.simplifier.to_string());
  const PairedDataset data = complete_dataset(cfg, std::move(motions), cfg.simplifier);
  emit(out, encode_srd1(data));
  for (std::size_t j = 0; j < std::min(csv_records, data.size()); ++j) {
    emit(out + ".record" + std::to_string(j) + ".csv", record_csv(data, j));
  }
  return 0;
}

int cmd_train(const Common& c, const std::string& mode_text, const std::string& dataset, const std::string& out) {
  const ExperimentConfig cfg = load(c);
  const Mode mode = parse_mode(mode_text);
  PairedDataset data;
  if (!dataset.empty()) {
    data = load_dataset(dataset);
    if (data.model_hash != physics_hash(cfg)) {
      std::cerr << "warning: dataset was generated with a different model/excitation configuration\n";
    }
  } else {
    const auto kind = mode == Mode::Composite ? cfg.simplifier : simplify::SimplifierKind::none();
    log(c, "generating " + std::to_string(cfg.splits.total()) + " records (" + kind.to_string() + ")");
    data = generate_dataset(cfg, kind, cfg.splits.total(), cfg.seed);
  }
  const Checkpoint ckpt = fit(cfg, data, mode, c);
  log(c, "best epoch " + std::to_string(ckpt.best_epoch));
  emit(out, encode_fno1(ckpt));
  emit(out + ".history.csv", history_csv(ckpt));
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& ckpt_path, const std::string& dataset, bool do_refine,
                 const std::string& report, const std::string& which, const std::string& refined_out) {
  if (!fs::exists(ckpt_path)) throw InvalidArgument("--checkpoint: no such file '" + ckpt_path + "'");
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  ExperimentConfig cfg = c.config_path.empty() && c.preset.empty() && ckpt.config() ? *ckpt.config() : load(c);
  g_output_dir = cfg.output_dir;
  if (ckpt.metadata.contains("split")) cfg.seed = ckpt.metadata["split"]["seed"].get<std::uint64_t>();
  if (c.seed) cfg.seed = *c.seed;
  const PairedDataset data = load_dataset(dataset);
  if (ckpt.metadata.contains("train") &&
      ckpt.metadata["train"]["model_hash"].get<std::string>() != [&] {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(data.model_hash));
        return std::string(buf);
      }()) {
    std::cerr << "warning: dataset model hash differs from the checkpoint's training data\n";
  }
  if (!data.has_u()) throw InvalidArgument("--dataset: records need u (build it with build-dataset)");
  auto [tr, va, te] = split_from(data, cfg);
  const PairedDataset& target = which == "all" ? data : which == "validation" ? va : which == "train" ? tr : te;
  if (target.size() == 0) throw InvalidArgument("evaluate: selected split is empty");

  std::vector<Trajectory> truth;
  for (const Record& r : target.records) truth.push_back(*r.u);
  const auto preds = predict_dataset(ckpt, target);
  std::vector<metrics::MetricReport> runs{metrics::evaluate(model_label(ckpt), ckpt.seed, preds, truth)};
  const auto true_peaks = metrics::peak_distribution(truth);
  const auto pred_peaks = metrics::peak_distribution(preds);
  std::vector<std::vector<double>> refined_peaks;

  if (do_refine) {
    if (ckpt.mode != Mode::Composite) throw InvalidArgument("--refine needs a composite checkpoint");
    if (!tr.has_z()) throw InvalidArgument("--refine: dataset has no z");
    std::vector<Trajectory> z_tr, u_tr;
    for (const Record& r : tr.records) {
      z_tr.push_back(*r.z);
      u_tr.push_back(*r.u);
    }
    const auto uhat_tr = predict_dataset(ckpt, tr);
    const auto model =
        refine::fit_refinement(z_tr, uhat_tr, u_tr, cfg.refinement_samples, derive_seed(cfg.seed, "regression"));
    if (model.ridge) std::cerr << "warning: rank-deficient refinement design; ridge fallback used\n";
    std::vector<Trajectory> refined;
    for (std::size_t j = 0; j < target.size(); ++j) {
      refined.push_back(refine::refine_predict(model, *target.records[j].z, preds[j]).mean);
    }
    auto rep = metrics::evaluate(model_label(ckpt) + "+refined", ckpt.seed, refined, truth);
    rep.sigma = model.sigma;
    runs.push_back(rep);
    refined_peaks = metrics::peak_distribution(refined);
    if (!refined_out.empty()) {
      ckpt.set_refinement(model);
      emit(refined_out, encode_fno1(ckpt));
    }
  }

  // Rows of one model share the sigma column only when refined.
  const auto base_rows = metrics::assemble_report(std::span(runs).first(1));
  std::vector<metrics::AggregateRow> rows = base_rows;
  if (runs.size() > 1) {
    const auto r2 = metrics::assemble_report(std::span(runs).subspan(1));
    rows.insert(rows.end(), r2.begin(), r2.end());
  }
  const std::string csv = metrics::report_csv(rows);
  std::cout << csv;
  if (!report.empty()) {
    emit(report + ".csv", csv);
    emit(report + ".json", metrics::report_json(rows));
    std::string peaks = do_refine ? "record,story,true_peak,predicted_peak,refined_peak\n"
                                  : "record,story,true_peak,predicted_peak\n";
    for (std::size_t i = 0; i < true_peaks.size(); ++i) {
      for (std::size_t j = 0; j < target.size(); ++j) {
        peaks += std::to_string(target.records[j].index) + "," + std::to_string(i + 1) + "," +
                 fmt(true_peaks[i][j]) + "," + fmt(pred_peaks[i][j]);
        if (do_refine) peaks += "," + fmt(refined_peaks[i][j]);
        peaks += "\n";
      }
    }
    emit(report + ".peaks.csv", peaks);
  }
  return 0;
}

std::vector<std::size_t> parse_values(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InvalidArgument("--values: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw InvalidArgument("--values: empty list");
  return out;
}

int cmd_study(const Common& c, const std::string& vary, const std::string& values_text, std::size_t runs,
              const std::string& mode_text, const std::string& out) {
  const ExperimentConfig cfg = load(c);
  if (vary != "train-size" && vary != "layers") throw InvalidArgument("--vary: expected train-size or layers");
  if (runs < 1) throw InvalidArgument("--runs: must be >= 1");
  const Mode mode = parse_mode(mode_text);
  const auto values = parse_values(values_text);
  std::size_t max_train = cfg.splits.train;
  if (vary == "train-size") max_train = *std::max_element(values.begin(), values.end());
  const std::size_t total = max_train + cfg.splits.validation + cfg.splits.test;
  const auto kind = mode == Mode::Composite ? cfg.simplifier : simplify::SimplifierKind::none();
  log(c, "generating " + std::to_string(total) + " records (" + kind.to_string() + ")");
  const PairedDataset data = generate_dataset(cfg, kind, total, cfg.seed);

  std::string csv = "vary,value,run,seed,model,story,relative_l2,rmse\n";
  for (std::size_t v : values) {
    for (std::size_t r = 0; r < runs; ++r) {
      const std::uint64_t run_seed = derive_seed(cfg.seed, "run", r);
      ExperimentConfig rc = cfg;
      rc.seed = run_seed;
      if (vary == "layers") rc.network.layers = v;
      auto [tr, va, te] = split(data, max_train, cfg.splits.validation, cfg.splits.test, run_seed);
      if (vary == "train-size") tr = head(tr, v);
      log(c, vary + " = " + std::to_string(v) + ", run " + std::to_string(r));
      const Checkpoint ckpt = train(tr, va, rc.network, rc.training, run_seed, mode);
      std::vector<Trajectory> truth;
      for (const Record& rec : te.records) truth.push_back(*rec.u);
      const auto rep = metrics::evaluate(model_label(ckpt), run_seed, predict_dataset(ckpt, te), truth);
      for (std::size_t i = 0; i < rep.relative_l2.size(); ++i) {
        csv += vary + "," + std::to_string(v) + "," + std::to_string(r) + "," + std::to_string(run_seed) + "," +
               rep.model + "," + std::to_string(i + 1) + "," + fmt(rep.relative_l2[i]) + "," + fmt(rep.rmse[i]) +
               "\n";
      }
    }
  }
  emit(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed neural operator experiments for shear buildings under ground motion"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON experiment configuration");
    sub->add_option("--preset", common.preset, "full or desk (when --config is not given)");
    sub->add_option("--seed", common.seed, "master seed (overrides the configuration)");
    sub->add_flag("-q,--quiet", common.quiet, "no progress output");
  };

  std::size_t count = 0, runs = 10, csv_records = 0;
  std::string out, simplifier, input, mode = "composite", dataset, ckpt, report, vary, values, which = "test",
                                       refined_out;
  bool do_refine = false;

  auto* synth = app.add_subcommand("synth-gm", "Synthesize white-noise ground motions into an SRD1 file");
  add_common(synth);
  synth->add_option("--count", count, "number of records (default: sum of the splits)");
  synth->add_option("--out", out, "output SRD1 path")->required();

  auto* build = app.add_subcommand("build-dataset", "Simulate responses and intermediate trajectories");
  add_common(build);
  build->add_option("--simplifier", simplifier, "none, els, modal:<r> or relaxed:<k>");
  build->add_option("--count", count, "number of records (default: sum of the splits)");
  build->add_option("--input", input, "SRD1 file of ground motions to use instead of synthesizing");
  build->add_option("--csv", csv_records, "also export the first N records as CSV");
  build->add_option("--out", out, "output SRD1 path")->required();

  auto* tr = app.add_subcommand("train", "Train a baseline or composite network");
  add_common(tr);
  tr->add_option("--mode", mode, "baseline or composite");
  tr->add_option("--dataset", dataset, "SRD1 dataset (generated from the configuration when omitted)");
  tr->add_option("--out", out, "output FNO1 checkpoint")->required();

  auto* ev = app.add_subcommand("evaluate", "Error metrics of a checkpoint on a dataset split");
  add_common(ev);
  ev->add_option("--checkpoint", ckpt, "FNO1 checkpoint")->required();
  ev->add_option("--dataset", dataset, "SRD1 dataset with responses")->required();
  ev->add_option("--split", which, "test, validation, train or all")->check(CLI::IsMember({"test", "validation", "train", "all"}));
  ev->add_flag("--refine", do_refine, "fit and apply the linear-regression refinement");
  ev->add_option("--refined-checkpoint", refined_out, "write the checkpoint with the refinement block");
  ev->add_option("--report", report, "output prefix for <prefix>.csv, .json and .peaks.csv");

  auto* st = app.add_subcommand("study", "Parametric study over training-set size or layer count");
  add_common(st);
  st->add_option("--vary", vary, "train-size or layers")->required();
  st->add_option("--values", values, "comma-separated values")->required();
  st->add_option("--runs", runs, "runs per value");
  st->add_option("--mode", mode, "baseline or composite");
  st->add_option("--out", out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return cmd_synth(common, count, out);
    if (*build) return cmd_build(common, simplifier, count, input, out, csv_records);
    if (*tr) return cmd_train(common, mode, dataset, out);
    if (*ev) return cmd_evaluate(common, ckpt, dataset, do_refine, report, which, refined_out);
    if (*st) return cmd_study(common, vary, values, runs, mode, out);
  } catch (const std::exception& e) {
    for (const std::string& f : g_written) {
      std::error_code ec;
      fs::remove(f, ec);
    }
    std::cerr << "error: " << e.what() << "\n";
    return dynamic_cast<const InvalidArgument*>(&e) ? 2 : 1;
  }
  return 0;
}
