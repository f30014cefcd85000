// aeroseg: dataset generation, training, calibration, prediction, CAD projection,
// mesh-settings emission and evaluation.
//
// Exit codes: 0 ok, 1 user error (bad flags, missing or malformed input), 2 internal.

#include "aeroseg/checkpoint.hpp"
#include "aeroseg/config.hpp"
#include "aeroseg/conformal.hpp"
#include "aeroseg/dataset.hpp"
#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"
#include "aeroseg/pipeline.hpp"
#include "aeroseg/rules.hpp"
#include "aeroseg/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace aeroseg;

namespace {

// Options every subcommand accepts; flags override the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> epochs;
  std::optional<std::string> checkpoint_format;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run configuration");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--alpha", alpha, "conformal miscoverage level");
    app->add_option("--gamma", gamma, "weight of the transform regularizer");
    app->add_option("--epochs", epochs, "training epochs (also the augmentation schedule length)");
    app->add_option("--checkpoint-format", checkpoint_format, "binary or text");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(require_file(config, "config"));
    nlohmann::json flags = nlohmann::json::object();
    if (seed) flags["seed"] = *seed;
    if (alpha) flags["alpha"] = *alpha;
    if (gamma) flags["gamma"] = *gamma;
    if (epochs) flags["epochs"] = *epochs;
    if (checkpoint_format) flags["checkpoint_format"] = *checkpoint_format;
    return apply_config(c, flags);
  }

  static fs::path require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw IoError(what + " file not found: '" + p.string() + "'");
    return p;
  }
};

fs::path require_file(const fs::path& p, const std::string& what) {
  return Common::require_file(p, what);
}

fs::path require_dir(const fs::path& p, const std::string& what) {
  if (!fs::is_directory(p)) throw IoError(what + " directory not found: '" + p.string() + "'");
  return p;
}

// ---- prediction files ---------------------------------------------------------
// face,p_fuselage,p_wing,p_stabilizer,p_engine,argmax,set

struct FacePrediction {
  ClassProbs probs{};
  PartLabel top = PartLabel::fuselage;
  LabelSet set;
};

std::string format_predictions(const std::vector<FacePrediction>& rows) {
  std::string out = "face,p_fuselage,p_wing,p_stabilizer,p_engine,argmax,set\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i);
    for (double p : rows[i].probs) out += "," + format_double(p);
    out += ",";
    out += to_string(rows[i].top);
    out += "," + format_label_set(rows[i].set) + "\n";
  }
  return out;
}

std::vector<FacePrediction> parse_predictions(const std::string& text, const std::string& source) {
  std::vector<FacePrediction> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("face,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 3 + kNumParts) throw ParseError(source, line_no, "expected 7 columns");
    FacePrediction row;
    std::size_t face = 0;
    auto [fp, fe] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), face);
    if (fe != std::errc{} || face != out.size())
      throw ParseError(source, line_no, "faces must be listed in order from 0");
    for (std::size_t c = 0; c < kNumParts; ++c) {
      const auto& tok = cells[1 + c];
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), row.probs[c]);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(source, line_no, "bad probability '" + tok + "'");
    }
    try {
      row.top = parse_part_label(cells[5]);
      row.set = parse_label_set(cells[6]);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
    out.push_back(row);
  }
  return out;
}

std::vector<FacePrediction> predict_faces(nn::SegmentationModel& model,
                                          const std::optional<ConformalCalibrator>& calibrator,
                                          const LabeledMesh& mesh) {
  const auto probs = predict_probs(model, mesh);
  std::vector<FacePrediction> rows(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    rows[i].probs = probs[i];
    rows[i].top = argmax(probs[i]);
    if (calibrator)
      rows[i].set = predict_set(*calibrator, probs[i]);
    else
      rows[i].set.insert(rows[i].top);
  }
  return rows;
}

std::vector<nn::Sample> to_samples(const std::vector<DatasetEntry>& entries) {
  std::vector<nn::Sample> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(nn::make_sample(e.mesh, e.name));
  return out;
}

void append_metrics(const fs::path& path, const nn::EpochRecord& r) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to '" + path.string() + "'");
  if (fresh)
    out << "epoch,train_loss,cls_loss,treg_loss,val_accuracy,val_accuracy_per_mesh,"
           "xi1,xi2,xi3,xi4,xi5,learning_rate\n";
  out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.cls_loss) << ','
      << format_double(r.treg_loss) << ',' << format_double(r.validation.pooled) << ','
      << format_double(r.validation.mean_per_mesh);
  for (double x : r.xi) out << ',' << format_double(x);
  out << ',' << format_double(r.learning_rate) << '\n';
}

// ---- subcommands ----------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::size_t bases = 10, variations = 20, densities = 5, first_base = 0;
};

int cmd_gen(const Common& common, const GenArgs& a) {
  const RunConfig c = common.resolve();
  const auto plan = plan_dataset(a.bases, a.variations, a.densities, c.seed, a.first_base);
  write_dataset(a.out, plan,
                {{"seed", c.seed},
                 {"bases", a.bases},
                 {"variations", a.variations},
                 {"densities", a.densities},
                 {"first_base", a.first_base}});
  std::cout << "wrote " << plan.size() << " samples to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string train_dir, val_dir, out;
};

int cmd_train(const Common& common, TrainArgs a) {
  const RunConfig c = common.resolve();
  if (a.train_dir.empty()) a.train_dir = c.train_dir;
  if (a.val_dir.empty()) a.val_dir = c.val_dir;
  if (a.out.empty()) a.out = c.out_dir;
  if (a.train_dir.empty() || a.out.empty())
    throw ValidationError("train needs --train DIR and --out DIR (or paths.train / paths.out)");
  const auto training = to_samples(load_dataset_dir(require_dir(a.train_dir, "training")));
  std::vector<nn::Sample> validation;
  if (!a.val_dir.empty()) validation = to_samples(load_dataset_dir(require_dir(a.val_dir, "validation")));

  fs::create_directories(a.out);
  const fs::path checkpoint = fs::path(a.out) / "model.ckpt";
  const fs::path metrics = fs::path(a.out) / "metrics.csv";
  nn::SegmentationModel model(c.model, c.seed);
  auto metadata = [&](const nn::EpochRecord& r) {
    return nlohmann::json{{"epoch", r.epoch},
                          {"validation_accuracy", r.validation.pooled},
                          {"seed", c.seed},
                          {"config", describe_config(c)}};
  };
  nn::TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const nn::EpochRecord& r) {
    append_metrics(metrics, r);
    std::cout << "epoch " << r.epoch << "  loss " << r.train_loss << "  val " << r.validation.pooled
              << "\n"
              << std::flush;
  };
  callbacks.on_best = [&](const nn::EpochRecord& r, nn::SegmentationModel& m) {
    nn::save_checkpoint(m, checkpoint, c.checkpoint_format, metadata(r));
  };
  const auto result = nn::train(model, training, validation, c.train, callbacks);
  std::cout << "best epoch " << result.best_epoch << ", checkpoint " << checkpoint.string() << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string checkpoint, data, out;
  std::optional<double> fraction;
};

int cmd_calibrate(const Common& common, const CalibrateArgs& a) {
  const RunConfig c = common.resolve();
  auto loaded = nn::load_checkpoint(require_file(a.checkpoint, "checkpoint"));
  const auto entries = load_dataset_dir(require_dir(a.data, "calibration data"));
  const double fraction = a.fraction.value_or(c.calibration_fraction);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("--fraction must lie in (0, 1]");
  std::vector<CalibrationRecord> records;
  Rng rng(c.seed);
  std::bernoulli_distribution keep(fraction);
  for (const auto& e : entries) {
    const auto probs = predict_probs(loaded.model, e.mesh);
    for (std::size_t f = 0; f < probs.size(); ++f)
      if (fraction >= 1.0 || keep(rng)) records.push_back({probs[f], (*e.mesh.face_labels)[f]});
  }
  const auto cal = calibrate(records, c.alpha);
  save_calibrator(cal, a.out);
  std::cout << "qhat " << cal.qhat() << " from " << cal.n_cal() << " faces\n";
  return 0;
}

struct PredictArgs {
  std::string checkpoint, calibrator, mesh, out;
};

int cmd_predict(const Common& common, const PredictArgs& a) {
  common.resolve();
  auto loaded = nn::load_checkpoint(require_file(a.checkpoint, "checkpoint"));
  std::optional<ConformalCalibrator> cal;
  if (!a.calibrator.empty()) cal = load_calibrator(require_file(a.calibrator, "calibrator"));
  const auto mesh = load_mesh(require_file(a.mesh, "mesh"));
  write_file_atomic(a.out, format_predictions(predict_faces(loaded.model, cal, mesh)));
  return 0;
}

struct ProjectArgs {
  std::string predictions, mesh, surfaces, out;
  bool top1 = false;
};

int cmd_project(const Common& common, const ProjectArgs& a) {
  const RunConfig c = common.resolve();
  const auto rows = parse_predictions(read_file(require_file(a.predictions, "predictions")),
                                      a.predictions);
  const auto mesh = load_mesh(require_file(a.mesh, "mesh"));
  const auto surfaces = load_surfaces(require_file(a.surfaces, "surfaces"));
  std::vector<LabelSet> sets;
  for (const auto& r : rows) {
    LabelSet s;
    if (a.top1) s.insert(r.top);
    sets.push_back(a.top1 ? s : r.set);
  }
  const auto classes = classify_mesh_surfaces(mesh, surfaces, sets, c.priority);
  write_file_atomic(a.out, format_classifications(classes));
  return 0;
}

struct EmitArgs {
  std::string classifications, out;
};

int cmd_emit(const Common& common, const EmitArgs& a) {
  const RunConfig c = common.resolve();
  const auto classes = parse_classifications(
      read_file(require_file(a.classifications, "classifications")), a.classifications);
  RuleDatabase rules = default_rules();
  apply_rule_overrides(rules, c.rule_overrides);
  save_settings(classes, rules, a.out);
  return 0;
}

struct EvalArgs {
  std::string checkpoint, calibrator, predictions, data, out;
};

nlohmann::json surface_json(const SurfaceReport& r) {
  return {{"surfaces", r.total},
          {"incorrect", r.incorrect},
          {"under_refined", r.under_refined},
          {"over_refined", r.over_refined},
          {"accuracy", r.accuracy}};
}

int cmd_eval(const Common& common, const EvalArgs& a) {
  const RunConfig c = common.resolve();
  if (a.checkpoint.empty() == a.predictions.empty())
    throw ValidationError("eval needs exactly one of --checkpoint or --predictions");
  const auto entries = load_dataset_dir(require_dir(a.data, "evaluation data"));
  std::optional<nn::LoadedCheckpoint> loaded;
  std::optional<ConformalCalibrator> cal;
  if (!a.checkpoint.empty()) {
    loaded.emplace(nn::load_checkpoint(require_file(a.checkpoint, "checkpoint")));
    if (!a.calibrator.empty()) cal = load_calibrator(require_file(a.calibrator, "calibrator"));
  } else {
    require_dir(a.predictions, "predictions");
  }

  std::size_t faces = 0, correct = 0;
  double per_mesh = 0.0;
  SurfaceReport top1_total, conformal_total;
  nlohmann::json meshes = nlohmann::json::array();
  for (const auto& e : entries) {
    std::vector<FacePrediction> rows;
    if (loaded) {
      rows = predict_faces(loaded->model, cal, e.mesh);
    } else {
      const fs::path p = fs::path(a.predictions) / (e.name + ".predictions.csv");
      rows = parse_predictions(read_file(require_file(p, "predictions")), p.string());
    }
    if (rows.size() != e.mesh.face_count())
      throw ValidationError(e.name + ": predictions cover " + std::to_string(rows.size()) +
                            " faces, mesh has " + std::to_string(e.mesh.face_count()));
    std::size_t hit = 0;
    std::vector<LabelSet> top1(rows.size()), sets(rows.size());
    for (std::size_t f = 0; f < rows.size(); ++f) {
      hit += rows[f].top == (*e.mesh.face_labels)[f];
      top1[f].insert(rows[f].top);
      sets[f] = rows[f].set;
    }
    faces += rows.size();
    correct += hit;
    per_mesh += rows.empty() ? 0.0 : static_cast<double>(hit) / rows.size();
    const auto truths = surface_truths(e.surfaces);
    const auto r1 = evaluate_surfaces(classify_mesh_surfaces(e.mesh, e.surfaces, top1, c.priority),
                                      truths, c.priority);
    const auto rc = evaluate_surfaces(classify_mesh_surfaces(e.mesh, e.surfaces, sets, c.priority),
                                      truths, c.priority);
    for (auto [total, r] : {std::pair{&top1_total, r1}, std::pair{&conformal_total, rc}}) {
      total->total += r.total;
      total->incorrect += r.incorrect;
      total->under_refined += r.under_refined;
      total->over_refined += r.over_refined;
    }
    meshes.push_back({{"name", e.name},
                      {"faces", rows.size()},
                      {"accuracy", rows.empty() ? 0.0 : static_cast<double>(hit) / rows.size()},
                      {"top1", surface_json(r1)},
                      {"conformal", surface_json(rc)}});
  }
  for (auto* t : {&top1_total, &conformal_total})
    t->accuracy = t->total ? static_cast<double>(t->total - t->incorrect) / t->total : 0.0;

  const double pooled = faces ? static_cast<double>(correct) / faces : 0.0;
  const double mean = entries.empty() ? 0.0 : per_mesh / entries.size();
  nlohmann::json report{{"face_accuracy", {{"pooled", pooled}, {"mean_per_mesh", mean}, {"faces", faces}}},
                        {"surfaces", {{"top1", surface_json(top1_total)},
                                      {"conformal", surface_json(conformal_total)}}},
                        {"meshes", meshes}};
  if (!a.out.empty()) write_file_atomic(a.out, report.dump(2) + "\n");

  std::cout << "face accuracy  pooled " << pooled * 100.0 << "%  per-mesh mean " << mean * 100.0
            << "%  (" << faces << " faces)\n";
  std::cout << "surfaces       total  incorrect  under-refined  over-refined\n";
  for (auto [name, r] : {std::pair{"top-1 vote ", top1_total}, std::pair{"conformal  ", conformal_total}})
    std::cout << name << "    " << r.total << "  " << r.incorrect << "  " << r.under_refined << "  "
              << r.over_refined << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aeroseg: aircraft mesh segmentation and expert-rule mesh settings"};
  app.require_subcommand(1);
  Common common;

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a labeled procedural dataset");
  common.attach(g);
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--bases", gen.bases, "number of base shapes (max 10 distinct)");
  g->add_option("--variations", gen.variations, "variations per base shape");
  g->add_option("--densities", gen.densities, "tessellation densities per variation (1..5)");
  g->add_option("--first-base", gen.first_base, "index of the first base shape");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train the segmentation network");
  common.attach(t);
  t->add_option("--train", tr.train_dir, "training dataset directory");
  t->add_option("--val", tr.val_dir, "validation dataset directory");
  t->add_option("--out", tr.out, "output directory (model.ckpt, metrics.csv)");

  CalibrateArgs ca;
  auto* c = app.add_subcommand("calibrate", "fit the conformal threshold on labeled meshes");
  common.attach(c);
  c->add_option("--checkpoint", ca.checkpoint, "trained checkpoint")->required();
  c->add_option("--data", ca.data, "labeled dataset directory")->required();
  c->add_option("--out", ca.out, "calibrator JSON")->required();
  c->add_option("--fraction", ca.fraction, "share of faces drawn for calibration (default from config, 0.2)");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "per-face probabilities and prediction sets");
  common.attach(p);
  p->add_option("--checkpoint", pr.checkpoint, "trained checkpoint")->required();
  p->add_option("--calibrator", pr.calibrator, "calibrator JSON (sets are top-1 without it)");
  p->add_option("--mesh", pr.mesh, "mesh file")->required();
  p->add_option("--out", pr.out, "predictions CSV")->required();

  ProjectArgs pj;
  auto* j = app.add_subcommand("project", "classify CAD surfaces from face predictions");
  common.attach(j);
  j->add_option("--predictions", pj.predictions, "predictions CSV")->required();
  j->add_option("--mesh", pj.mesh, "mesh file the predictions belong to")->required();
  j->add_option("--surfaces", pj.surfaces, "surface grid file")->required();
  j->add_option("--out", pj.out, "surface classification CSV")->required();
  j->add_flag("--top1", pj.top1, "vote with top-1 labels instead of prediction sets");

  EmitArgs em;
  auto* e = app.add_subcommand("emit", "write mesh settings for classified surfaces");
  common.attach(e);
  e->add_option("--classifications", em.classifications, "surface classification CSV")->required();
  e->add_option("--out", em.out, "settings document")->required();

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "face accuracy and surface refinement counts");
  common.attach(v);
  v->add_option("--checkpoint", ev.checkpoint, "trained checkpoint");
  v->add_option("--calibrator", ev.calibrator, "calibrator JSON");
  v->add_option("--predictions", ev.predictions, "directory of <sample>.predictions.csv files");
  v->add_option("--data", ev.data, "labeled dataset directory")->required();
  v->add_option("--out", ev.out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g->parsed()) return cmd_gen(common, gen);
    if (t->parsed()) return cmd_train(common, tr);
    if (c->parsed()) return cmd_calibrate(common, ca);
    if (p->parsed()) return cmd_predict(common, pr);
    if (j->parsed()) return cmd_project(common, pj);
    if (e->parsed()) return cmd_emit(common, em);
    if (v->parsed()) return cmd_eval(common, ev);
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const Error& err) {
    // Divergence and other reported failures carry their own context.
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return 2;
  }
  return 2;
}
