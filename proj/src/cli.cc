// Copyright 2026 The omniqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "omniqa/cli.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "omniqa/csv.h"
#include "omniqa/dataset_stats.h"
#include "omniqa/error.h"
#include "omniqa/geometry.h"
#include "omniqa/metrics.h"
#include "omniqa/nn/tensor_io.h"
#include "omniqa/oiqa.h"
#include "omniqa/oisal.h"
#include "omniqa/optimize.h"
#include "omniqa/png_io.h"
#include "omniqa/saliency.h"
#include "omniqa/subjective.h"

namespace omniqa {
namespace {

namespace fs = std::filesystem;

// Runs fn(0..n-1) on up to `jobs` threads. Results must be stored by index so
// output order never depends on scheduling. The lowest-index failure wins.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool has_ext(const fs::path& p, const char* ext) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e == ext;
}

Raster read_erp(const fs::path& path) {
  Raster img = read_png(path);
  check_erp(img);
  return img;
}

SaliencyMap read_map(const fs::path& path) {
  if (has_ext(path, ".png")) return from_raster(to_gray(read_png(path)));
  return read_float_map(path);
}

void emit(const CsvTable& table, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    table.write(out);
  } else {
    table.write(fs::path(path));
  }
}

std::string sanitize(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  if (s.empty() || s == "." || s == "..") s = "_" + s;
  return s;
}

std::string view_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "view_%02zu.png", i);
  return buf;
}

CsvTable trace_csv(const nn::FitTrace& trace) {
  CsvTable t({"step", "loss"});
  for (std::size_t i = 0; i < trace.loss.size(); ++i) {
    t.add_row({std::to_string(i), format_double(trace.loss[i])});
  }
  return t;
}

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string config;
  bool version = false;
};

void add_encoder_options(CLI::App* s, nn::EncoderConfig& e) {
  s->add_option("--patch", e.patch, "Encoder patch size")->capture_default_str();
  s->add_option("--dim", e.dim, "Encoder token width")->capture_default_str();
  s->add_option("--depth", e.depth, "Encoder transformer blocks")->capture_default_str();
  s->add_option("--enc-heads", e.heads, "Encoder attention heads")->capture_default_str();
  s->add_option("--queries", e.queries, "Fused query tokens")->capture_default_str();
  s->add_option("--taps", e.taps, "Five encoder layers exposed as features")
      ->delimiter(',');
}

void add_oiqa_options(CLI::App* s, OiqaConfig& c, std::string& pair_mode) {
  add_encoder_options(s, c.encoder);
  s->add_option("--heads", c.heads, "Head attention heads")->capture_default_str();
  s->add_option("--pair-mode", pair_mode, "Viewport pairs: ordered or unordered")
      ->check(CLI::IsMember({"ordered", "unordered"}))
      ->capture_default_str();
  s->add_option("--hidden", c.hidden, "Regressor hidden width, 0 for the model dim")
      ->capture_default_str();
  s->add_option("--fov", c.fov, "Viewport field of view, degrees")->capture_default_str();
  s->add_option("--viewport-size", c.viewport_size, "Viewport side, pixels")
      ->capture_default_str();
}

void add_oisal_options(CLI::App* s, OisalConfig& c, bool& no_text) {
  add_encoder_options(s, c.encoder);
  s->add_option("--input-height", c.input_height, "ERP height fed to the encoder")
      ->capture_default_str();
  s->add_option("--widths", c.widths, "Decoder widths, four values")->delimiter(',');
  s->add_option("--upsample", c.upsample, "Upsampling factor per stage")
      ->capture_default_str();
  s->add_option("--heads", c.heads, "Fusion attention heads")->capture_default_str();
  s->add_flag("--no-text-injection", no_text, "Disable the text tokens in fusion");
}

void add_train_options(CLI::App* s, nn::TrainOptions& t) {
  s->add_option("--steps", t.steps, "Optimizer steps")->capture_default_str();
  s->add_option("--lr", t.lr, "Peak learning rate")->capture_default_str();
}

OiqaModel make_oiqa(const std::string& checkpoint, OiqaConfig cfg,
                    const std::string& pair_mode, std::uint64_t seed) {
  if (!checkpoint.empty()) return OiqaModel::load(checkpoint);
  cfg.pair_mode = parse_pair_mode(pair_mode);
  cfg.seed = seed;
  cfg.encoder.seed = seed;
  return OiqaModel(cfg);
}

OisalModel make_oisal(const std::string& checkpoint, OisalConfig cfg, bool no_text,
                      std::uint64_t seed) {
  if (!checkpoint.empty()) return OisalModel::load(checkpoint);
  cfg.text_injection = !no_text;
  cfg.seed = seed;
  cfg.encoder.seed = seed;
  return OisalModel(cfg);
}

// ---------------------------------------------------------------- project

struct ProjectArgs {
  std::string mode;
  std::string input, out_dir, input_dir, out, base;
  std::string set = "six";
  double fov = 0.0;
  int size = 0;
  int width = 0;
  int bit_depth = 8;
};

void cmd_project(const ProjectArgs& a, const Globals& g) {
  if (a.mode == "split") {
    if (a.input.empty() || a.out_dir.empty()) {
      throw UsageError("project --mode split needs --input and --out-dir");
    }
    const Raster erp = read_erp(a.input);
    const bool six = a.set == "six";
    const double fov = a.fov > 0.0 ? a.fov : (six ? 110.0 : 90.0);
    const int size = a.size > 0 ? a.size : (six ? 384 : 512);
    const auto views = six ? six_viewport_set(fov, size) : eight_viewport_set(fov, size);
    fs::create_directories(a.out_dir);
    CsvTable index({"name", "file", "yaw", "pitch", "fov", "width", "height"});
    std::vector<Raster> rendered(views.size());
    parallel_for(views.size(), g.jobs,
                 [&](std::size_t i) { rendered[i] = erp_to_viewport(erp, views[i]); });
    for (std::size_t i = 0; i < views.size(); ++i) {
      write_png(fs::path(a.out_dir) / view_file(i), rendered[i], a.bit_depth);
      const auto& v = views[i];
      index.add_row({v.name, view_file(i), format_double(v.yaw), format_double(v.pitch),
                     format_double(v.fov), std::to_string(v.out_width),
                     std::to_string(v.out_height)});
    }
    index.write(fs::path(a.out_dir) / "views.csv");
    return;
  }
  if (a.input_dir.empty() || a.out.empty() || a.width <= 0) {
    throw UsageError("project --mode merge needs --input-dir, --width and --out");
  }
  if (a.width % 2 != 0) throw UsageError("--width must be even");
  const CsvTable index = CsvTable::read(fs::path(a.input_dir) / "views.csv");
  const std::size_t cn = index.column("name"), cf = index.column("file"),
                    cy = index.column("yaw"), cp = index.column("pitch"),
                    cv = index.column("fov");
  const int w = a.width, h = a.width / 2;
  std::vector<ErpPartial> partials(index.size());
  parallel_for(index.size(), g.jobs, [&](std::size_t i) {
    const auto& row = index.rows()[i];
    const Raster view = read_png(fs::path(a.input_dir) / row[cf]);
    ViewportSpec spec{row[cn], parse_double(row[cy], "yaw"), parse_double(row[cp], "pitch"),
                      parse_double(row[cv], "fov"), view.width(), view.height()};
    partials[i] = viewport_to_erp(view, spec, w, h);
  });
  Raster merged;
  if (a.base.empty()) {
    merged = assemble_erp(partials);
  } else {
    const Raster base = read_erp(a.base);
    if (base.width() != w || base.height() != h) {
      throw ShapeError("--base is " + std::to_string(base.width()) + "x" +
                       std::to_string(base.height()) + " but the output is " +
                       std::to_string(w) + "x" + std::to_string(h));
    }
    merged = assemble_erp_over(base, partials);
  }
  write_png(a.out, merged, a.bit_depth);
}

// ---------------------------------------------------------------- mos

struct MosArgs {
  std::string ratings, out, report;
  bool no_screening = false;
  bool drop_degenerate = false;
};

void cmd_mos(const MosArgs& a, std::ostream& out) {
  RatingMatrix ratings = RatingMatrix::from_csv(CsvTable::read(a.ratings));
  ratings.check_scale();
  ZScoreOptions zo;
  zo.drop_degenerate_subjects = a.drop_degenerate;
  if (a.no_screening) {
    emit(compute_mos(ratings, zo).to_csv(), a.out, out);
    return;
  }
  const ScreeningResult screened = reject_subjects(ratings);
  if (!a.report.empty()) screened.report.to_csv().write(fs::path(a.report));
  emit(compute_mos(screened.retained, zo).to_csv(), a.out, out);
}

// ---------------------------------------------------------------- salmap

struct SalmapArgs {
  std::string fixations, out_dir;
  int width = 1024;
  int height = 0;
  double sigma = 0.4;
  bool no_preview = false;
};

void cmd_salmap(const SalmapArgs& a, const Globals& g) {
  const auto sets = read_fixations(CsvTable::read(a.fixations));
  const int h = a.height > 0 ? a.height : a.width / 2;
  BlurOptions blur;
  blur.sigma_deg = a.sigma;
  fs::create_directories(a.out_dir);
  std::map<std::string, std::string> used;
  std::vector<std::string> names;
  for (const auto& s : sets) {
    const std::string name = sanitize(s.image_id);
    auto [it, fresh] = used.emplace(name, s.image_id);
    if (!fresh) {
      throw DataError("image ids '" + it->second + "' and '" + s.image_id +
                      "' map to the same file name '" + name + "'");
    }
    names.push_back(name);
  }
  parallel_for(sets.size(), g.jobs, [&](std::size_t i) {
    const SaliencyMap m = fixations_to_map(sets[i], a.width, h, blur);
    const fs::path stem = fs::path(a.out_dir) / names[i];
    write_float_map(stem.string() + ".oqfm", m);
    if (!a.no_preview) write_preview_png(stem.string() + ".png", m);
  });
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::vector<std::string> dbs;
  int bins = 10;
  std::string out, features_out;
};

void cmd_stats(const StatsArgs& a, const Globals& g, std::ostream& out) {
  struct Db {
    std::string name;
    std::vector<fs::path> files;
  };
  std::vector<Db> dbs;
  for (const auto& spec : a.dbs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw UsageError("--db expects name=directory, got '" + spec + "'");
    }
    Db db{spec.substr(0, eq), {}};
    const fs::path dir = spec.substr(eq + 1);
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && has_ext(entry.path(), ".png")) {
        db.files.push_back(entry.path());
      }
    }
    std::sort(db.files.begin(), db.files.end());
    if (db.files.empty()) throw DataError("no PNG images in " + dir.string());
    dbs.push_back(std::move(db));
  }
  CsvTable features({"database", "image", "sharpness", "brightness", "colorfulness",
                     "contrast"});
  std::vector<FeatureSamples> samples;
  for (const auto& db : dbs) {
    std::vector<std::array<double, 4>> values(db.files.size());
    parallel_for(db.files.size(), g.jobs, [&](std::size_t i) {
      const Raster img = read_png(db.files[i]);
      for (std::size_t f = 0; f < kAllFeatures.size(); ++f) {
        values[i][f] = compute_feature(kAllFeatures[f], img);
      }
    });
    for (std::size_t f = 0; f < kAllFeatures.size(); ++f) {
      FeatureSamples s{db.name, kAllFeatures[f], {}};
      for (const auto& v : values) s.values.push_back(v[f]);
      samples.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < db.files.size(); ++i) {
      features.add_row({db.name, db.files[i].filename().string(), format_double(values[i][0]),
                        format_double(values[i][1]), format_double(values[i][2]),
                        format_double(values[i][3])});
    }
  }
  if (!a.features_out.empty()) features.write(fs::path(a.features_out));
  emit(summary_csv(summarize(samples, a.bins)), a.out, out);
}

// ---------------------------------------------------------------- metrics

struct MetricsIqaArgs {
  std::string input, out;
  bool logistic = false;
  double z = 1.96;
};

void cmd_metrics_iqa(const MetricsIqaArgs& a, std::ostream& out) {
  const CsvTable t = CsvTable::read(a.input);
  const std::size_t cp = t.column("pred"), cm = t.column("mos");
  const bool has_sd = t.has_column("stddev") && t.has_column("n");
  std::vector<double> pred, mos;
  std::vector<ScorePair> pairs;
  for (const auto& row : t.rows()) {
    pred.push_back(parse_double(row[cp], "pred"));
    mos.push_back(parse_double(row[cm], "mos"));
    if (has_sd) {
      pairs.push_back({pred.back(), mos.back(),
                       parse_double(row[t.column("stddev")], "stddev"),
                       static_cast<int>(parse_int(row[t.column("n")], "n"))});
    }
  }
  CsvTable r({"metric", "value"});
  r.add_row({"srcc", format_double(srcc(pred, mos))});
  r.add_row({"krcc", format_double(krcc(pred, mos))});
  r.add_row({"plcc", format_double(plcc(pred, mos))});
  if (a.logistic) {
    r.add_row({"plcc_logistic", format_double(plcc(pred, mos, {.logistic_fit = true}))});
  }
  if (has_sd) {
    const RocOptions ro{a.z};
    r.add_row({"auc_different_similar", format_double(roc_different_similar(pairs, ro))});
    r.add_row({"auc_better_worse", format_double(roc_better_worse(pairs, ro))});
  }
  emit(r, a.out, out);
}

struct MetricsSalArgs {
  std::string pred, gt, fixations, image_id, out;
};

void cmd_metrics_sal(const MetricsSalArgs& a, std::ostream& out) {
  const SaliencyMap pred = read_map(a.pred);
  const SaliencyMap gt = read_map(a.gt);
  if (!pred.same_shape(gt)) {
    throw ShapeError("prediction map is " + pred.shape_string() +
                     " but ground-truth map is " + gt.shape_string());
  }
  CsvTable r({"metric", "value"});
  if (!a.fixations.empty()) {
    const auto sets = read_fixations(CsvTable::read(a.fixations));
    const FixationSet* fix = nullptr;
    if (a.image_id.empty()) {
      if (sets.size() != 1) {
        throw UsageError("fixation file holds " + std::to_string(sets.size()) +
                         " images; pick one with --image-id");
      }
      fix = &sets.front();
    } else {
      for (const auto& s : sets) {
        if (s.image_id == a.image_id) fix = &s;
      }
      if (fix == nullptr) throw DataError("no fixations for image '" + a.image_id + "'");
    }
    const SaliencyScores s = evaluate_saliency(pred, gt, *fix);
    r.add_row({"auc_judd", format_double(s.auc)});
    r.add_row({"nss", format_double(s.nss)});
    r.add_row({"cc", format_double(s.cc)});
    r.add_row({"sim", format_double(s.sim)});
    r.add_row({"kld", format_double(s.kld)});
  } else {
    r.add_row({"cc", format_double(cc(pred, gt))});
    r.add_row({"sim", format_double(sim(pred, gt))});
    r.add_row({"kld", format_double(kld(pred, gt))});
  }
  emit(r, a.out, out);
}

// ---------------------------------------------------------------- training

struct TrainOiqaArgs {
  std::string manifest, out, trace, split = "none", holdout, eval_out;
  double train_fraction = 0.7;
  OiqaConfig cfg;
  std::string pair_mode = "ordered";
};

void cmd_train_oiqa(TrainOiqaArgs a, const Globals& g, std::ostream& out) {
  const fs::path manifest(a.manifest);
  const auto rows = read_oiqa_manifest(CsvTable::read(manifest), manifest.parent_path());
  if (rows.empty()) throw DataError(a.manifest + ": manifest has no rows");
  a.cfg.train.steps = std::max(0, a.cfg.train.steps);
  OiqaModel model = make_oiqa("", a.cfg, a.pair_mode, g.seed);
  std::vector<OiqaSample> samples(rows.size());
  parallel_for(rows.size(), g.jobs, [&](std::size_t i) {
    const fs::path in(rows[i].input);
    samples[i].views = has_ext(in, ".png")
                           ? model.encode_viewports(read_erp(in), rows[i].prompt)
                           : import_viewport_features(in);
    samples[i].label = rows[i].label;
  });

  Split split;
  if (a.split == "none") {
    for (std::size_t i = 0; i < rows.size(); ++i) split.train.push_back(i);
  } else if (a.split == "scene") {
    std::vector<std::string> groups;
    for (const auto& r : rows) groups.push_back(r.scene);
    split = split_by_group(groups, a.train_fraction, g.seed);
  } else {
    if (a.holdout.empty()) throw UsageError("--split generator needs --holdout");
    std::vector<std::string> groups;
    for (const auto& r : rows) groups.push_back(r.generator);
    split = split_by_generator(groups, a.holdout);
  }
  std::vector<OiqaSample> train;
  for (std::size_t i : split.train) train.push_back(samples[i]);
  const nn::FitTrace trace = fit(model.head(), train, a.cfg.train);
  model.save(a.out);
  if (!a.trace.empty()) trace_csv(trace).write(fs::path(a.trace));

  if (!a.eval_out.empty()) {
    nn::NoGradGuard no_grad;
    CsvTable e({"input", "split", "pred_quality", "pred_comfortability",
                "pred_correspondence", "quality", "comfortability", "correspondence"});
    auto add = [&](const std::vector<std::size_t>& idx, const char* name) {
      for (std::size_t i : idx) {
        const ScoreTriple p = model.head().predict(samples[i].views);
        const ScoreTriple& l = samples[i].label;
        e.add_row({rows[i].input, name, format_double(p[0]), format_double(p[1]),
                   format_double(p[2]), format_double(l[0]), format_double(l[1]),
                   format_double(l[2])});
      }
    };
    add(split.train, "train");
    add(split.test, "test");
    e.write(fs::path(a.eval_out));
  }
  out << "trained on " << train.size() << " samples; final loss "
      << format_double(trace.loss.empty() ? 0.0 : trace.loss.back()) << "\n";
}

struct TrainOisalArgs {
  std::string manifest, out, trace;
  OisalConfig cfg;
  bool no_text = false;
};

void cmd_train_oisal(TrainOisalArgs a, const Globals& g, std::ostream& out) {
  const fs::path manifest(a.manifest);
  const auto rows = read_oisal_manifest(CsvTable::read(manifest), manifest.parent_path());
  if (rows.empty()) throw DataError(a.manifest + ": manifest has no rows");
  OisalModel model = make_oisal("", a.cfg, a.no_text, g.seed);
  std::vector<OisalSample> samples(rows.size());
  parallel_for(rows.size(), g.jobs, [&](std::size_t i) {
    const fs::path in(rows[i].input);
    samples[i].features = has_ext(in, ".png") ? model.encode(read_erp(in), rows[i].prompt)
                                              : nn::import_features(in);
    samples[i].gt = read_map(rows[i].gt_map);
  });
  const nn::FitTrace trace = fit(model.decoder(), samples, model.config(), a.cfg.train);
  model.save(a.out);
  if (!a.trace.empty()) trace_csv(trace).write(fs::path(a.trace));
  out << "trained on " << samples.size() << " samples; final loss "
      << format_double(trace.loss.empty() ? 0.0 : trace.loss.back()) << "\n";
}

// ---------------------------------------------------------------- inference

struct ScoreArgs {
  std::string checkpoint, manifest, prompt, out;
  std::vector<std::string> images;
  double threshold = 50.0;
  OiqaConfig cfg;
  std::string pair_mode = "ordered";
};

void cmd_score(const ScoreArgs& a, bool with_threshold, const Globals& g,
               std::ostream& out) {
  const OiqaModel model = make_oiqa(a.checkpoint, a.cfg, a.pair_mode, g.seed);
  std::vector<std::pair<std::string, std::string>> inputs;
  for (const auto& img : a.images) inputs.emplace_back(img, a.prompt);
  if (!a.manifest.empty()) {
    const fs::path manifest(a.manifest);
    const CsvTable t = CsvTable::read(manifest);
    const std::size_t ci = t.column("input"), cp = t.column("prompt");
    for (const auto& row : t.rows()) {
      const fs::path in(row[ci]);
      inputs.emplace_back((in.is_absolute() ? in : manifest.parent_path() / in).string(),
                          row[cp]);
    }
  }
  if (inputs.empty()) throw UsageError("score needs --image or --manifest");
  std::vector<ScoreTriple> scores(inputs.size());
  parallel_for(inputs.size(), g.jobs, [&](std::size_t i) {
    nn::NoGradGuard no_grad;
    const fs::path in(inputs[i].first);
    if (has_ext(in, ".png")) {
      scores[i] = model.score(read_erp(in), inputs[i].second);
    } else {
      scores[i] = model.head().predict(import_viewport_features(in));
    }
  });
  std::vector<std::string> header = {"input", "quality", "comfortability", "correspondence",
                                     "mean"};
  if (with_threshold) header.push_back("accepted");
  CsvTable t(header);
  std::vector<bool> accepted(inputs.size(), false);
  if (with_threshold) {
    for (const auto& item : filter(scores, a.threshold).accepted) accepted[item.index] = true;
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<std::string> row = {inputs[i].first, format_double(scores[i][0]),
                                    format_double(scores[i][1]), format_double(scores[i][2]),
                                    format_double(scores[i].mean())};
    if (with_threshold) row.push_back(accepted[i] ? "1" : "0");
    t.add_row(std::move(row));
  }
  emit(t, a.out, out);
}

struct PredictSalArgs {
  std::string checkpoint, image, prompt, out, preview;
  int width = 0;
  OisalConfig cfg;
  bool no_text = false;
};

void cmd_predict_sal(const PredictSalArgs& a, const Globals& g) {
  const OisalModel model = make_oisal(a.checkpoint, a.cfg, a.no_text, g.seed);
  const Raster erp = read_erp(a.image);
  nn::NoGradGuard no_grad;
  const int w = a.width > 0 ? a.width : erp.width();
  if (w % 2 != 0) throw UsageError("--width must be even");
  const SaliencyMap m = model.predict(model.encode(erp, a.prompt), w, w / 2);
  write_float_map(a.out, m);
  if (!a.preview.empty()) write_preview_png(a.preview, m);
}

struct OptimizeArgs {
  std::string image, prompt, oiqa, oisal, client, out, report, work_dir;
  double threshold = 50.0;
  int max_iters = 2;
  double x0 = 0.5;
  int dilation = 0;
  double fov = 90.0;
  int view_size = 512;
  int bit_depth = 8;
  OiqaConfig qcfg;
  OisalConfig scfg;
};

void cmd_optimize(OptimizeArgs a, const Globals& g, std::ostream& out) {
  a.scfg.encoder = a.qcfg.encoder;
  a.scfg.heads = a.qcfg.heads;
  const OiqaModel qm = make_oiqa(a.oiqa, a.qcfg, "ordered", g.seed);
  const OisalModel sm = make_oisal(a.oisal, a.scfg, false, g.seed);
  OiqaScorer scorer(qm);
  OisalPredictor predictor(sm);
  OptimizeConfig cfg;
  cfg.threshold = a.threshold;
  cfg.max_iters = a.max_iters;
  cfg.mask.x0 = a.x0;
  cfg.mask.dilation = a.dilation;
  cfg.mask.viewports = eight_viewport_set(a.fov, a.view_size);
  cfg.client_command = a.client;
  cfg.work_dir = a.work_dir;
  const Raster img = read_erp(a.image);
  nn::NoGradGuard no_grad;
  const OptimizeResult r = optimize(img, a.prompt, scorer, predictor, cfg);
  write_png(a.out, r.image, a.bit_depth);
  emit(r.report.to_csv(), a.report, out);
}

// ---------------------------------------------------------------- config

bool given_explicitly(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Turns config-file entries into command-line tokens. Keys already present on
// the command line are skipped so explicit flags always win.
void config_tokens(const nlohmann::json& j, CLI::App& app, CLI::App* sub,
                   const std::vector<std::string>& args, std::vector<std::string>& global,
                   std::vector<std::string>& local) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw UsageError("config key 'config' is not allowed");
    const std::string flag = "--" + key;
    CLI::Option* opt = sub != nullptr ? sub->get_option_no_throw(flag) : nullptr;
    std::vector<std::string>* dest = &local;
    if (opt == nullptr) {
      opt = app.get_option_no_throw(flag);
      dest = &global;
    }
    if (opt == nullptr || key == "help" || key == "version") {
      throw UsageError("unknown config key '" + key + "'");
    }
    if (given_explicitly(args, key)) continue;
    auto scalar = [&](const nlohmann::json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number() || v.is_boolean()) return v.dump();
      throw UsageError("config key '" + key + "' has an unsupported value");
    };
    if (opt->get_items_expected_max() == 0) {
      if (!value.is_boolean()) throw UsageError("config key '" + key + "' must be a boolean");
      if (value.get<bool>()) dest->push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (opt->get_delimiter() != '\0') {
          joined += (i ? std::string(1, opt->get_delimiter()) : "") + scalar(value[i]);
        } else {
          dest->push_back(flag);
          dest->push_back(scalar(value[i]));
        }
      }
      if (opt->get_delimiter() != '\0' && !value.empty()) {
        dest->push_back(flag);
        dest->push_back(joined);
      }
    } else {
      dest->push_back(flag);
      dest->push_back(scalar(value));
    }
  }
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Omnidirectional image quality, saliency and refinement toolkit", "omniqa"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(0, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for per-file work")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--config", g.config, "JSON file of option defaults");
  app.add_flag("--version", g.version, "Print toolkit and format versions");

  ProjectArgs project;
  auto* sp = app.add_subcommand("project", "Split an ERP into viewports or merge them back");
  sp->add_option("--mode", project.mode, "split or merge")
      ->required()
      ->check(CLI::IsMember({"split", "merge"}));
  sp->add_option("--input", project.input, "ERP PNG (split)");
  sp->add_option("--out-dir", project.out_dir, "Viewport directory (split)");
  sp->add_option("--set", project.set, "Viewport set: six or eight")
      ->check(CLI::IsMember({"six", "eight"}))
      ->capture_default_str();
  sp->add_option("--fov", project.fov, "Field of view, 0 for the set default");
  sp->add_option("--size", project.size, "Viewport side, 0 for the set default");
  sp->add_option("--input-dir", project.input_dir, "Viewport directory (merge)");
  sp->add_option("--width", project.width, "Output ERP width (merge)");
  sp->add_option("--out", project.out, "Output ERP PNG (merge)");
  sp->add_option("--base", project.base, "ERP PNG that fills uncovered pixels (merge)");
  sp->add_option("--bit-depth", project.bit_depth, "PNG bit depth")
      ->check(CLI::IsMember({8, 16}))
      ->capture_default_str();

  MosArgs mos;
  auto* sm = app.add_subcommand("mos", "Screen subjects and compute MOS");
  sm->add_option("--ratings", mos.ratings, "Ratings CSV")->required();
  sm->add_option("--out", mos.out, "MOS CSV (default: stdout)");
  sm->add_option("--report", mos.report, "Subject rejection report CSV");
  sm->add_flag("--no-screening", mos.no_screening, "Keep every subject");
  sm->add_flag("--drop-degenerate", mos.drop_degenerate,
               "Drop subjects whose ratings never vary");

  SalmapArgs salmap;
  auto* ss = app.add_subcommand("salmap", "Build saliency maps from fixations");
  ss->add_option("--fixations", salmap.fixations, "Fixation CSV")->required();
  ss->add_option("--out-dir", salmap.out_dir, "Output directory")->required();
  ss->add_option("--width", salmap.width, "Map width")->capture_default_str();
  ss->add_option("--height", salmap.height, "Map height, 0 for width/2");
  ss->add_option("--sigma", salmap.sigma, "Equatorial Gaussian sigma, degrees")
      ->capture_default_str();
  ss->add_flag("--no-preview", salmap.no_preview, "Skip the PNG previews");

  StatsArgs stats;
  auto* st = app.add_subcommand("stats", "Image statistics and dataset coverage");
  st->add_option("--db", stats.dbs, "Database as name=directory (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  st->add_option("--bins", stats.bins, "Histogram bins")->capture_default_str();
  st->add_option("--out", stats.out, "Summary CSV (default: stdout)");
  st->add_option("--features-out", stats.features_out, "Per-image feature CSV");

  MetricsIqaArgs miqa;
  auto* mi = app.add_subcommand("metrics-iqa", "Correlation and ROC metrics");
  mi->add_option("--input", miqa.input, "CSV with pred and mos columns")->required();
  mi->add_option("--out", miqa.out, "Output CSV (default: stdout)");
  mi->add_flag("--logistic", miqa.logistic, "Also report PLCC after a logistic fit");
  mi->add_option("--z", miqa.z, "Critical value of the significance test")
      ->capture_default_str();

  MetricsSalArgs msal;
  auto* ms = app.add_subcommand("metrics-sal", "Saliency metrics");
  ms->add_option("--pred", msal.pred, "Predicted map (.oqfm or PNG)")->required();
  ms->add_option("--gt", msal.gt, "Ground-truth map (.oqfm or PNG)")->required();
  ms->add_option("--fixations", msal.fixations, "Fixation CSV for AUC-Judd and NSS");
  ms->add_option("--image-id", msal.image_id, "Image in the fixation CSV");
  ms->add_option("--out", msal.out, "Output CSV (default: stdout)");

  TrainOiqaArgs toiqa;
  auto* tq = app.add_subcommand("train-oiqa", "Train the quality head");
  tq->add_option("--manifest", toiqa.manifest, "Training manifest CSV")->required();
  tq->add_option("--out", toiqa.out, "Checkpoint path")->required();
  tq->add_option("--trace", toiqa.trace, "Loss trace CSV");
  tq->add_option("--split", toiqa.split, "none, scene or generator")
      ->check(CLI::IsMember({"none", "scene", "generator"}))
      ->capture_default_str();
  tq->add_option("--train-fraction", toiqa.train_fraction, "Scene split train fraction")
      ->capture_default_str();
  tq->add_option("--holdout", toiqa.holdout, "Generator held out for testing");
  tq->add_option("--eval-out", toiqa.eval_out, "Per-sample predictions CSV");
  add_oiqa_options(tq, toiqa.cfg, toiqa.pair_mode);
  add_train_options(tq, toiqa.cfg.train);

  TrainOisalArgs tsal;
  auto* ts = app.add_subcommand("train-oisal", "Train the saliency decoder");
  ts->add_option("--manifest", tsal.manifest, "Training manifest CSV")->required();
  ts->add_option("--out", tsal.out, "Checkpoint path")->required();
  ts->add_option("--trace", tsal.trace, "Loss trace CSV");
  ts->add_option("--alpha", tsal.cfg.alpha, "CC loss weight")->capture_default_str();
  ts->add_option("--beta", tsal.cfg.beta, "KLD loss weight")->capture_default_str();
  add_oisal_options(ts, tsal.cfg, tsal.no_text);
  add_train_options(ts, tsal.cfg.train);

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Predict quality, comfortability, correspondence");
  sc->add_option("--checkpoint", score.checkpoint, "Quality checkpoint");
  sc->add_option("--image", score.images, "ERP PNG or viewport feature file (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sc->add_option("--prompt", score.prompt, "Prompt for --image inputs");
  sc->add_option("--manifest", score.manifest, "CSV with input and prompt columns");
  sc->add_option("--threshold", score.threshold, "Add an accepted column (mean >= value)");
  sc->add_option("--out", score.out, "Output CSV (default: stdout)");
  add_oiqa_options(sc, score.cfg, score.pair_mode);

  PredictSalArgs psal;
  auto* ps = app.add_subcommand("predict-sal", "Predict a saliency map");
  ps->add_option("--checkpoint", psal.checkpoint, "Saliency checkpoint");
  ps->add_option("--image", psal.image, "ERP PNG")->required();
  ps->add_option("--prompt", psal.prompt, "Prompt");
  ps->add_option("--out", psal.out, "Float map (.oqfm)")->required();
  ps->add_option("--preview", psal.preview, "16-bit PNG preview");
  ps->add_option("--width", psal.width, "Map width, 0 for the image width");
  add_oisal_options(ps, psal.cfg, psal.no_text);

  OptimizeArgs opt;
  auto* so = app.add_subcommand("optimize", "Repaint salient regions until the score passes");
  so->add_option("--image", opt.image, "ERP PNG")->required();
  so->add_option("--prompt", opt.prompt, "Prompt");
  so->add_option("--oiqa", opt.oiqa, "Quality checkpoint");
  so->add_option("--oisal", opt.oisal, "Saliency checkpoint");
  so->add_option("--client", opt.client, "Inpainting command")->required();
  so->add_option("--threshold", opt.threshold, "Mean score to reach")->capture_default_str();
  so->add_option("--max-iters", opt.max_iters, "Inpainting rounds")->capture_default_str();
  so->add_option("--x0", opt.x0, "Mask threshold on the peak-normalized map")
      ->capture_default_str();
  so->add_option("--dilation", opt.dilation, "Mask dilation radius")->capture_default_str();
  so->add_option("--fov", opt.fov, "Viewport field of view")->capture_default_str();
  so->add_option("--view-size", opt.view_size, "Viewport side")->capture_default_str();
  so->add_option("--out", opt.out, "Refined ERP PNG")->required();
  so->add_option("--report", opt.report, "Iteration report CSV (default: stdout)");
  so->add_option("--work-dir", opt.work_dir, "Parent of the job directories");
  so->add_option("--bit-depth", opt.bit_depth, "PNG bit depth")
      ->check(CLI::IsMember({8, 16}));
  add_encoder_options(so, opt.qcfg.encoder);
  so->add_option("--heads", opt.qcfg.heads, "Attention heads in the quality and saliency models")
      ->capture_default_str();
  so->add_option("--viewport-size", opt.qcfg.viewport_size, "Quality viewport side")
      ->capture_default_str();
  so->add_option("--input-height", opt.scfg.input_height, "Saliency encoder ERP height")
      ->capture_default_str();

  try {
    std::vector<std::string> full = args;
    const std::string config_path = find_config_path(args);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config file " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(config_path + ": " + e.what());
      }
      std::size_t sub_pos = args.size();
      CLI::App* sub = nullptr;
      for (std::size_t i = 0; i < args.size() && sub == nullptr; ++i) {
        for (CLI::App* s : app.get_subcommands({})) {
          if (s->get_name() == args[i]) {
            sub = s;
            sub_pos = i;
          }
        }
      }
      std::vector<std::string> global, local;
      config_tokens(j, app, sub, args, global, local);
      full = global;
      full.insert(full.end(), args.begin(), args.begin() + sub_pos);
      if (sub_pos < args.size()) {
        full.push_back(args[sub_pos]);
        full.insert(full.end(), local.begin(), local.end());
        full.insert(full.end(), args.begin() + sub_pos + 1, args.end());
      }
    }
    std::vector<std::string> reversed(full.rbegin(), full.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      if (code == 0) return kExitOk;
      err << app.help();
      return kExitUsage;
    }
    if (g.version) {
      out << "omniqa " << kToolkitVersion << "\n"
          << "tensor-format " << nn::kTensorFormatVersion << "\n"
          << "float-map-format 1\n";
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      err << "omniqa: a subcommand is required\n" << app.help();
      return kExitUsage;
    }
    if (sp->parsed()) cmd_project(project, g);
    if (sm->parsed()) cmd_mos(mos, out);
    if (ss->parsed()) cmd_salmap(salmap, g);
    if (st->parsed()) cmd_stats(stats, g, out);
    if (mi->parsed()) cmd_metrics_iqa(miqa, out);
    if (ms->parsed()) cmd_metrics_sal(msal, out);
    if (tq->parsed()) cmd_train_oiqa(toiqa, g, out);
    if (ts->parsed()) cmd_train_oisal(tsal, g, out);
    if (sc->parsed()) cmd_score(score, sc->count("--threshold") > 0, g, out);
    if (ps->parsed()) cmd_predict_sal(psal, g);
    if (so->parsed()) cmd_optimize(opt, g, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "omniqa: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ClientError& e) {
    err << "omniqa: inpainting client error: " << e.what() << "\n";
    return kExitClient;
  } catch (const std::exception& e) {
    err << "omniqa: error: " << e.what() << "\n";
    return kExitData;
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace omniqa
