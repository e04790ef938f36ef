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

#include "omniqa/optimize.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>

#include "omniqa/error.h"
#include "omniqa/png_io.h"

namespace omniqa {
namespace fs = std::filesystem;

FilterResult filter(const std::vector<ScoreTriple>& scores, double threshold) {
  FilterResult r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (scores[i].mean() >= threshold ? r.accepted : r.rejected).push_back({i, scores[i]});
  }
  return r;
}

FilterResult filter(const std::vector<PromptedImage>& items, Scorer& scorer,
                    double threshold) {
  std::vector<ScoreTriple> scores;
  scores.reserve(items.size());
  for (const auto& it : items) scores.push_back(scorer.score(it.image, it.prompt));
  return filter(scores, threshold);
}

void MaskConfig::validate() const {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw RangeError("x0 must lie in [0, 1]");
  if (dilation < 0) throw RangeError("dilation radius must be non-negative");
  if (viewports.empty()) throw RangeError("mask config needs at least one viewport");
  for (const auto& v : viewports) check_viewport(v);
}

Raster threshold_mask(const Raster& s, double x0) {
  Raster m(s.width(), s.height(), 1);
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) m.at(x, y) = s.at(x, y) > x0 ? 1.0f : 0.0f;
  }
  return m;
}

Raster dilate(const Raster& mask, int radius) {
  if (radius <= 0) return mask;
  const int w = mask.width(), h = mask.height();
  // Separable: a square element is a horizontal then a vertical run.
  Raster tmp(w, h, 1), out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float v = 0.0f;
      for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius) && v == 0.0f; ++k) {
        v = mask.at(k, y) > 0.0f ? 1.0f : 0.0f;
      }
      tmp.at(x, y) = v;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float v = 0.0f;
      for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius) && v == 0.0f; ++k) {
        v = tmp.at(x, k);
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

std::vector<Raster> make_masks(const SaliencyMap& sal, const MaskConfig& cfg) {
  cfg.validate();
  const bool empty = std::all_of(sal.values.begin(), sal.values.end(),
                                 [](double v) { return v == 0.0; });
  std::vector<Raster> masks;
  if (empty) {
    for (const auto& v : cfg.viewports) masks.emplace_back(v.out_width, v.out_height, 1);
    return masks;
  }
  const Raster peak = to_raster(
      sal.normalization == Normalization::kPeak ? sal : to_peak_normalized(sal));
  for (const auto& v : cfg.viewports) {
    masks.push_back(dilate(threshold_mask(erp_to_viewport(peak, v), cfg.x0), cfg.dilation));
  }
  return masks;
}

double mask_area_fraction(const Raster& mask) {
  if (mask.pixel_count() == 0) return 0.0;
  double on = 0.0;
  for (float v : mask.data()) on += v > 0.0f ? 1.0 : 0.0;
  return on / static_cast<double>(mask.pixel_count() * mask.channels());
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string view_name(const char* stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu.png", stem, i);
  return buf;
}

// Removes the job directory on scope exit unless released.
class JobDirGuard {
 public:
  explicit JobDirGuard(fs::path dir) : dir_(std::move(dir)) {}
  ~JobDirGuard() {
    if (armed_) {
      std::error_code ec;
      fs::remove_all(dir_, ec);
    }
  }
  void release() { armed_ = false; }

 private:
  fs::path dir_;
  bool armed_ = true;
};

}  // namespace

std::vector<Raster> run_inpaint(const InpaintJob& job, const std::string& command,
                                const InpaintOptions& opts) {
  if (job.viewports.size() != job.masks.size() || job.viewports.empty()) {
    throw ShapeError("inpaint job needs one mask per viewport");
  }
  for (std::size_t i = 0; i < job.viewports.size(); ++i) {
    if (job.viewports[i].width() != job.masks[i].width() ||
        job.viewports[i].height() != job.masks[i].height()) {
      throw ShapeError("mask " + std::to_string(i) + " does not match its viewport");
    }
  }
  if (command.empty()) throw ClientError("no inpainting client command configured");
  if (fs::exists(job.dir) && !fs::is_empty(job.dir)) {
    throw DataError("job directory " + job.dir.string() + " already exists and is not empty");
  }

  JobDirGuard guard(job.dir);
  fs::create_directories(job.dir / "viewports");
  fs::create_directories(job.dir / "masks");
  fs::create_directories(job.dir / "refined");
  for (std::size_t i = 0; i < job.viewports.size(); ++i) {
    write_png(job.dir / "viewports" / view_name("view", i), job.viewports[i]);
    write_png(job.dir / "masks" / view_name("mask", i), job.masks[i]);
  }
  {
    std::ofstream p(job.dir / "prompt.txt", std::ios::binary);
    p << job.prompt;
    if (!p) throw DataError("cannot write prompt.txt in " + job.dir.string());
  }

  const std::string line = command + " " + shell_quote(job.dir.string()) + " 2>&1";
  std::fflush(nullptr);
  FILE* pipe = ::popen(line.c_str(), "r");
  if (!pipe) throw ClientError("cannot start inpainting client: " + command);
  std::string output;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1) throw ClientError("inpainting client did not finish: " + command);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (code == 127) {
    throw ClientError("inpainting client not found: " + command + "\n" + output);
  }
  if (code != 0) {
    throw ClientError("inpainting client exited with status " + std::to_string(code) +
                      "\n" + output);
  }

  std::vector<Raster> refined;
  for (std::size_t i = 0; i < job.viewports.size(); ++i) {
    const fs::path p = job.dir / "refined" / view_name("view", i);
    if (!fs::exists(p)) throw ProtocolError("client produced no " + p.string());
    Raster r;
    try {
      r = read_png(p);
    } catch (const Error& e) {
      throw ProtocolError("unreadable client output " + p.string() + ": " + e.what());
    }
    const Raster& v = job.viewports[i];
    if (r.width() != v.width() || r.height() != v.height()) {
      throw ProtocolError("client output " + p.string() + " is " +
                          std::to_string(r.width()) + "x" + std::to_string(r.height()) +
                          ", expected " + std::to_string(v.width()) + "x" +
                          std::to_string(v.height()));
    }
    if (r.channels() != v.channels()) {
      if (r.channels() == 3 && v.channels() == 1) {
        r = to_gray(r);
      } else if (r.channels() == 1 && v.channels() == 3) {
        Raster rgb(r.width(), r.height(), 3);
        for (int y = 0; y < r.height(); ++y) {
          for (int x = 0; x < r.width(); ++x) {
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = r.at(x, y);
          }
        }
        r = std::move(rgb);
      } else {
        throw ProtocolError("client output " + p.string() + " has an unexpected channel count");
      }
    }
    refined.push_back(std::move(r));
  }
  if (opts.keep_job_dir) {
    guard.release();
  }
  return refined;
}

Raster reassemble(const Raster& original, const std::vector<Raster>& refined,
                  const std::vector<Raster>& masks,
                  const std::vector<ViewportSpec>& viewports) {
  if (refined.size() != viewports.size() || masks.size() != viewports.size()) {
    throw ShapeError("reassemble needs one refined view and mask per viewport");
  }
  const int w = original.width(), h = original.height();
  std::vector<ErpPartial> image_parts, mask_parts;
  for (std::size_t i = 0; i < viewports.size(); ++i) {
    image_parts.push_back(viewport_to_erp(refined[i], viewports[i], w, h));
    mask_parts.push_back(viewport_to_erp(masks[i], viewports[i], w, h));
  }
  const Raster composite = assemble_erp_over(original, image_parts);
  const Raster soft = assemble_erp_over(Raster(w, h, 1), mask_parts);
  Raster out = original;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float m = std::clamp(soft.at(x, y), 0.0f, 1.0f);
      if (m == 0.0f) continue;
      for (int c = 0; c < out.channels(); ++c) {
        const float o = original.at(x, y, c);
        out.at(x, y, c) = std::clamp(o + m * (composite.at(x, y, c) - o), 0.0f, 1.0f);
      }
    }
  }
  return out;
}

CsvTable OptimizeReport::to_csv() const {
  CsvTable t({"iteration", "stage", "quality", "comfortability", "correspondence",
              "mean", "mask_area", "accepted"});
  auto row = [&](const std::string& it, const std::string& stage, const ScoreTriple& s,
                 const std::string& area, const std::string& acc) {
    t.add_row({it, stage, format_double(s[0]), format_double(s[1]), format_double(s[2]),
               format_double(s.mean()), area, acc});
  };
  row("0", "initial", initial, "", "");
  for (const auto& r : iterations) {
    std::string area;
    for (std::size_t i = 0; i < r.mask_area.size(); ++i) {
      if (i) area += ';';
      area += format_double(r.mask_area[i]);
    }
    const std::string it = std::to_string(r.iteration);
    row(it, "before", r.before, "", "");
    row(it, "after", r.after, area, r.accepted ? "1" : "0");
  }
  row(std::to_string(iterations.size()), "final", final_scores, "",
      reached_threshold ? "threshold" : (max_iters_reached ? "max_iters" : ""));
  return t;
}

OptimizeResult optimize(const Raster& image, const std::string& prompt, Scorer& scorer,
                        SaliencyPredictor& saliency, const OptimizeConfig& cfg) {
  check_erp(image);
  cfg.mask.validate();
  if (cfg.max_iters < 0) throw RangeError("max_iters must be non-negative");
  static std::atomic<unsigned> job_counter{0};
  const fs::path parent = cfg.work_dir.empty() ? fs::temp_directory_path() : cfg.work_dir;

  OptimizeResult res{image, {}};
  ScoreTriple current = scorer.score(image, prompt);
  res.report.initial = current;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (current.mean() >= cfg.threshold) break;
    const SaliencyMap sal = saliency.predict(res.image, prompt);
    const std::vector<Raster> masks = make_masks(sal, cfg.mask);
    InpaintJob job;
    job.dir = parent / ("omniqa_job_" + std::to_string(::getpid()) + "_" +
                        std::to_string(job_counter++));
    for (const auto& v : cfg.mask.viewports) job.viewports.push_back(erp_to_viewport(res.image, v));
    job.masks = masks;
    job.prompt = prompt;
    const std::vector<Raster> refined = run_inpaint(job, cfg.client_command);
    ++res.report.inpaint_calls;
    Raster candidate = reassemble(res.image, refined, masks, cfg.mask.viewports);
    const ScoreTriple after = scorer.score(candidate, prompt);

    IterationRecord rec;
    rec.iteration = it;
    rec.before = current;
    rec.after = after;
    for (const auto& m : masks) rec.mask_area.push_back(mask_area_fraction(m));
    rec.accepted = after.mean() >= current.mean();
    if (rec.accepted) {
      res.image = std::move(candidate);
      current = after;
    }
    res.report.iterations.push_back(std::move(rec));
  }
  res.report.final_scores = current;
  res.report.reached_threshold = current.mean() >= cfg.threshold;
  res.report.max_iters_reached =
      !res.report.reached_threshold &&
      static_cast<int>(res.report.iterations.size()) == cfg.max_iters;
  return res;
}

}  // namespace omniqa
