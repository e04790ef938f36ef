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

#ifndef OMNIQA_OPTIMIZE_H_
#define OMNIQA_OPTIMIZE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "omniqa/csv.h"
#include "omniqa/geometry.h"
#include "omniqa/oiqa.h"
#include "omniqa/oisal.h"
#include "omniqa/raster.h"
#include "omniqa/saliency.h"

namespace omniqa {

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreTriple score(const Raster& erp, const std::string& prompt) = 0;
};

class SaliencyPredictor {
 public:
  virtual ~SaliencyPredictor() = default;
  virtual SaliencyMap predict(const Raster& erp, const std::string& prompt) = 0;
};

class OiqaScorer : public Scorer {
 public:
  explicit OiqaScorer(const OiqaModel& model) : model_(model) {}
  ScoreTriple score(const Raster& erp, const std::string& prompt) override {
    return model_.score(erp, prompt);
  }

 private:
  const OiqaModel& model_;
};

class OisalPredictor : public SaliencyPredictor {
 public:
  explicit OisalPredictor(const OisalModel& model) : model_(model) {}
  SaliencyMap predict(const Raster& erp, const std::string& prompt) override {
    return model_.predict(erp, prompt);
  }

 private:
  const OisalModel& model_;
};

struct ScoredItem {
  std::size_t index;
  ScoreTriple scores;
};

struct FilterResult {
  std::vector<ScoredItem> accepted;  // mean score >= threshold
  std::vector<ScoredItem> rejected;
};

FilterResult filter(const std::vector<ScoreTriple>& scores, double threshold);

struct PromptedImage {
  Raster image;
  std::string prompt;
};

FilterResult filter(const std::vector<PromptedImage>& items, Scorer& scorer,
                    double threshold);

struct MaskConfig {
  double x0 = 0.5;  // on the peak-normalized map
  std::vector<ViewportSpec> viewports = eight_viewport_set(90.0, 512);
  int dilation = 0;  // square structuring element radius, pixels

  void validate() const;  // throws RangeError
};

// 1 where s > x0 strictly, else 0.
Raster threshold_mask(const Raster& s, double x0);
// Binary dilation with a (2r+1) x (2r+1) square.
Raster dilate(const Raster& mask, int radius);

// Projects the peak-normalized map into every configured viewport and
// thresholds it. An all-zero map gives empty masks.
std::vector<Raster> make_masks(const SaliencyMap& sal, const MaskConfig& cfg);

double mask_area_fraction(const Raster& mask);

struct InpaintJob {
  std::filesystem::path dir;
  std::vector<Raster> viewports;
  std::vector<Raster> masks;  // white (1) marks pixels to repaint
  std::string prompt;
};

struct InpaintOptions {
  // Leave the job directory in place after a successful run.
  bool keep_job_dir = false;
};

// Writes viewports/view_NN.png, masks/mask_NN.png and prompt.txt under
// job.dir, runs `<command> <job.dir>` through the shell and reads back
// refined/view_NN.png. Nonzero exit raises ClientError with the captured
// output; missing or mis-sized outputs raise ProtocolError. The job
// directory is removed afterwards unless opts.keep_job_dir, and always on
// failure.
std::vector<Raster> run_inpaint(const InpaintJob& job, const std::string& command,
                                const InpaintOptions& opts = {});

// Lifts refined viewports back onto `original` and blends them in through
// the lifted soft mask, so unmasked pixels keep their original values.
Raster reassemble(const Raster& original, const std::vector<Raster>& refined,
                  const std::vector<Raster>& masks,
                  const std::vector<ViewportSpec>& viewports);

struct IterationRecord {
  int iteration = 0;
  ScoreTriple before;
  ScoreTriple after;
  std::vector<double> mask_area;  // per viewport
  bool accepted = false;
};

struct OptimizeReport {
  ScoreTriple initial;
  ScoreTriple final_scores;
  std::vector<IterationRecord> iterations;
  int inpaint_calls = 0;
  bool reached_threshold = false;
  bool max_iters_reached = false;

  CsvTable to_csv() const;
};

struct OptimizeConfig {
  double threshold = 50.0;
  int max_iters = 2;
  MaskConfig mask;
  std::string client_command;
  // Parent for per-iteration job directories; empty uses the system temp dir.
  std::filesystem::path work_dir;
};

struct OptimizeResult {
  Raster image;
  OptimizeReport report;
};

OptimizeResult optimize(const Raster& image, const std::string& prompt, Scorer& scorer,
                        SaliencyPredictor& saliency, const OptimizeConfig& cfg);

}  // namespace omniqa

#endif  // OMNIQA_OPTIMIZE_H_
