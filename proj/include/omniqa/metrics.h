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

#ifndef OMNIQA_METRICS_H_
#define OMNIQA_METRICS_H_

#include <array>
#include <span>
#include <vector>

#include "omniqa/geometry.h"
#include "omniqa/saliency.h"

namespace omniqa {

// ---------------------------------------------------------------------------
// Correlation between predicted scores and MOS. All three need at least three
// samples and throw DegenerateError on constant input.

// 1-based ranks; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> v);

double srcc(std::span<const double> pred, std::span<const double> gt);

// Kendall tau-b, O(n log n) (Knight's algorithm).
double krcc(std::span<const double> pred, std::span<const double> gt);

struct PlccOptions {
  // Map predictions through a fitted 4-parameter logistic before correlating.
  bool logistic_fit = false;
};
double plcc(std::span<const double> pred, std::span<const double> gt,
            const PlccOptions& opts = {});

// Least-squares fit of y ~ b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|)).
std::array<double, 4> fit_logistic(std::span<const double> x,
                                   std::span<const double> y);
double eval_logistic(const std::array<double, 4>& b, double x);

// ---------------------------------------------------------------------------
// ROC analyses over image pairs.

struct ScorePair {
  double pred = 0.0;
  double mos = 0.0;
  double stddev = 0.0;
  int n = 2;
};

struct RocOptions {
  // Two-sample z threshold for "significantly different" (95% two-sided).
  double z_critical = 1.96;
};

// |mos_a - mos_b| / sqrt(s_a^2/n_a + s_b^2/n_b) > z_critical.
bool significantly_different(const ScorePair& a, const ScorePair& b,
                             const RocOptions& opts = {});

// P(pos > neg) + 0.5 P(pos == neg), computed from average ranks.
double mann_whitney_auc(std::span<const double> positives,
                        std::span<const double> negatives);

// Different vs. similar: statistic |pred_a - pred_b| over all unordered
// pairs, positive when the pair is significantly different.
double roc_different_similar(std::span<const ScorePair> pairs,
                             const RocOptions& opts = {});

// Better vs. worse over significantly different pairs: each pair contributes
// pred_better - pred_worse as a positive and its negation as a negative.
double roc_better_worse(std::span<const ScorePair> pairs,
                        const RocOptions& opts = {});

// ---------------------------------------------------------------------------
// Saliency consistency. Maps of any normalization are accepted; each metric
// renormalizes internally as it needs.

double cc(const SaliencyMap& pred, const SaliencyMap& gt);
double kld(const SaliencyMap& pred, const SaliencyMap& gt, double eps = 1e-8);
double sim(const SaliencyMap& pred, const SaliencyMap& gt);
double nss(const SaliencyMap& pred, std::span<const PixelIndex> fixations);
double auc_judd(const SaliencyMap& pred, std::span<const PixelIndex> fixations);

struct SaliencyScores {
  double auc = 0.0;
  double nss = 0.0;
  double cc = 0.0;
  double sim = 0.0;
  double kld = 0.0;
};

SaliencyScores evaluate_saliency(const SaliencyMap& pred, const SaliencyMap& gt,
                                 const FixationSet& fixations);

}  // namespace omniqa

#endif  // OMNIQA_METRICS_H_
