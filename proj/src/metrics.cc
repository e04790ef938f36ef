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

#include "omniqa/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "omniqa/error.h"

namespace omniqa {
namespace {

void check_pair_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("correlation inputs differ in length (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  if (a.size() < 3) {
    throw InsufficientDataError("correlation needs at least 3 samples");
  }
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw DegenerateError("correlation undefined for constant input");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// Number of tied pairs among runs of equal values in a sorted sequence.
template <typename Eq>
double tied_pairs(std::size_t n, Eq equal_to_prev) {
  double total = 0.0;
  double run = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal_to_prev(i)) {
      run += 1.0;
    } else {
      total += run * (run - 1.0) / 2.0;
      run = 1.0;
    }
  }
  return total + run * (run - 1.0) / 2.0;
}

// Stable merge sort of `v`, returning the number of inversions.
double merge_count(std::vector<double>& v, std::vector<double>& tmp,
                   std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0.0;
  const std::size_t mid = lo + (hi - lo) / 2;
  double swaps = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<double>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return swaps;
}

void check_maps(const SaliencyMap& pred, const SaliencyMap& gt) {
  if (!pred.same_shape(gt)) {
    throw ShapeError("saliency maps differ in shape: prediction " +
                     pred.shape_string() + " vs ground truth " +
                     gt.shape_string());
  }
  if (pred.values.empty()) throw ShapeError("empty saliency map");
}

std::vector<double> density_of(const SaliencyMap& m, const char* which) {
  double sum = 0.0;
  for (double v : m.values) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw RangeError(std::string(which) + " map has negative or non-finite values");
    }
    sum += v;
  }
  if (!(sum > 0.0)) {
    throw DegenerateError(std::string(which) + " map is all zero");
  }
  std::vector<double> out(m.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.values[i] / sum;
  return out;
}

void check_fixations(const SaliencyMap& map, std::span<const PixelIndex> fix) {
  if (fix.empty()) throw InsufficientDataError("no fixations");
  for (const auto& p : fix) {
    if (p.x < 0 || p.y < 0 || p.x >= map.width || p.y >= map.height) {
      throw RangeError("fixation (" + std::to_string(p.x) + "," +
                       std::to_string(p.y) + ") outside " + map.shape_string());
    }
  }
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double srcc(std::span<const double> pred, std::span<const double> gt) {
  check_pair_sizes(pred, gt);
  const auto rp = average_ranks(pred);
  const auto rg = average_ranks(gt);
  return pearson(rp, rg);
}

double krcc(std::span<const double> pred, std::span<const double> gt) {
  check_pair_sizes(pred, gt);
  const std::size_t n = pred.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pred[a] != pred[b] ? pred[a] < pred[b] : gt[a] < gt[b];
  });
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double n1 = tied_pairs(n, [&](std::size_t i) {
    return pred[order[i]] == pred[order[i - 1]];
  });
  const double n3 = tied_pairs(n, [&](std::size_t i) {
    return pred[order[i]] == pred[order[i - 1]] && gt[order[i]] == gt[order[i - 1]];
  });
  std::vector<double> y(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = gt[order[i]];
  const double swaps = merge_count(y, tmp, 0, n);
  const double n2 = tied_pairs(n, [&](std::size_t i) { return y[i] == y[i - 1]; });
  const double denom = (n0 - n1) * (n0 - n2);
  if (denom <= 0.0) throw DegenerateError("Kendall tau undefined for constant input");
  const double s = n0 - n1 - n2 + n3 - 2.0 * swaps;
  return std::clamp(s / std::sqrt(denom), -1.0, 1.0);
}

double eval_logistic(const std::array<double, 4>& b, double x) {
  return b[1] + (b[0] - b[1]) / (1.0 + std::exp(-(x - b[2]) / std::abs(b[3])));
}

std::array<double, 4> fit_logistic(std::span<const double> x,
                                   std::span<const double> y) {
  check_pair_sizes(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sx = 0.0;
  for (double v : x) sx += (v - mx) * (v - mx);
  sx = std::sqrt(sx / n);
  std::array<double, 4> b = {*std::max_element(y.begin(), y.end()),
                             *std::min_element(y.begin(), y.end()), mx,
                             sx > 0.0 ? sx : 1.0};
  auto sse = [&](const std::array<double, 4>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - eval_logistic(p, x[i]);
      s += r * r;
    }
    return s;
  };
  double lambda = 1e-3;
  double err = sse(b);
  for (int iter = 0; iter < 200; ++iter) {
    // Normal equations J^T J d = J^T r with Levenberg damping.
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s4 = std::abs(b[3]);
      const double e = std::exp(-(x[i] - b[2]) / s4);
      const double g = 1.0 / (1.0 + e);
      const double dg = g * g * e;  // d g / d((x - b3)/s4)
      const double diff = b[0] - b[1];
      const double j[4] = {g, 1.0 - g, -diff * dg / s4,
                           -diff * dg * (x[i] - b[2]) / (s4 * s4) *
                               (b[3] < 0.0 ? -1.0 : 1.0)};
      const double r = y[i] - (b[1] + diff * g);
      for (int a = 0; a < 4; ++a) {
        jtr[a] += j[a] * r;
        for (int c = 0; c < 4; ++c) jtj[a][c] += j[a] * j[c];
      }
    }
    bool improved = false;
    for (int attempt = 0; attempt < 10 && !improved; ++attempt) {
      double m[4][5];
      for (int a = 0; a < 4; ++a) {
        for (int c = 0; c < 4; ++c) m[a][c] = jtj[a][c];
        m[a][a] += lambda * (jtj[a][a] + 1e-12);
        m[a][4] = jtr[a];
      }
      // Gaussian elimination with partial pivoting.
      bool singular = false;
      for (int col = 0; col < 4 && !singular; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r) {
          if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        if (std::abs(m[piv][col]) < 1e-300) {
          singular = true;
          break;
        }
        for (int c = 0; c < 5; ++c) std::swap(m[col][c], m[piv][c]);
        for (int r = 0; r < 4; ++r) {
          if (r == col) continue;
          const double f = m[r][col] / m[col][col];
          for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
        }
      }
      if (singular) {
        lambda *= 10.0;
        continue;
      }
      std::array<double, 4> trial = b;
      for (int a = 0; a < 4; ++a) trial[a] += m[a][4] / m[a][a];
      if (trial[3] == 0.0) trial[3] = 1e-12;
      const double terr = sse(trial);
      if (std::isfinite(terr) && terr < err) {
        b = trial;
        err = terr;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return b;
}

double plcc(std::span<const double> pred, std::span<const double> gt,
            const PlccOptions& opts) {
  check_pair_sizes(pred, gt);
  if (!opts.logistic_fit) return pearson(pred, gt);
  const auto b = fit_logistic(pred, gt);
  std::vector<double> mapped(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) mapped[i] = eval_logistic(b, pred[i]);
  return pearson(mapped, gt);
}

bool significantly_different(const ScorePair& a, const ScorePair& b,
                             const RocOptions& opts) {
  const double diff = std::abs(a.mos - b.mos);
  const double se = std::sqrt(a.stddev * a.stddev / a.n + b.stddev * b.stddev / b.n);
  if (se == 0.0) return diff > 0.0;
  return diff / se > opts.z_critical;
}

double mann_whitney_auc(std::span<const double> positives,
                        std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw InsufficientDataError("ROC analysis needs both classes");
  }
  std::vector<double> all(positives.begin(), positives.end());
  all.insert(all.end(), negatives.begin(), negatives.end());
  const auto ranks = average_ranks(all);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) rank_sum += ranks[i];
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

namespace {

void check_score_pairs(std::span<const ScorePair> pairs) {
  if (pairs.size() < 2) throw InsufficientDataError("ROC analysis needs at least 2 images");
  for (const auto& p : pairs) {
    if (p.n < 2 || p.stddev < 0.0) {
      throw RangeError("score pair needs n >= 2 and stddev >= 0");
    }
  }
}

}  // namespace

double roc_different_similar(std::span<const ScorePair> pairs,
                             const RocOptions& opts) {
  check_score_pairs(pairs);
  std::vector<double> pos, neg;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < pairs.size(); ++b) {
      const double stat = std::abs(pairs[a].pred - pairs[b].pred);
      (significantly_different(pairs[a], pairs[b], opts) ? pos : neg).push_back(stat);
    }
  }
  if (pos.empty() || neg.empty()) {
    throw InsufficientDataError(
        "different-vs-similar ROC: every pair falls in one class");
  }
  return mann_whitney_auc(pos, neg);
}

double roc_better_worse(std::span<const ScorePair> pairs, const RocOptions& opts) {
  check_score_pairs(pairs);
  std::vector<double> pos, neg;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < pairs.size(); ++b) {
      if (!significantly_different(pairs[a], pairs[b], opts)) continue;
      const bool a_better = pairs[a].mos > pairs[b].mos;
      const double d = a_better ? pairs[a].pred - pairs[b].pred
                                : pairs[b].pred - pairs[a].pred;
      pos.push_back(d);
      neg.push_back(-d);
    }
  }
  if (pos.empty()) {
    throw InsufficientDataError("better-vs-worse ROC: no significantly different pairs");
  }
  return mann_whitney_auc(pos, neg);
}

double cc(const SaliencyMap& pred, const SaliencyMap& gt) {
  check_maps(pred, gt);
  const double n = static_cast<double>(pred.size());
  const double mp = std::accumulate(pred.values.begin(), pred.values.end(), 0.0) / n;
  const double mg = std::accumulate(gt.values.begin(), gt.values.end(), 0.0) / n;
  double spg = 0.0, spp = 0.0, sgg = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double a = pred.values[i] - mp;
    const double b = gt.values[i] - mg;
    spg += a * b;
    spp += a * a;
    sgg += b * b;
  }
  if (spp == 0.0 || sgg == 0.0) throw DegenerateError("CC undefined for a constant map");
  return spg / std::sqrt(spp * sgg);
}

double kld(const SaliencyMap& pred, const SaliencyMap& gt, double eps) {
  check_maps(pred, gt);
  const auto q = density_of(pred, "predicted");
  const auto p = density_of(gt, "ground-truth");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i] * std::log(p[i] / (q[i] + eps) + eps);
  }
  return sum;
}

double sim(const SaliencyMap& pred, const SaliencyMap& gt) {
  check_maps(pred, gt);
  const auto q = density_of(pred, "predicted");
  const auto p = density_of(gt, "ground-truth");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::min(p[i], q[i]);
  return sum;
}

double nss(const SaliencyMap& pred, std::span<const PixelIndex> fixations) {
  check_fixations(pred, fixations);
  const double n = static_cast<double>(pred.size());
  const double mean = std::accumulate(pred.values.begin(), pred.values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : pred.values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (sd == 0.0) throw DegenerateError("NSS undefined for a constant map");
  double sum = 0.0;
  for (const auto& p : fixations) sum += (pred.at(p.x, p.y) - mean) / sd;
  return sum / static_cast<double>(fixations.size());
}

double auc_judd(const SaliencyMap& pred, std::span<const PixelIndex> fixations) {
  check_fixations(pred, fixations);
  std::vector<double> fix_values;
  for (const auto& p : fixations) fix_values.push_back(pred.at(p.x, p.y));
  std::vector<double> all = pred.values;
  std::sort(fix_values.begin(), fix_values.end());
  std::sort(all.begin(), all.end());
  std::vector<double> thresholds = fix_values;
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::reverse(thresholds.begin(), thresholds.end());

  const double nf = static_cast<double>(fix_values.size());
  const double np = static_cast<double>(all.size());
  double area = 0.0;
  double prev_tpr = 0.0, prev_fpr = 0.0;
  for (double t : thresholds) {
    const auto fix_above = fix_values.end() -
                           std::lower_bound(fix_values.begin(), fix_values.end(), t);
    const auto all_above = all.end() - std::lower_bound(all.begin(), all.end(), t);
    const double tpr = static_cast<double>(fix_above) / nf;
    const double fpr = static_cast<double>(all_above) / np;
    area += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  area += 0.5 * (1.0 - prev_fpr) * (1.0 + prev_tpr);
  return area;
}

SaliencyScores evaluate_saliency(const SaliencyMap& pred, const SaliencyMap& gt,
                                 const FixationSet& fixations) {
  check_maps(pred, gt);
  const auto pix = fixation_pixels(fixations, pred.width, pred.height);
  return {auc_judd(pred, pix), nss(pred, pix), cc(pred, gt), sim(pred, gt),
          kld(pred, gt)};
}

}  // namespace omniqa
