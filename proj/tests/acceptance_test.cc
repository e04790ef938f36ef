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


// End-to-end acceptance checks. Prints one line per criterion and exits
// nonzero if any of them fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cli_fixture.h"
#include "omniqa/dataset_stats.h"
#include "omniqa/geometry.h"
#include "omniqa/metrics.h"
#include "omniqa/nn/ops.h"
#include "omniqa/nn/optim.h"
#include "omniqa/oiqa.h"
#include "omniqa/oisal.h"
#include "omniqa/optimize.h"
#include "omniqa/saliency.h"
#include "omniqa/subjective.h"
#include "oracles.h"
#include "test_util.h"

namespace omniqa {
namespace {

namespace fs = std::filesystem;
using nn::Tensor;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed sub-checks of one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string client(const std::string& mode) {
  return std::string(OMNIQA_INPAINT_CLIENT) + " " + mode;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------

std::string geometry_round_trip(Check& c) {
  const Raster erp = test::smooth_erp(512, 21);
  const auto t0 = Clock::now();
  std::vector<ErpPartial> parts;
  for (const auto& v : six_viewport_set(110.0, 384)) {
    parts.push_back(viewport_to_erp(erp_to_viewport(erp, v), v, erp.width(), erp.height()));
  }
  const Raster back = assemble_erp(parts);
  const double secs = seconds_since(t0);
  double mae = 0.0;
  for (std::size_t i = 0; i < erp.data().size(); ++i) mae += std::abs(back.data()[i] - erp.data()[i]);
  mae /= static_cast<double>(erp.data().size());
  c.expect(mae < 0.05, "MAE " + num(mae));
  c.expect(secs < 5.0, "runtime " + num(secs) + " s");
  return "1024x512 ERP, six 110-degree views: MAE " + num(mae) + ", " + num(secs) + " s";
}

std::string mos_oracle(Check& c) {
  const RatingMatrix m = oracle::bt500_fixture();
  const ScreeningResult r = reject_subjects(m);
  const auto votes = oracle::bt500_votes(m);
  for (std::size_t s = 0; s < m.subject_count(); ++s) {
    const bool expect = oracle::bt500_reject(votes[s]);
    c.expect(r.report.subjects[s].rejected == expect, "screening of " + m.subjects()[s]);
    c.expect(expect == (s == 19), "oracle verdict on " + m.subjects()[s]);
  }
  std::vector<std::size_t> keep;
  for (std::size_t s = 0; s < 19; ++s) keep.push_back(s);
  const MosTable t = compute_mos(r.retained);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.image_count(); ++i) {
    for (std::size_t d = 0; d < m.dimension_count(); ++d) {
      const double got = t.find(m.images()[i], m.dimensions()[d]).mos;
      worst = std::max(worst, std::abs(got - oracle::mos(m, keep, i, d)));
    }
  }
  c.expect(worst < 1e-9, "MOS deviation " + num(worst));
  c.expect(rescale(0.0) == 50.0, "rescale(0) != 50");
  return "adversary s19 rejected, MOS max deviation " + num(worst) + ", rescale(0) = 50";
}

PixelIndex argmax(const SaliencyMap& m) {
  const auto it = std::max_element(m.values.begin(), m.values.end());
  const int i = static_cast<int>(it - m.values.begin());
  return {i % m.width, i / m.width};
}

std::string saliency_ground_truth(Check& c) {
  const int w = 1024, h = 512;
  const FixationSet one{"img", {pixel_to_direction({512, 256}, w, h)}, {""}};
  const SaliencyMap m = fixations_to_map(one, w, h);
  double total = 0.0;
  for (double v : m.values) total += v;
  c.expect(std::abs(total - 1.0) < 1e-6, "mass " + num(total));
  c.expect(argmax(m) == PixelIndex{512, 256}, "argmax off the fixation pixel");

  BlurOptions blur;
  blur.sigma_deg = 2.0;
  auto row = [&](int y) {
    const SaliencyMap s = fixations_to_map({"r", {pixel_to_direction({300, y}, w, h)}, {""}}, w, h, blur);
    std::vector<double> r(w);
    for (int x = 0; x < w; ++x) r[x] = s.at(x, y);
    return r;
  };
  const double s_eq = oracle::fitted_sigma(row(255), 300);
  const double s_60 = oracle::fitted_sigma(row(85), 300);
  const double ratio = s_60 / s_eq;
  c.expect(std::abs(ratio - 2.0) < 0.2, "sigma ratio " + num(ratio));
  return "mass " + num(total) + ", sigma(60)/sigma(0) = " + num(ratio);
}

std::string stats_hand_cases(Check& c) {
  std::vector<double> uniform;
  for (int k = 0; k < 10; ++k) uniform.push_back(k + 0.5);
  const double u1 = coverage_uniformity(uniform, 10, 0.0, 10.0);
  const double u0 = coverage_uniformity({3.0, 3.1, 3.2}, 10, 0.0, 10.0);
  c.expect(u1 == 1.0, "uniform histogram gives " + num(u1));
  c.expect(u0 == 0.0, "single-bin histogram gives " + num(u0));
  const auto r = relative_range({{"A", Feature::kBrightness, {1, 3}}, {"B", Feature::kBrightness, {2, 4}}});
  c.expect(r.size() == 2 && r[0] == 0.5 && r[1] == 0.5, "relative range of {1,3},{2,4}");
  return "U = 1 and 0, R = 0.5 and 0.5";
}

// A random strictly increasing map (piecewise linear followed by exp).
std::function<double(double)> random_monotone(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::vector<double> slope(8);
  for (double& s : slope) s = u(g);
  const double shift = u(g) * 10.0 - 15.0;
  return [slope, shift](double x) {
    double y = 0.01 * (x + 4.0), at = -4.0;
    for (double s : slope) {
      y += s * std::clamp(x - at, 0.0, 1.0);
      at += 1.0;
    }
    return std::exp(0.3 * y) + shift;
  };
}

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

std::string metric_oracles(Check& c) {
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  auto track = [&](double a, double b, const char* name) {
    const double d = std::abs(a - b);
    worst = std::max(worst, d);
    if (d >= 1e-9) c.expect(false, std::string(name) + " differs by " + num(d));
  };
  int instances = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t n = 3 + g() % 8;
    std::vector<double> p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = trial % 2 ? static_cast<double>(g() % 4) : u(g);
      q[i] = u(g) + 1e-3;
    }
    if (is_constant(p) || is_constant(q)) continue;
    ++instances;
    track(srcc(p, q), oracle::spearman(p, q), "SRCC");
    track(krcc(p, q), oracle::kendall_b(p, q), "KRCC");
    track(plcc(p, q), oracle::pearson(p, q), "PLCC");

    std::vector<oracle::Rated> rated;
    std::vector<ScorePair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      const oracle::Rated r{p[i], 100.0 * q[i], 1.0 + 20.0 * u(g), 2 + static_cast<int>(g() % 20)};
      rated.push_back(r);
      pairs.push_back({r.pred, r.mos, r.sd, r.n});
    }
    std::size_t sig = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++total) sig += oracle::significant(rated[i], rated[j]);
    }
    if (sig > 0 && sig < total) {
      track(roc_different_similar(pairs), oracle::auc_different_similar(rated), "ROC different/similar");
    }
    if (sig > 0) track(roc_better_worse(pairs), oracle::auc_better_worse(rated), "ROC better/worse");

    const int wd = static_cast<int>(n);
    SaliencyMap pm(wd, 1), gm(wd, 1);
    pm.values = p;
    gm.values = q;
    std::vector<std::size_t> fix_idx;
    std::vector<PixelIndex> fix;
    for (std::size_t k = 0, m = 1 + g() % n; k < m; ++k) {
      const std::size_t i = g() % n;
      fix_idx.push_back(i);
      fix.push_back({static_cast<int>(i), 0});
    }
    track(auc_judd(pm, fix), oracle::auc_judd(p, fix_idx), "AUC-Judd");
    track(nss(pm, fix), oracle::nss(p, fix_idx), "NSS");
    track(cc(pm, gm), oracle::pearson(p, q), "CC");
    track(sim(pm, gm), oracle::similarity(p, q), "SIM");
    track(kld(pm, gm), oracle::kl_divergence(p, q), "KLD");
  }

  // Rank-based metrics under arbitrary increasing maps; the ROC AUCs, whose
  // statistics are score differences, under increasing affine maps.
  std::uniform_real_distribution<double> s(-2.0, 2.0), scale(0.01, 50.0);
  std::vector<double> pred(10), mos(10);
  std::vector<ScorePair> pairs;
  for (int i = 0; i < 10; ++i) {
    pred[i] = s(g);
    mos[i] = 100.0 * u(g);
    pairs.push_back({pred[i], mos[i], 1.0 + 20.0 * u(g), 2 + static_cast<int>(g() % 20)});
  }
  SaliencyMap map(5, 2);
  for (double& v : map.values) v = s(g);
  const std::vector<PixelIndex> fix = {{0, 0}, {3, 1}, {4, 0}};
  const double s0 = srcc(pred, mos), k0 = krcc(pred, mos), a0 = auc_judd(map, fix);
  const double d0 = roc_different_similar(pairs), b0 = roc_better_worse(pairs);
  double drift = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto f = random_monotone(g);
    std::vector<double> tp;
    for (double x : pred) tp.push_back(f(x));
    SaliencyMap tm = map;
    for (double& v : tm.values) v = f(v);
    drift = std::max({drift, std::abs(srcc(tp, mos) - s0), std::abs(krcc(tp, mos) - k0),
                      std::abs(auc_judd(tm, fix) - a0)});
    const double a = scale(g), b = 100.0 * s(g);
    auto ap = pairs;
    for (auto& x : ap) x.pred = a * x.pred + b;
    drift = std::max({drift, std::abs(roc_different_similar(ap) - d0),
                      std::abs(roc_better_worse(ap) - b0)});
  }
  c.expect(drift < 1e-12, "transform drift " + num(drift));
  return std::to_string(instances) + " instances, max deviation " + num(worst) +
         "; 100 increasing transforms (affine for the ROC AUCs), drift " + num(drift);
}

ViewportFeatures random_views(nn::Rng& rng, int q = 4, int d = 8) {
  ViewportFeatures v;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> x(q * d);
    for (double& e : x) e = rng.uniform(-1.0, 1.0);
    v.push_back(Tensor::from({q, d}, x));
  }
  return v;
}

Tensor random_tensor(nn::Shape shape, nn::Rng& rng) {
  std::vector<double> v(nn::shape_numel(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from(std::move(shape), std::move(v));
}

OiqaConfig small_oiqa(int seed) {
  OiqaConfig cfg;
  cfg.encoder.patch = 8;
  cfg.encoder.dim = 16;
  cfg.encoder.heads = 2;
  cfg.encoder.queries = 8;
  cfg.encoder.depth = 5;
  cfg.heads = 2;
  cfg.viewport_size = 32;
  cfg.seed = seed;
  return cfg;
}

OisalConfig small_oisal() {
  OisalConfig cfg;
  cfg.encoder.patch = 8;
  cfg.encoder.dim = 16;
  cfg.encoder.heads = 2;
  cfg.encoder.queries = 8;
  cfg.encoder.depth = 5;
  cfg.heads = 2;
  cfg.input_height = 32;
  cfg.widths = {16, 8, 4, 2};
  return cfg;
}

SaliencyMap blob_map(int w, int h, double lon, double lat) {
  BlurOptions bo;
  bo.sigma_deg = 20.0;
  return fixations_to_map({"x", {{lon, lat}}, {}}, w, h, bo);
}

std::string gradients(Check& c) {
  OiqaConfig qcfg;
  qcfg.heads = 2;
  nn::Rng rng(5);
  OiqaHead head(8, qcfg);
  const ViewportFeatures views = random_views(rng);
  const ScoreTriple label{{10, 90, 40}};
  const auto rq = nn::fd_check([&] { return loss_l1(head.forward(views), label); }, head.params());
  c.expect(rq.max_rel_error < 1e-4, "OIQA head error " + num(rq.max_rel_error) + " at " + rq.worst_param);

  OisalConfig scfg = small_oisal();
  scfg.encoder.dim = 4;
  scfg.widths = {4, 2, 2, 2};
  OisalDecoder dec(4, scfg);
  nn::EncodedFeatures f;
  f.fused = random_tensor({3, 4}, rng);
  for (auto& t : f.taps) t = random_tensor({4, 2, 4}, rng);
  const SaliencyMap gt = blob_map(32, 16, 60.0, -20.0);
  const auto rs = nn::fd_check([&] { return loss_sal(dec.forward(f, 16, 32), gt, 1.0, 1.0); },
                               dec.params());
  c.expect(rs.max_rel_error < 1e-4, "OISal decoder error " + num(rs.max_rel_error) + " at " + rs.worst_param);

  // Backpropagate from the head through live encoder outputs.
  const OiqaModel model(small_oiqa(3));
  OiqaHead live(16, small_oiqa(3));
  const Tensor loss = loss_l1(live.forward(model.encode_viewports(test::smooth_erp(32, 4), "p")), label);
  loss.backward();
  double enc = 0.0, hd = 0.0;
  for (const auto& p : model.encoder().params()) {
    for (double v : p.tensor.grad()) enc += std::abs(v);
  }
  for (const auto& p : live.params()) {
    for (double v : p.tensor.grad()) hd += std::abs(v);
  }
  c.expect(enc == 0.0, "encoder gradient mass " + num(enc));
  c.expect(hd > 0.0, "head received no gradient");
  return "OIQA head " + num(rq.max_rel_error) + ", OISal decoder " + num(rs.max_rel_error) +
         ", encoder gradient " + num(enc);
}

std::string architecture(Check& c) {
  OiqaConfig cfg;
  cfg.heads = 2;
  nn::Rng rng(1);
  OiqaHead head(8, cfg);
  const ViewportFeatures views = random_views(rng);
  const auto base = head.aggregate(views);
  std::array<int, 6> perm{0, 1, 2, 3, 4, 5};
  double worst = 0.0;
  int count = 0;
  do {
    ViewportFeatures p;
    for (int i : perm) p.push_back(views[i]);
    const auto r = head.aggregate(p);
    for (int k = 0; k < 3; ++k) {
      for (std::size_t d = 0; d < base[k].data().size(); ++d) {
        worst = std::max(worst, std::abs(r[k].data()[d] - base[k].data()[d]));
      }
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  c.expect(count == 720 && worst < 1e-6, "permutation deviation " + num(worst));
  const std::size_t pairs = viewport_pairs(PairMode::kOrdered).size();
  c.expect(pairs == 30, "ordered pairs " + std::to_string(pairs));

  OisalConfig scfg = small_oisal();
  scfg.seed = 2;
  const OisalModel model(scfg);
  const Raster erp = test::smooth_erp(48, 5);
  auto features = model.encode(erp, "x");
  double lo = 1.0, hi = 0.0;
  for (double v : model.predict(erp, "a castle").values) lo = std::min(lo, v), hi = std::max(hi, v);
  for (auto& t : features.taps) t = nn::scale(t, 1e3);
  for (double v : model.predict(features, 64, 32).values) lo = std::min(lo, v), hi = std::max(hi, v);
  c.expect(lo >= 0.0 && hi <= 1.0, "OISal output in [" + num(lo) + ", " + num(hi) + "]");

  const SaliencyMap gt = blob_map(32, 16, 40.0, 10.0);
  std::vector<double> v(gt.size());
  for (double& x : v) x = rng.uniform(0.05, 1.0);
  const Tensor pred = Tensor::from({1, 16, 32}, v);
  double gap = 0.0;
  for (auto [alpha, beta] : {std::pair{1.0, 1.0}, {1.0, 0.0}, {0.3, 2.0}}) {
    const double expect = alpha * (1.0 - oracle::pearson(v, gt.values)) +
                          beta * oracle::kl_divergence(v, gt.values);
    gap = std::max(gap, std::abs(loss_sal(pred, gt, alpha, beta).item() - expect));
  }
  c.expect(gap < 1e-6, "loss_sal gap " + num(gap));
  return "720 permutations within " + num(worst) + ", N = " + std::to_string(pairs) +
         ", OISal range [" + num(lo) + ", " + num(hi) + "], loss_sal gap " + num(gap);
}

std::string overfit(Check& c) {
  const auto t0 = Clock::now();
  OiqaModel qmodel(small_oiqa(1));
  std::vector<OiqaSample> qdata;
  for (int i = 0; i < 8; ++i) {
    const ScoreTriple lab{{20.0 + 8 * i, 80.0 - 6 * i, 35.0 + ((i * 37) % 40)}};
    qdata.push_back({qmodel.encode_viewports(test::smooth_erp(64, 100 + i), "prompt " + std::to_string(i % 3)), lab});
  }
  auto mean_l1 = [&] {
    double s = 0.0;
    for (const auto& d : qdata) s += loss_l1(qmodel.head().predict(d.views), d.label);
    return s / static_cast<double>(qdata.size());
  };
  const double before = mean_l1();
  nn::TrainOptions qopts;
  qopts.steps = 500;
  qopts.lr = 3e-2;
  fit(qmodel.head(), qdata, qopts);
  const double after = mean_l1();
  const double ratio = after / before;
  c.expect(ratio < 0.1, "OIQA L1 ratio " + num(ratio));

  OisalConfig scfg = small_oisal();
  OisalModel smodel(scfg);
  nn::Rng rng(5);
  const int h = 32, w = 64;
  std::vector<OisalSample> sdata;
  for (int i = 0; i < 8; ++i) {
    const double lon = rng.uniform(-150, 150), lat = rng.uniform(-50, 50);
    const SaliencyMap gt = blob_map(w, h, lon, lat);
    const SaliencyMap peak = to_peak_normalized(gt);
    Raster img(w, h, 3, 0.3f);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          img.at(x, y, ch) = 0.3f + 0.6f * static_cast<float>(peak.at(x, y)) * (ch == 0 ? 1.0f : 0.5f);
        }
      }
    }
    sdata.push_back({smodel.encode(img, "p"), gt});
  }
  nn::TrainOptions sopts;
  sopts.steps = 500;
  sopts.lr = 1e-2;
  fit(smodel.decoder(), sdata, scfg, sopts);
  double mcc = 0.0;
  for (const auto& d : sdata) mcc += cc(smodel.predict(d.features, w, h), d.gt);
  mcc /= static_cast<double>(sdata.size());
  c.expect(mcc > 0.8, "OISal CC " + num(mcc));
  const double secs = seconds_since(t0);
  c.expect(secs < 300.0, "runtime " + num(secs) + " s");
  return "OIQA L1 " + num(before) + " -> " + num(after) + " (ratio " + num(ratio) + "), OISal CC " +
         num(mcc) + ", " + num(secs) + " s";
}

class ConstantScorer : public Scorer {
 public:
  ScoreTriple score(const Raster&, const std::string&) override { return ScoreTriple{{30, 30, 30}}; }
};

class LumaSaliency : public SaliencyPredictor {
 public:
  SaliencyMap predict(const Raster& img, const std::string&) override {
    return from_raster(to_gray(img));
  }
};

std::string masks_and_loop(Check& c) {
  MaskConfig cfg;
  cfg.viewports = eight_viewport_set(90.0, 96);
  SaliencyMap flat(64, 32, 0.5, Normalization::kPeak);
  flat.at(0, 0) = 1.0;
  cfg.x0 = 0.5;
  for (const Raster& m : make_masks(flat, cfg)) c.expect(mask_area_fraction(m) == 0.0, "S == x0 masked");

  const Raster erp = test::smooth_erp(128, 9);
  const SaliencyMap sal = from_raster(to_gray(erp));
  std::vector<std::vector<Raster>> by_x0;
  for (double x0 : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    cfg.x0 = x0;
    by_x0.push_back(make_masks(sal, cfg));
  }
  bool monotone = true;
  for (std::size_t k = 1; k < by_x0.size(); ++k) {
    for (std::size_t v = 0; v < by_x0[k].size(); ++v) {
      const auto hi = by_x0[k][v].data(), lo = by_x0[k - 1][v].data();
      for (std::size_t i = 0; i < hi.size(); ++i) monotone &= hi[i] <= lo[i];
    }
  }
  c.expect(monotone, "mask grows with x0");

  test::TempDir tmp;
  cfg.x0 = 0.0;
  std::vector<Raster> views;
  for (const auto& v : cfg.viewports) views.push_back(erp_to_viewport(erp, v));
  const auto masks = make_masks(sal, cfg);
  const auto refined = run_inpaint({tmp.path() / "job", views, masks, "p"}, client("identity"));
  const Raster out = reassemble(erp, refined, masks, cfg.viewports);
  double worst = 0.0;
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    worst = std::max(worst, static_cast<double>(std::abs(out.data()[i] - erp.data()[i])));
  }
  c.expect(worst < 0.02, "identity client error " + num(worst));

  ConstantScorer scorer;
  LumaSaliency predictor;
  OptimizeConfig ocfg;
  ocfg.mask = cfg;
  ocfg.mask.x0 = 0.5;
  ocfg.max_iters = 3;
  ocfg.client_command = client("identity");
  ocfg.work_dir = tmp.path();
  const OptimizeResult r = optimize(test::smooth_erp(32, 2), "p", scorer, predictor, ocfg);
  c.expect(r.report.max_iters_reached && r.report.iterations.size() == 3, "loop did not stop at max_iters");
  return "strict threshold, monotone in x0, identity error " + num(worst) + ", loop stopped after " +
         std::to_string(r.report.iterations.size()) + " iterations";
}

std::string cli_determinism(Check& c) {
  test::TempDir tmp;
  const fs::path in = tmp.path() / "in";
  test::write_inputs(in);
  std::vector<std::vector<std::pair<std::string, std::string>>> snaps;
  std::vector<std::vector<std::string>> stdouts;
  std::size_t commands = 0;
  for (const char* name : {"a", "b"}) {
    const fs::path out = tmp.path() / name;
    fs::create_directories(out);
    std::vector<std::string> outs;
    const auto runs = test::invocations(in, out, client("identity"));
    commands = runs.size();
    for (const auto& [label, args] : runs) {
      const auto r = test::run(args);
      c.expect(r.code == 0, label + " exited " + std::to_string(r.code) + ": " + r.err);
      std::string text = r.out;
      for (std::size_t p; (p = text.find(out.string())) != std::string::npos;) {
        text.replace(p, out.string().size(), "OUT");
      }
      outs.push_back(text);
    }
    snaps.push_back(test::snapshot(out));
    stdouts.push_back(outs);
  }
  c.expect(snaps[0] == snaps[1], "output files differ between runs");
  c.expect(stdouts[0] == stdouts[1], "stdout differs between runs");

  const std::string i = in.string() + "/", o = (tmp.path() / "c").string() + "/";
  c.expect(test::run({"frobnicate"}).code == kExitUsage, "unknown subcommand");
  c.expect(test::run({"mos"}).code == kExitUsage, "missing required option");
  c.expect(test::run({"mos", "--ratings", i + "absent.csv"}).code == kExitData, "missing ratings file");
  c.expect(test::run({"metrics-sal", "--pred", i + "gt0.oqfm", "--gt", i + "small.oqfm"}).code == kExitData,
           "shape mismatch");
  for (const std::string mode : {"fail", "wrongsize"}) {
    const auto args = test::concat(
        {"optimize", "--image", i + "erp0.png", "--client", client(mode), "--threshold", "99",
         "--view-size", "16", "--viewport-size", "32", "--input-height", "32", "--out", o + "r.png",
         "--work-dir", tmp.path().string()},
        test::tiny_encoder());
    c.expect(test::run(args).code == kExitClient, "client mode " + mode);
  }
  return std::to_string(commands) + " invocations byte-identical across two runs (" +
         std::to_string(snaps[0].size()) + " files), exit codes 0/1/2/3 as planted";
}

}  // namespace
}  // namespace omniqa

int main() {
  using omniqa::Check;
  const std::vector<std::pair<const char*, std::function<std::string(Check&)>>> criteria = {
      {"geometry round trip", omniqa::geometry_round_trip},
      {"MOS oracle", omniqa::mos_oracle},
      {"saliency ground truth", omniqa::saliency_ground_truth},
      {"dataset statistics", omniqa::stats_hand_cases},
      {"metric oracles", omniqa::metric_oracles},
      {"gradient correctness", omniqa::gradients},
      {"architecture invariants", omniqa::architecture},
      {"overfit sanity", omniqa::overfit},
      {"mask and refinement semantics", omniqa::masks_and_loop},
      {"CLI determinism and exit codes", omniqa::cli_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    std::string detail;
    try {
      detail = criteria[k].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s criterion %zu: %s", ok ? "PASS" : "FAIL", k + 1, criteria[k].first);
    if (!detail.empty()) std::printf(" (%s)", detail.c_str());
    std::printf("\n");
    for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
