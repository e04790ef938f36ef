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

#include "omniqa/subjective.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "omniqa/error.h"

namespace omniqa {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::size_t find_or_add(std::vector<std::string>& ids,
                        std::map<std::string, std::size_t>& lookup,
                        const std::string& id) {
  auto [it, inserted] = lookup.emplace(id, ids.size());
  if (inserted) ids.push_back(id);
  return it->second;
}

}  // namespace

RatingMatrix::RatingMatrix(std::vector<std::string> subjects,
                           std::vector<std::string> images,
                           std::vector<std::string> dimensions)
    : subjects_(std::move(subjects)),
      images_(std::move(images)),
      dimensions_(std::move(dimensions)),
      scores_(subjects_.size() * images_.size() * dimensions_.size(),
              kMissing) {}

bool RatingMatrix::has(std::size_t s, std::size_t i, std::size_t d) const {
  return !std::isnan(scores_[index(s, i, d)]);
}

void RatingMatrix::clear(std::size_t s, std::size_t i, std::size_t d) {
  scores_[index(s, i, d)] = kMissing;
}

RatingMatrix RatingMatrix::select_subjects(
    const std::vector<std::size_t>& keep) const {
  std::vector<std::string> ids;
  for (std::size_t s : keep) ids.push_back(subjects_.at(s));
  RatingMatrix out(std::move(ids), images_, dimensions_);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    for (std::size_t i = 0; i < images_.size(); ++i) {
      for (std::size_t d = 0; d < dimensions_.size(); ++d) {
        out.set(k, i, d, at(keep[k], i, d));
      }
    }
  }
  return out;
}

void RatingMatrix::check_scale(int lo, int hi) const {
  for (std::size_t s = 0; s < subjects_.size(); ++s) {
    for (std::size_t i = 0; i < images_.size(); ++i) {
      for (std::size_t d = 0; d < dimensions_.size(); ++d) {
        if (!has(s, i, d)) continue;
        const double v = at(s, i, d);
        if (v != std::floor(v) || v < lo || v > hi) {
          throw RangeError("rating " + format_double(v) + " by subject '" +
                           subjects_[s] + "' for image '" + images_[i] +
                           "' is outside the integer scale [" +
                           std::to_string(lo) + "," + std::to_string(hi) + "]");
        }
      }
    }
  }
}

RatingMatrix RatingMatrix::from_csv(const CsvTable& table) {
  const std::size_t cs = table.column("subject_id");
  const std::size_t ci = table.column("image_id");
  const std::size_t cd = table.column("dimension");
  const std::size_t cv = table.column("score");
  std::vector<std::string> subjects, images, dims;
  std::map<std::string, std::size_t> ls, li, ld;
  struct Entry {
    std::size_t s, i, d;
    double v;
  };
  std::vector<Entry> entries;
  for (const auto& row : table.rows()) {
    Entry e{find_or_add(subjects, ls, row[cs]), find_or_add(images, li, row[ci]),
            find_or_add(dims, ld, row[cd]), kMissing};
    if (!row[cv].empty()) e.v = parse_double(row[cv], "score");
    entries.push_back(e);
  }
  RatingMatrix m(std::move(subjects), std::move(images), std::move(dims));
  for (const auto& e : entries) {
    if (m.has(e.s, e.i, e.d)) {
      throw FormatError("duplicate rating for subject '" + m.subjects_[e.s] +
                        "', image '" + m.images_[e.i] + "', dimension '" +
                        m.dimensions_[e.d] + "'");
    }
    m.set(e.s, e.i, e.d, e.v);
  }
  m.check_scale();
  return m;
}

bool operator==(const RatingMatrix& a, const RatingMatrix& b) {
  if (a.subjects_ != b.subjects_ || a.images_ != b.images_ ||
      a.dimensions_ != b.dimensions_) {
    return false;
  }
  for (std::size_t k = 0; k < a.scores_.size(); ++k) {
    const double x = a.scores_[k];
    const double y = b.scores_[k];
    if (std::isnan(x) != std::isnan(y)) return false;
    if (!std::isnan(x) && x != y) return false;
  }
  return true;
}

std::size_t RejectionReport::rejected_count() const {
  return static_cast<std::size_t>(std::count_if(
      subjects.begin(), subjects.end(),
      [](const SubjectScreening& s) { return s.rejected; }));
}

CsvTable RejectionReport::to_csv() const {
  CsvTable t({"subject_id", "P", "Q", "rated", "rejected", "pass"});
  for (const auto& s : subjects) {
    t.add_row({s.subject, std::to_string(s.above), std::to_string(s.below),
               std::to_string(s.rated), s.rejected ? "1" : "0",
               std::to_string(s.pass)});
  }
  return t;
}

namespace {

struct PassOutcome {
  std::vector<SubjectScreening> screening;  // parallel to matrix subjects
  std::size_t outliers = 0;
  std::size_t total = 0;
};

PassOutcome screen_once(const RatingMatrix& m) {
  PassOutcome out;
  out.screening.resize(m.subject_count());
  for (std::size_t s = 0; s < m.subject_count(); ++s) {
    out.screening[s].subject = m.subjects()[s];
  }
  std::vector<double> cell;
  for (std::size_t i = 0; i < m.image_count(); ++i) {
    for (std::size_t d = 0; d < m.dimension_count(); ++d) {
      cell.clear();
      for (std::size_t s = 0; s < m.subject_count(); ++s) {
        if (m.has(s, i, d)) {
          cell.push_back(m.at(s, i, d));
          ++out.screening[s].rated;
          ++out.total;
        }
      }
      const double n = static_cast<double>(cell.size());
      if (cell.size() < 2) continue;
      const double mean = std::accumulate(cell.begin(), cell.end(), 0.0) / n;
      double m2 = 0.0, m4 = 0.0;
      for (double v : cell) {
        const double dv = (v - mean) * (v - mean);
        m2 += dv;
        m4 += dv * dv;
      }
      if (m2 == 0.0) continue;
      const double sd = std::sqrt(m2 / (n - 1.0));
      m2 /= n;
      m4 /= n;
      const double kurtosis = m4 / (m2 * m2);
      const double k = (kurtosis >= 2.0 && kurtosis <= 4.0) ? 2.0
                                                            : std::sqrt(20.0);
      const double hi = mean + k * sd;
      const double lo = mean - k * sd;
      for (std::size_t s = 0; s < m.subject_count(); ++s) {
        if (!m.has(s, i, d)) continue;
        const double v = m.at(s, i, d);
        if (v >= hi) {
          ++out.screening[s].above;
          ++out.outliers;
        } else if (v <= lo) {
          ++out.screening[s].below;
          ++out.outliers;
        }
      }
    }
  }
  for (auto& sc : out.screening) {
    const int pq = sc.above + sc.below;
    if (pq == 0 || sc.rated == 0) continue;
    const double ratio = static_cast<double>(pq) / sc.rated;
    const double balance =
        std::abs(static_cast<double>(sc.above - sc.below)) / pq;
    sc.rejected = ratio > 0.05 && balance < 0.3;
  }
  return out;
}

}  // namespace

ScreeningResult reject_subjects(const RatingMatrix& ratings) {
  if (ratings.subject_count() < 3) {
    throw InsufficientDataError("subject screening needs at least 3 subjects, got " +
                                std::to_string(ratings.subject_count()));
  }
  ScreeningResult result;
  std::vector<std::size_t> alive(ratings.subject_count());
  std::iota(alive.begin(), alive.end(), 0);
  std::vector<SubjectScreening> decided(ratings.subject_count());
  RatingMatrix current = ratings;
  int pass = 0;
  while (true) {
    ++pass;
    PassOutcome outcome = screen_once(current);
    if (pass == 1) {
      result.report.outlier_ratings = outcome.outliers;
      result.report.total_ratings = outcome.total;
    }
    std::vector<std::size_t> keep;
    std::vector<std::size_t> next_alive;
    for (std::size_t k = 0; k < alive.size(); ++k) {
      outcome.screening[k].pass = pass;
      decided[alive[k]] = outcome.screening[k];
      if (!outcome.screening[k].rejected) {
        keep.push_back(k);
        next_alive.push_back(alive[k]);
      }
    }
    const bool changed = keep.size() != alive.size();
    // Never screen below three subjects; the statistics are meaningless there.
    if (!changed || keep.size() < 3) {
      if (changed) {
        for (std::size_t k = 0; k < alive.size(); ++k) {
          decided[alive[k]].rejected = false;
        }
        keep.resize(alive.size());
        std::iota(keep.begin(), keep.end(), 0);
        next_alive = alive;
      }
      result.retained = current.select_subjects(keep);
      alive = next_alive;
      break;
    }
    current = current.select_subjects(keep);
    alive = next_alive;
  }
  result.report.passes = pass;
  result.report.subjects = std::move(decided);
  return result;
}

ZScores zscore(const RatingMatrix& ratings, const ZScoreOptions& opts) {
  std::vector<std::size_t> keep;
  std::vector<std::string> dropped;
  for (std::size_t s = 0; s < ratings.subject_count(); ++s) {
    bool degenerate = false;
    for (std::size_t d = 0; d < ratings.dimension_count() && !degenerate; ++d) {
      double sum = 0.0, sq = 0.0;
      int n = 0;
      for (std::size_t i = 0; i < ratings.image_count(); ++i) {
        if (!ratings.has(s, i, d)) continue;
        sum += ratings.at(s, i, d);
        ++n;
      }
      if (n == 0) continue;
      const double mean = sum / n;
      for (std::size_t i = 0; i < ratings.image_count(); ++i) {
        if (!ratings.has(s, i, d)) continue;
        sq += (ratings.at(s, i, d) - mean) * (ratings.at(s, i, d) - mean);
      }
      if (n < 2 || sq == 0.0) degenerate = true;
    }
    if (!degenerate) {
      keep.push_back(s);
    } else if (opts.drop_degenerate_subjects) {
      dropped.push_back(ratings.subjects()[s]);
    } else {
      throw DegenerateError("subject '" + ratings.subjects()[s] +
                            "' has zero rating spread in some dimension; "
                            "z-scores are undefined");
    }
  }
  RatingMatrix base = ratings.select_subjects(keep);
  RatingMatrix z = base;
  for (std::size_t s = 0; s < base.subject_count(); ++s) {
    for (std::size_t d = 0; d < base.dimension_count(); ++d) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t i = 0; i < base.image_count(); ++i) {
        if (base.has(s, i, d)) {
          sum += base.at(s, i, d);
          ++n;
        }
      }
      if (n == 0) continue;
      const double mean = sum / n;
      double sq = 0.0;
      for (std::size_t i = 0; i < base.image_count(); ++i) {
        if (base.has(s, i, d)) {
          sq += (base.at(s, i, d) - mean) * (base.at(s, i, d) - mean);
        }
      }
      const double sd = std::sqrt(sq / (n - 1));
      for (std::size_t i = 0; i < base.image_count(); ++i) {
        if (base.has(s, i, d)) z.set(s, i, d, (base.at(s, i, d) - mean) / sd);
      }
    }
  }
  return {std::move(z), std::move(dropped)};
}

double rescale(double z) { return std::clamp(100.0 * (z + 3.0) / 6.0, 0.0, 100.0); }

const MosEntry& MosTable::find(const std::string& image,
                               const std::string& dimension) const {
  for (const auto& e : entries) {
    if (e.image == image && e.dimension == dimension) return e;
  }
  throw DataError("no MOS for image '" + image + "', dimension '" + dimension +
                  "'");
}

CsvTable MosTable::to_csv() const {
  CsvTable t({"image_id", "dimension", "mos", "stddev", "n"});
  for (const auto& e : entries) {
    t.add_row({e.image, e.dimension, format_double(e.mos),
               format_double(e.stddev), std::to_string(e.n)});
  }
  return t;
}

MosTable MosTable::from_csv(const CsvTable& table) {
  const std::size_t ci = table.column("image_id");
  const std::size_t cd = table.column("dimension");
  const std::size_t cm = table.column("mos");
  const std::size_t cs = table.column("stddev");
  const std::size_t cn = table.column("n");
  MosTable out;
  for (const auto& row : table.rows()) {
    out.entries.push_back({row[ci], row[cd], parse_double(row[cm], "mos"),
                           parse_double(row[cs], "stddev"),
                           static_cast<int>(parse_int(row[cn], "n"))});
  }
  return out;
}

MosTable compute_mos(const RatingMatrix& ratings, const ZScoreOptions& opts) {
  const ZScores z = zscore(ratings, opts);
  const RatingMatrix& zv = z.values;
  MosTable table;
  for (std::size_t i = 0; i < zv.image_count(); ++i) {
    for (std::size_t d = 0; d < zv.dimension_count(); ++d) {
      std::vector<double> scaled;
      for (std::size_t s = 0; s < zv.subject_count(); ++s) {
        if (zv.has(s, i, d)) scaled.push_back(rescale(zv.at(s, i, d)));
      }
      if (scaled.size() < 2) {
        throw InsufficientDataError(
            "image '" + zv.images()[i] + "', dimension '" +
            zv.dimensions()[d] + "' has " + std::to_string(scaled.size()) +
            " rating(s); MOS needs at least 2");
      }
      // Sorted summation keeps the result independent of subject order.
      std::sort(scaled.begin(), scaled.end());
      const double n = static_cast<double>(scaled.size());
      const double mean = std::accumulate(scaled.begin(), scaled.end(), 0.0) / n;
      double sq = 0.0;
      for (double v : scaled) sq += (v - mean) * (v - mean);
      table.entries.push_back({zv.images()[i], zv.dimensions()[d], mean,
                               std::sqrt(sq / (n - 1.0)),
                               static_cast<int>(scaled.size())});
    }
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const MosEntry& a, const MosEntry& b) {
              return std::tie(a.image, a.dimension) <
                     std::tie(b.image, b.dimension);
            });
  return table;
}

}  // namespace omniqa
