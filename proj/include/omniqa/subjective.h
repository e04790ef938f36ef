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

#ifndef OMNIQA_SUBJECTIVE_H_
#define OMNIQA_SUBJECTIVE_H_

#include <cstddef>
#include <string>
#include <vector>

#include "omniqa/csv.h"

namespace omniqa {

// Raw ratings indexed by (subject, image, dimension). Missing ratings are NaN.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::vector<std::string> subjects,
               std::vector<std::string> images,
               std::vector<std::string> dimensions);

  const std::vector<std::string>& subjects() const { return subjects_; }
  const std::vector<std::string>& images() const { return images_; }
  const std::vector<std::string>& dimensions() const { return dimensions_; }
  std::size_t subject_count() const { return subjects_.size(); }
  std::size_t image_count() const { return images_.size(); }
  std::size_t dimension_count() const { return dimensions_.size(); }

  bool has(std::size_t s, std::size_t i, std::size_t d) const;
  double at(std::size_t s, std::size_t i, std::size_t d) const {
    return scores_[index(s, i, d)];
  }
  void set(std::size_t s, std::size_t i, std::size_t d, double score) {
    scores_[index(s, i, d)] = score;
  }
  void clear(std::size_t s, std::size_t i, std::size_t d);

  // Copy restricted to the listed subject indices, in the given order.
  RatingMatrix select_subjects(const std::vector<std::size_t>& keep) const;

  // Throws RangeError unless every present score is an integer in
  // [lo, hi].
  void check_scale(int lo = 1, int hi = 10) const;

  // Columns subject_id, image_id, dimension, score. Ids keep first-seen order.
  static RatingMatrix from_csv(const CsvTable& table);

  friend bool operator==(const RatingMatrix& a, const RatingMatrix& b);

 private:
  std::size_t index(std::size_t s, std::size_t i, std::size_t d) const {
    return (s * images_.size() + i) * dimensions_.size() + d;
  }

  std::vector<std::string> subjects_;
  std::vector<std::string> images_;
  std::vector<std::string> dimensions_;
  std::vector<double> scores_;
};

struct SubjectScreening {
  std::string subject;
  int above = 0;  // P: ratings at or above the upper bound
  int below = 0;  // Q: ratings at or below the lower bound
  int rated = 0;
  bool rejected = false;
  int pass = 0;  // screening pass in which the decision was taken
};

struct RejectionReport {
  std::vector<SubjectScreening> subjects;
  int passes = 0;
  // Outlier ratings in the first pass over the raw matrix, across all
  // subjects, and the total number of ratings screened.
  std::size_t outlier_ratings = 0;
  std::size_t total_ratings = 0;

  double outlier_rating_ratio() const {
    return total_ratings == 0
               ? 0.0
               : static_cast<double>(outlier_ratings) / total_ratings;
  }
  std::size_t rejected_count() const;
  CsvTable to_csv() const;
};

struct ScreeningResult {
  RatingMatrix retained;
  RejectionReport report;
};

// ITU-R BT.500-13 subject screening. Every (image, dimension) cell is one
// presentation. Screening repeats on the retained subjects until no further
// subject is rejected, which makes the operation idempotent.
ScreeningResult reject_subjects(const RatingMatrix& ratings);

struct ZScoreOptions {
  // Drop subjects whose ratings in some dimension have zero spread instead of
  // raising DegenerateError.
  bool drop_degenerate_subjects = false;
};

// z-scores laid out like the source matrix; NaN where the rating is missing.
struct ZScores {
  RatingMatrix values;
  std::vector<std::string> dropped_subjects;
};

// Per subject and dimension: z = (m - mean) / sd, sd with n-1 denominator.
ZScores zscore(const RatingMatrix& ratings, const ZScoreOptions& opts = {});

// Maps z in [-3, 3] linearly onto [0, 100] and clamps.
double rescale(double z);

struct MosEntry {
  std::string image;
  std::string dimension;
  double mos = 0.0;
  double stddev = 0.0;
  int n = 0;
};

struct MosTable {
  std::vector<MosEntry> entries;  // sorted by (image, dimension)

  const MosEntry& find(const std::string& image,
                       const std::string& dimension) const;
  CsvTable to_csv() const;
  static MosTable from_csv(const CsvTable& table);
};

// Mean of rescaled z-scores per (image, dimension) over the subjects present.
// Throws InsufficientDataError when a cell has fewer than two ratings.
MosTable compute_mos(const RatingMatrix& ratings,
                     const ZScoreOptions& opts = {});

}  // namespace omniqa

#endif  // OMNIQA_SUBJECTIVE_H_
