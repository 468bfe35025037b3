// Copyright 2026 The evobranch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVOBRANCH_FEATURES_HPP_
#define EVOBRANCH_FEATURES_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evobranch/bnb.hpp"
#include "evobranch/milp.hpp"

namespace evobranch {

inline constexpr int kNumFeatures = 91;
inline constexpr double kFeatureEps = 1e-8;
inline constexpr double kActiveSlack = 1e-7;

// count, sum, mean, population std, min, max. All zero for an empty set.
struct Stats {
  double count = 0.0;
  double sum = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Stats summarize(std::span<const double> values);

// Instance-only data, computed once per solve.
struct StaticFeatureCache {
  struct Entry {
    int row;
    double coef;
  };
  std::vector<std::vector<Entry>> columns;  // per variable, ascending rows
  std::vector<double> row_nnz;
  std::vector<double> row_abs_sum;
  std::vector<double> row_pos_sum;
  std::vector<double> row_neg_abs_sum;
  std::vector<double> rhs;
  std::vector<double> column_norm;  // Euclidean norm of each column

  // Per variable: features 19-36 as laid out in the table.
  std::vector<std::vector<double>> per_var;
};

StaticFeatureCache precompute_static(const MilpInstance& instance);

// Row-major |C| x 91.
struct FeatureMatrix {
  int rows = 0;
  std::vector<double> values;
  std::vector<int> candidates;
  bool normalized = false;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * kNumFeatures + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * kNumFeatures + c]; }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * kNumFeatures, kNumFeatures};
  }
};

// Raw features for every candidate. Requires an optimal node LP.
FeatureMatrix extract_features(const NodeContext& ctx, const StaticFeatureCache& cache,
                               std::span<const int> candidates);

// Per-column min-max scaling into [0, 1]; columns with range <= 1e-12 become 0.
FeatureMatrix normalize_per_node(const FeatureMatrix& m);

struct FeatureDoc {
  int index;
  std::string group;
  std::string name;
  std::string formula;
};
const std::vector<FeatureDoc>& feature_docs();
// Markdown-ish table, one line per feature.
std::string format_feature_table();

}  // namespace evobranch

#endif  // EVOBRANCH_FEATURES_HPP_
