// Copyright 2026 The rmkit Authors
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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rmkit {

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    /// "mean", "jackknife", "median_of_means(B)", "delta" ...
    std::string method;
    /// Set when the value is unusable as-is (e.g. a nonpositive purity under a log).
    bool flagged = false;
    std::string flag_reason;
};

enum class Aggregation { kMean, kMedianOfMeans };

struct AggregateOptions {
    Aggregation kind = Aggregation::kMean;
    /// Batch count for median of means.
    std::size_t batches = 1;
};

/// B = ceil(2 ln(1/delta)).
std::size_t median_of_means_batches(double delta);

/// Sample mean and standard error of the mean (pairwise summation).
EstimateWithError mean_estimate(std::span<const double> values);

/// Median of B contiguous batch means. The error is sqrt(pi/2) times the
/// standard error of the batch means (large-sample efficiency of the median).
/// B = 1 reproduces mean_estimate.
EstimateWithError median_of_means(std::span<const double> values, std::size_t batches);

EstimateWithError aggregate(std::span<const double> values, const AggregateOptions &options);

/// A full-sample statistic with its leave-one-out (or leave-one-group-out) replicates.
struct JackknifeSample {
    double value = 0.0;
    std::vector<double> replicates;
};

/// sqrt((G-1)/G * sum (r_g - mean r)^2).
double jackknife_error(std::span<const double> replicates);
EstimateWithError from_jackknife(const JackknifeSample &sample, std::size_t n_samples);

/// Applies f to the value and to every replicate.
template <typename F>
JackknifeSample transform(const JackknifeSample &a, F f) {
    JackknifeSample out{f(a.value), {}};
    out.replicates.reserve(a.replicates.size());
    for (double r : a.replicates) out.replicates.push_back(f(r));
    return out;
}

/// Combines replicates position-wise; all inputs must share the replicate count.
template <typename F>
JackknifeSample combine(const std::vector<const JackknifeSample *> &parts, F f) {
    std::vector<double> args(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) args[i] = parts[i]->value;
    JackknifeSample out{f(args), {}};
    const std::size_t g = parts.front()->replicates.size();
    out.replicates.resize(g);
    for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t i = 0; i < parts.size(); ++i) args[i] = parts[i]->replicates[r];
        out.replicates[r] = f(args);
    }
    return out;
}

}  // namespace rmkit
