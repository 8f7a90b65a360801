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

#include "rmkit/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "rmkit/error.hpp"
#include "rmkit/parallel.hpp"

namespace rmkit {

std::size_t median_of_means_batches(double delta) {
    require(delta > 0 && delta < 1, "median_of_means_batches: delta must lie in (0, 1)");
    return static_cast<std::size_t>(std::ceil(2 * std::log(1 / delta)));
}

EstimateWithError mean_estimate(std::span<const double> values) {
    EstimateWithError e;
    e.method = "mean";
    e.n_samples = values.size();
    if (values.empty()) fail(ErrorKind::kNoData, "mean of an empty sample");
    const double n = static_cast<double>(values.size());
    e.value = pairwise_sum(values) / n;
    if (values.size() > 1) {
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - e.value) * (values[i] - e.value);
        e.std_error = std::sqrt(pairwise_sum(sq) / (n - 1) / n);
    }
    return e;
}

EstimateWithError median_of_means(std::span<const double> values, std::size_t batches) {
    if (values.empty()) fail(ErrorKind::kNoData, "median of means of an empty sample");
    require(batches >= 1, "median_of_means: need at least one batch");
    if (batches == 1) return mean_estimate(values);
    require(batches <= values.size(), "median_of_means: more batches than samples");
    std::vector<double> means(batches);
    const std::size_t n = values.size();
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches, hi = (b + 1) * n / batches;
        means[b] = pairwise_sum(values.subspan(lo, hi - lo)) / static_cast<double>(hi - lo);
    }
    std::vector<double> sorted = means;
    std::sort(sorted.begin(), sorted.end());
    double median = batches % 2 ? sorted[batches / 2] : 0.5 * (sorted[batches / 2 - 1] + sorted[batches / 2]);
    EstimateWithError spread = mean_estimate(means);
    EstimateWithError e;
    e.value = median;
    e.std_error = std::sqrt(M_PI / 2) * spread.std_error;
    e.n_samples = n;
    e.method = "median_of_means(" + std::to_string(batches) + ")";
    return e;
}

EstimateWithError aggregate(std::span<const double> values, const AggregateOptions &options) {
    if (options.kind == Aggregation::kMedianOfMeans) return median_of_means(values, options.batches);
    return mean_estimate(values);
}

double jackknife_error(std::span<const double> replicates) {
    const std::size_t g = replicates.size();
    if (g < 2) return 0.0;
    const double mean = pairwise_sum(replicates) / static_cast<double>(g);
    std::vector<double> sq(g);
    for (std::size_t i = 0; i < g; ++i) sq[i] = (replicates[i] - mean) * (replicates[i] - mean);
    return std::sqrt(static_cast<double>(g - 1) / static_cast<double>(g) * pairwise_sum(sq));
}

EstimateWithError from_jackknife(const JackknifeSample &sample, std::size_t n_samples) {
    EstimateWithError e;
    e.value = sample.value;
    e.std_error = jackknife_error(sample.replicates);
    e.n_samples = n_samples;
    e.method = "jackknife";
    if (!std::isfinite(e.value) || !std::isfinite(e.std_error)) {
        e.flagged = true;
        e.flag_reason = "non-finite estimate";
    }
    return e;
}

}  // namespace rmkit
