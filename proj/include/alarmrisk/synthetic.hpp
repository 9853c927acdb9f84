#pragma once
// Seeded generator of feature rows with a known dependence design, for tests,
// benchmarks and demos.
//
// The failure label is drawn first (risk rises with scenario, falls with
// group), then
//   num_alarms      strongly shifted by failure
//   response_time   moderately shifted
//   mimics_opened   weakly shifted (downwards)
//   tlx, sart       shifted (subjective set)
// and every other feature is label-independent noise.

#include <cstdint>
#include <vector>

#include "alarmrisk/session.hpp"

namespace alarmrisk {

std::vector<FeatureVector> synthetic_features(std::size_t per_cell, std::uint64_t seed);

// Logistic design for the stepwise oracle: y ~ Bernoulli(sigmoid(b0 + b1 x0)),
// x0..x{k-1} iid standard normal, only x0 informative.
struct LogisticSample {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};
LogisticSample synthetic_logistic(std::size_t n, std::size_t k, double b0, double b1, std::uint64_t seed);

}  // namespace alarmrisk
