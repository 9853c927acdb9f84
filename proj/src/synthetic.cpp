#include "alarmrisk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace alarmrisk {

namespace {

int count_draw(std::mt19937_64& rng, double mean) {
    std::poisson_distribution<int> d(std::max(mean, 0.1));
    return d(rng);
}

double positive(double v, double floor) { return std::max(v, floor); }

}  // namespace

std::vector<FeatureVector> synthetic_features(std::size_t per_cell, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<FeatureVector> rows;
    int id = 0;
    for (auto s : kAllScenarios)
        for (auto g : kAllGroups)
            for (std::size_t k = 0; k < per_cell; ++k) {
                FeatureVector fv;
                fv.participant_id = "P" + std::to_string(++id);
                fv.group = g;
                fv.scenario = s;
                const double logit = -2.2 + 1.4 * (code(s) - 1) - 0.3 * (code(g) - 1);
                fv.error = u(rng) < 1.0 / (1.0 + std::exp(-logit));
                const double e = fv.error ? 1.0 : 0.0;

                fv.num_alarms = std::max(0, static_cast<int>(std::lround(9.0 + 3.0 * e + 1.5 * code(s) + 2.5 * z(rng))));
                fv.response_time_s = positive(220.0 + 60.0 * e + 60.0 * z(rng), 1.0);
                fv.mimics_opened = count_draw(rng, 6.0 - 1.5 * e);
                fv.reaction_time_s = positive(25.0 + 8.0 * z(rng), 0.5);
                fv.acknowledgements = count_draw(rng, 12.0);
                fv.alarms_silenced = count_draw(rng, 5.0);
                if (code(g) >= 3) fv.procedures_opened = count_draw(rng, 3.0);
                fv.accuracy_mse = positive(0.002 * std::exp(0.5 * z(rng)), 0.0);
                if (s != Scenario::S3) fv.recovery_time_s = positive(300.0 + 80.0 * z(rng), 1.0);
                fv.consequence = fv.error ? 4 : 1;
                fv.overall_performance = fv.error ? Performance::Poor : Performance::Good;

                fv.subjective.tlx = 45.0 + 12.0 * e + 10.0 * z(rng);
                fv.subjective.sart = 20.0 - 5.0 * e + 4.0 * z(rng);
                fv.subjective.spam = 3.0 + 0.8 * z(rng);
                fv.subjective.familiarity = std::clamp(std::round(3.0 + z(rng)), 1.0, 5.0);
                fv.subjective.training = std::clamp(std::round(3.0 + z(rng)), 1.0, 5.0);
                rows.push_back(std::move(fv));
            }
    return rows;
}

LogisticSample synthetic_logistic(std::size_t n, std::size_t k, double b0, double b1, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LogisticSample out;
    out.x.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(k);
        for (auto& v : row) v = z(rng);
        const double eta = b0 + b1 * row[0];
        out.y.push_back(u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0);
        out.x.push_back(std::move(row));
    }
    return out;
}

}  // namespace alarmrisk
