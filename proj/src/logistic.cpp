#include "alarmrisk/logistic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <optional>

#include "alarmrisk/errors.hpp"

namespace alarmrisk {

using nlohmann::json;

Criterion parse_criterion(const std::string& text) {
    if (text == "aic" || text == "AIC") return Criterion::Aic;
    if (text == "bic" || text == "BIC") return Criterion::Bic;
    throw ConfigError("criterion must be aic or bic, got '" + text + "'");
}

std::string to_string(Criterion c) { return c == Criterion::Aic ? "aic" : "bic"; }

double LrModel::aic() const { return -2.0 * log_likelihood + 2.0 * static_cast<double>(parameters()); }

double LrModel::bic() const {
    return -2.0 * log_likelihood + static_cast<double>(parameters()) * std::log(static_cast<double>(n));
}

namespace {

const char* kIntercept = "(intercept)";

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + e^eta) without overflow
double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
    return ll;
}

double two_sided_p(double z) {
    if (!std::isfinite(z)) return 0.0;
    static const boost::math::normal_distribution<double> nd;
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(z))));
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

}  // namespace

LrModel fit_lr(const std::vector<std::vector<double>>& x, std::span<const int> y,
               const std::vector<std::string>& features, const LrOptions& options) {
    const auto n = y.size();
    const auto k = features.size();
    if (x.size() != n) throw ContractError("fit_lr: rows and labels differ in length");
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] != 0 && y[i] != 1) throw ContractError("fit_lr: labels must be 0 or 1");
        if (x[i].size() != k) throw ContractError("fit_lr: ragged design row");
        for (double v : x[i])
            if (!std::isfinite(v)) throw ContractError("fit_lr: missing or non-finite value in the design");
        positives += static_cast<std::size_t>(y[i]);
    }
    if (positives == 0 || positives == n) throw ContractError("fit_lr: needs at least one row per class");

    LrModel m;
    m.features = features;
    m.n = n;
    m.mean.assign(k, 0.0);
    m.sd.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += x[i][j];
        const double mu = s / static_cast<double>(n);
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) ss += (x[i][j] - mu) * (x[i][j] - mu);
        m.mean[j] = mu;
        m.sd[j] = std::sqrt(ss / static_cast<double>(n));
        if (!(m.sd[j] > 1e-12 * std::max(1.0, std::abs(mu))))
            throw CollinearityError("feature '" + features[j] + "' is constant, collinear with the intercept");
    }

    const auto p = static_cast<Eigen::Index>(k + 1);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), p);
    Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        z(r, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) z(r, static_cast<Eigen::Index>(j + 1)) = (x[i][j] - m.mean[j]) / m.sd[j];
        yy[r] = y[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        std::vector<std::string> names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index c = qr.rank(); c < p; ++c) {
            const auto col = perm[c];
            names.push_back(col == 0 ? std::string(kIntercept) : features[static_cast<std::size_t>(col - 1)]);
        }
        std::sort(names.begin(), names.end());
        throw CollinearityError("rank-deficient design; linearly dependent on the other columns: " + join(names));
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = z * beta;
    double ll = log_likelihood(eta, yy);
    Eigen::VectorXd prob(static_cast<Eigen::Index>(n));
    bool converged = false;
    double gnorm = 0;
    int it = 0;
    for (;; ++it) {
        for (Eigen::Index i = 0; i < eta.size(); ++i) prob[i] = sigmoid(eta[i]);
        const Eigen::VectorXd grad = z.transpose() * (yy - prob);
        gnorm = grad.norm();
        if (gnorm < options.gradient_tol) {
            converged = true;
            break;
        }
        if (it >= options.max_iter) break;
        const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
        const Eigen::MatrixXd h = z.transpose() * w.asDiagonal() * z;
        Eigen::VectorXd step = h.ldlt().solve(grad);
        if (!step.allFinite()) step = h.colPivHouseholderQr().solve(grad);
        if (!step.allFinite()) throw ConvergenceError("IRLS produced a non-finite Newton step");

        // Step halving keeps the deviance non-increasing.
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half, t *= 0.5) {
            const Eigen::VectorXd cand = beta + t * step;
            const Eigen::VectorXd cand_eta = z * cand;
            const double cand_ll = log_likelihood(cand_eta, yy);
            if (cand_ll >= ll - 1e-13 * std::max(1.0, std::abs(ll))) {
                beta = cand;
                eta = cand_eta;
                ll = std::max(ll, cand_ll);
                accepted = true;
                break;
            }
        }
        if (!accepted) throw ConvergenceError("IRLS line search failed to decrease the deviance");
        if (beta.norm() > options.separation_cap)
            throw SeparationError("coefficient norm exceeded " + std::to_string(options.separation_cap) +
                                  " on the standardized scale; the classes are (quasi-)separated");
    }
    // A finite optimum leaves some residual mass; a separated design drives all
    // of it toward zero, converged or not.
    double worst = 0;
    for (Eigen::Index i = 0; i < prob.size(); ++i) worst = std::max(worst, std::abs(yy[i] - prob[i]));
    if (worst < 1e-4) throw SeparationError("fitted probabilities reproduce the labels; the classes are separated");
    if (!converged) {
        throw ConvergenceError("IRLS did not converge in " + std::to_string(options.max_iter) + " iterations");
    }

    const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    const Eigen::MatrixXd h = z.transpose() * w.asDiagonal() * z;
    const Eigen::MatrixXd cov = h.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    if (!cov.allFinite()) throw ConvergenceError("information matrix is singular at the optimum");

    // Raw-scale coefficients are a linear map of the standardized ones.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    a(0, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
        const auto c = static_cast<Eigen::Index>(j + 1);
        a(0, c) = -m.mean[j] / m.sd[j];
        a(c, c) = 1.0 / m.sd[j];
    }
    const Eigen::VectorXd raw_beta = a * beta;
    const Eigen::MatrixXd raw_cov = a * cov * a.transpose();

    auto coef = [&](Eigen::Index c, double b, double var) {
        if (!(var > 0)) throw ConvergenceError("non-positive coefficient variance at the optimum");
        Coefficient out;
        out.name = c == 0 ? std::string(kIntercept) : features[static_cast<std::size_t>(c - 1)];
        out.beta = b;
        out.se = std::sqrt(var);
        out.z = b / out.se;
        out.p = two_sided_p(out.z);
        return out;
    };
    for (Eigen::Index c = 0; c < p; ++c) {
        m.standardized.push_back(coef(c, beta[c], cov(c, c)));
        m.raw.push_back(coef(c, raw_beta[c], raw_cov(c, c)));
    }
    m.log_likelihood = ll;
    m.iterations = it;
    m.gradient_norm = gnorm;
    return m;
}

LrModel fit_lr(const NumericTable& table, const std::vector<std::string>& features, const LrOptions& options) {
    const auto cc = table.complete_cases(features);
    std::vector<std::size_t> cols;
    for (const auto& f : features) cols.push_back(cc.column(f));
    std::vector<std::vector<double>> x;
    x.reserve(cc.rows());
    for (const auto& row : cc.x) {
        std::vector<double> r;
        for (auto c : cols) r.push_back(row[c]);
        x.push_back(std::move(r));
    }
    return fit_lr(x, cc.y, features, options);
}

StepwiseResult stepwise(const NumericTable& table, const std::vector<std::string>& candidates, Criterion criterion,
                        const LrOptions& options, Execution exec) {
    if (candidates.size() < 2) throw ContractError("stepwise needs at least two candidates");
    const auto cc = table.complete_cases(candidates);
    StepwiseResult res;
    res.criterion = criterion;
    res.rows_used = cc.rows();

    std::vector<std::string> by_name = candidates;
    std::sort(by_name.begin(), by_name.end());
    if (std::adjacent_find(by_name.begin(), by_name.end()) != by_name.end())
        throw ContractError("stepwise candidates contain duplicates");

    auto in_input_order = [&](const std::vector<std::string>& set) {
        std::vector<std::string> out;
        for (const auto& c : candidates)
            if (std::find(set.begin(), set.end(), c) != set.end()) out.push_back(c);
        return out;
    };

    struct Trial {
        std::optional<LrModel> model;
        std::string failure;
    };
    // Scores every variant in parallel, then picks the best in name order.
    auto best_of = [&](const std::vector<std::vector<std::string>>& sets, const std::vector<std::string>& labels)
        -> std::pair<int, std::optional<LrModel>> {
        std::vector<Trial> trials(sets.size());
        for_each_index(sets.size(), exec, [&](std::size_t i) {
            try {
                trials[i].model = fit_lr(cc, sets[i], options);
            } catch (const NumericalError& e) {
                trials[i].failure = e.what();
            }
        });
        int best = -1;
        for (std::size_t i = 0; i < trials.size(); ++i) {
            if (!trials[i].model) {
                res.skipped.push_back(labels[i] + ": " + trials[i].failure);
                continue;
            }
            if (best < 0 || trials[i].model->criterion(criterion) <
                                trials[static_cast<std::size_t>(best)].model->criterion(criterion))
                best = static_cast<int>(i);
        }
        if (best < 0) return {-1, std::nullopt};
        return {best, std::move(trials[static_cast<std::size_t>(best)].model)};
    };

    std::vector<std::string> selected;
    LrModel current = fit_lr(cc, {}, options);
    constexpr double kImprove = 1e-9;
    for (;;) {
        std::vector<std::vector<std::string>> sets;
        std::vector<std::string> labels;
        for (const auto& c : by_name) {
            if (std::find(selected.begin(), selected.end(), c) != selected.end()) continue;
            auto s = selected;
            s.push_back(c);
            sets.push_back(in_input_order(s));
            labels.push_back("+" + c);
        }
        if (sets.empty()) break;
        auto [bi, bm] = best_of(sets, labels);
        if (bi < 0 || !(bm->criterion(criterion) < current.criterion(criterion) - kImprove)) break;
        const auto added = labels[static_cast<std::size_t>(bi)].substr(1);
        selected = sets[static_cast<std::size_t>(bi)];
        current = std::move(*bm);
        res.trace.push_back({"add", added, current.criterion(criterion)});

        while (selected.size() > 1) {
            std::vector<std::vector<std::string>> drops;
            std::vector<std::string> dlabels;
            for (const auto& c : by_name) {
                if (std::find(selected.begin(), selected.end(), c) == selected.end()) continue;
                std::vector<std::string> s;
                for (const auto& x : selected)
                    if (x != c) s.push_back(x);
                drops.push_back(s);
                dlabels.push_back("-" + c);
            }
            auto [di, dm] = best_of(drops, dlabels);
            if (di < 0 || !(dm->criterion(criterion) < current.criterion(criterion) - kImprove)) break;
            selected = drops[static_cast<std::size_t>(di)];
            current = std::move(*dm);
            res.trace.push_back({"drop", dlabels[static_cast<std::size_t>(di)].substr(1), current.criterion(criterion)});
        }
    }
    res.model = std::move(current);
    return res;
}

double predict_proba(const LrModel& model, std::span<const double> row) {
    if (row.size() != model.features.size()) throw ContractError("predict_proba: row length does not match the model");
    double eta = model.standardized[0].beta;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (std::isnan(row[j])) throw ContractError("predict_proba: missing value for '" + model.features[j] + "'");
        const double b = model.standardized[j + 1].beta;
        if (b != 0) eta += b * (row[j] - model.mean[j]) / model.sd[j];
    }
    return sigmoid(eta);
}

double predict_proba(const LrModel& model, const std::map<std::string, double>& row) {
    std::vector<double> v;
    for (const auto& f : model.features) {
        auto it = row.find(f);
        if (it == row.end()) throw ContractError("predict_proba: missing value for '" + f + "'");
        v.push_back(it->second);
    }
    return predict_proba(model, v);
}

std::vector<std::string> dummy_feature_names(const std::vector<std::string>& features) {
    std::vector<std::string> out;
    for (const auto& f : features) {
        const auto& spec = feature_spec(f);
        if (spec.kind == FeatureKind::Continuous) {
            out.push_back(f);
            continue;
        }
        for (std::size_t s = 1; s < spec.states.size(); ++s) out.push_back(f + "=" + spec.states[s]);
    }
    return out;
}

NumericTable dummy_code(const NumericTable& table) {
    NumericTable out;
    out.features = dummy_feature_names(table.features);
    out.y = table.y;
    out.group = table.group;
    out.scenario = table.scenario;
    for (const auto& row : table.x) {
        std::vector<double> r;
        for (std::size_t c = 0; c < table.features.size(); ++c) {
            const auto& spec = feature_spec(table.features[c]);
            if (spec.kind == FeatureKind::Continuous) {
                r.push_back(row[c]);
                continue;
            }
            for (std::size_t s = 1; s < spec.states.size(); ++s)
                r.push_back(is_missing(row[c]) ? kMissing : (static_cast<int>(row[c]) == static_cast<int>(s + 1) ? 1.0 : 0.0));
        }
        out.x.push_back(std::move(r));
    }
    return out;
}

CellTable aggregate_by_cell(const LrModel& model, const NumericTable& table) {
    std::vector<std::size_t> cols;
    for (const auto& f : model.features) cols.push_back(table.column(f));
    std::map<std::pair<Group, Scenario>, std::pair<double, std::size_t>> acc;
    std::vector<double> row(cols.size());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        bool complete = true;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            row[k] = table.x[r][cols[k]];
            complete = complete && !is_missing(row[k]);
        }
        if (!complete) continue;
        auto& a = acc[{table.group[r], table.scenario[r]}];
        a.first += 1.0 - predict_proba(model, row);
        a.second += 1;
    }
    CellTable out;
    for (const auto& [cell, a] : acc) out[cell] = {a.first / static_cast<double>(a.second), a.second};
    return out;
}

namespace {

json coefficients_json(const std::vector<Coefficient>& cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back({{"name", c.name}, {"beta", c.beta}, {"se", c.se}, {"z", c.z}, {"p", c.p}});
    return arr;
}

std::vector<Coefficient> coefficients_from_json(const json& arr) {
    std::vector<Coefficient> out;
    for (const auto& c : arr)
        out.push_back({c.at("name").get<std::string>(), c.at("beta").get<double>(), c.at("se").get<double>(),
                       c.at("z").get<double>(), c.at("p").get<double>()});
    return out;
}

}  // namespace

json to_json(const LrModel& m) {
    return {{"format", "alarmrisk.lr"},
            {"version", 1},
            {"features", m.features},
            {"standardization", {{"mean", m.mean}, {"sd", m.sd}}},
            {"coefficients", {{"standardized", coefficients_json(m.standardized)}, {"raw", coefficients_json(m.raw)}}},
            {"n", m.n},
            {"log_likelihood", m.log_likelihood},
            {"aic", m.aic()},
            {"bic", m.bic()},
            {"convergence", {{"iterations", m.iterations}, {"gradient_norm", m.gradient_norm}}}};
}

LrModel lr_model_from_json(const json& j) {
    try {
        if (j.at("format") != "alarmrisk.lr") throw InputError("not a logistic-regression model document");
        if (j.at("version").get<int>() != 1) throw InputError("unsupported model version");
        LrModel m;
        m.features = j.at("features").get<std::vector<std::string>>();
        m.mean = j.at("standardization").at("mean").get<std::vector<double>>();
        m.sd = j.at("standardization").at("sd").get<std::vector<double>>();
        m.standardized = coefficients_from_json(j.at("coefficients").at("standardized"));
        m.raw = coefficients_from_json(j.at("coefficients").at("raw"));
        m.n = j.at("n").get<std::size_t>();
        m.log_likelihood = j.at("log_likelihood").get<double>();
        m.iterations = j.at("convergence").at("iterations").get<int>();
        m.gradient_norm = j.at("convergence").at("gradient_norm").get<double>();
        if (m.mean.size() != m.features.size() || m.sd.size() != m.features.size() ||
            m.standardized.size() != m.features.size() + 1)
            throw InputError("model document sizes are inconsistent");
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

json to_json(const StepwiseResult& r) {
    json trace = json::array();
    for (const auto& s : r.trace) trace.push_back({{"action", s.action}, {"feature", s.feature}, {"criterion", s.criterion}});
    return {{"criterion", to_string(r.criterion)},
            {"rows_used", r.rows_used},
            {"selected", r.model.features},
            {"trace", trace},
            {"skipped", r.skipped},
            {"model", to_json(r.model)}};
}

}  // namespace alarmrisk
