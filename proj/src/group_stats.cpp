#include "alarmrisk/group_stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/io_util.hpp"

namespace alarmrisk {

using nlohmann::json;
namespace bm = boost::math;

namespace {

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double var1(std::span<const double> x, double m) {
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double poly(const double* c, int n, double x) {
    double r = c[n - 1];
    for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
    return r;
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

void check_finite(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!std::isfinite(v)) throw ContractError(std::string(what) + ": non-finite value");
}

double t_two_sided(double t, double df) {
    if (t == 0) return 1.0;
    const bm::students_t_distribution<double> dist(df);
    return clamp_p(2.0 * bm::cdf(bm::complement(dist, std::abs(t))));
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 3) throw ContractError("shapiro_wilk needs at least 3 values");
    if (n > 5000) throw ContractError("shapiro_wilk supports at most 5000 values");
    check_finite(xs, "shapiro_wilk");
    std::vector<double> x(xs.begin(), xs.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::abs(x.front())))) throw DegenerateInputError("shapiro_wilk: constant sample");

    const std::size_t nn2 = n / 2;
    std::vector<double> a(nn2);
    const double an = static_cast<double>(n);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        static const double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
        static const double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        static const bm::normal_distribution<double> nd;
        std::vector<double> m(nn2);
        double summ2 = 0;
        for (std::size_t i = 0; i < nn2; ++i) {
            m[i] = bm::quantile(nd, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - m[0] / ssumm2;
        std::size_t i1;
        double fac;
        if (n > 5) {
            i1 = 2;
            const double a2 = -m[1] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            i1 = 1;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = i1; i < nn2; ++i) a[i] = -m[i] / fac;
    }

    const double mu = mean(x);
    double ssq = 0;
    for (double v : x) ssq += (v - mu) * (v - mu);
    double num = 0;
    for (std::size_t i = 0; i < nn2; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
    double w = std::min(1.0, num * num / ssq);

    TestResult r;
    r.statistic = w;
    if (n == 3) {
        const double pi6 = 6.0 / M_PI, stqr = M_PI / 3.0;
        r.p = clamp_p(pi6 * (std::asin(std::sqrt(w)) - stqr));
        return r;
    }
    const double w1 = std::log(1.0 - w);
    double y, mm, s;
    if (n <= 11) {
        static const double g[] = {-2.273, 0.459};
        static const double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
        static const double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
        const double gamma = poly(g, 2, an);
        if (w1 >= gamma) {
            r.p = 0.0;
            return r;
        }
        y = -std::log(gamma - w1);
        mm = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
    } else {
        static const double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
        static const double c6[] = {-0.4803, -0.082676, 0.0030302};
        const double xx = std::log(an);
        y = w1;
        mm = poly(c5, 4, xx);
        s = std::exp(poly(c6, 3, xx));
    }
    static const bm::normal_distribution<double> nd;
    r.p = clamp_p(bm::cdf(bm::complement(nd, (y - mm) / s)));
    return r;
}

TestResult levene(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ContractError("levene needs at least 2 values per group");
    check_finite(a, "levene");
    check_finite(b, "levene");
    auto dev = [](std::span<const double> x) {
        const double m = mean(x);
        std::vector<double> d;
        for (double v : x) d.push_back(std::abs(v - m));
        return d;
    };
    const auto za = dev(a), zb = dev(b);
    const double ma = mean(za), mb = mean(zb);
    const double na = static_cast<double>(za.size()), nb = static_cast<double>(zb.size());
    const double n = na + nb;
    const double grand = (ma * na + mb * nb) / n;
    const double between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
    double within = 0;
    for (double v : za) within += (v - ma) * (v - ma);
    for (double v : zb) within += (v - mb) * (v - mb);
    if (!(within > 0)) throw DegenerateInputError("levene: zero within-group spread of absolute deviations");
    TestResult r;
    r.df = n - 2.0;
    r.statistic = (n - 2.0) * between / within;
    const bm::fisher_f_distribution<double> f(1.0, n - 2.0);
    r.p = clamp_p(bm::cdf(bm::complement(f, r.statistic)));
    return r;
}

TestResult student_t(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty() || a.size() + b.size() < 3) throw ContractError("student_t needs n_a + n_b >= 3");
    check_finite(a, "student_t");
    check_finite(b, "student_t");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    double ss = 0;
    for (double v : a) ss += (v - ma) * (v - ma);
    for (double v : b) ss += (v - mb) * (v - mb);
    const double df = na + nb - 2.0;
    const double sp2 = ss / df;
    if (!(sp2 > 0)) throw DegenerateInputError("student_t: zero pooled variance");
    TestResult r;
    r.df = df;
    r.statistic = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    r.p = t_two_sided(r.statistic, df);
    return r;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ContractError("welch_t needs at least 2 values per group");
    check_finite(a, "welch_t");
    check_finite(b, "welch_t");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double qa = var1(a, ma) / na, qb = var1(b, mb) / nb;
    if (!(qa + qb > 0)) throw DegenerateInputError("welch_t: both samples are constant");
    TestResult r;
    r.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    r.statistic = (ma - mb) / std::sqrt(qa + qb);
    r.p = t_two_sided(r.statistic, r.df);
    return r;
}

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ContractError("wilcoxon_rank_sum needs both samples non-empty");
    check_finite(a, "wilcoxon_rank_sum");
    check_finite(b, "wilcoxon_rank_sum");
    const std::size_t na = a.size(), n = a.size() + b.size();
    std::vector<std::pair<double, int>> all;
    for (double v : a) all.emplace_back(v, 0);
    for (double v : b) all.emplace_back(v, 1);
    std::sort(all.begin(), all.end(), [](auto& l, auto& r) { return l.first < r.first; });
    // Doubled midranks are integers.
    std::vector<long> rank2(n);
    double tie_term = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const long r2 = static_cast<long>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) rank2[k] = r2;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    long w2 = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (all[i].second == 0) w2 += rank2[i];

    TestResult r;
    r.statistic = static_cast<double>(w2) / 2.0;
    const long e2 = static_cast<long>(na * (n + 1));  // doubled expectation
    const long dev = std::labs(w2 - e2);
    if (n <= kWilcoxonExactMax) {
        const long max_sum = static_cast<long>(2 * n * (n + 1));
        // ways[j][s]: subsets of size j with doubled rank sum s
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(max_sum + 1), 0.0));
        ways[0][0] = 1;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = std::min(i + 1, na); j >= 1; --j)
                for (long s = max_sum; s >= rank2[i]; --s)
                    ways[j][static_cast<std::size_t>(s)] += ways[j - 1][static_cast<std::size_t>(s - rank2[i])];
        double total = 0, tail = 0;
        for (long s = 0; s <= max_sum; ++s) {
            const double c = ways[na][static_cast<std::size_t>(s)];
            total += c;
            if (std::labs(s - e2) >= dev) tail += c;
        }
        r.p = clamp_p(tail / total);
        return r;
    }
    const double nad = static_cast<double>(na), nbd = static_cast<double>(n - na), nd = static_cast<double>(n);
    const double var = nad * nbd / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (!(var > 0)) {
        r.p = 1.0;
        return r;
    }
    const double z = (r.statistic - nad * (nd + 1.0) / 2.0) / std::sqrt(var);
    static const bm::normal_distribution<double> norm;
    r.p = clamp_p(2.0 * bm::cdf(bm::complement(norm, std::abs(z))));
    return r;
}

TestResult chi_squared(const std::vector<std::vector<double>>& table, bool continuity_correction) {
    if (table.size() < 2) throw ContractError("chi_squared needs at least two rows");
    const std::size_t cols = table[0].size();
    for (const auto& row : table)
        if (row.size() != cols) throw ContractError("chi_squared: ragged contingency table");
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < cols; ++c) {
        double s = 0;
        for (const auto& row : table) s += row[c];
        if (s > 0) keep.push_back(c);
    }
    TestResult r;
    if (keep.size() < 2) return r;
    std::vector<double> rt(table.size(), 0.0), ct(keep.size(), 0.0);
    double total = 0;
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const double v = table[i][keep[k]];
            if (v < 0) throw ContractError("chi_squared: negative count");
            rt[i] += v;
            ct[k] += v;
            total += v;
        }
    for (double v : rt)
        if (!(v > 0)) throw DegenerateInputError("chi_squared: a row of the contingency table is empty");
    r.df = static_cast<double>((table.size() - 1) * (keep.size() - 1));
    const bool yates = continuity_correction && r.df == 1.0;
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const double e = rt[i] * ct[k] / total;
            double d = std::abs(table[i][keep[k]] - e);
            if (yates) d = std::max(0.0, d - 0.5);
            r.statistic += d * d / e;
        }
    const bm::chi_squared_distribution<double> dist(r.df);
    r.p = r.statistic == 0 ? 1.0 : clamp_p(bm::cdf(bm::complement(dist, r.statistic)));
    return r;
}

TestResult chi_squared_samples(std::span<const double> a, std::span<const double> b, bool continuity_correction) {
    std::map<double, std::size_t> cats;
    for (double v : a) cats.emplace(v, 0);
    for (double v : b) cats.emplace(v, 0);
    std::size_t k = 0;
    for (auto& [v, idx] : cats) idx = k++;
    std::vector<std::vector<double>> table(2, std::vector<double>(cats.size(), 0.0));
    for (double v : a) table[0][cats.at(v)] += 1;
    for (double v : b) table[1][cats.at(v)] += 1;
    return chi_squared(table, continuity_correction);
}

std::string to_string(TestKind k) {
    switch (k) {
        case TestKind::StudentT: return "student_t";
        case TestKind::WelchT: return "welch_t";
        case TestKind::WilcoxonRankSum: return "wilcoxon_rank_sum";
        case TestKind::ChiSquared: return "chi_squared";
    }
    return "?";
}

TestKind select_test(VariableKind kind, std::optional<double> sw_a, std::optional<double> sw_b,
                     std::optional<double> levene_p, double alpha) {
    if (kind == VariableKind::Categorical) return TestKind::ChiSquared;
    if (!sw_a || !sw_b || *sw_a < alpha || *sw_b < alpha) return TestKind::WilcoxonRankSum;
    if (levene_p && *levene_p >= alpha) return TestKind::StudentT;
    return TestKind::WelchT;
}

TestChoice choose_test(std::span<const double> a, std::span<const double> b, VariableKind kind, double alpha) {
    TestChoice c;
    if (kind == VariableKind::Categorical) {
        c.test = TestKind::ChiSquared;
        return c;
    }
    auto sw = [&](std::span<const double> x, const char* label) -> std::optional<double> {
        if (x.size() < 3) {
            c.warnings.push_back(std::string("shapiro-wilk skipped for ") + label + ": fewer than 3 values");
            return std::nullopt;
        }
        try {
            return shapiro_wilk(x).p;
        } catch (const DegenerateInputError&) {
            c.warnings.push_back(std::string("shapiro-wilk skipped for ") + label + ": constant sample");
            return std::nullopt;
        }
    };
    c.sw_a = sw(a, "a");
    c.sw_b = sw(b, "b");
    if (a.size() >= 2 && b.size() >= 2) {
        try {
            c.levene_p = levene(a, b).p;
        } catch (const DegenerateInputError&) {
            c.warnings.push_back("levene skipped: zero spread");
        }
    }
    c.test = select_test(kind, c.sw_a, c.sw_b, c.levene_p, alpha);
    return c;
}

const std::vector<BatteryVariable>& battery_variables() {
    using S = Scenario;
    const std::vector<S> all = {S::S1, S::S2, S::S3};
    const std::vector<S> s12 = {S::S1, S::S2};
    static const std::vector<BatteryVariable> vars = {
        {"accuracy", VariableKind::Continuous, all},
        {"acknowledgements", VariableKind::Continuous, all},
        {"alarms_silenced", VariableKind::Continuous, all},
        {"mimics_opened", VariableKind::Continuous, all},
        {"num_alarms", VariableKind::Continuous, all},
        {"reaction_time", VariableKind::Continuous, all},
        {"recovery_time", VariableKind::Continuous, s12},
        {"response_time", VariableKind::Continuous, all},
        {"procedures_opened", VariableKind::Continuous, all},
        {"consequence", VariableKind::Categorical, all},
        {"overall_performance", VariableKind::Categorical, s12},
        {"error_rate", VariableKind::Categorical, all},
    };
    return vars;
}

std::optional<double> battery_value(const FeatureVector& fv, const std::string& v) {
    if (v == "accuracy") return fv.accuracy_mse;
    if (v == "acknowledgements") return fv.acknowledgements;
    if (v == "alarms_silenced") return fv.alarms_silenced;
    if (v == "mimics_opened") return fv.mimics_opened;
    if (v == "num_alarms") return fv.num_alarms;
    if (v == "reaction_time") return fv.reaction_time_s;
    if (v == "recovery_time") return fv.recovery_time_s;
    if (v == "response_time") return fv.response_time_s;
    if (v == "procedures_opened") {
        if (!fv.procedures_opened) return std::nullopt;
        return *fv.procedures_opened;
    }
    if (v == "consequence") return fv.consequence;
    if (v == "overall_performance") {
        if (!fv.overall_performance) return std::nullopt;
        return static_cast<double>(*fv.overall_performance);
    }
    if (v == "error_rate") return fv.error ? 1.0 : 0.0;
    throw ContractError("unknown battery variable '" + v + "'");
}

ComparisonResult compare_samples(const std::string& variable, VariableKind kind, std::span<const double> a,
                                 std::span<const double> b, const BatteryOptions& options) {
    ComparisonResult r;
    r.variable = variable;
    r.n_a = a.size();
    r.n_b = b.size();
    if (a.empty() || b.empty()) {
        r.notes.push_back("not computable: a group has no observations");
        return r;
    }
    const auto choice = choose_test(a, b, kind, options.alpha);
    r.test = choice.test;
    r.sw_a = choice.sw_a;
    r.sw_b = choice.sw_b;
    r.levene_p = choice.levene_p;
    r.notes = choice.warnings;
    try {
        TestResult t;
        switch (r.test) {
            case TestKind::StudentT: t = student_t(a, b); break;
            case TestKind::WelchT: t = welch_t(a, b); break;
            case TestKind::WilcoxonRankSum: t = wilcoxon_rank_sum(a, b); break;
            case TestKind::ChiSquared: t = chi_squared_samples(a, b, options.continuity_correction); break;
        }
        r.statistic = t.statistic;
        r.p = t.p;
        r.computable = true;
    } catch (const std::exception& e) {
        r.notes.push_back(std::string("not computable: ") + e.what());
        return r;
    }
    r.significant = r.p < options.alpha;
    if (r.significant) {
        double diff;
        if (r.test == TestKind::WilcoxonRankSum) {
            auto median = [](std::span<const double> x) {
                std::vector<double> v(x.begin(), x.end());
                std::sort(v.begin(), v.end());
                const auto m = v.size() / 2;
                return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
            };
            diff = median(b) - median(a);
            if (diff == 0) diff = mean(b) - mean(a);
        } else {
            diff = mean(b) - mean(a);
        }
        r.direction = diff > 0 ? "+" : diff < 0 ? "-" : "+/-";
    }
    return r;
}

std::vector<ComparisonResult> run_battery(const std::vector<FeatureVector>& rows, const BatteryOptions& options) {
    const std::pair<Group, Group> pairs[] = {{Group::G1, Group::G2}, {Group::G2, Group::G3}, {Group::G3, Group::G4}};
    std::vector<ComparisonResult> out;
    for (const auto& var : battery_variables())
        for (auto sc : var.scenarios)
            for (auto [ga, gb] : pairs) {
                std::vector<double> a, b;
                for (const auto& fv : rows) {
                    if (fv.scenario != sc || (fv.group != ga && fv.group != gb)) continue;
                    const auto v = battery_value(fv, var.name);
                    if (!v) continue;
                    (fv.group == ga ? a : b).push_back(*v);
                }
                auto r = compare_samples(var.name, var.kind, a, b, options);
                r.scenario = sc;
                r.group_a = ga;
                r.group_b = gb;
                out.push_back(std::move(r));
            }
    return out;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::string opt_s(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

}  // namespace

json to_json(const std::vector<ComparisonResult>& results) {
    json arr = json::array();
    for (const auto& r : results)
        arr.push_back({{"variable", r.variable},
                       {"scenario", to_string(r.scenario)},
                       {"comparison", to_string(r.group_a) + " vs " + to_string(r.group_b)},
                       {"n_a", r.n_a},
                       {"n_b", r.n_b},
                       {"computable", r.computable},
                       {"test", r.computable ? json(to_string(r.test)) : json(nullptr)},
                       {"shapiro_wilk_a", opt(r.sw_a)},
                       {"shapiro_wilk_b", opt(r.sw_b)},
                       {"levene", opt(r.levene_p)},
                       {"statistic", r.computable ? json(r.statistic) : json(nullptr)},
                       {"p", r.computable ? json(r.p) : json(nullptr)},
                       {"significant", r.significant},
                       {"direction", r.direction},
                       {"notes", r.notes}});
    return arr;
}

std::string battery_csv(const std::vector<ComparisonResult>& results) {
    std::ostringstream os;
    os << "variable,scenario,comparison,n_a,n_b,test,shapiro_wilk_a,shapiro_wilk_b,levene,statistic,p,significant,"
          "direction\n";
    for (const auto& r : results) {
        os << r.variable << ',' << to_string(r.scenario) << ',' << to_string(r.group_a) << " vs "
           << to_string(r.group_b) << ',' << r.n_a << ',' << r.n_b << ','
           << (r.computable ? to_string(r.test) : "not_computable") << ',' << opt_s(r.sw_a) << ',' << opt_s(r.sw_b)
           << ',' << opt_s(r.levene_p) << ',' << (r.computable ? io::format_double(r.statistic) : "") << ','
           << (r.computable ? io::format_double(r.p) : "") << ',' << (r.significant ? 1 : 0) << ',' << r.direction
           << '\n';
    }
    return os.str();
}

std::string battery_text(const std::vector<ComparisonResult>& results) {
    auto p3 = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        return std::string(buf);
    };
    std::ostringstream os;
    char line[200];
    std::snprintf(line, sizeof line, "%-20s %-3s %-9s %-18s %7s %7s %7s %9s\n", "variable", "sc", "groups", "test",
                  "SW a", "SW b", "Levene", "p");
    os << line;
    for (const auto& r : results) {
        std::string p = r.computable ? p3(r.p) : "n/a";
        if (r.significant) p = "*" + p + r.direction;
        std::snprintf(line, sizeof line, "%-20s %-3s %-9s %-18s %7s %7s %7s %9s\n", r.variable.c_str(),
                      to_string(r.scenario).c_str(), (to_string(r.group_a) + "-" + to_string(r.group_b)).c_str(),
                      r.computable ? to_string(r.test).c_str() : "not_computable", p3(r.sw_a).c_str(),
                      p3(r.sw_b).c_str(), p3(r.levene_p).c_str(), p.c_str());
        os << line;
    }
    os << "* significant at alpha; sign gives group b relative to group a\n";
    return os.str();
}

}  // namespace alarmrisk
