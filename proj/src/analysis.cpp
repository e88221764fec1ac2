#include "cqv/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "cqv/distributions.hpp"
#include "cqv/error.hpp"

namespace cqv {

using nlohmann::json;

GoldMap gold_map(const Corpus& corpus) {
    GoldMap g;
    for (const auto& r : corpus.records) g[r.id] = r.normalized_gold();
    return g;
}

namespace {

double mean_of(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample variance (n-1 denominator), two-pass.
double variance_of(const std::vector<double>& xs, double mean) {
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

bool countable(Answer a) { return a == Answer::Yes || a == Answer::No; }

bool is_correct(const TaskResponse& r, const GoldMap& gold) {
    auto it = gold.find(r.record_id);
    if (it == gold.end()) throw Error(ErrorKind::InvalidArgument, "response for unknown record '" + r.record_id + "'");
    return (r.answer == Answer::Yes) == (it->second == BinaryLabel::Yes);
}

}  // namespace

AccuracySummary user_accuracy(const std::vector<TaskResponse>& responses, const GoldMap& gold) {
    AccuracySummary s;
    std::set<std::string> users;
    for (const auto& r : responses) {
        users.insert(r.participant_id);
        auto& u = s.per_user[{r.participant_id, r.condition}];
        switch (r.answer) {
            case Answer::IDK: ++u.idk; break;
            case Answer::Skipped: ++u.skipped; break;
            default: (is_correct(r, gold) ? u.correct : u.incorrect) += 1;
        }
    }
    s.n_users = users.size();
    std::map<Condition, std::vector<double>> by_condition;
    for (auto& [key, u] : s.per_user) {
        if (u.correct + u.incorrect == 0) {
            s.flagged.push_back(key);
            continue;
        }
        u.accuracy = static_cast<double>(u.correct) / static_cast<double>(u.correct + u.incorrect);
        by_condition[key.second].push_back(*u.accuracy);
    }
    for (const auto& [c, xs] : by_condition) {
        double m = mean_of(xs);
        s.condition_means[c] = m;
        s.condition_stds[c] = xs.size() > 1 ? std::optional<double>(std::sqrt(variance_of(xs, m))) : std::nullopt;
    }
    if (s.condition_means.count(Condition::Assisted) && s.condition_means.count(Condition::Unassisted)) {
        s.delta = s.condition_means[Condition::Assisted] - s.condition_means[Condition::Unassisted];
    }
    return s;
}

SuggestionSplit split_by_suggestion_correctness(const std::vector<TaskResponse>& responses,
                                                const std::map<std::string, BinaryLabel>& suggestion_labels,
                                                const GoldMap& gold) {
    std::set<std::string> good;
    std::set<std::string> bad;
    for (const auto& r : responses) {
        if (r.condition != Condition::Assisted) continue;
        auto s = suggestion_labels.find(r.record_id);
        if (s == suggestion_labels.end()) {
            throw Error(ErrorKind::MissingSuggestion, "no suggestion for assisted record '" + r.record_id + "'");
        }
        auto g = gold.find(r.record_id);
        if (g == gold.end()) throw Error(ErrorKind::InvalidArgument, "response for unknown record '" + r.record_id + "'");
        (s->second == g->second ? good : bad).insert(r.record_id);
    }
    SuggestionSplit out;
    for (const auto& r : responses) {
        if (good.count(r.record_id)) out.correct.push_back(r);
        if (bad.count(r.record_id)) out.incorrect.push_back(r);
    }
    return out;
}

StatTestResult paired_t_test(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw Error(ErrorKind::TooFewPairs, "paired t-test needs at least 2 pairs, got " + std::to_string(pairs.size()));
    std::vector<double> d;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [x, y] : pairs) {
        d.push_back(y - x);
        xs.push_back(x);
        ys.push_back(y);
    }
    const double n = static_cast<double>(d.size());
    const double md = mean_of(d);
    const double sd = std::sqrt(variance_of(d, md));
    StatTestResult r;
    r.df = n - 1;
    if (sd == 0) {
        r.degenerate = true;
        if (md == 0) {
            r.statistic = 0;
            r.p_value = 1;
        } else {
            r.statistic = std::copysign(std::numeric_limits<double>::infinity(), md);
            r.p_value = 0;
        }
    } else {
        r.statistic = md / (sd / std::sqrt(n));
        r.p_value = dist::student_t_two_tailed(r.statistic, n - 1);
    }
    try {
        r.effect_size = cohens_d(ys, xs);
    } catch (const Error&) {
        // Undefined for constant samples; left absent.
    }
    return r;
}

StatTestResult chi_square_2x2(const Table2x2& t, bool continuity_correction) {
    for (const auto& row : t) {
        for (double v : row) {
            if (v < 0 || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "contingency counts must be finite and >= 0");
        }
    }
    const std::array<double, 2> rows = {t[0][0] + t[0][1], t[1][0] + t[1][1]};
    const std::array<double, 2> cols = {t[0][0] + t[1][0], t[0][1] + t[1][1]};
    if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) {
        throw Error(ErrorKind::DegenerateMargin, "a row or column of the contingency table sums to zero");
    }
    const double n = rows[0] + rows[1];
    double chi2 = 0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double e = rows[i] * cols[j] / n;
            double diff = std::fabs(t[i][j] - e);
            if (continuity_correction) diff = std::max(0.0, diff - 0.5);
            chi2 += diff * diff / e;
        }
    }
    StatTestResult r;
    r.statistic = chi2;
    r.df = 1;
    r.p_value = dist::chi_square_sf(chi2, 1);
    r.effect_size = std::sqrt(chi2 / n);
    return r;
}

StatTestResult pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::InvalidArgument, "pearson_r needs equal-length lists");
    if (xs.size() < 3) throw Error(ErrorKind::TooFewPoints, "pearson_r needs at least 3 points, got " + std::to_string(xs.size()));
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0 || syy == 0) throw Error(ErrorKind::ZeroVariance, "pearson_r: a list has zero variance");
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    const double df = static_cast<double>(xs.size()) - 2;
    StatTestResult out;
    out.statistic = r;
    out.df = df;
    if (std::fabs(r) == 1.0) {
        out.p_value = 0;
        out.degenerate = true;
    } else {
        const double t = r * std::sqrt(df / (1 - r * r));
        out.p_value = dist::student_t_two_tailed(t, df);
    }
    return out;
}

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::TooFewPoints, "cohens_d needs at least 2 values per group");
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1) * variance_of(a, ma) + (nb - 1) * variance_of(b, mb)) / (na + nb - 2));
    if (pooled == 0) throw Error(ErrorKind::ZeroPooledVariance, "cohens_d: pooled standard deviation is zero");
    return (ma - mb) / pooled;
}

std::vector<CurveRow> learning_curve(const std::vector<TaskResponse>& responses, const GoldMap& gold) {
    struct Counts {
        std::size_t correct = 0;
        std::size_t total = 0;
    };
    struct User {
        ConditionOrder order;
        Expertise expertise;
        std::array<Counts, 2> halves;
    };
    std::map<std::string, User> users;
    for (const auto& r : responses) {
        auto [it, fresh] = users.try_emplace(r.participant_id, User{r.order, r.expertise, {}});
        (void)fresh;
        if (!countable(r.answer)) continue;
        auto& c = it->second.halves[r.half == Half::First ? 0 : 1];
        ++c.total;
        c.correct += is_correct(r, gold);
    }
    std::vector<CurveRow> rows;
    for (ConditionOrder order : {ConditionOrder::AssistedFirst, ConditionOrder::UnassistedFirst}) {
        for (std::optional<Expertise> ex : {std::optional<Expertise>(), std::optional<Expertise>(Expertise::Expert),
                                            std::optional<Expertise>(Expertise::NonExpert)}) {
            CurveRow row;
            row.order = order;
            row.expertise = ex;
            row.first_condition = order == ConditionOrder::AssistedFirst ? Condition::Assisted : Condition::Unassisted;
            row.second_condition = order == ConditionOrder::AssistedFirst ? Condition::Unassisted : Condition::Assisted;
            std::vector<double> first, second;
            std::vector<std::pair<double, double>> pairs;
            for (const auto& [id, u] : users) {
                if (u.order != order || (ex && u.expertise != *ex)) continue;
                ++row.users;
                std::optional<double> a, b;
                if (u.halves[0].total) a = static_cast<double>(u.halves[0].correct) / static_cast<double>(u.halves[0].total);
                if (u.halves[1].total) b = static_cast<double>(u.halves[1].correct) / static_cast<double>(u.halves[1].total);
                if (a) first.push_back(*a);
                if (b) second.push_back(*b);
                if (a && b) pairs.emplace_back(*a, *b);
            }
            if (row.users == 0) continue;
            if (!first.empty()) row.first_accuracy = mean_of(first);
            if (!second.empty()) row.second_accuracy = mean_of(second);
            if (row.first_accuracy && row.second_accuracy) row.delta = *row.second_accuracy - *row.first_accuracy;
            if (pairs.size() >= 2) row.paired = paired_t_test(pairs);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string format_delta(double from, double to) {
    const double points = (to - from) * 100.0;
    std::ostringstream out;
    const long rounded = std::lround(points);
    out << (rounded > 0 ? "+" : rounded < 0 ? "-" : "") << std::labs(rounded) << "% (from " << std::fixed
        << std::setprecision(2) << from * 100.0 << "% to " << to * 100.0 << "%)";
    return out.str();
}

json to_json(const StatTestResult& r) {
    auto num = [](double v) -> json {
        if (std::isfinite(v)) return v;
        return v > 0 ? "inf" : v < 0 ? "-inf" : "nan";
    };
    json j = {{"statistic", num(r.statistic)}, {"p_value", r.p_value}};
    if (r.df) j["df"] = *r.df;
    if (r.effect_size) j["effect_size"] = *r.effect_size;
    if (r.degenerate) j["degenerate"] = true;
    return j;
}

json to_json(const AccuracySummary& s) {
    json per_user = json::array();
    for (const auto& [key, u] : s.per_user) {
        json e = {{"participant_id", key.first},
                  {"condition", to_string(key.second)},
                  {"correct", u.correct},
                  {"incorrect", u.incorrect},
                  {"idk", u.idk},
                  {"skipped", u.skipped}};
        e["accuracy"] = u.accuracy ? json(*u.accuracy) : json(nullptr);
        per_user.push_back(e);
    }
    json means = json::object();
    for (const auto& [c, m] : s.condition_means) means[to_string(c)] = m;
    json stds = json::object();
    for (const auto& [c, sd] : s.condition_stds) stds[to_string(c)] = sd ? json(*sd) : json(nullptr);
    json flagged = json::array();
    for (const auto& [p, c] : s.flagged) {
        flagged.push_back({{"participant_id", p}, {"condition", to_string(c)}, {"error", "NoCountableAnswers"}});
    }
    json j = {{"n_users", s.n_users}, {"condition_means", means}, {"condition_stds", stds},
              {"per_user", per_user}, {"flagged", flagged}};
    j["delta"] = s.delta ? json(*s.delta) : json(nullptr);
    if (s.delta) {
        j["delta_text"] = format_delta(s.condition_means.at(Condition::Unassisted), s.condition_means.at(Condition::Assisted));
    }
    return j;
}

}  // namespace cqv
