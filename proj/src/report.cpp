// Study report assembly and its text rendering.

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "cqv/analysis.hpp"
#include "cqv/error.hpp"

namespace cqv {

using nlohmann::json;

namespace {

json error_json(const Error& e) { return {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}; }

/// Runs `f`, turning a domain error into an {"error", "message"} object.
template <typename F>
json guarded(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        return error_json(e);
    }
}

std::vector<std::pair<double, double>> user_pairs(const AccuracySummary& s) {
    std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> by_user;
    for (const auto& [key, u] : s.per_user) {
        auto& slot = by_user[key.first];
        (key.second == Condition::Unassisted ? slot.first : slot.second) = u.accuracy;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [id, p] : by_user) {
        if (p.first && p.second) pairs.emplace_back(*p.first, *p.second);
    }
    return pairs;
}

Table2x2 condition_by_correctness(const std::vector<TaskResponse>& rs, const GoldMap& gold) {
    // Rows: assisted, unassisted. Columns: correct, incorrect.
    Table2x2 t{};
    for (const auto& r : rs) {
        if (r.answer != Answer::Yes && r.answer != Answer::No) continue;
        const bool ok = (r.answer == Answer::Yes) == (gold.at(r.record_id) == BinaryLabel::Yes);
        t[r.condition == Condition::Assisted ? 0 : 1][ok ? 0 : 1] += 1;
    }
    return t;
}

json accuracy_block(const std::vector<TaskResponse>& rs, const GoldMap& gold) {
    json j;
    auto summary = user_accuracy(rs, gold);
    j["accuracy"] = to_json(summary);
    j["paired_t"] = guarded([&] { return to_json(paired_t_test(user_pairs(summary))); });
    j["chi_square"] = guarded([&] {
        auto t = condition_by_correctness(rs, gold);
        json out = to_json(chi_square_2x2(t));
        out["table"] = {{"assisted", {{"correct", t[0][0]}, {"incorrect", t[0][1]}}},
                        {"unassisted", {{"correct", t[1][0]}, {"incorrect", t[1][1]}}}};
        return out;
    });
    j["responses"] = rs.size();
    return j;
}

json mean_sd(const std::vector<double>& xs) {
    if (xs.empty()) return nullptr;
    double m = 0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    json j = {{"n", xs.size()}, {"mean", m}};
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - m) * (x - m);
        j["sd"] = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return j;
}

}  // namespace

json build_report(const ReportInputs& in) {
    if (!in.corpus) throw Error(ErrorKind::InvalidArgument, "report needs the corpus manifest");
    const GoldMap gold = gold_map(*in.corpus);
    for (const auto& r : in.responses) {
        if (!gold.count(r.record_id)) throw Error(ErrorKind::InvalidArgument, "response for unknown record '" + r.record_id + "'");
    }
    json report;
    std::map<std::string, std::size_t> answers = {{"yes", 0}, {"no", 0}, {"idk", 0}, {"skipped", 0}};
    std::set<std::string> users;
    for (const auto& r : in.responses) {
        ++answers[to_string(r.answer)];
        users.insert(r.participant_id);
    }
    report["participants"] = users.size();
    report["responses"] = in.responses.size();
    report["answers"] = answers;
    report["overall"] = accuracy_block(in.responses, gold);

    if (in.suggestion_labels) {
        report["by_suggestion"] = guarded([&] {
            auto split = split_by_suggestion_correctness(in.responses, *in.suggestion_labels, gold);
            json j;
            j["correct"] = accuracy_block(split.correct, gold);
            j["incorrect"] = accuracy_block(split.incorrect, gold);
            return j;
        });
    }

    // Difficulty ratings.
    {
        json d;
        std::map<Condition, std::vector<double>> by_condition;
        std::map<Answer, std::vector<double>> by_answer;
        std::map<std::string, std::map<Condition, std::vector<double>>> by_cq;
        for (const auto& r : in.responses) {
            if (!r.difficulty) continue;
            const double x = *r.difficulty;
            by_condition[r.condition].push_back(x);
            by_answer[r.answer].push_back(x);
            by_cq[r.record_id][r.condition].push_back(x);
        }
        json cond = json::object();
        for (const auto& [c, xs] : by_condition) cond[to_string(c)] = mean_sd(xs);
        d["by_condition"] = cond;
        json ans = json::object();
        for (const auto& [a, xs] : by_answer) ans[to_string(a)] = mean_sd(xs);
        d["by_answer"] = ans;
        d["cohens_d_per_response"] = guarded([&] {
            return json(cohens_d(by_condition[Condition::Assisted], by_condition[Condition::Unassisted]));
        });
        d["cohens_d_per_cq"] = guarded([&] {
            std::vector<double> a, u;
            for (const auto& [id, m] : by_cq) {
                auto avg = [](const std::vector<double>& xs) {
                    double s = 0;
                    for (double x : xs) s += x;
                    return s / static_cast<double>(xs.size());
                };
                if (m.count(Condition::Assisted)) a.push_back(avg(m.at(Condition::Assisted)));
                if (m.count(Condition::Unassisted)) u.push_back(avg(m.at(Condition::Unassisted)));
            }
            return json(cohens_d(a, u));
        });
        // Per-CQ mean rating against per-CQ accuracy.
        d["rating_vs_accuracy"] = guarded([&] {
            std::map<std::string, std::vector<double>> ratings;
            std::map<std::string, std::pair<std::size_t, std::size_t>> acc;
            for (const auto& r : in.responses) {
                if (r.difficulty) ratings[r.record_id].push_back(*r.difficulty);
                if (r.answer == Answer::Yes || r.answer == Answer::No) {
                    auto& [c, n] = acc[r.record_id];
                    ++n;
                    c += (r.answer == Answer::Yes) == (gold.at(r.record_id) == BinaryLabel::Yes);
                }
            }
            std::vector<double> xs, ys;
            for (const auto& [id, rs] : ratings) {
                auto it = acc.find(id);
                if (it == acc.end()) continue;
                double s = 0;
                for (double x : rs) s += x;
                xs.push_back(s / static_cast<double>(rs.size()));
                ys.push_back(static_cast<double>(it->second.first) / static_cast<double>(it->second.second));
            }
            json out = to_json(pearson_r(xs, ys));
            out["n"] = xs.size();
            return out;
        });
        report["difficulty"] = d;
    }

    // Ontology size against the share of IDK answers per CQ.
    report["axiom_count_vs_idk_rate"] = guarded([&] {
        std::map<std::string, std::pair<std::size_t, std::size_t>> idk;  // (idk, total)
        for (const auto& r : in.responses) {
            auto& [k, n] = idk[r.record_id];
            ++n;
            k += r.answer == Answer::IDK;
        }
        std::vector<double> xs, ys;
        for (const auto& [id, c] : idk) {
            const auto* rec = in.corpus->find(id);
            xs.push_back(static_cast<double>(in.corpus->ontology_of(*rec).axiom_count));
            ys.push_back(static_cast<double>(c.first) / static_cast<double>(c.second));
        }
        json out = to_json(pearson_r(xs, ys));
        out["n"] = xs.size();
        return out;
    });

    json curve = json::array();
    for (const auto& row : learning_curve(in.responses, gold)) {
        json j = {{"condition_order", to_string(row.order)},
                  {"expertise", row.expertise ? to_string(*row.expertise) : "all"},
                  {"first_condition", to_string(row.first_condition)},
                  {"second_condition", to_string(row.second_condition)},
                  {"users", row.users}};
        j["first_accuracy"] = row.first_accuracy ? json(*row.first_accuracy) : json(nullptr);
        j["second_accuracy"] = row.second_accuracy ? json(*row.second_accuracy) : json(nullptr);
        j["delta"] = row.delta ? json(*row.delta) : json(nullptr);
        if (row.paired) j["paired_t"] = to_json(*row.paired);
        curve.push_back(j);
    }
    report["learning_curve"] = curve;

    std::vector<double> sus;
    for (const auto& s : in.surveys) sus.push_back(s.score);
    report["sus"] = mean_sd(sus);
    return report;
}

namespace {

std::string pct(const json& v) {
    if (!v.is_number()) return "n/a";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v.get<double>() * 100.0 << "%";
    return out.str();
}

std::string num(const json& v, int digits = 3) {
    if (v.is_string()) return v.get<std::string>();
    if (!v.is_number()) return "n/a";
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v.get<double>();
    return out.str();
}

std::string test_line(const json& t, const std::string& stat_name) {
    if (t.contains("error")) return "not computable (" + t.at("error").get<std::string>() + ")";
    std::string s = stat_name + " = " + num(t.at("statistic")) + ", p = " + num(t.at("p_value"), 4);
    if (t.contains("df")) s += ", df = " + num(t.at("df"), 0);
    if (t.contains("effect_size")) s += ", effect = " + num(t.at("effect_size"));
    if (t.value("degenerate", false)) s += " (degenerate)";
    return s;
}

void render_block(std::ostream& out, const json& b, const std::string& indent) {
    const auto& acc = b.at("accuracy");
    const auto& means = acc.at("condition_means");
    out << indent << "Accuracy: assisted " << pct(means.value("assisted", json())) << ", unassisted "
        << pct(means.value("unassisted", json()));
    if (acc.contains("delta_text")) out << " -> " << acc.at("delta_text").get<std::string>();
    out << "\n";
    if (!acc.at("flagged").empty()) {
        out << indent << "  excluded (no countable answers): " << acc.at("flagged").size() << " user-condition pair(s)\n";
    }
    out << indent << "Paired t-test (per user): " << test_line(b.at("paired_t"), "t") << "\n";
    out << indent << "Chi-square (per answer): " << test_line(b.at("chi_square"), "chi2") << "\n";
}

}  // namespace

std::string render_report(const json& r) {
    std::ostringstream out;
    const auto& a = r.at("answers");
    out << "Participants: " << r.at("participants").get<std::size_t>() << "  responses: " << r.at("responses").get<std::size_t>()
        << " (yes " << a.at("yes").get<std::size_t>() << ", no " << a.at("no").get<std::size_t>() << ", idk "
        << a.at("idk").get<std::size_t>() << ", skipped " << a.at("skipped").get<std::size_t>() << ")\n\n";
    out << "Overall\n";
    render_block(out, r.at("overall"), "  ");
    if (r.contains("by_suggestion")) {
        const auto& s = r.at("by_suggestion");
        if (s.contains("error")) {
            out << "\nSplit by suggestion correctness: " << s.at("message").get<std::string>() << "\n";
        } else {
            out << "\nSuggestion correct\n";
            render_block(out, s.at("correct"), "  ");
            out << "\nSuggestion incorrect\n";
            render_block(out, s.at("incorrect"), "  ");
        }
    }
    const auto& d = r.at("difficulty");
    out << "\nDifficulty ratings (1-5)\n";
    for (const auto& [k, v] : d.at("by_condition").items()) {
        if (v.is_null()) continue;
        out << "  " << k << ": mean " << num(v.at("mean"), 2);
        if (v.contains("sd")) out << " (sd " << num(v.at("sd"), 2) << ")";
        out << ", n = " << v.at("n").get<std::size_t>() << "\n";
    }
    for (const auto& [k, v] : d.at("by_answer").items()) {
        if (v.is_null()) continue;
        out << "  answer " << k << ": mean " << num(v.at("mean"), 2) << ", n = " << v.at("n").get<std::size_t>() << "\n";
    }
    auto d_line = [&](const char* label, const json& v) {
        out << "  Cohen's d " << label << ": " << (v.is_number() ? num(v) : "not computable (" + v.value("error", std::string("?")) + ")")
            << "\n";
    };
    d_line("per response", d.at("cohens_d_per_response"));
    d_line("per CQ", d.at("cohens_d_per_cq"));
    out << "  Pearson (CQ rating vs accuracy): " << test_line(d.at("rating_vs_accuracy"), "r") << "\n";
    out << "\nAxiom count vs IDK rate: " << test_line(r.at("axiom_count_vs_idk_rate"), "r") << "\n";

    out << "\nLearning curve (mean per-user accuracy by half)\n";
    for (const auto& row : r.at("learning_curve")) {
        out << "  " << std::left << std::setw(17) << row.at("condition_order").get<std::string>() << std::setw(11)
            << row.at("expertise").get<std::string>() << "users " << std::setw(4) << row.at("users").get<std::size_t>()
            << "first " << std::setw(8) << pct(row.at("first_accuracy")) << "second " << std::setw(8)
            << pct(row.at("second_accuracy")) << "delta ";
        if (row.at("delta").is_number()) {
            double dv = row.at("delta").get<double>();
            out << (dv >= 0 ? "+" : "") << num(dv, 2);
        } else {
            out << "n/a";
        }
        out << "\n";
    }
    const auto& sus = r.at("sus");
    out << "\nSUS: ";
    if (sus.is_null()) {
        out << "no surveys\n";
    } else {
        out << "mean " << num(sus.at("mean"), 1);
        if (sus.contains("sd")) out << " (sd " << num(sus.at("sd"), 1) << ")";
        out << ", n = " << sus.at("n").get<std::size_t>() << "\n";
    }
    return out.str();
}

}  // namespace cqv
