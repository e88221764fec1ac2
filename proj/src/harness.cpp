#include "cqv/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "cqv/error.hpp"

namespace cqv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t index_of(BinaryLabel l) { return l == BinaryLabel::Yes ? 0 : 1; }

double f1(double tp, double fp, double fn) {
    double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string fixed2(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}

}  // namespace

std::vector<Prediction> predictions_from(const JudgeRun& run) {
    std::vector<Prediction> out;
    out.reserve(run.results.size());
    for (const auto& r : run.results) {
        Prediction p;
        p.record_id = r.record_id;
        p.run_index = run.run_index;
        if (const auto* s = r.suggestion()) {
            p.label = s->label;
        } else {
            const auto* f = r.failure();
            p.failure = std::string(to_string(f->kind)) + ": " + f->message;
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::string run_file_text(const std::vector<Prediction>& preds) {
    std::string text;
    for (const auto& p : preds) {
        json j = {{"record_id", p.record_id}, {"run", p.run_index}};
        if (p.label) {
            j["label"] = to_string(*p.label);
        } else {
            j["failure"] = p.failure.empty() ? "failure" : p.failure;
        }
        text += j.dump();
        text += '\n';
    }
    return text;
}

void write_run_file(const fs::path& path, const std::vector<Prediction>& preds) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write run file " + path.string());
    out << run_file_text(preds);
}

std::vector<Prediction> read_run_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read run file " + path.string());
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(ErrorKind::ParseError, std::string("run file: ") + e.what(), line_no, 0);
        }
        Prediction p;
        try {
            p.record_id = j.at("record_id").get<std::string>();
            p.run_index = j.value("run", 1);
            if (j.contains("label")) {
                auto label = parse_binary_label(j.at("label").get<std::string>());
                if (!label) throw ParseError(ErrorKind::ParseError, "run file: invalid label", line_no, 0);
                p.label = label;
            } else if (j.contains("failure")) {
                p.failure = j.at("failure").get<std::string>();
            } else {
                throw ParseError(ErrorKind::ParseError, "run file: entry needs 'label' or 'failure'", line_no, 0);
            }
        } catch (const json::exception& e) {
            throw ParseError(ErrorKind::ParseError, std::string("run file: ") + e.what(), line_no, 0);
        }
        out.push_back(std::move(p));
    }
    return out;
}

MetricsReport metrics_from_confusion(const Confusion& c) {
    MetricsReport r;
    r.confusion = c;
    r.n = c[0][0] + c[0][1] + c[1][0] + c[1][1];
    const double yy = static_cast<double>(c[0][0]);
    const double yn = static_cast<double>(c[0][1]);
    const double ny = static_cast<double>(c[1][0]);
    const double nn = static_cast<double>(c[1][1]);
    r.accuracy = r.n ? (yy + nn) / static_cast<double>(r.n) : 0.0;
    r.f1_yes = f1(yy, ny, yn);
    r.f1_no = f1(nn, yn, ny);
    r.macro_f1 = (r.f1_yes + r.f1_no) / 2;
    return r;
}

MetricsReport score_labels(const std::vector<BinaryLabel>& gold, const std::vector<std::optional<BinaryLabel>>& predicted) {
    if (gold.size() != predicted.size()) throw Error(ErrorKind::InvalidArgument, "gold/prediction length mismatch");
    Confusion c{};
    std::size_t failures = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::size_t g = index_of(gold[i]);
        if (predicted[i]) {
            ++c[g][index_of(*predicted[i])];
        } else {
            ++failures;
            ++c[g][1 - g];
        }
    }
    auto r = metrics_from_confusion(c);
    r.failures = failures;
    return r;
}

namespace {

/// Prediction per record id for one run, validated against the corpus.
std::map<std::string, const Prediction*> index_predictions(const std::vector<Prediction>& preds, const Corpus& corpus) {
    std::map<std::string, const Prediction*> by_id;
    for (const auto& p : preds) {
        if (!corpus.find(p.record_id)) {
            throw Error(ErrorKind::InvalidArgument, "prediction for unknown record '" + p.record_id + "'");
        }
        if (!by_id.emplace(p.record_id, &p).second) {
            throw Error(ErrorKind::InvalidArgument, "duplicate prediction for record '" + p.record_id + "'");
        }
    }
    return by_id;
}

MetricsReport score_subset(const std::map<std::string, const Prediction*>& by_id,
                           const std::vector<const CQRecord*>& records) {
    std::vector<BinaryLabel> gold;
    std::vector<std::optional<BinaryLabel>> predicted;
    for (const auto* rec : records) {
        auto it = by_id.find(rec->id);
        if (it == by_id.end()) throw Error(ErrorKind::MissingPrediction, "no prediction for record '" + rec->id + "'");
        gold.push_back(rec->normalized_gold());
        predicted.push_back(it->second->label);
    }
    return score_labels(gold, predicted);
}

std::string group_key(const CQRecord& r, Grouping g) { return g == Grouping::Source ? to_string(r.source) : r.project; }

}  // namespace

std::map<std::string, MetricsReport> breakdown(const std::vector<Prediction>& preds, const Corpus& corpus,
                                               Grouping grouping) {
    auto by_id = index_predictions(preds, corpus);
    std::map<std::string, std::vector<const CQRecord*>> groups;
    for (const auto& r : corpus.records) groups[group_key(r, grouping)].push_back(&r);
    std::map<std::string, MetricsReport> out;
    for (const auto& [key, members] : groups) out.emplace(key, score_subset(by_id, members));
    return out;
}

MetricsReport score_run(const std::vector<Prediction>& preds, const Corpus& corpus) {
    auto by_id = index_predictions(preds, corpus);
    std::vector<const CQRecord*> all;
    for (const auto& r : corpus.records) all.push_back(&r);
    MetricsReport report = score_subset(by_id, all);
    for (const auto& [key, sub] : breakdown(preds, corpus, Grouping::Source)) {
        report.breakdowns[key] = GroupScore{sub.n, sub.macro_f1, sub.accuracy};
    }
    return report;
}

std::map<int, std::vector<Prediction>> split_runs(const std::vector<Prediction>& preds) {
    std::map<int, std::vector<Prediction>> out;
    for (const auto& p : preds) out[p.run_index].push_back(p);
    return out;
}

Aggregate aggregate_runs(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw Error(ErrorKind::EmptyInput, "no reports to aggregate");
    std::map<std::string, std::vector<double>> samples;
    for (const auto& r : reports) {
        samples["accuracy"].push_back(r.accuracy);
        samples["macro_f1"].push_back(r.macro_f1);
        samples["f1_yes"].push_back(r.f1_yes);
        samples["f1_no"].push_back(r.f1_no);
        for (const auto& [group, g] : r.breakdowns) {
            samples[group + ".accuracy"].push_back(g.accuracy);
            samples[group + ".macro_f1"].push_back(g.macro_f1);
        }
    }
    Aggregate a;
    a.runs = reports.size();
    for (const auto& [name, xs] : samples) {
        MeanStd m;
        double sum = 0;
        for (double x : xs) sum += x;
        m.mean = sum / static_cast<double>(xs.size());
        if (xs.size() > 1) {
            double ss = 0;
            for (double x : xs) ss += (x - m.mean) * (x - m.mean);
            m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        }
        a.metrics[name] = m;
    }
    return a;
}

std::string format_mean_std(const MeanStd& m) {
    std::string s = fixed2(m.mean);
    if (m.std) s += " ± " + fixed2(*m.std);
    return s;
}

BaselineReport random_baseline(const std::vector<BinaryLabel>& gold, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    if (gold.empty()) throw Error(ErrorKind::EmptyInput, "baseline needs at least one record");
    BaselineReport b;
    b.n = gold.size();
    b.trials = trials;
    b.seed = seed;

    std::size_t yes = 0;
    for (auto g : gold) yes += g == BinaryLabel::Yes;
    const double p_yes = static_cast<double>(yes) / static_cast<double>(gold.size());
    const double p_no = 1.0 - p_yes;
    b.closed_form.accuracy = 0.5;
    b.closed_form.f1_yes = p_yes / (p_yes + 0.5);
    b.closed_form.f1_no = p_no / (p_no + 0.5);
    b.closed_form.macro_f1 = (b.closed_form.f1_yes + b.closed_form.f1_no) / 2;

    std::vector<std::optional<BinaryLabel>> predicted(gold.size());
    ExpectedScores sum;
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(t)));
        std::bernoulli_distribution coin(0.5);
        for (auto& p : predicted) p = coin(rng) ? BinaryLabel::Yes : BinaryLabel::No;
        auto r = score_labels(gold, predicted);
        sum.accuracy += r.accuracy;
        sum.f1_yes += r.f1_yes;
        sum.f1_no += r.f1_no;
        sum.macro_f1 += r.macro_f1;
    }
    const double k = static_cast<double>(trials);
    b.monte_carlo = {sum.accuracy / k, sum.f1_yes / k, sum.f1_no / k, sum.macro_f1 / k};
    return b;
}

BaselineReport random_baseline(const Corpus& corpus, std::size_t trials, std::uint64_t seed) {
    std::vector<BinaryLabel> gold;
    for (const auto& r : corpus.records) gold.push_back(r.normalized_gold());
    return random_baseline(gold, trials, seed);
}

json to_json(const MetricsReport& r) {
    json j = {
        {"n", r.n},
        {"accuracy", r.accuracy},
        {"macro_f1", r.macro_f1},
        {"per_class_f1", {{"yes", r.f1_yes}, {"no", r.f1_no}}},
        {"confusion",
         {{"gold_yes", {{"pred_yes", r.confusion[0][0]}, {"pred_no", r.confusion[0][1]}}},
          {"gold_no", {{"pred_yes", r.confusion[1][0]}, {"pred_no", r.confusion[1][1]}}}}},
        {"failures", r.failures},
    };
    json groups = json::object();
    for (const auto& [name, g] : r.breakdowns) {
        groups[name] = {{"n", g.n}, {"macro_f1", g.macro_f1}, {"accuracy", g.accuracy}};
    }
    j["breakdowns"] = groups;
    return j;
}

json to_json(const Aggregate& a) {
    json metrics = json::object();
    for (const auto& [name, m] : a.metrics) {
        metrics[name] = {{"mean", m.mean}};
        if (m.std) metrics[name]["std"] = *m.std;
    }
    return {{"runs", a.runs}, {"metrics", metrics}};
}

json to_json(const BaselineReport& b) {
    auto scores = [](const ExpectedScores& s) {
        return json{{"accuracy", s.accuracy}, {"f1_yes", s.f1_yes}, {"f1_no", s.f1_no}, {"macro_f1", s.macro_f1}};
    };
    return {{"n", b.n},
            {"trials", b.trials},
            {"seed", b.seed},
            {"closed_form", scores(b.closed_form)},
            {"monte_carlo", scores(b.monte_carlo)}};
}

std::string render_table(const std::vector<TableRow>& rows) {
    struct Column {
        std::string title;
        std::string prefix;
    };
    const std::vector<Column> columns = {{"Human curated", "human."}, {"LLM generated", "llm."}, {"All", ""}};
    std::size_t name_width = 5;
    for (const auto& r : rows) name_width = std::max(name_width, r.name.size());
    const int cell = 13;

    auto cell_text = [&](const Aggregate& a, const std::string& key) -> std::string {
        auto it = a.metrics.find(key);
        return it == a.metrics.end() ? "-" : format_mean_std(it->second);
    };
    // "±" is two bytes but one column; pad by display width.
    auto pad = [](const std::string& s, int width) {
        int shown = 0;
        for (unsigned char c : s) shown += (c & 0xC0) != 0x80;
        return s + std::string(static_cast<std::size_t>(std::max(0, width - shown)), ' ');
    };

    std::ostringstream out;
    out << pad("Model", static_cast<int>(name_width));
    for (const auto& c : columns) out << " | " << pad(c.title, 2 * cell + 1);
    out << "\n" << std::string(name_width, ' ');
    for (std::size_t i = 0; i < columns.size(); ++i) out << " | " << pad("Macro-F1", cell) << " " << pad("Accuracy", cell);
    out << "\n";
    for (const auto& r : rows) {
        out << pad(r.name, static_cast<int>(name_width));
        for (const auto& c : columns) {
            out << " | " << pad(cell_text(r.aggregate, c.prefix + "macro_f1"), cell) << " "
                << pad(cell_text(r.aggregate, c.prefix + "accuracy"), cell);
        }
        out << "\n";
    }
    return out.str();
}

std::string render_baseline(const BaselineReport& b) {
    std::ostringstream out;
    out << "Random baseline over " << b.n << " records (" << b.trials << " trials, seed " << b.seed << ")\n"
        << "  closed form:  Macro-F1 " << fixed2(b.closed_form.macro_f1) << "  Accuracy "
        << fixed2(b.closed_form.accuracy) << "  (F1 yes " << std::setprecision(4) << std::fixed
        << b.closed_form.f1_yes << ", no " << b.closed_form.f1_no << ", macro " << b.closed_form.macro_f1 << ")\n"
        << "  Monte Carlo:  Macro-F1 " << fixed2(b.monte_carlo.macro_f1) << "  Accuracy "
        << fixed2(b.monte_carlo.accuracy) << "  (macro " << std::setprecision(4) << b.monte_carlo.macro_f1
        << ", |MC - closed form| = " << std::abs(b.monte_carlo.macro_f1 - b.closed_form.macro_f1) << ")\n";
    return out.str();
}

}  // namespace cqv
