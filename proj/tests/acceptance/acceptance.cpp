// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cqv/analysis.hpp"
#include "cqv/backend.hpp"
#include "cqv/cli.hpp"
#include "cqv/corpus.hpp"
#include "cqv/difficulty.hpp"
#include "cqv/harness.hpp"
#include "cqv/judge.hpp"
#include "cqv/sparql.hpp"
#include "cqv/study.hpp"
#include "cqv/verify.hpp"

namespace fs = std::filesystem;
using namespace cqv;
using Stopwatch = std::chrono::steady_clock;

namespace {

const fs::path kData = CQV_TEST_DATA;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Accumulates sub-check failures for one criterion.
class Checker {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (failures_++ < 3) detail_ << (detail_.tellp() ? "; " : "") << what;
        }
    }
    void note(const std::string& s) { notes_ << (notes_.tellp() ? ", " : "") << s; }
    Outcome outcome() const {
        if (pass_) return {true, notes_.str()};
        return {false, detail_.str() + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "")};
    }

private:
    bool pass_ = true;
    int failures_ = 0;
    std::ostringstream detail_;
    std::ostringstream notes_;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

double seconds_since(Stopwatch::time_point t0) { return std::chrono::duration<double>(Stopwatch::now() - t0).count(); }

class ScratchDir {
public:
    ScratchDir() {
        path_ = fs::temp_directory_path() / ("cqv-acceptance-" + std::to_string(std::random_device{}()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path operator/(const std::string& n) const { return path_ / n; }

private:
    fs::path path_;
};

Corpus synthetic_corpus(std::size_t yes, std::size_t no, std::size_t no_minor = 0) {
    Corpus c;
    c.ontologies.emplace("o", make_ontology("o", rdf::parse_turtle("<http://x/A> a <http://www.w3.org/2002/07/owl#Class> .")));
    auto add = [&](GoldLabel g, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            CQRecord r;
            r.id = "s" + std::to_string(c.records.size());
            r.cq_text = "Is question " + r.id + " modelled?";
            r.story_text = "Synthetic story.";
            r.ontology_ref = "o";
            r.gold = g;
            r.source = c.records.size() % 2 ? Source::LLMGenerated : Source::HumanCurated;
            if (r.source == Source::LLMGenerated) r.generator_model = "g";
            r.project = "p" + std::to_string(c.records.size() % 33);
            c.records.push_back(r);
        }
    };
    add(GoldLabel::Yes, yes);
    add(GoldLabel::No, no);
    add(GoldLabel::NoMinor, no_minor);
    return c;
}

std::vector<BinaryLabel> gold_labels(std::size_t yes, std::size_t no) {
    std::vector<BinaryLabel> g(yes, BinaryLabel::Yes);
    g.insert(g.end(), no, BinaryLabel::No);
    return g;
}

// ---------------------------------------------------------------------------

Outcome random_baseline_reproduction() {
    Checker ck;
    auto t0 = Stopwatch::now();
    auto b = random_baseline(gold_labels(1204, 189), 10000, 1);
    const double secs = seconds_since(t0);
    // Oracle: with uniform guessing, precision of a class equals its prevalence and recall is 1/2.
    const double p_yes = 1204.0 / 1393.0;
    const double oracle = (p_yes / (p_yes + 0.5) + (1 - p_yes) / (1 - p_yes + 0.5)) / 2;
    ck.expect(std::abs(b.closed_form.macro_f1 - oracle) < 1e-12, "closed form disagrees with the oracle formula");
    // The target is quoted to three decimals; allow one unit in the last place.
    ck.expect(std::abs(b.closed_form.macro_f1 - 0.424) <= 0.001, "closed-form macro-F1 " + fmt(b.closed_form.macro_f1));
    ck.expect(std::abs(b.monte_carlo.macro_f1 - b.closed_form.macro_f1) <= 0.02,
              "Monte-Carlo macro-F1 " + fmt(b.monte_carlo.macro_f1) + " too far from closed form");
    // Published random-baseline band for the full corpus.
    ck.expect(b.closed_form.macro_f1 >= 0.41 - 0.005 && b.closed_form.macro_f1 <= 0.43 + 0.005, "outside the 0.41-0.43 band");
    auto balanced = random_baseline(gold_labels(10, 10), 10000, 1);
    ck.expect(std::abs(balanced.closed_form.accuracy - 0.50) < 1e-12, "balanced closed-form accuracy");
    ck.expect(std::abs(balanced.monte_carlo.accuracy - 0.50) < 0.01, "balanced Monte-Carlo accuracy " + fmt(balanced.monte_carlo.accuracy));
    ck.expect(secs < 10, "runtime " + fmt(secs, 2) + " s");
    ck.note("closed form " + fmt(b.closed_form.macro_f1) + ", MC " + fmt(b.monte_carlo.macro_f1) + ", balanced Acc " +
            fmt(balanced.monte_carlo.accuracy, 2) + ", " + fmt(secs, 2) + " s");
    std::cout << "NOTE  balanced 20-item macro-F1 derives to " << fmt(balanced.closed_form.macro_f1, 2) << " (closed form) / "
              << fmt(balanced.monte_carlo.macro_f1, 2)
              << " (Monte Carlo), not the published 0.42; 0.42 matches the imbalanced full-corpus value\n";
    return ck.outcome();
}

Outcome perfect_oracle() {
    Checker ck;
    auto t0 = Stopwatch::now();
    std::vector<Corpus> corpora;
    corpora.push_back(load_corpus(kData / "small.json"));
    corpora.push_back(synthetic_corpus(120, 30, 50));
    for (const auto& c : corpora) {
        auto backend = std::make_shared<StubBackend>([&c](const CompletionRequest& req) {
            return render_completion({c.find(req.record_id)->normalized_gold(), "ASK { ?s ?p ?o }", false, ""});
        });
        CompletionClient client(backend, ModelConfig{});
        JudgeRunOptions opts;
        opts.jobs = 4;
        auto batch = run_judge(c, JudgeContext{}, client, opts);
        auto m = score_run(predictions_from(batch.runs.front()), c);
        ck.expect(m.macro_f1 == 1.0 && m.accuracy == 1.0,
                  "corpus of " + std::to_string(c.records.size()) + ": macro-F1 " + fmt(m.macro_f1) + ", accuracy " + fmt(m.accuracy));
    }
    const double secs = seconds_since(t0);
    ck.expect(secs < 1.0, "runtime " + fmt(secs, 2) + " s");
    ck.note("macro-F1 1.0 and accuracy 1.0 on 20 and 200 records, " + fmt(secs, 3) + " s");
    return ck.outcome();
}

Outcome fixture_replay() {
    Checker ck;
    ScratchDir tmp;
    const std::string manifest = (kData / "small.json").string();
    Corpus c = load_corpus(manifest);

    // Record a 20-record fixture set whose labels match gold on exactly 15 records.
    std::set<std::string> wrong;
    for (std::size_t i = 0; i < c.records.size(); i += 4) wrong.insert(c.records[i].id);
    auto responder = std::make_shared<StubBackend>([&](const CompletionRequest& req) {
        BinaryLabel g = c.find(req.record_id)->normalized_gold();
        if (wrong.count(req.record_id)) g = g == BinaryLabel::Yes ? BinaryLabel::No : BinaryLabel::Yes;
        return render_completion({g, "ASK { ?s ?p ?o }", false, ""});
    });
    auto recorder = std::make_shared<RecordingBackend>(responder, tmp / "fixtures");
    CompletionClient client(recorder, ModelConfig{});
    run_judge(c, JudgeContext{}, client, JudgeRunOptions{});
    ck.expect(wrong.size() == 5, "fixture set should carry 5 wrong labels");

    std::vector<std::string> score_outputs;
    std::vector<std::string> run_files;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::ostringstream out, err;
        const std::string run = (tmp / ("run" + std::to_string(attempt) + ".jsonl")).string();
        int code = cli::run({"judge", "--corpus", manifest, "--out", run, "--backend", "replay", "--fixtures",
                             (tmp / "fixtures").string(), "--quiet", "--jobs", attempt ? "4" : "1"},
                            out, err);
        ck.expect(code == 0, "judge exited " + std::to_string(code) + ": " + err.str());
        std::ostringstream sout, serr;
        code = cli::run({"score", "--run", run, "--corpus", manifest}, sout, serr);
        ck.expect(code == 0, "score exited " + std::to_string(code));
        score_outputs.push_back(sout.str());
        std::ifstream in(run, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        run_files.push_back(buf.str());
        auto m = score_run(read_run_file(run), c);
        ck.expect(m.accuracy == 0.75, "accuracy " + fmt(m.accuracy));
    }
    ck.expect(score_outputs[0].find("Accuracy 0.75") != std::string::npos, "score output does not report Accuracy 0.75");
    ck.expect(score_outputs[0] == score_outputs[1], "score output differs between runs");
    ck.expect(run_files[0] == run_files[1], "run files differ between runs");
    ck.note("accuracy 0.75 (published 0.75), identical output on both replays");
    return ck.outcome();
}

Outcome difficulty_rule() {
    Checker ck;
    ck.expect(classify_difficulty({{"Person", "Organ"}, {{"built", "renovated"}}}) == Difficulty::Simple,
              "Person/Organ with built or renovated should be simple");
    ck.expect(classify_difficulty({{"Organ", "Parthood", "TimeInterval"}, {{"hasPart"}, {"validDuring"}}}) == Difficulty::Complex,
              "Organ/Parthood/TimeInterval with two slots should be complex");
    std::mt19937_64 rng(31);
    int agree = 0;
    for (int i = 0; i < 200; ++i) {
        CQFormalization f;
        const int nc = static_cast<int>(rng() % 6);
        for (int k = 0; k < nc; ++k) f.classes.insert("C" + std::to_string(rng() % 6));
        const int ns = static_cast<int>(rng() % 4);
        for (int s = 0; s < ns; ++s) {
            std::set<std::string> alts;
            for (int a = 0, na = 1 + static_cast<int>(rng() % 3); a < na; ++a) alts.insert("p" + std::to_string(rng() % 5));
            f.object_property_slots.push_back(alts);
        }
        // Reference: count by iteration rather than by container size.
        int classes = 0;
        for ([[maybe_unused]] const auto& cl : f.classes) ++classes;
        int slots = 0;
        for ([[maybe_unused]] const auto& sl : f.object_property_slots) ++slots;
        Difficulty expected = (classes <= 2 && slots <= 1) ? Difficulty::Simple : Difficulty::Complex;
        agree += classify_difficulty(f) == expected;
    }
    ck.expect(agree == 200, std::to_string(200 - agree) + " of 200 property cases disagree");
    ck.note("worked examples hold, 200/200 property cases agree");
    return ck.outcome();
}

Outcome gold_normalization() {
    Checker ck;
    std::size_t checked = 0, minor = 0;
    for (const Corpus& c : {load_corpus(kData / "small.json"), synthetic_corpus(1204, 100, 89)}) {
        for (const auto& r : c.records) {
            ++checked;
            BinaryLabel expected = r.gold == GoldLabel::Yes ? BinaryLabel::Yes : BinaryLabel::No;
            ck.expect(r.normalized_gold() == expected, "record " + r.id);
            if (r.gold == GoldLabel::NoMinor) ++minor;
        }
    }
    ck.note(std::to_string(checked) + " records, " + std::to_string(minor) + " no-minor mapped to No");
    return ck.outcome();
}

Outcome statistics_oracle() {
    Checker ck;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> z(0, 1);
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    auto var = [&](const std::vector<double>& v) {
        double m = mean(v), s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / (v.size() - 1);
    };
    double worst_stat = 0, worst_p = 0;
    auto compare = [&](double a, double b, double& worst) { worst = std::max(worst, std::abs(a - b)); };
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 4 + rng() % 30;
        std::vector<double> xs, ys, d;
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            double x = z(rng), y = 0.5 * x + z(rng) + 0.3;
            xs.push_back(x);
            ys.push_back(y);
            d.push_back(y - x);
            pairs.emplace_back(x, y);
        }
        // Paired t.
        double t_ref = mean(d) / std::sqrt(var(d) / n);
        boost::math::students_t tdist(n - 1.0);
        double p_ref = 2 * boost::math::cdf(boost::math::complement(tdist, std::abs(t_ref)));
        auto t = paired_t_test(pairs);
        compare(t.statistic, t_ref, worst_stat);
        compare(t.p_value, p_ref, worst_p);
        // Pearson.
        double mx = mean(xs), my = mean(ys), sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        double r_ref = sxy / std::sqrt(sxx * syy);
        boost::math::students_t rdist(n - 2.0);
        double rp_ref = 2 * boost::math::cdf(boost::math::complement(rdist, std::abs(r_ref * std::sqrt((n - 2.0) / (1 - r_ref * r_ref)))));
        auto r = pearson_r(xs, ys);
        compare(r.statistic, r_ref, worst_stat);
        compare(r.p_value, rp_ref, worst_p);
        // Cohen's d.
        double pooled = ((n - 1) * var(ys) + (n - 1) * var(xs)) / (2 * n - 2.0);
        compare(cohens_d(ys, xs), (mean(ys) - mean(xs)) / std::sqrt(pooled), worst_stat);
        // Chi-square 2x2.
        Table2x2 tab{{{1.0 + rng() % 40, 1.0 + rng() % 40}, {1.0 + rng() % 40, 1.0 + rng() % 40}}};
        double total = tab[0][0] + tab[0][1] + tab[1][0] + tab[1][1], chi_ref = 0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                double e = (tab[i][0] + tab[i][1]) * (tab[0][j] + tab[1][j]) / total;
                chi_ref += (tab[i][j] - e) * (tab[i][j] - e) / e;
            }
        }
        boost::math::chi_squared cdist(1.0);
        auto c = chi_square_2x2(tab);
        compare(c.statistic, chi_ref, worst_stat);
        compare(c.p_value, boost::math::cdf(boost::math::complement(cdist, chi_ref)), worst_p);
    }
    ck.expect(worst_stat <= 1e-9, "statistic deviation " + std::to_string(worst_stat));
    ck.expect(worst_p <= 1e-6, "p-value deviation " + std::to_string(worst_p));

    auto t0 = paired_t_test({{0.4, 0.4}, {0.6, 0.6}, {0.9, 0.9}});
    ck.expect(t0.statistic == 0.0 && t0.p_value == 1.0, "identical pairs should give t=0, p=1");
    auto c0 = chi_square_2x2({{{10, 20}, {5, 10}}});
    ck.expect(c0.statistic == 0.0 && c0.p_value == 1.0,
              "independent table should give chi2=0, p=1 (got " + std::to_string(c0.statistic) + ")");
    ck.expect(pearson_r({1, 2, 3, 4}, {-1, -2, -3, -4}).statistic == -1.0, "r should be -1");
    ck.expect(pearson_r({1, 2, 3, 4}, {2, 4, 6, 8}).statistic == 1.0, "r should be +1");
    ck.expect(cohens_d({1, 2, 3}, {3, 2, 1}) == 0.0, "equal means should give d=0");
    std::ostringstream s;
    s << std::scientific << std::setprecision(1) << "100 datasets, max |stat diff| " << worst_stat << ", max |p diff| " << worst_p;
    ck.note(s.str());
    return ck.outcome();
}

Outcome counterbalancing() {
    Checker ck;
    std::vector<std::string> records;
    for (int i = 0; i < 20; ++i) records.push_back("cq" + std::to_string(i));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        for (std::size_t n : {seed % 10 + 1, 19ul, 20ul}) {
            std::vector<Participant> ps;
            for (std::size_t i = 0; i < n; ++i) ps.push_back({"P" + std::to_string(i), Expertise::NonExpert});
            auto plans = build_assignment(ps, records, seed);
            std::map<std::string, int> balance;
            for (std::size_t i = 0; i < plans.size(); ++i) {
                ck.expect(plans[i].order == (i % 2 ? ConditionOrder::UnassistedFirst : ConditionOrder::AssistedFirst),
                          "order does not alternate (seed " + std::to_string(seed) + ")");
                for (const auto& t : plans[i].tasks) balance[t.record_id] += t.condition == Condition::Assisted ? 1 : -1;
            }
            for (const auto& [id, b] : balance) {
                if (n % 2 == 0) {
                    ck.expect(b == 0, "unequal exposure for " + id + " with " + std::to_string(n) + " participants");
                } else {
                    ck.expect(std::abs(b) <= 1, "exposure differs by more than 1 for " + id);
                }
            }
        }
    }
    ck.note("50 seeds x participant counts {1..10, 19, 20}");
    return ck.outcome();
}

Outcome sparql_verification() {
    Checker ck;
    Ontology o = load_ontology(kData / "ontologies" / "building.ttl");
    const std::string base = "PREFIX : <http://example.org/building#>\nSELECT ?b ?p WHERE { ?b :builtBy ?p ; :name ?n . ?p a :Person . ";
    auto v = verify_query(base + "}", o, {.execute = true});
    ck.expect(v.parse_ok && v.grounding && v.grounding->verdict == GroundingVerdict::FullyGrounded, "fixture query not fully grounded");
    ck.expect(v.executed == true && v.execution_nonempty == true, "fixture query did not execute to a non-empty result");
    v = verify_query(base + "?p :birthPlace ?where }", o);
    ck.expect(v.grounding && v.grounding->verdict == GroundingVerdict::PartiallyGrounded, "injected IRI not partially grounded");
    ck.expect(v.grounding && v.grounding->ungrounded == std::set<std::string>{"http://example.org/building#birthPlace"},
              "ungrounded set should name exactly the injected IRI");

    // Random (graph, pattern) cases against exhaustive assignment enumeration.
    std::mt19937_64 rng(5);
    int agree = 0;
    for (int k = 0; k < 100; ++k) {
        rdf::Graph g;
        const int size = static_cast<int>(rng() % 51);
        auto node = [&] { return rdf::Term::iri("http://r/n" + std::to_string(rng() % 5)); };
        auto pred = [&] { return rdf::Term::iri("http://r/p" + std::to_string(rng() % 3)); };
        for (int i = 0; i < size; ++i) g.insert({node(), pred(), node()});
        std::vector<sparql::TriplePattern> bgp;
        std::set<std::string> vars;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) {
            auto slot = [&](bool predicate) -> sparql::PatternTerm {
                if (rng() % 2) {
                    std::string name = "v" + std::to_string(rng() % 3);
                    vars.insert(name);
                    return sparql::Variable{name, false};
                }
                return predicate ? pred() : node();
            };
            bgp.push_back({slot(false), slot(true), slot(false)});
        }
        std::set<rdf::Term> universe;
        for (const auto& t : g) universe.insert({t.subject, t.predicate, t.object});
        std::vector<rdf::Term> terms(universe.begin(), universe.end());
        std::vector<std::string> names(vars.begin(), vars.end());
        std::vector<sparql::Binding> expected;
        std::vector<std::size_t> idx(names.size(), 0);
        const bool nothing = terms.empty() && !names.empty();
        while (!nothing) {
            sparql::Binding b;
            for (std::size_t i = 0; i < names.size(); ++i) b[names[i]] = terms[idx[i]];
            auto val = [&](const sparql::PatternTerm& pt) {
                if (auto* t = std::get_if<rdf::Term>(&pt)) return *t;
                return b.at(std::get<sparql::Variable>(pt).name);
            };
            if (std::all_of(bgp.begin(), bgp.end(), [&](const auto& tp) {
                    return g.count({val(tp.subject), val(tp.predicate), val(tp.object)}) > 0;
                })) {
                expected.push_back(b);
            }
            std::size_t d = 0;
            while (d < idx.size() && ++idx[d] == terms.size()) idx[d++] = 0;
            if (d == idx.size()) break;
        }
        sparql::GroupPattern group;
        group.elements.push_back({sparql::PatternElement::Kind::Triples, bgp, {}, {}});
        auto actual = sparql::evaluate(group, g);
        std::sort(expected.begin(), expected.end());
        std::sort(actual.begin(), actual.end());
        agree += actual == expected;
    }
    ck.expect(agree == 100, std::to_string(100 - agree) + " of 100 random cases disagree with brute force");
    ck.note("grounded fixture passes, injected IRI named, 100/100 random cases agree");
    return ck.outcome();
}

Outcome skip_semantics() {
    Checker ck;
    SessionPlan plan;
    plan.participant_id = "P1";
    for (int i = 0; i < 20; ++i) plan.tasks.push_back({"cq" + std::to_string(i), i < 10 ? Condition::Assisted : Condition::Unassisted});
    plan.per_condition_limit = std::chrono::seconds(2);  // stands in for the 20-minute window
    Session s(plan, "tok");
    GoldMap gold;
    for (const auto& t : plan.tasks) gold[t.record_id] = BinaryLabel::Yes;
    s.next_task();
    for (int i = 0; i < 7; ++i) s.submit("cq" + std::to_string(i), i % 3 ? Answer::Yes : Answer::No, 2);
    std::this_thread::sleep_for(std::chrono::milliseconds(2100));
    auto view = s.next_task();
    std::size_t skipped = 0;
    for (const auto& r : s.responses()) skipped += r.answer == Answer::Skipped;
    ck.expect(skipped == 3, std::to_string(skipped) + " skipped records instead of 3");
    ck.expect(view.index == 10 && view.condition == Condition::Unassisted, "session did not advance to the second condition");
    auto summary = user_accuracy(s.responses(), gold);
    const auto& u = summary.per_user.at({"P1", Condition::Assisted});
    ck.expect(u.skipped == 3 && u.correct + u.incorrect == 7, "skipped records counted in accuracy");
    ck.expect(u.accuracy && std::abs(*u.accuracy - 4.0 / 7.0) < 1e-12, "accuracy should be 4/7");
    ck.note("3 skipped, accuracy over 7 answered = " + fmt(u.accuracy.value_or(-1)));
    return ck.outcome();
}

Outcome sus_scoring() {
    Checker ck;
    double a = compute_sus({5, 1, 5, 1, 5, 1, 5, 1, 5, 1});
    double b = compute_sus(std::vector<int>(10, 3));
    double c = compute_sus({4, 2, 4, 2, 4, 2, 4, 2, 4, 2});
    ck.expect(a == 100, "max case " + fmt(a, 1));
    ck.expect(b == 50, "midpoint case " + fmt(b, 1));
    ck.expect(c == 75, "mixed case " + fmt(c, 1));
    ck.note("100 / 50 / 75");
    return ck.outcome();
}

Outcome non_reproducible_declared() {
    Checker ck;
    std::cout << "NOTE  live-model scores (macro-F1 0.66 / 0.58 / 0.48) and the human-study inferential statistics"
                 " (t=2.04, p=0.047, chi2=4.12, r=-0.47, d~0.22) need proprietary models and unreleased raw data;"
                 " they are not acceptance targets\n";
    // Synthetic cohort built so that assisted accuracy is 4159/5000 and unassisted 3523/5000.
    Corpus c = load_corpus(kData / "small.json");
    std::vector<std::string> ids;
    for (const auto& r : c.records) ids.push_back(r.id);
    std::vector<Participant> ps;
    for (int i = 0; i < 500; ++i) ps.push_back({"U" + std::to_string(i), i % 4 ? Expertise::NonExpert : Expertise::Expert});
    auto plans = build_assignment(ps, ids, 2025);
    ReportInputs in;
    in.corpus = &c;
    std::size_t assisted_seen = 0, unassisted_seen = 0;
    for (const auto& plan : plans) {
        for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
            const auto& task = plan.tasks[i];
            std::size_t& seen = task.condition == Condition::Assisted ? assisted_seen : unassisted_seen;
            const std::size_t quota = task.condition == Condition::Assisted ? 4159 : 3523;
            const bool right = seen++ < quota;
            BinaryLabel g = c.find(task.record_id)->normalized_gold();
            TaskResponse r;
            r.participant_id = plan.participant_id;
            r.record_id = task.record_id;
            r.condition = task.condition;
            r.answer = (g == BinaryLabel::Yes) == right ? Answer::Yes : Answer::No;
            r.difficulty = 3;
            r.task_index = i;
            r.half = i < 10 ? Half::First : Half::Second;
            r.order = plan.order;
            r.expertise = plan.expertise;
            in.responses.push_back(r);
        }
    }
    auto report = build_report(in);
    const auto& acc = report["overall"]["accuracy"];
    double assisted = acc["condition_means"]["assisted"].get<double>();
    double unassisted = acc["condition_means"]["unassisted"].get<double>();
    std::string text = acc.value("delta_text", "");
    ck.expect(std::abs(assisted - 0.8318) < 1e-12, "assisted mean " + fmt(assisted));
    ck.expect(std::abs(unassisted - 0.7046) < 1e-12, "unassisted mean " + fmt(unassisted));
    ck.expect(text == "+13% (from 70.46% to 83.18%)", "delta rendered as '" + text + "'");
    ck.note("declared; synthetic cohort renders " + text);
    return ck.outcome();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"random-baseline reproduction", random_baseline_reproduction},
        {"perfect-oracle sanity", perfect_oracle},
        {"fixture replay", fixture_replay},
        {"difficulty rule", difficulty_rule},
        {"gold normalization", gold_normalization},
        {"statistics oracle equivalence", statistics_oracle},
        {"counterbalancing property", counterbalancing},
        {"sparql verification", sparql_verification},
        {"skip semantics", skip_semantics},
        {"sus scoring", sus_scoring},
        {"non-reproducible results declared", non_reproducible_declared},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS  " : "FAIL  ") << name << (o.detail.empty() ? "" : "  (" + o.detail + ")") << "\n";
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed;
}
