// Command-line front end: one subcommand per pipeline stage.

#include "cqv/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cqv/analysis.hpp"
#include "cqv/backend.hpp"
#include "cqv/corpus.hpp"
#include "cqv/difficulty.hpp"
#include "cqv/error.hpp"
#include "cqv/harness.hpp"
#include "cqv/judge.hpp"
#include "cqv/sampler.hpp"
#include "cqv/study.hpp"
#include "cqv/study_server.hpp"
#include "cqv/verify.hpp"

namespace cqv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDefaultStubText =
    "Answer: Yes\nPartial: no\n```sparql\nASK { }\n```\n";

struct Globals {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    bool quiet = false;
};

struct BackendFlags {
    std::string backend = "stub";
    std::string fixtures;
    std::string record_dir;
    std::string model = "stub";
    std::string cache_dir;
    std::string stub_text = kDefaultStubText;
    bool stub_oracle = false;
    double temperature = 0.0;
    double penalty = 0.0;
    int max_retries = 3;
    long run_spacing_ms = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "Completion backend: stub, replay or remote")
            ->check(CLI::IsMember({"stub", "replay", "remote", "http"}));
        cmd->add_option("--fixtures", fixtures, "Replay fixture directory");
        cmd->add_option("--record", record_dir, "Also write every completion as a replay fixture into this directory");
        cmd->add_option("--model", model, "Model name (part of the cache key)");
        cmd->add_option("--cache", cache_dir, "On-disk completion cache directory");
        cmd->add_option("--stub-text", stub_text, "Fixed completion returned by the stub backend");
        cmd->add_flag("--stub-oracle", stub_oracle, "Stub answers with each record's gold label");
        cmd->add_option("--temperature", temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);
        cmd->add_option("--penalty", penalty, "Frequency/presence penalty");
        cmd->add_option("--max-retries", max_retries, "Retries for transient transport errors")->check(CLI::NonNegativeNumber);
        cmd->add_option("--run-spacing-ms", run_spacing_ms, "Pause between runs (remote backend only)");
    }

    std::unique_ptr<CompletionClient> client(const Corpus* corpus) const {
        ModelConfig cfg;
        cfg.backend = *parse_backend_kind(backend);
        cfg.model_name = model;
        cfg.temperature = temperature;
        cfg.penalty = penalty;
        cfg.max_retries = max_retries;
        if (run_spacing_ms > 0) cfg.run_spacing = std::chrono::milliseconds(run_spacing_ms);
        std::shared_ptr<CompletionBackend> b;
        if (cfg.backend == BackendKind::Stub && stub_oracle) {
            if (!corpus) throw Error(ErrorKind::InvalidArgument, "--stub-oracle needs a corpus");
            b = std::make_shared<StubBackend>([corpus](const CompletionRequest& req) {
                const CQRecord* r = corpus->find(req.record_id);
                Suggestion s;
                s.label = r ? r->normalized_gold() : BinaryLabel::No;
                s.sparql = "ASK { }";
                return render_completion(s);
            });
        } else {
            if (cfg.backend == BackendKind::Replay && fixtures.empty()) {
                throw Error(ErrorKind::BackendUnavailable, "--backend replay needs --fixtures <dir>");
            }
            b = make_backend(cfg, fixtures, stub_text);
        }
        if (!record_dir.empty()) b = std::make_shared<RecordingBackend>(b, record_dir, false);
        auto cache = std::make_shared<CompletionCache>(cache_dir.empty() ? std::nullopt : std::optional<fs::path>(cache_dir));
        return std::make_unique<CompletionClient>(b, cfg, cache);
    }
};

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    out << text;
}

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, p.string() + ": " + e.what());
    }
}

std::map<std::string, Suggestion> read_suggestions(const fs::path& p) {
    std::map<std::string, Suggestion> out;
    json j = read_json_file(p);
    try {
        for (const auto& e : j) out[e.at("record_id").get<std::string>()] = suggestion_from_json(e);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, p.string() + ": " + e.what());
    }
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

std::atomic<StudyServer*> g_server{nullptr};

extern "C" void stop_server(int) {
    if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Competency-question verification workbench"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI config file; command-line flags win");
    Globals g;
    app.add_option("--seed", g.seed, "Seed for every randomized step");
    app.add_option("--jobs", g.jobs, "Parallel workers for judge")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load and validate a corpus manifest");
    std::string corpus_path;
    std::string out_path;
    ingest->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    ingest->add_option("--out", out_path, "Write the normalized manifest here");

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus statistics");
    bool as_json = false;
    stats->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    stats->add_flag("--json", as_json, "Print JSON instead of text");

    // classify
    auto* classify = app.add_subcommand("classify", "Simple/Complex classification of CQ formalizations");
    std::vector<std::string> classes;
    std::vector<std::string> slots;
    classify->add_option("--corpus", corpus_path, "Classify every record with a formalization");
    classify->add_option("--class", classes, "Class in the formalization (repeatable)");
    classify->add_option("--slot", slots, "Object-property slot; alternatives separated by '|' (repeatable)");

    // judge
    auto* judge = app.add_subcommand("judge", "Ask the model to judge every CQ and write a run file");
    BackendFlags bf;
    bf.add_to(judge);
    int runs = 1;
    std::string template_path;
    std::string shots_path;
    std::string suggestions_out;
    judge->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    judge->add_option("--out", out_path, "Run file to write (JSON Lines)")->required();
    judge->add_option("--runs", runs, "Independent runs per record")->check(CLI::PositiveNumber);
    judge->add_option("--template", template_path, "Prompt template file");
    judge->add_option("--shots", shots_path, "Few-shot exemplars (JSON)");
    judge->add_option("--suggestions", suggestions_out, "Also write the first run's suggestions (JSON)");

    // verify
    auto* verify = app.add_subcommand("verify", "Check suggested SPARQL queries against the ontologies");
    std::string suggestions_path;
    std::string query_path;
    std::string ontology_path;
    bool execute = false;
    verify->add_option("--corpus", corpus_path, "Corpus manifest (JSON)");
    verify->add_option("--suggestions", suggestions_path, "Suggestions file written by judge");
    verify->add_option("--query", query_path, "Single query file");
    verify->add_option("--ontology", ontology_path, "Ontology for --query");
    verify->add_flag("--execute", execute, "Execute fully grounded queries");
    verify->add_option("--out", out_path, "Write verdicts as JSON");

    // score
    auto* score = app.add_subcommand("score", "Score a run file against gold labels");
    std::string run_path;
    std::string json_out;
    std::string name = "model";
    score->add_option("--run", run_path, "Run file (JSON Lines)")->required();
    score->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    score->add_option("--name", name, "Row label in the table");
    score->add_option("--json", json_out, "Write the JSON report here");
    bool by_project = false;
    score->add_flag("--by-project", by_project, "Also print a per-project breakdown");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Uniform-random baseline (closed form and Monte Carlo)");
    std::size_t trials = 10000;
    baseline->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    baseline->add_option("--trials", trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    baseline->add_flag("--json", as_json, "Print JSON instead of text");

    // sample
    auto* sample = app.add_subcommand("sample", "Build a balanced small subset");
    std::string constraints_path;
    std::string prior_path;
    sample->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    sample->add_option("--constraints", constraints_path, "Sampling constraints (JSON)");
    sample->add_option("--prior", prior_path, "Prior run file for the correctness profile");
    sample->add_option("--out", out_path, "Manifest to write")->required();

    // condense
    auto* condense = app.add_subcommand("condense", "Condense ontology stories to one line");
    BackendFlags cbf;
    cbf.add_to(condense);
    std::string story;
    condense->add_option("--corpus", corpus_path, "Fill story_oneline for every record");
    condense->add_option("--out", out_path, "Manifest to write (with --corpus)");
    condense->add_option("--story", story, "Condense a single story given inline");

    // plan
    auto* plan = app.add_subcommand("plan", "Freeze suggestions and plan counterbalanced sessions into a study bundle");
    std::size_t participants = 0;
    std::string participants_path;
    double window_minutes = 20;
    plan->add_option("--corpus", corpus_path, "Study corpus manifest (JSON)")->required();
    plan->add_option("--suggestions", suggestions_path, "Suggestions file written by judge")->required();
    plan->add_option("--participants", participants, "Number of anonymous participants");
    plan->add_option("--participants-file", participants_path, "JSON list of {id, expertise}");
    plan->add_option("--window-minutes", window_minutes, "Per-condition time window")->check(CLI::PositiveNumber);
    plan->add_option("--out", out_path, "Bundle directory")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the study API for a bundle");
    std::string bundle_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string events_path;
    serve->add_option("--bundle", bundle_dir, "Bundle directory")->required();
    serve->add_option("--port", port, "TCP port (0 picks a free one)");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--events", events_path, "Event log (default <bundle>/events.jsonl)");

    // report
    auto* report = app.add_subcommand("report", "Study statistics from an exported event log");
    std::string export_path;
    report->add_option("--export", export_path, "Event log (JSON Lines)")->required();
    report->add_option("--corpus", corpus_path, "Corpus manifest (JSON)")->required();
    report->add_option("--suggestions", suggestions_path, "Bundle suggestions.json for the correctness split");
    report->add_option("--json", json_out, "Write the JSON report here");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) {
            err << "run '" << (sub == &app ? std::string("cqv") : "cqv " + sub->get_name()) << " --help' for usage\n";
        }
        return 2;
    }
    auto progress = [&](const std::string& line) {
        if (!g.quiet) err << line << "\n";
    };

    try {
        if (ingest->parsed()) {
            Corpus c = load_corpus(corpus_path);
            out << "loaded " << c.records.size() << " records over " << c.ontologies.size() << " ontologies\n";
            if (!out_path.empty()) {
                write_text(out_path, corpus_to_json(c, fs::path(out_path).parent_path()).dump(2) + "\n");
                out << "wrote " << out_path << "\n";
            }
        } else if (stats->parsed()) {
            auto s = corpus_stats(load_corpus(corpus_path));
            out << (as_json ? to_json(s).dump(2) + "\n" : render_stats(s));
        } else if (classify->parsed()) {
            if (!corpus_path.empty()) {
                Corpus c = load_corpus(corpus_path);
                for (const auto& r : c.records) {
                    out << r.id << "\t" << to_string(r.difficulty);
                    if (r.formalization) out << "\t(derived " << to_string(classify_difficulty(*r.formalization)) << ")";
                    out << "\n";
                }
            } else {
                if (classes.empty()) throw Error(ErrorKind::InvalidArgument, "give --corpus or at least one --class");
                CQFormalization f;
                f.classes.insert(classes.begin(), classes.end());
                for (const auto& s : slots) {
                    std::set<std::string> alts;
                    std::stringstream ss(s);
                    std::string part;
                    while (std::getline(ss, part, '|')) alts.insert(part);
                    f.object_property_slots.push_back(alts);
                }
                out << to_string(classify_difficulty(f)) << "\n";
            }
        } else if (judge->parsed()) {
            Corpus c = load_corpus(corpus_path);
            auto client = bf.client(&c);
            JudgeContext ctx;
            if (!template_path.empty()) ctx.prompt_template = PromptTemplate::load(template_path);
            if (!shots_path.empty()) ctx.shots = load_exemplars(shots_path);
            JudgeRunOptions opts;
            opts.runs = runs;
            opts.jobs = g.jobs;
            opts.on_result = [&](const JudgeResult& r, std::size_t done, std::size_t total) {
                std::string what = r.suggestion() ? to_string(r.suggestion()->label)
                                                  : "failure (" + std::string(to_string(r.failure()->kind)) + ")";
                progress("[run " + std::to_string(r.run_index) + "] " + std::to_string(done) + "/" + std::to_string(total) +
                         " " + r.record_id + " -> " + what + (r.cache_hit ? " (cached)" : ""));
            };
            JudgeBatch batch = run_judge(c, ctx, *client, opts);
            std::vector<Prediction> preds;
            for (const auto& run : batch.runs) {
                auto p = predictions_from(run);
                preds.insert(preds.end(), p.begin(), p.end());
            }
            write_run_file(out_path, preds);
            std::size_t failures = std::count_if(preds.begin(), preds.end(), [](const Prediction& p) { return p.is_failure(); });
            out << "wrote " << preds.size() << " predictions (" << failures << " failures) to " << out_path << "\n";
            if (!batch.excluded_shot_records.empty()) {
                out << "excluded " << batch.excluded_shot_records.size() << " record(s) used as shots\n";
            }
            if (!suggestions_out.empty()) {
                json arr = json::array();
                for (const auto& r : batch.runs.front().results) {
                    if (const auto* s = r.suggestion()) {
                        json j = to_json(*s);
                        j["record_id"] = r.record_id;
                        arr.push_back(j);
                    }
                }
                write_text(suggestions_out, arr.dump(2) + "\n");
                out << "wrote suggestions to " << suggestions_out << "\n";
            }
        } else if (verify->parsed()) {
            VerifyOptions vo{.execute = execute};
            json verdicts = json::array();
            if (!query_path.empty()) {
                if (ontology_path.empty()) throw Error(ErrorKind::InvalidArgument, "--query needs --ontology");
                std::ifstream in(query_path);
                if (!in) throw Error(ErrorKind::IoError, "cannot open " + query_path);
                std::stringstream buf;
                buf << in.rdbuf();
                auto v = verify_query(buf.str(), load_ontology(ontology_path), vo);
                verdicts.push_back(to_json(v));
                out << (v.parse_ok ? to_string(v.grounding->verdict) : "parse_error: " + v.error) << "\n";
                if (v.grounding) {
                    for (const auto& iri : v.grounding->ungrounded) out << "  ungrounded: <" << iri << ">\n";
                }
                for (const auto& w : v.warnings) out << "  warning: " << w << "\n";
            } else {
                if (corpus_path.empty() || suggestions_path.empty()) {
                    throw Error(ErrorKind::InvalidArgument, "give --corpus and --suggestions, or --query and --ontology");
                }
                Corpus c = load_corpus(corpus_path);
                auto sugg = read_suggestions(suggestions_path);
                for (const auto& [id, s] : sugg) {
                    const CQRecord* r = c.find(id);
                    if (!r) throw Error(ErrorKind::InvalidArgument, "suggestion for unknown record '" + id + "'");
                    auto v = verify_suggestion(s, c.ontology_of(*r), vo);
                    json j = to_json(v);
                    j["record_id"] = id;
                    verdicts.push_back(j);
                    out << id << "\t" << (v.parse_ok ? to_string(v.grounding->verdict) : "parse_error");
                    if (v.executed) out << "\texecuted, " << (*v.execution_nonempty ? "non-empty" : "empty");
                    out << "\n";
                }
            }
            if (!out_path.empty()) write_text(out_path, verdicts.dump(2) + "\n");
        } else if (score->parsed()) {
            Corpus c = load_corpus(corpus_path);
            auto preds = read_run_file(run_path);
            std::vector<MetricsReport> reports;
            json runs_json = json::array();
            for (const auto& [k, p] : split_runs(preds)) {
                reports.push_back(score_run(p, c));
                json j = to_json(reports.back());
                j["run"] = k;
                runs_json.push_back(j);
            }
            Aggregate agg = aggregate_runs(reports);
            out << render_table({{name, agg}});
            const auto& first = reports.front();
            out << "\nrecords " << first.n << ", runs " << agg.runs << ", failures";
            for (const auto& r : reports) out << " " << r.failures;
            out << "\n";
            out << "Accuracy " << format_mean_std(agg.metrics.at("accuracy")) << "  Macro-F1 "
                << format_mean_std(agg.metrics.at("macro_f1")) << "  F1(yes) " << format_mean_std(agg.metrics.at("f1_yes"))
                << "  F1(no) " << format_mean_std(agg.metrics.at("f1_no")) << "\n";
            json report_json = {{"runs", runs_json}, {"aggregate", to_json(agg)}};
            if (by_project) {
                json projects = json::object();
                out << "\nBy project (run " << split_runs(preds).begin()->first << ")\n";
                for (const auto& [proj, r] : breakdown(split_runs(preds).begin()->second, c, Grouping::Project)) {
                    out << "  " << proj << ": n " << r.n << ", Macro-F1 " << fixed(r.macro_f1, 2) << ", Accuracy "
                        << fixed(r.accuracy, 2) << "\n";
                    projects[proj] = to_json(r);
                }
                report_json["by_project"] = projects;
            }
            if (!json_out.empty()) write_text(json_out, report_json.dump(2) + "\n");
        } else if (baseline->parsed()) {
            progress("seed: " + std::to_string(g.seed));
            auto b = random_baseline(load_corpus(corpus_path), trials, g.seed);
            out << (as_json ? to_json(b).dump(2) + "\n" : render_baseline(b));
        } else if (sample->parsed()) {
            Corpus c = load_corpus(corpus_path);
            SamplingConstraints sc;
            if (!constraints_path.empty()) sc = constraints_from_json(read_json_file(constraints_path));
            if (app.count("--seed") || constraints_path.empty()) sc.seed = g.seed;
            progress("seed: " + std::to_string(sc.seed));
            std::vector<Prediction> prior;
            if (!prior_path.empty()) prior = read_run_file(prior_path);
            auto result = sample_small(c, sc, prior_path.empty() ? nullptr : &prior);
            write_text(out_path, corpus_to_json(result.corpus, fs::path(out_path).parent_path()).dump(2) + "\n");
            auto s = corpus_stats(result.corpus);
            out << "sampled " << s.total << " records (modelled " << s.modelled << ", not modelled " << s.not_modelled
                << ", human " << s.human_curated << ", llm " << s.llm_generated << ", simple " << s.simple << ") score "
                << fixed(result.score, 2) << "\n";
        } else if (condense->parsed()) {
            if (!story.empty()) {
                auto client = cbf.client(nullptr);
                out << condense_story(story, *client) << "\n";
            } else {
                if (corpus_path.empty() || out_path.empty()) {
                    throw Error(ErrorKind::InvalidArgument, "give --story, or --corpus with --out");
                }
                Corpus c = load_corpus(corpus_path);
                auto client = cbf.client(&c);
                condense_corpus(c, *client);
                write_text(out_path, corpus_to_json(c, fs::path(out_path).parent_path()).dump(2) + "\n");
                out << "condensed stories for " << c.records.size() << " records into " << out_path << "\n";
            }
        } else if (plan->parsed()) {
            Corpus c = load_corpus(corpus_path);
            std::vector<Participant> people;
            if (!participants_path.empty()) {
                for (const auto& p : read_json_file(participants_path)) {
                    people.push_back({p.at("id").get<std::string>(), parse_expertise(p.value("expertise", "non_expert"))});
                }
            } else {
                for (std::size_t i = 0; i < participants; ++i) {
                    std::ostringstream id;
                    id << "P" << std::setw(2) << std::setfill('0') << i + 1;
                    people.push_back({id.str(), Expertise::NonExpert});
                }
            }
            std::vector<std::string> ids;
            for (const auto& r : c.records) ids.push_back(r.id);
            progress("seed: " + std::to_string(g.seed));
            auto window = std::chrono::milliseconds(static_cast<std::int64_t>(window_minutes * 60000.0));
            auto plans = build_assignment(people, ids, g.seed, window);
            auto cards = make_cards(c, read_suggestions(suggestions_path));
            write_bundle(out_path, c, cards, plans);
            out << "wrote bundle with " << plans.size() << " session plan(s) and " << cards.size() << " suggestion card(s) to "
                << out_path << "\n";
        } else if (serve->parsed()) {
            StudyBundle bundle = load_bundle(bundle_dir);
            fs::path events = events_path.empty() ? fs::path(bundle_dir) / "events.jsonl" : fs::path(events_path);
            StudyService service(std::move(bundle), events);
            StudyServer server(service);
            int bound = server.bind(host, port);
            out << "serving study API on http://" << host << ":" << bound << " (events: " << events.string()
                << ", seed " << g.seed << ")\n";
            out.flush();
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            server.serve();
            g_server = nullptr;
        } else if (report->parsed()) {
            Corpus c = load_corpus(corpus_path);
            auto events = read_events(export_path);
            ReportInputs in;
            in.responses = responses_from_events(events);
            in.surveys = surveys_from_events(events);
            in.corpus = &c;
            if (!suggestions_path.empty()) {
                std::map<std::string, BinaryLabel> labels;
                for (const auto& e : read_json_file(suggestions_path)) {
                    auto card = card_from_json(e);
                    labels[card.record_id] = card.suggestion.label;
                }
                in.suggestion_labels = labels;
            }
            json r = build_report(in);
            out << render_report(r);
            if (!json_out.empty()) write_text(json_out, r.dump(2) + "\n");
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error [Internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace cqv::cli
