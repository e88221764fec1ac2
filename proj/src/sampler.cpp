#include "cqv/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cqv/error.hpp"

namespace cqv {

using nlohmann::json;

void validate(const SamplingConstraints& c) {
    if (c.target_size == 0) throw Error(ErrorKind::InvalidArgument, "target_size must be > 0");
    if (c.max_per_project == 0) throw Error(ErrorKind::InvalidArgument, "max_per_project must be >= 1");
    if (c.restarts == 0) throw Error(ErrorKind::InvalidArgument, "restarts must be >= 1");
    for (double w : {c.weights.source, c.weights.modelled, c.weights.correctness, c.weights.diversity}) {
        if (w < 0) throw Error(ErrorKind::InvalidArgument, "soft-constraint weights must be >= 0");
    }
    if (c.llm_correctness_profile) {
        for (const auto& [k, v] : *c.llm_correctness_profile) {
            if (k != "correct" && k != "incorrect") {
                throw Error(ErrorKind::InvalidArgument, "llm_correctness_profile keys are 'correct' and 'incorrect'");
            }
            if (v < 0 || v > 1) throw Error(ErrorKind::InvalidArgument, "profile fractions must lie in [0,1]");
        }
    }
}

SamplingConstraints constraints_from_json(const json& j) {
    SamplingConstraints c;
    try {
        c.target_size = j.value("target_size", c.target_size);
        c.exclude_no_minor = j.value("exclude_no_minor", c.exclude_no_minor);
        c.complex_only = j.value("complex_only", c.complex_only);
        c.max_per_project = j.value("max_per_project", c.max_per_project);
        c.balance_source = j.value("balance_source", c.balance_source);
        c.balance_modelled = j.value("balance_modelled", c.balance_modelled);
        if (j.contains("llm_correctness_profile") && !j.at("llm_correctness_profile").is_null()) {
            c.llm_correctness_profile = j.at("llm_correctness_profile").get<std::map<std::string, double>>();
        }
        c.seed = j.value("seed", c.seed);
        c.restarts = j.value("restarts", c.restarts);
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            c.weights.source = w.value("source", c.weights.source);
            c.weights.modelled = w.value("modelled", c.weights.modelled);
            c.weights.correctness = w.value("correctness", c.weights.correctness);
            c.weights.diversity = w.value("diversity", c.weights.diversity);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("constraints: ") + e.what());
    }
    validate(c);
    return c;
}

json to_json(const SamplingConstraints& c) {
    json j = {
        {"target_size", c.target_size},
        {"exclude_no_minor", c.exclude_no_minor},
        {"complex_only", c.complex_only},
        {"max_per_project", c.max_per_project},
        {"balance_source", c.balance_source},
        {"balance_modelled", c.balance_modelled},
        {"seed", c.seed},
        {"restarts", c.restarts},
        {"weights",
         {{"source", c.weights.source},
          {"modelled", c.weights.modelled},
          {"correctness", c.weights.correctness},
          {"diversity", c.weights.diversity}}},
    };
    j["llm_correctness_profile"] = c.llm_correctness_profile ? json(*c.llm_correctness_profile) : json(nullptr);
    return j;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Candidate {
    const CQRecord* record;
    std::size_t project;          // dense project index
    std::optional<bool> correct;  // prior-run correctness, if known
    std::size_t generator;        // dense generator index, 0 for human records
};

class Scorer {
public:
    Scorer(const SamplingConstraints& c, std::size_t generators_in_pool) : c_(c), generators_(generators_in_pool) {}

    std::map<std::string, double> terms(const std::vector<const Candidate*>& sel) const {
        double llm = 0, human = 0, yes = 0, no = 0, known = 0, correct = 0;
        std::map<std::size_t, double> per_generator;
        for (const auto* cand : sel) {
            if (cand->record->source == Source::LLMGenerated) {
                ++llm;
                ++per_generator[cand->generator];
            } else {
                ++human;
            }
            (cand->record->normalized_gold() == BinaryLabel::Yes ? yes : no) += 1;
            if (cand->correct) {
                ++known;
                correct += *cand->correct;
            }
        }
        std::map<std::string, double> t;
        t["source"] = std::max(0.0, std::abs(llm - human) - static_cast<double>(c_.balance_source));
        t["modelled"] = std::max(0.0, std::abs(yes - no) - static_cast<double>(c_.balance_modelled));
        t["correctness"] = 0;
        if (c_.llm_correctness_profile && known > 0) {
            const auto& profile = *c_.llm_correctness_profile;
            double target = profile.count("correct") ? profile.at("correct")
                                                      : 1.0 - profile.at("incorrect");
            t["correctness"] = std::abs(correct - std::round(target * known));
        }
        t["diversity"] = 0;
        if (llm > 0 && generators_ > 0) {
            double fair = std::ceil(llm / static_cast<double>(generators_));
            double worst = 0;
            for (const auto& [g, n] : per_generator) worst = std::max(worst, n);
            t["diversity"] = std::max(0.0, worst - fair);
        }
        return t;
    }

    double score(const std::vector<const Candidate*>& sel) const {
        auto t = terms(sel);
        return c_.weights.source * t["source"] + c_.weights.modelled * t["modelled"] +
               c_.weights.correctness * t["correctness"] + c_.weights.diversity * t["diversity"];
    }

private:
    const SamplingConstraints& c_;
    std::size_t generators_;
};

[[noreturn]] void infeasible(const std::string& filter, std::size_t have, std::size_t need) {
    throw Error(ErrorKind::InfeasibleConstraints, "hard filter " + filter + " exhausted the pool: " +
                                                      std::to_string(have) + " candidate(s) left, " +
                                                      std::to_string(need) + " required");
}

}  // namespace

SampleResult sample_small(const Corpus& corpus, const SamplingConstraints& c, const std::vector<Prediction>* prior_run) {
    validate(c);
    std::vector<const CQRecord*> pool;
    for (const auto& r : corpus.records) pool.push_back(&r);
    if (pool.size() < c.target_size) infeasible("target_size", pool.size(), c.target_size);
    if (c.exclude_no_minor) {
        std::erase_if(pool, [](const CQRecord* r) { return r->gold == GoldLabel::NoMinor; });
        if (pool.size() < c.target_size) infeasible("exclude_no_minor", pool.size(), c.target_size);
    }
    if (c.complex_only) {
        std::erase_if(pool, [](const CQRecord* r) { return r->difficulty != Difficulty::Complex; });
        if (pool.size() < c.target_size) infeasible("complex_only", pool.size(), c.target_size);
    }
    std::map<std::string, std::size_t> project_ids;
    std::map<std::string, std::size_t> generator_ids;
    for (const auto* r : pool) {
        project_ids.emplace(r->project, project_ids.size());
        if (r->generator_model) generator_ids.emplace(*r->generator_model, generator_ids.size() + 1);
    }
    {
        std::vector<std::size_t> per_project(project_ids.size(), 0);
        for (const auto* r : pool) ++per_project[project_ids[r->project]];
        std::size_t capacity = 0;
        for (auto n : per_project) capacity += std::min(n, c.max_per_project);
        if (capacity < c.target_size) infeasible("max_per_project", capacity, c.target_size);
    }

    std::map<std::string, bool> prior;
    if (prior_run) {
        for (const auto& p : *prior_run) {
            if (const auto* r = corpus.find(p.record_id)) prior[p.record_id] = p.label == r->normalized_gold();
        }
    }
    std::vector<Candidate> cands;
    for (const auto* r : pool) {
        Candidate cand{r, project_ids[r->project], std::nullopt, 0};
        if (auto it = prior.find(r->id); it != prior.end()) cand.correct = it->second;
        if (r->generator_model) cand.generator = generator_ids[*r->generator_model];
        cands.push_back(cand);
    }
    Scorer scorer(c, generator_ids.size());

    std::vector<std::size_t> best;
    double best_score = 0;
    for (std::size_t restart = 0; restart < c.restarts; ++restart) {
        std::mt19937_64 rng(mix(c.seed ^ mix(restart)));
        std::vector<std::size_t> order(cands.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);

        // Randomized greedy fill: take each candidate whose addition does not
        // worsen the partial score by more than the cheapest alternative.
        std::vector<std::size_t> chosen;
        std::vector<bool> in(cands.size(), false);
        std::vector<std::size_t> per_project(project_ids.size(), 0);
        auto selection = [&](const std::vector<std::size_t>& idx) {
            std::vector<const Candidate*> s;
            for (auto i : idx) s.push_back(&cands[i]);
            return s;
        };
        while (chosen.size() < c.target_size) {
            std::optional<std::size_t> pick;
            double pick_score = 0;
            for (auto i : order) {
                if (in[i] || per_project[cands[i].project] >= c.max_per_project) continue;
                auto trial = chosen;
                trial.push_back(i);
                double s = scorer.score(selection(trial));
                if (!pick || s < pick_score) {
                    pick = i;
                    pick_score = s;
                }
                if (s == 0) break;
            }
            if (!pick) break;
            chosen.push_back(*pick);
            in[*pick] = true;
            ++per_project[cands[*pick].project];
        }
        if (chosen.size() < c.target_size) continue;

        // Swap improvement.
        double current = scorer.score(selection(chosen));
        for (bool improved = true; improved && current > 0;) {
            improved = false;
            for (std::size_t a = 0; a < chosen.size() && !improved; ++a) {
                for (auto b : order) {
                    if (in[b]) continue;
                    std::size_t out_proj = cands[chosen[a]].project;
                    std::size_t in_proj = cands[b].project;
                    if (in_proj != out_proj && per_project[in_proj] >= c.max_per_project) continue;
                    auto trial = chosen;
                    trial[a] = b;
                    double s = scorer.score(selection(trial));
                    if (s < current) {
                        in[chosen[a]] = false;
                        in[b] = true;
                        --per_project[out_proj];
                        ++per_project[in_proj];
                        chosen = std::move(trial);
                        current = s;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (best.empty() || current < best_score) {
            best = chosen;
            best_score = current;
        }
        if (best_score == 0) break;
    }
    if (best.empty()) infeasible("max_per_project", 0, c.target_size);

    std::sort(best.begin(), best.end(), [&](std::size_t a, std::size_t b) { return cands[a].record < cands[b].record; });
    std::vector<std::string> ids;
    std::vector<const Candidate*> final_sel;
    for (auto i : best) {
        ids.push_back(cands[i].record->id);
        final_sel.push_back(&cands[i]);
    }
    SampleResult result;
    result.corpus = subset(corpus, ids);
    result.score = best_score;
    result.terms = scorer.terms(final_sel);
    return result;
}

// ---------------------------------------------------------------------------
// Story condensation

namespace {

constexpr const char* kCondenseTemplate = R"(Summarize the ontology story in a single sentence of at most 300 characters.
Reply with the sentence only.

Story: A choir keeps records of its concerts, the pieces performed, the soloists and the churches whose organs accompany them.
Summary: A choir documents its concerts, repertoire, soloists and the church organs used.

Story: A hospital tracks which nurses are assigned to wards, the shifts they cover and the patients admitted to each ward.
Summary: A hospital records nurse ward assignments, shifts and patient admissions.

Story: {story}
Summary:)";

}  // namespace

std::string single_line(const std::string& text, std::size_t max_chars) {
    std::string s = text;
    // Drop a leading "Summary:" echo.
    if (auto pos = s.find_first_not_of(" \t\r\n"); pos != std::string::npos && s.compare(pos, 8, "Summary:") == 0) {
        s.erase(0, pos + 8);
    }
    std::string out;
    bool space = false;
    for (char ch : s) {
        if (ch == '\n' || ch == '\r' || ch == '\t' || ch == ' ') {
            space = !out.empty();
        } else {
            if (space) out += ' ';
            out += ch;
            space = false;
        }
    }
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    if (out.size() > max_chars) {
        out.resize(max_chars);
        // Do not leave a truncated UTF-8 sequence behind.
        while (!out.empty() && (static_cast<unsigned char>(out.back()) & 0xC0) == 0x80) out.pop_back();
        if (!out.empty() && (static_cast<unsigned char>(out.back()) & 0x80)) out.pop_back();
        if (auto cut = out.find_last_of(' '); cut != std::string::npos && cut > max_chars / 2) out.resize(cut);
    }
    return out;
}

std::string condense_story(const std::string& story, CompletionClient& client) {
    if (story.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorKind::EmptyStory, "story text is empty");
    }
    std::string prompt = kCondenseTemplate;
    prompt.replace(prompt.find("{story}"), 7, single_line(story, std::string::npos));
    auto completion = client.request(prompt, 1, "");
    std::string line = single_line(completion.text);
    if (line.empty()) throw Error(ErrorKind::ExtractionFailure, "summarizer returned an empty line");
    return line;
}

void condense_corpus(Corpus& corpus, CompletionClient& client) {
    std::map<std::string, std::string> done;
    for (auto& r : corpus.records) {
        if (r.story_oneline) continue;
        auto it = done.find(r.story_text);
        if (it == done.end()) it = done.emplace(r.story_text, condense_story(r.story_text, client)).first;
        r.story_oneline = it->second;
    }
}

}  // namespace cqv
