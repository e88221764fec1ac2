#include "cqv/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace cqv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kBuiltinTemplate = R"TPL({task}

## Worked examples
{shots}

## Ontology story
{story}

## Competency question
{cq}

## Ontology (Turtle)
```turtle
{ontology}
```

## Output format
Reply with exactly these parts, in this order:
1. A line `Answer: Yes` if the competency question is modelled by the ontology, or `Answer: No` if it is not.
2. A line `Partial: yes` if the query covers only part of the question, otherwise `Partial: no`.
3. A SPARQL query that verifies the competency question against the ontology, in a ```sparql fenced block.
If the answer is No, still give a partial SPARQL query that uses the parts of the ontology related to the question, and mark it with `Partial: yes`.
)TPL";

constexpr std::array<const char*, 5> kPlaceholders = {"task", "shots", "story", "cq", "ontology"};

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string render_exemplar(const Exemplar& e, std::size_t index) {
    std::ostringstream out;
    out << "### Example " << index << "\n"
        << "Story: " << trim(e.story) << "\n"
        << "Competency question: " << trim(e.cq) << "\n"
        << "Ontology excerpt:\n```turtle\n" << trim(e.ontology_excerpt) << "\n```\n";
    Suggestion s{e.label, trim(e.query), e.label == BinaryLabel::No && e.partial, {}};
    out << render_completion(s);
    return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

struct QueryBlock {
    std::string text;
    std::size_t first_line = 0;  // line index where the block (or its fence) starts
    std::string fence_info;
};

bool looks_like_query(const std::string& body) {
    static const std::regex kKeyword(R"(\b(PREFIX|SELECT|ASK|CONSTRUCT|DESCRIBE)\b)", std::regex::icase);
    return std::regex_search(body, kKeyword);
}

/// First fenced block tagged as SPARQL or containing a query keyword.
std::optional<QueryBlock> find_fenced(const std::string& text) {
    static const std::set<std::string> kTags = {"sparql", "sql", "rq", "turtle", "ttl", "text", "sparql-query", ""};
    std::size_t from = 0;
    while (true) {
        auto open = text.find("```", from);
        if (open == std::string::npos) return std::nullopt;
        std::size_t start = open + 3;
        std::string info;
        auto eol = text.find('\n', start);
        std::string first_trim =
            trim(text.substr(start, eol == std::string::npos ? std::string::npos : eol - start));
        // Only a bare tag on the fence line is an info string; "```SELECT ..." starts the query.
        if (eol != std::string::npos && first_trim.find(' ') == std::string::npos &&
            first_trim.find("```") == std::string::npos && kTags.count(lower(first_trim))) {
            info = first_trim;
            start = eol + 1;
        }
        auto close = text.find("```", start);
        QueryBlock b;
        b.text = trim(text.substr(start, close == std::string::npos ? std::string::npos : close - start));
        b.fence_info = info;
        b.first_line =
            static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(open), '\n'));
        std::string tag = lower(info);
        bool turtle = tag == "turtle" || tag == "ttl";
        if (!b.text.empty() && !turtle && (tag.starts_with("sparql") || tag == "rq" || looks_like_query(b.text))) {
            return b;
        }
        if (close == std::string::npos) return std::nullopt;
        from = close + 3;
    }
}

std::optional<QueryBlock> find_keyword_query(const std::string& text) {
    static const std::regex kStart(R"((^|\n)[ \t]*(PREFIX|SELECT|ASK|CONSTRUCT|DESCRIBE)\b)");
    std::smatch m;
    if (!std::regex_search(text, m, kStart)) return std::nullopt;
    std::size_t begin = static_cast<std::size_t>(m.position(2));
    int depth = 0;
    bool opened = false;
    std::size_t end = text.size();
    for (std::size_t i = begin; i < text.size(); ++i) {
        char c = text[i];
        if (c == '{') {
            ++depth;
            opened = true;
        } else if (c == '}') {
            --depth;
            if (opened && depth == 0) {
                end = i + 1;
                // Trailing solution modifiers ("} LIMIT 5", or on the following lines).
                static const std::regex kModifier(R"(^\s*(ORDER|LIMIT|OFFSET|GROUP)\b)");
                std::size_t line_end = text.find('\n', end);
                if (line_end == std::string::npos) line_end = text.size();
                if (std::regex_search(text.substr(end, line_end - end), kModifier)) end = line_end;
                while (end < text.size()) {
                    std::size_t next_start = text[end] == '\n' ? end + 1 : end;
                    std::size_t next_end = text.find('\n', next_start);
                    if (next_end == std::string::npos) next_end = text.size();
                    if (!std::regex_search(text.substr(next_start, next_end - next_start), kModifier)) break;
                    end = next_end;
                }
                break;
            }
        }
    }
    QueryBlock b;
    b.text = trim(text.substr(begin, end - begin));
    b.first_line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(begin), '\n'));
    if (b.text.empty()) return std::nullopt;
    return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompt

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
    std::size_t last = 0;
    for (const char* name : kPlaceholders) {
        auto pos = text_.find(std::string("{") + name + "}");
        if (pos == std::string::npos) {
            throw Error(ErrorKind::InvalidArgument, std::string("prompt template lacks placeholder {") + name + "}");
        }
        if (pos < last) {
            throw Error(ErrorKind::InvalidArgument, std::string("placeholder {") + name + "} is out of order");
        }
        last = pos;
    }
}

PromptTemplate PromptTemplate::builtin() { return PromptTemplate(kBuiltinTemplate); }

PromptTemplate PromptTemplate::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open prompt template " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return PromptTemplate(buf.str());
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    // Single left-to-right pass: substituted text is never re-scanned.
    std::string out;
    out.reserve(text_.size() + 1024);
    for (std::size_t i = 0; i < text_.size();) {
        if (text_[i] == '{') {
            auto close = text_.find('}', i);
            if (close != std::string::npos) {
                auto it = values.find(text_.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += text_[i++];
    }
    return out;
}

std::string default_task_description() {
    return "You are an experienced ontology engineer performing competency question (CQ) verification. "
           "Given an ontology story, a competency question and an OWL ontology, decide whether the CQ is "
           "modelled by the ontology: it is modelled only if the ontology's classes and properties are enough "
           "to write a SPARQL query whose answers would answer the CQ.";
}

std::vector<Exemplar> default_exemplars() {
    Exemplar yes;
    yes.story = "A concert archive records performances, the musicians who take part in them and the venues where they happen.";
    yes.cq = "Which musicians performed at a given venue?";
    yes.ontology_excerpt =
        "@prefix : <http://example.org/concert#> .\n"
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        ":Musician a owl:Class .\n:Performance a owl:Class .\n:Venue a owl:Class .\n"
        ":hasPerformer a owl:ObjectProperty ; rdfs:domain :Performance ; rdfs:range :Musician .\n"
        ":takesPlaceAt a owl:ObjectProperty ; rdfs:domain :Performance ; rdfs:range :Venue .";
    yes.label = BinaryLabel::Yes;
    yes.query =
        "PREFIX : <http://example.org/concert#>\n"
        "SELECT DISTINCT ?musician WHERE {\n"
        "  ?performance a :Performance ;\n"
        "               :hasPerformer ?musician ;\n"
        "               :takesPlaceAt ?venue .\n"
        "  ?venue a :Venue .\n"
        "}";

    Exemplar no;
    no.story = "A hospital tracks patients, the wards they stay in and the treatments they receive.";
    no.cq = "Which treatments did a patient receive during a given stay?";
    no.ontology_excerpt =
        "@prefix : <http://example.org/hospital#> .\n"
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        ":Patient a owl:Class .\n:Ward a owl:Class .\n:Treatment a owl:Class .\n"
        ":staysIn a owl:ObjectProperty ; rdfs:domain :Patient ; rdfs:range :Ward .";
    no.label = BinaryLabel::No;
    no.partial = true;
    no.query =
        "PREFIX : <http://example.org/hospital#>\n"
        "SELECT ?patient ?ward WHERE {\n"
        "  ?patient a :Patient ;\n"
        "           :staysIn ?ward .\n"
        "}";
    return {yes, no};
}

std::vector<Exemplar> load_exemplars(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open shots file " + path.string());
    std::vector<Exemplar> out;
    try {
        json list = json::parse(in);
        for (const auto& j : list) {
            Exemplar e;
            e.story = j.at("story").get<std::string>();
            e.cq = j.at("cq").get<std::string>();
            e.ontology_excerpt = j.at("ontology").get<std::string>();
            auto label = parse_binary_label(j.at("label").get<std::string>());
            if (!label) throw Error(ErrorKind::InvalidArgument, "shot label must be yes or no");
            e.label = *label;
            e.query = j.value("query", "");
            e.partial = j.value("partial", false);
            if (j.contains("record_id")) e.source_record_id = j["record_id"].get<std::string>();
            out.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, "invalid shots file " + path.string() + ": " + e.what());
    }
    return out;
}

std::string build_prompt(const PromptSpec& spec, const PromptTemplate& tmpl) {
    auto missing = [](const std::string& what) { return Error(ErrorKind::MissingSection, "prompt section missing: " + what); };
    if (is_blank(spec.task_description)) throw missing("task description");
    if (spec.shots.empty()) throw missing("exemplars");
    bool has_yes = false;
    bool has_no = false;
    for (const auto& s : spec.shots) (s.label == BinaryLabel::Yes ? has_yes : has_no) = true;
    if (!has_yes) throw missing("positive (Yes) exemplar");
    if (!has_no) throw missing("negative (No) exemplar");
    if (is_blank(spec.story)) throw missing("story");
    if (is_blank(spec.cq)) throw missing("competency question");
    if (is_blank(spec.ontology_text)) throw missing("ontology");

    std::string shots;
    for (std::size_t i = 0; i < spec.shots.size(); ++i) {
        if (i) shots += "\n";
        shots += render_exemplar(spec.shots[i], i + 1);
    }
    return tmpl.render({{"task", trim(spec.task_description)},
                        {"shots", trim(shots)},
                        {"story", trim(spec.story)},
                        {"cq", trim(spec.cq)},
                        {"ontology", trim(spec.ontology_text)}});
}

// ---------------------------------------------------------------------------
// Extraction

std::string render_completion(const Suggestion& s) {
    std::string out = std::string("Answer: ") + (s.label == BinaryLabel::Yes ? "Yes" : "No") + "\n";
    out += std::string("Partial: ") + (s.partial ? "yes" : "no") + "\n";
    if (!s.sparql.empty()) out += "```sparql\n" + s.sparql + "\n```\n";
    return out;
}

Suggestion extract_answer(const std::string& completion) {
    static const std::regex kAnswer(R"(^[\s>#*_-]*(final\s+answer|answer|label|verdict)[\s*_]*[:=\-][\s*_]*(yes|no)\b)",
                                    std::regex::icase);
    static const std::regex kPartial(R"(^[\s>#*_-]*partial[\s*_]*[:=\-][\s*_]*(yes|true|no|false)\b)", std::regex::icase);

    auto lines = split_lines(completion);
    std::optional<BinaryLabel> label;
    std::optional<bool> partial_flag;
    for (const auto& line : lines) {
        std::smatch m;
        if (!label && std::regex_search(line, m, kAnswer)) {
            label = lower(m[2].str()) == "yes" ? BinaryLabel::Yes : BinaryLabel::No;
        } else if (!partial_flag && std::regex_search(line, m, kPartial)) {
            auto v = lower(m[1].str());
            partial_flag = v == "yes" || v == "true";
        }
    }
    if (!label) throw Error(ErrorKind::ExtractionFailure, "no recognizable 'Answer: Yes|No' line in completion");

    Suggestion s;
    s.label = *label;
    s.raw_completion = completion;
    auto block = find_fenced(completion);
    if (!block) block = find_keyword_query(completion);
    if (block) s.sparql = block->text;

    if (s.label == BinaryLabel::No) {
        if (partial_flag) {
            s.partial = *partial_flag;
        } else if (block) {
            // Heading such as "Partial SPARQL query:" just above the block, or a "# partial" comment.
            bool marked = lower(block->fence_info).find("partial") != std::string::npos ||
                          lower(block->text).find("# partial") != std::string::npos;
            for (std::size_t k = 1; k <= 2 && !marked && block->first_line >= k; ++k) {
                marked = lower(lines[block->first_line - k]).find("partial") != std::string::npos;
            }
            if (block->first_line < lines.size()) {
                marked = marked || lower(lines[block->first_line]).find("partial") != std::string::npos;
            }
            s.partial = marked;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Pipeline

std::string request_judgment(const std::string& prompt, CompletionClient& client, int run_index) {
    return client.request(prompt, run_index).text;
}

std::string prompt_for(const CQRecord& record, const Corpus& corpus, const JudgeContext& ctx) {
    const Ontology& o = corpus.ontology_of(record);
    PromptSpec spec{ctx.task_description, ctx.shots, record.story_text, record.cq_text,
                    rdf::write_turtle(o.graph, o.prefixes)};
    return build_prompt(spec, ctx.prompt_template);
}

JudgeResult judge_record(const CQRecord& record, const Corpus& corpus, const JudgeContext& ctx,
                         CompletionClient& client, int run_index) {
    JudgeResult result;
    result.record_id = record.id;
    result.run_index = run_index;
    auto start = std::chrono::steady_clock::now();
    std::string raw;
    try {
        std::string prompt = prompt_for(record, corpus, ctx);
        Completion c = client.request(prompt, run_index, record.id);
        raw = c.text;
        result.cache_hit = c.cache_hit;
        result.outcome = extract_answer(raw);
    } catch (const Error& e) {
        result.outcome = JudgeFailure{e.kind(), e.what(), raw};
    } catch (const std::exception& e) {
        result.outcome = JudgeFailure{ErrorKind::BackendUnavailable, e.what(), raw};
    }
    result.latency = std::chrono::steady_clock::now() - start;
    return result;
}

JudgeBatch run_judge(const Corpus& corpus, const JudgeContext& ctx, CompletionClient& client,
                     const JudgeRunOptions& options) {
    if (options.runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
    JudgeBatch batch;
    std::set<std::string> shot_ids;
    for (const auto& s : ctx.shots) {
        if (s.source_record_id) shot_ids.insert(*s.source_record_id);
    }
    std::vector<const CQRecord*> eval;
    for (const auto& r : corpus.records) {
        if (shot_ids.count(r.id)) {
            batch.excluded_shot_records.push_back(r.id);
        } else {
            eval.push_back(&r);
        }
    }

    const unsigned jobs = std::max(1u, options.jobs);
    std::mutex progress_mutex;
    for (int run = 1; run <= options.runs; ++run) {
        if (run > 1 && client.config().backend == BackendKind::RemoteHTTP && client.config().run_spacing) {
            auto sleep = options.sleeper ? options.sleeper
                                         : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
            sleep(*client.config().run_spacing);
        }
        JudgeRun jr;
        jr.run_index = run;
        jr.results.resize(eval.size());
        std::atomic<std::size_t> next{0};
        std::size_t done = 0;
        auto worker = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= eval.size()) return;
                jr.results[i] = judge_record(*eval[i], corpus, ctx, client, run);
                if (options.on_result) {
                    std::lock_guard lock(progress_mutex);
                    options.on_result(jr.results[i], ++done, eval.size());
                }
            }
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < std::min<std::size_t>(jobs, eval.size()); ++t) pool.emplace_back(worker);
        }
        batch.runs.push_back(std::move(jr));
    }
    return batch;
}

json to_json(const Suggestion& s) {
    return {{"label", to_string(s.label)}, {"sparql", s.sparql}, {"partial", s.partial}, {"raw_completion", s.raw_completion}};
}

Suggestion suggestion_from_json(const json& j) {
    Suggestion s;
    auto label = parse_binary_label(j.at("label").get<std::string>());
    if (!label) throw Error(ErrorKind::InvalidArgument, "suggestion label must be yes or no");
    s.label = *label;
    s.sparql = j.value("sparql", "");
    s.partial = j.value("partial", false) && s.label == BinaryLabel::No;
    s.raw_completion = j.value("raw_completion", "");
    return s;
}

}  // namespace cqv
