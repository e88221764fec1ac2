#include "support.hpp"

#include "cqv/backend.hpp"
#include "cqv/sampler.hpp"

using namespace cqv;
using cqv::testing::require_error;
using cqv::testing::synthetic_corpus;

namespace {

Corpus pool(std::size_t n = 240) {
    std::vector<GoldLabel> golds;
    std::vector<std::string> projects;
    for (std::size_t i = 0; i < n; ++i) {
        golds.push_back(i % 5 == 4 ? GoldLabel::NoMinor : (i % 5 < 2 ? GoldLabel::No : GoldLabel::Yes));
        projects.push_back("proj" + std::to_string(i % 40));
    }
    return synthetic_corpus(golds, {Source::HumanCurated, Source::LLMGenerated}, projects);
}

struct Counts {
    std::size_t human = 0, llm = 0, yes = 0, no = 0;
    std::map<std::string, std::size_t> per_project;
};

Counts count(const Corpus& c) {
    Counts k;
    for (const auto& r : c.records) {
        (r.source == Source::HumanCurated ? k.human : k.llm)++;
        (r.normalized_gold() == BinaryLabel::Yes ? k.yes : k.no)++;
        ++k.per_project[r.project];
    }
    return k;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("hard filters hold and a perfect balance is found") {
    Corpus c = pool();
    SamplingConstraints sc;
    sc.seed = 3;
    auto res = sample_small(c, sc);
    REQUIRE(res.corpus.records.size() == 20);
    for (const auto& r : res.corpus.records) {
        CHECK(r.gold != GoldLabel::NoMinor);
        CHECK(r.difficulty == Difficulty::Complex);
    }
    auto k = count(res.corpus);
    for (const auto& [p, n] : k.per_project) CHECK(n <= 3);
    CHECK(k.human == 10);
    CHECK(k.llm == 10);
    CHECK(k.yes == 10);
    CHECK(k.no == 10);
    CHECK(res.score == 0);
}

TEST_CASE("sampling is deterministic per seed") {
    Corpus c = pool();
    SamplingConstraints sc;
    sc.seed = 99;
    auto ids = [](const SampleResult& r) {
        std::vector<std::string> out;
        for (const auto& rec : r.corpus.records) out.push_back(rec.id);
        return out;
    };
    CHECK(ids(sample_small(c, sc)) == ids(sample_small(c, sc)));
}

TEST_CASE("output keeps corpus order and referenced ontologies") {
    auto res = sample_small(pool(), SamplingConstraints{});
    for (std::size_t i = 1; i < res.corpus.records.size(); ++i) {
        CHECK(std::stoi(res.corpus.records[i - 1].id.substr(1)) < std::stoi(res.corpus.records[i].id.substr(1)));
    }
    CHECK(res.corpus.ontologies.size() == 1);
}

TEST_CASE("infeasible constraints name the exhausting filter") {
    SamplingConstraints sc;
    sc.target_size = 1000;
    try {
        sample_small(pool(), sc);
        FAIL("expected InfeasibleConstraints");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InfeasibleConstraints);
        CHECK(std::string(e.what()).find("target_size") != std::string::npos);
    }
    sc.target_size = 150;
    try {
        sample_small(pool(), sc);
        FAIL("expected InfeasibleConstraints");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("complex_only") != std::string::npos);
    }
    sc.target_size = 20;
    sc.max_per_project = 1;
    std::vector<GoldLabel> golds(60, GoldLabel::Yes);
    Corpus narrow = synthetic_corpus(golds, {Source::HumanCurated}, {"a", "b", "c"});
    try {
        sample_small(narrow, sc);
        FAIL("expected InfeasibleConstraints");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("max_per_project") != std::string::npos);
    }
}

TEST_CASE("correctness profile steers the selection") {
    Corpus c = pool();
    std::vector<Prediction> prior;
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        const auto& r = c.records[i];
        BinaryLabel gold = r.normalized_gold();
        BinaryLabel wrong = gold == BinaryLabel::Yes ? BinaryLabel::No : BinaryLabel::Yes;
        prior.push_back({r.id, i % 4 ? gold : wrong, "", 1});
    }
    SamplingConstraints sc;
    sc.llm_correctness_profile = std::map<std::string, double>{{"correct", 0.75}};
    auto res = sample_small(c, sc, &prior);
    std::size_t correct = 0;
    for (const auto& r : res.corpus.records) {
        const auto& p = *std::find_if(prior.begin(), prior.end(), [&](const Prediction& x) { return x.record_id == r.id; });
        correct += p.label == r.normalized_gold();
    }
    CHECK(correct == 15);
    CHECK(res.terms.at("correctness") == 0);
}

TEST_CASE("constraint validation and JSON") {
    SamplingConstraints sc;
    sc.weights.source = -1;
    require_error(ErrorKind::InvalidArgument, [&] { validate(sc); });
    sc = SamplingConstraints{};
    sc.llm_correctness_profile = std::map<std::string, double>{{"often", 0.5}};
    require_error(ErrorKind::InvalidArgument, [&] { validate(sc); });
    sc = SamplingConstraints{};
    sc.max_per_project = 2;
    sc.seed = 17;
    auto back = constraints_from_json(to_json(sc));
    CHECK(back.max_per_project == 2);
    CHECK(back.seed == 17);
    CHECK(constraints_from_json(nlohmann::json::object()).target_size == 20);
    require_error(ErrorKind::InvalidArgument, [] { constraints_from_json({{"target_size", "many"}}); });
}

TEST_CASE("single_line") {
    CHECK(single_line("Summary:  A   choir\nrecords concerts. ") == "A choir records concerts.");
    CHECK(single_line("\"Quoted.\"") == "Quoted.");
    std::string long_text(400, 'x');
    for (std::size_t i = 10; i < long_text.size(); i += 11) long_text[i] = ' ';
    auto cut = single_line(long_text, 100);
    CHECK(cut.size() <= 100);
    CHECK(cut.back() != ' ');
    std::string accents;
    for (int i = 0; i < 200; ++i) accents += "\xc3\xa9";  // U+00E9
    auto safe = single_line(accents, 101);
    CHECK(safe.size() == 100);
}

TEST_CASE("condensation") {
    auto backend = std::make_shared<StubBackend>(std::string("Summary: A register of buildings and their builders.\n"));
    CompletionClient client(backend, ModelConfig{});
    CHECK(condense_story("A very long story.", client) == "A register of buildings and their builders.");
    require_error(ErrorKind::EmptyStory, [&] { condense_story("   ", client); });

    int calls = 0;
    auto counting = std::make_shared<StubBackend>([&](const CompletionRequest&) {
        ++calls;
        return std::string("One line.");
    });
    CompletionClient counted(counting, ModelConfig{});
    Corpus c = load_corpus(cqv::testing::test_data("small.json"));
    condense_corpus(c, counted);
    CHECK(calls == 3);
    for (const auto& r : c.records) CHECK(r.story_oneline == "One line.");
}

}
