#include "support.hpp"

#include <fstream>

#include "cqv/corpus.hpp"

using namespace cqv;
using cqv::testing::require_error;
using cqv::testing::test_data;
using nlohmann::json;

namespace {

json record(const std::string& id, const std::string& gold = "yes") {
    return {{"id", id},       {"cq", "Which A?"},        {"story", "A story."},     {"ontology", "ontologies/music.ttl"},
            {"gold", gold},   {"source", "human"},       {"project", "demo"},       {"difficulty", "simple"}};
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("the fixture manifest loads") {
    Corpus c = load_corpus(test_data("small.json"));
    REQUIRE(c.records.size() == 20);
    CHECK(c.ontologies.size() == 3);
    const CQRecord* b01 = c.find("b01");
    REQUIRE(b01);
    CHECK(b01->source == Source::HumanCurated);
    CHECK(b01->difficulty == Difficulty::Simple);
    REQUIRE(b01->formalization);
    CHECK(b01->formalization->object_property_slots.front() == std::set<std::string>{"builtBy", "renovatedBy"});
    CHECK(c.find("a01")->generator_model == "gpt-4o");
    CHECK(c.find("nope") == nullptr);
    CHECK(c.ontology_of(*b01).declares("http://example.org/building#Building"));
}

TEST_CASE("gold labels normalize NoMinor to No") {
    CHECK(normalize_gold(GoldLabel::Yes) == BinaryLabel::Yes);
    CHECK(normalize_gold(GoldLabel::No) == BinaryLabel::No);
    CHECK(normalize_gold(GoldLabel::NoMinor) == BinaryLabel::No);
    Corpus c = load_corpus(test_data("small.json"));
    std::size_t minor = 0;
    for (const auto& r : c.records) {
        if (r.gold == GoldLabel::NoMinor) {
            ++minor;
            CHECK(r.normalized_gold() == BinaryLabel::No);
        }
    }
    CHECK(minor == 3);
}

TEST_CASE("empty manifest gives an empty corpus") {
    Corpus c = corpus_from_json(json::array(), test_data(""));
    CHECK(c.records.empty());
    CHECK(c.ontologies.empty());
    CHECK(corpus_from_json(json{{"records", json::array()}}, test_data("")).records.empty());
}

TEST_CASE("manifest errors") {
    auto base = test_data("");
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json::array({record("x"), record("x")}), base); });
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json::array({record("x", "maybe")}), base); });
    json missing = record("x");
    missing.erase("cq");
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json::array({missing}), base); });
    json dangling = record("x");
    dangling["ontology"] = "ontologies/absent.ttl";
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json::array({dangling}), base); });
    json llm = record("x");
    llm["source"] = "llm";
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json::array({llm}), base); });
    json contradiction = record("x");
    contradiction["formalization"] = {{"classes", {"A", "B", "C"}}, {"slots", json::array()}};
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json::array({contradiction}), base); });
    require_error(ErrorKind::ManifestError, [&] { corpus_from_json(json{{"nothing", 1}}, base); });
    require_error(ErrorKind::IoError, [&] { load_corpus(test_data("absent.json")); });
}

TEST_CASE("unrated difficulty is derived from the formalization") {
    json r = record("x");
    r.erase("difficulty");
    r["formalization"] = {{"classes", {"A", "B", "C"}}, {"slots", {"p"}}};
    Corpus c = corpus_from_json(json::array({r}), test_data(""));
    CHECK(c.records[0].difficulty == Difficulty::Complex);
}

TEST_CASE("manifest round trip and subset") {
    cqv::testing::TempDir tmp;
    Corpus c = load_corpus(test_data("small.json"));
    std::ofstream(tmp / "m.json") << corpus_to_json(c, tmp.path()).dump();
    Corpus again = load_corpus(tmp / "m.json");
    REQUIRE(again.records.size() == c.records.size());
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        CHECK(again.records[i].id == c.records[i].id);
        CHECK(again.records[i].gold == c.records[i].gold);
        CHECK(again.records[i].formalization == c.records[i].formalization);
        CHECK(again.ontology_of(again.records[i]).graph == c.ontology_of(c.records[i]).graph);
    }
    Corpus sub = subset(c, {"m02", "b01"});
    REQUIRE(sub.records.size() == 2);
    CHECK(sub.records[0].id == "m02");  // requested order
    CHECK(sub.ontologies.size() == 2);
}

TEST_CASE("describe") {
    auto d = describe({15, 15, 15, 44, 100, 168, 567});
    CHECK(d.count == 7);
    CHECK(d.min == 15);
    CHECK(d.max == 567);
    CHECK(d.mean == doctest::Approx(132));
    CHECK(d.median == 44);
    CHECK(describe({1, 2, 3, 4}).median == doctest::Approx(2.5));
    CHECK(describe({}).count == 0);
}

TEST_CASE("corpus statistics") {
    auto s = corpus_stats(load_corpus(test_data("small.json")));
    CHECK(s.total == 20);
    CHECK(s.modelled == 11);
    CHECK(s.not_modelled == 9);
    CHECK(s.no_minor == 3);
    CHECK(s.human_curated == 8);
    CHECK(s.llm_generated == 12);
    CHECK(s.projects == 3);
    CHECK(s.ontologies == 3);
    CHECK(s.axiom_sizes.count == 3);
    CHECK(render_stats(s).find("Total CQs") != std::string::npos);
    CHECK(to_json(s)["total"] == 20);
}

}
