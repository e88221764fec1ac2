// Shared helpers for the unit tests.
#pragma once

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "cqv/corpus.hpp"
#include "cqv/error.hpp"

namespace cqv::testing {

inline std::filesystem::path data_dir() { return CQV_TEST_DATA; }
inline std::filesystem::path test_data(const std::string& name) { return data_dir() / name; }

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("cqv-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline const char* kTinyOntology = R"(
@prefix : <http://example.org/t#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
:A a owl:Class .
:B a owl:Class .
:p a owl:ObjectProperty .
:x a :A ; :p :y .
:y a :B .
)";

/// In-memory corpus over one tiny ontology. `golds` and `sources` are
/// parallel; LLM records get generator "gen-<i % 2>".
inline Corpus synthetic_corpus(const std::vector<GoldLabel>& golds, const std::vector<Source>& sources,
                               const std::vector<std::string>& projects = {}) {
    Corpus c;
    c.ontologies.emplace("tiny", make_ontology("tiny", rdf::parse_turtle(kTinyOntology)));
    for (std::size_t i = 0; i < golds.size(); ++i) {
        CQRecord r;
        r.id = "r" + std::to_string(i);
        r.cq_text = "Question " + std::to_string(i) + "?";
        r.story_text = "A story about A and B.";
        r.ontology_ref = "tiny";
        r.gold = golds[i];
        r.source = sources[i % sources.size()];
        if (r.source == Source::LLMGenerated) r.generator_model = "gen-" + std::to_string(i % 2);
        r.project = projects.empty() ? "p" + std::to_string(i % 7) : projects[i % projects.size()];
        r.difficulty = i % 3 == 0 ? Difficulty::Simple : Difficulty::Complex;
        c.records.push_back(r);
    }
    return c;
}

/// Checks that `fn` throws cqv::Error of the given kind.
template <typename Fn>
void require_error(ErrorKind kind, Fn&& fn) {
    try {
        fn();
        FAIL("expected Error(" << to_string(kind) << ")");
    } catch (const Error& e) {
        CHECK_MESSAGE(e.kind() == kind, "got " << to_string(e.kind()) << ": " << e.what());
    }
}

}  // namespace cqv::testing
