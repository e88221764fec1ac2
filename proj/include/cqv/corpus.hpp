/// @file corpus.hpp
/// @brief Ontologies, CQ records, manifest loading and corpus statistics.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqv/difficulty.hpp"
#include "cqv/rdf.hpp"

namespace cqv {

enum class GoldLabel { Yes, No, NoMinor };
enum class BinaryLabel { Yes, No };
enum class Source { HumanCurated, LLMGenerated };

std::string to_string(GoldLabel label);
std::string to_string(BinaryLabel label);
std::string to_string(Source source);
std::optional<BinaryLabel> parse_binary_label(std::string_view text);

/// Collapses the three-valued annotation onto Yes/No (NoMinor counts as No).
constexpr BinaryLabel normalize_gold(GoldLabel label) {
    return label == GoldLabel::Yes ? BinaryLabel::Yes : BinaryLabel::No;
}

struct Ontology {
    std::string id;
    std::filesystem::path path;
    rdf::Graph graph;
    rdf::PrefixMap prefixes;
    std::set<std::string> declared_classes;
    std::set<std::string> declared_object_properties;
    std::set<std::string> declared_data_properties;
    std::size_t axiom_count = 0;

    bool declares(const std::string& iri) const {
        return declared_classes.count(iri) || declared_object_properties.count(iri) ||
               declared_data_properties.count(iri);
    }
};

/// Builds an Ontology from an already parsed graph (declarations + axiom count).
Ontology make_ontology(std::string id, rdf::Document doc);

/// Reads Turtle or RDF/XML from disk. Throws ParseError / Error(IoError).
Ontology load_ontology(const std::filesystem::path& path, std::string id = {});

/// Entity declarations plus logical axioms; annotation assertions are not counted.
std::size_t axiom_count(const rdf::Graph& graph);
inline std::size_t axiom_count(const Ontology& o) { return axiom_count(o.graph); }

struct CQRecord {
    std::string id;
    std::string cq_text;
    std::string story_text;
    std::optional<std::string> story_oneline;
    std::string ontology_ref;
    GoldLabel gold = GoldLabel::Yes;
    Difficulty difficulty = Difficulty::Unrated;
    Source source = Source::HumanCurated;
    std::string project;
    std::optional<std::string> generator_model;
    std::optional<CQFormalization> formalization;

    BinaryLabel normalized_gold() const { return normalize_gold(gold); }
};

struct Corpus {
    std::vector<CQRecord> records;
    std::map<std::string, Ontology> ontologies;

    const CQRecord* find(const std::string& record_id) const;
    const Ontology& ontology_of(const CQRecord& record) const;
};

/// Loads a JSON manifest. Ontology paths are relative to the manifest's directory.
/// Throws Error(ManifestError) for missing fields, duplicate ids, dangling refs
/// and missing ontology files; ParseError propagates from ontology loading.
Corpus load_corpus(const std::filesystem::path& manifest_path);

/// Parses a manifest document already in memory; `base_dir` anchors ontology paths.
Corpus corpus_from_json(const nlohmann::json& manifest, const std::filesystem::path& base_dir);

/// Serializes `corpus` as a manifest whose ontology paths are relative to `out_dir`.
nlohmann::json corpus_to_json(const Corpus& corpus, const std::filesystem::path& out_dir);

/// Restricts a corpus to the given record ids (order preserved), keeping only referenced ontologies.
Corpus subset(const Corpus& corpus, const std::vector<std::string>& record_ids);

struct Distribution {
    std::size_t count = 0;
    double min = 0;
    double max = 0;
    double mean = 0;
    double median = 0;
    double stddev = 0;  // sample standard deviation
};

Distribution describe(std::vector<double> values);

struct StatsSummary {
    std::size_t total = 0;
    std::size_t modelled = 0;
    std::size_t not_modelled = 0;
    std::size_t no_minor = 0;
    std::size_t simple = 0;
    std::size_t complex = 0;
    std::size_t unrated = 0;
    std::size_t projects = 0;
    std::size_t human_curated = 0;
    std::size_t llm_generated = 0;
    std::size_t ontologies = 0;
    Distribution axiom_sizes;
};

StatsSummary corpus_stats(const Corpus& corpus);
nlohmann::json to_json(const StatsSummary& stats);
std::string render_stats(const StatsSummary& stats);

}  // namespace cqv
