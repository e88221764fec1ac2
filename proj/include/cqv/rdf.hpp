/// @file rdf.hpp
/// @brief Minimal RDF data model: terms, triples, an ordered triple set,
/// plus the Turtle and RDF/XML readers and a Turtle writer.

#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cqv::rdf {

namespace vocab {
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

inline std::string rdf(std::string_view local) { return std::string(kRdf) + std::string(local); }
inline std::string rdfs(std::string_view local) { return std::string(kRdfs) + std::string(local); }
inline std::string owl(std::string_view local) { return std::string(kOwl) + std::string(local); }
inline std::string xsd(std::string_view local) { return std::string(kXsd) + std::string(local); }

/// True for IRIs in the RDF, RDFS, OWL or XSD namespaces.
bool is_standard(std::string_view iri);
}  // namespace vocab

enum class TermKind { Iri, Blank, Literal };

struct Term {
    TermKind kind = TermKind::Iri;
    std::string value;     // IRI, blank label, or lexical form
    std::string datatype;  // literals only; empty means xsd:string
    std::string language;  // literals only

    static Term iri(std::string v) { return {TermKind::Iri, std::move(v), {}, {}}; }
    static Term blank(std::string v) { return {TermKind::Blank, std::move(v), {}, {}}; }
    static Term literal(std::string lex, std::string dt = {}, std::string lang = {}) {
        return {TermKind::Literal, std::move(lex), std::move(dt), std::move(lang)};
    }

    bool is_iri() const { return kind == TermKind::Iri; }
    bool is_blank() const { return kind == TermKind::Blank; }
    bool is_literal() const { return kind == TermKind::Literal; }

    auto operator<=>(const Term&) const = default;
};

/// N-Triples rendering of a single term.
std::string to_ntriples(const Term& t);

struct Triple {
    Term subject;
    Term predicate;
    Term object;

    auto operator<=>(const Triple&) const = default;
};

using Graph = std::set<Triple>;
using PrefixMap = std::map<std::string, std::string>;

struct Document {
    Graph graph;
    PrefixMap prefixes;
};

/// Parses Turtle text. `base` is the initial base IRI.
/// Throws ParseError (kind ParseError) with line/column on malformed input.
Document parse_turtle(std::string_view text, std::string_view base = {});

/// Parses RDF/XML text.
Document parse_rdfxml(std::string_view text, std::string_view base = {});

/// Dispatches on file extension (.ttl/.n3/.nt -> Turtle, .owl/.rdf/.xml -> RDF/XML);
/// for other extensions sniffs the first non-blank character.
Document load_document(const std::filesystem::path& path);

/// Serializes a graph as Turtle, grouped by subject, using `prefixes` where possible.
std::string write_turtle(const Graph& graph, const PrefixMap& prefixes);

/// Resolves `ref` against `base` (RFC 3986, simplified: no dot-segment removal
/// beyond the last path segment).
std::string resolve_iri(std::string_view base, std::string_view ref);

}  // namespace cqv::rdf
