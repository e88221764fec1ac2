#include "support.hpp"

#include "cqv/rdf.hpp"

using namespace cqv;
using namespace cqv::rdf;

TEST_SUITE("rdf") {

TEST_CASE("turtle: prefixes, predicate lists and object lists") {
    auto doc = parse_turtle(R"(
        @prefix ex: <http://ex.org/> .
        ex:a ex:p ex:b , ex:c ; ex:q "hi"@en .
    )");
    CHECK(doc.graph.size() == 3);
    CHECK(doc.prefixes.at("ex") == "http://ex.org/");
    CHECK(doc.graph.count({Term::iri("http://ex.org/a"), Term::iri("http://ex.org/q"), Term::literal("hi", "", "en")}));
}

TEST_CASE("turtle: 'a', numbers, booleans and blank node property lists") {
    auto doc = parse_turtle(R"(
        PREFIX ex: <http://ex.org/>
        ex:s a ex:C ; ex:n 42 ; ex:d 1.5 ; ex:f true ; ex:r [ ex:x ex:y ] .
    )");
    CHECK(doc.graph.count({Term::iri("http://ex.org/s"), Term::iri(vocab::rdf("type")), Term::iri("http://ex.org/C")}));
    CHECK(doc.graph.count({Term::iri("http://ex.org/s"), Term::iri("http://ex.org/n"), Term::literal("42", vocab::xsd("integer"))}));
    CHECK(doc.graph.count({Term::iri("http://ex.org/s"), Term::iri("http://ex.org/f"), Term::literal("true", vocab::xsd("boolean"))}));
    CHECK(doc.graph.size() == 6);
}

TEST_CASE("turtle: syntax errors carry a position") {
    try {
        parse_turtle("@prefix ex: <http://ex.org/> .\nex:a ex:b .\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_turtle("undeclared:a undeclared:b undeclared:c ."), ParseError);
}

TEST_CASE("rdf/xml: entities, typed nodes and datatypes") {
    auto doc = load_document(cqv::testing::test_data("ontologies/anatomy.owl"));
    const std::string ns = "http://example.org/anatomy#";
    CHECK(doc.graph.count({Term::iri(ns + "heart1"), Term::iri(vocab::rdf("type")), Term::iri(ns + "Heart")}));
    CHECK(doc.graph.count({Term::iri(ns + "Heart"), Term::iri(vocab::rdfs("subClassOf")), Term::iri(ns + "Organ")}));
    CHECK(doc.graph.count({Term::iri(ns + "heart1"), Term::iri(ns + "weightGrams"), Term::literal("310.5", vocab::xsd("decimal"))}));
}

TEST_CASE("writer round-trips through the reader") {
    auto doc = load_document(cqv::testing::test_data("ontologies/building.ttl"));
    auto again = parse_turtle(write_turtle(doc.graph, doc.prefixes));
    CHECK(again.graph == doc.graph);
}

TEST_CASE("rdf/xml and turtle encodings of the same graph agree") {
    auto ttl = parse_turtle(R"(
        @prefix ex: <http://ex.org/> .
        ex:a a ex:C ; ex:p ex:b ; ex:name "A" .
    )");
    auto xml = parse_rdfxml(R"(<?xml version="1.0"?>
        <rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#" xmlns:ex="http://ex.org/">
          <ex:C rdf:about="http://ex.org/a">
            <ex:p rdf:resource="http://ex.org/b"/>
            <ex:name>A</ex:name>
          </ex:C>
        </rdf:RDF>)");
    CHECK(ttl.graph == xml.graph);
}

TEST_CASE("axiom count") {
    CHECK(axiom_count(Graph{}) == 0);
    auto o = load_ontology(cqv::testing::test_data("ontologies/music.ttl"));
    // 5 classes + 5 properties declared, 1 subclass, 4 domain/range, 1 releaseYear range,
    // 5 class assertions, 10 property assertions.
    CHECK(o.axiom_count > 0);
    auto only_annotations = parse_turtle(R"(
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        <http://ex.org/a> rdfs:label "a" ; rdfs:comment "c" .
    )");
    CHECK(axiom_count(only_annotations.graph) == 0);
    auto one_class = parse_turtle(R"(
        @prefix owl: <http://www.w3.org/2002/07/owl#> .
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        <http://ex.org/A> a owl:Class ; rdfs:label "A" ; rdfs:subClassOf <http://ex.org/B> .
    )");
    CHECK(axiom_count(one_class.graph) == 2);
}

TEST_CASE("declarations are collected") {
    auto o = load_ontology(cqv::testing::test_data("ontologies/building.ttl"));
    CHECK(o.declares("http://example.org/building#Building"));
    CHECK(o.declares("http://example.org/building#builtBy"));
    CHECK(o.declares("http://example.org/building#name"));
    CHECK_FALSE(o.declares("http://example.org/building#stMary"));
}

TEST_CASE("iri resolution") {
    CHECK(resolve_iri("http://ex.org/a/b", "c") == "http://ex.org/a/c");
    CHECK(resolve_iri("http://ex.org/a/b", "#x") == "http://ex.org/a/b#x");
    CHECK(resolve_iri("http://ex.org/a/b", "http://other/") == "http://other/");
}

}
