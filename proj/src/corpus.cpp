#include "cqv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "cqv/error.hpp"

namespace cqv {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(GoldLabel label) {
    switch (label) {
        case GoldLabel::Yes: return "yes";
        case GoldLabel::No: return "no";
        case GoldLabel::NoMinor: return "no_minor";
    }
    return "no";
}

std::string to_string(BinaryLabel label) { return label == BinaryLabel::Yes ? "yes" : "no"; }

std::string to_string(Source source) { return source == Source::HumanCurated ? "human" : "llm"; }

std::optional<BinaryLabel> parse_binary_label(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "yes") return BinaryLabel::Yes;
    if (s == "no") return BinaryLabel::No;
    return std::nullopt;
}

namespace {

const std::set<std::string>& declaration_types() {
    static const std::set<std::string> types = {
        rdf::vocab::owl("Class"),           rdf::vocab::rdfs("Class"),
        rdf::vocab::owl("ObjectProperty"),  rdf::vocab::owl("DatatypeProperty"),
        rdf::vocab::owl("AnnotationProperty"), rdf::vocab::owl("NamedIndividual"),
    };
    return types;
}

const std::set<std::string>& characteristic_types() {
    static const std::set<std::string> types = {
        rdf::vocab::owl("FunctionalProperty"),   rdf::vocab::owl("InverseFunctionalProperty"),
        rdf::vocab::owl("TransitiveProperty"),   rdf::vocab::owl("SymmetricProperty"),
        rdf::vocab::owl("AsymmetricProperty"),   rdf::vocab::owl("ReflexiveProperty"),
        rdf::vocab::owl("IrreflexiveProperty"),
    };
    return types;
}

const std::set<std::string>& logical_predicates() {
    static const std::set<std::string> preds = {
        rdf::vocab::rdfs("subClassOf"),        rdf::vocab::owl("equivalentClass"),
        rdf::vocab::owl("disjointWith"),       rdf::vocab::owl("disjointUnionOf"),
        rdf::vocab::rdfs("subPropertyOf"),     rdf::vocab::owl("equivalentProperty"),
        rdf::vocab::owl("propertyDisjointWith"), rdf::vocab::owl("inverseOf"),
        rdf::vocab::rdfs("domain"),            rdf::vocab::rdfs("range"),
        rdf::vocab::owl("propertyChainAxiom"), rdf::vocab::owl("hasKey"),
        rdf::vocab::owl("sameAs"),             rdf::vocab::owl("differentFrom"),
        rdf::vocab::owl("unionOf"),            rdf::vocab::owl("intersectionOf"),
        rdf::vocab::owl("oneOf"),              rdf::vocab::owl("complementOf"),
    };
    return preds;
}

const std::set<std::string>& nary_axiom_types() {
    static const std::set<std::string> types = {
        rdf::vocab::owl("AllDisjointClasses"), rdf::vocab::owl("AllDifferent"),
        rdf::vocab::owl("AllDisjointProperties"), rdf::vocab::owl("NegativePropertyAssertion"),
    };
    return types;
}

struct Declarations {
    std::set<std::string> classes;
    std::set<std::string> object_properties;
    std::set<std::string> data_properties;
};

Declarations collect_declarations(const rdf::Graph& graph) {
    Declarations d;
    const std::string type = rdf::vocab::rdf("type");
    for (const auto& t : graph) {
        if (!t.subject.is_iri() || t.predicate.value != type || !t.object.is_iri()) continue;
        const auto& o = t.object.value;
        if (o == rdf::vocab::owl("Class") || o == rdf::vocab::rdfs("Class")) {
            d.classes.insert(t.subject.value);
        } else if (o == rdf::vocab::owl("ObjectProperty")) {
            d.object_properties.insert(t.subject.value);
        } else if (o == rdf::vocab::owl("DatatypeProperty")) {
            d.data_properties.insert(t.subject.value);
        }
    }
    return d;
}

std::string require_string(const json& rec, const char* field, std::size_t index) {
    auto it = rec.find(field);
    if (it == rec.end() || !it->is_string()) {
        throw Error(ErrorKind::ManifestError,
                    "record #" + std::to_string(index) + ": missing or non-string field '" + field + "'");
    }
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& rec, const char* field, std::size_t index) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        throw Error(ErrorKind::ManifestError, "record #" + std::to_string(index) + ": field '" + field + "' must be a string");
    }
    return it->get<std::string>();
}

CQFormalization parse_formalization(const json& j, const std::string& record_id) {
    auto bad = [&](const std::string& why) {
        return Error(ErrorKind::ManifestError, "record '" + record_id + "': invalid formalization: " + why);
    };
    if (!j.is_object()) throw bad("expected an object");
    CQFormalization f;
    try {
        for (const auto& c : j.value("classes", json::array())) f.classes.insert(c.get<std::string>());
        for (const auto& slot : j.value("slots", json::array())) {
            std::set<std::string> alts;
            if (slot.is_string()) {
                alts.insert(slot.get<std::string>());
            } else {
                for (const auto& p : slot) alts.insert(p.get<std::string>());
            }
            f.object_property_slots.push_back(std::move(alts));
        }
        validate(f);
    } catch (const json::exception& e) {
        throw bad(e.what());
    } catch (const Error& e) {
        throw bad(e.what());
    }
    return f;
}

}  // namespace

std::size_t axiom_count(const rdf::Graph& graph) {
    const Declarations decl = collect_declarations(graph);
    const std::string type = rdf::vocab::rdf("type");
    std::size_t count = 0;
    for (const auto& t : graph) {
        const auto& p = t.predicate.value;
        if (t.subject.is_blank()) {
            if (p == type && t.object.is_iri() && nary_axiom_types().count(t.object.value)) ++count;
            continue;
        }
        if (!t.subject.is_iri()) continue;
        if (p == type && t.object.is_iri()) {
            const auto& o = t.object.value;
            if (declaration_types().count(o) || characteristic_types().count(o)) {
                ++count;
            } else if (!rdf::vocab::is_standard(o)) {
                ++count;  // class assertion
            }
            continue;
        }
        if (p == type) {
            ++count;  // class assertion with a class expression
            continue;
        }
        if (logical_predicates().count(p)) {
            ++count;
        } else if (decl.object_properties.count(p) || decl.data_properties.count(p)) {
            ++count;  // property assertion
        }
    }
    return count;
}

Ontology make_ontology(std::string id, rdf::Document doc) {
    Ontology o;
    o.id = std::move(id);
    o.graph = std::move(doc.graph);
    o.prefixes = std::move(doc.prefixes);
    Declarations d = collect_declarations(o.graph);
    o.declared_classes = std::move(d.classes);
    o.declared_object_properties = std::move(d.object_properties);
    o.declared_data_properties = std::move(d.data_properties);
    o.axiom_count = axiom_count(o.graph);
    return o;
}

Ontology load_ontology(const fs::path& path, std::string id) {
    if (!fs::exists(path)) throw Error(ErrorKind::IoError, "ontology file not found: " + path.string());
    Ontology o = make_ontology(id.empty() ? path.filename().string() : std::move(id), rdf::load_document(path));
    o.path = fs::absolute(path).lexically_normal();
    return o;
}

const CQRecord* Corpus::find(const std::string& record_id) const {
    auto it = std::find_if(records.begin(), records.end(), [&](const CQRecord& r) { return r.id == record_id; });
    return it == records.end() ? nullptr : &*it;
}

const Ontology& Corpus::ontology_of(const CQRecord& record) const {
    auto it = ontologies.find(record.ontology_ref);
    if (it == ontologies.end()) {
        throw Error(ErrorKind::ManifestError, "record '" + record.id + "' references unknown ontology '" + record.ontology_ref + "'");
    }
    return it->second;
}

Corpus corpus_from_json(const json& manifest, const fs::path& base_dir) {
    const json* list = &manifest;
    if (manifest.is_object()) {
        auto it = manifest.find("records");
        if (it == manifest.end()) throw Error(ErrorKind::ManifestError, "manifest object has no 'records' array");
        list = &*it;
    }
    if (!list->is_array()) throw Error(ErrorKind::ManifestError, "manifest must be an array of records");

    Corpus corpus;
    std::set<std::string> ids;
    std::size_t index = 0;
    for (const auto& rec : *list) {
        ++index;
        if (!rec.is_object()) throw Error(ErrorKind::ManifestError, "record #" + std::to_string(index) + " is not an object");
        CQRecord r;
        r.id = require_string(rec, "id", index);
        if (!ids.insert(r.id).second) throw Error(ErrorKind::ManifestError, "duplicate record id '" + r.id + "'");
        r.cq_text = require_string(rec, "cq", index);
        r.story_text = require_string(rec, "story", index);
        r.story_oneline = optional_string(rec, "story_oneline", index);
        r.project = require_string(rec, "project", index);
        r.generator_model = optional_string(rec, "generator", index);

        std::string gold = require_string(rec, "gold", index);
        if (gold == "yes") {
            r.gold = GoldLabel::Yes;
        } else if (gold == "no") {
            r.gold = GoldLabel::No;
        } else if (gold == "no_minor") {
            r.gold = GoldLabel::NoMinor;
        } else {
            throw Error(ErrorKind::ManifestError, "record '" + r.id + "': invalid gold '" + gold + "'");
        }

        std::string source = require_string(rec, "source", index);
        if (source == "human") {
            r.source = Source::HumanCurated;
        } else if (source == "llm") {
            r.source = Source::LLMGenerated;
        } else {
            throw Error(ErrorKind::ManifestError, "record '" + r.id + "': invalid source '" + source + "'");
        }
        if (r.source == Source::LLMGenerated && !r.generator_model) {
            throw Error(ErrorKind::ManifestError, "record '" + r.id + "': LLM-generated record needs 'generator'");
        }
        if (r.source == Source::HumanCurated && r.generator_model) {
            throw Error(ErrorKind::ManifestError, "record '" + r.id + "': human-curated record must not have 'generator'");
        }

        if (auto d = optional_string(rec, "difficulty", index)) {
            auto parsed = parse_difficulty(*d);
            if (!parsed) throw Error(ErrorKind::ManifestError, "record '" + r.id + "': invalid difficulty '" + *d + "'");
            r.difficulty = *parsed;
        }
        if (auto it = rec.find("formalization"); it != rec.end() && !it->is_null()) {
            r.formalization = parse_formalization(*it, r.id);
            Difficulty derived = classify_difficulty(*r.formalization);
            if (r.difficulty == Difficulty::Unrated) {
                r.difficulty = derived;
            } else if (r.difficulty != derived) {
                throw Error(ErrorKind::ManifestError, "record '" + r.id + "': difficulty '" + to_string(r.difficulty) +
                                                          "' contradicts its formalization ('" + to_string(derived) + "')");
            }
        }

        std::string onto = require_string(rec, "ontology", index);
        fs::path onto_path = (base_dir / onto).lexically_normal();
        r.ontology_ref = fs::path(onto).lexically_normal().generic_string();
        if (!corpus.ontologies.count(r.ontology_ref)) {
            if (!fs::exists(onto_path)) {
                throw Error(ErrorKind::ManifestError,
                            "record '" + r.id + "': ontology file not found: " + onto_path.string());
            }
            corpus.ontologies.emplace(r.ontology_ref, load_ontology(onto_path, r.ontology_ref));
        }
        corpus.records.push_back(std::move(r));
    }
    return corpus;
}

Corpus load_corpus(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open manifest " + manifest_path.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ManifestError, "manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
    }
    return corpus_from_json(manifest, manifest_path.parent_path());
}

json corpus_to_json(const Corpus& corpus, const fs::path& out_dir) {
    json list = json::array();
    fs::path anchor = fs::absolute(out_dir).lexically_normal();
    for (const auto& r : corpus.records) {
        const Ontology& o = corpus.ontology_of(r);
        json j;
        j["id"] = r.id;
        j["cq"] = r.cq_text;
        j["story"] = r.story_text;
        if (r.story_oneline) j["story_oneline"] = *r.story_oneline;
        j["ontology"] = o.path.empty() ? r.ontology_ref : o.path.lexically_relative(anchor).generic_string();
        j["gold"] = to_string(r.gold);
        j["difficulty"] = to_string(r.difficulty);
        j["source"] = to_string(r.source);
        j["project"] = r.project;
        if (r.generator_model) j["generator"] = *r.generator_model;
        if (r.formalization) {
            json slots = json::array();
            for (const auto& s : r.formalization->object_property_slots) slots.push_back(s);
            j["formalization"] = {{"classes", r.formalization->classes}, {"slots", slots}};
        }
        list.push_back(std::move(j));
    }
    return list;
}

Corpus subset(const Corpus& corpus, const std::vector<std::string>& record_ids) {
    Corpus out;
    for (const auto& id : record_ids) {
        const CQRecord* r = corpus.find(id);
        if (!r) throw Error(ErrorKind::ManifestError, "unknown record id '" + id + "'");
        out.records.push_back(*r);
        out.ontologies.emplace(r->ontology_ref, corpus.ontology_of(*r));
    }
    return out;
}

Distribution describe(std::vector<double> values) {
    Distribution d;
    d.count = values.size();
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    d.min = values.front();
    d.max = values.back();
    d.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::size_t n = values.size();
    d.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    if (n > 1) {
        double ss = 0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return d;
}

StatsSummary corpus_stats(const Corpus& corpus) {
    StatsSummary s;
    s.total = corpus.records.size();
    std::set<std::string> projects;
    for (const auto& r : corpus.records) {
        if (r.normalized_gold() == BinaryLabel::Yes) ++s.modelled;
        if (r.gold == GoldLabel::NoMinor) ++s.no_minor;
        switch (r.difficulty) {
            case Difficulty::Simple: ++s.simple; break;
            case Difficulty::Complex: ++s.complex; break;
            case Difficulty::Unrated: ++s.unrated; break;
        }
        (r.source == Source::HumanCurated ? s.human_curated : s.llm_generated)++;
        projects.insert(r.project);
    }
    s.not_modelled = s.total - s.modelled;
    s.projects = projects.size();
    s.ontologies = corpus.ontologies.size();
    std::vector<double> sizes;
    for (const auto& [id, o] : corpus.ontologies) sizes.push_back(static_cast<double>(o.axiom_count));
    s.axiom_sizes = describe(std::move(sizes));
    return s;
}

json to_json(const StatsSummary& s) {
    return {
        {"total", s.total},
        {"modelled", s.modelled},
        {"not_modelled", s.not_modelled},
        {"no_minor", s.no_minor},
        {"difficulty", {{"simple", s.simple}, {"complex", s.complex}, {"unrated", s.unrated}}},
        {"projects", s.projects},
        {"source", {{"human", s.human_curated}, {"llm", s.llm_generated}}},
        {"ontologies", s.ontologies},
        {"axioms",
         {{"min", s.axiom_sizes.min},
          {"max", s.axiom_sizes.max},
          {"mean", s.axiom_sizes.mean},
          {"median", s.axiom_sizes.median},
          {"std", s.axiom_sizes.stddev}}},
    };
}

std::string render_stats(const StatsSummary& s) {
    std::ostringstream out;
    auto row = [&](const std::string& name, const std::string& value) {
        out << std::left << std::setw(28) << name << value << "\n";
    };
    row("Total CQs", std::to_string(s.total));
    row("Modelled CQs", std::to_string(s.modelled));
    row("Not modelled CQs", std::to_string(s.not_modelled) + " (" + std::to_string(s.no_minor) + " no-minor)");
    row("Difficulty: Simple", std::to_string(s.simple));
    row("Difficulty: Complex", std::to_string(s.complex));
    row("Difficulty: Unrated", std::to_string(s.unrated));
    row("Domains (projects)", std::to_string(s.projects));
    row("Human-curated / LLM", std::to_string(s.human_curated) + " / " + std::to_string(s.llm_generated));
    std::ostringstream sizes;
    sizes << std::fixed << std::setprecision(0) << s.axiom_sizes.min << "-" << s.axiom_sizes.max
          << " (mean " << s.axiom_sizes.mean << ", median " << s.axiom_sizes.median << ", std " << s.axiom_sizes.stddev
          << ")";
    row("Ontologies", std::to_string(s.ontologies));
    row("Axioms per ontology", sizes.str());
    return out.str();
}

}  // namespace cqv
