#include "cqv/verify.hpp"

#include "cqv/error.hpp"

namespace cqv {

using nlohmann::json;

std::string to_string(GroundingVerdict v) {
    switch (v) {
        case GroundingVerdict::FullyGrounded: return "fully_grounded";
        case GroundingVerdict::PartiallyGrounded: return "partially_grounded";
        case GroundingVerdict::Ungrounded: return "ungrounded";
    }
    return "ungrounded";
}

namespace {

bool typed_in(const std::string& iri, const rdf::Graph& g) {
    const std::string type = rdf::vocab::rdf("type");
    for (const auto& t : g) {
        if (t.predicate.value != type) continue;
        if ((t.subject.is_iri() && t.subject.value == iri) || (t.object.is_iri() && t.object.value == iri)) {
            return true;
        }
    }
    return false;
}

GroundingVerdict parse_verdict(const std::string& s) {
    if (s == "fully_grounded") return GroundingVerdict::FullyGrounded;
    if (s == "partially_grounded") return GroundingVerdict::PartiallyGrounded;
    if (s == "ungrounded") return GroundingVerdict::Ungrounded;
    throw Error(ErrorKind::InvalidArgument, "unknown grounding verdict '" + s + "'");
}

}  // namespace

GroundingReport ground_vocabulary(const sparql::ParsedQuery& q, const Ontology& o) {
    GroundingReport r;
    for (const auto& iri : q.referenced_iris) {
        if (rdf::vocab::is_standard(iri)) continue;
        if (o.declares(iri) || typed_in(iri, o.graph)) {
            r.grounded.insert(iri);
        } else {
            r.ungrounded.insert(iri);
        }
    }
    if (r.ungrounded.empty()) {
        r.verdict = GroundingVerdict::FullyGrounded;
    } else if (r.grounded.empty()) {
        r.verdict = GroundingVerdict::Ungrounded;
    } else {
        r.verdict = GroundingVerdict::PartiallyGrounded;
    }
    return r;
}

VerificationVerdict verify_query(const std::string& query_text, const Ontology& o, const VerifyOptions& options) {
    VerificationVerdict v;
    if (query_text.find_first_not_of(" \t\r\n") == std::string::npos) {
        v.error = "no query in suggestion";
        return v;
    }
    sparql::ParsedQuery q;
    try {
        q = sparql::parse_query(query_text, {.lenient = true});
    } catch (const Error& e) {
        v.error = e.what();
        return v;
    }
    v.parse_ok = true;
    v.warnings = q.warnings;
    v.grounding = ground_vocabulary(q, o);
    if (!v.warnings.empty() && v.grounding->verdict == GroundingVerdict::FullyGrounded) {
        v.grounding->verdict = GroundingVerdict::PartiallyGrounded;
    }
    if (options.execute && v.grounding->verdict == GroundingVerdict::FullyGrounded) {
        auto rs = sparql::execute(q, o.graph);
        v.executed = true;
        v.execution_nonempty = !rs.empty();
        v.filters_ignored = rs.filters_ignored;
    }
    return v;
}

VerificationVerdict verify_suggestion(const Suggestion& s, const Ontology& o, const VerifyOptions& options) {
    return verify_query(s.sparql, o, options);
}

json to_json(const GroundingReport& g) {
    return {{"grounded", g.grounded}, {"ungrounded", g.ungrounded}, {"verdict", to_string(g.verdict)}};
}

json to_json(const VerificationVerdict& v) {
    json j = {{"parse_ok", v.parse_ok}};
    if (!v.error.empty()) j["error"] = v.error;
    if (!v.warnings.empty()) j["warnings"] = v.warnings;
    if (v.grounding) j["grounding"] = to_json(*v.grounding);
    if (v.executed) j["executed"] = *v.executed;
    if (v.execution_nonempty) j["execution_nonempty"] = *v.execution_nonempty;
    if (v.filters_ignored) j["filters_ignored"] = true;
    return j;
}

VerificationVerdict verdict_from_json(const json& j) {
    VerificationVerdict v;
    v.parse_ok = j.at("parse_ok").get<bool>();
    v.error = j.value("error", "");
    v.warnings = j.value("warnings", std::vector<std::string>{});
    if (j.contains("grounding")) {
        const auto& g = j.at("grounding");
        GroundingReport r;
        r.grounded = g.at("grounded").get<std::set<std::string>>();
        r.ungrounded = g.at("ungrounded").get<std::set<std::string>>();
        r.verdict = parse_verdict(g.at("verdict").get<std::string>());
        v.grounding = r;
    }
    if (j.contains("executed")) v.executed = j.at("executed").get<bool>();
    if (j.contains("execution_nonempty")) v.execution_nonempty = j.at("execution_nonempty").get<bool>();
    v.filters_ignored = j.value("filters_ignored", false);
    return v;
}

}  // namespace cqv
