// Solution-mapping evaluation over an in-memory graph.

#include <algorithm>

#include "cqv/sparql.hpp"

namespace cqv::sparql {

namespace {

/// Key under which a pattern variable is stored in a Binding. Blank-node
/// variables get a prefix that cannot collide with `?name` variables.
std::string slot(const Variable& v) { return v.blank ? "_:" + v.name : v.name; }

bool unify(const PatternTerm& pattern, const rdf::Term& value, Binding& b) {
    if (const auto* v = std::get_if<Variable>(&pattern)) {
        auto [it, inserted] = b.emplace(slot(*v), value);
        return inserted || it->second == value;
    }
    return std::get<rdf::Term>(pattern) == value;
}

std::vector<Binding> match(const TriplePattern& tp, const std::vector<Binding>& input, const rdf::Graph& graph) {
    std::vector<Binding> out;
    for (const auto& b : input) {
        for (const auto& t : graph) {
            Binding next = b;
            if (unify(tp.subject, t.subject, next) && unify(tp.predicate, t.predicate, next) &&
                unify(tp.object, t.object, next)) {
                out.push_back(std::move(next));
            }
        }
    }
    return out;
}

bool compatible(const Binding& a, const Binding& b) {
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it != b.end() && it->second != v) return false;
    }
    return true;
}

Binding merge(Binding a, const Binding& b) {
    a.insert(b.begin(), b.end());
    return a;
}

std::vector<Binding> join(const std::vector<Binding>& left, const std::vector<Binding>& right) {
    std::vector<Binding> out;
    for (const auto& l : left) {
        for (const auto& r : right) {
            if (compatible(l, r)) out.push_back(merge(l, r));
        }
    }
    return out;
}

std::vector<Binding> left_join(const std::vector<Binding>& left, const std::vector<Binding>& right) {
    std::vector<Binding> out;
    for (const auto& l : left) {
        bool extended = false;
        for (const auto& r : right) {
            if (compatible(l, r)) {
                out.push_back(merge(l, r));
                extended = true;
            }
        }
        if (!extended) out.push_back(l);
    }
    return out;
}

bool has_filter(const GroupPattern& g) {
    for (const auto& e : g.elements) {
        if (e.kind == PatternElement::Kind::Filter) return true;
        for (const auto& sub : e.groups) {
            if (has_filter(sub)) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Binding> evaluate(const GroupPattern& group, const rdf::Graph& graph) {
    std::vector<Binding> solutions{Binding{}};
    for (const auto& e : group.elements) {
        switch (e.kind) {
            case PatternElement::Kind::Triples:
                for (const auto& tp : e.triples) solutions = match(tp, solutions, graph);
                break;
            case PatternElement::Kind::Group:
                solutions = join(solutions, evaluate(e.groups.front(), graph));
                break;
            case PatternElement::Kind::Union: {
                std::vector<Binding> alternatives;
                for (const auto& g : e.groups) {
                    auto part = evaluate(g, graph);
                    alternatives.insert(alternatives.end(), part.begin(), part.end());
                }
                solutions = join(solutions, alternatives);
                break;
            }
            case PatternElement::Kind::Optional:
                solutions = left_join(solutions, evaluate(e.groups.front(), graph));
                break;
            case PatternElement::Kind::Filter:
                break;  // opaque
        }
        if (solutions.empty()) break;
    }
    return solutions;
}

ResultSet execute(const ParsedQuery& q, const rdf::Graph& graph) {
    ResultSet rs;
    rs.form = q.form;
    rs.filters_ignored = has_filter(q.where);
    auto solutions = evaluate(q.where, graph);
    if (q.form == QueryForm::Ask) {
        rs.ask = !solutions.empty();
        return rs;
    }
    rs.variables = q.projection;
    rs.rows.reserve(solutions.size());
    for (const auto& s : solutions) {
        std::vector<std::optional<rdf::Term>> row;
        row.reserve(rs.variables.size());
        for (const auto& v : rs.variables) {
            auto it = s.find(v);
            row.push_back(it == s.end() ? std::nullopt : std::optional<rdf::Term>(it->second));
        }
        rs.rows.push_back(std::move(row));
    }
    std::sort(rs.rows.begin(), rs.rows.end());
    if (q.distinct) rs.rows.erase(std::unique(rs.rows.begin(), rs.rows.end()), rs.rows.end());
    std::size_t offset = std::min(q.offset.value_or(0), rs.rows.size());
    rs.rows.erase(rs.rows.begin(), rs.rows.begin() + static_cast<std::ptrdiff_t>(offset));
    if (q.limit && *q.limit < rs.rows.size()) rs.rows.resize(*q.limit);
    return rs;
}

}  // namespace cqv::sparql
