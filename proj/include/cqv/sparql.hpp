/// @file sparql.hpp
/// @brief SPARQL 1.1 subset: SELECT/ASK over basic graph patterns with
/// UNION, OPTIONAL, nested groups and opaque FILTERs.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cqv/rdf.hpp"

namespace cqv::sparql {

enum class QueryForm { Select, Ask };

/// `?name` in the query text; blank nodes (`[]`, `_:b`) become non-projectable
/// variables with `blank = true`.
struct Variable {
    std::string name;
    bool blank = false;

    auto operator<=>(const Variable&) const = default;
};

using PatternTerm = std::variant<Variable, rdf::Term>;

struct TriplePattern {
    PatternTerm subject;
    PatternTerm predicate;
    PatternTerm object;

    bool operator==(const TriplePattern&) const = default;
};

struct GroupPattern;

struct PatternElement {
    enum class Kind { Triples, Optional, Union, Group, Filter };

    Kind kind = Kind::Triples;
    std::vector<TriplePattern> triples;  // Triples
    std::vector<GroupPattern> groups;    // Optional: 1, Union: >= 2, Group: 1
    std::string filter;                  // Filter: raw expression text

    bool operator==(const PatternElement&) const;
};

struct GroupPattern {
    std::vector<PatternElement> elements;

    bool operator==(const GroupPattern&) const;
};

struct ParsedQuery {
    QueryForm form = QueryForm::Select;
    bool distinct = false;
    bool select_all = false;
    std::vector<std::string> projection;  // explicit or, for SELECT *, in-scope variables
    std::map<std::string, std::string> prefixes;
    std::string base;
    GroupPattern where;
    std::optional<std::string> order_by;  // raw text, kept opaque
    std::optional<std::size_t> limit;
    std::optional<std::size_t> offset;
    std::set<std::string> referenced_iris;
    std::set<std::string> referenced_variables;
    std::vector<std::string> warnings;  // lenient mode only

    /// Structural equality (warnings ignored).
    bool operator==(const ParsedQuery& other) const;
};

struct ParseOptions {
    /// Skip unsupported constructs with a warning instead of throwing.
    bool lenient = false;
};

/// Throws ParseError with kind QuerySyntaxError (with position) or
/// UnsupportedFeature (message names the feature).
ParsedQuery parse_query(std::string_view text, const ParseOptions& options = {});

/// Canonical text: PREFIX/BASE declarations, then the query with full IRIs.
std::string to_string(const ParsedQuery& q);

using Binding = std::map<std::string, rdf::Term>;

struct ResultSet {
    QueryForm form = QueryForm::Select;
    bool ask = false;
    std::vector<std::string> variables;
    /// Rows aligned with `variables`; unbound cells are nullopt. Sorted.
    std::vector<std::vector<std::optional<rdf::Term>>> rows;
    bool filters_ignored = false;

    bool empty() const { return form == QueryForm::Ask ? !ask : rows.empty(); }
};

/// Evaluates the query over `graph` (FILTERs are not evaluated). Rows are
/// ordered by variable (projection order), then term.
ResultSet execute(const ParsedQuery& q, const rdf::Graph& graph);

/// Solution multiset of a group pattern over all variables (unsorted).
std::vector<Binding> evaluate(const GroupPattern& group, const rdf::Graph& graph);

}  // namespace cqv::sparql
