// SPARQL subset parser and canonical printer.

#include "cqv/sparql.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "cqv/error.hpp"

namespace cqv::sparql {

bool PatternElement::operator==(const PatternElement&) const = default;
bool GroupPattern::operator==(const GroupPattern&) const = default;

bool ParsedQuery::operator==(const ParsedQuery& o) const {
    return form == o.form && distinct == o.distinct && select_all == o.select_all && projection == o.projection &&
           prefixes == o.prefixes && base == o.base && where == o.where && order_by == o.order_by &&
           limit == o.limit && offset == o.offset && referenced_iris == o.referenced_iris &&
           referenced_variables == o.referenced_variables;
}

namespace {

bool is_name_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return is_name_start(c) || std::isdigit(u) || c == '-';
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

/// Thrown in lenient mode to abandon the current triples statement.
struct SkipStatement {
    std::string feature;
};

class QueryParser {
public:
    QueryParser(std::string_view text, ParseOptions opts) : text_(text), opts_(opts) {}

    ParsedQuery run() {
        prologue();
        std::string kw = upper(peek_word());
        if (kw == "SELECT") {
            take_word();
            select_clause();
        } else if (kw == "ASK") {
            take_word();
            q_.form = QueryForm::Ask;
        } else if (kw == "CONSTRUCT" || kw == "DESCRIBE") {
            unsupported(kw + " query form", [&] {
                take_word();
                q_.form = QueryForm::Select;
                q_.select_all = true;
                if (kw == "CONSTRUCT") {
                    skip_ws();
                    if (peek() == '{') skip_balanced('{', '}');
                } else {
                    while (!eof() && peek() != '{' && upper(peek_word()) != "WHERE") skip_token();
                }
            });
        } else if (eof()) {
            fail("empty query");
        } else {
            fail("expected SELECT or ASK");
        }
        dataset_clauses();
        skip_ws();
        if (upper(peek_word()) == "WHERE") take_word();
        skip_ws();
        if (peek() != '{') fail("expected '{' to open the WHERE clause");
        q_.where = group();
        solution_modifiers();
        skip_ws();
        if (!eof()) fail(std::string("unexpected trailing input '") + peek() + "'");
        finish();
        return std::move(q_);
    }

private:
    // --- scanning --------------------------------------------------------

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(ErrorKind::QuerySyntaxError, msg, line_, col_);
    }

    [[noreturn]] void fail_unsupported(const std::string& feature) const {
        throw ParseError(ErrorKind::UnsupportedFeature, "unsupported SPARQL feature: " + feature, line_, col_);
    }

    /// Strict mode: throw. Lenient mode: record a warning and run `skip`.
    void unsupported(const std::string& feature, const std::function<void()>& skip) {
        if (!opts_.lenient) fail_unsupported(feature);
        q_.warnings.push_back("skipped unsupported feature: " + feature);
        skip();
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t off = 0) const { return pos_ + off < text_.size() ? text_[pos_ + off] : '\0'; }

    char get() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws() {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip_ws();
        if (eof()) fail(std::string("unexpected end of query, expected '") + c + "'");
        if (peek() != c) fail(std::string("expected '") + c + "' but found '" + peek() + "'");
        get();
    }

    std::string peek_word() {
        skip_ws();
        std::size_t i = pos_;
        while (i < text_.size() && std::isalpha(static_cast<unsigned char>(text_[i]))) ++i;
        // A word followed by ':' is a prefixed name, not a keyword.
        if (i < text_.size() && (text_[i] == ':' || is_name_char(text_[i]))) return {};
        return std::string(text_.substr(pos_, i - pos_));
    }

    std::string take_word() {
        std::string w = peek_word();
        for (std::size_t i = 0; i < w.size(); ++i) get();
        return w;
    }

    void skip_string() {
        char q = get();
        bool long_form = peek() == q && peek(1) == q;
        if (long_form) {
            get();
            get();
            while (!eof() && !(peek() == q && peek(1) == q && peek(2) == q)) {
                if (get() == '\\' && !eof()) get();
            }
            if (eof()) fail("unterminated string");
            get();
            get();
            get();
            return;
        }
        while (!eof() && peek() != q) {
            if (peek() == '\n') fail("newline in string");
            if (get() == '\\' && !eof()) get();
        }
        if (eof()) fail("unterminated string");
        get();
    }

    /// Consumes a balanced (), [] or {} block, honoring strings and comments.
    void skip_balanced(char open, char close) {
        skip_ws();
        if (peek() != open) fail(std::string("expected '") + open + "'");
        int depth = 0;
        while (!eof()) {
            char c = peek();
            if (c == '"' || c == '\'') {
                skip_string();
                continue;
            }
            if (c == '#') {
                while (!eof() && peek() != '\n') get();
                continue;
            }
            get();
            if (c == open) {
                ++depth;
            } else if (c == close) {
                if (--depth == 0) return;
            }
        }
        fail(std::string("unbalanced '") + open + "'");
    }

    void skip_token() {
        skip_ws();
        char c = peek();
        if (c == '"' || c == '\'') {
            skip_string();
        } else if (c == '(') {
            skip_balanced('(', ')');
        } else if (c == '<') {
            while (!eof() && get() != '>') {
            }
        } else {
            get();
            while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '{' && peek() != '(' &&
                   peek() != '}') {
                get();
            }
        }
    }

    /// Skips to the end of the current triples statement: a '.' (consumed)
    /// or a '}' (not consumed) at nesting depth zero.
    void skip_statement() {
        int depth = 0;
        while (!eof()) {
            char c = peek();
            if (c == '"' || c == '\'') {
                skip_string();
                continue;
            }
            if (c == '<' && depth >= 0) {
                // IRI reference.
                std::size_t close = text_.find('>', pos_);
                std::size_t space = text_.find_first_of(" \t\n", pos_);
                if (close != std::string_view::npos && (space == std::string_view::npos || close < space)) {
                    while (pos_ <= close) get();
                    continue;
                }
            }
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']') --depth;
            if (c == '}') {
                if (depth == 0) return;
                --depth;
            }
            if (c == '.' && depth == 0 && !std::isdigit(static_cast<unsigned char>(peek(1)))) {
                get();
                return;
            }
            get();
        }
    }

    // --- terms -----------------------------------------------------------

    std::string iriref() {
        if (peek() != '<') fail("expected IRI");
        get();
        std::string raw;
        while (!eof() && peek() != '>') {
            char c = get();
            if (std::isspace(static_cast<unsigned char>(c))) fail("invalid character in IRI");
            raw += c;
        }
        if (eof()) fail("unterminated IRI");
        get();
        return rdf::resolve_iri(q_.base, raw);
    }

    std::string prefixed_name() {
        std::string prefix;
        while (!eof() && peek() != ':') {
            if (!is_name_char(peek()) && peek() != '.') fail(std::string("unexpected character '") + peek() + "'");
            prefix += get();
        }
        if (eof()) fail("unexpected end of query in prefixed name");
        get();
        std::string local;
        while (!eof()) {
            char c = peek();
            if (is_name_char(c) || c == ':' || std::isdigit(static_cast<unsigned char>(c))) {
                local += get();
            } else if (c == '.' && (is_name_char(peek(1)) || peek(1) == ':')) {
                local += get();
            } else if (c == '\\' && peek(1) != '\0') {
                get();
                local += get();
            } else if (c == '%' && std::isxdigit(static_cast<unsigned char>(peek(1)))) {
                local += get();
                local += get();
                local += get();
            } else {
                break;
            }
        }
        auto it = q_.prefixes.find(prefix);
        if (it != q_.prefixes.end()) return it->second + local;
        static const std::map<std::string, std::string> kStandard = {
            {"rdf", std::string(rdf::vocab::kRdf)},
            {"rdfs", std::string(rdf::vocab::kRdfs)},
            {"owl", std::string(rdf::vocab::kOwl)},
            {"xsd", std::string(rdf::vocab::kXsd)},
        };
        if (opts_.lenient) {
            if (auto s = kStandard.find(prefix); s != kStandard.end()) {
                q_.warnings.push_back("undeclared standard prefix '" + prefix + ":' assumed");
                q_.prefixes[prefix] = s->second;
                return s->second + local;
            }
        }
        fail("undeclared prefix '" + prefix + ":'");
    }

    Variable variable() {
        get();  // ? or $
        std::string name;
        while (!eof() && (is_name_char(peek()) || std::isdigit(static_cast<unsigned char>(peek())))) name += get();
        if (name.empty()) fail("empty variable name");
        return Variable{name, false};
    }

    Variable blank_label() {
        get();
        get();
        std::string label;
        while (!eof() && (is_name_char(peek()) || (peek() == '.' && is_name_char(peek(1))))) label += get();
        if (label.empty()) fail("empty blank node label");
        return Variable{label, true};
    }

    rdf::Term literal() {
        char q = peek();
        std::size_t start = pos_;
        skip_string();
        std::string_view raw = text_.substr(start, pos_ - start);
        bool long_form = raw.size() >= 6 && raw[1] == q && raw[2] == q;
        std::string_view body = long_form ? raw.substr(3, raw.size() - 6) : raw.substr(1, raw.size() - 2);
        std::string lex;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '\\' && i + 1 < body.size()) {
                char e = body[++i];
                switch (e) {
                    case 'n': lex += '\n'; break;
                    case 't': lex += '\t'; break;
                    case 'r': lex += '\r'; break;
                    case 'b': lex += '\b'; break;
                    case 'f': lex += '\f'; break;
                    default: lex += e;
                }
            } else {
                lex += body[i];
            }
        }
        if (peek() == '@') {
            get();
            std::string lang;
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) lang += get();
            if (lang.empty()) fail("empty language tag");
            return rdf::Term::literal(lex, {}, lang);
        }
        if (peek() == '^' && peek(1) == '^') {
            get();
            get();
            std::string dt = peek() == '<' ? iriref() : prefixed_name();
            if (dt == rdf::vocab::xsd("string")) dt.clear();
            return rdf::Term::literal(lex, dt);
        }
        return rdf::Term::literal(lex);
    }

    rdf::Term numeric() {
        std::string lex;
        if (peek() == '+' || peek() == '-') lex += get();
        bool dot = false;
        bool exp = false;
        while (!eof()) {
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                lex += get();
            } else if (c == '.' && !dot && !exp && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                dot = true;
                lex += get();
            } else if ((c == 'e' || c == 'E') && !exp) {
                exp = true;
                lex += get();
                if (peek() == '+' || peek() == '-') lex += get();
            } else {
                break;
            }
        }
        if (lex.empty() || lex == "+" || lex == "-") fail("invalid number");
        return rdf::Term::literal(lex, rdf::vocab::xsd(exp ? "double" : dot ? "decimal" : "integer"));
    }

    Variable fresh_blank() { return Variable{"_anon" + std::to_string(++blank_counter_), true}; }

    /// VarOrTerm in subject/object position, or a blank-node property list.
    PatternTerm node(std::vector<TriplePattern>& out, bool object_position) {
        skip_ws();
        char c = peek();
        if (eof()) fail("unexpected end of query, expected a term");
        if (c == '?' || c == '$') return variable();
        if (c == '<') return rdf::Term::iri(iriref());
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '[') {
            get();
            skip_ws();
            Variable b = fresh_blank();
            if (peek() == ']') {
                get();
                return b;
            }
            property_list(b, out);
            expect(']');
            return b;
        }
        if (c == '(') {
            if (!opts_.lenient) fail_unsupported("RDF collection");
            throw SkipStatement{"RDF collection"};
        }
        if (object_position) {
            if (c == '"' || c == '\'') return literal();
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') return numeric();
            std::string w = upper(peek_word());
            if (w == "TRUE" || w == "FALSE") {
                take_word();
                return rdf::Term::literal(w == "TRUE" ? "true" : "false", rdf::vocab::xsd("boolean"));
            }
        }
        if (c == ':' || is_name_start(c)) return rdf::Term::iri(prefixed_name());
        fail(std::string("unexpected character '") + c + "'");
    }

    PatternTerm verb() {
        skip_ws();
        char c = peek();
        if (c == '^' || c == '!' || c == '(') {
            if (!opts_.lenient) fail_unsupported("property path");
            throw SkipStatement{"property path"};
        }
        PatternTerm v;
        if (c == 'a' && !is_name_char(peek(1)) && peek(1) != ':') {
            get();
            v = rdf::Term::iri(rdf::vocab::rdf("type"));
        } else if (c == '?' || c == '$') {
            v = variable();
        } else if (c == '<') {
            v = rdf::Term::iri(iriref());
        } else if (c == ':' || is_name_start(c)) {
            if (c == '_' && peek(1) == ':') fail("blank node cannot be a predicate");
            v = rdf::Term::iri(prefixed_name());
        } else {
            fail("expected predicate");
        }
        // Path operators directly after the verb.
        char n = peek();
        bool path = n == '*' || n == '+' || (n == '?' && !is_name_char(peek(1)));
        skip_ws();
        path = path || peek() == '/' || peek() == '|';
        if (path) {
            if (!opts_.lenient) fail_unsupported("property path");
            throw SkipStatement{"property path"};
        }
        return v;
    }

    void property_list(const PatternTerm& subject, std::vector<TriplePattern>& out) {
        for (;;) {
            PatternTerm p = verb();
            for (;;) {
                PatternTerm o = node(out, true);
                out.push_back({subject, p, o});
                skip_ws();
                if (peek() != ',') break;
                get();
            }
            skip_ws();
            if (peek() != ';') return;
            while (peek() == ';') {
                get();
                skip_ws();
            }
            if (peek() == '.' || peek() == ']' || peek() == '}') return;
        }
    }

    /// One TriplesSameSubject statement appended to `out`.
    void triples_statement(std::vector<TriplePattern>& out) {
        skip_ws();
        if (peek() == '[') {
            PatternTerm s = node(out, false);
            skip_ws();
            if (peek() != '.' && peek() != '}') property_list(s, out);
            return;
        }
        PatternTerm s = node(out, false);
        property_list(s, out);
    }

    // --- patterns --------------------------------------------------------

    GroupPattern group() {
        expect('{');
        GroupPattern g;
        skip_ws();
        if (upper(peek_word()) == "SELECT") {
            unsupported("subquery", [&] {
                // Rewind is impossible; consume to the matching close brace.
                int depth = 1;
                while (!eof() && depth > 0) {
                    char c = peek();
                    if (c == '"' || c == '\'') {
                        skip_string();
                        continue;
                    }
                    get();
                    if (c == '{') ++depth;
                    if (c == '}') --depth;
                }
            });
            return g;
        }
        for (;;) {
            skip_ws();
            if (eof()) fail("unexpected end of query, expected '}'");
            char c = peek();
            if (c == '}') {
                get();
                return g;
            }
            if (c == '.') {
                get();
                continue;
            }
            if (c == '{') {
                std::vector<GroupPattern> alts;
                alts.push_back(group());
                while (upper(peek_word()) == "UNION") {
                    take_word();
                    skip_ws();
                    alts.push_back(group());
                }
                PatternElement e;
                if (alts.size() == 1) {
                    e.kind = PatternElement::Kind::Group;
                } else {
                    e.kind = PatternElement::Kind::Union;
                }
                e.groups = std::move(alts);
                g.elements.push_back(std::move(e));
                continue;
            }
            std::string kw = upper(peek_word());
            if (kw == "OPTIONAL") {
                take_word();
                PatternElement e;
                e.kind = PatternElement::Kind::Optional;
                e.groups.push_back(group());
                g.elements.push_back(std::move(e));
                continue;
            }
            if (kw == "FILTER") {
                take_word();
                PatternElement e;
                e.kind = PatternElement::Kind::Filter;
                e.filter = filter_expression();
                g.elements.push_back(std::move(e));
                continue;
            }
            if (kw == "MINUS" || kw == "GRAPH" || kw == "SERVICE") {
                unsupported(kw, [&] {
                    take_word();
                    while (!eof() && peek() != '{') skip_token();
                    skip_balanced('{', '}');
                });
                continue;
            }
            if (kw == "BIND") {
                unsupported("BIND", [&] {
                    take_word();
                    skip_balanced('(', ')');
                });
                continue;
            }
            if (kw == "VALUES") {
                unsupported("VALUES", [&] {
                    take_word();
                    while (!eof() && peek() != '{') skip_token();
                    skip_balanced('{', '}');
                });
                continue;
            }
            // Triples block.
            std::vector<TriplePattern>* block;
            if (!g.elements.empty() && g.elements.back().kind == PatternElement::Kind::Triples) {
                block = &g.elements.back().triples;
            } else {
                PatternElement e;
                e.kind = PatternElement::Kind::Triples;
                g.elements.push_back(std::move(e));
                block = &g.elements.back().triples;
            }
            std::size_t mark = block->size();
            try {
                triples_statement(*block);
            } catch (const SkipStatement& skip) {
                block->resize(mark);
                q_.warnings.push_back("skipped unsupported feature: " + skip.feature);
                skip_statement();
                if (block->empty()) g.elements.pop_back();
                continue;
            }
            skip_ws();
            if (peek() == '.') {
                get();
            } else if (peek() != '}' && peek() != '{' && upper(peek_word()).empty()) {
                fail(std::string("expected '.' or '}' but found '") + (eof() ? std::string("end of query") : std::string(1, peek())) + "'");
            }
        }
    }

    std::string filter_expression() {
        skip_ws();
        std::size_t start = pos_;
        std::string kw = upper(peek_word());
        if (kw == "NOT" || kw == "EXISTS") {
            take_word();
            if (kw == "NOT") {
                if (upper(take_word()) != "EXISTS") fail("expected EXISTS after NOT");
            }
            skip_balanced('{', '}');
        } else if (peek() == '(') {
            skip_balanced('(', ')');
        } else if (!kw.empty() || is_name_start(peek()) || peek() == '<') {
            // Function call: name or IRI followed by an argument list.
            if (peek() == '<') {
                while (!eof() && get() != '>') {
                }
            } else {
                while (!eof() && (is_name_char(peek()) || peek() == ':')) get();
            }
            skip_balanced('(', ')');
        } else {
            fail("malformed FILTER");
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    // --- query-level clauses --------------------------------------------

    void prologue() {
        for (;;) {
            std::string kw = upper(peek_word());
            if (kw == "PREFIX") {
                take_word();
                skip_ws();
                std::string name;
                while (!eof() && peek() != ':') {
                    if (!is_name_char(peek()) && peek() != '.') fail("invalid prefix name");
                    name += get();
                }
                if (eof()) fail("unexpected end of query in PREFIX");
                get();
                skip_ws();
                q_.prefixes[name] = iriref();
            } else if (kw == "BASE") {
                take_word();
                skip_ws();
                q_.base = iriref();
            } else {
                return;
            }
        }
    }

    void select_clause() {
        std::string mod = upper(peek_word());
        if (mod == "DISTINCT" || mod == "REDUCED") {
            take_word();
            q_.distinct = true;
        }
        skip_ws();
        if (peek() == '*') {
            get();
            q_.select_all = true;
            return;
        }
        for (;;) {
            skip_ws();
            if (peek() == '?' || peek() == '$') {
                Variable v = variable();
                if (std::find(q_.projection.begin(), q_.projection.end(), v.name) == q_.projection.end()) {
                    q_.projection.push_back(v.name);
                }
            } else if (peek() == '(') {
                unsupported("projection expression", [&] { skip_balanced('(', ')'); });
            } else {
                break;
            }
        }
        if (q_.projection.empty() && q_.warnings.empty()) fail("SELECT must project at least one variable");
    }

    void dataset_clauses() {
        while (upper(peek_word()) == "FROM") {
            unsupported("FROM dataset clause", [&] {
                take_word();
                if (upper(peek_word()) == "NAMED") take_word();
                skip_ws();
                if (peek() == '<') {
                    iriref();
                } else {
                    prefixed_name();
                }
            });
        }
    }

    void solution_modifiers() {
        for (;;) {
            std::string kw = upper(peek_word());
            if (kw == "GROUP" || kw == "HAVING") {
                unsupported(kw == "GROUP" ? "GROUP BY" : "HAVING", [&] {
                    take_word();
                    for (;;) {
                        std::string w = upper(peek_word());
                        if (eof() || w == "ORDER" || w == "LIMIT" || w == "OFFSET" || w == "HAVING" || w == "VALUES" ||
                            (w == "GROUP" && kw != "GROUP")) {
                            break;
                        }
                        skip_token();
                    }
                });
            } else if (kw == "ORDER") {
                take_word();
                if (upper(take_word()) != "BY") fail("expected BY after ORDER");
                skip_ws();
                std::size_t start = pos_;
                for (;;) {
                    std::string w = upper(peek_word());
                    if (eof() || w == "LIMIT" || w == "OFFSET" || w == "VALUES") break;
                    skip_token();
                }
                std::string raw(text_.substr(start, pos_ - start));
                while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.pop_back();
                if (raw.empty()) fail("empty ORDER BY");
                q_.order_by = raw;
            } else if (kw == "LIMIT" || kw == "OFFSET") {
                take_word();
                skip_ws();
                std::string digits;
                while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits += get();
                if (digits.empty()) fail("expected a number after " + kw);
                (kw == "LIMIT" ? q_.limit : q_.offset) = std::stoul(digits);
            } else if (kw == "VALUES") {
                unsupported("VALUES", [&] {
                    take_word();
                    while (!eof()) skip_token();
                });
            } else {
                return;
            }
        }
    }

    // --- derived sets ----------------------------------------------------

    void collect(const GroupPattern& g) {
        for (const auto& e : g.elements) {
            for (const auto& t : e.triples) {
                for (const PatternTerm* pt : {&t.subject, &t.predicate, &t.object}) {
                    if (const auto* v = std::get_if<Variable>(pt)) {
                        if (!v->blank) q_.referenced_variables.insert(v->name);
                    } else {
                        const auto& term = std::get<rdf::Term>(*pt);
                        if (term.is_iri()) q_.referenced_iris.insert(term.value);
                    }
                }
            }
            for (const auto& sub : e.groups) collect(sub);
        }
    }

    void finish() {
        collect(q_.where);
        if (q_.form == QueryForm::Select && q_.select_all) {
            q_.projection.assign(q_.referenced_variables.begin(), q_.referenced_variables.end());
            if (q_.projection.empty() && !opts_.lenient) fail("SELECT * over a pattern without variables");
        }
    }

    std::string_view text_;
    ParseOptions opts_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    std::size_t blank_counter_ = 0;
    ParsedQuery q_;
};

// --- printing ---------------------------------------------------------------

std::string term_text(const PatternTerm& t) {
    if (const auto* v = std::get_if<Variable>(&t)) return v->blank ? "_:" + v->name : "?" + v->name;
    return rdf::to_ntriples(std::get<rdf::Term>(t));
}

void print_group(std::ostream& out, const GroupPattern& g, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out << "{\n";
    for (const auto& e : g.elements) {
        switch (e.kind) {
            case PatternElement::Kind::Triples:
                for (const auto& t : e.triples) {
                    out << pad << "  " << term_text(t.subject) << " " << term_text(t.predicate) << " "
                        << term_text(t.object) << " .\n";
                }
                break;
            case PatternElement::Kind::Optional:
                out << pad << "  OPTIONAL ";
                print_group(out, e.groups.front(), indent + 1);
                out << "\n";
                break;
            case PatternElement::Kind::Group:
                out << pad << "  ";
                print_group(out, e.groups.front(), indent + 1);
                out << "\n";
                break;
            case PatternElement::Kind::Union:
                out << pad << "  ";
                for (std::size_t i = 0; i < e.groups.size(); ++i) {
                    if (i) out << " UNION ";
                    print_group(out, e.groups[i], indent + 1);
                }
                out << "\n";
                break;
            case PatternElement::Kind::Filter:
                out << pad << "  FILTER " << e.filter << "\n";
                break;
        }
    }
    out << pad << "}";
}

}  // namespace

ParsedQuery parse_query(std::string_view text, const ParseOptions& options) {
    return QueryParser(text, options).run();
}

std::string to_string(const ParsedQuery& q) {
    std::ostringstream out;
    if (!q.base.empty()) out << "BASE <" << q.base << ">\n";
    for (const auto& [name, iri] : q.prefixes) out << "PREFIX " << name << ": <" << iri << ">\n";
    if (q.form == QueryForm::Ask) {
        out << "ASK ";
    } else {
        out << "SELECT ";
        if (q.distinct) out << "DISTINCT ";
        if (q.select_all) {
            out << "* ";
        } else {
            for (const auto& v : q.projection) out << "?" << v << " ";
        }
        out << "WHERE ";
    }
    print_group(out, q.where, 0);
    out << "\n";
    if (q.order_by) out << "ORDER BY " << *q.order_by << "\n";
    if (q.limit) out << "LIMIT " << *q.limit << "\n";
    if (q.offset) out << "OFFSET " << *q.offset << "\n";
    return out.str();
}

}  // namespace cqv::sparql
