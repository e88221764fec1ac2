// Recursive-descent Turtle reader (RDF 1.1 Turtle, plus SPARQL-style PREFIX/BASE).

#include <cctype>
#include <cstdint>
#include <optional>

#include "cqv/error.hpp"
#include "cqv/rdf.hpp"

namespace cqv::rdf {
namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_name_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return is_name_start(c) || std::isdigit(u) || c == '-';
}

class TurtleParser {
public:
    TurtleParser(std::string_view text, std::string_view base) : text_(text), base_(base) {}

    Document run() {
        skip_ws();
        while (!eof()) {
            statement();
            skip_ws();
        }
        return std::move(doc_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(ErrorKind::ParseError, msg, line_, col_);
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

    void expect(char c) {
        skip_ws();
        if (eof()) fail(std::string("unexpected end of input, expected '") + c + "'");
        if (peek() != c) fail(std::string("expected '") + c + "' but found '" + peek() + "'");
        get();
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

    bool match_keyword_ci(std::string_view kw) {
        if (pos_ + kw.size() > text_.size()) return false;
        for (std::size_t i = 0; i < kw.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(text_[pos_ + i])) != std::tolower(static_cast<unsigned char>(kw[i]))) {
                return false;
            }
        }
        char after = peek(kw.size());
        if (is_name_char(after) || after == ':') return false;
        for (std::size_t i = 0; i < kw.size(); ++i) get();
        return true;
    }

    void statement() {
        if (peek() == '@') {
            get();
            if (match_keyword_ci("prefix")) {
                prefix_decl();
                expect('.');
            } else if (match_keyword_ci("base")) {
                skip_ws();
                base_ = iriref();
                expect('.');
            } else {
                fail("unknown directive");
            }
            return;
        }
        if (match_keyword_ci("PREFIX")) {
            prefix_decl();
            return;
        }
        if (match_keyword_ci("BASE")) {
            skip_ws();
            base_ = iriref();
            return;
        }
        triples();
        expect('.');
    }

    void prefix_decl() {
        skip_ws();
        std::string name;
        while (!eof() && peek() != ':') {
            if (!is_name_char(peek()) && peek() != '.') fail("invalid prefix name");
            name += get();
        }
        if (eof()) fail("unexpected end of input in prefix declaration");
        get();  // ':'
        skip_ws();
        doc_.prefixes[name] = iriref();
    }

    void triples() {
        skip_ws();
        if (peek() == '[') {
            Term subject = blank_node_property_list();
            skip_ws();
            if (peek() != '.') predicate_object_list(subject);
        } else {
            Term subject = subject_term();
            predicate_object_list(subject);
        }
    }

    Term subject_term() {
        skip_ws();
        char c = peek();
        if (c == '<' || c == ':' || is_name_start(c)) {
            if (c == '_' && peek(1) == ':') return blank_label();
            return iri_term();
        }
        if (c == '(') return collection();
        if (c == '_' && peek(1) == ':') return blank_label();
        fail("expected subject");
    }

    void predicate_object_list(const Term& subject) {
        for (;;) {
            skip_ws();
            Term predicate = verb();
            object_list(subject, predicate);
            skip_ws();
            if (peek() != ';') return;
            while (peek() == ';') {
                get();
                skip_ws();
            }
            // A trailing ';' before '.' or ']' is allowed.
            if (peek() == '.' || peek() == ']' || eof()) return;
        }
    }

    Term verb() {
        skip_ws();
        if (peek() == 'a' && !is_name_char(peek(1)) && peek(1) != ':') {
            get();
            return Term::iri(vocab::rdf("type"));
        }
        if (peek() == '<' || peek() == ':' || is_name_start(peek())) {
            if (peek() == '_' && peek(1) == ':') fail("blank node cannot be a predicate");
            return iri_term();
        }
        fail("expected predicate");
    }

    void object_list(const Term& subject, const Term& predicate) {
        for (;;) {
            Term object = object_term();
            doc_.graph.insert({subject, predicate, std::move(object)});
            skip_ws();
            if (peek() != ',') return;
            get();
        }
    }

    Term object_term() {
        skip_ws();
        char c = peek();
        if (eof()) fail("unexpected end of input, expected object");
        if (c == '<') return iri_term();
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '[') return blank_node_property_list();
        if (c == '(') return collection();
        if (c == '"' || c == '\'') return literal();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            return numeric();
        }
        if (match_keyword_ci("true")) return Term::literal("true", vocab::xsd("boolean"));
        if (match_keyword_ci("false")) return Term::literal("false", vocab::xsd("boolean"));
        if (c == ':' || is_name_start(c)) return iri_term();
        fail(std::string("unexpected character '") + c + "'");
    }

    Term iri_term() {
        skip_ws();
        if (peek() == '<') return Term::iri(iriref());
        return Term::iri(prefixed_name());
    }

    std::string iriref() {
        if (peek() != '<') fail("expected IRI");
        get();
        std::string raw;
        while (!eof() && peek() != '>') {
            char c = get();
            if (c == '\n' || c == ' ') fail("invalid character in IRI");
            if (c == '\\') {
                raw += unicode_escape();
            } else {
                raw += c;
            }
        }
        if (eof()) fail("unterminated IRI");
        get();
        return resolve_iri(base_, raw);
    }

    std::string unicode_escape() {
        char kind = eof() ? '\0' : get();
        int digits = kind == 'u' ? 4 : kind == 'U' ? 8 : 0;
        if (!digits) fail("invalid escape");
        std::uint32_t cp = 0;
        for (int i = 0; i < digits; ++i) {
            if (eof() || !std::isxdigit(static_cast<unsigned char>(peek()))) fail("invalid unicode escape");
            char h = get();
            cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h)) ? h - '0' : std::tolower(h) - 'a' + 10);
        }
        std::string out;
        append_utf8(out, cp);
        return out;
    }

    std::string prefixed_name() {
        std::string prefix;
        while (!eof() && peek() != ':') {
            char c = peek();
            if (!is_name_char(c) && c != '.') fail(std::string("unexpected character '") + c + "' in prefixed name");
            prefix += get();
        }
        if (eof()) fail("unexpected end of input in prefixed name");
        get();  // ':'
        auto it = doc_.prefixes.find(prefix);
        if (it == doc_.prefixes.end()) fail("undeclared prefix '" + prefix + "'");
        std::string local;
        while (!eof()) {
            char c = peek();
            if (is_name_char(c) || c == ':' || (local.empty() && std::isdigit(static_cast<unsigned char>(c)))) {
                local += get();
            } else if (c == '.') {
                // A '.' only belongs to the name when followed by another name char.
                char n = peek(1);
                if (is_name_char(n) || n == ':' || n == '%' || n == '\\') {
                    local += get();
                } else {
                    break;
                }
            } else if (c == '%') {
                local += get();
                for (int i = 0; i < 2; ++i) {
                    if (!std::isxdigit(static_cast<unsigned char>(peek()))) fail("invalid percent escape");
                    local += get();
                }
            } else if (c == '\\') {
                get();
                if (eof()) fail("unterminated escape");
                local += get();
            } else {
                break;
            }
        }
        return it->second + local;
    }

    Term blank_label() {
        get();
        get();  // "_:"
        std::string label;
        while (!eof() && (is_name_char(peek()) || (peek() == '.' && is_name_char(peek(1))))) label += get();
        if (label.empty()) fail("empty blank node label");
        return Term::blank("b_" + label);
    }

    Term fresh_blank() { return Term::blank("anon" + std::to_string(++blank_counter_)); }

    Term blank_node_property_list() {
        expect('[');
        Term node = fresh_blank();
        skip_ws();
        if (peek() == ']') {
            get();
            return node;
        }
        predicate_object_list(node);
        expect(']');
        return node;
    }

    Term collection() {
        expect('(');
        std::vector<Term> items;
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated collection");
            if (peek() == ')') {
                get();
                break;
            }
            items.push_back(object_term());
        }
        Term nil = Term::iri(vocab::rdf("nil"));
        if (items.empty()) return nil;
        Term head = fresh_blank();
        Term cur = head;
        for (std::size_t i = 0; i < items.size(); ++i) {
            doc_.graph.insert({cur, Term::iri(vocab::rdf("first")), items[i]});
            Term next = i + 1 < items.size() ? fresh_blank() : nil;
            doc_.graph.insert({cur, Term::iri(vocab::rdf("rest")), next});
            cur = next;
        }
        return head;
    }

    Term literal() {
        char q = get();
        bool long_form = peek() == q && peek(1) == q;
        std::string lex;
        if (long_form) {
            get();
            get();
            for (;;) {
                if (eof()) fail("unterminated long string");
                if (peek() == q && peek(1) == q && peek(2) == q) {
                    get();
                    get();
                    get();
                    break;
                }
                char c = get();
                if (c == '\\') {
                    lex += string_escape();
                } else {
                    lex += c;
                }
            }
        } else {
            for (;;) {
                if (eof()) fail("unterminated string");
                char c = get();
                if (c == q) break;
                if (c == '\n') fail("newline in short string");
                if (c == '\\') {
                    lex += string_escape();
                } else {
                    lex += c;
                }
            }
        }
        if (peek() == '@') {
            get();
            std::string lang;
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) lang += get();
            if (lang.empty()) fail("empty language tag");
            return Term::literal(std::move(lex), {}, std::move(lang));
        }
        if (peek() == '^' && peek(1) == '^') {
            get();
            get();
            std::string dt = iri_term().value;
            if (dt == vocab::xsd("string")) dt.clear();
            return Term::literal(std::move(lex), std::move(dt));
        }
        return Term::literal(std::move(lex));
    }

    std::string string_escape() {
        if (eof()) fail("unterminated escape");
        char c = peek();
        switch (c) {
            case 't': get(); return "\t";
            case 'b': get(); return "\b";
            case 'n': get(); return "\n";
            case 'r': get(); return "\r";
            case 'f': get(); return "\f";
            case '"': get(); return "\"";
            case '\'': get(); return "'";
            case '\\': get(); return "\\";
            case 'u':
            case 'U': return unicode_escape();
            default: fail(std::string("invalid escape '\\") + c + "'");
        }
    }

    Term numeric() {
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
        const char* dt = exp ? "double" : dot ? "decimal" : "integer";
        return Term::literal(std::move(lex), vocab::xsd(dt));
    }

    std::string_view text_;
    std::string base_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    std::size_t blank_counter_ = 0;
    Document doc_;
};

}  // namespace

Document parse_turtle(std::string_view text, std::string_view base) {
    return TurtleParser(text, base).run();
}

}  // namespace cqv::rdf
