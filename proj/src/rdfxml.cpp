// RDF/XML reader. XML syntax comes from Boost.PropertyTree; namespace scoping,
// DOCTYPE entity expansion and the RDF/XML grammar are handled here.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "cqv/error.hpp"
#include "cqv/rdf.hpp"

namespace cqv::rdf {
namespace {

namespace pt = boost::property_tree;

struct Scope {
    std::map<std::string, std::string> ns;  // "" is the default namespace
    std::string base;
    std::string lang;
};

/// Expands internal DTD entities (<!ENTITY owl "http://...#">) which the XML
/// reader does not support, then drops the DOCTYPE block.
std::string expand_entities(std::string_view text) {
    std::string s(text);
    auto doctype = s.find("<!DOCTYPE");
    if (doctype == std::string::npos) return s;
    auto open = s.find('[', doctype);
    auto gt = s.find('>', doctype);
    std::size_t end;
    std::map<std::string, std::string> entities;
    if (open != std::string::npos && open < gt) {
        auto close = s.find("]>", open);
        if (close == std::string::npos) {
            throw ParseError(ErrorKind::ParseError, "unterminated DOCTYPE", 0, 0);
        }
        std::string decls = s.substr(open + 1, close - open - 1);
        static const std::regex entity_re(R"(<!ENTITY\s+([A-Za-z_][\w.\-]*)\s+(["'])(.*?)\2\s*>)");
        for (std::sregex_iterator it(decls.begin(), decls.end(), entity_re), stop; it != stop; ++it) {
            entities[(*it)[1]] = (*it)[3];
        }
        end = close + 2;
    } else {
        end = gt + 1;
    }
    // Keep line numbers stable: replace the DOCTYPE block with its newlines.
    std::string filler;
    for (std::size_t i = doctype; i < end; ++i) {
        if (s[i] == '\n') filler += '\n';
    }
    s = s.substr(0, doctype) + filler + s.substr(end);
    if (entities.empty()) return s;
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] == '&') {
            auto semi = s.find(';', i);
            if (semi != std::string::npos) {
                auto it = entities.find(s.substr(i + 1, semi - i - 1));
                if (it != entities.end()) {
                    out += it->second;
                    i = semi + 1;
                    continue;
                }
            }
        }
        out += s[i++];
    }
    return out;
}

class RdfXmlReader {
public:
    explicit RdfXmlReader(std::string base) { root_scope_.base = std::move(base); }

    Document run(const pt::ptree& tree) {
        for (const auto& [name, child] : tree) {
            if (name.starts_with("<")) continue;
            Scope scope = push_scope(root_scope_, child);
            if (expand(name, scope) == vocab::rdf("RDF")) {
                for (const auto& [cname, node] : child) {
                    if (cname.starts_with("<")) continue;
                    node_element(cname, node, scope);
                }
            } else {
                node_element(name, child, root_scope_);
            }
        }
        return std::move(doc_);
    }

private:
    [[noreturn]] static void fail(const std::string& msg) { throw ParseError(ErrorKind::ParseError, msg, 0, 0); }

    static const pt::ptree* attrs(const pt::ptree& node) {
        auto it = node.find("<xmlattr>");
        return it == node.not_found() ? nullptr : &it->second;
    }

    Scope push_scope(const Scope& parent, const pt::ptree& node) {
        Scope scope = parent;
        if (const auto* a = attrs(node)) {
            for (const auto& [k, v] : *a) {
                if (k == "xmlns") {
                    scope.ns[""] = v.data();
                } else if (k.starts_with("xmlns:")) {
                    scope.ns[k.substr(6)] = v.data();
                    doc_.prefixes[k.substr(6)] = v.data();
                } else if (k == "xml:base") {
                    scope.base = resolve_iri(parent.base, v.data());
                } else if (k == "xml:lang") {
                    scope.lang = v.data();
                }
            }
        }
        return scope;
    }

    static std::string expand(const std::string& qname, const Scope& scope) {
        auto colon = qname.find(':');
        std::string prefix = colon == std::string::npos ? "" : qname.substr(0, colon);
        std::string local = colon == std::string::npos ? qname : qname.substr(colon + 1);
        auto it = scope.ns.find(prefix);
        if (it == scope.ns.end()) fail("undeclared namespace prefix '" + prefix + "' in <" + qname + ">");
        return it->second + local;
    }

    static bool is_syntax_attr(const std::string& k) {
        return k == "xmlns" || k.starts_with("xmlns:") || k.starts_with("xml:");
    }

    Term fresh_blank() { return Term::blank("x" + std::to_string(++blank_counter_)); }

    Term node_element(const std::string& name, const pt::ptree& node, const Scope& parent) {
        Scope scope = push_scope(parent, node);
        std::string type_iri = expand(name, scope);
        Term subject;
        bool have_subject = false;
        std::vector<std::pair<std::string, std::string>> props;
        if (const auto* a = attrs(node)) {
            for (const auto& [k, v] : *a) {
                if (is_syntax_attr(k)) continue;
                std::string iri = expand(k, scope);
                if (iri == vocab::rdf("about")) {
                    subject = Term::iri(resolve_iri(scope.base, v.data()));
                    have_subject = true;
                } else if (iri == vocab::rdf("ID")) {
                    subject = Term::iri(resolve_iri(scope.base, "#" + v.data()));
                    have_subject = true;
                } else if (iri == vocab::rdf("nodeID")) {
                    subject = Term::blank("n_" + v.data());
                    have_subject = true;
                } else {
                    props.emplace_back(iri, v.data());
                }
            }
        }
        if (!have_subject) subject = fresh_blank();
        if (type_iri != vocab::rdf("Description")) {
            doc_.graph.insert({subject, Term::iri(vocab::rdf("type")), Term::iri(type_iri)});
        }
        for (const auto& [p, v] : props) {
            if (p == vocab::rdf("type")) {
                doc_.graph.insert({subject, Term::iri(p), Term::iri(resolve_iri(scope.base, v))});
            } else {
                doc_.graph.insert({subject, Term::iri(p), Term::literal(v, {}, scope.lang)});
            }
        }
        int li = 0;
        for (const auto& [cname, child] : node) {
            if (cname.starts_with("<")) continue;
            property_element(cname, child, subject, scope, li);
        }
        return subject;
    }

    void property_element(const std::string& name, const pt::ptree& node, const Term& subject, const Scope& parent,
                          int& li) {
        Scope scope = push_scope(parent, node);
        std::string pred = expand(name, scope);
        if (pred == vocab::rdf("li")) pred = vocab::rdf("_" + std::to_string(++li));
        Term predicate = Term::iri(pred);

        std::optional<Term> object;
        std::string parse_type;
        std::string datatype;
        std::vector<std::pair<std::string, std::string>> props;
        if (const auto* a = attrs(node)) {
            for (const auto& [k, v] : *a) {
                if (is_syntax_attr(k)) continue;
                std::string iri = expand(k, scope);
                if (iri == vocab::rdf("resource")) {
                    object = Term::iri(resolve_iri(scope.base, v.data()));
                } else if (iri == vocab::rdf("nodeID")) {
                    object = Term::blank("n_" + v.data());
                } else if (iri == vocab::rdf("parseType")) {
                    parse_type = v.data();
                } else if (iri == vocab::rdf("datatype")) {
                    datatype = resolve_iri(scope.base, v.data());
                } else if (iri == vocab::rdf("ID")) {
                    // Statement reification is not represented.
                } else {
                    props.emplace_back(iri, v.data());
                }
            }
        }

        std::vector<std::pair<std::string, const pt::ptree*>> children;
        for (const auto& [cname, child] : node) {
            if (!cname.starts_with("<")) children.emplace_back(cname, &child);
        }

        if (parse_type == "Resource") {
            Term b = fresh_blank();
            doc_.graph.insert({subject, predicate, b});
            int inner_li = 0;
            for (const auto& [cname, child] : children) property_element(cname, *child, b, scope, inner_li);
            return;
        }
        if (parse_type == "Collection") {
            std::vector<Term> items;
            for (const auto& [cname, child] : children) items.push_back(node_element(cname, *child, scope));
            Term nil = Term::iri(vocab::rdf("nil"));
            if (items.empty()) {
                doc_.graph.insert({subject, predicate, nil});
                return;
            }
            Term head = fresh_blank();
            doc_.graph.insert({subject, predicate, head});
            Term cur = head;
            for (std::size_t i = 0; i < items.size(); ++i) {
                doc_.graph.insert({cur, Term::iri(vocab::rdf("first")), items[i]});
                Term next = i + 1 < items.size() ? fresh_blank() : nil;
                doc_.graph.insert({cur, Term::iri(vocab::rdf("rest")), next});
                cur = next;
            }
            return;
        }
        if (parse_type == "Literal") {
            std::ostringstream xml;
            for (const auto& [cname, child] : children) {
                pt::ptree wrapper;
                wrapper.add_child(cname, *child);
                pt::write_xml(xml, wrapper);
            }
            doc_.graph.insert({subject, predicate, Term::literal(xml.str(), vocab::rdf("XMLLiteral"))});
            return;
        }

        if (!children.empty()) {
            if (children.size() != 1) fail("property element <" + name + "> has more than one node element");
            Term obj = node_element(children[0].first, *children[0].second, scope);
            doc_.graph.insert({subject, predicate, obj});
            return;
        }
        if (!object && !props.empty()) object = fresh_blank();
        if (object) {
            doc_.graph.insert({subject, predicate, *object});
            for (const auto& [p, v] : props) {
                if (p == vocab::rdf("type")) {
                    doc_.graph.insert({*object, Term::iri(p), Term::iri(resolve_iri(scope.base, v))});
                } else {
                    doc_.graph.insert({*object, Term::iri(p), Term::literal(v, {}, scope.lang)});
                }
            }
            return;
        }
        std::string text = node.data();
        if (!datatype.empty()) {
            if (datatype == vocab::xsd("string")) datatype.clear();
            doc_.graph.insert({subject, predicate, Term::literal(text, datatype)});
        } else {
            doc_.graph.insert({subject, predicate, Term::literal(text, {}, scope.lang)});
        }
    }

    Scope root_scope_;
    Document doc_;
    std::size_t blank_counter_ = 0;
};

}  // namespace

Document parse_rdfxml(std::string_view text, std::string_view base) {
    std::string expanded = expand_entities(text);
    std::istringstream in(expanded);
    pt::ptree tree;
    try {
        pt::read_xml(in, tree, pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw ParseError(ErrorKind::ParseError, "malformed XML: " + e.message(), e.line(), 1);
    }
    return RdfXmlReader(std::string(base)).run(tree);
}

}  // namespace cqv::rdf
