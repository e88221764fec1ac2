#include "cqv/rdf.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cqv/error.hpp"

namespace cqv::rdf {

bool vocab::is_standard(std::string_view iri) {
    for (auto ns : {kRdf, kRdfs, kOwl, kXsd}) {
        if (iri.starts_with(ns)) return true;
    }
    return false;
}

namespace {

std::string escape_literal(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

bool has_scheme(std::string_view ref) {
    if (ref.empty() || !std::isalpha(static_cast<unsigned char>(ref[0]))) return false;
    for (char c : ref) {
        if (c == ':') return true;
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
    }
    return false;
}

std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string> out;
    bool absolute = !path.empty() && path[0] == '/';
    std::string seg;
    std::vector<std::string> segs;
    std::stringstream ss{std::string(absolute ? path.substr(1) : path)};
    while (std::getline(ss, seg, '/')) segs.push_back(seg);
    if (!path.empty() && path.back() == '/') segs.emplace_back();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        bool last = i + 1 == segs.size();
        if (s == ".") {
            if (last) out.emplace_back();
        } else if (s == "..") {
            if (!out.empty()) out.pop_back();
            if (last) out.emplace_back();
        } else {
            out.push_back(s);
        }
    }
    std::string result = absolute ? "/" : "";
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (k) result += '/';
        result += out[k];
    }
    return result;
}

bool is_simple_local(std::string_view local) {
    if (local.empty()) return true;
    if (!(std::isalpha(static_cast<unsigned char>(local[0])) || local[0] == '_')) return false;
    return std::all_of(local.begin(), local.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

}  // namespace

std::string to_ntriples(const Term& t) {
    switch (t.kind) {
        case TermKind::Iri: return "<" + t.value + ">";
        case TermKind::Blank: return "_:" + t.value;
        case TermKind::Literal: {
            std::string s = "\"" + escape_literal(t.value) + "\"";
            if (!t.language.empty()) return s + "@" + t.language;
            if (!t.datatype.empty()) return s + "^^<" + t.datatype + ">";
            return s;
        }
    }
    return {};
}

std::string resolve_iri(std::string_view base, std::string_view ref) {
    if (has_scheme(ref) || base.empty()) return std::string(ref);
    std::string_view b = base;
    auto frag = b.find('#');
    std::string_view no_frag = frag == std::string_view::npos ? b : b.substr(0, frag);
    if (ref.empty()) return std::string(no_frag);
    if (ref[0] == '#') return std::string(no_frag) + std::string(ref);

    auto scheme_end = b.find(':');
    std::string scheme = std::string(b.substr(0, scheme_end + 1));
    std::string_view rest = b.substr(scheme_end + 1);
    std::string authority;
    if (rest.starts_with("//")) {
        auto slash = rest.find_first_of("/?#", 2);
        authority = std::string(rest.substr(0, slash));
        rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
    }
    if (ref.starts_with("//")) return scheme + std::string(ref);
    auto q = rest.find_first_of("?#");
    std::string_view path = q == std::string_view::npos ? rest : rest.substr(0, q);
    if (ref[0] == '?') return scheme + authority + std::string(path) + std::string(ref);
    if (ref[0] == '/') return scheme + authority + remove_dot_segments(ref);

    std::string merged;
    auto last = path.rfind('/');
    if (last == std::string_view::npos) {
        merged = (authority.empty() ? "" : "/") + std::string(ref);
    } else {
        merged = std::string(path.substr(0, last + 1)) + std::string(ref);
    }
    // Split off query/fragment of ref before normalizing the path.
    auto rq = merged.find_first_of("?#");
    std::string tail = rq == std::string::npos ? "" : merged.substr(rq);
    std::string mpath = rq == std::string::npos ? merged : merged.substr(0, rq);
    return scheme + authority + remove_dot_segments(mpath) + tail;
}

Document load_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::string base = "file://" + std::filesystem::absolute(path).lexically_normal().string();

    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    bool xml;
    if (ext == ".ttl" || ext == ".n3" || ext == ".nt" || ext == ".turtle") {
        xml = false;
    } else if (ext == ".owl" || ext == ".rdf" || ext == ".xml") {
        xml = true;
    } else {
        auto pos = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
        xml = pos != std::string::npos && text[pos] == '<' && text.compare(pos, 2, "<h") != 0;
    }
    // OWL files with .owl extension are sometimes Turtle; sniff to be safe.
    if (xml) {
        auto pos = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
        if (pos != std::string::npos && text[pos] != '<') xml = false;
    }
    return xml ? parse_rdfxml(text, base) : parse_turtle(text, base);
}

std::string write_turtle(const Graph& graph, const PrefixMap& prefixes) {
    auto compact = [&](const Term& t) -> std::string {
        if (t.kind == TermKind::Iri) {
            if (t.value == vocab::rdf("type")) return "a";
            const std::pair<const std::string, std::string>* best = nullptr;
            for (const auto& p : prefixes) {
                if (t.value.starts_with(p.second) && is_simple_local(std::string_view(t.value).substr(p.second.size()))) {
                    if (!best || p.second.size() > best->second.size()) best = &p;
                }
            }
            if (best) return best->first + ":" + t.value.substr(best->second.size());
        }
        if (t.kind == TermKind::Literal && !t.datatype.empty() && t.language.empty()) {
            std::string s = "\"" + escape_literal(t.value) + "\"^^";
            for (const auto& p : prefixes) {
                if (t.datatype.starts_with(p.second) &&
                    is_simple_local(std::string_view(t.datatype).substr(p.second.size()))) {
                    return s + p.first + ":" + t.datatype.substr(p.second.size());
                }
            }
            return s + "<" + t.datatype + ">";
        }
        return to_ntriples(t);
    };

    std::ostringstream out;
    for (const auto& [name, ns] : prefixes) out << "@prefix " << name << ": <" << ns << "> .\n";
    if (!prefixes.empty() && !graph.empty()) out << "\n";

    auto it = graph.begin();
    while (it != graph.end()) {
        const Term& subject = it->subject;
        out << compact(subject);
        bool first_pred = true;
        while (it != graph.end() && it->subject == subject) {
            const Term& pred = it->predicate;
            out << (first_pred ? " " : " ;\n    ") << compact(pred) << " ";
            first_pred = false;
            bool first_obj = true;
            while (it != graph.end() && it->subject == subject && it->predicate == pred) {
                if (!first_obj) out << ", ";
                out << compact(it->object);
                first_obj = false;
                ++it;
            }
        }
        out << " .\n";
    }
    return out.str();
}

}  // namespace cqv::rdf
