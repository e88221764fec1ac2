#include "cqv/difficulty.hpp"

#include <algorithm>
#include <cctype>

#include "cqv/error.hpp"

namespace cqv {

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Simple: return "simple";
        case Difficulty::Complex: return "complex";
        case Difficulty::Unrated: return "unrated";
    }
    return "unrated";
}

std::optional<Difficulty> parse_difficulty(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "simple") return Difficulty::Simple;
    if (s == "complex") return Difficulty::Complex;
    if (s == "unrated") return Difficulty::Unrated;
    return std::nullopt;
}

namespace {
bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}
}  // namespace

void validate(const CQFormalization& f) {
    for (const auto& c : f.classes) {
        if (blank(c)) throw Error(ErrorKind::InvalidArgument, "blank class name in formalization");
    }
    for (const auto& slot : f.object_property_slots) {
        if (slot.empty()) throw Error(ErrorKind::InvalidArgument, "empty property slot in formalization");
        for (const auto& p : slot) {
            if (blank(p)) throw Error(ErrorKind::InvalidArgument, "blank property name in formalization");
        }
    }
}

Difficulty classify_difficulty(const CQFormalization& f) {
    return f.classes.size() <= 2 && f.object_property_slots.size() <= 1 ? Difficulty::Simple : Difficulty::Complex;
}

}  // namespace cqv
