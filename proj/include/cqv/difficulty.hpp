/// @file difficulty.hpp
/// @brief Simple/Complex classification of a CQ's logical form.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cqv {

enum class Difficulty { Simple, Complex, Unrated };

std::string to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view text);

/// Classes and object-property slots of a CQ's existential formula. A slot is a
/// disjunction of alternative properties (built OR renovated) and counts once.
struct CQFormalization {
    std::set<std::string> classes;
    std::vector<std::set<std::string>> object_property_slots;

    bool operator==(const CQFormalization&) const = default;
};

/// Throws Error(InvalidArgument) on an empty slot or a blank name.
void validate(const CQFormalization& f);

/// Simple iff at most two classes and at most one object-property slot.
Difficulty classify_difficulty(const CQFormalization& f);

}  // namespace cqv
