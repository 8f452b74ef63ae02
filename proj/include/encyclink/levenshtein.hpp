#pragma once

#include <cstddef>
#include <string_view>

namespace encyclink {

// Edit distance over Unicode scalar values (unit-cost insert/delete/substitute).
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a, std::string_view b);

// levenshtein(reference, candidate) / length(reference). The reference is
// the trusted side (an index word), so the score is not symmetric.
// Throws EmptyReference when reference is empty.
double relative_levenshtein(std::string_view reference, std::string_view candidate);

}  // namespace encyclink
