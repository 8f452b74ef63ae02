#include "encyclink/levenshtein.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "encyclink/error.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(utf8::decode(a), utf8::decode(b));
}

double relative_levenshtein(std::string_view reference, std::string_view candidate) {
  const auto ref = utf8::decode(reference);
  if (ref.empty()) throw Error(Errc::EmptyReference, "relative Levenshtein needs a reference word");
  return static_cast<double>(levenshtein(ref, utf8::decode(candidate))) /
         static_cast<double>(ref.size());
}

}  // namespace encyclink
