#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace aston {

/// Damerau-Levenshtein edit distance, optimal string alignment variant:
/// insertions, deletions, substitutions and adjacent transpositions each
/// count as one edit, and no substring is edited twice.
int damerau_levenshtein(std::span<const int> a, std::span<const int> b);
int damerau_levenshtein(std::string_view a, std::string_view b);

/// Similarity 1 - distance / max(|a|, |b|), in [0, 1]. Two empty sequences
/// compare as 1.0.
double dl_norm(std::span<const int> a, std::span<const int> b);
double dl_norm(std::string_view a, std::string_view b);

}  // namespace aston
