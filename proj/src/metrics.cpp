#include "aston/metrics.hpp"

#include <algorithm>

namespace aston {

int damerau_levenshtein(std::span<const int> a, std::span<const int> b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return static_cast<int>(m);
  if (m == 0) return static_cast<int>(n);

  // Rolling three rows of the OSA dynamic program.
  std::vector<int> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      int d = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        d = std::min(d, prev2[j - 2] + 1);
      cur[j] = d;
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

std::vector<int> to_ids(std::string_view s) {
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = static_cast<unsigned char>(s[i]);
  return out;
}

}  // namespace

int damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::vector<int> ia = to_ids(a), ib = to_ids(b);
  return damerau_levenshtein(std::span<const int>(ia), std::span<const int>(ib));
}

double dl_norm(std::span<const int> a, std::span<const int> b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;  // an empty prediction of an empty suffix is a match
  return 1.0 - static_cast<double>(damerau_levenshtein(a, b)) / static_cast<double>(longest);
}

double dl_norm(std::string_view a, std::string_view b) {
  const std::vector<int> ia = to_ids(a), ib = to_ids(b);
  return dl_norm(std::span<const int>(ia), std::span<const int>(ib));
}

}  // namespace aston
