#include "apxne/sparse.hpp"

#include <algorithm>

namespace apxne {

void canonicalize(SparseVec& v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseVec out;
  out.reserve(v.size());
  for (const Entry& e : v) {
    if (!out.empty() && out.back().index == e.index) {
      out.back().value += e.value;
    } else {
      out.push_back(e);
    }
  }
  std::erase_if(out, [](const Entry& e) { return e.value == 0.0; });
  v = std::move(out);
}

double dot(const SparseVec& v, std::span<const double> x) {
  double s = 0.0;
  for (const Entry& e : v) s += e.value * x[static_cast<std::size_t>(e.index)];
  return s;
}

double coefficient(const SparseVec& v, int index) {
  auto it = std::lower_bound(v.begin(), v.end(), index,
                             [](const Entry& e, int i) { return e.index < i; });
  return (it != v.end() && it->index == index) ? it->value : 0.0;
}

}  // namespace apxne
