#pragma once

#include <span>
#include <vector>

namespace apxne {

struct Entry {
  int index;
  double value;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse vector as (index, value) pairs. Canonical form: sorted by index,
/// no duplicates, no explicit zeros.
using SparseVec = std::vector<Entry>;

/// Sorts, merges duplicate indices and drops zeros.
void canonicalize(SparseVec& v);

double dot(const SparseVec& v, std::span<const double> x);

/// Value stored at `index`, 0 when absent. Requires canonical form.
double coefficient(const SparseVec& v, int index);

}  // namespace apxne
