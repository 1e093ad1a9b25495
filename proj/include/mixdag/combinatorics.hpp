#ifndef MIXDAG_COMBINATORICS_HPP
#define MIXDAG_COMBINATORICS_HPP

#include <vector>

#include "mixdag/graph.hpp"

namespace mixdag {

// Enumerates all size-`size` subsets of `candidates` in colexicographic
// order, invoking fn(subset). Stops early (returning true) if fn returns
// true.
template <class Fn>
bool for_each_subset_colex(const NodeSet& candidates, int size, Fn&& fn) {
    const int m = static_cast<int>(candidates.size());
    if (size < 0 || size > m) return false;
    if (size == 0) {
        NodeSet empty;
        return fn(empty);
    }
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    NodeSet subset(size);
    for (;;) {
        for (int i = 0; i < size; ++i) subset[i] = candidates[idx[i]];
        if (fn(subset)) return true;
        int i = 0;
        while (i + 1 < size && idx[i] + 1 == idx[i + 1]) {
            idx[i] = i;
            ++i;
        }
        if (i + 1 == size && idx[i] + 1 >= m) return false;
        ++idx[i];
    }
}

// All subsets by increasing size (colex within each size), up to max_size
// (-1 for no bound). Early exit when fn returns true.
template <class Fn>
bool for_each_subset_by_size(const NodeSet& candidates, int max_size, Fn&& fn) {
    int bound = max_size < 0 ? static_cast<int>(candidates.size()) : max_size;
    for (int size = 0; size <= bound; ++size)
        if (for_each_subset_colex(candidates, size, fn)) return true;
    return false;
}

}  // namespace mixdag

#endif  // MIXDAG_COMBINATORICS_HPP
