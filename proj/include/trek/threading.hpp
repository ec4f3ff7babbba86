#pragma once

#include <functional>

namespace trek {

/// Worker-thread cap for the operations that parallelize internally
/// (Gram/frame assembly, Khatri-Rao block products). Defaults to 1;
/// results are identical for any value because workers write disjoint
/// output ranges.
int max_threads();
void set_max_threads(int n);

namespace detail {

/// Calls fn(i) for i in [begin, end), split contiguously over at most
/// max_threads() workers.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace detail
}  // namespace trek
