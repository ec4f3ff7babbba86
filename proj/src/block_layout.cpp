#include "trek/block_layout.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace trek {

BlockLayout::BlockLayout(std::vector<int> counts) : counts_(std::move(counts)) {
  const int n = static_cast<int>(counts_.size());
  offsets_.resize(n);
  squared_offsets_.resize(n);
  pair_offsets_.resize(n);
  for (int i = 0; i < n; ++i) {
    const int r = counts_[i];
    if (r < 1) {
      throw std::invalid_argument("BlockLayout: block " + std::to_string(i) +
                                  " has count " + std::to_string(r) + ", expected >= 1");
    }
    offsets_[i] = total_;
    squared_offsets_[i] = total_squared_;
    pair_offsets_[i] = total_pairs_;
    total_ += r;
    total_squared_ += static_cast<long long>(r) * r;
    total_pairs_ += static_cast<long long>(r) * (r - 1) / 2;
    max_count_ = std::max(max_count_, r);
  }
}

BlockLayout BlockLayout::uniform(int blocks, int count) {
  if (blocks < 1) throw std::invalid_argument("BlockLayout: need at least one block");
  return BlockLayout(std::vector<int>(static_cast<std::size_t>(blocks), count));
}

}  // namespace trek
