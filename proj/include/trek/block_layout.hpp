#pragma once

#include <vector>

namespace trek {

/// Partition of R measurements into n per-function blocks of sizes r_1..r_n.
/// Owns every derived index quantity used by the block-structured solvers:
/// flat offsets into R, squared offsets into sum(r_i^2), and pair offsets
/// into sum(r_i*(r_i-1)/2).
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<int> counts);

  static BlockLayout uniform(int blocks, int count);

  int blocks() const { return static_cast<int>(counts_.size()); }
  int count(int i) const { return counts_[i]; }
  const std::vector<int>& counts() const { return counts_; }
  int max_count() const { return max_count_; }

  /// Flat offset of block i inside a length-R vector.
  long long offset(int i) const { return offsets_[i]; }
  /// Offset of block i inside the length sum(r_i^2) diagonal vectorization.
  long long squared_offset(int i) const { return squared_offsets_[i]; }
  /// Offset of block i inside the length-L effective coefficient vector.
  long long pair_offset(int i) const { return pair_offsets_[i]; }

  /// Number of strict upper-triangular pairs in block i: r_i*(r_i-1)/2.
  long long pair_count(int i) const {
    const long long r = counts_[i];
    return r * (r - 1) / 2;
  }

  long long total() const { return total_; }                  // R
  long long total_squared() const { return total_squared_; }  // sum r_i^2
  long long total_pairs() const { return total_pairs_; }      // L

  bool operator==(const BlockLayout& other) const { return counts_ == other.counts_; }
  bool operator!=(const BlockLayout& other) const { return !(*this == other); }

 private:
  std::vector<int> counts_;
  std::vector<long long> offsets_;
  std::vector<long long> squared_offsets_;
  std::vector<long long> pair_offsets_;
  long long total_ = 0;
  long long total_squared_ = 0;
  long long total_pairs_ = 0;
  int max_count_ = 0;
};

}  // namespace trek
