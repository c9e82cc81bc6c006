#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace spurlens {

/// Fixed-length bitset over dataset rows with a cached popcount.
class RowMask {
 public:
  RowMask() = default;
  explicit RowMask(std::size_t size, bool value = false);

  static RowMask from_indices(std::size_t size, const std::vector<std::size_t>& rows);

  std::size_t size() const noexcept { return size_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  bool test(std::size_t row) const noexcept {
    return (words_[row >> 6] >> (row & 63)) & 1u;
  }
  void set(std::size_t row, bool value = true) noexcept;

  /// Selected row indices in ascending order.
  std::vector<std::size_t> indices() const;

  RowMask operator&(const RowMask& other) const;
  RowMask operator|(const RowMask& other) const;
  RowMask operator~() const;
  bool intersects(const RowMask& other) const;

  bool operator==(const RowMask& other) const noexcept {
    return size_ == other.size_ && words_ == other.words_;
  }

 private:
  void recount() noexcept;
  void clear_tail() noexcept;

  std::size_t size_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace spurlens
