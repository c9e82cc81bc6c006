#include "spurlens/row_mask.hpp"

#include <bit>
#include <stdexcept>

namespace spurlens {

RowMask::RowMask(std::size_t size, bool value)
    : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
  clear_tail();
  recount();
}

RowMask RowMask::from_indices(std::size_t size, const std::vector<std::size_t>& rows) {
  RowMask mask(size);
  for (std::size_t r : rows) {
    if (r >= size) throw std::out_of_range("row index outside mask");
    mask.set(r);
  }
  return mask;
}

void RowMask::set(std::size_t row, bool value) noexcept {
  const std::uint64_t bit = std::uint64_t{1} << (row & 63);
  std::uint64_t& word = words_[row >> 6];
  const bool was = word & bit;
  if (was == value) return;
  if (value) {
    word |= bit;
    ++count_;
  } else {
    word &= ~bit;
    --count_;
  }
}

std::vector<std::size_t> RowMask::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t word = words_[w];
    while (word) {
      const int bit = std::countr_zero(word);
      out.push_back(w * 64 + static_cast<std::size_t>(bit));
      word &= word - 1;
    }
  }
  return out;
}

RowMask RowMask::operator&(const RowMask& other) const {
  if (other.size_ != size_) throw std::invalid_argument("mask sizes differ");
  RowMask out(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] &= other.words_[w];
  out.recount();
  return out;
}

RowMask RowMask::operator|(const RowMask& other) const {
  if (other.size_ != size_) throw std::invalid_argument("mask sizes differ");
  RowMask out(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] |= other.words_[w];
  out.recount();
  return out;
}

RowMask RowMask::operator~() const {
  RowMask out(*this);
  for (auto& word : out.words_) word = ~word;
  out.clear_tail();
  out.recount();
  return out;
}

bool RowMask::intersects(const RowMask& other) const {
  if (other.size_ != size_) throw std::invalid_argument("mask sizes differ");
  for (std::size_t w = 0; w < words_.size(); ++w)
    if (words_[w] & other.words_[w]) return true;
  return false;
}

void RowMask::recount() noexcept {
  count_ = 0;
  for (auto word : words_) count_ += static_cast<std::size_t>(std::popcount(word));
}

void RowMask::clear_tail() noexcept {
  if (size_ % 64 != 0 && !words_.empty())
    words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
}

}  // namespace spurlens
