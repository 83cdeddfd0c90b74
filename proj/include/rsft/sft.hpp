#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsft/base.hpp"

namespace rsft {

/// Symbols are stored 0-based; text formats use 1-based symbols.
using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

/// Parses "1,2,1" or "121" (1-based symbols) into a Word.
Word parse_word(const std::string& text);
/// 1-based text, comma separated when any symbol exceeds 9.
std::string format_word(std::span<const Symbol> word);

/// Square 0/1 matrix.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  BoolMatrix(std::size_t size, bool value);
  static BoolMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t size() const { return size_; }
  bool operator()(std::size_t i, std::size_t j) const { return entries_[i * size_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) { entries_[i * size_ + j] = v ? 1 : 0; }

  bool all_positive() const;
  /// Every row and every column has a nonzero entry.
  bool rows_and_columns_nonzero() const;
  std::size_t count_ones() const;

  friend BoolMatrix operator*(const BoolMatrix& a, const BoolMatrix& b);
  friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint8_t> entries_;
};

/// Random transition matrix cocycle Q over a circle rotation, piecewise constant in omega.
class RandomSFT {
 public:
  /// One matrix per partition cell; throws DomainError when a cell's matrix has an
  /// all-zero row or column or the sizes disagree.
  RandomSFT(BaseRotation base, IntervalPartition partition, std::vector<BoolMatrix> cell_matrices);

  const BaseRotation& base() const { return base_; }
  const IntervalPartition& partition() const { return partition_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  std::span<const BoolMatrix> cell_matrices() const { return cell_matrices_; }

  /// Q(omega).
  const BoolMatrix& matrix_at(double omega) const { return cell_matrices_[partition_.cell_of(omega)]; }
  /// a_{uv}(theta^i omega).
  bool allowed(double omega, std::int64_t i, Symbol u, Symbol v) const {
    return matrix_at(base_.point(omega, i))(u, v);
  }

 private:
  BaseRotation base_;
  IntervalPartition partition_;
  std::vector<BoolMatrix> cell_matrices_;
  std::size_t alphabet_size_;
};

/// Union of equal-length cylinders, stored as sorted distinct words.
class CylinderSet {
 public:
  CylinderSet() = default;
  CylinderSet(std::size_t depth, std::vector<Word> words);
  static CylinderSet single(Word word);

  std::size_t depth() const { return depth_; }
  std::span<const Word> words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  /// window must have length depth().
  bool contains(std::span<const Symbol> window) const;

 private:
  std::size_t depth_ = 0;
  std::vector<Word> words_;
};

inline constexpr std::size_t kDefaultWordCap = 10'000'000;

const BoolMatrix& transition_matrix(const RandomSFT& sft, double omega);

/// a_{w_i w_{i+1}}(theta^i omega) = 1 for all i.
bool is_admissible(const RandomSFT& sft, double omega, std::span<const Symbol> word);

/// All admissible length-n words along the orbit of omega, lexicographic.
CylinderSet admissible_words(const RandomSFT& sft, double omega, std::size_t n,
                             std::size_t cap = kDefaultWordCap);

/// Number of admissible length-n words: 1^T Q(omega) ... Q(theta^{n-2} omega) 1.
std::uint64_t count_admissible(const RandomSFT& sft, double omega, std::size_t n);

/// Least M <= max_m with Q(omega) ... Q(theta^{M-1} omega) strictly positive for every omega,
/// verified on every cell of refine(partition, M).
std::optional<std::size_t> aperiodicity_constant(const RandomSFT& sft, std::size_t max_m);

/// Least j in [1, n] with w_{i+j} = w_i for all valid i (n when there is no proper overlap).
std::size_t min_return_q(std::span<const Symbol> word);

/// A cap sigma^{-j} B cap E_omega as admissible words of length max(n, j + n).
CylinderSet cylinder_intersection(const RandomSFT& sft, double omega, const CylinderSet& a, std::size_t shift,
                                  const CylinderSet& b, std::size_t cap = kDefaultWordCap);

}  // namespace rsft
