#include "rsft/sft.hpp"

#include <algorithm>
#include <sstream>

namespace rsft {

Word parse_word(const std::string& text) {
  Word word;
  bool separated = text.find(',') != std::string::npos;
  auto push = [&](int value) {
    if (value < 1 || value > 255) throw DomainError("word symbols must lie in 1..255: '" + text + "'");
    word.push_back(static_cast<Symbol>(value - 1));
  };
  if (separated) {
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        push(std::stoi(item));
      } catch (const std::logic_error&) {
        throw DomainError("cannot parse word '" + text + "'");
      }
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > '9') throw DomainError("cannot parse word '" + text + "'");
      push(c - '0');
    }
  }
  if (word.empty()) throw DomainError("empty word");
  return word;
}

std::string format_word(std::span<const Symbol> word) {
  bool wide = std::any_of(word.begin(), word.end(), [](Symbol s) { return s >= 9; });
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (wide && i > 0) out += ',';
    out += std::to_string(static_cast<int>(word[i]) + 1);
  }
  return out;
}

BoolMatrix::BoolMatrix(std::size_t size, bool value) : size_(size), entries_(size * size, value ? 1 : 0) {}

BoolMatrix BoolMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  BoolMatrix m(rows.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw DomainError("transition matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[i][j] != 0 && rows[i][j] != 1) throw DomainError("transition matrix entries must be 0 or 1");
      m.set(i, j, rows[i][j] == 1);
    }
  }
  return m;
}

bool BoolMatrix::all_positive() const {
  return std::all_of(entries_.begin(), entries_.end(), [](std::uint8_t e) { return e != 0; });
}

bool BoolMatrix::rows_and_columns_nonzero() const {
  for (std::size_t i = 0; i < size_; ++i) {
    bool row = false, col = false;
    for (std::size_t j = 0; j < size_; ++j) {
      row = row || (*this)(i, j);
      col = col || (*this)(j, i);
    }
    if (!row || !col) return false;
  }
  return true;
}

std::size_t BoolMatrix::count_ones() const {
  return static_cast<std::size_t>(std::count(entries_.begin(), entries_.end(), std::uint8_t{1}));
}

BoolMatrix operator*(const BoolMatrix& a, const BoolMatrix& b) {
  BoolMatrix out(a.size(), false);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a(i, k))
        for (std::size_t j = 0; j < a.size(); ++j)
          if (b(k, j)) out.set(i, j, true);
  return out;
}

RandomSFT::RandomSFT(BaseRotation base, IntervalPartition partition, std::vector<BoolMatrix> cell_matrices)
    : base_(std::move(base)), partition_(std::move(partition)), cell_matrices_(std::move(cell_matrices)) {
  if (cell_matrices_.size() != partition_.size())
    throw DomainError("random SFT needs exactly one transition matrix per partition cell");
  alphabet_size_ = cell_matrices_.front().size();
  if (alphabet_size_ < 2) throw DomainError("random SFT alphabet must have at least 2 symbols");
  if (alphabet_size_ > 255) throw DomainError("random SFT alphabet must have at most 255 symbols");
  for (std::size_t c = 0; c < cell_matrices_.size(); ++c) {
    if (cell_matrices_[c].size() != alphabet_size_)
      throw DomainError("all transition matrices must have the same size");
    if (!cell_matrices_[c].rows_and_columns_nonzero())
      throw DomainError("transition matrix on cell " + std::to_string(c) + " has an all-zero row or column");
  }
}

CylinderSet::CylinderSet(std::size_t depth, std::vector<Word> words) : depth_(depth), words_(std::move(words)) {
  for (const Word& w : words_)
    if (w.size() != depth_) throw DomainError("cylinder set words must all have the set's depth");
  std::sort(words_.begin(), words_.end());
  if (std::adjacent_find(words_.begin(), words_.end()) != words_.end())
    throw DomainError("cylinder set contains duplicate words");
}

CylinderSet CylinderSet::single(Word word) {
  std::size_t n = word.size();
  return CylinderSet(n, {std::move(word)});
}

bool CylinderSet::contains(std::span<const Symbol> window) const {
  auto it = std::lower_bound(words_.begin(), words_.end(), window,
                             [](const Word& w, std::span<const Symbol> key) {
                               return std::lexicographical_compare(w.begin(), w.end(), key.begin(), key.end());
                             });
  return it != words_.end() && std::equal(it->begin(), it->end(), window.begin(), window.end());
}

const BoolMatrix& transition_matrix(const RandomSFT& sft, double omega) { return sft.matrix_at(omega); }

bool is_admissible(const RandomSFT& sft, double omega, std::span<const Symbol> word) {
  for (std::size_t i = 0; i + 1 < word.size(); ++i)
    if (!sft.allowed(omega, static_cast<std::int64_t>(i), word[i], word[i + 1])) return false;
  return true;
}

namespace {

std::vector<const BoolMatrix*> matrices_along(const RandomSFT& sft, double omega, std::size_t steps) {
  std::vector<const BoolMatrix*> out(steps);
  for (std::size_t i = 0; i < steps; ++i)
    out[i] = &sft.matrix_at(sft.base().point(omega, static_cast<std::int64_t>(i)));
  return out;
}

void extend(const std::vector<const BoolMatrix*>& q, std::size_t b, Word& prefix, std::size_t n,
            std::vector<Word>& out, std::size_t cap) {
  if (prefix.size() == n) {
    if (out.size() >= cap) throw CapExceeded("admissible word enumeration exceeds cap of " + std::to_string(cap));
    out.push_back(prefix);
    return;
  }
  const BoolMatrix& m = *q[prefix.size() - 1];
  for (std::size_t v = 0; v < b; ++v) {
    if (!m(prefix.back(), v)) continue;
    prefix.push_back(static_cast<Symbol>(v));
    extend(q, b, prefix, n, out, cap);
    prefix.pop_back();
  }
}

}  // namespace

CylinderSet admissible_words(const RandomSFT& sft, double omega, std::size_t n, std::size_t cap) {
  if (n == 0) throw DomainError("admissible_words: n must be >= 1");
  auto q = matrices_along(sft, omega, n - 1);
  std::vector<Word> out;
  Word prefix;
  for (std::size_t u = 0; u < sft.alphabet_size(); ++u) {
    prefix.assign(1, static_cast<Symbol>(u));
    extend(q, sft.alphabet_size(), prefix, n, out, cap);
  }
  return CylinderSet(n, std::move(out));
}

std::uint64_t count_admissible(const RandomSFT& sft, double omega, std::size_t n) {
  if (n == 0) throw DomainError("count_admissible: n must be >= 1");
  std::size_t b = sft.alphabet_size();
  std::vector<std::uint64_t> v(b, 1), next(b);
  for (std::size_t i = n - 1; i-- > 0;) {
    const BoolMatrix& m = sft.matrix_at(sft.base().point(omega, static_cast<std::int64_t>(i)));
    for (std::size_t u = 0; u < b; ++u) {
      next[u] = 0;
      for (std::size_t w = 0; w < b; ++w)
        if (m(u, w)) next[u] += v[w];
    }
    v.swap(next);
  }
  std::uint64_t total = 0;
  for (auto x : v) total += x;
  return total;
}

std::optional<std::size_t> aperiodicity_constant(const RandomSFT& sft, std::size_t max_m) {
  if (max_m == 0) throw DomainError("aperiodicity_constant: max_m must be >= 1");
  for (std::size_t m = 1; m <= max_m; ++m) {
    IntervalPartition cells = refine(sft.partition(), sft.base(), m);
    bool positive_everywhere = true;
    for (std::size_t c = 0; c < cells.size() && positive_everywhere; ++c) {
      double omega = 0.5 * (cells.cell_begin(c) + cells.cell_end(c));
      BoolMatrix product = sft.matrix_at(omega);
      for (std::size_t i = 1; i < m; ++i)
        product = product * sft.matrix_at(sft.base().point(omega, static_cast<std::int64_t>(i)));
      positive_everywhere = product.all_positive();
    }
    if (positive_everywhere) return m;
  }
  return std::nullopt;
}

std::size_t min_return_q(std::span<const Symbol> word) {
  std::size_t n = word.size();
  if (n == 0) throw DomainError("min_return_q: empty word");
  for (std::size_t j = 1; j < n; ++j)
    if (std::equal(word.begin() + static_cast<std::ptrdiff_t>(j), word.end(), word.begin())) return j;
  return n;
}

CylinderSet cylinder_intersection(const RandomSFT& sft, double omega, const CylinderSet& a, std::size_t shift,
                                  const CylinderSet& b, std::size_t cap) {
  if (shift == 0) throw DomainError("cylinder_intersection: shift must be >= 1");
  std::size_t n = a.depth(), m = b.depth();
  std::size_t length = std::max(n, shift + m);
  std::vector<Word> out;
  auto emit = [&](const Word& w) {
    if (!is_admissible(sft, omega, w)) return;
    if (out.size() >= cap) throw CapExceeded("cylinder intersection exceeds cap of " + std::to_string(cap));
    out.push_back(w);
  };
  if (shift < n) {
    for (const Word& wa : a.words())
      for (const Word& wb : b.words()) {
        std::size_t overlap = std::min(n - shift, m);
        if (!std::equal(wb.begin(), wb.begin() + static_cast<std::ptrdiff_t>(overlap),
                        wa.begin() + static_cast<std::ptrdiff_t>(shift)))
          continue;
        Word w = wa;
        w.insert(w.end(), wb.begin() + static_cast<std::ptrdiff_t>(overlap), wb.end());
        emit(w);
      }
  } else {
    // Middle symbols at positions n .. shift-1 range over admissible continuations.
    auto q = matrices_along(sft, omega, length);
    std::size_t alphabet = sft.alphabet_size();
    for (const Word& wa : a.words()) {
      if (!is_admissible(sft, omega, wa)) continue;
      Word prefix = wa;
      std::vector<Word> stems;
      extend(q, alphabet, prefix, shift, stems, cap);
      for (const Word& stem : stems)
        for (const Word& wb : b.words()) {
          Word w = stem;
          w.insert(w.end(), wb.begin(), wb.end());
          emit(w);
        }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return CylinderSet(length, std::move(out));
}

}  // namespace rsft
