#include "syndromestat/gf2.hpp"

#include <algorithm>
#include <utility>

#include "syndromestat/errors.hpp"

namespace syndromestat {

namespace {

void require_same_size(const BitVector& a, const BitVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": bit-vector lengths differ (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

BitVector BitVector::from_indices(std::size_t nbits, std::span<const int> ones) {
  BitVector v(nbits);
  for (int i : ones) {
    if (i < 0 || static_cast<std::size_t>(i) >= nbits) {
      throw ValidationError("bit index " + std::to_string(i) + " out of range [0, " + std::to_string(nbits) +
                            ")");
    }
    v.flip(static_cast<std::size_t>(i));
  }
  return v;
}

BitVector BitVector::from_string(const std::string& bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i);
    } else if (bits[i] != '0') {
      throw ValidationError("bit string may only contain '0' and '1'");
    }
  }
  return v;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  require_same_size(*this, other, "xor");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

BitVector& BitVector::operator&=(const BitVector& other) {
  require_same_size(*this, other, "and");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  return *this;
}

std::size_t BitVector::popcount() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool BitVector::any() const {
  return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

std::size_t BitVector::first_one() const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (words_[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
  }
  return nbits_;
}

std::vector<int> BitVector::ones() const {
  std::vector<int> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t word = words_[w];
    while (word) {
      out.push_back(static_cast<int>(w * 64 + static_cast<std::size_t>(std::countr_zero(word))));
      word &= word - 1;
    }
  }
  return out;
}

std::string BitVector::str() const {
  std::string s(nbits_, '0');
  for (std::size_t i = 0; i < nbits_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

BitVector BitVector::concat(const BitVector& tail) const {
  BitVector out(nbits_ + tail.nbits_);
  std::copy(words_.begin(), words_.end(), out.words_.begin());
  for (int i : tail.ones()) out.set(nbits_ + static_cast<std::size_t>(i));
  return out;
}

BitVector BitVector::slice(std::size_t begin, std::size_t len) const {
  if (begin + len > nbits_) throw DimensionError("slice out of range");
  BitVector out(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (get(begin + i)) out.set(i);
  }
  return out;
}

std::size_t BitVector::hash() const {
  std::uint64_t h = 1469598103934665603ull ^ nbits_;
  for (auto w : words_) {
    h ^= w;
    h *= 1099511628211ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

bool dot(const BitVector& a, const BitVector& b) { return and_count(a, b) & 1u; }

std::size_t and_count(const BitVector& a, const BitVector& b) {
  require_same_size(a, b, "dot");
  std::size_t c = 0;
  auto wa = a.words();
  auto wb = b.words();
  for (std::size_t w = 0; w < wa.size(); ++w) c += static_cast<std::size_t>(std::popcount(wa[w] & wb[w]));
  return c;
}

BinaryMatrix::BinaryMatrix(std::size_t nrows, std::size_t ncols) : ncols_(ncols), rows_(nrows, BitVector(ncols)) {}

void BinaryMatrix::append_row(BitVector row) {
  if (row.size() != ncols_) {
    throw DimensionError("row of length " + std::to_string(row.size()) + " appended to matrix with " +
                         std::to_string(ncols_) + " columns");
  }
  rows_.push_back(std::move(row));
}

BinaryMatrix BinaryMatrix::transpose() const {
  BinaryMatrix t(ncols_, rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (int j : rows_[i].ones()) t.rows_[static_cast<std::size_t>(j)].set(i);
  }
  return t;
}

BitVector BinaryMatrix::multiply(const BitVector& x) const {
  if (x.size() != ncols_) throw DimensionError("matrix-vector product: length mismatch");
  BitVector y(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (dot(rows_[i], x)) y.set(i);
  }
  return y;
}

BitVector BinaryMatrix::combine_rows(const BitVector& v) const {
  if (v.size() != rows_.size()) throw DimensionError("row combination: length mismatch");
  BitVector y(ncols_);
  for (int i : v.ones()) y ^= rows_[static_cast<std::size_t>(i)];
  return y;
}

EchelonForm reduced_echelon(const BinaryMatrix& m) {
  EchelonForm ef;
  std::vector<BitVector> rows = m.rows();
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.ncols() && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && !rows[p].get(c)) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[r], rows[p]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != r && rows[i].get(c)) rows[i] ^= rows[r];
    }
    ef.pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  ef.rows = std::move(rows);
  return ef;
}

std::size_t rank(const BinaryMatrix& m) { return reduced_echelon(m).rows.size(); }

BinaryMatrix nullspace(const BinaryMatrix& m) {
  // Eliminate [M | 1]; rows whose M part vanishes carry kernel vectors.
  const std::size_t n = m.nrows();
  const std::size_t c = m.ncols();
  std::vector<BitVector> aug;
  aug.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    BitVector tag(n);
    tag.set(i);
    aug.push_back(m.row(i).concat(tag));
  }
  std::size_t r = 0;
  for (std::size_t col = 0; col < c && r < n; ++col) {
    std::size_t p = r;
    while (p < n && !aug[p].get(col)) ++p;
    if (p == n) continue;
    std::swap(aug[r], aug[p]);
    for (std::size_t i = r + 1; i < n; ++i) {
      if (aug[i].get(col)) aug[i] ^= aug[r];
    }
    ++r;
  }
  BinaryMatrix out(n);
  for (std::size_t i = r; i < n; ++i) out.append_row(aug[i].slice(c, n));
  return out;
}

BinaryMatrix right_kernel(const BinaryMatrix& m) {
  const EchelonForm ef = reduced_echelon(m);
  std::vector<bool> is_pivot(m.ncols(), false);
  for (auto p : ef.pivots) is_pivot[p] = true;
  BinaryMatrix out(m.ncols());
  for (std::size_t f = 0; f < m.ncols(); ++f) {
    if (is_pivot[f]) continue;
    BitVector x(m.ncols());
    x.set(f);
    for (std::size_t i = 0; i < ef.rows.size(); ++i) {
      if (ef.rows[i].get(f)) x.set(ef.pivots[i]);
    }
    out.append_row(std::move(x));
  }
  return out;
}

std::optional<BitVector> solve(const BinaryMatrix& m, const BitVector& b) {
  if (b.size() != m.nrows()) throw DimensionError("solve: right-hand side length mismatch");
  BinaryMatrix aug(m.ncols() + 1);
  for (std::size_t i = 0; i < m.nrows(); ++i) {
    BitVector row = m.row(i).concat(BitVector(1));
    if (b.get(i)) row.set(m.ncols());
    aug.append_row(std::move(row));
  }
  const EchelonForm ef = reduced_echelon(aug);
  BitVector x(m.ncols());
  for (std::size_t i = 0; i < ef.rows.size(); ++i) {
    if (ef.pivots[i] == m.ncols()) return std::nullopt;
    if (ef.rows[i].get(m.ncols())) x.set(ef.pivots[i]);
  }
  return x;
}

}  // namespace syndromestat
