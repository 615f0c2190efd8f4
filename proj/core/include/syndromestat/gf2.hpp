#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace syndromestat {

/// Fixed-length vector over GF(2), packed 64 bits per word.
///
/// Bits past `size()` in the last word are always zero, so word-wise
/// comparisons, hashing and popcounts need no masking.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  static BitVector from_indices(std::size_t nbits, std::span<const int> ones);
  static BitVector from_string(const std::string& bits);  // "0110..."

  std::size_t size() const { return nbits_; }
  std::size_t num_words() const { return words_.size(); }
  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v = true) {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= m;
    } else {
      words_[i >> 6] &= ~m;
    }
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  BitVector& operator^=(const BitVector& other);
  BitVector& operator&=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  bool operator==(const BitVector& other) const = default;

  std::size_t popcount() const;
  bool any() const;
  bool none() const { return !any(); }
  /// Index of the lowest set bit, or size() when empty.
  std::size_t first_one() const;
  std::vector<int> ones() const;
  std::string str() const;

  /// Concatenation [this | tail].
  BitVector concat(const BitVector& tail) const;
  BitVector slice(std::size_t begin, std::size_t len) const;

  std::size_t hash() const;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Parity of the bitwise AND, i.e. the GF(2) dot product.
bool dot(const BitVector& a, const BitVector& b);
/// Integer size of the bitwise AND (not reduced mod 2).
std::size_t and_count(const BitVector& a, const BitVector& b);

struct BitVectorHash {
  std::size_t operator()(const BitVector& v) const { return v.hash(); }
};

/// Row-major dense matrix over GF(2).
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  explicit BinaryMatrix(std::size_t ncols) : ncols_(ncols) {}
  BinaryMatrix(std::size_t nrows, std::size_t ncols);

  std::size_t nrows() const { return rows_.size(); }
  std::size_t ncols() const { return ncols_; }
  const BitVector& row(std::size_t i) const { return rows_[i]; }
  BitVector& row(std::size_t i) { return rows_[i]; }
  const std::vector<BitVector>& rows() const { return rows_; }

  void append_row(BitVector row);
  BinaryMatrix transpose() const;
  /// y = M x, with x of length ncols().
  BitVector multiply(const BitVector& x) const;
  /// y = Mᵀ v = Σ v_i row_i, with v of length nrows().
  BitVector combine_rows(const BitVector& v) const;

 private:
  std::size_t ncols_ = 0;
  std::vector<BitVector> rows_;
};

std::size_t rank(const BinaryMatrix& m);

/// Basis of the left kernel {v : Σ_i v_i row_i = 0}.
///
/// Rows of the result are linearly independent and
/// rank(m) + result.nrows() == m.nrows().
BinaryMatrix nullspace(const BinaryMatrix& m);

/// Basis of the right kernel {x : M x = 0}.
BinaryMatrix right_kernel(const BinaryMatrix& m);

/// One solution x of M x = b (free variables set to zero), if any exists.
std::optional<BitVector> solve(const BinaryMatrix& m, const BitVector& b);

/// Reduced row-echelon form; returns the nonzero rows and their pivot columns.
struct EchelonForm {
  std::vector<BitVector> rows;
  std::vector<std::size_t> pivots;
};
EchelonForm reduced_echelon(const BinaryMatrix& m);

}  // namespace syndromestat
