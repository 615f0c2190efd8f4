#pragma once

#include <cstdint>
#include <string>

#include "syndromestat/gf2.hpp"

namespace syndromestat {

/// Pauli operator i^phase * O_a in binary symplectic form, where
/// O_a = i^(a^x . a^z) X^(a^x) Z^(a^z) is Hermitian for every a.
///
/// phase is kept mod 4. Phase 0 means the canonical Hermitian representative,
/// so for instance the word with x = z = e_1 and phase 0 is Y_1.
class PauliWord {
 public:
  PauliWord() = default;
  explicit PauliWord(std::size_t num_qubits) : x_(num_qubits), z_(num_qubits) {}
  PauliWord(BitVector x, BitVector z, int phase = 0);

  /// Parses "XIZY", optionally prefixed by "+", "-", "i", "-i".
  static PauliWord from_string(const std::string& text);
  static PauliWord from_support(std::size_t num_qubits, std::span<const int> x_support,
                                std::span<const int> z_support);

  std::size_t num_qubits() const { return x_.size(); }
  const BitVector& x() const { return x_; }
  const BitVector& z() const { return z_; }
  BitVector& x() { return x_; }
  BitVector& z() { return z_; }
  int phase() const { return phase_; }
  void set_phase(int p) { phase_ = ((p % 4) + 4) % 4; }

  /// 'I', 'X', 'Y' or 'Z' at qubit q (ignores the global phase).
  char at(std::size_t q) const;
  std::size_t weight() const;
  bool is_identity() const { return x_.none() && z_.none(); }
  /// Concatenated (x | z) vector of length 2N.
  BitVector symplectic() const { return x_.concat(z_); }
  std::string str() const;

  bool operator==(const PauliWord& other) const = default;

 private:
  BitVector x_;
  BitVector z_;
  int phase_ = 0;
};

/// <<a,b>> = a^x . b^z + a^z . b^x mod 2; zero iff the operators commute.
bool symplectic_form(const PauliWord& a, const PauliWord& b);

/// Operator product a*b with the phase tracked exactly.
PauliWord multiply(const PauliWord& a, const PauliWord& b);

/// Phase exponent picked up by O_a O_b = i^e O_(a+b) for canonical a, b
/// given as raw word spans. Shared by the density-matrix oracle.
int product_phase(std::span<const std::uint64_t> ax, std::span<const std::uint64_t> az,
                  std::span<const std::uint64_t> bx, std::span<const std::uint64_t> bz);

}  // namespace syndromestat
