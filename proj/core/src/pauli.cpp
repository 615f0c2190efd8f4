#include "syndromestat/pauli.hpp"

#include "syndromestat/errors.hpp"

namespace syndromestat {

PauliWord::PauliWord(BitVector x, BitVector z, int phase) : x_(std::move(x)), z_(std::move(z)) {
  if (x_.size() != z_.size()) throw DimensionError("Pauli word: x and z supports have different lengths");
  set_phase(phase);
}

PauliWord PauliWord::from_string(const std::string& text) {
  std::size_t pos = 0;
  int phase = 0;
  if (text.compare(0, 2, "-i") == 0) {
    phase = 3;
    pos = 2;
  } else if (!text.empty() && text[0] == 'i') {
    phase = 1;
    pos = 1;
  } else if (!text.empty() && text[0] == '-') {
    phase = 2;
    pos = 1;
  } else if (!text.empty() && text[0] == '+') {
    pos = 1;
  }
  const std::size_t n = text.size() - pos;
  PauliWord w(n);
  for (std::size_t q = 0; q < n; ++q) {
    switch (text[pos + q]) {
      case 'I':
      case '_':
        break;
      case 'X':
        w.x_.set(q);
        break;
      case 'Z':
        w.z_.set(q);
        break;
      case 'Y':
        w.x_.set(q);
        w.z_.set(q);
        break;
      default:
        throw ValidationError("invalid Pauli character '" + std::string(1, text[pos + q]) + "'");
    }
  }
  w.set_phase(phase);
  return w;
}

PauliWord PauliWord::from_support(std::size_t num_qubits, std::span<const int> x_support,
                                  std::span<const int> z_support) {
  return PauliWord(BitVector::from_indices(num_qubits, x_support), BitVector::from_indices(num_qubits, z_support));
}

char PauliWord::at(std::size_t q) const {
  const bool xb = x_.get(q);
  const bool zb = z_.get(q);
  if (xb && zb) return 'Y';
  if (xb) return 'X';
  if (zb) return 'Z';
  return 'I';
}

std::size_t PauliWord::weight() const {
  std::size_t c = 0;
  auto wx = x_.words();
  auto wz = z_.words();
  for (std::size_t w = 0; w < wx.size(); ++w) c += static_cast<std::size_t>(std::popcount(wx[w] | wz[w]));
  return c;
}

std::string PauliWord::str() const {
  static const char* prefixes[4] = {"+", "i", "-", "-i"};
  std::string s = prefixes[phase_];
  for (std::size_t q = 0; q < num_qubits(); ++q) s.push_back(at(q));
  return s;
}

bool symplectic_form(const PauliWord& a, const PauliWord& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw DimensionError("symplectic form: operands act on " + std::to_string(a.num_qubits()) + " and " +
                         std::to_string(b.num_qubits()) + " qubits");
  }
  return dot(a.x(), b.z()) ^ dot(a.z(), b.x());
}

int product_phase(std::span<const std::uint64_t> ax, std::span<const std::uint64_t> az,
                  std::span<const std::uint64_t> bx, std::span<const std::uint64_t> bz) {
  // O_a O_b = i^(a.a + b.b + 2 az.bx - c.c) O_c with c = a + b and u.u = |u^x & u^z|.
  std::uint64_t e = 0;
  for (std::size_t w = 0; w < ax.size(); ++w) {
    const std::uint64_t cx = ax[w] ^ bx[w];
    const std::uint64_t cz = az[w] ^ bz[w];
    e += static_cast<std::uint64_t>(std::popcount(ax[w] & az[w]));
    e += static_cast<std::uint64_t>(std::popcount(bx[w] & bz[w]));
    e += 2 * static_cast<std::uint64_t>(std::popcount(az[w] & bx[w]));
    e += 3 * static_cast<std::uint64_t>(std::popcount(cx & cz));
  }
  return static_cast<int>(e & 3u);
}

PauliWord multiply(const PauliWord& a, const PauliWord& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw DimensionError("multiply: operands act on " + std::to_string(a.num_qubits()) + " and " +
                         std::to_string(b.num_qubits()) + " qubits");
  }
  const int e = product_phase(a.x().words(), a.z().words(), b.x().words(), b.z().words());
  return PauliWord(a.x() ^ b.x(), a.z() ^ b.z(), a.phase() + b.phase() + e);
}

}  // namespace syndromestat
