#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "syndromestat/gf2.hpp"
#include "syndromestat/pauli.hpp"

namespace syndromestat {

/// Lattice coordinates attached to built-in families.
///
/// Toric (L x L torus, qubits on edges):
///   horizontal edge (x,y)->(x+1,y) is qubit y*L+x, vertical edge (x,y)->(x,y+1) is L*L+y*L+x;
///   star at vertex (x,y) is check y*L+x, plaquette with lower-left corner (x,y) is L*L+y*L+x.
/// Repetition d=1: qubit r on a ring, check i = Z_i Z_(i+1).
/// Repetition d=2: qubit y*L+x on vertices; check y*L+x is the horizontal edge at (x,y),
///   check L*L+y*L+x the vertical one.
/// XZZX: qubit y*L+x on vertices, check y*L+x is the plaquette with lower-left corner (x,y),
///   X on its top-left and bottom-right corners, Z on top-right and bottom-left.
struct CodeGeometry {
  std::string family;  // "toric", "repetition", "xzzx" or "" for user codes
  int L = 0;
  int d = 0;
  std::vector<std::vector<int>> qubit_coords;
  std::vector<std::vector<int>> check_coords;
  std::vector<std::string> check_kind;

  bool empty() const { return family.empty() && qubit_coords.empty() && check_coords.empty(); }
};

/// A validated stabilizer code: commuting checks (possibly overcomplete) plus
/// a symplectic basis of logicals, first K logical-X then K logical-Z.
class CodeSpec {
 public:
  /// Validates everything and fills in logicals when `logicals` is empty.
  CodeSpec(std::size_t num_qubits, std::vector<PauliWord> checks, std::vector<PauliWord> logicals = {},
           CodeGeometry geometry = {}, std::string name = "custom");

  std::size_t num_qubits() const { return n_; }
  std::size_t num_checks() const { return checks_.size(); }
  std::size_t num_logical() const { return k_; }
  std::size_t check_rank() const { return rank_; }
  std::size_t num_redundancies() const { return redundancies_.nrows(); }

  const std::vector<PauliWord>& checks() const { return checks_; }
  const PauliWord& check(std::size_t i) const { return checks_[i]; }
  const std::vector<PauliWord>& logicals() const { return logicals_; }
  const PauliWord& logical_x(std::size_t k) const { return logicals_[k]; }
  const PauliWord& logical_z(std::size_t k) const { return logicals_[k_ + k]; }
  /// Basis of R = {u : prod_i g_i^u_i = 1}, as rows of length I.
  const BinaryMatrix& redundancies() const { return redundancies_; }
  const CodeGeometry& geometry() const { return geometry_; }
  const std::string& name() const { return name_; }

  /// I x 2N matrix with rows (a_i^z | a_i^x), so row_i . (b^x | b^z) = <<a_i, b>>.
  const BinaryMatrix& syndrome_matrix() const { return syndrome_matrix_; }

  /// Stable 64-bit identity of checks and logicals.
  std::uint64_t fingerprint() const;

 private:
  std::size_t n_;
  std::vector<PauliWord> checks_;
  std::vector<PauliWord> logicals_;
  CodeGeometry geometry_;
  std::string name_;
  std::size_t k_ = 0;
  std::size_t rank_ = 0;
  BinaryMatrix redundancies_;
  BinaryMatrix syndrome_matrix_;
};

CodeSpec build_toric(int L);
CodeSpec build_repetition(int d, int L);
CodeSpec build_xzzx(int L);

/// Parses the JSON code document {"n", "checks", "logicals"?, "geometry"?}.
CodeSpec load_code(const std::string& json_text);
CodeSpec load_code_file(const std::string& path);
std::string code_to_json(const CodeSpec& code);

/// Basis of the redundancy group, with the phase of every generator checked.
BinaryMatrix compute_redundancies(const std::vector<PauliWord>& checks);

/// Symplectic Gram-Schmidt over the normalizer modulo the stabilizer group.
std::vector<PauliWord> compute_logicals(std::size_t num_qubits, const std::vector<PauliWord>& checks);

/// "none" (no redundancy), "global" or "local"; local means R is spanned by
/// redundancies touching fewer than half of the checks.
std::string symmetry_classification(const CodeSpec& code);

/// Syndrome bits <<a_i, e>>.
BitVector syndrome_of_error(const CodeSpec& code, const PauliWord& error);

/// Deterministic error producing syndrome s, linear in s; nullopt if s is not realizable.
std::optional<PauliWord> error_with_syndrome(const CodeSpec& code, const BitVector& s);

/// Logical class bits of an error: entry k < K is <<e, Zbar_k>>, entry K+k is <<e, Xbar_k>>.
BitVector logical_class(const CodeSpec& code, const PauliWord& error);

/// Sum of the selected logicals (kappa has length 2K).
PauliWord logical_operator(const CodeSpec& code, const BitVector& kappa);

}  // namespace syndromestat
