#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "syndromestat/codes.hpp"
#include "syndromestat/noise.hpp"

namespace syndromestat {

enum class Boundary { Open, Field };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct ModelOptions {
  Boundary boundary = Boundary::Open;
  /// Last readout round noiseless (q = 0 on the final temporal bonds).
  bool perfect_final_round = false;
  /// Optional per-round overrides; when non-empty it must have exactly T entries.
  std::vector<NoiseParams> step_params;
};

/// Per-qubit sign flips of the x- and z-parity terms induced by a logical defect.
struct QubitFlips {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;

  static QubitFlips none(std::size_t num_qubits) {
    return {std::vector<std::uint8_t>(num_qubits, 0), std::vector<std::uint8_t>(num_qubits, 0)};
  }
  QubitFlips operator^(const QubitFlips& o) const;
  bool any() const;
};

/// Flips for the defect sum_k kappa_k abar_k.
QubitFlips defect_flips(const CodeSpec& code, const BitVector& kappa);

/// One defect vector (length 2K) per free flavor.
struct DefectSpec {
  std::vector<BitVector> kappa_per_flavor;

  static DefectSpec none(const CodeSpec& code, int n);
  /// kappa^n = sum_a kappa^a.
  BitVector product_flavor(std::size_t two_k) const;
};

/// Spacetime model over binary variables u_(t,i) = (1 - sigma_(t,i)) / 2.
///
/// Layers t = 0..T carry one variable per check (layers 0..T-1 in Field mode, where u_T is
/// pinned to zero). Round t contributes, for every qubit r, the site weight
///   spatial_weights(t)[px | pz << 1],
/// where px (pz) is the parity of u_t over S_r^x (S_r^z) xor the baked-in defect, and for
/// every check the readout weight temporal_weight(t, i) when u_t,i != u_t+1,i. In Field
/// mode the last round instead weighs u_(T-1),i = 1 by temporal_weight(T-1, i).
class SpacetimeModel {
 public:
  SpacetimeModel(const CodeSpec& code, std::vector<std::array<double, 4>> spatial,
                 std::vector<std::vector<double>> temporal, Boundary boundary);

  int T() const { return T_; }
  int I() const { return I_; }
  int N() const { return N_; }
  Boundary boundary() const { return boundary_; }
  int num_layers() const { return boundary_ == Boundary::Open ? T_ + 1 : T_; }
  int num_spins() const { return num_layers() * I_; }
  int spin_index(int t, int i) const { return t * I_ + i; }

  /// S_r^x: checks with Pauli-X support on qubit r.
  const std::vector<int>& site_x(int r) const { return site_x_[static_cast<std::size_t>(r)]; }
  const std::vector<int>& site_z(int r) const { return site_z_[static_cast<std::size_t>(r)]; }
  const std::array<double, 4>& spatial_weights(int t) const { return spatial_[static_cast<std::size_t>(t)]; }
  double temporal_weight(int t, int i) const {
    return temporal_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
  }
  const QubitFlips& flips() const { return flips_; }
  void set_flips(QubitFlips f) { flips_ = std::move(f); }

  /// Bit masks of S_r^x / S_r^z over the checks (requires I <= 64).
  std::uint64_t site_x_mask(int r) const { return site_x_mask_[static_cast<std::size_t>(r)]; }
  std::uint64_t site_z_mask(int r) const { return site_z_mask_[static_cast<std::size_t>(r)]; }

 private:
  int T_;
  int I_;
  int N_;
  Boundary boundary_;
  std::vector<std::vector<int>> site_x_;
  std::vector<std::vector<int>> site_z_;
  std::vector<std::uint64_t> site_x_mask_;
  std::vector<std::uint64_t> site_z_mask_;
  std::vector<std::array<double, 4>> spatial_;
  std::vector<std::vector<double>> temporal_;
  QubitFlips flips_;
};

SpacetimeModel build_single_flavor(const CodeSpec& code, const NoiseParams& params, int T,
                                   const ModelOptions& options = {});

/// Copy of the model with the defect kappa (length 2K) inserted on top of existing flips.
SpacetimeModel insert_defect(const SpacetimeModel& model, const CodeSpec& code, const BitVector& kappa);

/// -log W(u) for a single flavor (u has num_spins() entries in {0,1}); +inf for zero weight.
double single_flavor_energy(const SpacetimeModel& model, const std::vector<std::uint8_t>& u,
                            const QubitFlips* extra = nullptr);

/// H^(n) = sum_a H_(kappa^a)(sigma^a) + H_(kappa^n)(prod_a sigma^a), sigma in {+1,-1}.
double multiflavor_energy(const SpacetimeModel& model, const CodeSpec& code,
                          const std::vector<std::vector<int>>& sigma, const DefectSpec& defects);

struct SymmetryGenerators {
  /// Spin indices flipped by each generator.
  std::vector<std::vector<int>> flip_sets;
  /// Check-space redundancy vector behind each generator.
  std::vector<BitVector> redundancy;
  /// True in Field mode, where the boundary field breaks every generator.
  bool boundary_breaking = false;
};
SymmetryGenerators symmetry_generators(const SpacetimeModel& model, const CodeSpec& code);

/// Spin-form term: contributes weight * sign * prod_(s in spins) sigma_s to -H.
struct SpinTerm {
  std::vector<int> spins;
  double weight = 0.0;
  int sign = 1;
  std::string kind;  // "x", "z", "y", "t", "field"
  int layer = 0;
  int site = 0;  // qubit for spatial terms, check for temporal/field terms
};

struct SpinForm {
  std::vector<SpinTerm> terms;
  double log_offset = 0.0;  // -H = log_offset + sum_terms
};

/// Exact spin-form rewrite of the model. Throws ValidationError when a weight is zero
/// (infinite coupling). Terms with zero coupling are dropped unless keep_zero is set.
SpinForm spin_form(const SpacetimeModel& model, bool keep_zero = false);

/// Connectivity under shared nonzero terms; returns a component label per spin,
/// labels numbered by first appearance.
std::vector<int> connected_components(const SpacetimeModel& model);

/// JSON export {"T","I","boundary","log_offset","terms":[{"spins":[[t,i]...],"weight","sign","kind"}]}.
std::string export_model_json(const SpacetimeModel& model);

}  // namespace syndromestat
