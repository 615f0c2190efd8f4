#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "syndromestat/codes.hpp"
#include "syndromestat/lattice_model.hpp"
#include "syndromestat/noise.hpp"

namespace syndromestat {

enum class Sampler { Metropolis, Wolff };
std::string to_string(Sampler s);
Sampler sampler_from_string(const std::string& s);

struct MCConfig {
  long sweeps = 10000;
  /// Wolff also uses these sweeps to fix how many clusters make up one measured sweep.
  long burn_in = 1000;
  std::uint64_t seed = 1;
  Sampler algorithm = Sampler::Metropolis;
  /// Independent chains per parameter point; their measurements are pooled.
  int replicas = 1;
  int measure_every = 1;
  /// Use single couplings (decoupled replicas, n -> infinity) instead of the doubled n = 2 ones.
  bool decoupled = false;
  int threads = 1;
  /// Keep the per-measurement stream (energy and sector magnetizations).
  bool keep_stream = false;

  void validate() const;
};

/// Spin model ready for sampling: -H = sum_terms weight * sign * prod sigma.
struct SamplerModel {
  int num_spins = 0;
  std::vector<SpinTerm> terms;
  /// Spin sets of the global symmetry sectors (magnetization is averaged over each).
  std::vector<std::vector<int>> sectors;
  /// True when the code's redundancies are local, so sector magnetizations are gauge variant.
  bool gauge_variant = false;
};

/// Spin form of the model with couplings doubled (n = 2) or kept single (decoupled flag).
SamplerModel sampler_model(const SpacetimeModel& model, const CodeSpec& code, bool decoupled = false);

/// True when every term is two-spin with weight * sign >= 0 (Wolff applies).
bool wolff_compatible(const SamplerModel& model);

struct Estimate {
  double mean = 0.0;
  double error = 0.0;
};

struct SectorObservables {
  Estimate abs_m;
  Estimate m2;
  Estimate m4;
  /// U = 1 - <m^4> / (3 <m^2>^2), error by blocked jackknife.
  Estimate binder;
};

struct MCObservables {
  std::vector<SectorObservables> sectors;
  bool gauge_variant = false;
  /// H per spin (without the constant offset).
  Estimate energy_density;
  /// <prod sigma> for each requested spin set.
  std::vector<Estimate> products;
  long measurements = 0;
  double acceptance = 0.0;
  /// Rows of (energy density, m_sector...), filled when keep_stream is set.
  std::vector<std::vector<double>> stream;
};

/// Called with the current spins (+1/-1) at every measurement.
using SampleObserver = std::function<void(const std::vector<std::int8_t>&)>;

MCObservables run_chain(const SamplerModel& model, const MCConfig& config,
                        const std::vector<std::vector<int>>& products = {}, const SampleObserver& observer = {});

/// Convenience: builds the sampler model of `model` first.
MCObservables run_chain(const SpacetimeModel& model, const CodeSpec& code, const MCConfig& config,
                        const std::vector<std::vector<int>>& products = {});

/// Spins (layer t) of the checks anticommuting with P: a redundancy-invariant product whenever P
/// is any Pauli operator, used as a Wilson loop for codes with local redundancies.
std::vector<int> wilson_loop_spins(const SpacetimeModel& model, const CodeSpec& code, const PauliWord& P, int layer);

/// True when the product over `spins` is invariant under every symmetry generator.
bool is_symmetry_invariant(const SpacetimeModel& model, const CodeSpec& code, const std::vector<int>& spins);

/// MC estimate of <prod_(i in s) sigma_(0,i)> for each syndrome; Field boundary gives the KL version.
std::vector<Estimate> mc_boundary_correlator(const CodeSpec& code, const NoiseParams& params, int T,
                                             const std::vector<BitVector>& syndromes, const MCConfig& config,
                                             Boundary boundary = Boundary::Open);

struct Crossing {
  int L1 = 0;
  int L2 = 0;
  bool found = false;
  double p = 0.0;
  double error = 0.0;
  std::string message;
};

/// Crossing of two curves U1(p), U2(p) on an increasing grid. The sign change of U2 - U1 with the
/// clearest separation is refined by cubic weighted least-squares fits over the six surrounding
/// points; the error is a parametric bootstrap. Reports no crossing unless the difference changes
/// sign with 2 sigma significance on both sides.
Crossing find_crossing(const std::vector<double>& p, const std::vector<Estimate>& U1, const std::vector<Estimate>& U2,
                       std::uint64_t seed, int bootstrap = 200);

struct ScanSpec {
  std::function<CodeSpec(int L)> code;
  std::function<int(int L)> T_of_L;
  std::function<NoiseParams(double p)> params_of;
  /// Sector whose Binder cumulant is used; -1 picks the most ordered sector at the smallest size.
  int sector = -1;
};

struct ScanPoint {
  int L = 0;
  int T = 0;
  double p = 0.0;
  MCObservables obs;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  int sector = 0;
  std::vector<Crossing> pairwise;
  bool found = false;
  double pooled = 0.0;
  double pooled_error = 0.0;
  std::string message;
};

ScanResult binder_scan(const ScanSpec& spec, const std::vector<double>& p_grid, const std::vector<int>& sizes,
                       const MCConfig& config);

/// Deterministic per-chain generator state (mt19937_64 seeded through seed_seq with seed and chain).
class ChainRng {
 public:
  ChainRng(std::uint64_t seed, std::uint64_t chain);
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace syndromestat
