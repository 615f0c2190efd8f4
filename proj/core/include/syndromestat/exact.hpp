#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "syndromestat/codes.hpp"
#include "syndromestat/lattice_model.hpp"
#include "syndromestat/noise.hpp"

namespace syndromestat {

/// Default enumeration budget: 2^28 visited states, or SYNDROMESTAT_BUDGET when set.
double default_budget();

enum class ExactEngine {
  /// Layer-by-layer transfer over (n-1)*I flavor bits, one pass per defect sector.
  Transfer,
  /// Gray-code walk over every spin of every flavor with incremental factor updates.
  Enumerate,
};

struct EngineOptions {
  double budget = default_budget();
  int threads = 1;
  ExactEngine engine = ExactEngine::Transfer;
};

/// mantissa * exp(log_scale); keeps huge or tiny sums representable.
struct ScaledValue {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double log() const { return mantissa > 0.0 ? std::log(mantissa) + log_scale : -INFINITY; }
  double ratio_to(const ScaledValue& other) const {
    return mantissa / other.mantissa * std::exp(log_scale - other.log_scale);
  }
};

/// Work units the chosen engine needs for one sector.
double sector_cost(const SpacetimeModel& model, int n, ExactEngine engine);

/// Sum over n-1 free flavors of prod_a W_(f_a)(u^a) * W_(f_prod)(xor_a u^a), where every flip set
/// is applied on top of the model's own flips. With `sign` (length I) each configuration also
/// carries (-1)^(sign . u^1_0).
ScaledValue multiflavor_sum(const SpacetimeModel& model, int n, const std::vector<QubitFlips>& flavor_flips,
                            const QubitFlips& product_flips, const BitVector* sign, const EngineOptions& options);

/// log Z_n of the defect-free model (model flips applied to every flavor).
double partition_function(const SpacetimeModel& model, int n, const EngineOptions& options = {});

struct DiagnosticsResult {
  std::string code;
  int T = 0;
  int n = 2;
  NoiseParams params;
  double log_Z = 0.0;
  /// Keyed by the defect tuple, flavors separated by '|', e.g. "01|10".
  std::map<std::string, double> defect_free_energies;
  double ic = NAN;
  std::map<std::string, double> d_s;
  std::map<std::string, double> d_kl;
  double log_trace_qm = NAN;
  double log_trace_qmr = NAN;
};

/// Renyi-n coherent information from all 2^(2K(n-1)) defect sectors (nats).
DiagnosticsResult coherent_information(const CodeSpec& code, const NoiseParams& params, int T, int n,
                                       const ModelOptions& model_options = {}, const EngineOptions& options = {});

/// -1/(n-1) log <prod_i (sigma^1_(0,i))^(s_i)>, +inf when the correlator vanishes.
double relative_entropy(const CodeSpec& code, const NoiseParams& params, int T, int n, const BitVector& s,
                        const ModelOptions& model_options = {}, const EngineOptions& options = {});

/// Same correlator in the boundary-field model (record-only states).
double kl_divergence(const CodeSpec& code, const NoiseParams& params, int T, int n, const BitVector& s,
                     const ModelOptions& model_options = {}, const EngineOptions& options = {});

/// Boundary correlator itself (no logarithm); `boundary` selects open or field mode.
double boundary_correlator(const CodeSpec& code, const NoiseParams& params, int T, int n, const BitVector& s,
                           Boundary boundary, const ModelOptions& model_options = {},
                           const EngineOptions& options = {});

/// log Tr rho_QM^n = log Z_n - (n-1)(I + K + I T) log 2.
double log_trace_rho_qm(const CodeSpec& code, const NoiseParams& params, int T, int n,
                        const ModelOptions& model_options = {}, const EngineOptions& options = {});

/// log Tr rho_QMR^n = log sum_kappa Z_n(kappa) - (n-1)(I + 2K + I T) log 2.
double log_trace_rho_qmr(const CodeSpec& code, const NoiseParams& params, int T, int n,
                         const ModelOptions& model_options = {}, const EngineOptions& options = {});

/// log Tr rho_M^n = log Z_n^+ - (n-1) I T log 2 (boundary-field model).
double log_trace_rho_m(const CodeSpec& code, const NoiseParams& params, int T, int n,
                       const ModelOptions& model_options = {}, const EngineOptions& options = {});

/// Formats a defect tuple key such as "01|10".
std::string defect_key(const std::vector<BitVector>& kappas);

}  // namespace syndromestat
