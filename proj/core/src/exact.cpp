#include "syndromestat/exact.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdlib>
#include <limits>
#include <thread>

#include "syndromestat/errors.hpp"

namespace syndromestat {

namespace {

constexpr int kMaxStateBits = 28;

struct Neumaier {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

// Weight of one layer of one flavor for every configuration y of its I variables.
std::vector<double> layer_table(const SpacetimeModel& m, int t, const QubitFlips& f) {
  const std::size_t S = std::size_t{1} << m.I();
  const auto& tab = m.spatial_weights(t);
  std::vector<double> A(S);
  for (std::size_t y = 0; y < S; ++y) {
    double w = 1.0;
    for (int r = 0; r < m.N(); ++r) {
      const unsigned px = (std::popcount(y & m.site_x_mask(r)) & 1u) ^ f.x[static_cast<std::size_t>(r)];
      const unsigned pz = (std::popcount(y & m.site_z_mask(r)) & 1u) ^ f.z[static_cast<std::size_t>(r)];
      w *= tab[px | (pz << 1)];
    }
    A[y] = w;
  }
  return A;
}

double normalize(std::vector<double>& v) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (mx == 0.0 || mx == 1.0) return 0.0;
  const double inv = 1.0 / mx;
  for (double& x : v) x *= inv;
  return std::log(mx);
}

void check_model_size(const SpacetimeModel& m, int n) {
  if (n < 2) throw ValidationError("Renyi index n must be at least 2");
  if (m.I() > 62) throw SizeError("exact engines need at most 62 checks, got " + std::to_string(m.I()), std::ldexp(1.0, (n - 1) * m.I()) * (m.T() + 1));
}

ScaledValue transfer_sum(const SpacetimeModel& m, int n, const std::vector<QubitFlips>& flavor_flips,
                         const QubitFlips& product_flips, const BitVector* sign) {
  const int F = n - 1;
  const int I = m.I();
  const int SB = F * I;
  if (SB > kMaxStateBits) {
    throw SizeError("transfer state of " + std::to_string(SB) + " bits exceeds the memory cap of " +
                        std::to_string(kMaxStateBits) + " bits",
                    std::ldexp(1.0, SB) * m.num_layers());
  }
  const std::size_t S = std::size_t{1} << SB;
  const std::uint64_t low = (std::uint64_t{1} << I) - 1;

  // tables[t][a], a = F is the product flavor.
  std::vector<std::vector<std::vector<double>>> tables(static_cast<std::size_t>(m.T()));
  for (int t = 0; t < m.T(); ++t) {
    for (int a = 0; a <= F; ++a) {
      const QubitFlips f = m.flips() ^ (a < F ? flavor_flips[static_cast<std::size_t>(a)] : product_flips);
      tables[static_cast<std::size_t>(t)].push_back(layer_table(m, t, f));
    }
  }
  auto phi = [&](int t, std::size_t x) {
    const auto& tb = tables[static_cast<std::size_t>(t)];
    std::uint64_t prod = 0;
    double w = 1.0;
    for (int a = 0; a < F; ++a) {
      const std::uint64_t xa = (x >> (a * I)) & low;
      prod ^= xa;
      w *= tb[static_cast<std::size_t>(a)][xa];
    }
    return w * tb[static_cast<std::size_t>(F)][prod];
  };

  std::uint64_t sign_mask = 0;
  if (sign) {
    for (int i : sign->ones()) sign_mask |= std::uint64_t{1} << i;
  }

  std::vector<double> v(S);
  for (std::size_t x = 0; x < S; ++x) {
    double w = phi(0, x);
    if (sign_mask && (std::popcount(x & sign_mask) & 1)) w = -w;
    v[x] = w;
  }
  double log_scale = normalize(v);

  const std::size_t G = std::size_t{1} << F;
  std::vector<double> kern(G);
  std::vector<double> gather(G);
  std::vector<double> scatter(G);
  std::vector<std::size_t> embed(G);

  const bool field = m.boundary() == Boundary::Field;
  for (int t = 0; t < m.T(); ++t) {
    if (field && t == m.T() - 1) break;
    for (int i = 0; i < I; ++i) {
      const double w = m.temporal_weight(t, i);
      if (w == 1.0) {
        // Kernel is all ones: every group collapses to its sum.
        // (Handled by the generic path below; no shortcut needed for correctness.)
      }
      for (std::size_t d = 0; d < G; ++d) {
        const int k = std::popcount(d) + (std::popcount(d) & 1);
        kern[d] = std::pow(w, k);
        std::size_t e = 0;
        for (int a = 0; a < F; ++a) {
          if ((d >> a) & 1u) e |= std::size_t{1} << (a * I + i);
        }
        embed[d] = e;
      }
      const std::size_t group_mask = embed[G - 1];
      if (F == 1) {
        const double k1 = kern[1];
        const std::size_t stride = std::size_t{1} << i;
        for (std::size_t base = 0; base < S; base += 2 * stride) {
          for (std::size_t j = base; j < base + stride; ++j) {
            const double a0 = v[j];
            const double a1 = v[j + stride];
            v[j] = a0 + k1 * a1;
            v[j + stride] = k1 * a0 + a1;
          }
        }
        continue;
      }
      for (std::size_t x = 0; x < S; ++x) {
        if (x & group_mask) continue;
        for (std::size_t d = 0; d < G; ++d) gather[d] = v[x | embed[d]];
        for (std::size_t d = 0; d < G; ++d) {
          double acc = 0.0;
          for (std::size_t e = 0; e < G; ++e) acc += kern[d ^ e] * gather[e];
          scatter[d] = acc;
        }
        for (std::size_t d = 0; d < G; ++d) v[x | embed[d]] = scatter[d];
      }
    }
    if (t + 1 < m.T()) {
      for (std::size_t x = 0; x < S; ++x) v[x] *= phi(t + 1, x);
    }
    log_scale += normalize(v);
  }

  Neumaier total;
  if (field) {
    const int t = m.T() - 1;
    std::vector<double> wl(static_cast<std::size_t>(I));
    for (int i = 0; i < I; ++i) wl[static_cast<std::size_t>(i)] = m.temporal_weight(t, i);
    for (std::size_t x = 0; x < S; ++x) {
      if (v[x] == 0.0) continue;
      std::uint64_t prod = 0;
      double w = v[x];
      for (int a = 0; a < F; ++a) {
        const std::uint64_t xa = (x >> (a * I)) & low;
        prod ^= xa;
        for (std::uint64_t b = xa; b; b &= b - 1) w *= wl[static_cast<std::size_t>(std::countr_zero(b))];
      }
      for (std::uint64_t b = prod; b; b &= b - 1) w *= wl[static_cast<std::size_t>(std::countr_zero(b))];
      total.add(w);
    }
  } else {
    for (double x : v) total.add(x);
  }
  return {total.value(), log_scale};
}

// Factor graph over all spins of the n-1 free flavors; the product flavor is derived on the fly.
class Enumerator {
 public:
  Enumerator(const SpacetimeModel& m, int n, const std::vector<QubitFlips>& flavor_flips,
             const QubitFlips& product_flips, const BitVector* sign)
      : m_(m), F_(n - 1), ns_(m.num_spins()) {
    for (int a = 0; a <= F_; ++a) {
      flips_.push_back(m.flips() ^ (a < F_ ? flavor_flips[static_cast<std::size_t>(a)] : product_flips));
    }
    if (sign) {
      for (int i : sign->ones()) sign_spins_.push_back(m.spin_index(0, i));
    }
    touching_.resize(static_cast<std::size_t>(m.I()));
    for (int r = 0; r < m.N(); ++r) {
      std::vector<int> all = m.site_x(r);
      all.insert(all.end(), m.site_z(r).begin(), m.site_z(r).end());
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      for (int i : all) touching_[static_cast<std::size_t>(i)].push_back(r);
    }
    spatial_per_flavor_ = m.T() * m.N();
    temporal_per_flavor_ = m.T() * m.I();
    per_flavor_ = spatial_per_flavor_ + temporal_per_flavor_;
    factors_.assign(static_cast<std::size_t>((F_ + 1) * per_flavor_), 1.0);
    u_.assign(static_cast<std::size_t>(F_ * ns_), 0);
  }

  std::uint64_t total_bits() const { return static_cast<std::uint64_t>(F_) * static_cast<std::uint64_t>(ns_); }

  /// Sum over configurations whose top `chunk_bits` bits equal `chunk`.
  double chunk_sum(std::uint64_t chunk, int chunk_bits) {
    const auto B = static_cast<int>(total_bits());
    const int low_bits = B - chunk_bits;
    std::fill(u_.begin(), u_.end(), 0);
    for (int b = 0; b < chunk_bits; ++b) {
      if ((chunk >> b) & 1u) u_[static_cast<std::size_t>(low_bits + b)] = 1;
    }
    recompute_all();
    Neumaier acc;
    acc.add(current());
    const std::uint64_t count = std::uint64_t{1} << low_bits;
    for (std::uint64_t k = 1; k < count; ++k) {
      flip(std::countr_zero(k));
      if ((k & 4095u) == 0) recompute_logs();
      acc.add(current());
    }
    return acc.value();
  }

 private:
  unsigned spin(int a, int s) const {
    if (a < F_) return u_[static_cast<std::size_t>(a * ns_ + s)];
    unsigned p = 0;
    for (int b = 0; b < F_; ++b) p ^= u_[static_cast<std::size_t>(b * ns_ + s)];
    return p;
  }

  double spatial_value(int a, int t, int r) const {
    unsigned px = flips_[static_cast<std::size_t>(a)].x[static_cast<std::size_t>(r)];
    unsigned pz = flips_[static_cast<std::size_t>(a)].z[static_cast<std::size_t>(r)];
    for (int i : m_.site_x(r)) px ^= spin(a, m_.spin_index(t, i));
    for (int i : m_.site_z(r)) pz ^= spin(a, m_.spin_index(t, i));
    return m_.spatial_weights(t)[px | (pz << 1)];
  }

  double temporal_value(int a, int t, int i) const {
    const bool last_field = m_.boundary() == Boundary::Field && t == m_.T() - 1;
    const unsigned x = spin(a, m_.spin_index(t, i));
    const unsigned y = last_field ? 0u : spin(a, m_.spin_index(t + 1, i));
    return x == y ? 1.0 : m_.temporal_weight(t, i);
  }

  std::size_t spatial_slot(int a, int t, int r) const {
    return static_cast<std::size_t>(a * per_flavor_ + t * m_.N() + r);
  }
  std::size_t temporal_slot(int a, int t, int i) const {
    return static_cast<std::size_t>(a * per_flavor_ + spatial_per_flavor_ + t * m_.I() + i);
  }

  void set_factor(std::size_t slot, double value) {
    const double old = factors_[slot];
    if (old == 0.0) {
      --zeros_;
    } else {
      logsum_ -= std::log(old);
    }
    factors_[slot] = value;
    if (value == 0.0) {
      ++zeros_;
    } else {
      logsum_ += std::log(value);
    }
  }

  void recompute_all() {
    for (int a = 0; a <= F_; ++a) {
      for (int t = 0; t < m_.T(); ++t) {
        for (int r = 0; r < m_.N(); ++r) factors_[spatial_slot(a, t, r)] = spatial_value(a, t, r);
        for (int i = 0; i < m_.I(); ++i) factors_[temporal_slot(a, t, i)] = temporal_value(a, t, i);
      }
    }
    sign_parity_ = 0;
    for (int s : sign_spins_) sign_parity_ ^= u_[static_cast<std::size_t>(s)];
    recompute_logs();
  }

  void recompute_logs() {
    zeros_ = 0;
    logsum_ = 0.0;
    for (double f : factors_) {
      if (f == 0.0) {
        ++zeros_;
      } else {
        logsum_ += std::log(f);
      }
    }
  }

  void flip(int bit) {
    const int a = bit / ns_;
    const int s = bit % ns_;
    u_[static_cast<std::size_t>(bit)] ^= 1u;
    const int t = s / m_.I();
    const int i = s % m_.I();
    if (a == 0 && std::find(sign_spins_.begin(), sign_spins_.end(), s) != sign_spins_.end()) sign_parity_ ^= 1u;
    for (int b : {a, F_}) {
      if (t < m_.T()) {
        for (int r : touching_[static_cast<std::size_t>(i)]) set_factor(spatial_slot(b, t, r), spatial_value(b, t, r));
        set_factor(temporal_slot(b, t, i), temporal_value(b, t, i));
      }
      if (t > 0) set_factor(temporal_slot(b, t - 1, i), temporal_value(b, t - 1, i));
    }
  }

  double current() const {
    if (zeros_ > 0) return 0.0;
    const double w = std::exp(logsum_);
    return sign_parity_ ? -w : w;
  }

  const SpacetimeModel& m_;
  int F_;
  int ns_;
  std::vector<QubitFlips> flips_;
  std::vector<int> sign_spins_;
  std::vector<std::vector<int>> touching_;
  int spatial_per_flavor_ = 0;
  int temporal_per_flavor_ = 0;
  int per_flavor_ = 0;
  std::vector<double> factors_;
  std::vector<std::uint8_t> u_;
  long zeros_ = 0;
  double logsum_ = 0.0;
  unsigned sign_parity_ = 0;
};

ScaledValue enumerate_sum(const SpacetimeModel& m, int n, const std::vector<QubitFlips>& flavor_flips,
                          const QubitFlips& product_flips, const BitVector* sign, int threads) {
  Enumerator proto(m, n, flavor_flips, product_flips, sign);
  const auto B = static_cast<int>(proto.total_bits());
  if (B > 40) throw SizeError("enumeration over " + std::to_string(B) + " bits is out of reach", std::ldexp(1.0, B));
  const int chunk_bits = std::min(6, B);
  const std::uint64_t chunks = std::uint64_t{1} << chunk_bits;
  std::vector<double> partial(chunks, 0.0);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    Enumerator e(m, n, flavor_flips, product_flips, sign);
    for (std::uint64_t c = next++; c < chunks; c = next++) partial[c] = e.chunk_sum(c, chunk_bits);
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(chunks)));
  std::vector<std::thread> pool;
  for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  Neumaier total;
  for (double p : partial) total.add(p);
  return {total.value(), 0.0};
}

QubitFlips no_flips(const SpacetimeModel& m) { return QubitFlips::none(static_cast<std::size_t>(m.N())); }

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < count; k = next++) fn(k);
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

void check_budget(double required, const EngineOptions& opt, const std::string& what) {
  if (required > opt.budget) {
    throw SizeError(what + " needs " + std::to_string(required) + " enumeration steps, budget is " +
                        std::to_string(opt.budget),
                    required);
  }
}

double log_sum_exp(const std::vector<double>& xs) {
  double mx = -INFINITY;
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  Neumaier acc;
  for (double x : xs) acc.add(std::exp(x - mx));
  return mx + std::log(acc.value());
}

std::vector<BitVector> kappa_tuple(std::uint64_t index, std::size_t two_k, int F) {
  std::vector<BitVector> out;
  for (int a = 0; a < F; ++a) {
    BitVector k(two_k);
    for (std::size_t b = 0; b < two_k; ++b) {
      if ((index >> (static_cast<std::size_t>(a) * two_k + b)) & 1u) k.set(b);
    }
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace

double default_budget() {
  if (const char* env = std::getenv("SYNDROMESTAT_BUDGET")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return std::ldexp(1.0, 28);
}

double sector_cost(const SpacetimeModel& m, int n, ExactEngine engine) {
  const int F = n - 1;
  if (engine == ExactEngine::Transfer) return std::ldexp(1.0, F * m.I()) * m.num_layers();
  return std::ldexp(1.0, F * m.num_spins());
}

ScaledValue multiflavor_sum(const SpacetimeModel& m, int n, const std::vector<QubitFlips>& flavor_flips,
                            const QubitFlips& product_flips, const BitVector* sign, const EngineOptions& options) {
  check_model_size(m, n);
  if (flavor_flips.size() != static_cast<std::size_t>(n - 1)) {
    throw DimensionError("need exactly n-1 flavor flip sets");
  }
  if (sign && sign->size() != static_cast<std::size_t>(m.I())) throw DimensionError("sign vector must have length I");
  check_budget(sector_cost(m, n, options.engine), options, "partition function");
  if (options.engine == ExactEngine::Transfer) return transfer_sum(m, n, flavor_flips, product_flips, sign);
  return enumerate_sum(m, n, flavor_flips, product_flips, sign, options.threads);
}

double partition_function(const SpacetimeModel& m, int n, const EngineOptions& options) {
  const std::vector<QubitFlips> flips(static_cast<std::size_t>(std::max(n - 1, 0)), no_flips(m));
  const ScaledValue z = multiflavor_sum(m, n, flips, no_flips(m), nullptr, options);
  return z.log();
}

std::string defect_key(const std::vector<BitVector>& kappas) {
  std::string key;
  for (std::size_t a = 0; a < kappas.size(); ++a) {
    if (a) key += '|';
    key += kappas[a].str();
  }
  return key;
}

DiagnosticsResult coherent_information(const CodeSpec& code, const NoiseParams& params, int T, int n,
                                       const ModelOptions& model_options, const EngineOptions& options) {
  ModelOptions mo = model_options;
  mo.boundary = Boundary::Open;
  const SpacetimeModel m = build_single_flavor(code, params, T, mo);
  check_model_size(m, n);
  const int F = n - 1;
  const std::size_t two_k = 2 * code.num_logical();
  const std::size_t bits = two_k * static_cast<std::size_t>(F);
  if (bits > 40) throw SizeError("too many defect sectors", std::ldexp(1.0, static_cast<int>(bits)));
  const std::uint64_t sectors = std::uint64_t{1} << bits;
  check_budget(sector_cost(m, n, options.engine) * static_cast<double>(sectors), options, "coherent information");

  std::vector<double> logz(sectors, -INFINITY);
  EngineOptions inner = options;
  inner.budget = INFINITY;
  const bool parallel_sectors = options.engine == ExactEngine::Transfer;
  if (!parallel_sectors) inner.threads = options.threads;
  parallel_for(sectors, parallel_sectors ? options.threads : 1, [&](std::size_t s) {
    const auto kappas = kappa_tuple(s, two_k, F);
    std::vector<QubitFlips> ff;
    for (const auto& k : kappas) ff.push_back(defect_flips(code, k));
    BitVector kn(two_k);
    for (const auto& k : kappas) kn ^= k;
    logz[s] = multiflavor_sum(m, n, ff, defect_flips(code, kn), nullptr, inner).log();
  });

  DiagnosticsResult res;
  res.code = code.name();
  res.T = T;
  res.n = n;
  res.params = params;
  res.log_Z = logz[0];
  if (!std::isfinite(res.log_Z)) throw NumericalError("defect-free partition function is not positive");
  for (std::uint64_t s = 0; s < sectors; ++s) {
    res.defect_free_energies[defect_key(kappa_tuple(s, two_k, F))] = res.log_Z - logz[s];
  }
  const double lse = log_sum_exp(logz);
  const double K = static_cast<double>(code.num_logical());
  const double I = static_cast<double>(code.num_checks());
  res.ic = (lse - res.log_Z) / F - K * std::log(2.0);
  res.log_trace_qm = res.log_Z - F * (I + K + I * T) * std::log(2.0);
  res.log_trace_qmr = lse - F * (I + 2 * K + I * T) * std::log(2.0);
  if (!std::isfinite(res.ic)) throw NumericalError("coherent information is not finite");
  return res;
}

double boundary_correlator(const CodeSpec& code, const NoiseParams& params, int T, int n, const BitVector& s,
                           Boundary boundary, const ModelOptions& model_options, const EngineOptions& options) {
  if (s.size() != code.num_checks()) throw DimensionError("syndrome must have one bit per check");
  if (!error_with_syndrome(code, s)) {
    throw ValidationError("syndrome " + s.str() + " cannot be created by any Pauli operator");
  }
  if (s.none()) return 1.0;
  ModelOptions mo = model_options;
  mo.boundary = boundary;
  const SpacetimeModel m = build_single_flavor(code, params, T, mo);
  check_model_size(m, n);
  const std::vector<QubitFlips> flips(static_cast<std::size_t>(n - 1), no_flips(m));
  EngineOptions inner = options;
  const ScaledValue z = multiflavor_sum(m, n, flips, no_flips(m), nullptr, inner);
  const ScaledValue zs = multiflavor_sum(m, n, flips, no_flips(m), &s, inner);
  if (!(z.mantissa > 0.0)) throw NumericalError("partition function is not positive");
  return zs.ratio_to(z);
}

double relative_entropy(const CodeSpec& code, const NoiseParams& params, int T, int n, const BitVector& s,
                        const ModelOptions& model_options, const EngineOptions& options) {
  const double c = boundary_correlator(code, params, T, n, s, Boundary::Open, model_options, options);
  if (!(c > 0.0)) return INFINITY;
  return c == 1.0 ? 0.0 : -std::log(c) / (n - 1);
}

double kl_divergence(const CodeSpec& code, const NoiseParams& params, int T, int n, const BitVector& s,
                     const ModelOptions& model_options, const EngineOptions& options) {
  const double c = boundary_correlator(code, params, T, n, s, Boundary::Field, model_options, options);
  if (!(c > 0.0)) return INFINITY;
  return c == 1.0 ? 0.0 : -std::log(c) / (n - 1);
}

double log_trace_rho_qm(const CodeSpec& code, const NoiseParams& params, int T, int n,
                        const ModelOptions& model_options, const EngineOptions& options) {
  ModelOptions mo = model_options;
  mo.boundary = Boundary::Open;
  const SpacetimeModel m = build_single_flavor(code, params, T, mo);
  const double K = static_cast<double>(code.num_logical());
  const double I = static_cast<double>(code.num_checks());
  return partition_function(m, n, options) - (n - 1) * (I + K + I * T) * std::log(2.0);
}

double log_trace_rho_qmr(const CodeSpec& code, const NoiseParams& params, int T, int n,
                         const ModelOptions& model_options, const EngineOptions& options) {
  return coherent_information(code, params, T, n, model_options, options).log_trace_qmr;
}

double log_trace_rho_m(const CodeSpec& code, const NoiseParams& params, int T, int n,
                       const ModelOptions& model_options, const EngineOptions& options) {
  ModelOptions mo = model_options;
  mo.boundary = Boundary::Field;
  const SpacetimeModel m = build_single_flavor(code, params, T, mo);
  const double I = static_cast<double>(code.num_checks());
  return partition_function(m, n, options) - (n - 1) * I * T * std::log(2.0);
}

}  // namespace syndromestat
