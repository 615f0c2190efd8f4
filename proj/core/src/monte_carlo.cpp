#include "syndromestat/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "syndromestat/errors.hpp"
#include "syndromestat/io.hpp"

namespace syndromestat {

std::string to_string(Sampler s) { return s == Sampler::Wolff ? "wolff" : "metropolis"; }

Sampler sampler_from_string(const std::string& s) {
  if (s == "metropolis") return Sampler::Metropolis;
  if (s == "wolff") return Sampler::Wolff;
  throw ValidationError("unknown sampler '" + s + "' (expected metropolis or wolff)");
}

void MCConfig::validate() const {
  if (burn_in < 0) throw ValidationError("burn_in must be non-negative");
  if (!(sweeps > burn_in)) throw ValidationError("sweeps must exceed burn_in");
  if (replicas < 1) throw ValidationError("replicas must be at least 1");
  if (measure_every < 1) throw ValidationError("measure_every must be at least 1");
  if (threads < 1) throw ValidationError("threads must be at least 1");
}

ChainRng::ChainRng(std::uint64_t seed, std::uint64_t chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain), static_cast<std::uint32_t>(chain >> 32)};
  engine_.seed(seq);
}

std::uint64_t ChainRng::next() { return engine_(); }

double ChainRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t ChainRng::below(std::uint64_t n) {
  // Lemire-style rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

SamplerModel sampler_model(const SpacetimeModel& model, const CodeSpec& code, bool decoupled) {
  const SpinForm sf = spin_form(model);
  SamplerModel out;
  out.num_spins = model.num_spins();
  const double scale = decoupled ? 1.0 : 2.0;
  for (SpinTerm t : sf.terms) {
    if (t.weight == 0.0 || t.spins.empty()) continue;
    t.weight *= scale;
    out.terms.push_back(std::move(t));
  }
  out.gauge_variant = symmetry_classification(code) == "local";
  for (auto& set : symmetry_generators(model, code).flip_sets) out.sectors.push_back(std::move(set));
  return out;
}

bool wolff_compatible(const SamplerModel& model) {
  return std::all_of(model.terms.begin(), model.terms.end(),
                     [](const SpinTerm& t) { return t.spins.size() == 2 && t.weight * t.sign >= 0.0; });
}

namespace {

int num_blocks(std::size_t n) { return static_cast<int>(std::min<std::size_t>(32, n)); }

// Measurement k goes to block k * nb / n.
std::vector<std::size_t> block_counts(std::size_t n, int nb) {
  std::vector<std::size_t> cnt(static_cast<std::size_t>(nb), 0);
  for (std::size_t k = 0; k < n; ++k) ++cnt[k * static_cast<std::size_t>(nb) / n];
  return cnt;
}

std::vector<double> block_means(const std::vector<double>& v, int nb) {
  std::vector<double> out(static_cast<std::size_t>(nb), 0.0);
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) out[k * static_cast<std::size_t>(nb) / n] += v[k];
  const auto cnt = block_counts(n, nb);
  for (std::size_t b = 0; b < out.size(); ++b) out[b] /= static_cast<double>(cnt[b]);
  return out;
}

Estimate blocked(const std::vector<double>& v) {
  Estimate e;
  if (v.empty()) return e;
  e.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const int nb = num_blocks(v.size());
  if (nb < 2) return e;
  const auto bm = block_means(v, nb);
  double var = 0.0;
  for (double b : bm) var += (b - e.mean) * (b - e.mean);
  e.error = std::sqrt(var / (nb - 1) / nb);
  return e;
}

Estimate binder_jackknife(const std::vector<double>& m2, const std::vector<double>& m4) {
  Estimate e;
  if (m2.empty()) return e;
  const double n = static_cast<double>(m2.size());
  const double s2 = std::accumulate(m2.begin(), m2.end(), 0.0);
  const double s4 = std::accumulate(m4.begin(), m4.end(), 0.0);
  auto U = [](double a2, double a4) { return a2 > 0.0 ? 1.0 - a4 / (3.0 * a2 * a2) : 0.0; };
  e.mean = U(s2 / n, s4 / n);
  const int nb = num_blocks(m2.size());
  if (nb < 2) return e;
  const auto b2 = block_means(m2, nb);
  const auto b4 = block_means(m4, nb);
  // Block sizes differ by at most one; weight by the exact counts through the totals.
  std::vector<double> uj;
  const auto counts = block_counts(m2.size(), nb);
  for (int b = 0; b < nb; ++b) {
    const double cnt = static_cast<double>(counts[static_cast<std::size_t>(b)]);
    const double r2 = (s2 - b2[static_cast<std::size_t>(b)] * cnt) / (n - cnt);
    const double r4 = (s4 - b4[static_cast<std::size_t>(b)] * cnt) / (n - cnt);
    uj.push_back(U(r2, r4));
  }
  const double mean_j = std::accumulate(uj.begin(), uj.end(), 0.0) / nb;
  double var = 0.0;
  for (double u : uj) var += (u - mean_j) * (u - mean_j);
  e.error = std::sqrt(var * (nb - 1) / nb);
  return e;
}

class Chain {
 public:
  Chain(const SamplerModel& m, std::uint64_t seed, std::uint64_t chain) : m_(m), rng_(seed, chain) {
    const auto ns = static_cast<std::size_t>(m.num_spins);
    spins_.assign(ns, 1);
    coef_.resize(m.terms.size());
    pi_.assign(m.terms.size(), 1);
    std::vector<std::size_t> deg(ns + 1, 0);
    for (const auto& t : m.terms) {
      for (int s : t.spins) ++deg[static_cast<std::size_t>(s) + 1];
    }
    std::partial_sum(deg.begin(), deg.end(), deg.begin());
    start_ = deg;
    adj_.resize(deg.back());
    std::vector<std::size_t> fill(deg.begin(), deg.end() - 1);
    for (std::size_t k = 0; k < m.terms.size(); ++k) {
      coef_[k] = m.terms[k].weight * m.terms[k].sign;
      for (int s : m.terms[k].spins) adj_[fill[static_cast<std::size_t>(s)]++] = static_cast<int>(k);
    }
    // Random start.
    for (auto& s : spins_) s = (rng_.next() >> 63) ? 1 : -1;
    recompute_pi();
  }

  void metropolis_sweep() {
    const auto ns = static_cast<std::size_t>(m_.num_spins);
    // Random site order: a fixed order flips uncoupled spins every sweep and never mixes them.
    for (std::size_t step = 0; step < ns; ++step) {
      const auto s = static_cast<std::size_t>(rng_.below(ns));
      double local = 0.0;
      for (std::size_t k = start_[s]; k < start_[s + 1]; ++k) {
        const auto t = static_cast<std::size_t>(adj_[k]);
        local += coef_[t] * pi_[t];
      }
      // Flipping s changes -H by -2 * local.
      ++attempts_;
      if (local <= 0.0 || rng_.uniform() < std::exp(-2.0 * local)) {
        ++accepted_;
        spins_[s] = static_cast<std::int8_t>(-spins_[s]);
        for (std::size_t k = start_[s]; k < start_[s + 1]; ++k) pi_[static_cast<std::size_t>(adj_[k])] *= -1;
      }
    }
  }

  // A sweep is a fixed number of clusters. Stopping once N spins have flipped would make the
  // measurement time depend on the state and bias the averages. The count is learned during burn-in
  // (clusters needed to flip about N spins) and frozen afterwards.
  void wolff_sweep(bool adapt) {
    if (padd_.empty()) build_wolff();
    const auto ns = static_cast<std::size_t>(m_.num_spins);
    if (ns == 0) return;
    std::size_t flipped = 0;
    long clusters = 0;
    const auto done = [&] { return adapt ? flipped >= ns : clusters >= clusters_per_sweep_; };
    while (!done()) {
      ++clusters;
      const auto seed = static_cast<std::size_t>(rng_.below(ns));
      const std::int8_t s0 = spins_[seed];
      stack_.clear();
      stack_.push_back(seed);
      spins_[seed] = static_cast<std::int8_t>(-s0);
      std::size_t size = 1;
      while (!stack_.empty()) {
        const std::size_t s = stack_.back();
        stack_.pop_back();
        for (std::size_t k = nstart_[s]; k < nstart_[s + 1]; ++k) {
          const auto nb = static_cast<std::size_t>(nbr_[k]);
          if (spins_[nb] == s0 && rng_.uniform() < padd_[k]) {
            spins_[nb] = static_cast<std::int8_t>(-s0);
            stack_.push_back(nb);
            ++size;
          }
        }
      }
      flipped += size;
      ++attempts_;
      ++accepted_;
    }
    if (adapt) {
      adapt_spins_ += flipped;
      adapt_clusters_ += clusters;
      clusters_per_sweep_ = std::max<long>(
          1, std::lround(static_cast<double>(ns) * static_cast<double>(adapt_clusters_) / static_cast<double>(adapt_spins_)));
    }
    recompute_pi();
  }

  double minus_h() const {
    double e = 0.0;
    for (std::size_t k = 0; k < coef_.size(); ++k) e += coef_[k] * pi_[k];
    return e;
  }

  const std::vector<std::int8_t>& spins() const { return spins_; }
  double acceptance() const { return attempts_ ? static_cast<double>(accepted_) / static_cast<double>(attempts_) : 0.0; }

 private:
  void recompute_pi() {
    for (std::size_t k = 0; k < m_.terms.size(); ++k) {
      int p = 1;
      for (int s : m_.terms[k].spins) p *= spins_[static_cast<std::size_t>(s)];
      pi_[k] = static_cast<std::int8_t>(p);
    }
  }

  void build_wolff() {
    const auto ns = static_cast<std::size_t>(m_.num_spins);
    std::vector<std::vector<std::pair<int, double>>> nb(ns);
    for (std::size_t k = 0; k < m_.terms.size(); ++k) {
      const auto& t = m_.terms[k];
      const double p = 1.0 - std::exp(-2.0 * coef_[k]);
      nb[static_cast<std::size_t>(t.spins[0])].push_back({t.spins[1], p});
      nb[static_cast<std::size_t>(t.spins[1])].push_back({t.spins[0], p});
    }
    nstart_.assign(ns + 1, 0);
    for (std::size_t s = 0; s < ns; ++s) nstart_[s + 1] = nstart_[s] + nb[s].size();
    for (const auto& list : nb) {
      for (const auto& [j, p] : list) {
        nbr_.push_back(j);
        padd_.push_back(p);
      }
    }
  }

  const SamplerModel& m_;
  ChainRng rng_;
  std::vector<std::int8_t> spins_;
  std::vector<double> coef_;
  std::vector<std::int8_t> pi_;
  std::vector<std::size_t> start_;
  std::vector<int> adj_;
  std::vector<std::size_t> nstart_;
  std::vector<int> nbr_;
  std::vector<double> padd_;
  std::vector<std::size_t> stack_;
  long attempts_ = 0;
  long accepted_ = 0;
  long clusters_per_sweep_ = 1;
  std::size_t adapt_spins_ = 0;
  long adapt_clusters_ = 0;
};

struct ChainSeries {
  std::vector<std::vector<double>> m;  // per sector
  std::vector<double> energy;
  std::vector<std::vector<double>> products;
  std::vector<std::vector<double>> stream;
  double acceptance = 0.0;
};

ChainSeries run_one(const SamplerModel& model, const MCConfig& cfg, const std::vector<std::vector<int>>& products,
                    const SampleObserver& observer, std::uint64_t chain) {
  Chain c(model, cfg.seed, chain);
  ChainSeries out;
  out.m.resize(model.sectors.size());
  out.products.resize(products.size());
  const double inv_ns = model.num_spins ? 1.0 / model.num_spins : 0.0;
  for (long sweep = 0; sweep < cfg.sweeps; ++sweep) {
    if (cfg.algorithm == Sampler::Wolff) {
      c.wolff_sweep(sweep < cfg.burn_in);
    } else {
      c.metropolis_sweep();
    }
    if (sweep < cfg.burn_in || (sweep - cfg.burn_in) % cfg.measure_every != 0) continue;
    const auto& s = c.spins();
    std::vector<double> row;
    const double e = -c.minus_h() * inv_ns;
    out.energy.push_back(e);
    if (cfg.keep_stream) row.push_back(e);
    for (std::size_t k = 0; k < model.sectors.size(); ++k) {
      long sum = 0;
      for (int i : model.sectors[k]) sum += s[static_cast<std::size_t>(i)];
      const double m = model.sectors[k].empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(model.sectors[k].size());
      out.m[k].push_back(m);
      if (cfg.keep_stream) row.push_back(m);
    }
    for (std::size_t k = 0; k < products.size(); ++k) {
      int p = 1;
      for (int i : products[k]) p *= s[static_cast<std::size_t>(i)];
      out.products[k].push_back(p);
    }
    if (cfg.keep_stream) out.stream.push_back(std::move(row));
    if (observer) observer(s);
  }
  out.acceptance = c.acceptance();
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::string key = hex64(seed) + ":" + hex64(index);
  return fnv1a(key);
}

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

}  // namespace

MCObservables run_chain(const SamplerModel& model, const MCConfig& cfg, const std::vector<std::vector<int>>& products,
                        const SampleObserver& observer) {
  cfg.validate();
  if (cfg.algorithm == Sampler::Wolff && !wolff_compatible(model)) {
    throw ValidationError("wolff needs a model of two-spin ferromagnetic terms only; use metropolis");
  }
  for (const auto& set : products) {
    for (int s : set) {
      if (s < 0 || s >= model.num_spins) throw DimensionError("product refers to spin " + std::to_string(s) + " outside the model");
    }
  }
  std::vector<ChainSeries> chains(static_cast<std::size_t>(cfg.replicas));
  if (observer) {
    for (int r = 0; r < cfg.replicas; ++r) chains[static_cast<std::size_t>(r)] = run_one(model, cfg, products, observer, static_cast<std::uint64_t>(r));
  } else {
    parallel_for(chains.size(), cfg.threads, [&](std::size_t r) { chains[r] = run_one(model, cfg, products, {}, r); });
  }

  ChainSeries all;
  all.m.resize(model.sectors.size());
  all.products.resize(products.size());
  double acc = 0.0;
  for (auto& c : chains) {
    all.energy.insert(all.energy.end(), c.energy.begin(), c.energy.end());
    for (std::size_t k = 0; k < c.m.size(); ++k) all.m[k].insert(all.m[k].end(), c.m[k].begin(), c.m[k].end());
    for (std::size_t k = 0; k < c.products.size(); ++k) {
      all.products[k].insert(all.products[k].end(), c.products[k].begin(), c.products[k].end());
    }
    for (auto& row : c.stream) all.stream.push_back(std::move(row));
    acc += c.acceptance;
  }

  MCObservables obs;
  obs.gauge_variant = model.gauge_variant;
  obs.measurements = static_cast<long>(all.energy.size());
  obs.acceptance = acc / cfg.replicas;
  obs.energy_density = blocked(all.energy);
  for (const auto& m : all.m) {
    std::vector<double> am, m2, m4;
    for (double x : m) {
      am.push_back(std::abs(x));
      m2.push_back(x * x);
      m4.push_back(x * x * x * x);
    }
    obs.sectors.push_back({blocked(am), blocked(m2), blocked(m4), binder_jackknife(m2, m4)});
  }
  for (const auto& p : all.products) obs.products.push_back(blocked(p));
  obs.stream = std::move(all.stream);
  return obs;
}

MCObservables run_chain(const SpacetimeModel& model, const CodeSpec& code, const MCConfig& config,
                        const std::vector<std::vector<int>>& products) {
  return run_chain(sampler_model(model, code, config.decoupled), config, products);
}

std::vector<int> wilson_loop_spins(const SpacetimeModel& model, const CodeSpec& code, const PauliWord& P, int layer) {
  if (layer < 0 || layer >= model.num_layers()) throw ValidationError("layer out of range");
  if (P.num_qubits() != code.num_qubits()) throw DimensionError("Pauli operator has the wrong number of qubits");
  std::vector<int> out;
  for (std::size_t i = 0; i < code.num_checks(); ++i) {
    if (symplectic_form(code.check(i), P)) out.push_back(model.spin_index(layer, static_cast<int>(i)));
  }
  return out;
}

bool is_symmetry_invariant(const SpacetimeModel& model, const CodeSpec& code, const std::vector<int>& spins) {
  const auto gens = symmetry_generators(model, code);
  for (const auto& g : gens.flip_sets) {
    std::size_t overlap = 0;
    for (int s : spins) overlap += static_cast<std::size_t>(std::count(g.begin(), g.end(), s));
    if (overlap % 2) return false;
  }
  return true;
}

std::vector<Estimate> mc_boundary_correlator(const CodeSpec& code, const NoiseParams& params, int T,
                                             const std::vector<BitVector>& syndromes, const MCConfig& config,
                                             Boundary boundary) {
  ModelOptions mo;
  mo.boundary = boundary;
  const SpacetimeModel model = build_single_flavor(code, params, T, mo);
  std::vector<std::vector<int>> products;
  for (const auto& s : syndromes) {
    if (s.size() != code.num_checks()) throw DimensionError("syndrome must have one bit per check");
    std::vector<int> set;
    for (int i : s.ones()) set.push_back(model.spin_index(0, i));
    products.push_back(std::move(set));
  }
  return run_chain(model, code, config, products).products;
}

namespace {

// Weighted least squares polynomial of degree `deg` in x; returns coefficients (low order first).
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                            int deg) {
  const int n = deg + 1;
  std::vector<double> A(static_cast<std::size_t>(n * n), 0.0);
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::vector<double> pw(static_cast<std::size_t>(2 * n), 1.0);
    for (int j = 1; j < 2 * n; ++j) pw[static_cast<std::size_t>(j)] = pw[static_cast<std::size_t>(j - 1)] * x[k];
    for (int r = 0; r < n; ++r) {
      b[static_cast<std::size_t>(r)] += w[k] * pw[static_cast<std::size_t>(r)] * y[k];
      for (int c = 0; c < n; ++c) A[static_cast<std::size_t>(r * n + c)] += w[k] * pw[static_cast<std::size_t>(r + c)];
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(A[static_cast<std::size_t>(r * n + c)]) > std::abs(A[static_cast<std::size_t>(piv * n + c)])) piv = r;
    }
    for (int j = 0; j < n; ++j) std::swap(A[static_cast<std::size_t>(c * n + j)], A[static_cast<std::size_t>(piv * n + j)]);
    std::swap(b[static_cast<std::size_t>(c)], b[static_cast<std::size_t>(piv)]);
    const double d = A[static_cast<std::size_t>(c * n + c)];
    if (d == 0.0) continue;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[static_cast<std::size_t>(r * n + c)] / d;
      for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(r * n + j)] -= f * A[static_cast<std::size_t>(c * n + j)];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> coef(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < n; ++r) {
    const double d = A[static_cast<std::size_t>(r * n + r)];
    coef[static_cast<std::size_t>(r)] = d == 0.0 ? 0.0 : b[static_cast<std::size_t>(r)] / d;
  }
  return coef;
}

double polyval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

struct CurveFit {
  double center = 0.0;
  double scale = 1.0;
  std::vector<double> c1, c2;
  double diff(double p) const {
    const double x = (p - center) / scale;
    return polyval(c2, x) - polyval(c1, x);
  }
};

CurveFit fit_window(const std::vector<double>& p, const std::vector<double>& u1, const std::vector<double>& e1,
                    const std::vector<double>& u2, const std::vector<double>& e2, std::size_t lo, std::size_t hi) {
  CurveFit f;
  f.center = 0.5 * (p[lo] + p[hi]);
  f.scale = std::max(0.5 * (p[hi] - p[lo]), 1e-12);
  std::vector<double> x, y1, y2, w1, w2;
  for (std::size_t k = lo; k <= hi; ++k) {
    x.push_back((p[k] - f.center) / f.scale);
    y1.push_back(u1[k]);
    y2.push_back(u2[k]);
    w1.push_back(1.0 / std::max(e1[k] * e1[k], 1e-12));
    w2.push_back(1.0 / std::max(e2[k] * e2[k], 1e-12));
  }
  const int deg = std::min<int>(3, static_cast<int>(hi - lo));
  f.c1 = polyfit(x, y1, w1, deg);
  f.c2 = polyfit(x, y2, w2, deg);
  return f;
}

/// Root of the fitted difference in [lo, hi] closest to `guess`; NaN when none.
double nearest_root(const CurveFit& f, double lo, double hi, double guess) {
  const int steps = 2000;
  double best = NAN;
  double prev_p = lo;
  double prev = f.diff(lo);
  for (int k = 1; k <= steps; ++k) {
    const double p = lo + (hi - lo) * k / steps;
    const double v = f.diff(p);
    if ((prev < 0.0) != (v < 0.0) || prev == 0.0) {
      double a = prev_p, b = p, fa = prev;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f.diff(m);
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double r = 0.5 * (a + b);
      if (std::isnan(best) || std::abs(r - guess) < std::abs(best - guess)) best = r;
    }
    prev_p = p;
    prev = v;
  }
  return best;
}

}  // namespace

Crossing find_crossing(const std::vector<double>& p, const std::vector<Estimate>& U1, const std::vector<Estimate>& U2,
                       std::uint64_t seed, int bootstrap) {
  Crossing out;
  if (p.size() != U1.size() || p.size() != U2.size()) throw DimensionError("curves must share the p grid");
  if (!std::is_sorted(p.begin(), p.end())) throw ValidationError("p grid must be increasing");
  if (p.size() < 2) {
    out.message = "need at least two grid points";
    return out;
  }
  const std::size_t n = p.size();
  std::vector<double> u1, e1, u2, e2, d, sig;
  for (std::size_t k = 0; k < n; ++k) {
    u1.push_back(U1[k].mean);
    e1.push_back(U1[k].error);
    u2.push_back(U2[k].mean);
    e2.push_back(U2[k].error);
    d.push_back(u2[k] - u1[k]);
    sig.push_back(std::sqrt(e1[k] * e1[k] + e2[k] * e2[k]));
  }
  // Bracket: the sign change between neighbouring points with the clearest separation.
  std::size_t best = n;
  double best_score = -1.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if ((d[k] < 0.0) == (d[k + 1] < 0.0)) continue;
    const double score = std::abs(d[k]) / std::max(sig[k], 1e-12) + std::abs(d[k + 1]) / std::max(sig[k + 1], 1e-12);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  if (best == n) {
    out.message = "no crossing: the curves do not change order on the grid";
    return out;
  }
  const double guess = p[best] + (p[best + 1] - p[best]) * d[best] / (d[best] - d[best + 1]);
  // Significance: a 2 sigma separation of opposite sign on each side.
  const double sign_below = d[best] < 0.0 ? -1.0 : 1.0;
  bool below = false, above = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (k <= best && d[k] * sign_below > 2.0 * sig[k]) below = true;
    if (k > best && -d[k] * sign_below > 2.0 * sig[k]) above = true;
  }
  if (!below || !above) {
    out.p = guess;
    out.message = "no crossing: curves are not separated by 2 sigma on both sides of the intersection";
    return out;
  }
  const std::size_t lo = best >= 2 ? best - 2 : 0;
  const std::size_t hi = std::min(n - 1, best + 3);
  const double root = nearest_root(fit_window(p, u1, e1, u2, e2, lo, hi), p[lo], p[hi], guess);
  out.found = true;
  out.p = std::isnan(root) ? guess : root;
  ChainRng rng(seed, 0xb007);
  std::normal_distribution<double> gauss(0.0, 1.0);
  struct Adapter {
    ChainRng& r;
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }
    result_type operator()() { return r.next(); }
  } gen{rng};
  std::vector<double> roots;
  for (int b = 0; b < bootstrap; ++b) {
    std::vector<double> r1(u1), r2(u2);
    for (std::size_t k = 0; k < n; ++k) {
      r1[k] += e1[k] * gauss(gen);
      r2[k] += e2[k] * gauss(gen);
    }
    const double r = nearest_root(fit_window(p, r1, e1, r2, e2, lo, hi), p[lo], p[hi], out.p);
    if (!std::isnan(r)) roots.push_back(r);
  }
  if (roots.size() >= 2) {
    const double mean = std::accumulate(roots.begin(), roots.end(), 0.0) / static_cast<double>(roots.size());
    double var = 0.0;
    for (double r : roots) var += (r - mean) * (r - mean);
    out.error = std::sqrt(var / static_cast<double>(roots.size() - 1));
  }
  out.message = "crossing";
  return out;
}

ScanResult binder_scan(const ScanSpec& spec, const std::vector<double>& p_grid, const std::vector<int>& sizes,
                       const MCConfig& config) {
  config.validate();
  if (sizes.size() < 2) throw ValidationError("a Binder scan needs at least two sizes");
  if (p_grid.empty()) throw ValidationError("empty p grid");
  ScanResult res;
  struct Job {
    int L, T;
    double p;
  };
  std::vector<Job> jobs;
  for (int L : sizes) {
    for (double p : p_grid) jobs.push_back({L, spec.T_of_L(L), p});
  }
  res.points.resize(jobs.size());
  // Build the sampler models up front so configuration errors surface before any sampling.
  std::vector<SamplerModel> models;
  for (const auto& j : jobs) {
    const CodeSpec code = spec.code(j.L);
    const SpacetimeModel m = build_single_flavor(code, spec.params_of(j.p), j.T);
    models.push_back(sampler_model(m, code, config.decoupled));
    if (config.algorithm == Sampler::Wolff && !wolff_compatible(models.back())) {
      throw ValidationError("wolff needs a model of two-spin ferromagnetic terms only; use metropolis");
    }
  }
  parallel_for(jobs.size(), config.threads, [&](std::size_t k) {
    MCConfig c = config;
    c.threads = 1;
    c.seed = mix_seed(config.seed, k);
    res.points[k] = {jobs[k].L, jobs[k].T, jobs[k].p, run_chain(models[k], c)};
  });

  const std::size_t np = p_grid.size();
  auto curve = [&](std::size_t size_index, std::size_t sector) {
    std::vector<Estimate> u;
    for (std::size_t k = 0; k < np; ++k) {
      const auto& obs = res.points[size_index * np + k].obs;
      u.push_back(sector < obs.sectors.size() ? obs.sectors[sector].binder : Estimate{});
    }
    return u;
  };
  const std::size_t nsec = res.points.front().obs.sectors.size();
  if (nsec == 0) {
    res.message = "no global symmetry sector to build a magnetization from";
    return res;
  }
  if (spec.sector >= 0) {
    if (static_cast<std::size_t>(spec.sector) >= nsec) throw ValidationError("sector index out of range");
    res.sector = spec.sector;
  } else {
    double best = -INFINITY;
    for (std::size_t s = 0; s < nsec; ++s) {
      double mean = 0.0;
      for (const auto& e : curve(0, s)) mean += e.mean;
      if (mean > best) {
        best = mean;
        res.sector = static_cast<int>(s);
      }
    }
  }
  const auto sec = static_cast<std::size_t>(res.sector);
  std::vector<double> found;
  std::vector<double> errs;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    for (std::size_t b = a + 1; b < sizes.size(); ++b) {
      Crossing c = find_crossing(p_grid, curve(a, sec), curve(b, sec), mix_seed(config.seed, 1000 + a * 100 + b));
      c.L1 = sizes[a];
      c.L2 = sizes[b];
      if (c.found) {
        found.push_back(c.p);
        errs.push_back(c.error);
      }
      res.pairwise.push_back(c);
    }
  }
  if (found.empty()) {
    res.message = "no crossing";
    return res;
  }
  res.found = true;
  res.pooled = std::accumulate(found.begin(), found.end(), 0.0) / static_cast<double>(found.size());
  double spread = 0.0;
  for (double f : found) spread += (f - res.pooled) * (f - res.pooled);
  spread = found.size() > 1 ? std::sqrt(spread / static_cast<double>(found.size() - 1)) : 0.0;
  const double mean_err = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
  // Pairs share curves, so errors are not averaged down.
  res.pooled_error = std::max(spread, mean_err);
  res.message = "crossing from " + std::to_string(found.size()) + " of " + std::to_string(res.pairwise.size()) + " pairs";
  return res;
}

}  // namespace syndromestat
