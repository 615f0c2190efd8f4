#include "ising_strip_oracle.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace oracle {
namespace {

double ks_of(double p) { return -std::log(1.0 - 2.0 * p); }

// One application of D^(1/2) B D^(1/2), B = prod_i (e^K I + e^-K X_i), D diagonal in sigma.
void apply(std::vector<double>& v, const std::vector<double>& half_diag, int M, double K_along) {
  const double a = std::exp(K_along);
  const double b = std::exp(-K_along);
  for (std::size_t s = 0; s < v.size(); ++s) v[s] *= half_diag[s];
  for (int i = 0; i < M; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t s = 0; s < v.size(); ++s) {
      if (s & bit) continue;
      const double x = v[s];
      const double y = v[s | bit];
      v[s] = a * x + b * y;
      v[s | bit] = b * x + a * y;
    }
  }
  for (std::size_t s = 0; s < v.size(); ++s) v[s] *= half_diag[s];
}

double top_eigenvalue(int M, const std::vector<double>& half_diag, double K_along, int parity) {
  const std::size_t dim = std::size_t{1} << M;
  const std::size_t mask = dim - 1;
  std::vector<double> v(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    // Positive start vector in the chosen sector of the global flip s -> ~s.
    const double base = 1.0 + 0.25 * std::popcount(s) / M;
    const double sgn = parity == 0 ? 1.0 : (s < (s ^ mask) ? 1.0 : -1.0);
    v[s] = sgn * base;
  }
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    std::vector<double> w = v;
    apply(w, half_diag, M, K_along);
    const double num = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    const double den = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
    const double next = num / den;
    // Re-project onto the sector so roundoff cannot leak into the even ground state.
    for (std::size_t s = 0; s < dim; ++s) {
      const std::size_t t = s ^ mask;
      if (s > t) continue;
      const double avg = 0.5 * (w[s] + (parity == 0 ? w[t] : -w[t]));
      w[s] = avg;
      w[t] = parity == 0 ? avg : -avg;
    }
    const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    for (std::size_t s = 0; s < dim; ++s) v[s] = w[s] / norm;
    if (it > 50 && std::abs(next - lambda) <= 1e-15 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

double repetition_critical_p(double q) {
  const double kt = -std::log(1.0 - 2.0 * q);
  auto f = [&](double p) { return std::sinh(2.0 * ks_of(p)) * std::sinh(2.0 * kt) - 1.0; };
  double lo = 0.0;
  double hi = 0.5 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double strip_correlation_length(int M, double K_across, double K_along) {
  if (M < 2 || M > 20) throw std::invalid_argument("strip width must be in [2, 20]");
  const std::size_t dim = std::size_t{1} << M;
  std::vector<double> half_diag(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    int e = 0;
    for (int i = 0; i < M; ++i) {
      const int a = (s >> i) & 1;
      const int b = (s >> ((i + 1) % M)) & 1;
      e += a == b ? 1 : -1;
    }
    half_diag[s] = std::exp(0.5 * K_across * e);
  }
  const double even = top_eigenvalue(M, half_diag, K_along, 0);
  const double odd = top_eigenvalue(M, half_diag, K_along, 1);
  return 1.0 / std::log(even / odd);
}

double strip_scaling_crossing(int M, int M2, double q, double lo, double hi) {
  const double kt = -std::log(1.0 - 2.0 * q);
  // Periodic strip across time, transfer along space. The weak temporal bonds make each strip
  // site physically wide, which keeps finite-width corrections small.
  auto g = [&](double p) {
    const double ks = ks_of(p);
    return strip_correlation_length(M, kt, ks) / M - strip_correlation_length(M2, kt, ks) / M2;
  };
  double glo = g(lo);
  if (glo * g(hi) > 0.0) throw std::runtime_error("no scaling crossing in the bracket");
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
