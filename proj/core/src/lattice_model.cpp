#include "syndromestat/lattice_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "syndromestat/errors.hpp"

namespace syndromestat {

std::string to_string(Boundary b) { return b == Boundary::Open ? "open" : "field"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "open") return Boundary::Open;
  if (s == "field") return Boundary::Field;
  throw ValidationError("unknown boundary mode '" + s + "' (expected open or field)");
}

QubitFlips QubitFlips::operator^(const QubitFlips& o) const {
  if (o.x.size() != x.size()) throw DimensionError("defect flips act on different qubit counts");
  QubitFlips out = *this;
  for (std::size_t r = 0; r < x.size(); ++r) {
    out.x[r] ^= o.x[r];
    out.z[r] ^= o.z[r];
  }
  return out;
}

bool QubitFlips::any() const {
  return std::any_of(x.begin(), x.end(), [](auto v) { return v != 0; }) ||
         std::any_of(z.begin(), z.end(), [](auto v) { return v != 0; });
}

QubitFlips defect_flips(const CodeSpec& code, const BitVector& kappa) {
  const PauliWord l = logical_operator(code, kappa);
  QubitFlips f = QubitFlips::none(code.num_qubits());
  for (int r : l.x().ones()) f.x[static_cast<std::size_t>(r)] = 1;
  for (int r : l.z().ones()) f.z[static_cast<std::size_t>(r)] = 1;
  return f;
}

DefectSpec DefectSpec::none(const CodeSpec& code, int n) {
  DefectSpec d;
  d.kappa_per_flavor.assign(static_cast<std::size_t>(std::max(n - 1, 0)), BitVector(2 * code.num_logical()));
  return d;
}

BitVector DefectSpec::product_flavor(std::size_t two_k) const {
  BitVector acc(two_k);
  for (const auto& k : kappa_per_flavor) acc ^= k;
  return acc;
}

SpacetimeModel::SpacetimeModel(const CodeSpec& code, std::vector<std::array<double, 4>> spatial,
                               std::vector<std::vector<double>> temporal, Boundary boundary)
    : T_(static_cast<int>(spatial.size())),
      I_(static_cast<int>(code.num_checks())),
      N_(static_cast<int>(code.num_qubits())),
      boundary_(boundary),
      site_x_(code.num_qubits()),
      site_z_(code.num_qubits()),
      site_x_mask_(code.num_qubits(), 0),
      site_z_mask_(code.num_qubits(), 0),
      spatial_(std::move(spatial)),
      temporal_(std::move(temporal)),
      flips_(QubitFlips::none(code.num_qubits())) {
  if (T_ < 1) throw ValidationError("the model needs T >= 1 rounds");
  if (temporal_.size() != spatial_.size()) throw DimensionError("temporal weights need one entry per round");
  for (const auto& row : temporal_) {
    if (row.size() != code.num_checks()) throw DimensionError("temporal weights need one entry per check");
  }
  for (std::size_t i = 0; i < code.num_checks(); ++i) {
    for (int r : code.check(i).x().ones()) site_x_[static_cast<std::size_t>(r)].push_back(static_cast<int>(i));
    for (int r : code.check(i).z().ones()) site_z_[static_cast<std::size_t>(r)].push_back(static_cast<int>(i));
  }
  if (I_ <= 64) {
    for (std::size_t r = 0; r < code.num_qubits(); ++r) {
      for (int i : site_x_[r]) site_x_mask_[r] |= std::uint64_t{1} << i;
      for (int i : site_z_[r]) site_z_mask_[r] |= std::uint64_t{1} << i;
    }
  }
}

SpacetimeModel build_single_flavor(const CodeSpec& code, const NoiseParams& params, int T,
                                   const ModelOptions& options) {
  if (T < 1) throw ValidationError("T must be at least 1");
  if (!options.step_params.empty() && options.step_params.size() != static_cast<std::size_t>(T)) {
    throw ValidationError("per-round overrides must list exactly T parameter sets");
  }
  std::vector<std::array<double, 4>> spatial;
  std::vector<std::vector<double>> temporal;
  for (int t = 0; t < T; ++t) {
    const NoiseParams& p = options.step_params.empty() ? params : options.step_params[static_cast<std::size_t>(t)];
    if (!p.q_per_check.empty() && p.q_per_check.size() != code.num_checks()) {
      throw ValidationError("per-check readout rates need one entry per check");
    }
    spatial.push_back(site_weights(p));
    std::vector<double> w(code.num_checks());
    for (std::size_t i = 0; i < code.num_checks(); ++i) {
      w[i] = (options.perfect_final_round && t == T - 1) ? 1.0 : readout_weight(p, i);
    }
    temporal.push_back(std::move(w));
  }
  return SpacetimeModel(code, std::move(spatial), std::move(temporal), options.boundary);
}

SpacetimeModel insert_defect(const SpacetimeModel& model, const CodeSpec& code, const BitVector& kappa) {
  if (kappa.size() != 2 * code.num_logical()) {
    throw DimensionError("defect vector has length " + std::to_string(kappa.size()) + ", expected 2K = " +
                         std::to_string(2 * code.num_logical()));
  }
  SpacetimeModel out = model;
  out.set_flips(model.flips() ^ defect_flips(code, kappa));
  return out;
}

namespace {

double neg_log(double w) { return w > 0.0 ? -std::log(w) : std::numeric_limits<double>::infinity(); }

}  // namespace

double single_flavor_energy(const SpacetimeModel& m, const std::vector<std::uint8_t>& u, const QubitFlips* extra) {
  if (u.size() != static_cast<std::size_t>(m.num_spins())) throw DimensionError("spin configuration has wrong size");
  const QubitFlips flips = extra ? m.flips() ^ *extra : m.flips();
  double e = 0.0;
  for (int t = 0; t < m.T(); ++t) {
    const auto& tab = m.spatial_weights(t);
    for (int r = 0; r < m.N(); ++r) {
      unsigned px = flips.x[static_cast<std::size_t>(r)];
      unsigned pz = flips.z[static_cast<std::size_t>(r)];
      for (int i : m.site_x(r)) px ^= u[static_cast<std::size_t>(m.spin_index(t, i))];
      for (int i : m.site_z(r)) pz ^= u[static_cast<std::size_t>(m.spin_index(t, i))];
      e += neg_log(tab[px | (pz << 1)]);
    }
    for (int i = 0; i < m.I(); ++i) {
      const bool last_field = m.boundary() == Boundary::Field && t == m.T() - 1;
      const unsigned a = u[static_cast<std::size_t>(m.spin_index(t, i))];
      const unsigned b = last_field ? 0u : u[static_cast<std::size_t>(m.spin_index(t + 1, i))];
      if (a != b) e += neg_log(m.temporal_weight(t, i));
    }
  }
  return e;
}

double multiflavor_energy(const SpacetimeModel& m, const CodeSpec& code, const std::vector<std::vector<int>>& sigma,
                          const DefectSpec& defects) {
  if (sigma.empty()) throw DimensionError("need at least one flavor (n >= 2)");
  if (defects.kappa_per_flavor.size() != sigma.size()) {
    throw DimensionError("got " + std::to_string(sigma.size()) + " flavors but " +
                         std::to_string(defects.kappa_per_flavor.size()) + " defect vectors");
  }
  const auto ns = static_cast<std::size_t>(m.num_spins());
  std::vector<std::uint8_t> prod(ns, 0);
  double e = 0.0;
  for (std::size_t a = 0; a < sigma.size(); ++a) {
    if (sigma[a].size() != ns) throw DimensionError("flavor " + std::to_string(a) + " has the wrong spin count");
    std::vector<std::uint8_t> u(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      if (sigma[a][s] != 1 && sigma[a][s] != -1) throw ValidationError("spins must be +1 or -1");
      u[s] = sigma[a][s] == -1 ? 1 : 0;
      prod[s] ^= u[s];
    }
    const QubitFlips f = defect_flips(code, defects.kappa_per_flavor[a]);
    e += single_flavor_energy(m, u, &f);
  }
  const QubitFlips fn = defect_flips(code, defects.product_flavor(2 * code.num_logical()));
  e += single_flavor_energy(m, prod, &fn);
  return e;
}

SymmetryGenerators symmetry_generators(const SpacetimeModel& m, const CodeSpec& code) {
  SymmetryGenerators out;
  out.boundary_breaking = m.boundary() == Boundary::Field;
  const EchelonForm ef = reduced_echelon(code.redundancies());
  for (const auto& v : ef.rows) {
    std::vector<int> set;
    for (int t = 0; t < m.num_layers(); ++t) {
      for (int i : v.ones()) set.push_back(m.spin_index(t, i));
    }
    out.flip_sets.push_back(std::move(set));
    out.redundancy.push_back(v);
  }
  return out;
}

namespace {

std::vector<int> sym_diff(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<int> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Reduce each multiset of checks to the checks appearing an odd number of times.
std::vector<int> odd_members(const std::vector<int>& v) { return sym_diff(v, {}); }

}  // namespace

SpinForm spin_form(const SpacetimeModel& m, bool keep_zero) {
  SpinForm out;
  for (int t = 0; t < m.T(); ++t) {
    const auto& w = m.spatial_weights(t);
    for (double v : w) {
      if (!(v > 0.0)) throw ValidationError("a site weight is zero; the spin form would need an infinite coupling");
    }
    const double a = std::log(w[0]);
    const double c = std::log(w[1]);  // x-parity odd
    const double b = std::log(w[2]);  // z-parity odd
    const double d = std::log(w[3]);
    const double Jz = 0.25 * (a + b - c - d);
    const double Jx = 0.25 * (a - b + c - d);
    const double Jy = 0.25 * (a - b - c + d);
    out.log_offset += m.N() * 0.25 * (a + b + c + d);
    for (int r = 0; r < m.N(); ++r) {
      const int sx = m.flips().x[static_cast<std::size_t>(r)] ? -1 : 1;
      const int sz = m.flips().z[static_cast<std::size_t>(r)] ? -1 : 1;
      auto to_spins = [&](const std::vector<int>& checks) {
        std::vector<int> s;
        for (int i : odd_members(checks)) s.push_back(m.spin_index(t, i));
        return s;
      };
      if (keep_zero || Jz != 0.0) out.terms.push_back({to_spins(m.site_x(r)), Jz, sx, "x", t, r});
      if (keep_zero || Jx != 0.0) out.terms.push_back({to_spins(m.site_z(r)), Jx, sz, "z", t, r});
      if (keep_zero || Jy != 0.0) {
        std::vector<int> s;
        for (int i : sym_diff(m.site_x(r), m.site_z(r))) s.push_back(m.spin_index(t, i));
        out.terms.push_back({std::move(s), Jy, sx * sz, "y", t, r});
      }
    }
    for (int i = 0; i < m.I(); ++i) {
      const double wt = m.temporal_weight(t, i);
      if (!(wt > 0.0)) throw ValidationError("a readout weight is zero; the spin form would need an infinite coupling");
      const double mu = -std::log(wt);
      out.log_offset -= 0.5 * mu;
      if (!keep_zero && mu == 0.0) continue;
      if (m.boundary() == Boundary::Field && t == m.T() - 1) {
        out.terms.push_back({{m.spin_index(t, i)}, 0.5 * mu, 1, "field", t, i});
      } else {
        out.terms.push_back({{m.spin_index(t, i), m.spin_index(t + 1, i)}, 0.5 * mu, 1, "t", t, i});
      }
    }
  }
  return out;
}

std::vector<int> connected_components(const SpacetimeModel& m) {
  const int ns = m.num_spins();
  std::vector<int> parent(static_cast<std::size_t>(ns));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  auto join = [&](const std::vector<int>& spins) {
    for (std::size_t k = 1; k < spins.size(); ++k) {
      const int ra = find(spins[0]);
      const int rb = find(spins[k]);
      if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }
  };

  for (int t = 0; t < m.T(); ++t) {
    const auto& w = m.spatial_weights(t);
    const bool finite = w[0] > 0 && w[1] > 0 && w[2] > 0 && w[3] > 0;
    double Jz = 1.0;
    double Jx = 1.0;
    double Jy = 1.0;
    if (finite) {
      const double a = std::log(w[0]);
      const double c = std::log(w[1]);
      const double b = std::log(w[2]);
      const double d = std::log(w[3]);
      Jz = 0.25 * (a + b - c - d);
      Jx = 0.25 * (a - b + c - d);
      Jy = 0.25 * (a - b - c + d);
    }
    for (int r = 0; r < m.N(); ++r) {
      auto layer_spins = [&](const std::vector<int>& checks) {
        std::vector<int> s;
        for (int i : checks) s.push_back(m.spin_index(t, i));
        return s;
      };
      if (!finite) {
        std::vector<int> all = m.site_x(r);
        all.insert(all.end(), m.site_z(r).begin(), m.site_z(r).end());
        join(layer_spins(all));
        continue;
      }
      if (Jz != 0.0) join(layer_spins(odd_members(m.site_x(r))));
      if (Jx != 0.0) join(layer_spins(odd_members(m.site_z(r))));
      if (Jy != 0.0) join(layer_spins(sym_diff(m.site_x(r), m.site_z(r))));
    }
    if (m.boundary() == Boundary::Field && t == m.T() - 1) continue;
    for (int i = 0; i < m.I(); ++i) {
      if (m.temporal_weight(t, i) < 1.0) join({m.spin_index(t, i), m.spin_index(t + 1, i)});
    }
  }
  std::vector<int> label(static_cast<std::size_t>(ns), -1);
  std::vector<int> root_label(static_cast<std::size_t>(ns), -1);
  int next = 0;
  for (int s = 0; s < ns; ++s) {
    const int r = find(s);
    if (root_label[static_cast<std::size_t>(r)] < 0) root_label[static_cast<std::size_t>(r)] = next++;
    label[static_cast<std::size_t>(s)] = root_label[static_cast<std::size_t>(r)];
  }
  return label;
}

std::string export_model_json(const SpacetimeModel& m) {
  const SpinForm sf = spin_form(m);
  nlohmann::json doc;
  doc["T"] = m.T();
  doc["I"] = m.I();
  doc["N"] = m.N();
  doc["boundary"] = to_string(m.boundary());
  doc["log_offset"] = sf.log_offset;
  doc["convention"] = "weight = exp(log_offset + sum_terms weight * sign * prod sigma)";
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& term : sf.terms) {
    nlohmann::json spins = nlohmann::json::array();
    for (int s : term.spins) spins.push_back({s / m.I(), s % m.I()});
    terms.push_back({{"spins", spins}, {"weight", term.weight}, {"sign", term.sign}, {"kind", term.kind}});
  }
  doc["terms"] = std::move(terms);
  return doc.dump(1);
}

}  // namespace syndromestat
