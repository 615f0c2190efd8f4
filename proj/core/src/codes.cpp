#include "syndromestat/codes.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "syndromestat/errors.hpp"

namespace syndromestat {

namespace {

using nlohmann::json;

std::string idx(std::size_t i) { return std::to_string(i); }

PauliWord product_of(const std::vector<PauliWord>& words, const BitVector& u) {
  PauliWord acc(words.front().num_qubits());
  for (int i : u.ones()) acc = multiply(acc, words[static_cast<std::size_t>(i)]);
  return acc;
}

BinaryMatrix symplectic_rows(const std::vector<PauliWord>& words, std::size_t n) {
  BinaryMatrix m(2 * n);
  for (const auto& w : words) m.append_row(w.symplectic());
  return m;
}

PauliWord from_symplectic(const BitVector& v, std::size_t n) { return PauliWord(v.slice(0, n), v.slice(n, n)); }

}  // namespace

BinaryMatrix compute_redundancies(const std::vector<PauliWord>& checks) {
  if (checks.empty()) return BinaryMatrix(0);
  const std::size_t n = checks.front().num_qubits();
  BinaryMatrix basis = nullspace(symplectic_rows(checks, n));
  for (std::size_t b = 0; b < basis.nrows(); ++b) {
    const PauliWord p = product_of(checks, basis.row(b));
    if (!p.is_identity() || p.phase() != 0) {
      const auto ones = basis.row(b).ones();
      std::string members;
      for (int i : ones) members += (members.empty() ? "" : ",") + std::to_string(i);
      throw ValidationError("product of checks {" + members + "} is " + p.str() +
                            ", not +1; the checks do not generate a stabilizer group");
    }
  }
  return basis;
}

std::vector<PauliWord> compute_logicals(std::size_t n, const std::vector<PauliWord>& checks) {
  // Normalizer = {v : <<a_i, v>> = 0}; complement of the stabilizer span inside it.
  BinaryMatrix synd(2 * n);
  for (const auto& c : checks) synd.append_row(c.z().concat(c.x()));
  const BinaryMatrix normalizer = right_kernel(synd);

  BinaryMatrix span = symplectic_rows(checks, n);
  std::size_t r = rank(span);
  std::vector<BitVector> pool;
  for (const auto& v : normalizer.rows()) {
    span.append_row(v);
    const std::size_t r2 = rank(span);
    if (r2 > r) {
      pool.push_back(v);
      r = r2;
    } else {
      // Drop v again; it lies in the span already.
      BinaryMatrix trimmed(2 * n);
      for (std::size_t i = 0; i + 1 < span.nrows(); ++i) trimmed.append_row(span.row(i));
      span = std::move(trimmed);
    }
  }

  auto sform = [n](const BitVector& a, const BitVector& b) {
    return dot(a.slice(0, n), b.slice(n, n)) ^ dot(a.slice(n, n), b.slice(0, n));
  };

  std::vector<PauliWord> xs;
  std::vector<PauliWord> zs;
  while (!pool.empty()) {
    BitVector v = pool.front();
    pool.erase(pool.begin());
    std::size_t partner = pool.size();
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (sform(v, pool[j])) {
        partner = j;
        break;
      }
    }
    if (partner == pool.size()) {
      throw ValidationError("logical Gram-Schmidt failed: normalizer element has no symplectic partner");
    }
    BitVector w = pool[partner];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(partner));
    for (auto& u : pool) {
      const bool uw = sform(u, w);
      const bool uv = sform(u, v);
      if (uw) u ^= v;
      if (uv) u ^= w;
    }
    xs.push_back(from_symplectic(v, n));
    zs.push_back(from_symplectic(w, n));
  }
  std::vector<PauliWord> out = xs;
  out.insert(out.end(), zs.begin(), zs.end());
  return out;
}

CodeSpec::CodeSpec(std::size_t num_qubits, std::vector<PauliWord> checks, std::vector<PauliWord> logicals,
                   CodeGeometry geometry, std::string name)
    : n_(num_qubits),
      checks_(std::move(checks)),
      logicals_(std::move(logicals)),
      geometry_(std::move(geometry)),
      name_(std::move(name)) {
  if (n_ < 1) throw ValidationError("code must have at least one qubit");
  if (checks_.empty()) throw ValidationError("code must have at least one check");
  for (std::size_t i = 0; i < checks_.size(); ++i) {
    if (checks_[i].num_qubits() != n_) {
      throw ValidationError("check " + idx(i) + " acts on " + idx(checks_[i].num_qubits()) + " qubits, expected " +
                            idx(n_));
    }
    if (checks_[i].phase() % 2 != 0) throw ValidationError("check " + idx(i) + " is not Hermitian");
    if (checks_[i].is_identity()) throw ValidationError("check " + idx(i) + " is the identity");
  }
  for (std::size_t i = 0; i < checks_.size(); ++i) {
    for (std::size_t j = i + 1; j < checks_.size(); ++j) {
      if (symplectic_form(checks_[i], checks_[j])) {
        throw ValidationError("checks " + idx(i) + " and " + idx(j) + " anticommute");
      }
    }
  }
  redundancies_ = compute_redundancies(checks_);
  rank_ = checks_.size() - redundancies_.nrows();
  if (rank_ > n_) throw ValidationError("check rank exceeds qubit count");
  k_ = n_ - rank_;

  if (logicals_.empty()) {
    logicals_ = compute_logicals(n_, checks_);
  }
  if (logicals_.size() != 2 * k_) {
    throw ValidationError("expected " + idx(2 * k_) + " logical operators (K = " + idx(k_) + "), got " +
                          idx(logicals_.size()));
  }
  for (std::size_t k = 0; k < logicals_.size(); ++k) {
    if (logicals_[k].num_qubits() != n_) throw ValidationError("logical " + idx(k) + " has wrong length");
    for (std::size_t i = 0; i < checks_.size(); ++i) {
      if (symplectic_form(logicals_[k], checks_[i])) {
        throw ValidationError("logical " + idx(k) + " anticommutes with check " + idx(i));
      }
    }
  }
  for (std::size_t a = 0; a < 2 * k_; ++a) {
    for (std::size_t b = a + 1; b < 2 * k_; ++b) {
      const bool expected = (b == a + k_) && a < k_;
      if (symplectic_form(logicals_[a], logicals_[b]) != expected) {
        throw ValidationError("logicals " + idx(a) + " and " + idx(b) + " violate the symplectic pairing");
      }
    }
  }
  // Independence of the logicals modulo the stabilizer group.
  BinaryMatrix all = symplectic_rows(checks_, n_);
  for (const auto& l : logicals_) all.append_row(l.symplectic());
  if (rank(all) != rank_ + 2 * k_) throw ValidationError("logicals are not independent modulo the stabilizers");

  syndrome_matrix_ = BinaryMatrix(2 * n_);
  for (const auto& c : checks_) syndrome_matrix_.append_row(c.z().concat(c.x()));
}

std::uint64_t CodeSpec::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(n_);
  for (const auto* list : {&checks_, &logicals_}) {
    mix(list->size());
    for (const auto& w : *list) {
      for (auto x : w.x().words()) mix(x);
      for (auto z : w.z().words()) mix(z);
      mix(static_cast<std::uint64_t>(w.phase()));
    }
  }
  return h;
}

CodeSpec build_toric(int L) {
  if (L < 2) throw ValidationError("toric code needs L >= 2, got " + std::to_string(L));
  const int n = 2 * L * L;
  auto wrap = [L](int a) { return ((a % L) + L) % L; };
  auto h = [&](int x, int y) { return wrap(y) * L + wrap(x); };
  auto v = [&](int x, int y) { return L * L + wrap(y) * L + wrap(x); };

  CodeGeometry geo;
  geo.family = "toric";
  geo.L = L;
  geo.d = 2;
  geo.qubit_coords.resize(static_cast<std::size_t>(n));
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      geo.qubit_coords[static_cast<std::size_t>(h(x, y))] = {x, y, 0};
      geo.qubit_coords[static_cast<std::size_t>(v(x, y))] = {x, y, 1};
    }
  }

  std::vector<PauliWord> checks;
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      const std::vector<int> sup = {h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)};
      checks.push_back(PauliWord::from_support(static_cast<std::size_t>(n), sup, {}));
      geo.check_coords.push_back({x, y});
      geo.check_kind.push_back("star");
    }
  }
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      const std::vector<int> sup = {h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)};
      checks.push_back(PauliWord::from_support(static_cast<std::size_t>(n), {}, sup));
      geo.check_coords.push_back({x, y});
      geo.check_kind.push_back("plaquette");
    }
  }

  std::vector<int> x1, x2, z1, z2;
  for (int i = 0; i < L; ++i) {
    x1.push_back(v(i, 0));
    x2.push_back(h(0, i));
    z1.push_back(v(0, i));
    z2.push_back(h(i, 0));
  }
  const auto N = static_cast<std::size_t>(n);
  std::vector<PauliWord> logicals = {PauliWord::from_support(N, x1, {}), PauliWord::from_support(N, x2, {}),
                                     PauliWord::from_support(N, {}, z1), PauliWord::from_support(N, {}, z2)};
  return CodeSpec(N, std::move(checks), std::move(logicals), std::move(geo), "toric");
}

CodeSpec build_repetition(int d, int L) {
  if (d != 1 && d != 2) throw ValidationError("repetition code supports d = 1 or 2, got " + std::to_string(d));
  if (L < 3) throw ValidationError("repetition code needs L >= 3, got " + std::to_string(L));
  CodeGeometry geo;
  geo.family = "repetition";
  geo.L = L;
  geo.d = d;
  std::vector<PauliWord> checks;
  std::size_t n = 0;
  if (d == 1) {
    n = static_cast<std::size_t>(L);
    for (int r = 0; r < L; ++r) geo.qubit_coords.push_back({r});
    for (int i = 0; i < L; ++i) {
      const std::vector<int> sup = {i, (i + 1) % L};
      checks.push_back(PauliWord::from_support(n, {}, sup));
      geo.check_coords.push_back({i});
      geo.check_kind.push_back("zz");
    }
  } else {
    n = static_cast<std::size_t>(L * L);
    auto q = [L](int x, int y) { return ((y % L + L) % L) * L + ((x % L + L) % L); };
    for (int y = 0; y < L; ++y) {
      for (int x = 0; x < L; ++x) geo.qubit_coords.push_back({x, y});
    }
    for (int dir = 0; dir < 2; ++dir) {
      for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
          const std::vector<int> sup = {q(x, y), dir == 0 ? q(x + 1, y) : q(x, y + 1)};
          checks.push_back(PauliWord::from_support(n, {}, sup));
          geo.check_coords.push_back({x, y, dir});
          geo.check_kind.push_back(dir == 0 ? "zz_h" : "zz_v");
        }
      }
    }
  }
  std::vector<int> all(n);
  for (std::size_t r = 0; r < n; ++r) all[r] = static_cast<int>(r);
  const std::vector<int> first = {0};
  std::vector<PauliWord> logicals = {PauliWord::from_support(n, all, {}), PauliWord::from_support(n, {}, first)};
  return CodeSpec(n, std::move(checks), std::move(logicals), std::move(geo), "repetition");
}

CodeSpec build_xzzx(int L) {
  if (L < 2) throw ValidationError("XZZX code needs L >= 2, got " + std::to_string(L));
  const auto n = static_cast<std::size_t>(L * L);
  auto q = [L](int x, int y) { return ((y % L + L) % L) * L + ((x % L + L) % L); };
  CodeGeometry geo;
  geo.family = "xzzx";
  geo.L = L;
  geo.d = 2;
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) geo.qubit_coords.push_back({x, y});
  }
  std::vector<PauliWord> checks;
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      PauliWord w(n);
      // X on top-left and bottom-right, Z on top-right and bottom-left.
      w.x().flip(static_cast<std::size_t>(q(x, y + 1)));
      w.x().flip(static_cast<std::size_t>(q(x + 1, y)));
      w.z().flip(static_cast<std::size_t>(q(x + 1, y + 1)));
      w.z().flip(static_cast<std::size_t>(q(x, y)));
      checks.push_back(std::move(w));
      geo.check_coords.push_back({x, y});
      geo.check_kind.push_back("xzzx");
    }
  }
  return CodeSpec(n, std::move(checks), {}, std::move(geo), "xzzx");
}

namespace {

PauliWord word_from_json(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + ": expected an object with \"x\" and \"z\" index lists");
  std::vector<int> xs;
  std::vector<int> zs;
  try {
    if (j.contains("x")) xs = j.at("x").get<std::vector<int>>();
    if (j.contains("z")) zs = j.at("z").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
  PauliWord w(n);
  for (int i : xs) {
    if (i < 0 || static_cast<std::size_t>(i) >= n) throw ValidationError(what + ": qubit index out of range");
    w.x().flip(static_cast<std::size_t>(i));
  }
  for (int i : zs) {
    if (i < 0 || static_cast<std::size_t>(i) >= n) throw ValidationError(what + ": qubit index out of range");
    w.z().flip(static_cast<std::size_t>(i));
  }
  if (j.contains("sign")) {
    const int s = j.at("sign").get<int>();
    if (s != 1 && s != -1) throw ValidationError(what + ": sign must be +1 or -1");
    w.set_phase(s == 1 ? 0 : 2);
  }
  return w;
}

json word_to_json(const PauliWord& w) {
  json j;
  j["x"] = w.x().ones();
  j["z"] = w.z().ones();
  if (w.phase() == 2) j["sign"] = -1;
  return j;
}

}  // namespace

CodeSpec load_code(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed code document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("checks")) {
    throw ValidationError("code document must be an object with \"n\" and \"checks\"");
  }
  if (!doc.at("n").is_number_integer() || doc.at("n").get<long long>() < 1) {
    throw ValidationError("code document: \"n\" must be a positive integer");
  }
  const auto n = doc.at("n").get<std::size_t>();
  if (!doc.at("checks").is_array()) throw ValidationError("code document: \"checks\" must be an array");
  std::vector<PauliWord> checks;
  for (std::size_t i = 0; i < doc.at("checks").size(); ++i) {
    checks.push_back(word_from_json(doc.at("checks")[i], n, "check " + std::to_string(i)));
  }
  std::vector<PauliWord> logicals;
  if (doc.contains("logicals")) {
    for (std::size_t i = 0; i < doc.at("logicals").size(); ++i) {
      logicals.push_back(word_from_json(doc.at("logicals")[i], n, "logical " + std::to_string(i)));
    }
  }
  CodeGeometry geo;
  std::string name = "custom";
  if (doc.contains("geometry") && doc.at("geometry").is_object()) {
    const auto& g = doc.at("geometry");
    try {
      geo.family = g.value("family", std::string());
      geo.L = g.value("L", 0);
      geo.d = g.value("d", 0);
      if (g.contains("qubit_coords")) geo.qubit_coords = g.at("qubit_coords").get<std::vector<std::vector<int>>>();
      if (g.contains("check_coords")) geo.check_coords = g.at("check_coords").get<std::vector<std::vector<int>>>();
      if (g.contains("check_kind")) geo.check_kind = g.at("check_kind").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("code document: bad geometry: ") + e.what());
    }
    if (!geo.family.empty()) name = geo.family;
  }
  if (doc.contains("name") && doc.at("name").is_string()) name = doc.at("name").get<std::string>();
  return CodeSpec(n, std::move(checks), std::move(logicals), std::move(geo), name);
}

CodeSpec load_code_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open code file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_code(ss.str());
}

std::string code_to_json(const CodeSpec& code) {
  json doc;
  doc["name"] = code.name();
  doc["n"] = code.num_qubits();
  doc["checks"] = json::array();
  for (const auto& c : code.checks()) doc["checks"].push_back(word_to_json(c));
  doc["logicals"] = json::array();
  for (const auto& l : code.logicals()) doc["logicals"].push_back(word_to_json(l));
  const auto& g = code.geometry();
  if (!g.empty()) {
    json gj;
    gj["family"] = g.family;
    gj["L"] = g.L;
    gj["d"] = g.d;
    gj["qubit_coords"] = g.qubit_coords;
    gj["check_coords"] = g.check_coords;
    gj["check_kind"] = g.check_kind;
    doc["geometry"] = gj;
  }
  return doc.dump(2);
}

std::string symmetry_classification(const CodeSpec& code) {
  const BinaryMatrix& r = code.redundancies();
  if (r.nrows() == 0) return "none";
  const std::size_t half = code.num_checks();  // compare 2*weight < I
  std::vector<BitVector> light;
  if (r.nrows() <= 20) {
    const std::uint64_t count = std::uint64_t{1} << r.nrows();
    for (std::uint64_t c = 1; c < count; ++c) {
      BitVector sel(r.nrows());
      for (std::size_t b = 0; b < r.nrows(); ++b) {
        if ((c >> b) & 1u) sel.set(b);
      }
      BitVector u = r.combine_rows(sel);
      if (2 * u.popcount() < half) light.push_back(std::move(u));
    }
  } else {
    for (const auto& u : r.rows()) {
      if (2 * u.popcount() < half) light.push_back(u);
    }
  }
  BinaryMatrix m(code.num_checks());
  for (auto& u : light) m.append_row(std::move(u));
  return rank(m) == r.nrows() ? "local" : "global";
}

BitVector syndrome_of_error(const CodeSpec& code, const PauliWord& error) {
  if (error.num_qubits() != code.num_qubits()) throw DimensionError("error acts on the wrong number of qubits");
  BitVector s(code.num_checks());
  for (std::size_t i = 0; i < code.num_checks(); ++i) {
    if (symplectic_form(code.check(i), error)) s.set(i);
  }
  return s;
}

std::optional<PauliWord> error_with_syndrome(const CodeSpec& code, const BitVector& s) {
  if (s.size() != code.num_checks()) throw DimensionError("syndrome length differs from the number of checks");
  auto sol = solve(code.syndrome_matrix(), s);
  if (!sol) return std::nullopt;
  return from_symplectic(*sol, code.num_qubits());
}

BitVector logical_class(const CodeSpec& code, const PauliWord& error) {
  const std::size_t K = code.num_logical();
  BitVector kappa(2 * K);
  for (std::size_t k = 0; k < K; ++k) {
    if (symplectic_form(error, code.logical_z(k))) kappa.set(k);
    if (symplectic_form(error, code.logical_x(k))) kappa.set(K + k);
  }
  return kappa;
}

PauliWord logical_operator(const CodeSpec& code, const BitVector& kappa) {
  if (kappa.size() != code.logicals().size()) throw DimensionError("defect vector length must equal 2K");
  PauliWord acc(code.num_qubits());
  for (int k : kappa.ones()) {
    const auto& l = code.logicals()[static_cast<std::size_t>(k)];
    acc.x() ^= l.x();
    acc.z() ^= l.z();
  }
  return acc;
}

}  // namespace syndromestat
