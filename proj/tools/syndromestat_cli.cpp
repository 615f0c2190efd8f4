// syndromestat command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "syndromestat/codes.hpp"
#include "syndromestat/error_config.hpp"
#include "syndromestat/errors.hpp"
#include "syndromestat/exact.hpp"
#include "syndromestat/io.hpp"
#include "syndromestat/lattice_model.hpp"
#include "syndromestat/monte_carlo.hpp"
#include "syndromestat/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace syndromestat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNumerical = 4;

struct CodeArgs {
  std::string builtin;
  std::string file;
  int L = 3;
  int d = 1;
};

struct RateArgs {
  double px = 0.0;
  double py = 0.0;
  double pz = 0.0;
  double q = 0.0;
  double lambda = 1.0;

  NoiseParams params() const {
    NoiseParams p;
    p.p_x = px;
    p.p_y = py;
    p.p_z = pz;
    p.q = q;
    p.lambda = lambda;
    p.validate();
    return p;
  }
};

struct McArgs {
  long sweeps = 10000;
  long burn_in = -1;
  std::uint64_t seed = 1;
  std::string sampler = "metropolis";
  int replicas = 1;
  int measure_every = 1;
  bool decoupled = false;

  MCConfig config(int threads) const {
    MCConfig c;
    c.sweeps = sweeps;
    c.burn_in = burn_in >= 0 ? burn_in : sweeps / 10;
    c.seed = seed;
    c.algorithm = sampler_from_string(sampler);
    c.replicas = replicas;
    c.measure_every = measure_every;
    c.decoupled = decoupled;
    c.threads = threads;
    c.validate();
    return c;
  }
};

struct Args {
  // global
  int threads = 1;
  double budget = 0.0;
  std::string out_dir = "syndromestat_out";
  bool bits = false;
  std::string replay;
  // shared
  CodeArgs code;
  RateArgs rates;
  McArgs mc;
  int T = 1;
  int n = 2;
  std::string engine = "transfer";
  bool perfect_final = false;
  bool no_perfect_final = false;
  std::vector<std::string> syndromes;
  std::string boundary = "open";
  std::string records;
  std::string model_out = "model.json";
  // mc scan
  std::vector<int> sizes;
  std::string iso_pq;
  std::string p_grid;
  std::string rate;
  int scan_T = 0;
  double aspect = 1.0;
  int sector = -1;
};

/// Output bookkeeping shared by every command.
struct Run {
  fs::path out_dir;
  std::vector<std::string> outputs;
  json params = json::object();
  json code = nullptr;
  std::optional<std::uint64_t> seed;

  void write(const std::string& name, const std::string& text) {
    fs::create_directories(out_dir);
    write_text_file((out_dir / name).string(), text);
    outputs.push_back(name);
  }
};

CodeSpec load_code_args(const CodeArgs& a) {
  if (!a.file.empty()) {
    if (!a.builtin.empty()) throw ValidationError("give either --builtin or --file/--code, not both");
    return load_code_file(a.file);
  }
  if (a.builtin == "toric") return build_toric(a.L);
  if (a.builtin == "repetition") return build_repetition(a.d, a.L);
  if (a.builtin == "xzzx") return build_xzzx(a.L);
  if (a.builtin.empty()) throw ValidationError("a code is required: --builtin toric|repetition|xzzx or --file path");
  throw ValidationError("unknown builtin code '" + a.builtin + "' (expected toric, repetition or xzzx)");
}

void add_code_options(CLI::App* app, CodeArgs& c, bool with_size = true) {
  app->add_option("--builtin", c.builtin, "Built-in code family: toric, repetition, xzzx");
  app->add_option("--file,--code", c.file, "Code definition JSON file");
  if (with_size) app->add_option("--L", c.L, "Linear size of a built-in code");
  app->add_option("--d", c.d, "Dimension of the repetition code (1 or 2)");
}

void add_rate_options(CLI::App* app, RateArgs& r) {
  app->add_option("--px", r.px, "Pauli-X error rate per round");
  app->add_option("--py", r.py, "Pauli-Y error rate per round");
  app->add_option("--pz", r.pz, "Pauli-Z error rate per round");
  app->add_option("--q", r.q, "Readout flip rate");
  app->add_option("--lambda", r.lambda, "Measurement strength (1 = projective)");
}

void add_mc_options(CLI::App* app, McArgs& m) {
  app->add_option("--sweeps", m.sweeps, "Sweeps per chain");
  app->add_option("--burn-in", m.burn_in, "Discarded sweeps (default sweeps/10)");
  app->add_option("--seed", m.seed, "Random seed");
  app->add_option("--sampler", m.sampler, "metropolis or wolff");
  app->add_option("--replicas", m.replicas, "Independent chains per point");
  app->add_option("--measure-every", m.measure_every, "Sweeps between measurements");
  app->add_flag("--decoupled", m.decoupled, "Single couplings (decoupled-replica limit) instead of n = 2");
}

json code_identity(const CodeSpec& code) {
  return {{"name", code.name()}, {"fingerprint", hex64(code.fingerprint())}};
}

json rates_json(const NoiseParams& p) {
  return {{"p_x", p.p_x}, {"p_y", p.p_y}, {"p_z", p.p_z}, {"q", p.q}, {"lambda", p.lambda}};
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  ss.imbue(std::locale::classic());
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    std::istringstream in(tok);
    in.imbue(std::locale::classic());
    double v = 0.0;
    if (!(in >> v)) throw ValidationError("bad grid '" + spec + "', expected start:stop:step");
    parts.push_back(v);
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw ValidationError("bad grid '" + spec + "', expected start:stop:step with step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  return out;
}

EngineOptions engine_options(const Args& a) {
  EngineOptions eo;
  if (a.budget > 0.0) eo.budget = a.budget;
  eo.threads = a.threads;
  if (a.engine == "transfer") {
    eo.engine = ExactEngine::Transfer;
  } else if (a.engine == "enumerate") {
    eo.engine = ExactEngine::Enumerate;
  } else {
    throw ValidationError("unknown engine '" + a.engine + "' (expected transfer or enumerate)");
  }
  return eo;
}

bool perfect_final(const Args& a, bool default_value) {
  if (a.perfect_final && a.no_perfect_final) throw ValidationError("--perfect-final and --no-perfect-final conflict");
  if (a.perfect_final) return true;
  if (a.no_perfect_final) return false;
  return default_value;
}

BitVector parse_syndrome(const std::string& s, const CodeSpec& code) {
  if (s.size() != code.num_checks()) {
    throw DimensionError("syndrome '" + s + "' must have one bit per check (" + std::to_string(code.num_checks()) + ")");
  }
  for (char c : s) {
    if (c != '0' && c != '1') throw ValidationError("syndrome must be a string of 0 and 1");
  }
  return BitVector::from_string(s);
}

/// CSV writer for exact quantities.
struct ExactTable {
  const CodeSpec& code;
  const NoiseParams& p;
  int T;
  int n;
  std::string text = csv_row({"code", "L", "T", "n", "p_x", "p_y", "p_z", "q", "lambda", "quantity", "value"});

  void add(const std::string& quantity, double value) {
    const int L = code.geometry().L;
    text += csv_row({code.name(), L > 0 ? std::to_string(L) : "", std::to_string(T), std::to_string(n),
                     format_double(p.p_x), format_double(p.p_y), format_double(p.p_z), format_double(p.q),
                     format_double(p.lambda), quantity, format_double(value)});
  }
};

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalError(what + " is not finite");
}

int cmd_code_info(const Args& a, Run& run) {
  const CodeSpec code = load_code_args(a.code);
  run.code = code_identity(code);
  const json info = {{"name", code.name()},
                     {"N", code.num_qubits()},
                     {"I", code.num_checks()},
                     {"K", code.num_logical()},
                     {"rank", code.check_rank()},
                     {"redundancies", code.num_redundancies()},
                     {"symmetry", symmetry_classification(code)},
                     {"fingerprint", hex64(code.fingerprint())},
                     {"code", json::parse(code_to_json(code))}};
  std::cout << "code: " << code.name() << "\n"
            << "N=" << code.num_qubits() << " I=" << code.num_checks() << " K=" << code.num_logical()
            << " rank=" << code.check_rank() << " redundancies=" << code.num_redundancies()
            << " symmetry=" << symmetry_classification(code) << "\n";
  run.write("code_info.json", info.dump(2) + "\n");
  return kExitOk;
}

int cmd_model_export(const Args& a, Run& run) {
  const CodeSpec code = load_code_args(a.code);
  const NoiseParams p = a.rates.params();
  ModelOptions mo;
  mo.boundary = boundary_from_string(a.boundary);
  mo.perfect_final_round = perfect_final(a, false);
  const SpacetimeModel m = build_single_flavor(code, p, a.T, mo);
  run.code = code_identity(code);
  run.params = {{"T", a.T}, {"rates", rates_json(p)}, {"boundary", a.boundary}, {"perfect_final_round", mo.perfect_final_round}};
  run.write(a.model_out, export_model_json(m) + "\n");
  std::cout << "wrote " << (run.out_dir / a.model_out).string() << "\n";
  return kExitOk;
}

int cmd_exact(const std::string& sub, const Args& a, Run& run) {
  const CodeSpec code = load_code_args(a.code);
  const NoiseParams p = a.rates.params();
  run.code = code_identity(code);
  const EngineOptions eo = engine_options(a);
  const double unit = a.bits ? std::log(2.0) : 1.0;
  const std::string sfx = a.bits ? "_bits" : "";
  ExactTable table{code, p, a.T, a.n};
  run.params = {{"T", a.T}, {"n", a.n}, {"rates", rates_json(p)}, {"engine", a.engine}, {"units", a.bits ? "bits" : "nats"}};
  if (a.budget > 0.0) run.params["budget"] = a.budget;

  if (sub == "ic") {
    ModelOptions mo;
    mo.perfect_final_round = perfect_final(a, false);
    run.params["perfect_final_round"] = mo.perfect_final_round;
    const DiagnosticsResult r = coherent_information(code, p, a.T, a.n, mo, eo);
    require_finite(r.ic, "coherent information");
    table.add("ic" + sfx, r.ic / unit);
    table.add("log_Z", r.log_Z);
    table.add("log_trace_qm", r.log_trace_qm);
    table.add("log_trace_qmr", r.log_trace_qmr);
    for (const auto& [key, f] : r.defect_free_energies) table.add("dF[" + key + "]", f);
    std::cout << "ic = " << format_double(r.ic / unit) << (a.bits ? " bits" : " nats") << "\n";
    run.write("exact_ic.csv", table.text);
    return kExitOk;
  }
  if (sub == "relent" || sub == "kl") {
    if (a.syndromes.empty()) throw ValidationError("--syndrome is required");
    ModelOptions mo;
    mo.perfect_final_round = perfect_final(a, false);
    run.params["perfect_final_round"] = mo.perfect_final_round;
    run.params["syndromes"] = a.syndromes;
    for (const auto& s : a.syndromes) {
      const BitVector bits = parse_syndrome(s, code);
      const double v = sub == "relent" ? relative_entropy(code, p, a.T, a.n, bits, mo, eo)
                                       : kl_divergence(code, p, a.T, a.n, bits, mo, eo);
      if (std::isnan(v)) throw NumericalError(sub + " is NaN");
      table.add(sub + "[" + s + "]" + sfx, v / unit);
      std::cout << sub << "[" << s << "] = " << format_double(v / unit) << "\n";
    }
    run.write("exact_" + sub + ".csv", table.text);
    return kExitOk;
  }
  ErrorConfigOptions eco;
  if (a.budget > 0.0) eco.budget = a.budget;
  if (sub == "duality") {
    eco.perfect_final_round = perfect_final(a, false);
    run.params["perfect_final_round"] = eco.perfect_final_round;
    const DualityReport r = fourier_duality_check(code, p, a.T, eco);
    table.add("max_relative_deviation", r.max_relative_deviation);
    table.add("max_zero_record_deviation", r.max_zero_record_deviation);
    table.add("total_probability", r.total_probability);
    table.add("plancherel_square_deviation", r.plancherel_square_deviation);
    table.add("power_sum_deviation_n2", r.power_sum_deviation_n2);
    table.add("power_sum_deviation_n3", r.power_sum_deviation_n3);
    require_finite(r.max_relative_deviation, "duality deviation");
    std::cout << "max relative deviation = " << format_double(r.max_relative_deviation) << " over " << r.num_records
              << " records\n";
    run.write("exact_duality.csv", table.text);
    return kExitOk;
  }
  if (sub == "decode") {
    eco.perfect_final_round = perfect_final(a, true);
    run.params["perfect_final_round"] = eco.perfect_final_round;
    if (!a.records.empty()) {
      const auto recs = parse_records_json(read_text_file(a.records), code);
      run.params["records"] = a.records;
      run.params["T"] = recs.empty() ? a.T : recs.front().T();
      for (const auto& r : recs) reference_config(code, r, eco.perfect_final_round);
      const auto post = decode_records(code, p, recs, eco);
      run.write("decoder.csv", decoder_csv(recs, post, 2 * code.num_logical()));
      std::cout << "decoded " << recs.size() << " records\n";
      return kExitOk;
    }
    const MLStatistics st = ml_statistics(code, p, a.T, eco);
    table.add("delta_bar", st.delta_bar);
    table.add("conditional_entropy" + sfx, st.conditional_entropy / unit);
    table.add("coherent_information_n1" + sfx, st.coherent_information / unit);
    table.add("total_probability", st.total_probability);
    std::cout << "delta_bar = " << format_double(st.delta_bar) << ", H = " << format_double(st.conditional_entropy / unit)
              << (a.bits ? " bits" : " nats") << "\n";
    run.write("exact_decode.csv", table.text);
    return kExitOk;
  }
  throw ValidationError("unknown exact subcommand " + sub);
}

std::string default_rate(const CodeSpec& code) {
  return code.geometry().family == "repetition" ? "px" : "pz";
}

NoiseParams scan_params(const std::string& rate, double p, bool iso, double q, double lambda) {
  NoiseParams n;
  if (rate == "px") {
    n.p_x = p;
  } else if (rate == "py") {
    n.p_y = p;
  } else if (rate == "pz") {
    n.p_z = p;
  } else {
    throw ValidationError("--rate must be px, py or pz");
  }
  n.q = iso ? p : q;
  n.lambda = lambda;
  return n;
}

int cmd_mc_scan(const Args& a, Run& run) {
  if (a.sizes.size() < 2) throw ValidationError("--L needs at least two sizes, e.g. --L 4,6,8");
  if (a.iso_pq.empty() == a.p_grid.empty()) throw ValidationError("give exactly one of --iso-pq and --p-grid");
  const bool iso = !a.iso_pq.empty();
  const auto grid = parse_grid(iso ? a.iso_pq : a.p_grid);
  CodeArgs probe = a.code;
  probe.L = a.sizes.front();
  const CodeSpec first = load_code_args(probe);
  if (!a.code.file.empty()) throw ValidationError("mc scan needs a built-in code family");
  const std::string rate = a.rate.empty() ? default_rate(first) : a.rate;
  for (double p : grid) scan_params(rate, p, iso, a.rates.q, a.rates.lambda).validate();
  const MCConfig cfg = a.mc.config(a.threads);

  ScanSpec spec;
  spec.code = [&](int L) {
    CodeArgs c = a.code;
    c.L = L;
    return load_code_args(c);
  };
  spec.T_of_L = [&](int L) {
    return a.scan_T > 0 ? a.scan_T : std::max(1, static_cast<int>(std::lround(a.aspect * L)));
  };
  spec.params_of = [&](double p) { return scan_params(rate, p, iso, a.rates.q, a.rates.lambda); };
  spec.sector = a.sector;

  run.code = code_identity(first);
  run.seed = cfg.seed;
  run.params = {{"sizes", a.sizes},  {"grid", grid},          {"rate", rate},         {"iso_pq", iso},
                {"q", a.rates.q},    {"lambda", a.rates.lambda}, {"sweeps", cfg.sweeps}, {"burn_in", cfg.burn_in},
                {"sampler", to_string(cfg.algorithm)}, {"replicas", cfg.replicas}, {"decoupled", cfg.decoupled},
                {"T", a.scan_T},     {"aspect", a.aspect},    {"measure_every", cfg.measure_every}};

  const ScanResult res = binder_scan(spec, grid, a.sizes, cfg);
  std::string csv = csv_row({"L", "T", "p", "sector", "binder", "binder_err", "abs_m", "abs_m_err", "energy_density",
                             "energy_density_err", "measurements"});
  json points = json::array();
  bool gauge_variant = false;
  for (const auto& pt : res.points) {
    gauge_variant = gauge_variant || pt.obs.gauge_variant;
    const auto sec = static_cast<std::size_t>(res.sector);
    const SectorObservables so = sec < pt.obs.sectors.size() ? pt.obs.sectors[sec] : SectorObservables{};
    csv += csv_row({std::to_string(pt.L), std::to_string(pt.T), format_double(pt.p), std::to_string(res.sector),
                    format_double(so.binder.mean), format_double(so.binder.error), format_double(so.abs_m.mean),
                    format_double(so.abs_m.error), format_double(pt.obs.energy_density.mean),
                    format_double(pt.obs.energy_density.error), std::to_string(pt.obs.measurements)});
    points.push_back({{"p", pt.p}, {"L", pt.L}, {"T", pt.T}, {"U", so.binder.mean}, {"err", so.binder.error}});
  }
  json pairs = json::array();
  for (const auto& c : res.pairwise) {
    pairs.push_back({{"L1", c.L1}, {"L2", c.L2}, {"found", c.found}, {"p", c.p}, {"error", c.error}, {"message", c.message}});
  }
  json summary = {{"found", res.found},   {"crossing", res.found ? json(res.pooled) : json(nullptr)},
                  {"error", res.found ? json(res.pooled_error) : json(nullptr)},
                  {"sector", res.sector}, {"message", res.message}, {"pairwise", pairs}, {"points", points},
                  {"magnetization", gauge_variant ? "gauge-variant" : "global"}};
  run.write("mc_scan.csv", csv);
  run.write("mc_scan_summary.json", summary.dump(2) + "\n");
  if (gauge_variant) {
    std::cout << "note: redundancies are local, so sector magnetizations are gauge variant; use mc correlate with "
                 "Wilson loops\n";
  }
  if (res.found) {
    std::cout << "crossing: p = " << format_double(res.pooled) << " +- " << format_double(res.pooled_error) << "\n";
  } else {
    std::cout << "no crossing (" << res.message << ")\n";
  }
  return kExitOk;
}

int cmd_mc_correlate(const Args& a, Run& run) {
  const CodeSpec code = load_code_args(a.code);
  const NoiseParams p = a.rates.params();
  const MCConfig cfg = a.mc.config(a.threads);
  if (a.syndromes.empty()) throw ValidationError("--syndrome is required");
  const Boundary boundary = boundary_from_string(a.boundary);
  std::vector<BitVector> syn;
  for (const auto& s : a.syndromes) {
    const BitVector b = parse_syndrome(s, code);
    if (!error_with_syndrome(code, b)) throw ValidationError("syndrome " + s + " cannot be created by any Pauli operator");
    syn.push_back(b);
  }
  run.code = code_identity(code);
  run.seed = cfg.seed;
  run.params = {{"T", a.T},          {"rates", rates_json(p)},          {"boundary", a.boundary},
                {"syndromes", a.syndromes}, {"sweeps", cfg.sweeps},      {"burn_in", cfg.burn_in},
                {"sampler", to_string(cfg.algorithm)}, {"replicas", cfg.replicas}, {"decoupled", cfg.decoupled}};
  const auto est = mc_boundary_correlator(code, p, a.T, syn, cfg, boundary);
  EngineOptions eo;
  if (a.budget > 0.0) eo.budget = a.budget;
  std::string csv = csv_row({"syndrome", "boundary", "correlator", "correlator_err", "exact_correlator"});
  for (std::size_t k = 0; k < syn.size(); ++k) {
    std::string exact;
    if (!cfg.decoupled) {
      try {
        exact = format_double(boundary_correlator(code, p, a.T, 2, syn[k], boundary, {}, eo));
      } catch (const SizeError&) {
        exact = "";
      }
    }
    csv += csv_row({a.syndromes[k], a.boundary, format_double(est[k].mean), format_double(est[k].error), exact});
    std::cout << "<" << a.syndromes[k] << "> = " << format_double(est[k].mean) << " +- " << format_double(est[k].error)
              << (exact.empty() ? "" : " (exact " + exact + ")") << "\n";
  }
  run.write("mc_correlate.csv", csv);
  return kExitOk;
}

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const Run& run, const std::vector<std::string>& arguments, int exit_code, const std::string& error,
                    double seconds, int threads) {
  json outputs = json::array();
  for (const auto& name : run.outputs) {
    outputs.push_back({{"file", name}, {"fnv1a", hex64(fnv1a(read_text_file((run.out_dir / name).string())))}});
  }
  json m = {{"tool", "syndromestat"},
            {"tool_version", kVersion},
            {"arguments", arguments},
            {"code", run.code},
            {"parameters", run.params},
            {"seed", run.seed ? json(*run.seed) : json(nullptr)},
            {"threads", threads},
            {"started_at", now_iso()},
            {"wall_clock_seconds", seconds},
            {"exit_code", exit_code},
            {"error", error},
            {"outputs", outputs}};
  fs::create_directories(run.out_dir);
  write_text_file((run.out_dir / "manifest.json").string(), m.dump(2) + "\n");
}

/// Parses and runs one command line. `arguments` excludes the program name, --out-dir and --replay.
int execute(const std::vector<std::string>& arguments, const std::string& out_dir_override, Run* run_out = nullptr);

int replay(const std::string& manifest_path, int threads_unused) {
  (void)threads_unused;
  json m;
  try {
    m = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!m.contains("arguments") || !m.contains("outputs")) throw ValidationError("manifest lacks arguments or outputs");
  const auto arguments = m.at("arguments").get<std::vector<std::string>>();
  const fs::path dir = fs::path(manifest_path).parent_path() / "replay";
  Run run;
  const int code = execute(arguments, dir.string(), &run);
  if (code != kExitOk) return code;
  bool same = true;
  for (const auto& o : m.at("outputs")) {
    const std::string name = o.at("file").get<std::string>();
    const fs::path path = dir / name;
    if (!fs::exists(path)) {
      std::cout << name << ": missing in replay\n";
      same = false;
      continue;
    }
    const std::string h = hex64(fnv1a(read_text_file(path.string())));
    const bool ok = h == o.at("fnv1a").get<std::string>();
    std::cout << name << ": " << (ok ? "identical" : "differs") << "\n";
    same = same && ok;
  }
  std::cout << (same ? "replay reproduced every output" : "replay differs") << "\n";
  return same ? kExitOk : kExitNumerical;
}

int execute(const std::vector<std::string>& arguments, const std::string& out_dir_override, Run* run_out) {
  Args a;
  CLI::App app{"syndromestat: stat-mech diagnostics of noisy syndrome measurement"};
  app.set_version_flag("--version", kVersion);
  app.add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--budget", a.budget, "Enumeration budget (overrides SYNDROMESTAT_BUDGET)");
  app.add_option("--out-dir", a.out_dir, "Directory for outputs and the run manifest");
  app.add_flag("--bits", a.bits, "Report entropies in bits instead of nats");
  app.add_option("--replay", a.replay, "Re-run a manifest and compare output hashes");
  app.require_subcommand(0, 1);
  app.fallthrough();

  auto* code_cmd = app.add_subcommand("code", "Code inspection");
  auto* code_info = code_cmd->add_subcommand("info", "Print N, I, K, redundancies and symmetry type");
  add_code_options(code_info, a.code);
  code_cmd->require_subcommand(1);

  auto* model_cmd = app.add_subcommand("model", "Stat-mech model construction");
  auto* model_export = model_cmd->add_subcommand("export", "Write the spin-form model as JSON");
  add_code_options(model_export, a.code);
  add_rate_options(model_export, a.rates);
  model_export->add_option("--T", a.T, "Rounds");
  model_export->add_option("--boundary", a.boundary, "open or field");
  model_export->add_flag("--perfect-final", a.perfect_final, "Noiseless last readout");
  model_export->add_option("--out", a.model_out, "Output file name inside the output directory");
  model_cmd->require_subcommand(1);

  auto* exact_cmd = app.add_subcommand("exact", "Exact diagnostics");
  std::vector<std::pair<std::string, CLI::App*>> exact_subs;
  for (const char* name : {"ic", "relent", "kl", "duality", "decode"}) {
    auto* s = exact_cmd->add_subcommand(name, std::string("exact ") + name);
    add_code_options(s, a.code);
    add_rate_options(s, a.rates);
    s->add_option("--T", a.T, "Rounds");
    s->add_option("--n", a.n, "Renyi index")->check(CLI::Range(2, 64));
    s->add_option("--engine", a.engine, "transfer or enumerate");
    s->add_flag("--perfect-final", a.perfect_final, "Noiseless last readout");
    s->add_flag("--no-perfect-final", a.no_perfect_final, "Noisy last readout");
    s->add_option("--syndrome", a.syndromes, "Syndrome bit string (repeatable)");
    s->add_option("--records", a.records, "Syndrome records JSON for decode");
    exact_subs.emplace_back(name, s);
  }
  exact_cmd->require_subcommand(1);

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo sampling of the n = 2 model");
  auto* scan = mc_cmd->add_subcommand("scan", "Binder-cumulant scan and crossing estimate");
  add_code_options(scan, a.code, false);
  scan->add_option("--L", a.sizes, "Sizes, comma separated")->delimiter(',');
  scan->add_option("--T", a.scan_T, "Fixed number of rounds (default aspect * L)");
  scan->add_option("--aspect", a.aspect, "T = round(aspect * L) when --T is not given");
  scan->add_option("--iso-pq", a.iso_pq, "Grid start:stop:step with q = p");
  scan->add_option("--p-grid", a.p_grid, "Grid start:stop:step at fixed --q");
  scan->add_option("--q", a.rates.q, "Readout flip rate for --p-grid");
  scan->add_option("--lambda", a.rates.lambda, "Measurement strength");
  scan->add_option("--rate", a.rate, "Which Pauli rate the grid sets: px, py or pz");
  scan->add_option("--sector", a.sector, "Symmetry sector for the Binder cumulant (default: most ordered)");
  add_mc_options(scan, a.mc);
  auto* corr = mc_cmd->add_subcommand("correlate", "Boundary correlators <prod sigma_0,i>");
  add_code_options(corr, a.code);
  add_rate_options(corr, a.rates);
  corr->add_option("--T", a.T, "Rounds");
  corr->add_option("--syndrome", a.syndromes, "Syndrome bit string (repeatable)");
  corr->add_option("--boundary", a.boundary, "open (relative entropy) or field (KL divergence)");
  add_mc_options(corr, a.mc);
  mc_cmd->require_subcommand(1);

  std::vector<std::string> rev(arguments.rbegin(), arguments.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (!a.replay.empty()) return replay(a.replay, a.threads);
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitValidation;
  }

  Run local;
  Run& run = run_out ? *run_out : local;
  run.out_dir = out_dir_override.empty() ? fs::path(a.out_dir) : fs::path(out_dir_override);
  std::vector<std::string> recorded;
  for (std::size_t k = 0; k < arguments.size(); ++k) {
    if (arguments[k] == "--out-dir" || arguments[k] == "--replay") {
      ++k;
      continue;
    }
    if (arguments[k].rfind("--out-dir=", 0) == 0 || arguments[k].rfind("--replay=", 0) == 0) continue;
    recorded.push_back(arguments[k]);
  }

  const auto t0 = std::chrono::steady_clock::now();
  int rc = kExitOk;
  std::string error;
  try {
    if (code_info->parsed()) {
      rc = cmd_code_info(a, run);
    } else if (model_export->parsed()) {
      rc = cmd_model_export(a, run);
    } else if (scan->parsed()) {
      rc = cmd_mc_scan(a, run);
    } else if (corr->parsed()) {
      rc = cmd_mc_correlate(a, run);
    } else {
      for (const auto& [name, s] : exact_subs) {
        if (s->parsed()) rc = cmd_exact(name, a, run);
      }
    }
  } catch (const SizeError& e) {
    error = e.what();
    std::cerr << "error: " << e.what() << "\nrequired budget: " << format_double(e.required_budget()) << "\n";
    rc = kExitBudget;
  } catch (const ValidationError& e) {
    error = e.what();
    std::cerr << "error: " << e.what() << "\n";
    rc = kExitValidation;
  } catch (const NumericalError& e) {
    error = e.what();
    std::cerr << "error: " << e.what() << "\n";
    rc = kExitNumerical;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_manifest(run, recorded, rc, error, seconds, a.threads);
  } catch (const std::exception& e) {
    std::cerr << "warning: could not write the run manifest: " << e.what() << "\n";
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return execute(args, "");
  } catch (const SizeError& e) {
    std::cerr << "error: " << e.what() << "\nrequired budget: " << format_double(e.required_budget()) << "\n";
    return kExitBudget;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
