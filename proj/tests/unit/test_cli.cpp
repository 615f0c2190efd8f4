#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path workdir(const std::string& name) {
  const fs::path d = fs::path(SYNDROMESTAT_TEST_WORKDIR) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + SYNDROMESTAT_CLI_PATH + "\" --out-dir \"" + dir.string() + "\" " + args +
                          " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(log);
  return r;
}

// quantity -> value from a result CSV (last column is the value, the one before is the quantity).
std::map<std::string, double> csv_values(const fs::path& p) {
  std::map<std::string, double> v;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto b = line.rfind(',');
    const auto a = line.rfind(',', b - 1);
    v[line.substr(a + 1, b - a - 1)] = std::stod(line.substr(b + 1));
  }
  return v;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST(Cli, CodeInfoToric) {
  const auto d = workdir("info_toric");
  const auto r = run(d, "code info --builtin toric --L 3");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = read_json(d / "code_info.json");
  EXPECT_EQ(j["K"], 2);
  EXPECT_EQ(j["redundancies"], 2);
  EXPECT_EQ(j["symmetry"], "global");
  const auto m = read_json(d / "manifest.json");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["code"]["name"], "toric");
  EXPECT_FALSE(m["outputs"].empty());
}

TEST(Cli, CodeInfoTwoDimensionalRepetition) {
  const auto d = workdir("info_rep2");
  ASSERT_EQ(run(d, "code info --builtin repetition --d 2 --L 3").code, 0);
  const auto j = read_json(d / "code_info.json");
  EXPECT_EQ(j["redundancies"], 10);
  EXPECT_EQ(j["symmetry"], "local");
}

TEST(Cli, MalformedCodeFileIsAValidationError) {
  const auto d = workdir("bad_file");
  std::ofstream(d / "bad.json") << R"({"num_qubits": 2, "checks": ["XX", "ZI"]})";
  const auto r = run(d, "code info --file \"" + (d / "bad.json").string() + "\"");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_EQ(read_json(d / "manifest.json")["exit_code"], 2);
}

TEST(Cli, NoiselessCoherentInformation) {
  const auto d = workdir("ic");
  ASSERT_EQ(run(d, "exact ic --builtin repetition --L 3 --T 2 --px 0 --q 0").code, 0);
  EXPECT_NEAR(csv_values(d / "exact_ic.csv").at("ic"), std::log(2.0), 1e-12);
  const auto b = workdir("ic_bits");
  ASSERT_EQ(run(b, "--bits exact ic --builtin repetition --L 3 --T 2 --px 0 --q 0").code, 0);
  EXPECT_NEAR(csv_values(b / "exact_ic.csv").at("ic_bits"), 1.0, 1e-12);
}

TEST(Cli, DualityCheck) {
  const auto d = workdir("duality");
  ASSERT_EQ(run(d, "exact duality --builtin toric --L 2 --T 1 --pz 0.2 --q 0.1").code, 0);
  const auto v = csv_values(d / "exact_duality.csv");
  EXPECT_LE(v.at("max_relative_deviation"), 1e-10);
  EXPECT_NEAR(v.at("total_probability"), 1.0, 1e-12);
}

TEST(Cli, DecodeRecordsFromFile) {
  const auto d = workdir("decode");
  std::ofstream(d / "records.json") << R"({"records": [{"m_final": "000", "m_noisy": ["000"]},
                                                       {"m_final": "110", "m_noisy": ["110"]}]})";
  const auto r = run(d, "exact decode --builtin repetition --L 3 --T 1 --px 0.1 --q 0.1 --records \"" +
                            (d / "records.json").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(slurp(d / "decoder.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "record_hash,sector,probability");
  double total = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    total += std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  // Two records, four sectors each, and each posterior sums to one.
  EXPECT_EQ(rows, 8);
  EXPECT_NEAR(total, 2.0, 1e-12);
}

TEST(Cli, WolffOnMultiBodyModelIsRejected) {
  const auto d = workdir("bad_sampler");
  const auto r = run(d, "mc correlate --builtin toric --L 2 --T 1 --py 0.1 --q 0.1 --syndrome 11000000 --sampler wolff");
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST(Cli, BudgetOverrunReportsRequiredBudget) {
  const auto d = workdir("budget");
  const auto r = run(d, "--budget 1000 exact ic --builtin toric --L 3 --T 2 --pz 0.1 --q 0.1");
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("required budget"), std::string::npos) << r.out;
}

TEST(Cli, ReplayReproducesOutputs) {
  const auto d = workdir("replay");
  ASSERT_EQ(run(d, "mc correlate --builtin repetition --L 3 --T 2 --px 0.2 --q 0.1 --syndrome 110 --sweeps 2000 --seed 4")
                .code,
            0);
  const auto r = run(workdir("replay_out"), "--replay \"" + (d / "manifest.json").string() + "\"");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(d / "replay" / "mc_correlate.csv"), slurp(d / "mc_correlate.csv"));
}

TEST(Cli, MonteCarloCorrelatorMatchesExact) {
  const auto d = workdir("correlate");
  ASSERT_EQ(run(d, "mc correlate --builtin repetition --L 3 --T 2 --px 0.2 --q 0.1 --syndrome 110 --sweeps 100000").code, 0);
  std::istringstream in(slurp(d / "mc_correlate.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "syndrome,boundary,correlator,correlator_err,exact_correlator");
  std::vector<std::string> f;
  std::istringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) f.push_back(c);
  ASSERT_EQ(f.size(), 5u);
  EXPECT_NEAR(std::stod(f[2]), std::stod(f[4]), 3 * std::stod(f[3]));
}

TEST(Cli, ScanWithoutReadoutNoiseFindsNoCrossing) {
  const auto d = workdir("scan");
  const auto r = run(d, "mc scan --builtin repetition --L 8,16 --aspect 1 --p-grid 0.02:0.18:0.02 --q 0 --sweeps 1000 "
                        "--sampler wolff");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("no crossing"), std::string::npos) << r.out;
  const auto s = read_json(d / "mc_scan_summary.json");
  EXPECT_FALSE(s["found"].get<bool>());
  EXPECT_EQ(s["points"].size(), 18u);
}
