#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "icluster/cli.hpp"
#include "icluster/serialize.hpp"

using namespace icluster;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "icluster");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("icluster_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string mixture_file() {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> a(0, 1), b(8, 2);
    std::ostringstream s;
    for (int l = 0; l < 150; ++l) s << a(rng) << "\n" << b(rng) << "\n";
    return write("mix.txt", s.str());
  }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_F(CliTest, ClusterTwoGroups) {
  const auto in = write("pts.txt", "1\n2\n6\n7\n");
  const auto r = invoke({"cluster", "--input", in, "--method", "kmeans", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["total_cost"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["delimiters"], nlohmann::json::parse("[1,3]"));
  EXPECT_EQ(j["n"], 4);
  EXPECT_EQ(j["method"], "kmeans");
  EXPECT_EQ(j["mode"], "on_demand");
  EXPECT_EQ(j["clusters"][1]["left"], 3);
  EXPECT_EQ(j["clusters"][1]["size"], 2);
  EXPECT_EQ(j["clusters"][1]["prototype"], 6.5);
}

TEST_F(CliTest, JsonRoundTrip) {
  const auto in = mixture_file();
  for (const std::string m : {"kmeans", "kmedian", "bregman:squared", "kmedoid:abs"}) {
    const auto r = invoke({"cluster", "-i", in, "-m", m, "-k", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    const auto raw = read_points_file(in, false);
    const auto ds = build_dataset(std::span<const RawPoint>(raw));
    const RangeCost cost(ds, parse_method(m));
    const auto rebuilt = make_clustering(cost, delimiters_from_json(j));
    const double reported = j["total_cost"].get<double>();
    EXPECT_NEAR(rebuilt.total_cost, reported, 1e-12 * std::max(1.0, reported)) << m;
  }
}

TEST_F(CliTest, ConstraintsAndVoronoi) {
  const auto in = write("pts.txt", "1\n2\n6\n7\n");
  const auto r = invoke({"cluster", "-i", in, "-k", "2", "--min-sizes", "3,1", "--voronoi"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["total_cost"].get<double>(), 14.0, 1e-12);
  EXPECT_EQ(j["voronoi"]["consistent"], false);
  const auto bad = invoke({"cluster", "-i", in, "-k", "2", "--min-sizes", "3,2"});
  EXPECT_EQ(bad.code, cli::kInfeasible);
  EXPECT_FALSE(bad.err.empty());
}

TEST_F(CliTest, ExitCodes) {
  const auto in = write("pts.txt", "1\n2\n6\n7\n");
  EXPECT_EQ(invoke({"cluster", "-i", in, "-k", "9"}).code, cli::kInfeasible);
  EXPECT_EQ(invoke({"cluster", "-i", path("missing.txt"), "-k", "2"}).code, cli::kInputError);
  EXPECT_EQ(invoke({"cluster", "-i", write("bad.txt", "1\nabc\n"), "-k", "2"}).code,
            cli::kInputError);
  EXPECT_EQ(invoke({"cluster", "-i", in, "-k", "2", "-m", "kmodes"}).code, cli::kInputError);
  EXPECT_EQ(invoke({"cluster", "-i", write("row.txt", "1 2 6 7\n"), "-k", "2"}).code,
            cli::kInputError);
  EXPECT_EQ(invoke({"cluster", "-i", write("neg.txt", "-1\n2\n"), "-k", "1", "-m", "bregman:kl"}).code,
            cli::kInputError);
  EXPECT_EQ(invoke({"cluster", "-i", in}).code, cli::kInputError);
  EXPECT_EQ(invoke({}).code, cli::kInputError);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, SweepCsv) {
  const auto in = mixture_file();
  const auto r = invoke({"sweep", "-i", in, "-m", "kmeans", "--kmax", "15"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "k,e_k,m_k,regularized");
  double prev = 2.0;
  int rows = 0;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 4u);
    const double m = std::stod(cells[2]);
    if (rows == 0) EXPECT_EQ(m, 1.0);
    EXPECT_LE(m, prev);
    prev = m;
    ++rows;
  }
  EXPECT_EQ(rows, 15);
}

TEST_F(CliTest, SweepPenaltyReportsBestK) {
  const auto in = write("g.txt", "0\n1\n100\n101\n200\n201\n");
  const auto r = invoke({"sweep", "-i", in, "--kmax", "6", "--penalty", "linear:10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("best k: 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, FitWritesReportAndDensity) {
  const auto in = mixture_file();
  const auto dens = path("dens.csv");
  const auto r = invoke({"fit", "-i", in, "--family", "gaussian_free_sigma", "-k", "2",
                         "--density", dens, "--grid", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["family"], "gaussian_free_sigma");
  EXPECT_EQ(j["k"], 2);
  EXPECT_TRUE(j.contains("avg_complete_loglik"));
  EXPECT_TRUE(j["thetas"][0].contains("sigma2"));
  EXPECT_EQ(j["optimality_guaranteed"], false);
  const auto csv = slurp(dens);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,comp_1,comp_2,total");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST_F(CliTest, FitSelectsKByAic) {
  const auto in = mixture_file();
  const auto r = invoke({"fit", "-i", in, "--family", "gaussian_fixed_sigma:1.5", "--kmax", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["best_k"], 2);
  EXPECT_EQ(j["reports"].size(), 5u);
  EXPECT_EQ(j["reports"][1]["k"], 2);
  EXPECT_EQ(invoke({"fit", "-i", in, "--family", "poisson", "-k", "2"}).code, cli::kInputError);
}

TEST_F(CliTest, GmmCompare) {
  const auto in = mixture_file();
  const auto r = invoke({"gmm-compare", "-i", in, "-k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["gmm1"].contains("avg_complete_loglik"));
  EXPECT_TRUE(j["gmm2"].contains("avg_complete_loglik"));
  EXPECT_NEAR(j["delta_avg_complete_loglik"].get<double>(),
              j["gmm2"]["avg_complete_loglik"].get<double>() -
                  j["gmm1"]["avg_complete_loglik"].get<double>(),
              1e-12);
}

TEST_F(CliTest, HistogramInput) {
  const auto in = write("h.csv", "# value,count\n1,3\n2,1\n");
  const auto r = invoke({"cluster", "-i", in, "--histogram", "-k", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["clusters"][0]["prototype"].get<double>(), 1.25);
  EXPECT_NEAR(j["total_cost"].get<double>(), 0.75, 1e-14);
}

TEST_F(CliTest, BenchCsv) {
  const auto r = invoke({"bench", "--sizes", "100,200", "-k", "3", "--reps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,k,mode,median_seconds");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

TEST_F(CliTest, VerifyPasses) {
  const auto r = invoke({"verify", "--n", "10", "--k", "3", "--trials", "50", "--seed", "7"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, OutputFileAndDeterminism) {
  std::ostringstream pts;
  for (int l = 0; l < 60; ++l) pts << 0.05 * l + 0.01 * (l % 7) << "\n";
  const auto in = write("small.txt", pts.str());
  const auto a = path("a.json"), b = path("b.json");
  ASSERT_EQ(invoke({"cluster", "-i", in, "-k", "5", "-m", "bregman:exp:r=2", "-o", a}).code, 0);
  ASSERT_EQ(invoke({"cluster", "-i", in, "-k", "5", "-m", "bregman:exp:r=2", "-o", b}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto t4 = invoke({"cluster", "-i", in, "-k", "5", "-m", "bregman:exp:r=2", "--threads", "4"});
  ASSERT_EQ(t4.code, 0);
  EXPECT_EQ(nlohmann::json::parse(t4.out)["total_cost"],
            nlohmann::json::parse(slurp(a))["total_cost"]);
}

TEST(CliBinary, RunsAsProcess) {
  const std::string cmd = std::string(ICLUSTER_CLI_PATH) + " cluster -k 2 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), cli::kInputError);
}
