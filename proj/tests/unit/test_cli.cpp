#include <gtest/gtest.h>

#include <sys/wait.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "race/lzeros.hpp"
#include "race_cli/cli.hpp"
#include "test_support.hpp"

using namespace race;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> with_cache(std::vector<std::string> args) {
  args.insert(args.begin(), {"--zero-dir", race::testing::zero_dir().string()});
  return args;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_with(const std::string& text, const std::string& needle) {
  std::vector<std::string> found;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find(needle) != std::string::npos) found.push_back(line);
  }
  return found;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).code, cli::exit_ok);
  EXPECT_EQ(run_cli({}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"covariance", "--q", "5"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli(with_cache({"covariance", "--q", "5", "--classes", "1,x"})).code, cli::exit_usage);
  EXPECT_EQ(run_cli(with_cache({"covariance", "--q", "6", "--classes", "1,2"})).code, cli::exit_usage);
  EXPECT_EQ(run_cli(with_cache({"covariance", "--q", "5", "--classes", "1,6"})).code, cli::exit_usage);
  EXPECT_EQ(run_cli(with_cache({"density", "invert2", "--q", "5", "--classes", "1,2,3"})).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"race", "--q", "4", "--classes", "3,1", "--xmax", "50"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"--set", "bogus=1", "race", "--q", "4", "--classes", "3,1", "--xmax", "1000"}).code,
            cli::exit_usage);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = RACE_CLI_BINARY;
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("density"), 2);
  EXPECT_EQ(status("race --q 4 --classes 3,1 --xmax 1000 --no-exact"), 0);
}

TEST(Cli, CovarianceCsvCarriesProvenance) {
  const auto r = run_cli(with_cache({"covariance", "--q", "5", "--classes", "1,2"}));
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_EQ(r.out.rfind("# race covariance seed=", 0), 0u);
  EXPECT_NE(r.out.find("config="), std::string::npos);
  EXPECT_NE(r.out.find("row,col,class_row,class_col,covariance,correlation,mean_row"), std::string::npos);
}

TEST(Cli, MonteCarloOutputIsByteIdentical) {
  race::testing::ScratchDir dir("cli-determinism");
  const auto args = with_cache({"--output-dir", dir.path().string(), "--samples", "20000", "density", "mc", "--q",
                                "5", "--classes", "1,2,3"});
  auto first = args;
  first.insert(first.end(), {"--csv", "a.csv"});
  auto second = args;
  second.insert(second.end(), {"--csv", "b.csv"});
  ASSERT_EQ(run_cli(first).code, cli::exit_ok);
  ASSERT_EQ(run_cli(second).code, cli::exit_ok);
  const auto a = slurp(dir.path() / "a.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir.path() / "b.csv"));

  auto other_seed = args;
  other_seed.insert(other_seed.end(), {"--seed", "99", "--csv", "c.csv"});
  ASSERT_EQ(run_cli(other_seed).code, cli::exit_ok);
  EXPECT_NE(a, slurp(dir.path() / "c.csv"));
}

TEST(Cli, SvgOutputsAreWellFormedXml) {
  race::testing::ScratchDir dir("cli-svg");
  const std::string base = dir.path().string();
  ASSERT_EQ(run_cli(with_cache({"--output-dir", base, "--samples", "5000", "density", "mc", "--q", "5", "--classes",
                                "1,2", "--svg", "hist.svg", "--csv", "d.csv"}))
                .code,
            cli::exit_ok);
  ASSERT_EQ(run_cli({"--output-dir", base, "race", "--q", "4", "--classes", "3,1", "--xmax", "100000", "--svg",
                     "race.svg", "--csv", "race.csv"})
                .code,
            cli::exit_ok);
  for (const char* name : {"hist.svg", "race.svg"}) {
    boost::property_tree::ptree tree;
    ASSERT_NO_THROW(boost::property_tree::read_xml((dir.path() / name).string(), tree)) << name;
    EXPECT_EQ(tree.count("svg"), 1u) << name;
  }
}

TEST(Cli, RaceCsvColumnsAndDensity) {
  const auto r = run_cli({"race", "--q", "4", "--classes", "3,1", "--xmax", "100000"});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_NE(r.out.find("x,pi_total,pi_3,pi_1,E_3,E_1,running_density"), std::string::npos);
  EXPECT_EQ(lines_with(r.out, "# grid_density=").size(), 1u);
  EXPECT_EQ(lines_with(r.out, "# exact_density=").size(), 1u);
}

TEST(Cli, DensityAllMethods) {
  const auto r = run_cli(with_cache({"--samples", "20000", "density", "all", "--q", "4", "--classes", "3,1"}));
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  for (const char* m : {"monte-carlo", "inversion-2way", "gaussian-approx", "asymptotic-T11"}) {
    EXPECT_NE(r.out.find(m), std::string::npos) << m;
  }
}

TEST(Cli, ZerosVerifyReportsCorruptionWithLineNumber) {
  race::testing::ScratchDir dir("cli-zeros-verify");
  const std::string zd = dir.path().string();
  ASSERT_EQ(run_cli({"--zero-dir", zd, "--height", "60", "zeros", "compute", "--q", "4"}).code, cli::exit_ok);
  auto ok = run_cli({"--zero-dir", zd, "--height", "60", "zeros", "verify", "--q", "4"});
  EXPECT_EQ(ok.code, cli::exit_ok) << ok.out;

  const auto path = lzeros::zero_file_path(dir.path(), 4, 3, 60.0);
  std::string text = slurp(path);
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos, "4,3,oops,1e-8\n");
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text;

  auto bad = run_cli({"--zero-dir", zd, "--height", "60", "zeros", "verify", "--q", "4"});
  EXPECT_EQ(bad.code, cli::exit_check_failed);
  EXPECT_EQ(lines_with(bad.out, "FAIL").size(), 2u) << bad.out;
  EXPECT_EQ(lines_with(bad.out, ":5:").size(), 1u) << bad.out;
}

TEST(Cli, CorruptZeroFileIsADataError) {
  race::testing::ScratchDir dir("cli-data-error");
  const auto path = lzeros::zero_file_path(dir.path(), 5, 2, 1000.0);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << lzeros::kZeroFileHeader << "\n5,2,zz,1e-8\n";
  const auto r = run_cli({"--zero-dir", dir.path().string(), "covariance", "--q", "5", "--classes", "1,2"});
  EXPECT_EQ(r.code, cli::exit_data);
  EXPECT_NE(r.err.find("parse-error"), std::string::npos) << r.err;
}

TEST(Cli, VerifySuitePassesAndLocalizesFaults) {
  const auto good = run_cli(with_cache({"verify-paper"}));
  EXPECT_EQ(good.code, cli::exit_ok) << good.out;
  EXPECT_TRUE(lines_with(good.out, "FAIL ").empty()) << good.out;
  EXPECT_FALSE(lines_with(good.out, "SKIP racemodel.decay-envelope").empty());
  EXPECT_EQ(lines_with(good.out, "summary:").size(), 1u);

  // Copy the shared cache and corrupt the mod-4 zero file: only checks reading it may fail.
  race::testing::ScratchDir dir("cli-fault");
  std::filesystem::copy(race::testing::zero_dir(), dir.path(), std::filesystem::copy_options::recursive);
  for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "q4")) {
    std::string text = slurp(entry.path());
    const auto second_row = text.find('\n', text.find('\n') + 1) + 1;
    text.insert(second_row, "4,3,-1,1e-8\n");
    std::ofstream(entry.path(), std::ios::binary | std::ios::trunc) << text;
  }
  const auto bad = run_cli({"--zero-dir", dir.path().string(), "verify-paper"});
  EXPECT_EQ(bad.code, cli::exit_check_failed);
  const auto failures = lines_with(bad.out, "FAIL ");
  ASSERT_FALSE(failures.empty()) << bad.out;
  for (const auto& line : failures) EXPECT_EQ(line.rfind("FAIL spectrum.q4-", 0), 0u) << line;
}
