#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("recode_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(std::string const& name) const { return (dir_ / name).string(); }

  // Runs the CLI with stdout and stderr captured to files and returns the exit code.
  int run(std::string const& args) {
    std::string const cmd = std::string("\"") + RECODE_CLI_PATH + "\" " + args + " >\"" + path("stdout") +
                            "\" 2>\"" + path("stderr") + "\"";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(std::string const& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  void put(std::string const& name, std::string const& text) const {
    std::ofstream out(path(name), std::ios::binary);
    out << text;
  }

  fs::path dir_;
};

std::vector<double> lines_as_doubles(std::string const& text) {
  std::vector<double> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(std::stod(line));
  return out;
}

TEST_F(Cli, DitheredRoundTrip) {
  put("in.txt", "0\n3.25\n\n15\n7.5\n");
  ASSERT_EQ(run("encode --mechanism uniform-additive --params 16 --codec dq --seed 5 --in " + path("in.txt") +
                " --out " + path("c.recb")),
            0)
      << slurp("stderr");
  ASSERT_EQ(run("decode --in " + path("c.recb") + " --out " + path("out.txt")), 0) << slurp("stderr");
  auto const ys = lines_as_doubles(slurp("out.txt"));
  std::vector<double> const xs = {0, 3.25, 15, 7.5};
  ASSERT_EQ(ys.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_GT(ys[i] - xs[i], -0.5);
    EXPECT_LE(ys[i] - xs[i], 0.5);
  }
}

TEST_F(Cli, EmptyInputAndRepeatableBytes) {
  put("empty.txt", "");
  ASSERT_EQ(run("encode --mechanism uniform-additive --codec pfr --in " + path("empty.txt") + " --out " +
                path("e.recb")),
            0);
  ASSERT_EQ(run("decode --in " + path("e.recb") + " --out " + path("e.txt")), 0);
  EXPECT_EQ(slurp("e.txt"), "");

  put("in.txt", "1\n2\n3\n4\n5\n");
  std::string const enc = "encode --mechanism uniform-additive --codec pfr --seed 9 --in " + path("in.txt");
  ASSERT_EQ(run(enc + " --out " + path("a.recb")), 0);
  ASSERT_EQ(run(enc + " --out " + path("b.recb")), 0);
  EXPECT_EQ(slurp("a.recb"), slurp("b.recb"));
}

TEST_F(Cli, CorruptContainerIsAFormatError) {
  put("in.txt", "1\n2\n");
  ASSERT_EQ(run("encode --mechanism uniform-additive --codec dq --in " + path("in.txt") + " --out " + path("c.recb")),
            0);
  auto bytes = slurp("c.recb");
  bytes[0] = 'X';
  put("bad.recb", bytes);
  EXPECT_EQ(run("decode --in " + path("bad.recb")), 2);
  EXPECT_NE(slurp("stderr").find("magic"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  put("in.txt", "0.5\n");
  std::string const in = " --in " + path("in.txt") + " --out " + path("o.recb");
  EXPECT_EQ(run("encode --mechanism uniform-additive --codec zip" + in), 2);
  EXPECT_EQ(run("encode --mechanism categorical --codec dq" + in), 2);
  EXPECT_EQ(run("encode --mechanism gaussian-gaussian --codec pfr" + in), 2);
  EXPECT_EQ(run("encode --mechanism gaussian-gaussian --codec pfr --approximate" + in), 2);
  EXPECT_EQ(run("encode --mechanism gaussian-gaussian --codec pfr --budget 100000" + in), 0) << slurp("stderr");
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, BadRecordLineAndOutOfSupportRecord) {
  put("bad.txt", "1\nnot-a-number\n");
  EXPECT_EQ(run("encode --mechanism uniform-additive --codec dq --in " + path("bad.txt")), 2);
  EXPECT_NE(slurp("stderr").find("line 2"), std::string::npos);
  put("far.txt", "1\n100\n");
  EXPECT_EQ(run("encode --mechanism uniform-additive --codec dq --in " + path("far.txt")), 3);
  EXPECT_NE(slurp("stderr").find("record 1"), std::string::npos);
}

TEST_F(Cli, VerifySingleSuite) {
  EXPECT_EQ(run("verify --suite theorem1"), 0) << slurp("stdout");
  auto const out = slurp("stdout");
  EXPECT_NE(out.find("PASS"), std::string::npos);
  EXPECT_NE(out.find("theorem1"), std::string::npos);
  EXPECT_EQ(out.find("determinism"), std::string::npos);
  EXPECT_EQ(run("verify --suite no-such-suite"), 2);
}

TEST_F(Cli, VerifyCatchesInjectedFault) {
  EXPECT_EQ(run("verify --suite channel --inject-fault"), 1);
  EXPECT_NE(slurp("stdout").find("FAIL"), std::string::npos);
}

TEST_F(Cli, BenchSingleCellCsv) {
  ASSERT_EQ(run("bench --mechanism uniform-additive --params 4 --codec dq --trials 1000 --out " + path("b.csv")), 0)
      << slurp("stderr");
  auto const csv = slurp("b.csv");
  EXPECT_EQ(csv.rfind("name,value,stderr,n\n", 0), 0u);
  EXPECT_NE(csv.find("uniform-additive(L=4)/dq/payload_bits,3,0,1000\n"), std::string::npos);
}

}  // namespace
