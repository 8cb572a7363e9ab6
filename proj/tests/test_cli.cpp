#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cdslab/cli.hpp"
#include "cdslab/config.hpp"
#include "fixtures.hpp"

using namespace cdslab;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cdslab");
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cdslab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }
  std::string write_config(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }
  static std::string slurp(const fs::path& p) { return read_file(p.string()); }

  fs::path dir_;
};

}  // namespace

TEST(GitBlob, MatchesGitHashObject) {
  // git hash-object of an empty file and of "hello\n"
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_F(CliTest, PriceWritesArtifactsAndManifest) {
  CliRun r = cli({"price", "--config", fixture::config_path("benchmark"), "--paths", "2000", "--steps", "32", "--out",
               out("p")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(slurp(dir_ / "p" / "price.json"));
  for (const char* key : {"c_hat", "mean_f1", "mean_f2", "se_f1", "se_f2", "cov_f12", "se_c", "n_paths", "h", "steps",
                          "faults"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["n_paths"], 2000);
  EXPECT_EQ(slurp(dir_ / "p" / "price.json"), slurp(fs::path(CDSLAB_GOLDEN_DIR) / "benchmark_price.json"));

  auto m = nlohmann::json::parse(slurp(dir_ / "p" / "manifest.json"));
  EXPECT_EQ(m["command"], "price");
  EXPECT_EQ(m["seed"], 20261014);
  EXPECT_EQ(m["sim"]["paths"], 2000);
  EXPECT_EQ(m["config_fingerprint"], git_blob_sha1(read_file(fixture::config_path("benchmark"))));
  std::vector<std::string> listed = m["artifacts"];
  for (const auto& entry : fs::directory_iterator(dir_ / "p")) {
    EXPECT_NE(std::find(listed.begin(), listed.end(), entry.path().filename().string()), listed.end());
  }
  EXPECT_EQ(listed.size(), 3u);
}

TEST_F(CliTest, PriceCsvAppendsUnderOneHeader) {
  for (int i = 0; i < 2; ++i) {
    CliRun r = cli({"price", "--config", fixture::config_path("benchmark"), "--paths", "500", "--steps", "16", "--out",
                 out("p")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  std::istringstream csv(slurp(dir_ / "p" / "price.csv"));
  std::string header, a, b, extra;
  std::getline(csv, header);
  std::getline(csv, a);
  std::getline(csv, b);
  EXPECT_EQ(header, "c_hat,mean_f1,mean_f2,se_f1,se_f2,cov_f12,se_c,n_paths,h,steps,faults");
  EXPECT_EQ(a, b);
  EXPECT_FALSE(std::getline(csv, extra));
}

TEST_F(CliTest, PriceIsBitIdenticalAcrossWorkers) {
  std::string first;
  for (const char* w : {"1", "4", "16"}) {
    CliRun r = cli({"price", "--config", fixture::config_path("benchmark"), "--paths", "3000", "--steps", "32",
                 "--workers", w, "--out", out(std::string("w") + w)});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::string text = slurp(dir_ / (std::string("w") + w) / "price.json");
    if (first.empty()) first = text;
    EXPECT_EQ(text, first) << "workers=" << w;
  }
}

TEST_F(CliTest, FullRecoveryPricesZero) {
  std::string text = read_file(fixture::config_path("benchmark"));
  text.replace(text.find("\"recovery\": 0.4"), 15, "\"recovery\": 1.0");
  CliRun r = cli({"price", "--config", write_config("full.json", text), "--paths", "500", "--out", out("p")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "p" / "price.json"))["c_hat"], 0.0);
}

TEST_F(CliTest, MissingPremiumDatesIsExit2WithField) {
  std::string text = read_file(fixture::config_path("benchmark"));
  auto start = text.find("\"premium_dates\"");
  auto end = text.find(']', start);
  text.erase(start, end - start + 2);
  CliRun r = cli({"price", "--config", write_config("bad.json", text), "--out", out("p")});
  EXPECT_EQ(r.code, kExitInvalid);
  EXPECT_NE(r.err.find("premium_dates"), std::string::npos) << r.err;
}

TEST_F(CliTest, MalformedJsonIsExit2WithLine) {
  CliRun r = cli({"price", "--config", write_config("bad.json", "{\n \"model\": {,\n}"), "--out", out("p")});
  EXPECT_EQ(r.code, kExitInvalid);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;
}

TEST_F(CliTest, DegenerateModelNeedsUnsafeFlag) {
  CliRun r = cli({"price", "--config", fixture::config_path("negative_control"), "--paths", "500", "--out", out("p")});
  EXPECT_EQ(r.code, kExitInvalid);
  CliRun ok = cli({"price", "--config", fixture::config_path("negative_control"), "--paths", "500", "--unsafe-model",
                "--out", out("p")});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
}

TEST_F(CliTest, DegeneratePremiumLegIsExit3) {
  std::string text = read_file(fixture::config_path("benchmark"));
  text.replace(text.find("{\"level\": 70}"), 13, "{\"level\": 150}");
  CliRun r = cli({"price", "--config", write_config("dead.json", text), "--paths", "200", "--out", out("p")});
  EXPECT_EQ(r.code, kExitDegenerate) << r.err;
}

TEST_F(CliTest, FaultedBatchIsExit5) {
  std::string text = read_file(fixture::config_path("benchmark"));
  // coefficients stay bounded; the first up-move of a value near DBL_MAX overflows
  text.replace(text.find("[100, 100, 100, 100]"), 20, "[100, 100, 1.7e308, 100]");
  CliRun r = cli({"price", "--config", write_config("blowup.json", text), "--paths", "200", "--out", out("p")});
  EXPECT_EQ(r.code, kExitFault) << r.err;
}

TEST_F(CliTest, SweepSingleLevelHasEmptyDeltaColumn) {
  CliRun r = cli({"sweep", "--config", fixture::config_path("benchmark"), "--paths", "500", "--steps", "16",
               "--levels", "1", "--assert-convergence", "--out", out("s")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream csv(slurp(dir_ / "s" / "sweep.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header,
            "level,steps,h,c_hat,se_c,abs_delta,delta_se,mean_jump,moment4,simultaneous_rate,premium_hit_rate,"
            "faults,n_paths");
  EXPECT_NE(row.find(",,,"), std::string::npos) << row;
  EXPECT_TRUE(fs::exists(dir_ / "s" / "sweep.json"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "manifest.json"));
}

TEST_F(CliTest, ZeroVolTangencySweepFailsConvergenceAssertion) {
  CliRun r = cli({"sweep", "--config", fixture::config_path("zero_vol_tangency"), "--levels", "6",
               "--assert-convergence", "--unsafe-model", "--out", out("s")});
  EXPECT_EQ(r.code, kExitConvergence) << r.err;
  CliRun plain = cli({"sweep", "--config", fixture::config_path("zero_vol_tangency"), "--levels", "6",
                   "--unsafe-model", "--out", out("t")});
  EXPECT_EQ(plain.code, kExitOk) << plain.err;
}

TEST_F(CliTest, ValidateRunsOracleForSingleName) {
  CliRun r = cli({"validate", "--config", fixture::config_path("single_name"), "--paths", "20000", "--steps", "128",
               "--out", out("v")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(slurp(dir_ / "v" / "validation.json"));
  EXPECT_TRUE(j["ok"].get<bool>());
  ASSERT_EQ(j["oracle"].size(), 1u);
  EXPECT_EQ(j["oracle"][0]["name"], 1);
  CliRun bad = cli({"validate", "--config", fixture::config_path("negative_control"), "--out", out("n")});
  EXPECT_EQ(bad.code, kExitInvalid);
  auto n = nlohmann::json::parse(slurp(dir_ / "n" / "validation.json"));
  EXPECT_EQ(n["assumptions"]["A2_nondegenerate"], "fail");
}

TEST_F(CliTest, TangencyTable) {
  CliRun r = cli({"tangency", "--n-max", "1000", "--out", out("t")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream csv(slurp(dir_ / "t" / "tangency.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "n,shift,hitting_time,expected");
  std::getline(csv, line);
  EXPECT_EQ(line, "0,0,0.5,0.5");
  std::getline(csv, line);
  EXPECT_EQ(line, "1,1,2,2");
}

TEST_F(CliTest, DumpWritesReadablePaths) {
  CliRun r = cli({"dump", "--config", fixture::config_path("benchmark"), "--paths", "3", "--steps", "8", "--out",
               out("d")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  // 3 records of 24 header bytes plus (ceil(6 / (5/8)) + 1) x 4 doubles
  EXPECT_EQ(fs::file_size(dir_ / "d" / "paths.bin"), 3u * (24u + 11u * 4u * 8u));
}

TEST_F(CliTest, UsageErrorsAreExit2) {
  EXPECT_EQ(cli({}).code, kExitInvalid);
  EXPECT_EQ(cli({"price"}).code, kExitInvalid);
  EXPECT_EQ(cli({"price", "--config", "/nonexistent.json"}).code, kExitInvalid);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}
