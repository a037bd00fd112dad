#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "snake/config.hpp"
#include "snake/experiments.hpp"
#include "snake/manifest.hpp"

using namespace snake;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "snake_unit_exp" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}
}  // namespace

TEST(Config, ParseAndOverride) {
  const Config c = Config::from_string("# comment\nM = 10\neps = 0.5, 0.25\nflag = true\nM = 20\n");
  EXPECT_EQ(c.get_int("M", 0), 20);
  EXPECT_EQ(c.get_doubles("eps", {}), (std::vector<double>{0.5, 0.25}));
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_double("missing", 1.5), 1.5);
  EXPECT_THROW(Config::from_string("M = ten").get_int("M", 0), std::invalid_argument);
  EXPECT_THROW(Config::from_string("no equals sign"), std::runtime_error);
}

TEST(Config, IncludeAndCycle) {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "base.cfg") << "M = 5\nd = 5\n";
  std::ofstream(dir / "main.cfg") << "include base.cfg\nM = 7\n";
  const Config c = Config::from_file(dir / "main.cfg");
  EXPECT_EQ(c.get_int("M", 0), 7);
  EXPECT_EQ(c.get_int("d", 0), 5);
  std::ofstream(dir / "a.cfg") << "include b.cfg\n";
  std::ofstream(dir / "b.cfg") << "include a.cfg\n";
  EXPECT_THROW(Config::from_file(dir / "a.cfg"), std::runtime_error);
}

TEST(Config, UnknownKeysRejected) {
  const Config c = Config::from_string("M = 1\nbogus = 2\n");
  try {
    c.require_known({"M"});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(run_experiment("moment-identity", c, RunOptions{}), std::invalid_argument);
}

TEST(Experiments, UnknownNameListsValidOnes) {
  EXPECT_EQ(experiment_names().size(), 11u);
  try {
    run_experiment("no-such-thing", Config{}, RunOptions{});
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const auto& n : experiment_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
  }
}

TEST(Experiments, MomentIdentityIsExact) {
  RunOptions o;
  o.out_dir = scratch("moments");
  const ExperimentResult r = run_experiment("moment-identity", Config::from_string("pairs = 1, 2\nlambdas = 0.1\n"), o);
  ASSERT_FALSE(r.criteria.empty());
  EXPECT_TRUE(r.criteria[0].pass);
  EXPECT_NE(r.criteria[0].detail.find("16/3"), std::string::npos);
  EXPECT_TRUE(r.passed());
}

TEST(Experiments, U1ConstantsD5) {
  RunOptions o;
  o.write_files = false;
  const ExperimentResult r = run_experiment("u1-constants", Config::from_string("dims = 5\n"), o);
  EXPECT_TRUE(r.passed());
  EXPECT_GT(r.metrics.at("c0_d5"), 0.0);
  EXPECT_LT(r.metrics.at("a0_rel_diff_d5"), 0.02);
}

TEST(Experiments, ManifestListsEveryFileWithChecksum) {
  RunOptions o;
  o.out_dir = scratch("manifest");
  o.seed = 5;
  const RunManifest m = run("cube-reference", Config::from_string("M = 20000\ngrid = 40\n"), o);
  std::set<std::string> listed;
  for (const auto& a : m.artifacts) {
    listed.insert(a.path);
    EXPECT_EQ(a.crc32, file_crc32(o.out_dir / a.path));
    EXPECT_EQ(a.bytes, fs::file_size(o.out_dir / a.path));
  }
  for (const auto& e : fs::directory_iterator(o.out_dir)) {
    const std::string name = e.path().filename().string();
    if (name != "manifest.txt") EXPECT_TRUE(listed.count(name)) << name;
  }
  const std::string text = slurp(o.out_dir / "manifest.txt");
  EXPECT_NE(text.find("experiment = cube-reference"), std::string::npos);
  EXPECT_NE(text.find("seed = 5"), std::string::npos);
  EXPECT_NE(text.find("config.M = 20000"), std::string::npos);
}

TEST(Experiments, SameSeedSameCsv) {
  const Config c = Config::from_string("M = 20000\ngrid = 30\n");
  RunOptions a, b;
  a.out_dir = scratch("det_a");
  b.out_dir = scratch("det_b");
  a.seed = b.seed = 9;
  b.workers = 2;
  run("cube-reference", c, a);
  run("cube-reference", c, b);
  EXPECT_EQ(slurp(a.out_dir / "cube_reference.csv"), slurp(b.out_dir / "cube_reference.csv"));
  EXPECT_EQ(slurp(a.out_dir / "metrics.csv"), slurp(b.out_dir / "metrics.csv"));
}

TEST(Csv, HeaderAndWidth) {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.cell(0.1).cell("x");
    w.end_row();
    w.cell(1.0);
    EXPECT_THROW(w.end_row(), std::logic_error);
  }
  EXPECT_EQ(slurp(dir / "t.csv").substr(0, 26), "a,b\n0.10000000000000001,x\n");
}
