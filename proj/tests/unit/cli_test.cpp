#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>

#include "gcm/dataset_io.hpp"
#include "gcm/model.hpp"
#include "test_util.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("'") + GCM_CLI_PATH + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class Cli : public ::testing::Test {
 protected:
  gcm::test::TempDir dir{"cli"};

  void synth(const std::string& name, int seed) {
    ASSERT_EQ(run("synth --preset easy --n-pos 20 --n-neg 60 --seed " + std::to_string(seed) + " --out " +
                  q(dir / name)),
              0);
  }
};

TEST_F(Cli, SynthIsDeterministic) {
  synth("a.bin", 7);
  synth("b.bin", 7);
  EXPECT_EQ(slurp(dir / "a.bin"), slurp(dir / "b.bin"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a.bin.manifest.json"));
  ASSERT_EQ(run("synth --preset easy --n-pos 5 --n-neg 5 --seed 7 --out " + q(dir / "t.csv")), 0);
  EXPECT_EQ(slurp(dir / "t.csv").rfind("group_id,label,is_key,", 0), 0u);
}

TEST_F(Cli, ArgumentErrorsExitWithUsageCode) {
  synth("d.bin", 1);
  EXPECT_EQ(run("train --data " + q(dir / "d.bin") + " --lambda 1.5 --out " + q(dir / "m.json")), 2);
  EXPECT_EQ(run("train --data " + q(dir / "d.bin") + " --algo bogus --out " + q(dir / "m.json")), 2);
  EXPECT_EQ(run("cv --data " + q(dir / "d.bin") + " --folds 1 --out " + q(dir / "cv.csv")), 2);
  EXPECT_EQ(run("train --out " + q(dir / "m.json")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, DataErrorsExitWithDataCode) {
  EXPECT_EQ(run("train --data " + q(dir / "missing.bin") + " --out " + q(dir / "m.json")), 3);
  std::ofstream(dir / "bad.csv") << "group_id,label,is_key,f1\n4,1,0,0.5\n5,-1,0,1\n";
  EXPECT_EQ(run("train --data " + q(dir / "bad.csv") + " --out " + q(dir / "m.json")), 3);
  // A model trained on 13 features cannot score 2-feature data.
  synth("d.bin", 2);
  ASSERT_EQ(run("train --data " + q(dir / "d.bin") + " --out " + q(dir / "m.json")), 0);
  std::ofstream(dir / "narrow.csv") << "group_id,label,is_key,f1,f2\n1,1,1,0,0\n2,-1,0,1,1\n";
  EXPECT_EQ(run("evaluate --model " + q(dir / "m.json") + " --data " + q(dir / "narrow.csv") + " --report " +
                q(dir / "r.csv")),
            3);
}

TEST_F(Cli, TrainEvaluateRoundTrip) {
  synth("train.bin", 3);
  synth("test.bin", 4);
  for (const char* algo : {"gcm", "gcm-nogroup", "svm", "misvm"}) {
    ASSERT_EQ(run("train --data " + q(dir / "train.bin") + " --algo " + algo + " --out " + q(dir / "m.json")), 0)
        << algo;
  }
  ASSERT_EQ(run("train --data " + q(dir / "train.bin") + " --algo svm --delta 0 --out " + q(dir / "svm.json")), 0);
  const std::string manifest = slurp(dir / "m.json.manifest.json");
  EXPECT_NE(manifest.find("\"termination\""), std::string::npos);
  EXPECT_NE(manifest.find("\"wall_clock_seconds\""), std::string::npos);

  ASSERT_EQ(run("train --data " + q(dir / "train.bin") + " --expand-degree 2 --standardize --out " +
                q(dir / "poly.json")),
            0);
  const std::string eval = "evaluate --model " + q(dir / "poly.json") + " --data " + q(dir / "test.bin");
  ASSERT_EQ(run(eval + " --report " + q(dir / "r1.csv") + " --groups " + q(dir / "g1.csv")), 0);
  ASSERT_EQ(run(eval + " --report " + q(dir / "r2.csv") + " --groups " + q(dir / "g2.csv")), 0);
  EXPECT_EQ(slurp(dir / "r1.csv"), slurp(dir / "r2.csv"));
  EXPECT_EQ(slurp(dir / "g1.csv"), slurp(dir / "g2.csv"));
  EXPECT_EQ(run("train --data " + q(dir / "train.bin") + " --expand-degree 3 --max-features 50 --out " +
                q(dir / "wide.json")),
            2);
}

TEST_F(Cli, PerfectSeparationReportsUnitGroupAuc) {
  std::ofstream(dir / "sep.csv") << "group_id,label,is_key,f1\n"
                                    "1,1,1,3\n1,1,0,-5\n2,1,1,2.5\n"
                                    "3,-1,0,-1\n3,-1,0,-2\n4,-1,0,0.5\n";
  ASSERT_EQ(run("train --data " + q(dir / "sep.csv") + " --lambda 0.9 --out " + q(dir / "m.json")), 0);
  ASSERT_EQ(run("evaluate --model " + q(dir / "m.json") + " --data " + q(dir / "sep.csv") + " --report " +
                q(dir / "r.csv") + " --groups " + q(dir / "g.csv")),
            0);
  EXPECT_NE(slurp(dir / "r.csv").find("group_auc=1\n"), std::string::npos);
  // Group 1's best row is its key at 3 (row 0 after sorting by group id).
  const std::string groups = slurp(dir / "g.csv");
  const auto start = groups.find("\n1,+1,");
  ASSERT_NE(start, std::string::npos);
  const std::string line = groups.substr(start + 1, groups.find('\n', start + 1) - start - 1);
  EXPECT_EQ(line.substr(line.rfind(',')), ",0");
}

TEST_F(Cli, CvCompareAndReplay) {
  synth("train.bin", 5);
  synth("test.bin", 6);
  ASSERT_EQ(run("cv --data " + q(dir / "train.bin") + " --folds 3 --lambda-grid 0.2,0.8 --out " + q(dir / "cv.csv")),
            0);
  const std::string cv = slurp(dir / "cv.csv");
  EXPECT_EQ(cv.rfind("lambda,mean_group_auc,mean_candidate_auc,folds_used\n", 0), 0u);
  EXPECT_NE(cv.find("# selected lambda="), std::string::npos);

  ASSERT_EQ(run("compare --train " + q(dir / "train.bin") + " --test " + q(dir / "test.bin") + " --out " +
                q(dir / "cmp.csv")),
            0);
  const std::string cmp = slurp(dir / "cmp.csv");
  for (const char* algo : {"\ngcm,", "\ngcm-nogroup,", "\nsvm,", "\nmisvm,"}) EXPECT_NE(cmp.find(algo), std::string::npos);

  const std::string before = slurp(dir / "cv.csv");
  std::filesystem::remove(dir / "cv.csv");
  ASSERT_EQ(run("run " + q(dir / "cv.csv.manifest.json")), 0);
  EXPECT_EQ(slurp(dir / "cv.csv"), before);
}

TEST_F(Cli, ThreadCountFromEnvironment) {
  synth("d.bin", 8);
  ASSERT_EQ(setenv("GCM_THREADS", "2", 1), 0);
  const int code = run("train --data " + q(dir / "d.bin") + " --out " + q(dir / "m.json"));
  unsetenv("GCM_THREADS");
  ASSERT_EQ(code, 0);
  EXPECT_NE(slurp(dir / "m.json.manifest.json").find("\"threads\": 2"), std::string::npos);
}

}  // namespace
