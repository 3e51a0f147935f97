// Runs the prema executable end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("prema_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliRun run(const std::string& args) const {
    const std::string err_file = path("stderr.txt");
    const std::string cmd = std::string(PREMA_CLI) + " " + args + " 2>" + err_file;
    CliRun r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read(err_file);
    return r;
  }

  static std::string read(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::size_t lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
  }

  // Small fault and RUL models shared by several tests.
  void train_models() {
    ASSERT_EQ(run("gen-dataset --task fault --counts 60 20 20 40 --seed 1 --out " +
                  path("fault.csv")).code, 0);
    ASSERT_EQ(run("gen-dataset --task rul --valves 2 --seed 2 --out " +
                  path("rul.csv")).code, 0);
    ASSERT_EQ(run("train --task fault --epochs 10 --seed 3 --data " + path("fault.csv") +
                  " --out " + path("fault.pmnn")).code, 0);
    ASSERT_EQ(run("train --task rul --epochs 5 --seed 4 --data " + path("rul.csv") +
                  " --out " + path("rul.pmnn")).code, 0);
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("simulate --fault broken").code, 2);
  EXPECT_EQ(run("extract").code, 2);
  EXPECT_EQ(run("timing --k 1000").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, SimulateThenExtract) {
  const CliRun sim = run("simulate --cycles 3 --seed 5 --out " + path("t.csv"));
  ASSERT_EQ(sim.code, 0) << sim.err;
  const CliRun ext = run("extract --in " + path("t.csv"));
  ASSERT_EQ(ext.code, 0) << ext.err;
  EXPECT_EQ(ext.out.rfind("zero_index,di_dt,auc\n", 0), 0u);
  EXPECT_EQ(lines(ext.out), 4u);
  const CliRun full = run("extract --full --in " + path("t.csv"));
  EXPECT_NE(full.out.find("ecv_lower_avg"), std::string::npos);
}

TEST_F(CliTest, FlatTraceExtractsNoRows) {
  std::ofstream f(path("flat.csv"));
  f << "t_ms,current_mA\n";
  for (int n = 0; n < 500; ++n) f << n << ",0\n";
  f.close();
  const CliRun r = run("extract --in " + path("flat.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "zero_index,di_dt,auc\n");
}

TEST_F(CliTest, TruncatedTraceNamesTheLine) {
  std::ofstream f(path("cut.csv"));
  f << "t_ms,current_mA\n0,0\n1,0\n2,";
  f.close();
  const CliRun r = run("extract --in " + path("cut.csv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  EXPECT_EQ(run("extract --in " + path("missing.csv")).code, 1);
}

TEST_F(CliTest, TrainingIsReproducible) {
  ASSERT_EQ(run("gen-dataset --counts 30 10 10 20 --seed 9 --out " + path("d.csv")).code, 0);
  const std::string common = "train --task fault --epochs 5 --seed 42 --data " + path("d.csv");
  ASSERT_EQ(run(common + " --out " + path("a.pmnn")).code, 0);
  ASSERT_EQ(run(common + " --out " + path("b.pmnn")).code, 0);
  const std::string a = read(path("a.pmnn"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, read(path("b.pmnn")));
  EXPECT_EQ(read(path("a.pmnn.history.csv")).rfind("epoch,train_loss,val_loss\n", 0), 0u);
  EXPECT_EQ(lines(read(path("a.pmnn.history.csv"))), 6u);
  // RUL task on class targets is a usage error.
  EXPECT_EQ(run("train --task rul --data " + path("d.csv") + " --out " + path("c.pmnn")).code, 2);
}

TEST_F(CliTest, CorruptedModelIsRejected) {
  train_models();
  std::string bytes = read(path("fault.pmnn"));
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(path("bad.pmnn"), std::ios::binary) << bytes;
  const CliRun r = run("eval --model " + path("bad.pmnn") + " --data " + path("fault.csv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("CRC"), std::string::npos) << r.err;
  const CliRun ok = run("eval --model " + path("fault.pmnn") + " --data " + path("fault.csv"));
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("\"accuracy\""), std::string::npos);
}

TEST_F(CliTest, InferPrintsProbabilities) {
  train_models();
  const CliRun r = run("infer --model " + path("fault.pmnn") + " --di-dt 10 --auc 150");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fault_probs"), std::string::npos);
  EXPECT_EQ(run("infer --model " + path("fault.pmnn")).code, 2);
}

TEST_F(CliTest, VirtualMonitorIsReproducible) {
  train_models();
  const std::string cmd = "monitor --fault-model " + path("fault.pmnn") +
                          " --rul-model " + path("rul.pmnn") +
                          " --scenario degradation --stride 50 --k 2000 --seed 3";
  const CliRun a = run(cmd);
  const CliRun b = run(cmd);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out), 31u);  // 30 events and the timing report
  EXPECT_NE(a.out.find("\"type\":\"timing_report\""), std::string::npos);
  EXPECT_EQ(a.out.find("wall_"), std::string::npos);
  EXPECT_NE(run(cmd + " --wall-timing").out.find("wall_"), std::string::npos);
}

TEST_F(CliTest, MonitorOnAFlatTraceHasNoEvents) {
  train_models();
  std::ofstream f(path("flat.csv"));
  f << "t_ms,current_mA\n";
  for (int n = 0; n < 3000; ++n) f << n << ",0\n";
  f.close();
  const CliRun r = run("monitor --fault-model " + path("fault.pmnn") + " --rul-model " +
                    path("rul.pmnn") + " --k 1000 --scenario " + path("flat.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), 1u);
  EXPECT_NE(r.out.find("\"lossless\":true"), std::string::npos);
}

TEST_F(CliTest, TimingListsReferenceConfigurations) {
  const CliRun r = run("timing");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out), 11u);
  const CliRun one = run("timing --k 2000 --fop 0.5");
  EXPECT_NE(one.out.find("\"b_fd_us\":2000000"), std::string::npos) << one.out;
}

}  // namespace
