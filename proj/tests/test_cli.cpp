#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "masksearch/catalog.hpp"
#include "masksearch/mask.hpp"
#include "test_util.hpp"

using masksearch::testing::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with a shell-quoted argument string.
CliRun cli(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("'") + MASKSEARCH_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, GenerateIndexQueryRoundTrip) {
  TempDir dir;
  const auto data = dir / "data";
  CliRun r = cli(dir, "generate --out " + q(data) + " --images 30 --size 32x32 --seed 4");
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli(dir, "index build --catalog " + q(data / "catalog.jsonl") + " --out " + q(dir / "i.chi") +
                   " --buckets 8 --cell 8x8");
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli(dir, "index stats --index " + q(dir / "i.chi") + " --catalog " + q(data / "catalog.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("entries\t60"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("buckets\t8"), std::string::npos) << r.out;

  r = cli(dir, "query --catalog " + q(data / "catalog.jsonl") + " --index " + q(dir / "i.chi") +
                   " --sql 'SELECT mask_id FROM MasksDatabaseView ORDER BY CP(mask, roi, (0.5, 1.0)) DESC LIMIT 4'"
                   " --param 'roi=((2, 2), (30, 27))' --oracle --stats");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("MATCH"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("total_candidates"), std::string::npos) << r.err;
  int lines = 0;
  std::istringstream rows(r.out);
  for (std::string line; std::getline(rows, line);) {
    ++lines;
    EXPECT_NE(line.find('\t'), std::string::npos) << line;
  }
  EXPECT_EQ(lines, 4);

  r = cli(dir, "query --catalog " + q(data / "catalog.jsonl") + " --mode incremental --json"
                   " --sql 'SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, full_img, (0.5, 1.0)) > 40'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.front(), '{');
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto data = dir / "data";
  ASSERT_EQ(cli(dir, "generate --out " + q(data) + " --images 3 --size 16x16").code, 0);
  EXPECT_EQ(cli(dir, "").code, 2);
  EXPECT_EQ(cli(dir, "frobnicate").code, 2);
  const CliRun parse = cli(dir, "query --catalog " + q(data / "catalog.jsonl") + " --sql 'SELECT mask_id FROM'");
  EXPECT_EQ(parse.code, 2);
  EXPECT_NE(parse.err.find("1:"), std::string::npos) << parse.err;
  EXPECT_EQ(cli(dir, "query --catalog " + q(data / "catalog.jsonl") +
                         " --sql 'SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, ((0,0),(99,2)), (0.5, 1)) > 1'")
                .code,
            2);
  EXPECT_EQ(cli(dir, "query --catalog " + q(dir / "missing.jsonl") + " --sql 'SELECT mask_id FROM MasksDatabaseView'")
                .code,
            3);
  EXPECT_EQ(cli(dir, "index build --catalog " + q(data / "catalog.jsonl") + " --out " + q(dir / "i.chi") +
                         " --buckets 1")
                .code,
            2);
  EXPECT_EQ(cli(dir, "index stats --index " + q(data / "catalog.jsonl")).code, 3);
  EXPECT_EQ(cli(dir, "serve --port 70000").code, 1);
}

TEST(Cli, IngestBuildsCatalogFromDirectory) {
  TempDir dir;
  std::filesystem::create_directories(dir / "in");
  masksearch::save_mask(masksearch::Mask::filled(4, 6, 0.5f), dir / "in" / "7.msk");
  masksearch::save_mask(masksearch::Mask::filled(4, 6, 0.2f), dir / "in" / "8.msk");
  {
    std::ofstream(dir / "meta.csv") << "7,1,1,1\n8,1,2,2\n";
    std::ofstream(dir / "labels.csv") << "1,146,17\n";
    std::ofstream(dir / "rois.csv") << "1,0,0,2,3\n";
  }
  const CliRun r = cli(dir, "ingest --masks " + q(dir / "in") + " --catalog " + q(dir / "cat.jsonl") + " --meta " +
                             q(dir / "meta.csv") + " --labels " + q(dir / "labels.csv") + " --rois " +
                             q(dir / "rois.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto catalog = masksearch::Catalog::load(dir / "cat.jsonl");
  ASSERT_EQ(catalog.masks().size(), 2u);
  EXPECT_EQ(catalog.find_mask(8)->mask_type, 2);
  EXPECT_EQ(catalog.find_mask(7)->width, 6);
  ASSERT_NE(catalog.find_image(1), nullptr);
  EXPECT_EQ(catalog.find_image(1)->true_label, 146);
  EXPECT_EQ(catalog.find_image(1)->object_roi, (masksearch::Roi{0, 0, 2, 3}));

  EXPECT_EQ(cli(dir, "ingest --masks " + q(dir / "absent") + " --catalog " + q(dir / "c2.jsonl")).code, 3);
}

TEST(Cli, BenchReportsComparison) {
  TempDir dir;
  const CliRun r = cli(dir, "bench --synthetic " + q(dir / "syn") +
                             " --images 20 --size 32x32 --queries 6 --compare-naive --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# total_ms"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("# speedup"), std::string::npos) << r.out;
}

TEST(Cli, ServeAnswersAndStopsOnSignal) {
  TempDir dir;
  const int port = 20000 + static_cast<int>(::getpid() % 20000);
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    const std::string port_arg = std::to_string(port);
    const std::string root = (dir / "root").string();
    ::execl(MASKSEARCH_CLI_PATH, MASKSEARCH_CLI_PATH, "serve", "--port", port_arg.c_str(), "--data-root", root.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  httplib::Client client("127.0.0.1", port);
  bool up = false;
  for (int i = 0; i < 100 && !up; ++i) {
    if (auto res = client.Get("/datasets")) {
      up = res->status == 200;
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  EXPECT_TRUE(up);
  ::kill(pid, SIGINT);
  int status = 0;
  ::waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}
