#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace shape_gate;
using namespace shape_gate::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " " SHAPE_GATE_CLI " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("shape_gate_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    // three separated objects: bar, disk, square
    BinaryImage bin(160, 120);
    for (const auto& b : {rect_blob(10, 10, 60, 4), disk_blob(110, 40, 18), rect_blob(30, 70, 30, 30)})
      for (auto p : b.pixels()) bin.set(p.x, p.y);
    write_pgm((dir / "scene.pgm").string(), to_gray(bin));
    write_manifest(dir / "scene.manifest", {"scene.pgm", {"pencil", "plate", "box"}});
    write_manifest(dir / "bad.manifest", {"scene.pgm", {"pencil", "plate"}});

    BinaryImage novel(100, 100);
    for (auto p : rotated_rect_blob(50, 50, 50, 50, 0.0).pixels())
      if (p.x - 25 > p.y - 25) novel.set(p.x, p.y);  // right triangle, untrained
    write_pgm((dir / "novel.pgm").string(), to_gray(novel));
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string p(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_F(Cli, TrainDetectAndStats) {
  const auto t = run("train " + p("db.json") + " " + p("scene.manifest"));
  ASSERT_EQ(t.code, 0) << t.out;
  const Database db = load_database(p("db.json"));
  EXPECT_GE(db.index.clusters().size(), 1u);
  EXPECT_EQ(db.index.member_count(), 3u);

  const auto d = run("detect " + p("db.json") + " " + p("scene.pgm"));
  EXPECT_EQ(d.code, 0) << d.out;
  EXPECT_NE(d.out.find("Detected pencil"), std::string::npos) << d.out;
  EXPECT_NE(d.out.find("Detected plate"), std::string::npos) << d.out;
  EXPECT_NE(d.out.find("Detected box"), std::string::npos) << d.out;

  const auto s = run("db-stats " + p("db.json"));
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("3 clusters"), std::string::npos) << s.out;
  EXPECT_NE(s.out.find("consistency: OK"), std::string::npos);
}

TEST_F(Cli, TrainingTwiceDoublesMembers) {
  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  const auto before = load_database(p("db.json")).index.clusters().size();
  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  const auto db = load_database(p("db.json"));
  EXPECT_EQ(db.index.member_count(), 6u);
  EXPECT_EQ(db.index.clusters().size(), before);
}

TEST_F(Cli, LabelMismatchExitsTwoAndLeavesDatabaseAlone) {
  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  const std::string before = slurp(p("db.json"));
  const auto r = run("train " + p("db.json") + " " + p("scene.manifest") + " " + p("bad.manifest"));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_EQ(slurp(p("db.json")), before);

  const auto fresh = run("train " + p("new.json") + " " + p("bad.manifest"));
  EXPECT_EQ(fresh.code, 2);
  EXPECT_FALSE(fs::exists(p("new.json")));
}

TEST_F(Cli, NovelShapeExitsThree) {
  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  const auto r = run("detect " + p("db.json") + " " + p("novel.pgm"));
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("NewObject"), std::string::npos);
}

TEST_F(Cli, ExhaustiveAgreesAndJsonLinesParse) {
  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  const auto g = run("detect --json " + p("db.json") + " " + p("scene.pgm"));
  const auto e = run("detect --json --exhaustive " + p("db.json") + " " + p("scene.pgm"));
  ASSERT_EQ(g.code, 0);
  ASSERT_EQ(e.code, 0);
  std::istringstream gi(g.out), ei(e.out);
  std::string gl, el;
  int n = 0;
  while (std::getline(gi, gl) && std::getline(ei, el)) {
    const auto gj = nlohmann::json::parse(gl), ej = nlohmann::json::parse(el);
    EXPECT_EQ(gj["label"], ej["label"]);
    EXPECT_LE(gj["members_compared"].get<int>(), ej["members_compared"].get<int>());
    ++n;
  }
  EXPECT_EQ(n, 3);
}

TEST_F(Cli, ConfigMismatchExitsFour) {
  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  std::ofstream(p("other.toml")) << "[scale]\ncount = 6\n";
  const auto r = run("--config " + p("other.toml") + " detect " + p("db.json") + " " + p("scene.pgm"));
  EXPECT_EQ(r.code, 4) << r.out;
  const auto env = run("detect " + p("db.json") + " " + p("scene.pgm"), "SHAPE_GATE_CONFIG=" + p("other.toml"));
  EXPECT_EQ(env.code, 4) << env.out;
  // the flag outranks the environment
  std::ofstream(p("same.toml")) << "[detect]\ntau = 0.3\n";
  const auto both = run("--config " + p("same.toml") + " detect " + p("db.json") + " " + p("scene.pgm"),
                        "SHAPE_GATE_CONFIG=" + p("other.toml"));
  EXPECT_EQ(both.code, 0) << both.out;
}

TEST_F(Cli, StatsOnEmptyAndCorruptDatabases) {
  save_database(Database{}, p("empty.json"));
  const auto e = run("db-stats " + p("empty.json"));
  EXPECT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("0 clusters"), std::string::npos) << e.out;

  ASSERT_EQ(run("train " + p("db.json") + " " + p("scene.manifest")).code, 0);
  std::string text = slurp(p("db.json"));
  const auto pos = text.find("\"checksum\": \"");
  ASSERT_NE(pos, std::string::npos);
  char& c = text[pos + 13];
  c = c == '0' ? '1' : '0';
  std::ofstream(p("db.json"), std::ios::binary) << text;
  EXPECT_EQ(run("db-stats " + p("db.json")).code, 5);
  EXPECT_EQ(run("detect " + p("db.json") + " " + p("scene.pgm")).code, 5);
}

TEST_F(Cli, GenCorpusIsDeterministicAndComplete) {
  ASSERT_EQ(run("gen-corpus " + p("a") + " --seed 7 --per-class 3").code, 0);
  ASSERT_EQ(run("gen-corpus " + p("b") + " --seed 7 --per-class 3").code, 0);
  int pgm = 0, manifests = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / name)) << name;
    pgm += entry.path().extension() == ".pgm";
    manifests += entry.path().extension() == ".manifest";
  }
  EXPECT_EQ(pgm, 21);
  EXPECT_EQ(manifests, 21);
  EXPECT_TRUE(fs::exists(dir / "a" / "queries.list"));
  EXPECT_TRUE(fs::exists(dir / "a" / "truth.csv"));

  ASSERT_EQ(run("gen-corpus " + p("c") + " --seed 8 --per-class 3").code, 0);
  EXPECT_NE(slurp(dir / "a" / "circle_000.pgm"), slurp(dir / "c" / "circle_000.pgm"));
  EXPECT_EQ(run("gen-corpus " + p("d") + " --classes circle,hexagon").code, 1);
}

TEST_F(Cli, BenchWritesCsvRows) {
  ASSERT_EQ(run("gen-corpus " + p("corpus") + " --seed 3 --per-class 2").code, 0);
  std::string manifests;
  for (const auto& entry : fs::directory_iterator(dir / "corpus"))
    if (entry.path().extension() == ".manifest") manifests += " " + entry.path().string();
  ASSERT_EQ(run("train " + p("db.json") + manifests).code, 0);
  const auto r = run("bench " + p("db.json") + " " + p("corpus/queries.list") + " --repeats 3 --inner 2 --csv " +
                     p("bench.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("speedup"), std::string::npos);
  std::ifstream csv(p("bench.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 2 * 3 * 14);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("detect").code, 0);
  EXPECT_NE(run("detect " + p("missing.json") + " " + p("scene.pgm")).code, 0);
}
