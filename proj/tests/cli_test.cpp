#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("dialweight_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(DIALWEIGHT_CLI) + " " + args + " > /dev/null 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // A configuration small enough for the CLI tests to train in moments.
  fs::path tiny_config() const {
    const fs::path p = path("tiny.ini");
    spit(p,
         "[weighter]\nembedding_dim = 4\nhidden_dim = 4\nmerge_dim = 4\nepochs = 1\n"
         "[dual_encoder]\nembedding_dim = 4\nhidden_dim = 4\nprojection_dim = 4\nepochs = 1\n"
         "[eval]\nm = 2\nat = 1,2\n");
    return p;
  }

  fs::path dir_;
};

const fs::path kData = DIALWEIGHT_DATA_DIR;

TEST_F(Cli, ToyCorpusManifestMatchesGolden) {
  const Outcome r = run("prepare " + (kData / "toy_dialogues.jsonl").string() + " --out " + path("prep").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = nlohmann::json::parse(slurp(path("prep") / "manifest.json"));
  const auto golden = nlohmann::json::parse(slurp(kData / "toy_manifest.golden.json"));
  EXPECT_EQ(manifest, golden) << manifest.dump(2);
}

TEST_F(Cli, EmptyInputGivesEmptyOutputsAndZeroCounts) {
  spit(path("empty.jsonl"), "");
  const Outcome r = run("prepare " + path("empty.jsonl").string() + " --out " + path("prep").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("prep") / "pairs.jsonl"), "");
  EXPECT_EQ(slurp(path("prep") / "high_quality.jsonl"), "");
  const auto manifest = nlohmann::json::parse(slurp(path("prep") / "manifest.json"));
  EXPECT_EQ(manifest["dialogues"], 0);
  EXPECT_EQ(manifest["pairs"], 0);
  EXPECT_EQ(manifest["high_quality"], 0);
  EXPECT_TRUE(manifest["rejections"].empty());
}

TEST_F(Cli, CorruptedLineIsADataErrorNamingTheLine) {
  std::string text = slurp(kData / "toy_dialogues.jsonl");
  std::istringstream in(text);
  std::string line, out;
  for (int n = 1; std::getline(in, line); ++n) out += (n == 3 ? line.substr(0, line.size() / 2) : line) + "\n";
  spit(path("broken.jsonl"), out);
  const Outcome r = run("prepare " + path("broken.jsonl").string() + " --out " + path("prep").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(Cli, SchemaViolationIsADataError) {
  spit(path("bad.jsonl"), R"({"id":"x","utterances":[{"tokens":"not a list"}]})" "\n");
  const Outcome r = run("prepare " + path("bad.jsonl").string() + " --out " + path("prep").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("prepare --no-such-flag").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  spit(path("bad.ini"), "[weighter]\nhidden = 3\n");
  const Outcome r = run("--config " + path("bad.ini").string() + " synth --out " + path("s").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("weighter.hidden"), std::string::npos) << r.err;
}

TEST_F(Cli, NonFiniteParametersExitWithThree) {
  ASSERT_EQ(run("prepare " + (kData / "toy_dialogues.jsonl").string() + " --out " + path("prep").string()).code, 0);
  // Without epsilon, RMSProp computes 0/0 for embedding rows no batch touched.
  spit(path("eps.ini"), "[dual_encoder]\nembedding_dim = 4\nhidden_dim = 4\nprojection_dim = 4\nepochs = 1\nepsilon = 0\n");
  const Outcome r = run("--config " + path("eps.ini").string() + " train --pairs " +
                        (path("prep") / "pairs.jsonl").string() + " --out " + path("de.ckpt").string());
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_FALSE(fs::exists(path("de.ckpt")));
}

TEST_F(Cli, VocabularyMismatchIsADataError) {
  const std::string toy = (kData / "toy_dialogues.jsonl").string();
  ASSERT_EQ(run("prepare " + toy + " --out " + path("a").string()).code, 0);
  spit(path("other.jsonl"),
       R"({"id":"o","utterances":[{"tokens":["hello","there"],"speaker":"A"},{"tokens":["general","kenobi"],"speaker":"B"}]})"
       "\n");
  ASSERT_EQ(run("prepare " + path("other.jsonl").string() + " --out " + path("b").string()).code, 0);
  const Outcome r = run("evaluate --tfidf " + (path("a") / "tfidf.json").string() + " --pairs " +
                    (path("b") / "pairs.jsonl").string() + " --m 2 --at 1 --out " + path("r.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("vocabulary"), std::string::npos) << r.err;
}

// The whole chain on the toy corpus, run twice: every artifact must come out
// byte-identical.
TEST_F(Cli, PipelineRerunIsByteIdentical) {
  const std::string cfg = "--config " + tiny_config().string() + " --seed 5 ";
  const std::string toy = (kData / "toy_dialogues.jsonl").string();
  auto chain = [&](const fs::path& out) {
    const std::string p = out.string();
    EXPECT_EQ(run(cfg + "prepare " + toy + " --out " + p).code, 0);
    EXPECT_EQ(run(cfg + "train-weighter --positives " + p + "/pairs.jsonl --pool " + p + "/pairs.jsonl --out " + p +
                  "/weighter.ckpt")
                  .code,
              0);
    EXPECT_EQ(run(cfg + "weigh --model " + p + "/weighter.ckpt --pairs " + p + "/pairs.jsonl --out " + p +
                  "/weighed.jsonl")
                  .code,
              0);
    EXPECT_EQ(run(cfg + "train --pairs " + p + "/pairs.jsonl --weights-from " + p + "/weighed.jsonl --validation " + p +
                  "/pairs.jsonl --curve " + p + "/curve.csv --out " + p + "/de.ckpt")
                  .code,
              0);
    EXPECT_EQ(run(cfg + "evaluate --model " + p + "/de.ckpt --pairs " + p + "/pairs.jsonl --curve " + p +
                  "/curve.csv --out " + p + "/de.json")
                  .code,
              0);
    EXPECT_EQ(run(cfg + "evaluate --tfidf " + p + "/tfidf.json --pairs " + p + "/pairs.jsonl --out " + p + "/tfidf.json.report")
                  .code,
              0);
    EXPECT_EQ(run(cfg + "report " + p + "/tfidf.json.report " + p + "/de.json --out " + p + "/report").code, 0);
  };
  chain(path("one"));
  chain(path("two"));
  for (const char* f : {"manifest.json", "weighter.ckpt", "weighed.jsonl", "de.ckpt", "curve.csv", "de.json",
                        "tfidf.json.report", "report/table.txt", "report/table.json", "report/curve_de.csv"}) {
    ASSERT_TRUE(fs::exists(path("one") / f)) << f;
    EXPECT_EQ(slurp(path("one") / f), slurp(path("two") / f)) << f;
  }
}

TEST_F(Cli, ReportRejectsMismatchedRankLists) {
  const std::string toy = (kData / "toy_dialogues.jsonl").string();
  ASSERT_EQ(run("prepare " + toy + " --out " + path("p").string()).code, 0);
  const std::string base = "evaluate --tfidf " + path("p").string() + "/tfidf.json --pairs " + path("p").string() +
                           "/pairs.jsonl --m 3 ";
  ASSERT_EQ(run(base + "--at 1,2 --out " + path("a.json").string()).code, 0);
  ASSERT_EQ(run(base + "--at 1 --out " + path("b.json").string()).code, 0);
  EXPECT_EQ(run("report " + path("a.json").string() + " " + path("a.json").string() + " --out " + path("r").string()).code,
            0);
  EXPECT_EQ(run("report " + path("a.json").string() + " " + path("b.json").string() + " --out " + path("r").string()).code,
            1);
}

}  // namespace
