#include "support.hpp"

#include <sys/wait.h>

using namespace alpods;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {

struct Run
{
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the CLI with `args` (already shell-quoted where needed).
Run cli(const TempDir& dir, const std::string& args)
{
    const auto out = dir.file("stdout.txt");
    const auto err = dir.file("stderr.txt");
    const std::string command = std::string("'") + ALPODS_CLI_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(command.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::size_t line_count(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Small planted data set and a model trained on it, shared by several tests.
class PlantedCli : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        dir_ = new TempDir("cli_planted");
        const auto gen = cli(*dir_, "gen-synthetic --kind planted --events 300 --cases-per-class 4 --seed 2 --out '" +
                                        dir_->path().string() + "'");
        ASSERT_EQ(gen.code, 0) << gen.err;
        const auto train = cli(*dir_, "train --data '" + data() + "' --out '" + bundle() + "' --threads 1");
        ASSERT_EQ(train.code, 0) << train.err;
    }
    static void TearDownTestSuite()
    {
        delete dir_;
        dir_ = nullptr;
    }
    static std::string data() { return dir_->file("planted.csv"); }
    static std::string bundle() { return dir_->file("model.json"); }

    static TempDir* dir_;
};

TempDir* PlantedCli::dir_ = nullptr;

} // namespace

TEST(Cli, GenIrisWritesBothHalves)
{
    TempDir dir("cli_iris");
    const auto r = cli(dir, "gen-iris --seed 4 --out '" + dir.file("a") + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto train = slurp(dir.file("a/iris_train.csv"));
    const auto test = slurp(dir.file("a/iris_test.csv"));
    EXPECT_EQ(line_count(train), 751u);
    EXPECT_EQ(line_count(test), 751u);
    EXPECT_EQ(cli(dir, "gen-iris --seed 4 --out '" + dir.file("b") + "'").code, 0);
    EXPECT_EQ(slurp(dir.file("b/iris_train.csv")), train);
    EXPECT_EQ(cli(dir, "gen-iris --seed 5 --out '" + dir.file("c") + "'").code, 0);
    EXPECT_NE(slurp(dir.file("c/iris_train.csv")), train);
}

TEST(Cli, UnwritableOutputIsExitTwo)
{
    TempDir dir("cli_io");
    spit(dir.file("blocker"), "x");
    const auto r = cli(dir, "gen-iris --out '" + dir.file("blocker") + "/sub'");
    EXPECT_EQ(r.code, kExitIo);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, BadArgumentsAreExitOne)
{
    TempDir dir("cli_args");
    EXPECT_EQ(cli(dir, "").code, kExitValidation);
    EXPECT_EQ(cli(dir, "no-such-command").code, kExitValidation);
    EXPECT_EQ(cli(dir, "gen-synthetic --kind nope").code, kExitValidation);
    EXPECT_EQ(cli(dir, "train --data x.csv").code, kExitValidation);
}

TEST(Cli, TrainOnSingleClassIsExitOne)
{
    TempDir dir("cli_single");
    spit(dir.file("one.csv"), "case_id,class,x\na,A,1\nb,A,2\nc,A,3\n");
    const auto r = cli(dir, "train --data '" + dir.file("one.csv") + "' --out '" + dir.file("m.json") + "'");
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("need >= 2 classes"), std::string::npos) << r.err;
    EXPECT_FALSE(std::filesystem::exists(dir.file("m.json")));
}

TEST(Cli, MissingInputIsExitTwo)
{
    TempDir dir("cli_missing");
    const auto r = cli(dir, "train --data '" + dir.file("absent.csv") + "' --out '" + dir.file("m.json") + "'");
    EXPECT_EQ(r.code, kExitIo);
}

TEST_F(PlantedCli, TrainWritesBundleAndRuleSheet)
{
    const auto bundle_json = nlohmann::json::parse(slurp(bundle()));
    EXPECT_EQ(bundle_json.at("format"), kBundleFormat);
    EXPECT_TRUE(std::filesystem::exists(dir_->file("model.rules.txt")));
    const auto populations = nlohmann::json::parse(slurp(dir_->file("model.populations.json")));
    EXPECT_GE(populations.size(), 2u);
}

TEST_F(PlantedCli, ClassifyLabelsEveryCase)
{
    const auto r = cli(*dir_, "classify --bundle '" + bundle() + "' --data '" + data() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(r.out), 8u);
    EXPECT_NE(r.out.find("BM_001,BM"), std::string::npos) << r.out;
    EXPECT_NE(r.err.find("accuracy 8/8"), std::string::npos) << r.err;

    const auto j = cli(*dir_, "classify --bundle '" + bundle() + "' --data '" + data() + "' --json --explain");
    ASSERT_EQ(j.code, 0) << j.err;
    const auto records = nlohmann::json::parse(j.out);
    ASSERT_EQ(records.size(), 8u);
    EXPECT_TRUE(records[0].contains("pro"));
}

TEST_F(PlantedCli, ClassifyEmptyFileIsQuiet)
{
    spit(dir_->file("empty.csv"), "");
    auto r = cli(*dir_, "classify --bundle '" + bundle() + "' --data '" + dir_->file("empty.csv") + "'");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    spit(dir_->file("header.csv"), "case_id,class,FS\n\n");
    r = cli(*dir_, "classify --bundle '" + bundle() + "' --data '" + dir_->file("header.csv") + "'");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
}

TEST_F(PlantedCli, ClassifyNamesTheMissingMarker)
{
    spit(dir_->file("short.csv"), "case_id,class,FS,SS\na,BM,1,2\n");
    const auto r = cli(*dir_, "classify --bundle '" + bundle() + "' --data '" + dir_->file("short.csv") + "'");
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("CD34"), std::string::npos) << r.err;
}

TEST_F(PlantedCli, VispanelUnknownPopulationListsKnownIds)
{
    const auto r = cli(*dir_, "vispanel --bundle '" + bundle() + "' --data '" + data() + "' --population 999 --out '" +
                                  dir_->file("vp0") + "'");
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("known ids: 1"), std::string::npos) << r.err;
}

TEST_F(PlantedCli, VispanelExplicitPairs)
{
    const auto r = cli(*dir_, "vispanel --bundle '" + bundle() + "' --data '" + data() +
                                  "' --population 1 --pairs FS,SS --out '" + dir_->file("vp1") + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto manifest = nlohmann::json::parse(slurp(dir_->file("vp1/manifest.json")));
    ASSERT_EQ(manifest.at("pairs").size(), 1u);
    EXPECT_EQ(manifest.at("pairs")[0].at("x"), "FS");
    EXPECT_EQ(manifest.at("pairs")[0].at("y"), "SS");
    EXPECT_TRUE(std::filesystem::exists(dir_->file("vp1/panel_1_FS_SS.svg")));
    EXPECT_TRUE(std::filesystem::exists(dir_->file("vp1/panel.svg")));
}

TEST_F(PlantedCli, OutputsDoNotDependOnThreads)
{
    const auto one = cli(*dir_, "train --data '" + data() + "' --out '" + dir_->file("t1.json") + "' --threads 1");
    const auto four = cli(*dir_, "train --data '" + data() + "' --out '" + dir_->file("t4.json") + "' --threads 4");
    ASSERT_EQ(one.code, 0);
    ASSERT_EQ(four.code, 0);
    EXPECT_EQ(slurp(dir_->file("t1.json")), slurp(dir_->file("t4.json")));
    EXPECT_EQ(slurp(dir_->file("t1.json")), slurp(bundle()));
    EXPECT_EQ(slurp(dir_->file("t1.populations.json")), slurp(dir_->file("t4.populations.json")));

    for (const std::string threads : {"1", "4"}) {
        const auto r = cli(*dir_, "vispanel --bundle '" + bundle() + "' --data '" + data() +
                                      "' --population 1 --threads " + threads + " --out '" +
                                      dir_->file("vp_t" + threads) + "'");
        ASSERT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(slurp(dir_->file("vp_t1/manifest.json")), slurp(dir_->file("vp_t4/manifest.json")));
    EXPECT_EQ(slurp(dir_->file("vp_t1/panel.svg")), slurp(dir_->file("vp_t4/panel.svg")));
}

TEST(Cli, BenchIrisJsonIsReproducible)
{
    TempDir dir("cli_bench");
    const auto a = cli(dir, "bench-iris --rounds 2 --threads 1 --json '" + dir.file("a.json") + "'");
    const auto b = cli(dir, "bench-iris --rounds 2 --threads 2 --json '" + dir.file("b.json") + "'");
    EXPECT_TRUE(a.code == kExitOk || a.code == kExitAcceptance) << a.err;
    EXPECT_EQ(a.code, b.code);
    EXPECT_NE(a.out.find("Accuracy [%]"), std::string::npos);
    const auto report = slurp(dir.file("a.json"));
    EXPECT_EQ(report, slurp(dir.file("b.json")));
    const auto j = nlohmann::json::parse(report);
    EXPECT_EQ(j.at("rounds_completed"), 2);
    EXPECT_FALSE(j.contains("wall_clock_seconds"));
    EXPECT_NE(cli(dir, "bench-iris --rounds 1 --record-timing --json '" + dir.file("c.json") + "'").code, kExitIo);
    EXPECT_TRUE(nlohmann::json::parse(slurp(dir.file("c.json"))).contains("wall_clock_seconds"));
}

TEST(Cli, ConfigFileRejectsUnknownKeys)
{
    TempDir dir("cli_config");
    spit(dir.file("bad.json"), R"({"max_depht": 3})");
    const auto r = cli(dir, "bench-iris --rounds 1 --config '" + dir.file("bad.json") + "'");
    EXPECT_EQ(r.code, kExitValidation);
    EXPECT_NE(r.err.find("max_depht"), std::string::npos) << r.err;
}
