#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "batchpost/cli.hpp"
#include "batchpost/formats.hpp"

namespace fs = std::filesystem;
using batchpost::Json;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
    Json json() const { return Json::parse(out); }
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "batchpost");
    std::ostringstream out;
    std::ostringstream err;
    const int code = batchpost::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("batchpost_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
        return path(name);
    }

    std::string synth(std::size_t length = 2000, std::uint64_t seed = 5) const {
        const auto file = path("synth_" + std::to_string(seed) + ".csv");
        const auto result = cli({"synth", "--length", std::to_string(length), "--seed", std::to_string(seed),
                                 "--out", file});
        EXPECT_EQ(result.code, 0) << result.err;
        return file;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, TrivialBacktestHasNoDelay) {
    const auto prices = synth();
    const auto result = cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices});
    ASSERT_EQ(result.code, 0) << result.err;
    const auto report = result.json();
    EXPECT_EQ(report.at("delayCost").get<double>(), 0.0);
    EXPECT_EQ(report.at("maxDelay").get<int>(), 0);
    EXPECT_EQ(report.at("batchesCreated").get<int>(), 2000);
    EXPECT_EQ(report.at("policy").at("kind"), "trivial");
}

TEST_F(CliTest, DpWithOracle) {
    const auto result = cli({"dp", "--prices", "1,10,1", "--c", "1", "--oracle"});
    ASSERT_EQ(result.code, 0) << result.err;
    const auto doc = result.json();
    EXPECT_EQ(doc.at("nPost"), Json::array({1, 0, 2}));
    EXPECT_EQ(doc.at("totalCost").get<double>(), 4.0);
    EXPECT_EQ(doc.at("oracle").at("match"), true);

    const auto tooLong = cli({"dp", "--prices", "1,1,1,1,1,1,1,1,1,1,1,1,1", "--oracle"});
    EXPECT_EQ(tooLong.code, 1);
    const auto fromFile = cli({"dp", "--prices", write("p.csv", "price\n1\n10\n1\n")});
    ASSERT_EQ(fromFile.code, 0) << fromFile.err;
    EXPECT_EQ(fromFile.json().at("totalCost").get<double>(), 4.0);
}

TEST_F(CliTest, SolveThenAnalyzeMicro) {
    const auto solution = path("micro.json");
    const auto solved = cli({"solve", "--preset", "micro", "--kernel", "synthetic", "--out", solution,
                             "--policy-csv", path("policy.csv")});
    ASSERT_EQ(solved.code, 0) << solved.err;
    EXPECT_TRUE(fs::exists(solution + ".manifest.json"));
    EXPECT_EQ(slurp(path("policy.csv")).substr(0, 20), "queue,p0,p1,p2,p3,p4");
    const auto doc = Json::parse(slurp(solution));
    EXPECT_EQ(doc.at("converged"), true);
    EXPECT_EQ(doc.at("policy").at("numPrices"), 5);

    const auto analyzed = cli({"analyze", "--solution", solution});
    ASSERT_EQ(analyzed.code, 0) << analyzed.err;
    const auto summary = analyzed.json();
    EXPECT_EQ(summary.at("monotonicity").at("violationCount"), 0);
    EXPECT_TRUE(summary.at("thresholds").contains("queueThresholds"));

    const auto learned = cli({"backtest", "--policy", R"({"kind":"learned","solution":")" + solution + "\"}",
                              "--prices", synth()});
    ASSERT_EQ(learned.code, 0) << learned.err;
    EXPECT_EQ(learned.json().at("policy").at("kind"), "learned");
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    EXPECT_EQ(cli({"synth", "--length", "10"}).code, 1);  // seed is mandatory
    EXPECT_EQ(cli({"dp", "--prices", "1,2", "--bogus"}).code, 1);
    EXPECT_EQ(cli({"--help"}).code, 0);
    EXPECT_EQ(cli({"--version"}).code, 0);

    const auto prices = synth(100);
    EXPECT_EQ(cli({"backtest", "--policy", "{not json", "--prices", prices}).code, 1);
    EXPECT_EQ(cli({"backtest", "--policy", R"({"kind":"priceMin","T":-3})", "--prices", prices}).code, 1);
    EXPECT_EQ(cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", path("missing.csv")}).code, 2);
    const auto malformed = write("bad.csv", "timestamp,price\n1,10\n2,oops\n");
    const auto bad = cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", malformed});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("row 3"), std::string::npos);
    EXPECT_EQ(cli({"sweep", "--family", "priceMin", "--prices", prices}).code, 1);
    EXPECT_EQ(cli({"sweep", "--family", "priceMin", "--param", "T=1,x", "--prices", prices}).code, 1);

    const auto stalled = cli({"solve", "--preset", "micro", "--max-iter", "2"});
    EXPECT_EQ(stalled.code, 3);
    EXPECT_EQ(stalled.json().at("converged"), false);
    EXPECT_EQ(cli({"solve", "--preset", "micro", "--alpha", "0"}).code, 1);
}

TEST_F(CliTest, IngestAndHistogram) {
    std::string text = "ts,fee\n";
    for (int i = 0; i < 12; ++i) {
        text += std::to_string(100 + i) + "," + std::to_string((i + 1) * 1'000'000'000LL) + "\n";
    }
    const auto raw = write("raw.csv", text);
    const auto ingested = cli({"ingest", "--prices", raw, "--ts-col", "ts", "--fee-col", "fee", "--fee-unit", "wei",
                               "--stride", "5"});
    ASSERT_EQ(ingested.code, 0) << ingested.err;
    EXPECT_EQ(ingested.out, "timestamp,price\n100,1\n105,6\n110,11\n");

    const auto hist = cli({"histogram", "--prices", synth(500), "--format", "csv"});
    ASSERT_EQ(hist.code, 0) << hist.err;
    EXPECT_EQ(hist.out.rfind("binStart,binEnd,count\n", 0), 0u);
    const auto histJson = cli({"histogram", "--prices", synth(500), "--bin-width", "0.01"});
    EXPECT_EQ(histJson.json().at("total"), 499);
}

TEST_F(CliTest, SweepMarksFrontier) {
    const auto prices = synth(3000);
    const auto result = cli({"sweep", "--family", "qThreshold", "--param", "Tp=15,25,40", "--param", "d=0.5,1,2",
                             "--prices", prices});
    ASSERT_EQ(result.code, 0) << result.err;
    const auto doc = result.json();
    EXPECT_EQ(doc.at("rows").size(), 9u);
    EXPECT_FALSE(doc.at("frontier").empty());
    EXPECT_EQ(doc.at("rows").at(0).at("params").at("Tp"), 15);
    EXPECT_EQ(doc.at("rows").at(1).at("params").at("d"), 1);
    EXPECT_TRUE(doc.at("rows").at(0).contains("improvementVsTrivial"));
    EXPECT_EQ(doc.at("trivial").at("delayCost"), 0);

    const auto csv = cli({"sweep", "--family", "priceMin", "--param", "T=20,-1", "--prices", prices, "--format", "csv"});
    ASSERT_EQ(csv.code, 0) << csv.err;
    EXPECT_NE(csv.out.find("onFrontier"), std::string::npos);
    EXPECT_NE(csv.out.find("must be positive"), std::string::npos);
}

TEST_F(CliTest, TipsAddToThePrice) {
    const auto prices = write("p.csv", "price\n10\n20\n30\n");
    const auto tips = write("t.csv", "timestamp,tip\n1,0\n2,1.5\n3,2\n");
    const auto withFile = cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices, "--tips", tips});
    ASSERT_EQ(withFile.code, 0) << withFile.err;
    EXPECT_EQ(withFile.json().at("publishingCost").get<double>(), 63.5);
    const auto fixed = cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices, "--fixed-tip", "1"});
    ASSERT_EQ(fixed.code, 0) << fixed.err;
    EXPECT_EQ(fixed.json().at("publishingCost").get<double>(), 63.0);

    const auto shortTips = write("s.csv", "tip\n1\n");
    EXPECT_EQ(cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices, "--tips", shortTips}).code, 2);
    EXPECT_EQ(cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices, "--tips", tips,
                   "--fixed-tip", "1"})
                  .code,
              1);
    const auto badTips = write("b.csv", "tip\n1\nx\n3\n");
    EXPECT_EQ(cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices, "--tips", badTips}).code, 2);
}

TEST_F(CliTest, TraceAndPolicyFile) {
    const auto prices = write("p.csv", "price\n10\n200\n30\n");
    const auto policy = write("policy.json", R"({"kind":"priceMin","T":50})");
    const auto trace = path("trace.csv");
    const auto result = cli({"backtest", "--policy", "@" + policy, "--prices", prices, "--trace", trace});
    ASSERT_EQ(result.code, 0) << result.err;
    EXPECT_EQ(result.json().at("maxDelay"), 1);
    const auto text = slurp(trace);
    EXPECT_EQ(text.substr(0, text.find('\n')), "round,price,queueBefore,nPost,postingCost,delayCost");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST_F(CliTest, ManifestRecordsInputDigest) {
    const auto prices = write("abc.csv", "price\n1\n2\n");
    const auto out = path("report.json");
    const auto result = cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", prices, "--out", out});
    ASSERT_EQ(result.code, 0) << result.err;
    EXPECT_TRUE(result.out.empty());
    const auto manifest = Json::parse(slurp(out + ".manifest.json"));
    EXPECT_EQ(manifest.at("subcommand"), "backtest");
    EXPECT_EQ(manifest.at("toolVersion"), batchpost::cli::kVersion);
    EXPECT_TRUE(manifest.contains("wallTimeSeconds"));
    // sha256sum of the file contents
    EXPECT_EQ(manifest.at("inputs").at(prices), "6bcafd01945dc420fd0f312e4f067c61cdc021d9fc09b66f123b9db4cd3b807a");
}

TEST_F(CliTest, DataDirectoryLookup) {
    write("lookup.csv", "price\n3\n4\n");
    ::setenv(batchpost::cli::kDataDirEnv, dir_.c_str(), 1);
    const auto result = cli({"backtest", "--policy", R"({"kind":"trivial"})", "--prices", "lookup.csv"});
    ::unsetenv(batchpost::cli::kDataDirEnv);
    ASSERT_EQ(result.code, 0) << result.err;
    EXPECT_EQ(result.json().at("publishingCost").get<double>(), 7.0);
}

TEST_F(CliTest, DeterministicAcrossRunsAndThreads) {
    EXPECT_EQ(slurp(synth(1000, 9)), slurp(synth(1000, 9)));
    const auto prices = synth(4000, 10);
    std::string reference;
    for (const char* threads : {"1", "2", "4"}) {
        const auto result = cli({"sweep", "--family", "arbStep", "--param", "e=1.2,2", "--param", "ap=15,25",
                                 "--param", "ut=30,60", "--prices", prices, "--threads", threads});
        ASSERT_EQ(result.code, 0) << result.err;
        if (reference.empty()) {
            reference = result.out;
        }
        EXPECT_EQ(result.out, reference) << threads;
    }
    std::string solved;
    for (const char* threads : {"1", "3"}) {
        const auto result = cli({"solve", "--preset", "desk", "--num-prices", "16", "--max-queue", "12",
                                 "--threads", threads, "--values"});
        ASSERT_EQ(result.code, 0) << result.err;
        if (solved.empty()) {
            solved = result.out;
        }
        EXPECT_EQ(result.out, solved) << threads;
    }
}
