#include <gtest/gtest.h>

#include <sstream>

#include "batchpost/formats.hpp"

using namespace batchpost;

TEST(CanonicalDump, SortedKeysAndFixedPrecision) {
    const Json doc{{"zeta", 1.0 / 3.0}, {"alpha", 2}, {"mid", {{"b", true}, {"a", nullptr}}}, {"list", {1.5, 2, 3}}};
    EXPECT_EQ(canonical_dump(doc),
              "{\n"
              "  \"alpha\": 2,\n"
              "  \"list\": [1.5, 2, 3],\n"
              "  \"mid\": {\n"
              "    \"a\": null,\n"
              "    \"b\": true\n"
              "  },\n"
              "  \"zeta\": 0.333333\n"
              "}\n");
}

TEST(CanonicalDump, NumberFormatting) {
    EXPECT_EQ(format_number(2.598e7), "2.598e+07");
    EXPECT_EQ(format_number(39.7986), "39.7986");
    EXPECT_EQ(format_number(1234567.0), "1.23457e+06");
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "null");
    EXPECT_EQ(canonical_dump(Json::array({Json::array({1, 2}), Json::object()})), "[\n  [1, 2],\n  {}\n]\n");
}

TEST(Serialization, DistributionGridKernelRoundTrip) {
    const FactorDistribution dist{{0.5, 1.0, 2.0}, {0.25, 0.5, 0.25}};
    EXPECT_EQ(Json(dist).get<FactorDistribution>().factors, dist.factors);
    const PriceGrid grid{7, 2, 14};
    const auto back = Json(grid).get<PriceGrid>();
    EXPECT_EQ(back.numPoints, 7u);
    EXPECT_EQ(back.pMax, 14);
    EXPECT_EQ(Json(grid).at("spacing"), "linear");

    const auto kernel = build_kernel(grid, dist);
    const Json kj = kernel;
    EXPECT_TRUE(kj.at("rows").at(0).at(0).is_array());
    EXPECT_EQ(kj.get<TransitionKernel>().rows, kernel.rows);
    EXPECT_THROW((Json{{"factors", {1.0}}, {"probs", {0.5}}}.get<FactorDistribution>()), std::invalid_argument);
    EXPECT_THROW((Json{{"numPoints", 3}, {"pMin", 1}, {"pMax", 2}, {"spacing", "log"}}.get<PriceGrid>()),
                 std::invalid_argument);
}

TEST(Serialization, TablesRoundTrip) {
    ValueTable values(3, 2);
    PolicyTable policy(3, 2);
    for (std::size_t q = 0; q <= 2; ++q) {
        for (std::size_t p = 0; p < 3; ++p) {
            policy.at(q, p) = static_cast<std::uint32_t>(q > p ? q - p : 0);
            for (std::size_t a = 0; a <= q; ++a) {
                values.at(q, p, a) = static_cast<double>(q * 10 + p) + 0.25 * static_cast<double>(a);
            }
        }
    }
    EXPECT_EQ(Json(values).get<ValueTable>(), values);
    EXPECT_EQ(Json(policy).get<PolicyTable>(), policy);
    Json broken = policy;
    broken["actions"][2][1] = 9;
    EXPECT_THROW(broken.get<PolicyTable>(), std::invalid_argument);
}

TEST(PolicyJson, ParsesEveryKind) {
    EXPECT_EQ(policy_kind(parse_policy(Json::parse(R"({"kind":"trivial"})"))), "trivial");
    const auto pm = std::get<PriceMinPolicy>(parse_policy(Json::parse(R"({"kind":"priceMin","T":60})")));
    EXPECT_EQ(pm.threshold, 60);
    const auto qt = std::get<QThresholdPolicy>(parse_policy(Json::parse(R"({"kind":"qThreshold","Tp":60,"d":2})")));
    EXPECT_EQ(qt.variant, QThresholdVariant::literal);
    const auto qt2 = std::get<QThresholdPolicy>(
        parse_policy(Json::parse(R"({"kind":"qThreshold","Tp":60,"d":2,"variant":"toThreshold"})")));
    EXPECT_EQ(qt2.variant, QThresholdVariant::toThreshold);
    const auto arb = std::get<ArbPolicy>(parse_policy(Json::parse(R"({"kind":"arbStep","ap":96,"e":2,"ut":120})")));
    EXPECT_EQ(arb.mode, ArbMode::step);
    EXPECT_EQ(arb.ut, 120);
    EXPECT_EQ(std::get<ArbPolicy>(parse_policy(Json::parse(R"({"kind":"arbSmooth","ap":96,"e":2,"ut":120})"))).mode,
              ArbMode::smooth);

    PolicyTable table(2, 1);
    table.at(1, 0) = 1;
    const Json learnedDoc{{"kind", "learned"}, {"grid", PriceGrid{2, 1, 2}}, {"policy", table}};
    const auto learned = std::get<LearnedPolicy>(parse_policy(learnedDoc));
    EXPECT_EQ(*learned.table, table);
}

TEST(PolicyJson, RejectsBadDocuments) {
    for (const char* text : {R"({"T":60})", R"({"kind":"priceMin"})", R"({"kind":"priceMin","T":60,"x":1})",
                             R"({"kind":"priceMin","T":-1})", R"({"kind":"arbStep","ap":96,"e":0.5,"ut":120})",
                             R"({"kind":"qThreshold","Tp":60,"d":2,"variant":"other"})", R"({"kind":"mystery"})",
                             R"([1,2])"}) {
        EXPECT_THROW(parse_policy(Json::parse(text)), std::invalid_argument) << text;
    }
}

TEST(PolicyJson, RoundTrip) {
    for (const PolicySpec& spec :
         std::vector<PolicySpec>{TrivialPolicy{}, PriceMinPolicy{61}, QThresholdPolicy{60, 2, QThresholdVariant::toThreshold},
                                 ArbPolicy{96, 1.2, 60, ArbMode::smooth}}) {
        const auto json = policy_to_json(spec);
        EXPECT_EQ(policy_to_json(parse_policy(json)), json);
    }
}

TEST(Csv, PolicyMatrix) {
    PolicyTable table(3, 1);
    table.at(1, 0) = 1;
    std::ostringstream out;
    write_policy_csv(out, table);
    EXPECT_EQ(out.str(), "queue,p0,p1,p2\n0,0,0,0\n1,1,0,0\n");
}

TEST(Csv, HistogramRows) {
    const Histogram hist{{0.99, 1.0, 1.01}, {3, 1}, 4};
    std::ostringstream out;
    write_histogram_csv(out, hist);
    EXPECT_EQ(out.str(), "binStart,binEnd,count\n0.99,1,3\n1,1.01,1\n");
}

TEST(Json, ReportFields) {
    BacktestReport report;
    report.publishingCost = 3.6e7;
    const Json j = report;
    EXPECT_EQ(j.at("delayUnit"), "rounds");
    EXPECT_EQ(j.at("avgDelayDenominator"), "batchesCreated");
    EXPECT_EQ(j.at("publishingCost").get<double>(), 3.6e7);
    report.includeUnposted = false;
    EXPECT_EQ(Json(report).at("avgDelayDenominator"), "batchesPosted");
}
