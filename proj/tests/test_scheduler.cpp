#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "tscab/random.hpp"
#include "tscab/scheduler.hpp"

using namespace tscab;

static constexpr double kHundredOverE = 36.787944117144235;

TEST_CASE("future temperatures iterate the window update over forecasts") {
    TemperatureParams params{0.1, 1.0, 2.0, 10};
    TemperatureRecord record{0, 100.0, 0, true};

    SECTION("zero forecasts reduce to pure decay") {
        auto trajectory = predict_future_temperature(record, std::vector<double>{0, 0, 0}, params);
        REQUIRE(trajectory.size() == 3);
        double expected = 100.0;
        for (double t : trajectory) {
            expected = decay(expected, 10.0, 0.1);
            CHECK_THAT(t, Catch::Matchers::WithinRel(expected, 1e-12));
        }
    }
    SECTION("a forecast window with three accesses matches the update oracle") {
        auto trajectory = predict_future_temperature(record, std::vector<double>{3}, params);
        REQUIRE(trajectory.size() == 1);
        CHECK_THAT(trajectory[0], Catch::Matchers::WithinAbs(kHundredOverE + 4.8, 1e-3));
    }
    SECTION("doubled forecasts double every heating contribution") {
        std::vector<double> accesses{2, 0, 5, 1};
        std::vector<double> doubled{4, 0, 10, 2};
        auto base = predict_future_temperature(record, accesses, params);
        auto big = predict_future_temperature(record, doubled, params);
        // oracle: recompute the recurrence directly
        double t1 = 100.0, t2 = 100.0;
        for (std::size_t i = 0; i < accesses.size(); ++i) {
            t1 = decay(t1, 10.0, 0.1) + heat_increment(2.0, accesses[i], 10.0, 1.0);
            t2 = decay(t2, 10.0, 0.1) + heat_increment(2.0, doubled[i], 10.0, 1.0);
            CHECK_THAT(base[i], Catch::Matchers::WithinRel(t1, 1e-12));
            CHECK_THAT(big[i], Catch::Matchers::WithinRel(t2, 1e-12));
        }
    }
}

TEST_CASE("summaries aggregate raw points exactly") {
    const SegmentKey key{3, 17};
    auto single = summarize_overcooled(key, std::vector<double>{3});
    CHECK(single.count == 1);
    CHECK(single.min == 3);
    CHECK(single.max == 3);
    CHECK(single.mean == 3);
    CHECK(single.first == 3);
    CHECK(single.last == 3);

    auto four = summarize_overcooled(key, std::vector<double>{1, 2, 3, 4});
    CHECK(four.count == 4);
    CHECK(four.min == 1);
    CHECK(four.max == 4);
    CHECK(four.mean == 2.5);
    CHECK(four.first == 1);
    CHECK(four.last == 4);

    CHECK_THROWS_AS(summarize_overcooled(key, std::vector<double>{}), ArgumentError);
}

namespace {

struct Fixture {
    SegmentCatalog catalog;
    Placement placement;
    TierSizes tiers{100, 100};
    HeatThresholds thresholds{2.0, 0.1};
    std::map<SegmentKey, TemperatureRecord> records;
    std::map<SegmentKey, std::vector<double>> forecasts;

    void add_segment(SeriesId series, BucketId bucket, std::uint64_t points, double temp) {
        const SegmentKey key{series, bucket};
        catalog.points.emplace(key, points);
        records.emplace(key, TemperatureRecord{0, temp, 0, true});
    }
    MigrationPlan plan(std::uint64_t budget = 1000,
                       std::optional<std::map<BucketId, std::uint64_t>> frequent =
                           std::nullopt) const {
        return plan_migration(records, forecasts, frequent, catalog, placement, tiers, budget,
                              thresholds);
    }
};

}  // namespace

TEST_CASE("a cold system demotes residents and preheats nothing") {
    Fixture f;
    f.add_segment(1, 10, 5, 0.5);
    f.add_segment(2, 11, 5, 1.0);
    f.placement.cloud.insert({1, 10});
    f.placement.edge.insert({1, 10});
    f.placement.occupancy_cloud = 5;
    f.placement.occupancy_edge = 5;

    auto plan = f.plan();
    CHECK(plan.preheat.empty());
    REQUIRE(plan.demote.size() == 1);
    CHECK(plan.demote[0].segment == SegmentKey{1, 10});
    CHECK(plan.demote[0].from_cloud);
    CHECK(plan.demote[0].from_edge);

    auto applied = apply_plan(f.placement, plan, f.catalog, f.tiers);
    CHECK(applied.cloud.empty());
    CHECK(applied.edge.empty());
    CHECK(applied.occupancy_cloud == 0);
    CHECK(applied.occupancy_edge == 0);
}

TEST_CASE("a hot segment with room everywhere is replicated to both tiers") {
    Fixture f;
    f.add_segment(1, 10, 5, 4.0);
    auto plan = f.plan();
    REQUIRE(plan.preheat.size() == 1);
    CHECK(plan.preheat[0].to_cloud);
    CHECK(plan.preheat[0].to_edge);

    auto applied = apply_plan(f.placement, plan, f.catalog, f.tiers);
    CHECK(applied.cloud.count({1, 10}) == 1);
    CHECK(applied.edge.count({1, 10}) == 1);
}

TEST_CASE("the preheat budget admits the hottest candidates first") {
    Fixture f;
    f.add_segment(1, 10, 10, 5.0);
    f.add_segment(2, 11, 10, 7.0);
    f.add_segment(3, 12, 10, 6.0);

    auto plan = f.plan(20);
    REQUIRE(plan.preheat.size() == 2);
    // oracle: rank the three candidates by temperature by hand
    CHECK(plan.preheat[0].segment == SegmentKey{2, 11});
    CHECK(plan.preheat[1].segment == SegmentKey{3, 12});

    // ties on peak go to the larger frequent counter, then lower series
    Fixture g;
    g.add_segment(4, 20, 10, 5.0);
    g.add_segment(5, 21, 10, 5.0);
    auto ranked = g.plan(10, std::map<BucketId, std::uint64_t>{{20, 2}, {21, 9}});
    REQUIRE(ranked.preheat.size() == 1);
    CHECK(ranked.preheat[0].segment == SegmentKey{5, 21});
}

TEST_CASE("the frequent-bucket filter gates candidacy") {
    Fixture f;
    f.add_segment(1, 10, 5, 5.0);
    f.add_segment(2, 99, 5, 9.0);
    auto plan = f.plan(1000, std::map<BucketId, std::uint64_t>{{10, 4}});
    REQUIRE(plan.preheat.size() == 1);
    CHECK(plan.preheat[0].segment == SegmentKey{1, 10});
}

TEST_CASE("forecast-only segments can be preheated before any access") {
    Fixture f;
    f.catalog.points.emplace(SegmentKey{9, 30}, 4);
    f.forecasts[{9, 30}] = {0.5, 3.5};  // predicted to cross theta_hot
    auto plan = f.plan();
    REQUIRE(plan.preheat.size() == 1);
    CHECK(plan.preheat[0].segment == SegmentKey{9, 30});
}

TEST_CASE("a segment larger than every tier is a planning error") {
    Fixture f;
    f.add_segment(1, 10, 500, 9.0);
    CHECK_THROWS_AS(f.plan(1000), PlanningError);
    CHECK_THROWS_WITH(f.plan(1000), Catch::Matchers::ContainsSubstring("series 1"));
}

TEST_CASE("over-cooled records are queued for summarization once") {
    Fixture f;
    f.add_segment(1, 10, 5, 0.05);
    auto plan = f.plan();
    REQUIRE(plan.summarize.size() == 1);

    auto applied = apply_plan(f.placement, plan, f.catalog, f.tiers);
    CHECK(applied.summarized.count({1, 10}) == 1);

    // already summarized: not queued again, and re-applying is a no-op
    f.placement = applied;
    auto again = f.plan();
    CHECK(again.summarize.empty());
}

TEST_CASE("plan application is atomic, versioned, and capacity safe") {
    Fixture f;
    f.add_segment(1, 10, 5, 4.0);

    SECTION("an empty plan changes nothing but the version") {
        MigrationPlan empty;
        empty.base_version = f.placement.version;
        auto applied = apply_plan(f.placement, empty, f.catalog, f.tiers);
        CHECK(applied.cloud == f.placement.cloud);
        CHECK(applied.version == f.placement.version + 1);
    }

    SECTION("stale plans are rejected") {
        auto plan = f.plan();
        auto applied = apply_plan(f.placement, plan, f.catalog, f.tiers);
        CHECK_THROWS_AS(apply_plan(applied, plan, f.catalog, f.tiers), StalePlanError);
    }

    SECTION("preheat then demote is a net no-op on membership") {
        auto plan = f.plan();
        auto applied = apply_plan(f.placement, plan, f.catalog, f.tiers);
        CHECK(applied.resident({1, 10}));
        f.records[{1, 10}].temperature = 0.2;  // cooled below theta_hot
        auto second = plan_migration(f.records, f.forecasts, std::nullopt, f.catalog, applied,
                                     f.tiers, 1000, f.thresholds);
        auto reverted = apply_plan(applied, second, f.catalog, f.tiers);
        CHECK(!reverted.resident({1, 10}));
        CHECK(reverted.cloud == f.placement.cloud);
        CHECK(reverted.edge == f.placement.edge);
    }
}

TEST_CASE("occupancy bookkeeping matches a full recount under random churn") {
    Rng rng(19);
    Fixture f;
    f.tiers = {60, 45};
    for (SeriesId s = 0; s < 6; ++s)
        for (BucketId b = 0; b < 5; ++b)
            f.add_segment(s, b, 1 + rng.next_below(8), 0.0);

    for (int round = 0; round < 40; ++round) {
        for (auto& [key, record] : f.records)
            record.temperature = rng.next_below(3) == 0 ? 5.0 : 0.05 * (rng.next_below(30));
        const std::uint64_t budget = 1 + rng.next_below(40);
        auto plan = plan_migration(f.records, f.forecasts, std::nullopt, f.catalog,
                                   f.placement, f.tiers, budget, f.thresholds);

        std::uint64_t preheated = 0;
        for (const auto& action : plan.preheat)
            preheated += f.catalog.points_of(action.segment);
        CHECK(preheated <= budget);

        f.placement = apply_plan(f.placement, plan, f.catalog, f.tiers);

        std::uint64_t recount_cloud = 0, recount_edge = 0;
        for (const auto& key : f.placement.cloud) recount_cloud += f.catalog.points_of(key);
        for (const auto& key : f.placement.edge) recount_edge += f.catalog.points_of(key);
        CHECK(f.placement.occupancy_cloud == recount_cloud);
        CHECK(f.placement.occupancy_edge == recount_edge);
        CHECK(recount_cloud <= f.tiers.cloud);
        CHECK(recount_edge <= f.tiers.edge);

        // summarized segments never linger on a cache tier
        for (const auto& key : f.placement.summarized) {
            CHECK(f.placement.cloud.count(key) == 0);
            CHECK(f.placement.edge.count(key) == 0);
        }
    }
}

TEST_CASE("identical inputs produce identical plans") {
    Fixture f;
    Rng rng(23);
    for (SeriesId s = 0; s < 5; ++s)
        for (BucketId b = 0; b < 4; ++b)
            f.add_segment(s, b, 1 + rng.next_below(5), 0.1 * rng.next_below(60));
    auto a = f.plan(25);
    auto b = f.plan(25);
    REQUIRE(a.preheat.size() == b.preheat.size());
    for (std::size_t i = 0; i < a.preheat.size(); ++i)
        CHECK(a.preheat[i].segment == b.preheat[i].segment);
    REQUIRE(a.demote.size() == b.demote.size());
    for (std::size_t i = 0; i < a.demote.size(); ++i)
        CHECK(a.demote[i].segment == b.demote[i].segment);
}

TEST_CASE("lookup is all-or-nothing across the touched segments") {
    SegmentCatalog catalog;
    catalog.points.emplace(SegmentKey{1, 0}, 3);
    catalog.points.emplace(SegmentKey{1, 1}, 3);
    catalog.points.emplace(SegmentKey{1, 2}, 3);

    Query query;
    query.series = {1};
    query.t_start = 0;
    query.t_end = 899;  // buckets 0..2 at 300 s

    Placement placement;
    SECTION("all on cloud serves from cloud") {
        placement.cloud = {{1, 0}, {1, 1}, {1, 2}};
        auto result = lookup(placement, query, catalog, 300);
        CHECK(result.hit);
        CHECK(result.serving == TierLevel::Cloud);
    }
    SECTION("one segment only at the tier of record is a miss") {
        placement.cloud = {{1, 0}, {1, 1}};
        auto result = lookup(placement, query, catalog, 300);
        CHECK(!result.hit);
        CHECK(result.serving == TierLevel::End);
    }
    SECTION("a cloud/edge split still hits, served by edge") {
        placement.cloud = {{1, 0}, {1, 1}};
        placement.edge = {{1, 2}};
        auto result = lookup(placement, query, catalog, 300);
        CHECK(result.hit);
        CHECK(result.serving == TierLevel::Edge);
    }
    SECTION("summarized segments miss with the flag set") {
        placement.cloud = {{1, 0}, {1, 1}};
        placement.summarized = {{1, 2}};
        auto result = lookup(placement, query, catalog, 300);
        CHECK(!result.hit);
        CHECK(result.summarized);
    }
    SECTION("a query touching no stored data is a trivial hit") {
        Query far = query;
        far.t_start = 9000;
        far.t_end = 9100;
        CHECK(lookup(placement, far, catalog, 300).hit);
    }
}

TEST_CASE("the plan log lists one action per line") {
    MigrationPlan plan;
    plan.preheat.push_back({{1, 10}, true, true});
    plan.preheat.push_back({{2, 11}, false, true});
    plan.demote.push_back({{3, 12}, true, false});
    plan.summarize.push_back({4, 13});

    std::ostringstream os;
    append_plan_log(os, 42, plan);
    CHECK(os.str() ==
          "42,PREHEAT,1,10,CLOUD+EDGE\n"
          "42,PREHEAT,2,11,EDGE\n"
          "42,DEMOTE,3,12,CLOUD\n"
          "42,SUMMARIZE,4,13,END\n");
}
