#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "tscab/frequent_timestamps.hpp"
#include "tscab/random.hpp"

using namespace tscab;

TEST_CASE("range expansion tiles the inclusive query window") {
    const Timestamp bucket = 300;
    CHECK(expand_range_to_timestamps(0, 3 * bucket - 1, bucket) == TimestampStream{0, 1, 2});
    CHECK(expand_range_to_timestamps(450, 450, bucket) == TimestampStream{1});
    CHECK(expand_range_to_timestamps(299, 300, bucket) == TimestampStream{0, 1});
    CHECK_THROWS_AS(expand_range_to_timestamps(0, 10, 0), ArgumentError);
}

TEST_CASE("misra-gries step handles hit, insert, and decrement") {
    CounterTable table{3, {}};

    mg_process(table, 7);  // empty table, first insertion
    CHECK(table.entries == std::map<BucketId, std::uint64_t>{{7, 1}});

    mg_process(table, 7);  // present: counter + 1
    mg_process(table, 9);
    CHECK(table.entries == std::map<BucketId, std::uint64_t>{{7, 2}, {9, 1}});

    mg_process(table, 4);  // full and absent: decrement all, drop zeros, no insert
    CHECK(table.entries == std::map<BucketId, std::uint64_t>{{7, 1}});
}

TEST_CASE("misra-gries run matches the worked example") {
    auto table = mg_run({1, 1, 1, 2, 3, 1}, 2);
    CHECK(table.entries == std::map<BucketId, std::uint64_t>{{1, 2}});

    CHECK(mg_run({}, 2).entries.empty());

    auto solo = mg_run(TimestampStream(57, 8), 5);
    CHECK(solo.entries == std::map<BucketId, std::uint64_t>{{8, 57}});

    CHECK_THROWS_AS(mg_run({1}, 1), ArgumentError);
}

TEST_CASE("frequent buckets are sorted and annotated with bounds") {
    auto table = mg_run({1, 1, 1, 2, 3, 1}, 2);
    auto report = frequent_buckets(table, 6, 2);
    REQUIRE(report.size() == 1);
    CHECK(report[0].bucket == 1);
    CHECK(report[0].estimate == 2);
    CHECK(report[0].freq_floor == 2);
    CHECK(report[0].freq_ceiling == 5.0);  // 2 + 6/2

    CHECK(frequent_buckets(CounterTable{4, {}}, 0, 4).empty());

    CounterTable tie{8, {{5, 3}, {2, 3}, {9, 1}}};
    auto ordered = frequent_buckets(tie, 7, 8);
    REQUIRE(ordered.size() == 3);
    CHECK(ordered[0].bucket == 2);
    CHECK(ordered[1].bucket == 5);
    CHECK(ordered[2].bucket == 9);
}

TEST_CASE("summary obeys the frequency guarantees against exact counts") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t k = std::vector<std::size_t>{4, 8, 16, 64}[trial % 4];
        const std::size_t m = 200 + rng.next_below(5000);
        const std::uint64_t universe = 1 + rng.next_below(100);

        TimestampStream stream;
        std::map<BucketId, std::uint64_t> exact;
        CounterTable table{k, {}};
        for (std::size_t i = 0; i < m; ++i) {
            // skew the draw so some buckets are genuinely heavy
            BucketId b = rng.next_below(2) ? rng.next_below(universe)
                                           : rng.next_below(1 + universe / 10);
            stream.push_back(b);
            ++exact[b];
            mg_process(table, b);
            CHECK(table.entries.size() <= k - 1);  // space bound holds throughout
        }

        const double slack = static_cast<double>(m) / static_cast<double>(k);
        for (const auto& [bucket, f] : exact) {
            auto it = table.entries.find(bucket);
            const std::uint64_t counter = it == table.entries.end() ? 0 : it->second;
            CHECK(static_cast<double>(counter) >= static_cast<double>(f) - slack);
            CHECK(counter <= f);
            if (static_cast<double>(f) > slack) CHECK(it != table.entries.end());
        }
        auto rerun = mg_run(stream, k);
        CHECK(rerun.entries == table.entries);
    }
}
