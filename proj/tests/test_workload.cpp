#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "tscab/workload.hpp"

using namespace tscab;

static DatasetSchema pollution_schema() {
    return {"pollution",
            {"ozone", "particulate_matter", "co2", "so2", "no2"},
            {"longitude", "latitude"},
            20};
}

TEST_CASE("template summary covers all five kinds") {
    const auto schema = pollution_schema();
    auto templates = build_template_summary(schema, 42);
    REQUIRE(templates.size() == 5);
    for (int kind = 1; kind <= 5; ++kind)
        CHECK(std::count_if(templates.begin(), templates.end(),
                            [&](const QueryTemplate& t) { return t.kind == kind; }) == 1);

    // deterministic per (schema, seed)
    auto again = build_template_summary(schema, 42);
    for (std::size_t i = 0; i < templates.size(); ++i) {
        CHECK(templates[i].kind == again[i].kind);
        CHECK(templates[i].fields == again[i].fields);
        CHECK(templates[i].series == again[i].series);
    }

    DatasetSchema minimal{"m", {"f"}, {"t"}, 3};
    auto small = build_template_summary(minimal, 1);
    REQUIRE(small.size() == 5);
    for (const auto& t : small) CHECK(t.fields == std::vector<std::string>{"f"});

    CHECK_THROWS_AS(build_template_summary({"m", {}, {"t"}, 3}, 1), SchemaError);
    CHECK_THROWS_AS(build_template_summary({"m", {"f"}, {}, 3}, 1), SchemaError);
}

TEST_CASE("arrival counts follow their pattern") {
    SECTION("stability is rate times length") {
        StabilityPattern stable{10.0 / 300.0};
        CHECK(arrival_count(stable, 0, 300) == 10);
        CHECK(arrival_count(stable, 1200, 1500) == 10);
    }
    SECTION("cycles pick the rate by phase") {
        CyclesPattern cycles;
        cycles.period = 86400;
        cycles.base_rate = 1;
        cycles.peaks = {{18 * 3600, 3 * 3600, 50.0}};
        CHECK(arrival_count(cycles, 19 * 3600, 19 * 3600 + 300) == 50);
        CHECK(arrival_count(cycles, 3 * 3600, 3 * 3600 + 300) == 1);
        // exactly periodic for aligned intervals
        for (Timestamp t = 0; t < 86400; t += 4800)
            CHECK(arrival_count(cycles, t, t + 300) ==
                  arrival_count(cycles, t + 86400, t + 86400 + 300));
    }
    SECTION("spike peaks at its center and dies off") {
        SpikePattern spike{5000, 40.0, 1.0 / 600.0};
        CHECK(arrival_count(spike, 5000, 5300) == 40);
        CHECK(arrival_count(spike, 50000, 50300) == 0);
    }
    SECTION("chaos is seeded and bounded") {
        ChaosPattern chaos{99, 7};
        const auto first = arrival_count(chaos, 0, 300);
        CHECK(first == arrival_count(chaos, 0, 300));
        std::uint64_t peak = 0;
        for (Timestamp t = 0; t < 300 * 200; t += 300)
            peak = std::max(peak, arrival_count(chaos, t, t + 300));
        CHECK(peak <= 7);
    }
    CHECK_THROWS_AS(arrival_count(StabilityPattern{1.0}, 10, 10), ArgumentError);
}

TEST_CASE("generation emits exactly the counted queries, sorted and bounded") {
    DatasetSchema schema{"m", {"f1", "f2"}, {"site"}, 6};
    auto templates = build_template_summary(schema, 7);
    std::vector<ArrivalPattern> patterns;

    SECTION("stability count is exact") {
        auto one = std::vector<QueryTemplate>{templates[0]};
        std::vector<ArrivalPattern> p{StabilityPattern{2.0 / 300.0}};
        auto stream = generate(one, p, 1000000, 900, {0, 2000000}, 5);
        CHECK(stream.size() == 6);  // 2 per interval, 3 intervals
    }

    patterns = assign_patterns(templates.size(),
                               {StabilityPattern{2.0 / 300.0},
                                CyclesPattern{3600, {{0, 600, 5.0}}, 1.0},
                                SpikePattern{1003000, 30.0, 1.0 / 900.0},
                                ChaosPattern{17, 4}},
                               11);
    REQUIRE(patterns.size() == templates.size());

    const Timestamp start = 1000000, horizon = 24 * 3600;
    const std::pair<Timestamp, Timestamp> domain{0, 2000000};
    auto stream = generate(templates, patterns, start, horizon, domain, 5);

    SECTION("query count equals the sum of arrival counts") {
        std::size_t expected = 0;
        for (std::size_t i = 0; i < templates.size(); ++i)
            for (Timestamp t = start; t < start + horizon; t += 300)
                expected += arrival_count(patterns[i], t, t + 300);
        CHECK(stream.size() == expected);
    }

    SECTION("queries are ordered, bounded, and schema-consistent") {
        REQUIRE(!stream.empty());
        std::map<int, const QueryTemplate*> by_id;
        for (const auto& t : templates) by_id[t.id] = &t;
        Timestamp previous = stream.front().issue_ts;
        for (const auto& q : stream) {
            CHECK(q.issue_ts >= previous);
            previous = q.issue_ts;
            CHECK(q.t_start <= q.t_end);
            CHECK(q.t_end <= q.issue_ts);
            CHECK(q.t_start >= domain.first);
            CHECK(q.t_end <= domain.second);
            REQUIRE(by_id.count(q.template_id) == 1);
            const auto& t = *by_id[q.template_id];
            CHECK(q.kind == t.kind);
            CHECK(q.series == t.series);
            for (const auto& f : q.fields)
                CHECK(std::find(schema.fields.begin(), schema.fields.end(), f) !=
                      schema.fields.end());
            for (auto id : q.series) CHECK(id < schema.series_count);
            CHECK(q.compare.has_value() == (q.kind == 3));
            CHECK(q.aggregate.has_value() == (q.kind == 4 || q.kind == 5));
        }
    }

    SECTION("same seed reproduces the stream byte for byte") {
        auto rerun = generate(templates, patterns, start, horizon, domain, 5);
        std::ostringstream a, b;
        write_workload(a, stream);
        write_workload(b, rerun);
        CHECK(a.str() == b.str());
    }

    SECTION("the wire format round-trips the scheduling fields") {
        std::ostringstream os;
        write_workload(os, stream);
        std::istringstream is(os.str());
        auto parsed = read_workload(is);
        REQUIRE(parsed.size() == stream.size());
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            CHECK(parsed[i].issue_ts == stream[i].issue_ts);
            CHECK(parsed[i].template_id == stream[i].template_id);
            CHECK(parsed[i].kind == stream[i].kind);
            CHECK(parsed[i].series == stream[i].series);
            CHECK(parsed[i].t_start == stream[i].t_start);
            CHECK(parsed[i].t_end == stream[i].t_end);
            CHECK(parsed[i].aggregate == stream[i].aggregate);
        }
    }

    SECTION("empty data domain is rejected") {
        CHECK_THROWS_AS(generate(templates, patterns, start, horizon, {10, 5}, 5),
                        ArgumentError);
    }
}
