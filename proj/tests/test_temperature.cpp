#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "tscab/random.hpp"
#include "tscab/temperature.hpp"

using namespace tscab;

// 100 * e^{-1}, e = 2.71828182845904523536 (frozen independently of decay()).
static constexpr double kHundredOverE = 36.787944117144235;

TEST_CASE("decay follows the exponential cooling law") {
    CHECK(decay(100.0, 0.0, 0.1) == 100.0);
    CHECK_THAT(decay(100.0, 10.0, 0.1), Catch::Matchers::WithinAbs(kHundredOverE, 1e-3));
    CHECK(decay(0.0, 5.0, 0.1) == 0.0);
    CHECK_THROWS_AS(decay(1.0, -1.0, 0.1), ArgumentError);
}

TEST_CASE("heat increment is linear in accesses and inverse in interval") {
    CHECK(heat_increment(2.0, 0.0, 10.0, 1.0) == 0.0);
    CHECK_THAT(heat_increment(2.0, 3.0, 10.0, 1.0), Catch::Matchers::WithinAbs(4.8, 1e-12));
    CHECK_THAT(heat_increment(2.0, 6.0, 10.0, 1.0), Catch::Matchers::WithinAbs(9.6, 1e-12));
    CHECK_THROWS_AS(heat_increment(2.0, 3.0, 0.0, 1.0), ArgumentError);

    // same access count, shorter interval => strictly more heat
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double s = 1.0 + rng.next_in(0.0, 50.0);
        const double d1 = rng.next_in(0.1, 500.0);
        const double d2 = d1 + rng.next_in(0.1, 500.0);
        CHECK(heat_increment(2.0, s, d1, 1.0) > heat_increment(2.0, s, d2, 1.0));
    }
}

TEST_CASE("window update decays then heats and resets the counter") {
    TemperatureParams params{0.1, 1.0, 2.0, 10};

    TemperatureRecord cool{0, 100.0, 0, true};
    auto updated = update_temperature(cool, 10, params);
    CHECK_THAT(updated.temperature, Catch::Matchers::WithinAbs(kHundredOverE, 1e-3));
    CHECK(updated.pending_accesses == 0);
    CHECK(updated.last_query_ts == 10);

    TemperatureRecord warm{0, 100.0, 3, true};
    updated = update_temperature(warm, 10, params);
    CHECK_THAT(updated.temperature, Catch::Matchers::WithinAbs(kHundredOverE + 4.8, 1e-3));

    TemperatureRecord idle{0, 0.0, 0, true};
    CHECK(update_temperature(idle, 10, params).temperature == 0.0);

    CHECK_THROWS_AS(update_temperature(cool, 7, params), ContractError);
}

TEST_CASE("record access defers the temperature update") {
    TemperatureRecord record{5, 1.5, 0, true};
    auto once = record_access(record);
    CHECK(once.pending_accesses == 1);
    CHECK(once.temperature == 1.5);
    CHECK(once.last_query_ts == 5);
    CHECK(record_access(once).pending_accesses == 2);

    record.pending_accesses = 41;
    CHECK(record_access(record).pending_accesses == 42);
}

TEST_CASE("fresh records start at the heat-source temperature") {
    TemperatureParams params{0.1, 1.0, 2.0, 10};
    auto record = init_record(0, params);
    CHECK(record.temperature == 2.0);
    CHECK(record.pending_accesses == 0);
    CHECK(record.last_query_ts == 0);
    CHECK(record.tracked);

    params.t_heat = 10.0;
    auto later = init_record(500, params);
    CHECK(later.temperature == 10.0);
    CHECK(later.last_query_ts == 500);

    CHECK(init_record(500, params) == later);
}

TEST_CASE("classification is a three-way threshold split") {
    HeatThresholds thresholds{3.0, 0.5};
    CHECK(classify(5.0, thresholds) == HeatClass::Hot);
    CHECK(classify(1.0, thresholds) == HeatClass::Cold);
    CHECK(classify(0.1, thresholds) == HeatClass::Overcooled);
    CHECK(classify(3.0, thresholds) == HeatClass::Hot);       // boundary: >= hot
    CHECK(classify(0.5, thresholds) == HeatClass::Cold);      // boundary: >= overcooled
    CHECK_THROWS_AS(classify(1.0, HeatThresholds{0.5, 3.0}), ArgumentError);
}

TEST_CASE("records encode to exactly eight bytes, big-endian") {
    auto zero = encode_record(TemperatureRecord{0, 0.0, 0, true});
    CHECK(zero == std::array<std::uint8_t, 8>{0, 0, 0, 0, 0, 0, 0, 0});

    auto one = encode_record(TemperatureRecord{1, 1.0, 0, true});
    CHECK(one == std::array<std::uint8_t, 8>{0, 0, 0, 1, 0x3F, 0x80, 0, 0});

    CHECK_THROWS_AS(encode_record(TemperatureRecord{0x1'0000'0000ll, 1.0, 0, true}),
                    EncodingError);

    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        TemperatureRecord record{
            static_cast<Timestamp>(rng.next_below(0x100000000ull)),
            static_cast<double>(static_cast<float>(rng.next_in(0.0, 1e6))), 0, true};
        CHECK(decode_record(encode_record(record)) == record);
    }
    // bytes -> record -> bytes is the identity as well
    for (int i = 0; i < 2000; ++i) {
        std::array<std::uint8_t, 8> bytes;
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next_below(256));
        bytes[4] &= 0x7F;  // keep the temperature non-negative
        CHECK(encode_record(decode_record(bytes)) == bytes);
    }
}

TEST_CASE("idle data cools monotonically") {
    TemperatureParams params = TemperatureParams::defaults();
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        TemperatureRecord record{0, rng.next_in(1e-6, 100.0), 0, true};
        auto updated = update_temperature(record, params.window, params);
        CHECK(updated.temperature < record.temperature);
    }
}

TEST_CASE("an update with s accesses equals a pure decay plus s unit heats") {
    TemperatureParams params = TemperatureParams::defaults();
    Rng rng(5);
    const double w = static_cast<double>(params.window);
    for (int i = 0; i < 200; ++i) {
        const auto s = static_cast<std::uint32_t>(rng.next_below(50));
        TemperatureRecord record{0, rng.next_in(0.0, 10.0), s, true};
        auto updated = update_temperature(record, params.window, params);
        const double expected =
            decay(record.temperature, w, params.k) +
            s * heat_increment(params.t_heat, 1.0, w, params.gamma);
        CHECK_THAT(updated.temperature, Catch::Matchers::WithinRel(expected, 1e-12) ||
                                            Catch::Matchers::WithinAbs(expected, 1e-15));
    }
}

TEST_CASE("batch window tick matches per-record updates") {
    TemperatureParams params = TemperatureParams::defaults();
    Rng rng(9);
    std::vector<TemperatureRecord> batch;
    std::vector<TemperatureRecord> solo;
    for (int i = 0; i < 64; ++i) {
        TemperatureRecord record{0, rng.next_in(0.0, 10.0),
                                 static_cast<std::uint32_t>(rng.next_below(8)), true};
        batch.push_back(record);
        solo.push_back(record);
    }
    batch[10].tracked = false;
    solo[10].tracked = false;

    window_tick(batch, params.window, params);
    for (auto& record : solo)
        if (record.tracked) record = update_temperature(record, params.window, params);
    CHECK(batch == solo);
}

// Two access traces over eleven windows, expressed as per-window access
// counts. A is touched early and again late; B is touched later at first,
// then in a burst that has gone cold by window 11.
TEST_CASE("late and dense accesses outrank early ones; stale bursts cool off") {
    const TemperatureParams params = TemperatureParams::defaults();
    const std::uint32_t trace_a[11] = {1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1};
    const std::uint32_t trace_b[11] = {0, 0, 1, 1, 3, 0, 0, 0, 0, 0, 0};

    auto run = [&](const std::uint32_t (&trace)[11], int upto) {
        TemperatureRecord record = init_record(0, params);
        for (int window = 1; window <= upto; ++window) {
            record.pending_accesses = trace[window - 1];
            record = update_temperature(record, window * params.window, params);
        }
        return record.temperature;
    };

    CHECK(run(trace_b, 3) > run(trace_a, 3));
    CHECK(run(trace_b, 4) > run(trace_a, 4));
    CHECK(run(trace_b, 11) < run(trace_a, 11));
}
