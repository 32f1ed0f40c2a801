#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>

#include "tscab/errors.hpp"

namespace tscab {

using Timestamp = std::int64_t;  // seconds since epoch

// Thermal-model knobs. Cooling follows Newton's law; each access radiates a
// fixed quantum of heat that is spread over the update window, so the same
// number of accesses packed into a shorter interval warms the data more.
struct TemperatureParams {
    double k = 0.1 / 300.0;  // cooling rate, per second
    double gamma = 1.0;      // heating rate
    double t_heat = 2.0;     // heat-source temperature
    Timestamp window = 300;  // update window length, seconds

    // Decay exponent 0.1 per 300 s window, T0 = 2.
    static TemperatureParams defaults() { return {}; }

    void validate() const {
        if (!(k > 0) || !(gamma > 0) || !(t_heat > 0) || window <= 0)
            throw ArgumentError("TemperatureParams: all fields must be strictly positive");
    }
};

// Per-segment state: the Table-1 style tuple plus the access counter that
// accumulates between window boundaries. Dropped (untracked) records carry
// no payload.
struct TemperatureRecord {
    Timestamp last_query_ts = 0;
    double temperature = 0.0;
    std::uint32_t pending_accesses = 0;  // s, reset at every window boundary
    bool tracked = true;

    friend bool operator==(const TemperatureRecord&, const TemperatureRecord&) = default;
};

enum class HeatClass { Hot, Cold, Overcooled };

struct HeatThresholds {
    double theta_hot = 2.0;          // default: as warm as a fresh insert
    double theta_overcooled = 0.1;   // default: 0.05 * t_heat

    static HeatThresholds for_heat_source(double t_heat) {
        return {t_heat, 0.05 * t_heat};
    }

    void validate() const {
        if (!(theta_hot > theta_overcooled) || theta_overcooled < 0)
            throw ArgumentError("HeatThresholds: need theta_hot > theta_overcooled >= 0");
    }
};

// T(t_prev) * e^{-k * delta}
inline double decay(double t_prev, double delta, double k) {
    if (delta < 0) throw ArgumentError("decay: negative elapsed time");
    if (!(k > 0)) throw ArgumentError("decay: cooling rate must be positive");
    return t_prev * std::exp(-k * delta);
}

// gamma * t_heat^4 * s / delta. Accepts fractional s so that forecast access
// counts can be fed through the same formula.
inline double heat_increment(double t_heat, double s, double delta, double gamma) {
    if (delta <= 0) throw ArgumentError("heat_increment: interval must be positive");
    if (s < 0) throw ArgumentError("heat_increment: access count must be non-negative");
    const double t4 = t_heat * t_heat * t_heat * t_heat;
    return gamma * t4 * s / delta;
}

// Fresh record for newly inserted (or re-accessed after drop) data.
inline TemperatureRecord init_record(Timestamp now, const TemperatureParams& params) {
    return TemperatureRecord{now, params.t_heat, 0, true};
}

// Deferred update: an access only bumps the counter; temperature is
// recomputed at the next window boundary.
inline TemperatureRecord record_access(TemperatureRecord record) {
    if (!record.tracked) throw ContractError("record_access: record is not tracked");
    ++record.pending_accesses;
    return record;
}

// Window-boundary update: decay over the window, then add the heat from the
// accesses accumulated in it.
inline TemperatureRecord update_temperature(TemperatureRecord record, Timestamp now,
                                            const TemperatureParams& params) {
    if (!record.tracked) throw ContractError("update_temperature: record is not tracked");
    if (now - record.last_query_ts != params.window)
        throw ContractError("update_temperature: called off a window boundary");
    const double w = static_cast<double>(params.window);
    record.temperature = decay(record.temperature, w, params.k) +
                         heat_increment(params.t_heat, record.pending_accesses, w, params.gamma);
    record.pending_accesses = 0;
    record.last_query_ts = now;
    return record;
}

// Batch form of update_temperature; records are independent.
inline void window_tick(std::span<TemperatureRecord> records, Timestamp now,
                        const TemperatureParams& params) {
    for (auto& record : records)
        if (record.tracked) record = update_temperature(record, now, params);
}

inline HeatClass classify(double temperature, const HeatThresholds& thresholds) {
    thresholds.validate();
    if (temperature >= thresholds.theta_hot) return HeatClass::Hot;
    if (temperature < thresholds.theta_overcooled) return HeatClass::Overcooled;
    return HeatClass::Cold;
}

// 8-byte wire form: 4-byte big-endian unsigned seconds, then the big-endian
// IEEE-754 binary32 temperature.
inline std::array<std::uint8_t, 8> encode_record(const TemperatureRecord& record) {
    if (!record.tracked) throw EncodingError("encode_record: record is not tracked");
    if (record.last_query_ts < 0 || record.last_query_ts > 0xFFFFFFFFll)
        throw EncodingError("encode_record: timestamp does not fit in 32 bits");
    const auto ts = static_cast<std::uint32_t>(record.last_query_ts);
    const float temp = static_cast<float>(record.temperature);
    std::uint32_t bits;
    std::memcpy(&bits, &temp, sizeof bits);
    return {
        static_cast<std::uint8_t>(ts >> 24),   static_cast<std::uint8_t>(ts >> 16),
        static_cast<std::uint8_t>(ts >> 8),    static_cast<std::uint8_t>(ts),
        static_cast<std::uint8_t>(bits >> 24), static_cast<std::uint8_t>(bits >> 16),
        static_cast<std::uint8_t>(bits >> 8),  static_cast<std::uint8_t>(bits),
    };
}

inline TemperatureRecord decode_record(std::span<const std::uint8_t, 8> bytes) {
    const std::uint32_t ts = (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
                             (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
    const std::uint32_t bits = (std::uint32_t(bytes[4]) << 24) | (std::uint32_t(bytes[5]) << 16) |
                               (std::uint32_t(bytes[6]) << 8) | std::uint32_t(bytes[7]);
    float temp;
    std::memcpy(&temp, &bits, sizeof temp);
    return TemperatureRecord{static_cast<Timestamp>(ts), static_cast<double>(temp), 0, true};
}

}  // namespace tscab
