#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/workload.hpp"

namespace tscab {

using BucketId = std::uint64_t;
using TimestampStream = std::vector<BucketId>;

// Misra-Gries summary: at most k-1 live counters regardless of how long the
// stream runs. After processing m elements, a bucket with true frequency f
// carries a counter C with f - m/k <= C <= f, and any bucket with f > m/k
// is guaranteed to still be in the table.
struct CounterTable {
    std::size_t capacity = 2;                    // k
    std::map<BucketId, std::uint64_t> entries;   // bucket -> counter, all >= 1

    void validate() const {
        if (capacity < 2) throw ArgumentError("CounterTable: capacity must be at least 2");
        if (entries.size() > capacity - 1)
            throw ArgumentError("CounterTable: more than k-1 entries");
    }
};

struct FrequencyEstimate {
    BucketId bucket = 0;
    std::uint64_t estimate = 0;   // the counter; never exceeds the true count
    std::uint64_t freq_floor = 0; // certified minimum true frequency (= estimate)
    double freq_ceiling = 0.0;    // estimate + m/k
};

// Every bucket index whose span intersects the inclusive range
// [t_start, t_end], in ascending order.
inline TimestampStream expand_range_to_timestamps(Timestamp t_start, Timestamp t_end,
                                                  Timestamp bucket_len) {
    if (bucket_len <= 0) throw ArgumentError("expand: bucket length must be positive");
    if (t_start > t_end) throw ArgumentError("expand: t_start > t_end");
    const auto first = static_cast<BucketId>(t_start / bucket_len);
    const auto last = static_cast<BucketId>(t_end / bucket_len);
    TimestampStream buckets;
    buckets.reserve(static_cast<std::size_t>(last - first + 1));
    for (BucketId b = first; b <= last; ++b) buckets.push_back(b);
    return buckets;
}

inline TimestampStream expand_query_to_timestamps(const Query& query, Timestamp bucket_len) {
    return expand_range_to_timestamps(query.t_start, query.t_end, bucket_len);
}

// One Misra-Gries step. When the table is full and the element is absent,
// every counter is decremented and the element is not inserted.
inline void mg_process(CounterTable& table, BucketId element) {
    auto it = table.entries.find(element);
    if (it != table.entries.end()) {
        ++it->second;
        return;
    }
    if (table.entries.size() < table.capacity - 1) {
        table.entries.emplace(element, 1);
        return;
    }
    for (auto entry = table.entries.begin(); entry != table.entries.end();) {
        if (--entry->second == 0)
            entry = table.entries.erase(entry);
        else
            ++entry;
    }
}

inline CounterTable mg_run(const TimestampStream& stream, std::size_t k) {
    if (k < 2) throw ArgumentError("mg_run: k must be at least 2");
    CounterTable table{k, {}};
    for (BucketId element : stream) mg_process(table, element);
    return table;
}

// Table entries annotated with their guarantee bounds, sorted by estimate
// descending, ties by bucket id ascending.
inline std::vector<FrequencyEstimate> frequent_buckets(const CounterTable& table,
                                                       std::uint64_t m, std::size_t k) {
    if (k < 2) throw ArgumentError("frequent_buckets: k must be at least 2");
    const double slack = static_cast<double>(m) / static_cast<double>(k);
    std::vector<FrequencyEstimate> out;
    out.reserve(table.entries.size());
    for (const auto& [bucket, counter] : table.entries)
        out.push_back({bucket, counter, counter, static_cast<double>(counter) + slack});
    std::sort(out.begin(), out.end(), [](const FrequencyEstimate& a, const FrequencyEstimate& b) {
        if (a.estimate != b.estimate) return a.estimate > b.estimate;
        return a.bucket < b.bucket;
    });
    return out;
}

// Report consumed by the migration planner: bucket_start_ts,counter,lower_bound
inline void write_frequent_report(std::ostream& os,
                                  const std::vector<FrequencyEstimate>& estimates,
                                  Timestamp bucket_len) {
    os << "bucket_start_ts,counter,lower_bound\n";
    for (const auto& e : estimates)
        os << e.bucket * static_cast<BucketId>(bucket_len) << ',' << e.estimate << ','
           << e.freq_floor << '\n';
}

}  // namespace tscab
