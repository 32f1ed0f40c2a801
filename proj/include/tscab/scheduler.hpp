#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/frequent_timestamps.hpp"
#include "tscab/temperature.hpp"
#include "tscab/workload.hpp"

namespace tscab {

enum class TierLevel { Cloud, Edge, End };

inline const char* to_string(TierLevel level) {
    switch (level) {
        case TierLevel::Cloud: return "CLOUD";
        case TierLevel::Edge: return "EDGE";
        case TierLevel::End: return "END";
    }
    return "?";
}

// Unit of migration: one series over one frequent-timestamp bucket.
struct SegmentKey {
    SeriesId series = 0;
    BucketId bucket = 0;
    friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;
};

inline std::string to_string(const SegmentKey& key) {
    return "series " + std::to_string(key.series) + " bucket " + std::to_string(key.bucket);
}

// Which segments exist at the tier of record, and how many raw points each
// holds.
struct SegmentCatalog {
    std::map<SegmentKey, std::uint64_t> points;

    std::uint64_t points_of(const SegmentKey& key) const {
        auto it = points.find(key);
        return it == points.end() ? 0 : it->second;
    }
};

// Compact replacement for the raw points of an over-cooled segment.
struct DataSummary {
    SegmentKey segment;
    std::uint64_t count = 0;
    double min = 0, max = 0, mean = 0, first = 0, last = 0;
    friend bool operator==(const DataSummary&, const DataSummary&) = default;
};

inline DataSummary summarize_overcooled(const SegmentKey& segment,
                                        std::span<const double> raw_points) {
    if (raw_points.empty()) throw ArgumentError("summarize_overcooled: empty segment");
    DataSummary s;
    s.segment = segment;
    s.count = raw_points.size();
    s.first = raw_points.front();
    s.last = raw_points.back();
    s.min = s.max = raw_points.front();
    double sum = 0;
    for (double v : raw_points) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.count);
    return s;
}

struct TierSizes {
    std::uint64_t cloud = 0;
    std::uint64_t edge = 0;
};

// Resident sets of the two cache tiers plus the summarized marker for the
// tier of record. The version is bumped on every apply so stale plans are
// rejected.
struct Placement {
    std::uint64_t version = 0;
    std::set<SegmentKey> cloud, edge;
    std::set<SegmentKey> summarized;
    std::map<SegmentKey, DataSummary> summaries;
    std::uint64_t occupancy_cloud = 0, occupancy_edge = 0;  // points

    bool resident(const SegmentKey& key) const {
        return cloud.count(key) != 0 || edge.count(key) != 0;
    }
};

struct PreheatAction {
    SegmentKey segment;
    bool to_cloud = false, to_edge = false;
};

struct DemoteAction {
    SegmentKey segment;
    bool from_cloud = false, from_edge = false;
};

struct MigrationPlan {
    std::uint64_t base_version = 0;
    std::vector<PreheatAction> preheat;  // rank order
    std::vector<DemoteAction> demote;
    std::vector<SegmentKey> summarize;

    bool empty() const { return preheat.empty() && demote.empty() && summarize.empty(); }
};

// Iterate the window update with the forecast access counts; element i is
// the temperature expected after forecast window i.
inline std::vector<double> predict_future_temperature(const TemperatureRecord& record,
                                                      std::span<const double> predicted_accesses,
                                                      const TemperatureParams& params) {
    if (!record.tracked)
        throw ContractError("predict_future_temperature: record is not tracked");
    const double w = static_cast<double>(params.window);
    std::vector<double> out;
    out.reserve(predicted_accesses.size());
    double t = record.temperature;
    for (double s : predicted_accesses) {
        if (s < 0) throw ArgumentError("predict_future_temperature: negative access count");
        t = decay(t, w, params.k) + heat_increment(params.t_heat, s, w, params.gamma);
        out.push_back(t);
    }
    return out;
}

namespace detail {

inline double peak_temperature(const SegmentKey& key,
                               const std::map<SegmentKey, TemperatureRecord>& records,
                               const std::map<SegmentKey, std::vector<double>>& forecasts) {
    double peak = 0.0;
    if (auto it = records.find(key); it != records.end() && it->second.tracked)
        peak = it->second.temperature;
    if (auto it = forecasts.find(key); it != forecasts.end())
        for (double t : it->second) peak = std::max(peak, t);
    return peak;
}

}  // namespace detail

// Build one round's migration plan.
//
// Preheat candidates are segments whose current-or-predicted temperature
// reaches theta_hot and (when a frequent-bucket report is supplied) whose
// bucket is in it. They are ranked by predicted peak temperature, ties by
// the larger frequent counter, then lower series, then lower bucket, and
// admitted in rank order while the point budget and tier capacities allow;
// a candidate that does not fit is skipped and smaller ones may still be
// admitted. Residents whose peak stays below theta_hot are demoted, and
// over-cooled segments are queued for summarization.
inline MigrationPlan plan_migration(
    const std::map<SegmentKey, TemperatureRecord>& records,
    const std::map<SegmentKey, std::vector<double>>& forecasts,
    const std::optional<std::map<BucketId, std::uint64_t>>& frequent,
    const SegmentCatalog& catalog, const Placement& placement, TierSizes tiers,
    std::uint64_t preheat_budget, const HeatThresholds& thresholds) {
    if (tiers.cloud == 0 || tiers.edge == 0 || preheat_budget == 0)
        throw ArgumentError("plan_migration: tier capacities and budget must be positive");
    thresholds.validate();

    MigrationPlan plan;
    plan.base_version = placement.version;

    // demotions: residents that are cold now and stay cold over the horizon
    std::uint64_t freed_cloud = 0, freed_edge = 0;
    std::set<SegmentKey> residents = placement.cloud;
    residents.insert(placement.edge.begin(), placement.edge.end());
    for (const auto& key : residents) {
        if (detail::peak_temperature(key, records, forecasts) >= thresholds.theta_hot) continue;
        DemoteAction action{key, placement.cloud.count(key) != 0,
                            placement.edge.count(key) != 0};
        if (action.from_cloud) freed_cloud += catalog.points_of(key);
        if (action.from_edge) freed_edge += catalog.points_of(key);
        plan.demote.push_back(action);
    }

    // over-cooled tracked records lose their raw points to a summary
    for (const auto& [key, record] : records) {
        if (!record.tracked || placement.summarized.count(key)) continue;
        if (classify(record.temperature, thresholds) == HeatClass::Overcooled &&
            catalog.points_of(key) > 0)
            plan.summarize.push_back(key);
    }

    // preheat candidates, ranked
    struct Candidate {
        double peak;
        std::uint64_t counter;
        SegmentKey key;
    };
    std::vector<Candidate> candidates;
    std::set<SegmentKey> considered;
    for (const auto& [key, record] : records) considered.insert(key);
    for (const auto& [key, trajectory] : forecasts) considered.insert(key);
    for (const auto& key : considered) {
        const std::uint64_t points = catalog.points_of(key);
        if (points == 0 || placement.summarized.count(key)) continue;
        if (placement.cloud.count(key) && placement.edge.count(key)) continue;
        std::uint64_t counter = 0;
        if (frequent) {
            auto hit = frequent->find(key.bucket);
            if (hit == frequent->end()) continue;
            counter = hit->second;
        }
        const double peak = detail::peak_temperature(key, records, forecasts);
        if (peak < thresholds.theta_hot) continue;
        if (points > tiers.cloud && points > tiers.edge)
            throw PlanningError("plan_migration: segment larger than every tier: " +
                                to_string(key));
        candidates.push_back({peak, counter, key});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.peak != b.peak) return a.peak > b.peak;
        if (a.counter != b.counter) return a.counter > b.counter;
        return a.key < b.key;
    });

    // residents still eligible for pressure eviction, coldest first
    std::set<SegmentKey> already_leaving;
    for (const auto& action : plan.demote) already_leaving.insert(action.segment);
    auto current_temp = [&](const SegmentKey& key) {
        auto it = records.find(key);
        return it != records.end() && it->second.tracked ? it->second.temperature : 0.0;
    };
    std::set<std::pair<double, SegmentKey>> cloud_pool, edge_pool;
    for (const auto& key : placement.cloud)
        if (!already_leaving.count(key)) cloud_pool.insert({current_temp(key), key});
    for (const auto& key : placement.edge)
        if (!already_leaving.count(key)) edge_pool.insert({current_temp(key), key});

    std::uint64_t occupied_cloud = placement.occupancy_cloud - freed_cloud;
    std::uint64_t occupied_edge = placement.occupancy_edge - freed_edge;
    std::map<SegmentKey, DemoteAction> pressure_demotes;

    // Evict the coldest residents of a tier until `points` fit, but only
    // victims colder than the incoming candidate. Commits nothing unless the
    // candidate actually fits afterwards.
    auto make_room = [&](std::set<std::pair<double, SegmentKey>>& pool, std::uint64_t& occupied,
                         std::uint64_t cap, bool cloud_side, std::uint64_t points,
                         double peak) -> bool {
        if (occupied + points <= cap) return true;
        std::vector<std::pair<double, SegmentKey>> victims;
        std::uint64_t freed = 0;
        for (const auto& entry : pool) {
            if (entry.first >= peak) break;
            freed += catalog.points_of(entry.second);
            victims.push_back(entry);
            if (occupied + points <= cap + freed) break;
        }
        if (occupied + points > cap + freed) return false;
        for (const auto& victim : victims) {
            pool.erase(victim);
            occupied -= catalog.points_of(victim.second);
            auto [it, fresh] = pressure_demotes.try_emplace(victim.second);
            it->second.segment = victim.second;
            if (cloud_side) it->second.from_cloud = true;
            else it->second.from_edge = true;
        }
        return occupied + points <= cap;
    };

    std::uint64_t budget = preheat_budget;
    for (const auto& candidate : candidates) {
        const std::uint64_t points = catalog.points_of(candidate.key);
        if (points > budget) continue;
        const bool on_cloud = placement.cloud.count(candidate.key) != 0;
        const bool on_edge = placement.edge.count(candidate.key) != 0;
        const bool cloud_free = !on_cloud && occupied_cloud + points <= tiers.cloud;
        const bool edge_free = !on_edge && occupied_edge + points <= tiers.edge;
        PreheatAction action{candidate.key, false, false};
        if (cloud_free && edge_free) {
            // replicate only when both tiers have room without evicting
            action.to_cloud = action.to_edge = true;
        } else if (edge_free) {
            action.to_edge = true;
        } else if (cloud_free) {
            action.to_cloud = true;
        } else if (!on_edge && points <= tiers.edge &&
                   make_room(edge_pool, occupied_edge, tiers.edge, false, points,
                             candidate.peak)) {
            action.to_edge = true;
        } else if (!on_cloud && points <= tiers.cloud &&
                   make_room(cloud_pool, occupied_cloud, tiers.cloud, true, points,
                             candidate.peak)) {
            action.to_cloud = true;
        } else {
            continue;
        }
        if (action.to_cloud) occupied_cloud += points;
        if (action.to_edge) occupied_edge += points;
        budget -= points;
        plan.preheat.push_back(action);
    }
    for (const auto& [key, action] : pressure_demotes) plan.demote.push_back(action);
    return plan;
}

// Apply all plan actions atomically against the placement version the plan
// was computed for.
inline Placement apply_plan(Placement placement, const MigrationPlan& plan,
                            const SegmentCatalog& catalog, TierSizes tiers) {
    if (plan.base_version != placement.version)
        throw StalePlanError("apply_plan: plan was computed against placement version " +
                             std::to_string(plan.base_version) + ", current is " +
                             std::to_string(placement.version));
    for (const auto& action : plan.demote) {
        if (action.from_cloud && placement.cloud.erase(action.segment))
            placement.occupancy_cloud -= catalog.points_of(action.segment);
        if (action.from_edge && placement.edge.erase(action.segment))
            placement.occupancy_edge -= catalog.points_of(action.segment);
    }
    for (const auto& key : plan.summarize) {
        if (placement.summarized.count(key)) continue;  // idempotent
        if (placement.cloud.erase(key))
            placement.occupancy_cloud -= catalog.points_of(key);
        if (placement.edge.erase(key))
            placement.occupancy_edge -= catalog.points_of(key);
        placement.summarized.insert(key);
    }
    for (const auto& action : plan.preheat) {
        const std::uint64_t points = catalog.points_of(action.segment);
        if (action.to_cloud && placement.cloud.insert(action.segment).second)
            placement.occupancy_cloud += points;
        if (action.to_edge && placement.edge.insert(action.segment).second)
            placement.occupancy_edge += points;
    }
    if (placement.occupancy_cloud > tiers.cloud || placement.occupancy_edge > tiers.edge)
        throw PlanningError("apply_plan: plan exceeds a tier capacity");
    ++placement.version;
    return placement;
}

struct LookupResult {
    bool hit = false;
    TierLevel serving = TierLevel::End;
    bool summarized = false;  // the miss touched a summarized-only segment
};

// A query hits only when every existing segment it overlaps is resident on
// CLOUD or EDGE; it is served by CLOUD when cloud holds everything, else by
// EDGE when cloud+edge cover it. Touching a summarized segment is a miss
// flagged as such.
inline LookupResult lookup(const Placement& placement, const Query& query,
                           const SegmentCatalog& catalog, Timestamp bucket_len) {
    const auto buckets = expand_query_to_timestamps(query, bucket_len);
    bool any = false, all_cloud = true, all_cached = true, touched_summary = false;
    for (SeriesId series : query.series) {
        for (BucketId bucket : buckets) {
            const SegmentKey key{series, bucket};
            if (catalog.points_of(key) == 0) continue;
            any = true;
            if (placement.summarized.count(key)) {
                touched_summary = true;
                all_cloud = all_cached = false;
                continue;
            }
            const bool on_cloud = placement.cloud.count(key) != 0;
            const bool on_edge = placement.edge.count(key) != 0;
            all_cloud = all_cloud && on_cloud;
            all_cached = all_cached && (on_cloud || on_edge);
        }
    }
    if (!any) return {true, TierLevel::Cloud, false};  // nothing to fetch
    if (touched_summary) return {false, TierLevel::End, true};
    if (all_cloud) return {true, TierLevel::Cloud, false};
    if (all_cached) return {true, TierLevel::Edge, false};
    return {false, TierLevel::End, false};
}

// Audit log, one line per action: tick,action,series,bucket,tiers
inline void append_plan_log(std::ostream& os, std::uint64_t tick, const MigrationPlan& plan) {
    for (const auto& action : plan.preheat) {
        os << tick << ",PREHEAT," << action.segment.series << ',' << action.segment.bucket
           << ',';
        if (action.to_cloud && action.to_edge) os << "CLOUD+EDGE";
        else if (action.to_cloud) os << "CLOUD";
        else os << "EDGE";
        os << '\n';
    }
    for (const auto& action : plan.demote) {
        os << tick << ",DEMOTE," << action.segment.series << ',' << action.segment.bucket
           << ',';
        if (action.from_cloud && action.from_edge) os << "CLOUD+EDGE";
        else if (action.from_cloud) os << "CLOUD";
        else os << "EDGE";
        os << '\n';
    }
    for (const auto& key : plan.summarize)
        os << tick << ",SUMMARIZE," << key.series << ',' << key.bucket << ",END\n";
}

}  // namespace tscab
