#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/workload.hpp"

namespace tscab {

// A query stripped to its structure: concrete time bounds become
// placeholders and data-shaping operators (aggregates, group-by) are
// dropped, so an AVG over a range and a plain scan of the same series
// collapse onto one form. The field comparison of kind 3 is part of the
// structure and is kept, minus its constant.
struct CanonicalForm {
    int kind = 1;  // 4 collapses to 1, 5 collapses to 2
    std::vector<std::string> fields;
    std::vector<SeriesId> series;
    std::optional<CompareOp> compare;

    friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
    friend auto operator<=>(const CanonicalForm&, const CanonicalForm&) = default;

    std::string key() const {
        std::string k = "k" + std::to_string(kind) + "|f=";
        for (const auto& f : fields) k += f + ";";
        k += "|s=";
        for (auto id : series) k += std::to_string(id) + ";";
        if (compare) k += std::string("|op") + to_string(*compare);
        return k;
    }
};

struct ExtractedTemplate {
    CanonicalForm canonical_form;
    std::pair<Timestamp, Timestamp> record;  // (now - t_end, now - t_start)
};

inline ExtractedTemplate extract_template(const Query& query, Timestamp now) {
    if (now < query.t_end)
        throw ArgumentError("extract_template: query range ends after the extraction time");
    CanonicalForm form;
    form.kind = query.kind == 4 ? 1 : query.kind == 5 ? 2 : query.kind;
    form.fields = query.fields;
    form.series = query.series;
    form.compare = query.compare;
    return {std::move(form), {now - query.t_end, now - query.t_start}};
}

// Per-interval arrival counts of one template, appended as the run advances.
struct ArrivalHistory {
    Timestamp interval_len = 300;
    std::vector<std::uint64_t> counts;
};

// Classic dynamic time warping with absolute-difference local cost and
// match/insert/delete steps.
inline double dtw_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ArgumentError("dtw_distance: empty sequence");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> previous(b.size() + 1, inf);
    std::vector<double> current(b.size() + 1, inf);
    previous[0] = 0.0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        current[0] = inf;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const double cost = std::abs(a[i - 1] - b[j - 1]);
            current[j] = cost + std::min({previous[j - 1], previous[j], current[j - 1]});
        }
        std::swap(previous, current);
    }
    return previous[b.size()];
}

struct Cluster {
    int id = 0;
    int center_template = 0;
    // Snapshot of the center template's windowed history, frozen at founding
    // (or at re-centering); distances are measured against this.
    std::vector<double> center_history;
    std::set<int> members;
    Timestamp last_received = 0;
};

struct ClusterSet {
    std::vector<Cluster> clusters;  // kept sorted by id; ids are never reused
    int next_id = 0;

    Cluster* find(int id) {
        for (auto& c : clusters)
            if (c.id == id) return &c;
        return nullptr;
    }
    const Cluster* membership_of(int template_id) const {
        for (const auto& c : clusters)
            if (c.members.count(template_id)) return &c;
        return nullptr;
    }
};

using HistoryTable = std::map<int, ArrivalHistory>;  // template id -> history

// Last `window` counts as doubles; the re-check window keeps DTW costs
// bounded as histories grow.
inline std::vector<double> windowed_counts(const ArrivalHistory& history, std::size_t window) {
    const std::size_t n = history.counts.size();
    const std::size_t take = std::min(window, n);
    std::vector<double> out;
    out.reserve(take);
    for (std::size_t i = n - take; i < n; ++i)
        out.push_back(static_cast<double>(history.counts[i]));
    return out;
}

// Join the nearest cluster center if its DTW distance is below rho,
// otherwise found a new singleton cluster. Ties go to the lowest cluster id.
inline int assign(ClusterSet& set, int template_id, const HistoryTable& histories, double rho,
                  std::size_t window, Timestamp now) {
    if (!(rho > 0)) throw ArgumentError("assign: rho must be positive");
    auto hit = histories.find(template_id);
    if (hit == histories.end() || hit->second.counts.empty())
        throw ArgumentError("assign: template has no arrival history");
    const auto candidate = windowed_counts(hit->second, window);

    const Cluster* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const auto& cluster : set.clusters) {
        const double d = dtw_distance(candidate, cluster.center_history);
        if (d < best_distance) {
            best_distance = d;
            best = &cluster;
        }
    }
    if (best != nullptr && best_distance < rho) {
        auto* joined = set.find(best->id);
        joined->members.insert(template_id);
        joined->last_received = now;
        return joined->id;
    }
    Cluster fresh;
    fresh.id = set.next_id++;
    fresh.center_template = template_id;
    fresh.center_history = candidate;
    fresh.members = {template_id};
    fresh.last_received = now;
    set.clusters.push_back(std::move(fresh));
    return set.clusters.back().id;
}

// One maintenance pass: drop every member whose windowed history has drifted
// to >= rho from its cluster's center snapshot, then re-assign the dropped
// templates in id order. A cluster losing its center template elects the
// member with the smallest summed distance to the others; emptied clusters
// are deleted.
inline void rebalance(ClusterSet& set, const HistoryTable& histories, double rho,
                      std::size_t window) {
    std::vector<std::pair<int, Timestamp>> reassign_later;
    for (auto& cluster : set.clusters) {
        std::vector<int> leaving;
        for (int member : cluster.members) {
            const auto view = windowed_counts(histories.at(member), window);
            if (view.empty()) continue;
            if (dtw_distance(view, cluster.center_history) >= rho) leaving.push_back(member);
        }
        for (int member : leaving) {
            cluster.members.erase(member);
            reassign_later.push_back({member, cluster.last_received});
        }
        if (!cluster.members.empty() && !cluster.members.count(cluster.center_template)) {
            // re-center on the member closest to all the others
            int new_center = *cluster.members.begin();
            double best_sum = std::numeric_limits<double>::infinity();
            for (int candidate : cluster.members) {
                const auto view = windowed_counts(histories.at(candidate), window);
                double sum = 0.0;
                for (int other : cluster.members) {
                    if (other == candidate) continue;
                    sum += dtw_distance(view, windowed_counts(histories.at(other), window));
                }
                if (sum < best_sum) {
                    best_sum = sum;
                    new_center = candidate;
                }
            }
            cluster.center_template = new_center;
            cluster.center_history = windowed_counts(histories.at(new_center), window);
        }
    }
    std::erase_if(set.clusters, [](const Cluster& c) { return c.members.empty(); });
    std::sort(reassign_later.begin(), reassign_later.end());
    for (const auto& [member, received] : reassign_later)
        assign(set, member, histories, rho, window, received);
}

// Delete clusters that have not received a template within the timeout.
// Member histories stay in the table for re-assignment on next arrival.
inline void evict_stale(ClusterSet& set, Timestamp timeout, Timestamp now) {
    if (timeout <= 0) throw ArgumentError("evict_stale: timeout must be positive");
    std::erase_if(set.clusters,
                  [&](const Cluster& c) { return c.last_received < now - timeout; });
}

// Element-wise sum of the member histories, aligned by interval index.
inline ArrivalHistory cluster_arrival_series(const Cluster& cluster,
                                             const HistoryTable& histories) {
    if (cluster.members.empty())
        throw ArgumentError("cluster_arrival_series: empty cluster");
    ArrivalHistory sum;
    bool first = true;
    for (int member : cluster.members) {
        const auto& history = histories.at(member);
        if (first) {
            sum.interval_len = history.interval_len;
            first = false;
        } else if (history.interval_len != sum.interval_len) {
            throw ArgumentError("cluster_arrival_series: misaligned interval lengths");
        }
        if (history.counts.size() > sum.counts.size())
            sum.counts.resize(history.counts.size(), 0);
        for (std::size_t i = 0; i < history.counts.size(); ++i)
            sum.counts[i] += history.counts[i];
    }
    return sum;
}

// Dump consumed by harness reports: one line per cluster with the last 32
// arrival counts of the cluster series.
inline void write_cluster_dump(std::ostream& os, const ClusterSet& set,
                               const HistoryTable& histories) {
    os << "cluster_id,center_template,members,last_counts\n";
    for (const auto& cluster : set.clusters) {
        os << cluster.id << ',' << cluster.center_template << ',';
        bool first = true;
        for (int member : cluster.members) {
            if (!first) os << ';';
            os << member;
            first = false;
        }
        os << ',';
        const auto series = cluster_arrival_series(cluster, histories);
        const std::size_t take = std::min<std::size_t>(32, series.counts.size());
        for (std::size_t i = series.counts.size() - take; i < series.counts.size(); ++i) {
            if (i != series.counts.size() - take) os << ';';
            os << series.counts[i];
        }
        os << '\n';
    }
}

}  // namespace tscab
