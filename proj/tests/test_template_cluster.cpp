#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <map>

#include "tscab/random.hpp"
#include "tscab/template_cluster.hpp"

using namespace tscab;

// Independent DTW oracle: plain recursion over the three warping steps,
// memoized on (i, j). Kept separate from the rolling-row implementation.
static double dtw_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    std::map<std::pair<std::size_t, std::size_t>, double> memo;
    std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i,
                                                             std::size_t j) -> double {
        if (i == 0 && j == 0) return 0.0;
        if (i == 0 || j == 0) return std::numeric_limits<double>::infinity();
        auto it = memo.find({i, j});
        if (it != memo.end()) return it->second;
        const double cost = std::abs(a[i - 1] - b[j - 1]);
        const double best =
            cost + std::min({go(i - 1, j - 1), go(i - 1, j), go(i, j - 1)});
        memo[{i, j}] = best;
        return best;
    };
    return go(a.size(), b.size());
}

TEST_CASE("extraction erases time bounds and aggregates") {
    Query scan;
    scan.kind = 1;
    scan.fields = {"ozone"};
    scan.series = {3};
    scan.t_start = 1000;
    scan.t_end = 2000;
    scan.issue_ts = 2500;

    Query averaged = scan;
    averaged.kind = 4;
    averaged.aggregate = Aggregate::Avg;
    averaged.t_start = 4000;
    averaged.t_end = 4500;

    auto a = extract_template(scan, 5000);
    auto b = extract_template(averaged, 5000);
    CHECK(a.canonical_form == b.canonical_form);
    CHECK(a.record == std::pair<Timestamp, Timestamp>{3000, 4000});
    CHECK(b.record == std::pair<Timestamp, Timestamp>{500, 1000});

    Query ending_now = scan;
    ending_now.t_end = 5000;
    CHECK(extract_template(ending_now, 5000).record.first == 0);

    Query grouped = scan;
    grouped.kind = 5;
    grouped.series = {3, 4};
    grouped.aggregate = Aggregate::Max;
    grouped.group_by = "site";
    Query multi = scan;
    multi.kind = 2;
    multi.series = {3, 4};
    CHECK(extract_template(grouped, 5000).canonical_form ==
          extract_template(multi, 5000).canonical_form);
}

TEST_CASE("dtw distance matches hand-checked cases") {
    CHECK(dtw_distance({0, 1, 2}, {0, 1, 2}) == 0.0);
    CHECK(dtw_distance({4}, {1.5}) == 2.5);
    CHECK(dtw_distance({1, 3}, {1, 2, 3}) == 1.0);
    CHECK_THROWS_AS(dtw_distance({}, {1}), ArgumentError);
}

TEST_CASE("dtw is symmetric, non-negative, and zero on identity") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + rng.next_below(12)), b(1 + rng.next_below(12));
        for (auto& x : a) x = static_cast<double>(rng.next_below(5));
        for (auto& x : b) x = static_cast<double>(rng.next_below(5));
        const double ab = dtw_distance(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab == dtw_distance(b, a));
        CHECK(dtw_distance(a, a) == 0.0);
        CHECK(ab == dtw_oracle(a, b));
    }
}

static HistoryTable table_of(std::initializer_list<std::pair<int, std::vector<std::uint64_t>>> rows) {
    HistoryTable table;
    for (const auto& [id, counts] : rows) table[id] = ArrivalHistory{300, counts};
    return table;
}

TEST_CASE("assignment joins near centers or founds singletons") {
    ClusterSet set;
    auto histories = table_of({{0, {5, 5, 5}}, {1, {5, 5, 5}}, {2, {50, 0, 50}}});

    const int first = assign(set, 0, histories, 3.0, 64, 100);
    REQUIRE(set.clusters.size() == 1);
    CHECK(set.clusters[0].center_template == 0);

    // identical history joins at distance zero
    const int second = assign(set, 1, histories, 3.0, 64, 200);
    CHECK(second == first);
    CHECK(set.clusters[0].members == std::set<int>{0, 1});
    CHECK(set.clusters[0].last_received == 200);

    // far from every center: new singleton
    const int third = assign(set, 2, histories, 3.0, 64, 300);
    CHECK(third != first);
    REQUIRE(set.clusters.size() == 2);

    // every template sits in exactly one non-empty cluster
    for (int t : {0, 1, 2}) {
        int owners = 0;
        for (const auto& c : set.clusters) owners += c.members.count(t);
        CHECK(owners == 1);
    }
    for (const auto& c : set.clusters) CHECK(!c.members.empty());
}

TEST_CASE("ties go to the lowest cluster id") {
    ClusterSet set;
    auto histories = table_of({{0, {10}}, {1, {20}}, {2, {15}}});
    assign(set, 0, histories, 2.0, 64, 1);
    assign(set, 1, histories, 2.0, 64, 2);
    // template 2 is at distance 5 from both centers
    ClusterSet wide = set;
    const int joined = assign(wide, 2, histories, 6.0, 64, 3);
    CHECK(joined == 0);
}

TEST_CASE("rebalance moves drifted members and re-centers abandoned clusters") {
    SECTION("no drift, no change") {
        ClusterSet set;
        auto histories = table_of({{0, {4, 4}}, {1, {4, 5}}});
        assign(set, 0, histories, 5.0, 64, 1);
        assign(set, 1, histories, 5.0, 64, 2);
        auto before = set.clusters[0].members;
        rebalance(set, histories, 5.0, 64);
        REQUIRE(set.clusters.size() == 1);
        CHECK(set.clusters[0].members == before);
    }

    SECTION("a drifted member leaves and founds its own cluster") {
        auto histories = table_of({{0, {4, 4}}, {1, {4, 5}}});
        ClusterSet set;
        assign(set, 0, histories, 5.0, 64, 1);
        assign(set, 1, histories, 5.0, 64, 2);
        histories[1].counts = {4, 5, 90, 90};  // template 1 drifts away
        rebalance(set, histories, 5.0, 64);
        REQUIRE(set.clusters.size() == 2);
        CHECK(set.clusters[0].members == std::set<int>{0});
        CHECK(set.clusters[1].members == std::set<int>{1});
        // single-pass guarantee: surviving members are within rho of centers
        for (const auto& c : set.clusters)
            for (int m : c.members)
                CHECK(dtw_distance(windowed_counts(histories.at(m), 64), c.center_history) <
                      5.0);
    }

    SECTION("a drifted center hands the cluster to the tightest member") {
        auto histories = table_of({{0, {4, 4}}, {1, {4, 5}}, {2, {5, 4}}});
        ClusterSet set;
        assign(set, 0, histories, 6.0, 64, 1);
        assign(set, 1, histories, 6.0, 64, 2);
        assign(set, 2, histories, 6.0, 64, 3);
        REQUIRE(set.clusters.size() == 1);
        histories[0].counts = {200, 200};  // the founding center drifts
        rebalance(set, histories, 6.0, 64);
        REQUIRE(set.clusters.size() == 2);
        CHECK(set.clusters[0].members == std::set<int>{1, 2});
        CHECK((set.clusters[0].center_template == 1 || set.clusters[0].center_template == 2));
        CHECK(set.clusters[1].members == std::set<int>{0});
    }
}

TEST_CASE("stale clusters are evicted") {
    ClusterSet set;
    auto histories = table_of({{0, {1}}, {1, {50}}});
    assign(set, 0, histories, 2.0, 64, 1000);
    assign(set, 1, histories, 2.0, 64, 7000);
    evict_stale(set, 3600, 7200);  // cluster 0 last heard at t=1000
    REQUIRE(set.clusters.size() == 1);
    CHECK(set.clusters[0].members == std::set<int>{1});

    evict_stale(set, 3600, 7000 + 3599);
    CHECK(set.clusters.size() == 1);
    CHECK_THROWS_AS(evict_stale(set, 0, 1), ArgumentError);
}

TEST_CASE("cluster arrival series sums member histories") {
    auto histories = table_of({{0, {1, 2, 3}}, {1, {0, 1, 0}}, {2, {7}}});
    Cluster solo{0, 2, {7}, {2}, 0};
    CHECK(cluster_arrival_series(solo, histories).counts == std::vector<std::uint64_t>{7});

    Cluster pair{1, 0, {}, {0, 1}, 0};
    CHECK(cluster_arrival_series(pair, histories).counts ==
          std::vector<std::uint64_t>{1, 3, 3});

    histories[1].interval_len = 600;
    CHECK_THROWS_AS(cluster_arrival_series(pair, histories), ArgumentError);
}

TEST_CASE("per-cluster series sum to the global arrival series") {
    Rng rng(77);
    HistoryTable histories;
    const int templates = 12, intervals = 20;
    std::vector<std::uint64_t> global(intervals, 0);
    for (int t = 0; t < templates; ++t) {
        ArrivalHistory h{300, {}};
        for (int i = 0; i < intervals; ++i) {
            const auto c = rng.next_below(6);
            h.counts.push_back(c);
            global[i] += c;
        }
        histories[t] = std::move(h);
    }
    ClusterSet set;
    for (int t = 0; t < templates; ++t) assign(set, t, histories, 8.0, 64, t);

    std::vector<std::uint64_t> summed(intervals, 0);
    for (const auto& cluster : set.clusters) {
        const auto series = cluster_arrival_series(cluster, histories);
        for (std::size_t i = 0; i < series.counts.size(); ++i) summed[i] += series.counts[i];
    }
    CHECK(summed == global);
}
