#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tscab/config.hpp"
#include "tscab/errors.hpp"
#include "tscab/forecast.hpp"
#include "tscab/frequent_timestamps.hpp"
#include "tscab/ingest.hpp"
#include "tscab/scheduler.hpp"
#include "tscab/template_cluster.hpp"
#include "tscab/temperature.hpp"
#include "tscab/workload.hpp"

namespace tscab {

// Call counters proving which modules a policy exercised; TITLE and LRU
// must leave all three at zero.
struct PolicyCounters {
    std::uint64_t forecast_fits = 0;
    std::uint64_t forecast_predictions = 0;
    std::uint64_t mg_runs = 0;
};

struct OccupancySample {
    std::uint64_t tick = 0;
    std::uint64_t cloud = 0, edge = 0;
};

struct ExperimentReport {
    std::string policy;
    std::uint64_t seed = 0;
    std::uint64_t cloud_capacity = 0, edge_capacity = 0, preheat_budget = 0;
    std::uint64_t dataset_points = 0;
    std::uint64_t total_queries = 0, hits = 0, misses = 0, summarized_misses = 0;
    std::uint64_t hits_cloud = 0, hits_edge = 0;
    double hit_rate = 0.0;
    std::uint64_t preheat_actions = 0, demote_actions = 0, summarize_actions = 0;
    PolicyCounters counters;
    std::vector<OccupancySample> occupancy;
    std::vector<std::pair<int, Metrics>> forecast_metrics;  // horizon -> cluster average
    std::string plan_log;
    std::string cluster_dump;
    std::string forecast_metrics_csv;  // cluster_id,horizon,mse,mae,rmse rows
    double runtime_seconds = 0.0;      // excluded from the CSV surface

    std::uint64_t capacity() const { return cloud_capacity + edge_capacity; }
};

// Workload and dataset shared by every policy/capacity run of one config.
struct ExperimentInputs {
    SeriesStore store;
    SegmentCatalog catalog;
    std::vector<QueryTemplate> templates;
    std::vector<ArrivalPattern> patterns;
    std::vector<Query> queries;
    Timestamp sim_start = 0;
    std::uint64_t ticks = 0;
};

inline ExperimentInputs prepare_inputs(const ExperimentConfig& config) {
    config.validate();
    ExperimentInputs inputs;
    if (config.dataset == ":synthetic:") {
        inputs.store = synthesize_dataset(config.synthetic);
    } else {
        CsvSchemaSpec spec;
        spec.timestamp_column = config.timestamp_column;
        spec.tag_columns = config.tag_columns;
        inputs.store = ingest_csv_file(config.dataset, spec);
    }
    inputs.catalog = inputs.store.catalog(config.bucket_len());

    const Timestamp span = inputs.store.max_ts - inputs.store.min_ts;
    const auto offset =
        static_cast<Timestamp>(config.sim_start_fraction * static_cast<double>(span));
    inputs.sim_start = ((inputs.store.min_ts + offset) / config.window) * config.window;
    inputs.ticks = static_cast<std::uint64_t>((config.horizon + config.window - 1) / config.window);

    inputs.templates =
        build_template_summary(inputs.store.schema, config.seed, config.templates_per_kind);
    std::vector<ArrivalPattern> pool;
    for (const auto& spec : config.patterns)
        pool.push_back(parse_pattern(spec, config.window, inputs.sim_start));
    if (config.assignment == "auto") {
        inputs.patterns = assign_patterns(inputs.templates.size(), pool, config.seed + 1);
    } else {
        for (const auto& index : detail::split(config.assignment, ','))
            inputs.patterns.push_back(
                pool.at(detail::parse_number<std::size_t>("assignment", index)));
        if (inputs.patterns.size() != inputs.templates.size())
            throw ConfigError("workload.assignment must list one pattern per template (" +
                              std::to_string(inputs.templates.size()) + " templates)");
    }
    WorkloadOptions options = config.workload;
    options.interval_len = config.window;
    inputs.queries = generate(inputs.templates, inputs.patterns, inputs.sim_start,
                              config.horizon, {inputs.store.min_ts, inputs.store.max_ts},
                              config.seed, options);
    return inputs;
}

namespace detail {

// TITLE baseline record: constant heat quantum per access, decay applied
// access-to-access rather than on a window grid.
struct TitleRecord {
    Timestamp last = 0;
    double temp = 0.0;
};

// Pooled recency cache over both tiers: admit on first touch, evict the
// globally least-recent resident when space is needed.
struct LruState {
    std::map<SegmentKey, std::uint64_t> recency;
    std::set<std::pair<std::uint64_t, SegmentKey>> by_age;
    std::uint64_t clock = 0;
};

}  // namespace detail

inline ExperimentReport run_policy(const ExperimentConfig& config, const ExperimentInputs& inputs,
                                   Policy policy) {
    const auto wall_start = std::chrono::steady_clock::now();
    config.validate();

    const bool is_tscab = policy == Policy::TsCabinet;
    const bool is_nof = policy == Policy::TsCabinetNoForecast;
    const bool is_title = policy == Policy::Title;
    const bool is_lru = policy == Policy::Lru;
    const bool thermal = is_tscab || is_nof;
    const bool mines_buckets = is_tscab || is_nof;

    const TemperatureParams params = config.temperature_params();
    const HeatThresholds thresholds = config.heat_thresholds();
    const Timestamp bucket_len = config.bucket_len();
    const TierSizes tiers{config.cloud_capacity, config.edge_capacity};
    const std::uint64_t budget = config.effective_budget();
    const bool planner_active = !is_lru && tiers.cloud > 0 && tiers.edge > 0;
    const bool lru_active = is_lru && tiers.cloud + tiers.edge > 0;

    ExperimentReport report;
    report.policy = to_string(policy);
    report.seed = config.seed;
    report.cloud_capacity = tiers.cloud;
    report.edge_capacity = tiers.edge;
    report.preheat_budget = budget;
    report.dataset_points = inputs.store.total_points;

    Placement placement;
    std::map<SegmentKey, TemperatureRecord> records;
    std::map<SegmentKey, detail::TitleRecord> title_records;
    const double title_heat =
        params.gamma * params.t_heat * params.t_heat * params.t_heat * params.t_heat;

    // clustering + forecasting state (TSCABINET only)
    std::map<std::string, int> template_ids;
    std::vector<std::vector<SeriesId>> template_series;
    HistoryTable histories;
    ClusterSet clusters;
    std::map<int, EnsembleModel> models;
    std::map<int, EnsemblePredictor> cursors;  // warmed to the series end
    std::set<int> unassigned;
    std::map<int, std::uint64_t> tick_counts;
    std::map<int, std::vector<int>> membership_signature;

    // frequent-timestamp state (TSCABINET + NO_FORECAST)
    std::deque<std::map<BucketId, std::uint64_t>> recent_buckets;
    std::deque<std::uint64_t> recent_queries;
    std::deque<std::uint64_t> recent_expansions;

    detail::LruState lru;

    std::ostringstream plan_log;
    std::size_t next_query = 0;

    for (std::uint64_t tick = 0; tick < inputs.ticks; ++tick) {
        const Timestamp tick_start =
            inputs.sim_start + static_cast<Timestamp>(tick) * config.window;
        const Timestamp tick_end = tick_start + config.window;
        std::map<BucketId, std::uint64_t> tick_buckets;
        std::uint64_t tick_query_count = 0, tick_expansions = 0;

        for (; next_query < inputs.queries.size() &&
               inputs.queries[next_query].issue_ts < tick_end;
             ++next_query) {
            const Query& query = inputs.queries[next_query];
            ++tick_query_count;

            const auto buckets = expand_query_to_timestamps(query, bucket_len);
            std::vector<SegmentKey> touched;
            for (SeriesId series : query.series)
                for (BucketId bucket : buckets) {
                    const SegmentKey key{series, bucket};
                    if (inputs.catalog.points_of(key) > 0) touched.push_back(key);
                }

            // demand lookup first; a query that touches no stored data is
            // served trivially from the tier of record and counts as a miss
            ++report.total_queries;
            const auto result = lookup(placement, query, inputs.catalog, bucket_len);
            if (result.hit && !touched.empty()) {
                ++report.hits;
                if (result.serving == TierLevel::Cloud) ++report.hits_cloud;
                else ++report.hits_edge;
            } else {
                ++report.misses;
                if (result.summarized) ++report.summarized_misses;
            }

            if (thermal) {
                for (const auto& key : touched) {
                    auto it = records.find(key);
                    if (it == records.end())
                        records.emplace(key, record_access(init_record(tick_start, params)));
                    else
                        it->second = record_access(it->second);
                }
            }
            if (is_title) {
                for (const auto& key : touched) {
                    auto [it, fresh] = title_records.try_emplace(key);
                    if (fresh) {
                        it->second = {query.issue_ts, title_heat};
                    } else {
                        it->second.temp =
                            decay(it->second.temp,
                                  static_cast<double>(query.issue_ts - it->second.last),
                                  params.k) +
                            title_heat;
                        it->second.last = query.issue_ts;
                    }
                }
            }
            if (lru_active) {
                for (const auto& key : touched) {
                    ++lru.clock;
                    const std::uint64_t points = inputs.catalog.points_of(key);
                    auto it = lru.recency.find(key);
                    if (it != lru.recency.end()) {
                        lru.by_age.erase({it->second, key});
                        it->second = lru.clock;
                        lru.by_age.insert({lru.clock, key});
                        continue;
                    }
                    if (points > std::max(tiers.cloud, tiers.edge)) continue;
                    while (placement.occupancy_edge + points > tiers.edge &&
                           placement.occupancy_cloud + points > tiers.cloud) {
                        const auto victim = lru.by_age.begin()->second;
                        lru.by_age.erase(lru.by_age.begin());
                        lru.recency.erase(victim);
                        const std::uint64_t vp = inputs.catalog.points_of(victim);
                        if (placement.edge.erase(victim)) placement.occupancy_edge -= vp;
                        if (placement.cloud.erase(victim)) placement.occupancy_cloud -= vp;
                    }
                    if (placement.occupancy_edge + points <= tiers.edge) {
                        placement.edge.insert(key);
                        placement.occupancy_edge += points;
                    } else {
                        placement.cloud.insert(key);
                        placement.occupancy_cloud += points;
                    }
                    lru.recency.emplace(key, lru.clock);
                    lru.by_age.insert({lru.clock, key});
                }
            }
            if (is_tscab) {
                const auto extracted = extract_template(query, query.issue_ts);
                const auto key = extracted.canonical_form.key();
                auto [it, fresh] =
                    template_ids.try_emplace(key, static_cast<int>(template_ids.size()));
                if (fresh) {
                    template_series.push_back(extracted.canonical_form.series);
                    histories[it->second] = ArrivalHistory{
                        config.window,
                        std::vector<std::uint64_t>(static_cast<std::size_t>(tick), 0)};
                    unassigned.insert(it->second);
                }
                ++tick_counts[it->second];
            }
            if (mines_buckets) {
                for (BucketId bucket : buckets) ++tick_buckets[bucket];
                tick_expansions += buckets.size();
            }
        }

        // ---- window boundary ----
        if (thermal) {
            for (auto& [key, record] : records)
                if (record.tracked) record = update_temperature(record, tick_end, params);
        }

        bool cluster_state_shaken = false;
        if (is_tscab) {
            for (auto& [id, history] : histories)
                history.counts.push_back(tick_counts.count(id) ? tick_counts.at(id) : 0);
            for (const auto& [id, count] : tick_counts) {
                if (count == 0) continue;
                if (const auto* cluster = clusters.membership_of(id))
                    clusters.find(cluster->id)->last_received = tick_end;
                else
                    unassigned.insert(id);
            }
            cluster_state_shaken = !unassigned.empty();
            for (int id : unassigned)
                assign(clusters, id, histories, config.rho, config.recheck_window, tick_end);
            unassigned.clear();
            if (config.rebalance_every > 0 &&
                (tick + 1) % static_cast<std::uint64_t>(config.rebalance_every) == 0) {
                rebalance(clusters, histories, config.rho, config.recheck_window);
                evict_stale(clusters, config.cluster_timeout, tick_end);
                cluster_state_shaken = true;
            }
            tick_counts.clear();

            bool refit_tick = config.refit_every > 0 &&
                              (tick + 1) % static_cast<std::uint64_t>(config.refit_every) == 0;
            if (refit_tick) {
                std::set<int> live;
                for (const auto& cluster : clusters.clusters) {
                    live.insert(cluster.id);
                    const auto series_counts = cluster_arrival_series(cluster, histories);
                    std::vector<double> series(series_counts.counts.begin(),
                                               series_counts.counts.end());
                    if (series.size() > config.forecast.max_train_intervals)
                        series.erase(series.begin(),
                                     series.end() - static_cast<std::ptrdiff_t>(
                                                        config.forecast.max_train_intervals));
                    const auto train_len = static_cast<std::size_t>(
                        static_cast<double>(series.size()) * config.forecast.train_fraction);
                    if (train_len <= config.forecast.linear_lag + 1 ||
                        train_len < 2 * config.forecast.bptt_window)
                        continue;
                    models[cluster.id] = fit_ensemble(
                        series, config.forecast,
                        config.seed ^ (0x5EEDull + static_cast<std::uint64_t>(cluster.id)));
                    ++report.counters.forecast_fits;
                }
                std::erase_if(models, [&](const auto& kv) { return live.count(kv.first) == 0; });
                cluster_state_shaken = true;
            }

            // keep one warmed forecast cursor per modelled cluster; rebuild
            // whenever models or memberships changed, otherwise just feed it
            // this tick's count
            std::erase_if(cursors,
                          [&](const auto& kv) { return models.count(kv.first) == 0; });
            for (const auto& cluster : clusters.clusters) {
                auto model_it = models.find(cluster.id);
                if (model_it == models.end()) continue;
                std::vector<int> signature(cluster.members.begin(), cluster.members.end());
                const bool changed = cluster_state_shaken ||
                                     membership_signature[cluster.id] != signature ||
                                     cursors.find(cluster.id) == cursors.end();
                membership_signature[cluster.id] = std::move(signature);
                if (changed) {
                    EnsemblePredictor cursor(model_it->second);
                    const auto series_counts = cluster_arrival_series(cluster, histories);
                    for (std::uint64_t v : series_counts.counts)
                        cursor.observe(static_cast<double>(v));
                    cursors.insert_or_assign(cluster.id, std::move(cursor));
                } else {
                    std::uint64_t latest = 0;
                    for (int member : cluster.members)
                        latest += histories.at(member).counts.back();
                    cursors.at(cluster.id).observe(static_cast<double>(latest));
                }
            }
        }

        if (mines_buckets) {
            recent_buckets.push_back(std::move(tick_buckets));
            recent_queries.push_back(tick_query_count);
            recent_expansions.push_back(tick_expansions);
            while (recent_buckets.size() > static_cast<std::size_t>(config.mg_recent_ticks)) {
                recent_buckets.pop_front();
                recent_queries.pop_front();
                recent_expansions.pop_front();
            }
        }

        if (planner_active) {
            // frequent buckets over the recent window
            std::optional<std::map<BucketId, std::uint64_t>> frequent;
            std::uint64_t stream_len = 0, query_total = 0;
            if (mines_buckets) {
                CounterTable table{config.mg_k, {}};
                for (const auto& per_tick : recent_buckets)
                    for (const auto& [bucket, count] : per_tick) {
                        for (std::uint64_t i = 0; i < count; ++i) mg_process(table, bucket);
                        stream_len += count;
                    }
                ++report.counters.mg_runs;
                frequent.emplace(table.entries.begin(), table.entries.end());
                for (std::uint64_t q : recent_queries) query_total += q;
            }

            // expected per-segment accesses from the cluster forecasts,
            // spread over the cluster's series and the frequent buckets
            std::map<SegmentKey, std::vector<double>> trajectories;
            if (is_tscab && !cursors.empty() && frequent && !frequent->empty() &&
                query_total > 0) {
                const double buckets_per_query =
                    static_cast<double>(stream_len) / static_cast<double>(query_total);
                double counter_total = 0;
                for (const auto& [bucket, counter] : *frequent)
                    counter_total += static_cast<double>(counter);

                std::map<SegmentKey, std::vector<double>> accesses;
                const auto horizon = static_cast<std::size_t>(config.plan_horizon);
                for (const auto& cluster : clusters.clusters) {
                    auto cursor_it = cursors.find(cluster.id);
                    if (cursor_it == cursors.end()) continue;
                    if (cursor_it->second.observed() <
                        models.at(cluster.id).linear.lag)
                        continue;
                    const auto phi = cursor_it->second.forecast(horizon);
                    ++report.counters.forecast_predictions;

                    std::map<SeriesId, int> series_members;
                    for (int member : cluster.members)
                        for (SeriesId s : template_series[static_cast<std::size_t>(member)])
                            ++series_members[s];
                    const double member_count = static_cast<double>(cluster.members.size());
                    for (const auto& [series_id, owning] : series_members) {
                        const double series_share = static_cast<double>(owning) / member_count;
                        for (const auto& [bucket, counter] : *frequent) {
                            const SegmentKey key{series_id, bucket};
                            if (inputs.catalog.points_of(key) == 0) continue;
                            const double bucket_share =
                                static_cast<double>(counter) / counter_total;
                            auto& acc = accesses[key];
                            if (acc.empty()) acc.assign(horizon, 0.0);
                            for (std::size_t w = 0; w < horizon; ++w)
                                acc[w] += phi[w] * series_share * bucket_share *
                                          buckets_per_query;
                        }
                    }
                }
                for (const auto& [key, acc] : accesses) {
                    TemperatureRecord base{tick_end, 0.0, 0, true};
                    if (auto it = records.find(key); it != records.end() && it->second.tracked)
                        base = it->second;
                    trajectories[key] = predict_future_temperature(base, acc, params);
                }
            }

            // the TITLE planner sees its records through the decayed view
            std::map<SegmentKey, TemperatureRecord> title_view;
            if (is_title) {
                for (const auto& [key, record] : title_records)
                    title_view[key] = TemperatureRecord{
                        record.last,
                        decay(record.temp, static_cast<double>(tick_end - record.last),
                              params.k),
                        0, true};
            }
            const auto& planner_records = is_title ? title_view : records;

            auto plan =
                plan_migration(planner_records, trajectories, is_title ? std::nullopt : frequent,
                               inputs.catalog, placement, tiers, budget, thresholds);
            placement = apply_plan(placement, plan, inputs.catalog, tiers);
            append_plan_log(plan_log, tick, plan);
            report.preheat_actions += plan.preheat.size();
            report.demote_actions += plan.demote.size();
            report.summarize_actions += plan.summarize.size();
            for (const auto& key : plan.summarize)
                placement.summaries.emplace(
                    key, summarize_overcooled(key, inputs.store.segment_values(key, bucket_len)));

            // dropped records: too cold to keep maintaining
            if (thermal)
                std::erase_if(records, [&](const auto& kv) {
                    return classify(kv.second.temperature, thresholds) == HeatClass::Overcooled;
                });
            if (is_title)
                std::erase_if(title_records, [&](const auto& kv) {
                    return decay(kv.second.temp,
                                 static_cast<double>(tick_end - kv.second.last), params.k) <
                           thresholds.theta_overcooled;
                });
        }

        report.occupancy.push_back({tick, placement.occupancy_cloud, placement.occupancy_edge});
    }

    report.hit_rate = report.total_queries == 0
                          ? 0.0
                          : static_cast<double>(report.hits) /
                                static_cast<double>(report.total_queries);
    report.plan_log = plan_log.str();

    if (is_tscab) {
        std::ostringstream dump;
        write_cluster_dump(dump, clusters, histories);
        report.cluster_dump = dump.str();

        // rolling-origin forecast accuracy over the trailing fifth of each
        // cluster series, averaged per horizon
        std::ostringstream metrics_csv;
        metrics_csv << "cluster_id,horizon,mse,mae,rmse\n";
        std::map<int, std::pair<Metrics, int>> by_horizon;
        for (const auto& cluster : clusters.clusters) {
            auto model_it = models.find(cluster.id);
            if (model_it == models.end()) continue;
            const auto series_counts = cluster_arrival_series(cluster, histories);
            std::vector<double> series(series_counts.counts.begin(), series_counts.counts.end());
            const int h_max = config.forecast.horizons.back();
            const auto first_origin = static_cast<std::size_t>(
                static_cast<double>(series.size()) * config.forecast.train_fraction);
            if (series.size() < first_origin + static_cast<std::size_t>(h_max) + 1 ||
                first_origin < model_it->second.linear.lag)
                continue;
            const std::size_t last_origin = series.size() - static_cast<std::size_t>(h_max) - 1;
            const std::size_t stride =
                std::max<std::size_t>(1, (last_origin - first_origin) / 48);

            EnsemblePredictor cursor(model_it->second);
            std::size_t consumed = 0;
            std::map<int, std::pair<std::vector<double>, std::vector<double>>> samples;
            for (std::size_t origin = first_origin; origin <= last_origin; origin += stride) {
                while (consumed <= origin) cursor.observe(series[consumed++]);
                const auto forecast = cursor.forecast(static_cast<std::size_t>(h_max));
                for (int h : config.forecast.horizons) {
                    samples[h].first.push_back(forecast[static_cast<std::size_t>(h) - 1]);
                    samples[h].second.push_back(series[origin + static_cast<std::size_t>(h)]);
                }
            }
            for (int h : config.forecast.horizons) {
                const auto m = metrics(samples[h].first, samples[h].second);
                write_metrics_row(metrics_csv, cluster.id, h, m);
                auto& [sum, count] = by_horizon[h];
                sum.mse += m.mse;
                sum.mae += m.mae;
                sum.rmse += m.rmse;
                ++count;
            }
        }
        for (const auto& [h, entry] : by_horizon) {
            const auto& [sum, count] = entry;
            report.forecast_metrics.push_back(
                {h, Metrics{sum.mse / count, sum.mae / count, sum.rmse / count}});
        }
        report.forecast_metrics_csv = metrics_csv.str();
    }

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    return run_policy(config, prepare_inputs(config), config.policy);
}

// One report per capacity, strictly increasing, same seed and workload.
inline std::vector<ExperimentReport> sweep(const ExperimentConfig& config,
                                           const std::vector<std::uint64_t>& capacities) {
    if (capacities.empty()) throw ArgumentError("sweep: no capacities given");
    for (std::size_t i = 1; i < capacities.size(); ++i)
        if (capacities[i] <= capacities[i - 1])
            throw ArgumentError("sweep: capacities must be strictly increasing");
    const auto inputs = prepare_inputs(config);
    std::vector<ExperimentReport> reports;
    for (std::uint64_t capacity : capacities) {
        ExperimentConfig point = config;
        point.edge_capacity =
            static_cast<std::uint64_t>(static_cast<double>(capacity) * config.edge_share);
        point.cloud_capacity = capacity - point.edge_capacity;
        reports.push_back(run_policy(point, inputs, config.policy));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Report emission

namespace detail {

inline std::string format_double(double value) {
    std::ostringstream ss;
    ss << std::setprecision(17) << value;
    return ss.str();
}

}  // namespace detail

// One row per (policy, capacity, metric); wall-clock runtime is deliberately
// absent so reruns of the same seed emit identical bytes.
inline void write_report_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
    os << "policy,capacity,metric,value\n";
    for (const auto& r : reports) {
        auto row = [&](const std::string& metric, const std::string& value) {
            os << r.policy << ',' << r.capacity() << ',' << metric << ',' << value << '\n';
        };
        row("hit_rate", detail::format_double(r.hit_rate));
        row("total_queries", std::to_string(r.total_queries));
        row("hits", std::to_string(r.hits));
        row("misses", std::to_string(r.misses));
        row("summarized_misses", std::to_string(r.summarized_misses));
        row("hits_cloud", std::to_string(r.hits_cloud));
        row("hits_edge", std::to_string(r.hits_edge));
        row("preheat_actions", std::to_string(r.preheat_actions));
        row("demote_actions", std::to_string(r.demote_actions));
        row("summarize_actions", std::to_string(r.summarize_actions));
        row("forecast_fits", std::to_string(r.counters.forecast_fits));
        row("forecast_predictions", std::to_string(r.counters.forecast_predictions));
        row("mg_runs", std::to_string(r.counters.mg_runs));
        std::uint64_t cloud_sum = 0, edge_sum = 0;
        for (const auto& sample : r.occupancy) {
            cloud_sum += sample.cloud;
            edge_sum += sample.edge;
        }
        const double n = r.occupancy.empty() ? 1.0 : static_cast<double>(r.occupancy.size());
        row("mean_occupancy_cloud", detail::format_double(static_cast<double>(cloud_sum) / n));
        row("mean_occupancy_edge", detail::format_double(static_cast<double>(edge_sum) / n));
        for (const auto& [horizon, m] : r.forecast_metrics) {
            row("forecast_mse_h" + std::to_string(horizon), detail::format_double(m.mse));
            row("forecast_mae_h" + std::to_string(horizon), detail::format_double(m.mae));
            row("forecast_rmse_h" + std::to_string(horizon), detail::format_double(m.rmse));
        }
    }
}

inline void write_occupancy_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
    os << "policy,capacity,tick,cloud_points,edge_points\n";
    for (const auto& r : reports)
        for (const auto& sample : r.occupancy)
            os << r.policy << ',' << r.capacity() << ',' << sample.tick << ',' << sample.cloud
               << ',' << sample.edge << '\n';
}

inline void write_report_human(std::ostream& os, const ExperimentReport& r) {
    os << "policy " << r.policy << "  capacity " << r.cloud_capacity << "+" << r.edge_capacity
       << " points (dataset " << r.dataset_points << ")\n";
    os << "  queries " << r.total_queries << "  hits " << r.hits << " (cloud " << r.hits_cloud
       << ", edge " << r.hits_edge << ")  misses " << r.misses << " (summarized "
       << r.summarized_misses << ")\n";
    os << "  hit rate " << std::fixed << std::setprecision(4) << r.hit_rate << std::defaultfloat
       << "\n";
    os << "  actions: preheat " << r.preheat_actions << ", demote " << r.demote_actions
       << ", summarize " << r.summarize_actions << "\n";
    if (!r.forecast_metrics.empty()) {
        os << "  forecast rmse by horizon:";
        for (const auto& [h, m] : r.forecast_metrics)
            os << "  h" << h << "=" << std::fixed << std::setprecision(3) << m.rmse
               << std::defaultfloat;
        os << "\n";
    }
    os << "  runtime " << std::fixed << std::setprecision(2) << r.runtime_seconds << " s"
       << std::defaultfloat << "\n";
}

// Write report.csv, occupancy.csv, and per-run audit files into out_dir.
inline void emit_report(const std::vector<ExperimentReport>& reports, const std::string& out_dir,
                        std::ostream& human) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("emit_report: cannot create " + out_dir + ": " + ec.message());
    auto open = [&](const std::string& name) {
        std::ofstream out(out_dir + "/" + name, std::ios::binary);
        if (!out) throw IoError("emit_report: cannot write " + out_dir + "/" + name);
        return out;
    };
    {
        auto out = open("report.csv");
        write_report_csv(out, reports);
    }
    {
        auto out = open("occupancy.csv");
        write_occupancy_csv(out, reports);
    }
    for (const auto& r : reports) {
        const std::string suffix = r.policy + "_" + std::to_string(r.capacity());
        if (!r.plan_log.empty()) open("plan_" + suffix + ".log") << r.plan_log;
        if (!r.cluster_dump.empty()) open("clusters_" + suffix + ".txt") << r.cluster_dump;
        if (!r.forecast_metrics_csv.empty())
            open("forecast_metrics_" + suffix + ".csv") << r.forecast_metrics_csv;
        write_report_human(human, r);
    }
}

}  // namespace tscab
