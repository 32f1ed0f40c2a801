#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/random.hpp"
#include "tscab/temperature.hpp"

namespace tscab {

using SeriesId = std::uint32_t;

// Shape of an ingested dataset: field keys carry the measured values, tag
// keys identify the series, and a timestamp column orders the points.
struct DatasetSchema {
    std::string measurement;
    std::vector<std::string> fields;
    std::vector<std::string> tags;
    std::size_t series_count = 0;
};

enum class CompareOp { Gt, Ge, Lt, Le, Eq };
enum class Aggregate { Avg, Max, Min };

inline const char* to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Eq: return "=";
    }
    return "?";
}

inline const char* to_string(Aggregate op) {
    switch (op) {
        case Aggregate::Avg: return "AVG";
        case Aggregate::Max: return "MAX";
        case Aggregate::Min: return "MIN";
    }
    return "?";
}

// The five query shapes: 1 single-series range scan, 2 multi-series range
// scan, 3 single-series scan with a field comparison, 4 single-series
// aggregate, 5 multi-series aggregate with a group-by clause.
struct QueryTemplate {
    int id = 0;
    int kind = 1;
    std::vector<std::string> fields;
    std::vector<SeriesId> series;
    std::optional<CompareOp> compare;
    std::optional<Aggregate> aggregate;
    std::optional<std::string> group_by;

    void validate() const {
        if (kind < 1 || kind > 5) throw ArgumentError("QueryTemplate: kind must be 1..5");
        const bool single = kind == 1 || kind == 3 || kind == 4;
        if (single && series.size() != 1)
            throw ArgumentError("QueryTemplate: kinds 1,3,4 select exactly one series");
        if (!single && series.empty())
            throw ArgumentError("QueryTemplate: kinds 2,5 need a series set");
        if ((kind == 3) != compare.has_value())
            throw ArgumentError("QueryTemplate: comparison operator iff kind 3");
        if ((kind == 4 || kind == 5) != aggregate.has_value())
            throw ArgumentError("QueryTemplate: aggregate iff kind 4 or 5");
        if ((kind == 5) != group_by.has_value())
            throw ArgumentError("QueryTemplate: group-by iff kind 5");
        if (fields.empty()) throw ArgumentError("QueryTemplate: no fields selected");
    }
};

// Arrival-rate patterns. Cycles and Spike express counts per generation
// interval; Stability is a rate per second scaled by the interval length;
// Chaos draws uniformly from its own seed so counts do not depend on
// evaluation order.
struct CyclesPattern {
    struct Peak {
        Timestamp offset = 0;  // phase where the peak begins, seconds
        Timestamp width = 0;
        double rate = 0.0;     // queries per interval while inside the peak
    };
    Timestamp period = 86400;
    std::vector<Peak> peaks;
    double base_rate = 0.0;
};

struct StabilityPattern {
    double rate = 0.0;  // queries per second
};

struct SpikePattern {
    Timestamp center = 0;
    double peak_rate = 0.0;       // queries per interval at the center
    double decay_constant = 1.0;  // per second
};

struct ChaosPattern {
    std::uint64_t seed = 0;
    std::uint64_t max_rate = 0;  // queries per interval, inclusive bound
};

using ArrivalPattern = std::variant<CyclesPattern, StabilityPattern, SpikePattern, ChaosPattern>;

inline void validate(const ArrivalPattern& pattern) {
    if (const auto* cycles = std::get_if<CyclesPattern>(&pattern)) {
        if (cycles->period <= 0) throw ArgumentError("CyclesPattern: period must be positive");
        if (cycles->base_rate < 0) throw ArgumentError("CyclesPattern: negative base rate");
        for (const auto& peak : cycles->peaks)
            if (peak.rate < 0 || peak.width <= 0 || peak.offset < 0 ||
                peak.offset + peak.width > cycles->period)
                throw ArgumentError("CyclesPattern: malformed peak window");
    } else if (const auto* stab = std::get_if<StabilityPattern>(&pattern)) {
        if (stab->rate < 0) throw ArgumentError("StabilityPattern: negative rate");
    } else if (const auto* spike = std::get_if<SpikePattern>(&pattern)) {
        if (spike->peak_rate < 0) throw ArgumentError("SpikePattern: negative peak rate");
        if (!(spike->decay_constant > 0))
            throw ArgumentError("SpikePattern: decay constant must be positive");
    }
}

// A concrete query: all template placeholders bound, accessing the inclusive
// range [t_start, t_end] which never extends past the issue time.
struct Query {
    int template_id = 0;
    int kind = 1;
    Timestamp issue_ts = 0;
    Timestamp t_start = 0;
    Timestamp t_end = 0;
    std::vector<SeriesId> series;
    std::vector<std::string> fields;
    std::optional<CompareOp> compare;
    std::optional<double> compare_value;
    std::optional<Aggregate> aggregate;
    std::optional<std::string> group_by;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27; x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}
}  // namespace detail

// Queries a pattern yields in [start, end). Deterministic: Chaos hashes its
// seed with the interval start instead of consuming a shared stream.
inline std::uint64_t arrival_count(const ArrivalPattern& pattern, Timestamp start,
                                   Timestamp end) {
    if (end <= start) throw ArgumentError("arrival_count: empty interval");
    validate(pattern);
    const double len = static_cast<double>(end - start);
    if (const auto* cycles = std::get_if<CyclesPattern>(&pattern)) {
        const Timestamp phase = ((start % cycles->period) + cycles->period) % cycles->period;
        double rate = cycles->base_rate;
        for (const auto& peak : cycles->peaks)
            if (phase >= peak.offset && phase < peak.offset + peak.width) {
                rate = peak.rate;
                break;
            }
        return static_cast<std::uint64_t>(std::llround(rate));
    }
    if (const auto* stab = std::get_if<StabilityPattern>(&pattern))
        return static_cast<std::uint64_t>(std::llround(stab->rate * len));
    if (const auto* spike = std::get_if<SpikePattern>(&pattern)) {
        const double distance = std::abs(static_cast<double>(start - spike->center));
        return static_cast<std::uint64_t>(
            std::llround(spike->peak_rate * std::exp(-spike->decay_constant * distance)));
    }
    const auto& chaos = std::get<ChaosPattern>(pattern);
    const std::uint64_t draw =
        detail::mix64(chaos.seed ^ detail::mix64(static_cast<std::uint64_t>(start)));
    return draw % (chaos.max_rate + 1);
}

// Knobs for filling template placeholders. The accessed range is drawn with
// a recency bias: t_end lags the issue time by an exponential draw whose
// default rate puts 80% of range ends within the last 24 hours.
struct WorkloadOptions {
    Timestamp interval_len = 300;
    std::vector<Timestamp> durations = {3600, 21600, 86400, 604800};
    std::vector<double> duration_weights = {0.5, 0.3, 0.15, 0.05};
    double recency_rate = 1.8608e-5;  // ln(5) / 86400
    double value_lo = 0.0;            // domain for kind-3 comparison values
    double value_hi = 100.0;

    void validate() const {
        if (interval_len <= 0) throw ArgumentError("WorkloadOptions: interval_len must be positive");
        if (durations.empty() || durations.size() != duration_weights.size())
            throw ArgumentError("WorkloadOptions: durations and weights must align");
        if (!(recency_rate > 0)) throw ArgumentError("WorkloadOptions: recency rate must be positive");
    }
};

// One template of each kind, instantiable against the schema. Field and
// series choices are seeded draws, so a schema and seed pin the summary.
inline std::vector<QueryTemplate> build_template_summary(const DatasetSchema& schema,
                                                         std::uint64_t seed,
                                                         int per_kind = 1) {
    if (schema.fields.empty()) throw SchemaError("build_template_summary: schema has no fields");
    if (schema.tags.empty()) throw SchemaError("build_template_summary: schema has no tags");
    if (schema.series_count == 0)
        throw SchemaError("build_template_summary: schema has no series");
    if (per_kind < 1) throw ArgumentError("build_template_summary: per_kind must be >= 1");

    Rng root(seed);
    std::vector<QueryTemplate> templates;
    int next_id = 0;
    for (int copy = 0; copy < per_kind; ++copy) {
        for (int kind = 1; kind <= 5; ++kind) {
            Rng rng = root.fork(static_cast<std::uint64_t>(copy * 5 + kind));
            QueryTemplate t;
            t.id = next_id++;
            t.kind = kind;
            t.fields = {schema.fields[rng.next_below(schema.fields.size())]};
            const bool single = kind == 1 || kind == 3 || kind == 4;
            if (single) {
                t.series = {static_cast<SeriesId>(rng.next_below(schema.series_count))};
            } else {
                const std::size_t want =
                    2 + rng.next_below(std::min<std::size_t>(3, schema.series_count));
                while (t.series.size() < std::min(want, schema.series_count)) {
                    const auto id = static_cast<SeriesId>(rng.next_below(schema.series_count));
                    if (std::find(t.series.begin(), t.series.end(), id) == t.series.end())
                        t.series.push_back(id);
                }
                std::sort(t.series.begin(), t.series.end());
            }
            if (kind == 3)
                t.compare = static_cast<CompareOp>(rng.next_below(5));
            if (kind == 4 || kind == 5)
                t.aggregate = static_cast<Aggregate>(rng.next_below(3));
            if (kind == 5)
                t.group_by = schema.tags[rng.next_below(schema.tags.size())];
            t.validate();
            templates.push_back(std::move(t));
        }
    }
    return templates;
}

// Seeded uniform template -> pattern matching; position i of the result is
// the pattern for templates[i].
inline std::vector<ArrivalPattern> assign_patterns(std::size_t template_count,
                                                   const std::vector<ArrivalPattern>& pool,
                                                   std::uint64_t seed) {
    if (pool.empty()) throw ArgumentError("assign_patterns: empty pattern pool");
    Rng rng(seed);
    std::vector<ArrivalPattern> assignment;
    assignment.reserve(template_count);
    for (std::size_t i = 0; i < template_count; ++i)
        assignment.push_back(pool[rng.next_below(pool.size())]);
    return assignment;
}

// Generate the query stream for [start, start + horizon), ordered by issue
// time. Each template draws from its own forked stream, so the output is a
// pure function of (templates, patterns, clock bounds, domain, seed).
inline std::vector<Query> generate(const std::vector<QueryTemplate>& templates,
                                   const std::vector<ArrivalPattern>& patterns,
                                   Timestamp start, Timestamp horizon,
                                   std::pair<Timestamp, Timestamp> data_time_domain,
                                   std::uint64_t seed,
                                   const WorkloadOptions& options = {}) {
    if (horizon <= 0) throw ArgumentError("generate: horizon must be positive");
    if (templates.size() != patterns.size())
        throw ArgumentError("generate: every template needs exactly one pattern");
    if (data_time_domain.first > data_time_domain.second)
        throw ArgumentError("generate: empty data time domain");
    options.validate();
    for (const auto& t : templates) t.validate();

    double weight_total = 0.0;
    for (double w : options.duration_weights) weight_total += w;

    Rng root(seed);
    struct Numbered {
        Query query;
        std::uint64_t seq;
    };
    std::vector<Numbered> stream;
    const Timestamp ticks = (horizon + options.interval_len - 1) / options.interval_len;
    for (std::size_t ti = 0; ti < templates.size(); ++ti) {
        const auto& t = templates[ti];
        Rng rng = root.fork(ti);
        std::uint64_t seq = 0;
        for (Timestamp tick = 0; tick < ticks; ++tick) {
            const Timestamp lo = start + tick * options.interval_len;
            const Timestamp hi = std::min(start + horizon, lo + options.interval_len);
            const std::uint64_t n = arrival_count(patterns[ti], lo, hi);
            for (std::uint64_t q = 0; q < n; ++q) {
                Query query;
                query.template_id = t.id;
                query.kind = t.kind;
                query.series = t.series;
                query.fields = t.fields;
                query.aggregate = t.aggregate;
                query.group_by = t.group_by;
                query.issue_ts = lo + static_cast<Timestamp>(rng.next_below(
                                     static_cast<std::uint64_t>(hi - lo)));
                const auto recency =
                    static_cast<Timestamp>(rng.next_exponential(options.recency_rate));
                const Timestamp end_cap = std::max(
                    data_time_domain.first, std::min(data_time_domain.second, query.issue_ts));
                query.t_end =
                    std::clamp(query.issue_ts - recency, data_time_domain.first, end_cap);
                double pick = rng.next_in(0.0, weight_total);
                std::size_t di = 0;
                while (di + 1 < options.durations.size() &&
                       pick >= options.duration_weights[di]) {
                    pick -= options.duration_weights[di];
                    ++di;
                }
                query.t_start = std::max(data_time_domain.first,
                                         query.t_end - options.durations[di]);
                if (t.compare) {
                    query.compare = t.compare;
                    query.compare_value = rng.next_in(options.value_lo, options.value_hi);
                }
                stream.push_back({std::move(query), seq++});
            }
        }
    }
    std::sort(stream.begin(), stream.end(), [](const Numbered& a, const Numbered& b) {
        if (a.query.issue_ts != b.query.issue_ts) return a.query.issue_ts < b.query.issue_ts;
        if (a.query.template_id != b.query.template_id)
            return a.query.template_id < b.query.template_id;
        return a.seq < b.seq;
    });
    std::vector<Query> out;
    out.reserve(stream.size());
    for (auto& numbered : stream) out.push_back(std::move(numbered.query));
    return out;
}

// Line format: issue_ts,template_id,kind,series_ids,t_start,t_end,op
// with series ids joined by ';' and '-' standing for "no operator".
inline void write_workload(std::ostream& os, const std::vector<Query>& queries) {
    for (const auto& q : queries) {
        os << q.issue_ts << ',' << q.template_id << ',' << q.kind << ',';
        for (std::size_t i = 0; i < q.series.size(); ++i) {
            if (i) os << ';';
            os << q.series[i];
        }
        os << ',' << q.t_start << ',' << q.t_end << ',';
        if (q.compare) os << to_string(*q.compare);
        else if (q.aggregate) os << to_string(*q.aggregate);
        else os << '-';
        os << '\n';
    }
}

inline std::optional<CompareOp> parse_compare(const std::string& text) {
    if (text == ">") return CompareOp::Gt;
    if (text == ">=") return CompareOp::Ge;
    if (text == "<") return CompareOp::Lt;
    if (text == "<=") return CompareOp::Le;
    if (text == "=") return CompareOp::Eq;
    return std::nullopt;
}

inline std::optional<Aggregate> parse_aggregate(const std::string& text) {
    if (text == "AVG") return Aggregate::Avg;
    if (text == "MAX") return Aggregate::Max;
    if (text == "MIN") return Aggregate::Min;
    return std::nullopt;
}

// Parse the line format back. Field selections and group-by clauses are not
// part of the wire format and come back empty.
inline std::vector<Query> read_workload(std::istream& is) {
    std::vector<Query> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ls, part, ',')) parts.push_back(part);
        if (parts.size() != 7)
            throw ArgumentError("read_workload: malformed line " + std::to_string(line_no));
        Query q;
        q.issue_ts = std::stoll(parts[0]);
        q.template_id = std::stoi(parts[1]);
        q.kind = std::stoi(parts[2]);
        std::istringstream ss(parts[3]);
        std::string id;
        while (std::getline(ss, id, ';'))
            q.series.push_back(static_cast<SeriesId>(std::stoul(id)));
        q.t_start = std::stoll(parts[4]);
        q.t_end = std::stoll(parts[5]);
        if (parts[6] != "-") {
            if (auto cmp = parse_compare(parts[6])) q.compare = cmp;
            else if (auto agg = parse_aggregate(parts[6])) q.aggregate = agg;
            else throw ArgumentError("read_workload: unknown operator on line " +
                                     std::to_string(line_no));
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

}  // namespace tscab
