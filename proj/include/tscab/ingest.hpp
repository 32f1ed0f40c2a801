#pragma once

#include <algorithm>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/random.hpp"
#include "tscab/scheduler.hpp"
#include "tscab/workload.hpp"

namespace tscab {

// In-memory series store: points grouped by tag-value combination, sorted by
// time. Only the first field's value is kept per point; it is what data
// summaries aggregate, and hit accounting never looks at values.
struct SeriesStore {
    DatasetSchema schema;
    std::vector<std::string> series_names;                          // tag combo per series id
    std::vector<std::vector<std::pair<Timestamp, double>>> points;  // per series, sorted
    std::uint64_t total_points = 0;
    std::uint64_t malformed_rows = 0;
    Timestamp min_ts = 0, max_ts = 0;

    SegmentCatalog catalog(Timestamp bucket_len) const {
        SegmentCatalog catalog;
        for (SeriesId s = 0; s < points.size(); ++s)
            for (const auto& [ts, value] : points[s])
                ++catalog.points[SegmentKey{s, static_cast<BucketId>(ts / bucket_len)}];
        return catalog;
    }

    std::vector<double> segment_values(const SegmentKey& key, Timestamp bucket_len) const {
        std::vector<double> values;
        if (key.series >= points.size()) return values;
        const auto& series = points[key.series];
        const Timestamp lo = static_cast<Timestamp>(key.bucket) * bucket_len;
        auto it = std::lower_bound(series.begin(), series.end(), lo,
                                   [](const auto& p, Timestamp t) { return p.first < t; });
        for (; it != series.end() && it->first < lo + bucket_len; ++it)
            values.push_back(it->second);
        return values;
    }
};

// Which CSV columns play which role; every column that is neither the
// timestamp nor a tag is treated as a field.
struct CsvSchemaSpec {
    std::string measurement = "dataset";
    std::string timestamp_column = "timestamp";
    std::vector<std::string> tag_columns;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Epoch seconds, or ISO-8601 of the form YYYY-MM-DD[T ]HH:MM:SS with an
// optional trailing Z, treated as UTC.
inline bool parse_timestamp(const std::string& text, Timestamp& out) {
    if (text.empty()) return false;
    if (text.find_first_not_of("0123456789") == std::string::npos) {
        out = std::stoll(text);
        return true;
    }
    std::tm tm{};
    int year, month, day, hour, minute, second;
    if (std::sscanf(text.c_str(), "%d-%d-%d%*1[T ]%d:%d:%d", &year, &month, &day, &hour,
                    &minute, &second) != 6)
        return false;
    tm.tm_year = year - 1900;
    tm.tm_mon = month - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = minute;
    tm.tm_sec = second;
    const time_t t = timegm(&tm);
    if (t == static_cast<time_t>(-1)) return false;
    out = static_cast<Timestamp>(t);
    return true;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

}  // namespace detail

// Parse a headered CSV into a series store. Malformed rows (bad timestamp,
// non-numeric field, wrong cell count) are counted and skipped; more than 1%
// of them aborts the ingestion.
inline SeriesStore ingest_csv(std::istream& input, const CsvSchemaSpec& spec) {
    std::string line;
    if (!std::getline(input, line)) throw IngestError("ingest_csv: empty input");
    const auto header = detail::split_csv_row(line);

    std::size_t ts_col = header.size();
    std::vector<std::size_t> tag_cols, field_cols;
    std::vector<std::string> field_names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == spec.timestamp_column) {
            ts_col = i;
        } else if (std::find(spec.tag_columns.begin(), spec.tag_columns.end(), header[i]) !=
                   spec.tag_columns.end()) {
            tag_cols.push_back(i);
        } else {
            field_cols.push_back(i);
            field_names.push_back(header[i]);
        }
    }
    if (ts_col == header.size())
        throw IngestError("ingest_csv: missing timestamp column '" + spec.timestamp_column +
                          "'");
    if (tag_cols.empty()) throw IngestError("ingest_csv: no tag column found in the header");
    if (field_cols.empty()) throw IngestError("ingest_csv: no field column found in the header");

    SeriesStore store;
    store.schema.measurement = spec.measurement;
    store.schema.fields = field_names;
    for (std::size_t i : tag_cols) store.schema.tags.push_back(header[i]);

    std::map<std::string, SeriesId> series_ids;
    std::uint64_t rows = 0;
    while (std::getline(input, line)) {
        if (detail::trim(line).empty()) continue;
        ++rows;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != header.size()) {
            ++store.malformed_rows;
            continue;
        }
        Timestamp ts;
        if (!detail::parse_timestamp(cells[ts_col], ts)) {
            ++store.malformed_rows;
            continue;
        }
        bool numeric = true;
        double first_value = 0.0;
        for (std::size_t f = 0; f < field_cols.size(); ++f) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[field_cols[f]], &used);
                if (used != cells[field_cols[f]].size()) throw std::invalid_argument("");
                if (f == 0) first_value = v;
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            ++store.malformed_rows;
            continue;
        }
        std::string combo;
        for (std::size_t i : tag_cols) {
            combo += cells[i];
            combo += '|';
        }
        auto [it, inserted] = series_ids.emplace(combo, static_cast<SeriesId>(store.points.size()));
        if (inserted) {
            store.points.emplace_back();
            store.series_names.push_back(combo);
        }
        store.points[it->second].push_back({ts, first_value});
        ++store.total_points;
    }
    if (rows > 0 && store.malformed_rows * 100 > rows)
        throw IngestError("ingest_csv: " + std::to_string(store.malformed_rows) + " of " +
                          std::to_string(rows) + " rows malformed (limit 1%)");
    if (store.total_points == 0) throw IngestError("ingest_csv: no usable rows");

    store.schema.series_count = store.points.size();
    bool first = true;
    for (auto& series : store.points) {
        std::sort(series.begin(), series.end());
        if (series.empty()) continue;
        if (first) {
            store.min_ts = series.front().first;
            store.max_ts = series.back().first;
            first = false;
        } else {
            store.min_ts = std::min(store.min_ts, series.front().first);
            store.max_ts = std::max(store.max_ts, series.back().first);
        }
    }
    return store;
}

inline SeriesStore ingest_csv_file(const std::string& path, const CsvSchemaSpec& spec) {
    std::ifstream in(path);
    if (!in) throw IngestError("ingest_csv: cannot open " + path);
    return ingest_csv(in, spec);
}

struct SyntheticSpec {
    std::uint64_t total_points = 200000;
    int days = 90;
    int series = 20;
    std::uint64_t seed = 1;
    Timestamp start_ts = 1406851200;  // 2014-08-01T00:00:00Z
};

// Pollution-shaped synthetic dataset: five measurement fields keyed by a
// (longitude, latitude) tag pair, evenly spaced points per sensor with
// smooth seeded value walks.
inline SeriesStore synthesize_dataset(const SyntheticSpec& spec) {
    if (spec.total_points == 0 || spec.series <= 0 || spec.days <= 0)
        throw ArgumentError("synthesize_dataset: sizes must be positive");
    SeriesStore store;
    store.schema.measurement = "pollution";
    store.schema.fields = {"ozone", "particulate_matter", "co2", "so2", "no2"};
    store.schema.tags = {"longitude", "latitude"};
    store.schema.series_count = static_cast<std::size_t>(spec.series);

    const std::uint64_t per_series = spec.total_points / static_cast<std::uint64_t>(spec.series);
    const Timestamp span = static_cast<Timestamp>(spec.days) * 86400;
    const Timestamp step = std::max<Timestamp>(1, span / static_cast<Timestamp>(per_series));

    Rng root(spec.seed);
    for (int s = 0; s < spec.series; ++s) {
        Rng rng = root.fork(static_cast<std::uint64_t>(s));
        const double lon = 100.0 + 0.25 * s;
        const double lat = 30.0 + 0.125 * s;
        std::ostringstream combo;
        combo << lon << '|' << lat << '|';
        store.series_names.push_back(combo.str());
        std::vector<std::pair<Timestamp, double>> series;
        series.reserve(per_series);
        double level = rng.next_in(20.0, 80.0);
        for (std::uint64_t i = 0; i < per_series; ++i) {
            level = std::clamp(level + rng.next_in(-1.5, 1.5), 0.0, 150.0);
            series.push_back({spec.start_ts + static_cast<Timestamp>(i) * step, level});
        }
        store.total_points += series.size();
        store.points.push_back(std::move(series));
    }
    store.min_ts = spec.start_ts;
    store.max_ts = spec.start_ts + static_cast<Timestamp>(per_series - 1) * step;
    return store;
}

// Materialize a store as CSV in the ingestible layout (synthetic fields
// beyond the stored first value are derived deterministically from it).
inline void write_dataset_csv(std::ostream& os, const SeriesStore& store) {
    for (const auto& field : store.schema.fields) os << field << ',';
    for (const auto& tag : store.schema.tags) os << tag << ',';
    os << "timestamp\n";
    for (SeriesId s = 0; s < store.points.size(); ++s) {
        std::vector<std::string> tag_values;
        std::string cell;
        std::istringstream combo(store.series_names[s]);
        while (std::getline(combo, cell, '|')) tag_values.push_back(cell);
        for (const auto& [ts, value] : store.points[s]) {
            os << value;
            for (std::size_t f = 1; f < store.schema.fields.size(); ++f)
                os << ',' << value * (1.0 + 0.1 * static_cast<double>(f));
            for (const auto& tag : tag_values) os << ',' << tag;
            os << ',' << ts << '\n';
        }
    }
}

}  // namespace tscab
