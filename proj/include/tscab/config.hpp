#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/forecast.hpp"
#include "tscab/ingest.hpp"
#include "tscab/temperature.hpp"
#include "tscab/workload.hpp"

namespace tscab {

enum class Policy { TsCabinet, TsCabinetNoForecast, Title, Lru };

inline const char* to_string(Policy policy) {
    switch (policy) {
        case Policy::TsCabinet: return "TSCABINET";
        case Policy::TsCabinetNoForecast: return "TSCABINET_NO_FORECAST";
        case Policy::Title: return "TITLE";
        case Policy::Lru: return "LRU";
    }
    return "?";
}

inline Policy parse_policy(const std::string& text) {
    if (text == "TSCABINET") return Policy::TsCabinet;
    if (text == "TSCABINET_NO_FORECAST") return Policy::TsCabinetNoForecast;
    if (text == "TITLE") return Policy::Title;
    if (text == "LRU") return Policy::Lru;
    throw ConfigError("unknown policy: " + text);
}

// Everything one experiment needs. Defaults describe the desk-scale
// synthetic setup; a config file plus CLI overrides refine them.
struct ExperimentConfig {
    // dataset
    std::string dataset = ":synthetic:";  // path to a CSV, or :synthetic:
    std::string timestamp_column = "timestamp";
    std::vector<std::string> tag_columns = {"longitude", "latitude"};
    SyntheticSpec synthetic;

    // clock and temperature model
    Timestamp window = 300;        // simulation tick, seconds
    double k_per_window = 0.1;     // decay exponent per window
    double gamma = 1.0;
    double t_heat = 2.0;
    double theta_hot = -1.0;         // < 0: default to t_heat
    double theta_overcooled = -1.0;  // < 0: default to 0.05 * t_heat

    // tiers
    std::uint64_t cloud_capacity = 10000;
    std::uint64_t edge_capacity = 10000;
    std::uint64_t preheat_budget = 0;  // 0: auto = (cloud+edge)/4 per round
    double edge_share = 0.5;           // split when a combined capacity is given

    // policy
    Policy policy = Policy::TsCabinet;
    std::vector<Policy> policies;  // optional multi-policy run list

    // workload
    std::uint64_t seed = 42;
    int templates_per_kind = 2;
    Timestamp horizon = 7 * 86400;
    double sim_start_fraction = 0.7;  // where in the data span the clock starts
    std::vector<std::string> patterns = {
        "cycles:period=86400,base=2,peak=28800+10800@26,peak=64800+10800@34",
        "stability:per_interval=6",
        "cycles:period=43200,base=3,peak=18000+7200@24",
        "chaos:seed=7,max=10",
    };
    std::string assignment = "auto";  // auto | comma list of pattern indexes
    WorkloadOptions workload;

    // clustering
    double rho = 10.0;
    Timestamp cluster_timeout = 86400;
    std::size_t recheck_window = 64;
    int rebalance_every = 64;  // ticks

    // forecasting
    ForecastConfig forecast;
    int refit_every = 288;  // ticks between model refits
    int plan_horizon = 12;  // forecast windows fed to the planner

    // frequent timestamps
    std::size_t mg_k = 64;
    int mg_recent_ticks = 24;

    // outputs
    std::string out_dir = "out";

    Timestamp bucket_len() const { return window; }

    TemperatureParams temperature_params() const {
        TemperatureParams params;
        params.window = window;
        params.k = k_per_window / static_cast<double>(window);
        params.gamma = gamma;
        params.t_heat = t_heat;
        return params;
    }

    HeatThresholds heat_thresholds() const {
        HeatThresholds t;
        t.theta_hot = theta_hot >= 0 ? theta_hot : t_heat;
        t.theta_overcooled = theta_overcooled >= 0 ? theta_overcooled : 0.05 * t_heat;
        return t;
    }

    std::vector<Policy> policy_list() const {
        return policies.empty() ? std::vector<Policy>{policy} : policies;
    }

    std::uint64_t effective_budget() const {
        return preheat_budget > 0 ? preheat_budget
                                  : std::max<std::uint64_t>(1, (cloud_capacity + edge_capacity) / 4);
    }

    void validate() const {
        if (window <= 0) throw ConfigError("window must be positive");
        if (k_per_window <= 0 || gamma <= 0 || t_heat <= 0)
            throw ConfigError("temperature parameters must be positive");
        if (horizon <= 0) throw ConfigError("workload horizon must be positive");
        if (sim_start_fraction < 0 || sim_start_fraction >= 1)
            throw ConfigError("sim_start_fraction must be in [0, 1)");
        if (rho <= 0) throw ConfigError("cluster rho must be positive");
        if (mg_k < 2) throw ConfigError("mg_k must be at least 2");
        if (patterns.empty()) throw ConfigError("at least one arrival pattern is required");
        forecast.validate();
    }
};

namespace detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(text);
    while (std::getline(ss, part, sep)) parts.push_back(part);
    return parts;
}

template <typename T>
inline T parse_number(const std::string& key, const std::string& value) {
    try {
        if constexpr (std::is_floating_point_v<T>) return static_cast<T>(std::stod(value));
        else if constexpr (std::is_signed_v<T>) return static_cast<T>(std::stoll(value));
        else return static_cast<T>(std::stoull(value));
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + value);
    }
}

}  // namespace detail

// Pattern spec grammar (config values, '|'-separated between patterns):
//   stability:per_interval=N            or   stability:per_second=R
//   cycles:period=S,base=N,peak=OFF+WIDTH@RATE[,peak=...]
//   spike:center=S,peak=N,decay=R        (center relative to the sim start)
//   chaos:seed=N,max=N
// Spike centers are shifted by `epoch` so configs stay clock-independent.
inline ArrivalPattern parse_pattern(const std::string& spec, Timestamp interval_len,
                                    Timestamp epoch) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    std::map<std::string, std::vector<std::string>> kv;
    if (colon != std::string::npos)
        for (const auto& item : detail::split(spec.substr(colon + 1), ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw ConfigError("bad pattern item '" + item + "' in: " + spec);
            kv[item.substr(0, eq)].push_back(item.substr(eq + 1));
        }
    auto one = [&](const std::string& key, const std::string& fallback) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (fallback.empty()) throw ConfigError("pattern " + spec + " needs " + key);
            return fallback;
        }
        return it->second.front();
    };
    if (name == "stability") {
        if (kv.count("per_second"))
            return StabilityPattern{detail::parse_number<double>("per_second", one("per_second", ""))};
        const double per_interval = detail::parse_number<double>("per_interval", one("per_interval", ""));
        return StabilityPattern{per_interval / static_cast<double>(interval_len)};
    }
    if (name == "cycles") {
        CyclesPattern cycles;
        cycles.period = detail::parse_number<Timestamp>("period", one("period", "86400"));
        cycles.base_rate = detail::parse_number<double>("base", one("base", "0"));
        for (const auto& peak : kv["peak"]) {
            const auto plus = peak.find('+');
            const auto at = peak.find('@');
            if (plus == std::string::npos || at == std::string::npos || at < plus)
                throw ConfigError("bad peak spec '" + peak + "' (want OFF+WIDTH@RATE)");
            cycles.peaks.push_back({detail::parse_number<Timestamp>("peak", peak.substr(0, plus)),
                                    detail::parse_number<Timestamp>("peak", peak.substr(plus + 1, at - plus - 1)),
                                    detail::parse_number<double>("peak", peak.substr(at + 1))});
        }
        return cycles;
    }
    if (name == "spike") {
        SpikePattern spike;
        spike.center = epoch + detail::parse_number<Timestamp>("center", one("center", ""));
        spike.peak_rate = detail::parse_number<double>("peak", one("peak", ""));
        spike.decay_constant = detail::parse_number<double>("decay", one("decay", ""));
        return spike;
    }
    if (name == "chaos") {
        return ChaosPattern{detail::parse_number<std::uint64_t>("seed", one("seed", "1")),
                            detail::parse_number<std::uint64_t>("max", one("max", ""))};
    }
    throw ConfigError("unknown arrival pattern kind: " + name);
}

// Apply one key=value setting.
inline void apply_setting(ExperimentConfig& config, const std::string& key,
                          const std::string& value) {
    using detail::parse_number;
    if (key == "dataset") config.dataset = value;
    else if (key == "timestamp_column") config.timestamp_column = value;
    else if (key == "tag_columns") config.tag_columns = detail::split(value, ';');
    else if (key == "synth.points") config.synthetic.total_points = parse_number<std::uint64_t>(key, value);
    else if (key == "synth.days") config.synthetic.days = parse_number<int>(key, value);
    else if (key == "synth.series") config.synthetic.series = parse_number<int>(key, value);
    else if (key == "synth.seed") config.synthetic.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "window_s") config.window = parse_number<Timestamp>(key, value);
    else if (key == "temp.k_per_window") config.k_per_window = parse_number<double>(key, value);
    else if (key == "temp.gamma") config.gamma = parse_number<double>(key, value);
    else if (key == "temp.t_heat") config.t_heat = parse_number<double>(key, value);
    else if (key == "temp.theta_hot") config.theta_hot = parse_number<double>(key, value);
    else if (key == "temp.theta_overcooled") config.theta_overcooled = parse_number<double>(key, value);
    else if (key == "tier.cloud_capacity") config.cloud_capacity = parse_number<std::uint64_t>(key, value);
    else if (key == "tier.edge_capacity") config.edge_capacity = parse_number<std::uint64_t>(key, value);
    else if (key == "tier.edge_share") config.edge_share = parse_number<double>(key, value);
    else if (key == "preheat_budget") config.preheat_budget = parse_number<std::uint64_t>(key, value);
    else if (key == "policy") config.policy = parse_policy(value);
    else if (key == "policies") {
        config.policies.clear();
        for (const auto& p : detail::split(value, ',')) config.policies.push_back(parse_policy(p));
    } else if (key == "seed") config.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "workload.templates_per_kind") config.templates_per_kind = parse_number<int>(key, value);
    else if (key == "workload.horizon_s") config.horizon = parse_number<Timestamp>(key, value);
    else if (key == "workload.sim_start_fraction") config.sim_start_fraction = parse_number<double>(key, value);
    else if (key == "workload.patterns") config.patterns = detail::split(value, '|');
    else if (key == "workload.assignment") config.assignment = value;
    else if (key == "workload.recency_mean_s") config.workload.recency_rate = 1.0 / parse_number<double>(key, value);
    else if (key == "workload.durations_s") {
        config.workload.durations.clear();
        for (const auto& d : detail::split(value, ';'))
            config.workload.durations.push_back(parse_number<Timestamp>(key, d));
    } else if (key == "workload.duration_weights") {
        config.workload.duration_weights.clear();
        for (const auto& w : detail::split(value, ';'))
            config.workload.duration_weights.push_back(parse_number<double>(key, w));
    } else if (key == "cluster.rho") config.rho = parse_number<double>(key, value);
    else if (key == "cluster.timeout_s") config.cluster_timeout = parse_number<Timestamp>(key, value);
    else if (key == "cluster.recheck_window") config.recheck_window = parse_number<std::size_t>(key, value);
    else if (key == "cluster.rebalance_every") config.rebalance_every = parse_number<int>(key, value);
    else if (key == "forecast.linear_lag") config.forecast.linear_lag = parse_number<std::size_t>(key, value);
    else if (key == "forecast.hidden") config.forecast.hidden = parse_number<std::size_t>(key, value);
    else if (key == "forecast.epochs") config.forecast.epochs = parse_number<int>(key, value);
    else if (key == "forecast.learning_rate") config.forecast.learning_rate = parse_number<double>(key, value);
    else if (key == "forecast.bptt_window") config.forecast.bptt_window = parse_number<std::size_t>(key, value);
    else if (key == "forecast.max_train_intervals") config.forecast.max_train_intervals = parse_number<std::size_t>(key, value);
    else if (key == "forecast.horizons") {
        config.forecast.horizons.clear();
        for (const auto& h : detail::split(value, ';'))
            config.forecast.horizons.push_back(parse_number<int>(key, h));
    } else if (key == "forecast.refit_every") config.refit_every = parse_number<int>(key, value);
    else if (key == "forecast.plan_horizon") config.plan_horizon = parse_number<int>(key, value);
    else if (key == "mg.k") config.mg_k = parse_number<std::size_t>(key, value);
    else if (key == "mg.recent_ticks") config.mg_recent_ticks = parse_number<int>(key, value);
    else if (key == "out_dir") config.out_dir = value;
    else throw ConfigError("unknown config key: " + key);
}

inline ExperimentConfig parse_config(std::istream& input) {
    ExperimentConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        apply_setting(config, detail::trim(line.substr(0, eq)),
                      detail::trim(line.substr(eq + 1)));
    }
    return config;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

// The effective configuration in the same key = value syntax it is read from.
inline void print_config(std::ostream& os, const ExperimentConfig& c) {
    os << "dataset = " << c.dataset << '\n';
    os << "timestamp_column = " << c.timestamp_column << '\n';
    os << "tag_columns = ";
    for (std::size_t i = 0; i < c.tag_columns.size(); ++i)
        os << (i ? ";" : "") << c.tag_columns[i];
    os << '\n';
    os << "synth.points = " << c.synthetic.total_points << '\n';
    os << "synth.days = " << c.synthetic.days << '\n';
    os << "synth.series = " << c.synthetic.series << '\n';
    os << "synth.seed = " << c.synthetic.seed << '\n';
    os << "window_s = " << c.window << '\n';
    os << "temp.k_per_window = " << c.k_per_window << '\n';
    os << "temp.gamma = " << c.gamma << '\n';
    os << "temp.t_heat = " << c.t_heat << '\n';
    os << "temp.theta_hot = " << c.heat_thresholds().theta_hot << '\n';
    os << "temp.theta_overcooled = " << c.heat_thresholds().theta_overcooled << '\n';
    os << "tier.cloud_capacity = " << c.cloud_capacity << '\n';
    os << "tier.edge_capacity = " << c.edge_capacity << '\n';
    os << "tier.edge_share = " << c.edge_share << '\n';
    os << "preheat_budget = " << c.effective_budget() << '\n';
    os << "policy = " << to_string(c.policy) << '\n';
    if (!c.policies.empty()) {
        os << "policies = ";
        for (std::size_t i = 0; i < c.policies.size(); ++i)
            os << (i ? "," : "") << to_string(c.policies[i]);
        os << '\n';
    }
    os << "seed = " << c.seed << '\n';
    os << "workload.templates_per_kind = " << c.templates_per_kind << '\n';
    os << "workload.horizon_s = " << c.horizon << '\n';
    os << "workload.sim_start_fraction = " << c.sim_start_fraction << '\n';
    os << "workload.patterns = ";
    for (std::size_t i = 0; i < c.patterns.size(); ++i) os << (i ? "|" : "") << c.patterns[i];
    os << '\n';
    os << "workload.assignment = " << c.assignment << '\n';
    os << "cluster.rho = " << c.rho << '\n';
    os << "cluster.timeout_s = " << c.cluster_timeout << '\n';
    os << "cluster.recheck_window = " << c.recheck_window << '\n';
    os << "cluster.rebalance_every = " << c.rebalance_every << '\n';
    os << "forecast.linear_lag = " << c.forecast.linear_lag << '\n';
    os << "forecast.hidden = " << c.forecast.hidden << '\n';
    os << "forecast.epochs = " << c.forecast.epochs << '\n';
    os << "forecast.learning_rate = " << c.forecast.learning_rate << '\n';
    os << "forecast.bptt_window = " << c.forecast.bptt_window << '\n';
    os << "forecast.horizons = ";
    for (std::size_t i = 0; i < c.forecast.horizons.size(); ++i)
        os << (i ? ";" : "") << c.forecast.horizons[i];
    os << '\n';
    os << "forecast.refit_every = " << c.refit_every << '\n';
    os << "forecast.plan_horizon = " << c.plan_horizon << '\n';
    os << "mg.k = " << c.mg_k << '\n';
    os << "mg.recent_ticks = " << c.mg_recent_ticks << '\n';
    os << "out_dir = " << c.out_dir << '\n';
}

}  // namespace tscab
