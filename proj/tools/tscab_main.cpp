// tscab: hierarchical storage scheduling experiments for cloud-edge-end
// time-series data. Subcommands: ingest, generate-workload, run, sweep,
// report. Exit code 0 on success, 1 on configuration errors, 2 on runtime
// errors.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tscab/config.hpp"
#include "tscab/harness.hpp"
#include "tscab/ingest.hpp"
#include "tscab/workload.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    bool print_config = false;
};

tscab::ExperimentConfig load(const CommonOptions& options) {
    tscab::ExperimentConfig config;
    if (!options.config_path.empty()) config = tscab::load_config(options.config_path);
    for (const auto& item : options.overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw tscab::ConfigError("--set expects key=value, got: " + item);
        tscab::apply_setting(config, item.substr(0, eq), item.substr(eq + 1));
    }
    return config;
}

void add_common(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--config", options.config_path, "configuration file (key = value lines)");
    cmd->add_option("--set", options.overrides, "override a config key, e.g. --set seed=7")
        ->take_all();
    cmd->add_flag("--print-config", options.print_config,
                  "dump the effective configuration and continue");
}

int cmd_ingest(const CommonOptions& common, const std::string& csv,
               const std::string& synth_out) {
    auto config = load(common);
    if (!csv.empty()) config.dataset = csv;
    if (common.print_config) tscab::print_config(std::cout, config);

    tscab::SeriesStore store;
    if (config.dataset == ":synthetic:") {
        store = tscab::synthesize_dataset(config.synthetic);
        if (!synth_out.empty()) {
            std::ofstream out(synth_out, std::ios::binary);
            if (!out) throw tscab::IoError("cannot write " + synth_out);
            tscab::write_dataset_csv(out, store);
            std::cout << "wrote synthetic dataset to " << synth_out << "\n";
        }
    } else {
        tscab::CsvSchemaSpec spec;
        spec.timestamp_column = config.timestamp_column;
        spec.tag_columns = config.tag_columns;
        store = tscab::ingest_csv_file(config.dataset, spec);
    }
    std::cout << "series: " << store.schema.series_count << "\n"
              << "points: " << store.total_points << "\n"
              << "malformed rows skipped: " << store.malformed_rows << "\n"
              << "time span: " << store.min_ts << " .. " << store.max_ts << "\n"
              << "fields:";
    for (const auto& f : store.schema.fields) std::cout << ' ' << f;
    std::cout << "\ntags:";
    for (const auto& t : store.schema.tags) std::cout << ' ' << t;
    std::cout << "\n";
    return 0;
}

int cmd_generate_workload(const CommonOptions& common, const std::string& out_path) {
    auto config = load(common);
    if (common.print_config) tscab::print_config(std::cout, config);
    const auto inputs = tscab::prepare_inputs(config);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw tscab::IoError("cannot write " + out_path);
    tscab::write_workload(out, inputs.queries);
    std::cout << "templates: " << inputs.templates.size() << "\n"
              << "queries: " << inputs.queries.size() << "\n"
              << "ticks: " << inputs.ticks << "\n"
              << "written to " << out_path << "\n";
    return 0;
}

int cmd_run(const CommonOptions& common, std::uint64_t capacity) {
    auto config = load(common);
    if (capacity > 0) {
        config.edge_capacity = static_cast<std::uint64_t>(
            static_cast<double>(capacity) * config.edge_share);
        config.cloud_capacity = capacity - config.edge_capacity;
    }
    if (common.print_config) tscab::print_config(std::cout, config);

    const auto inputs = tscab::prepare_inputs(config);
    std::vector<tscab::ExperimentReport> reports;
    for (tscab::Policy policy : config.policy_list())
        reports.push_back(tscab::run_policy(config, inputs, policy));
    tscab::emit_report(reports, config.out_dir, std::cout);
    std::cout << "report written to " << config.out_dir << "/report.csv\n";
    return 0;
}

int cmd_sweep(const CommonOptions& common, const std::vector<std::uint64_t>& capacities) {
    auto config = load(common);
    if (common.print_config) tscab::print_config(std::cout, config);
    if (capacities.empty()) throw tscab::ConfigError("sweep: give at least one --capacity");

    std::vector<tscab::ExperimentReport> reports;
    for (tscab::Policy policy : config.policy_list()) {
        tscab::ExperimentConfig per_policy = config;
        per_policy.policy = policy;
        per_policy.policies.clear();
        auto batch = tscab::sweep(per_policy, capacities);
        reports.insert(reports.end(), batch.begin(), batch.end());
    }
    tscab::emit_report(reports, config.out_dir, std::cout);
    std::cout << "report written to " << config.out_dir << "/report.csv\n";
    return 0;
}

int cmd_report(const std::string& in_path) {
    std::ifstream in(in_path);
    if (!in) throw tscab::IoError("cannot open " + in_path);
    std::string line;
    if (!std::getline(in, line) || line != "policy,capacity,metric,value")
        throw tscab::ArgumentError("not a tscab report: " + in_path);
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::string, std::string>>>
        grouped;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string policy, capacity, metric, value;
        if (!std::getline(ls, policy, ',') || !std::getline(ls, capacity, ',') ||
            !std::getline(ls, metric, ',') || !std::getline(ls, value))
            throw tscab::ArgumentError("malformed report row: " + line);
        grouped[{policy, capacity}].push_back({metric, value});
    }
    for (const auto& [key, rows] : grouped) {
        std::cout << key.first << " @ capacity " << key.second << "\n";
        for (const auto& [metric, value] : rows)
            std::cout << "  " << metric << " = " << value << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical storage scheduler for cloud-edge-end time-series data"};
    app.require_subcommand(1);

    CommonOptions ingest_common, workload_common, run_common, sweep_common;
    std::string ingest_csv_path, synth_out;
    std::string workload_out = "workload.txt";
    std::uint64_t run_capacity = 0;
    std::vector<std::uint64_t> sweep_capacities;
    std::string report_in;

    auto* ingest = app.add_subcommand("ingest", "load a dataset and report its shape");
    add_common(ingest, ingest_common);
    ingest->add_option("--csv", ingest_csv_path, "dataset CSV path (overrides the config)");
    ingest->add_option("--synth-out", synth_out, "write the synthetic dataset as CSV here");

    auto* workload = app.add_subcommand("generate-workload", "emit the seeded query stream");
    add_common(workload, workload_common);
    workload->add_option("--out", workload_out, "output file for the workload lines");

    auto* run = app.add_subcommand("run", "run the configured experiment");
    add_common(run, run_common);
    run->add_option("--capacity", run_capacity,
                    "combined cloud+edge capacity in points (split by tier.edge_share)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run across increasing capacities");
    add_common(sweep_cmd, sweep_common);
    sweep_cmd
        ->add_option("--capacity", sweep_capacities,
                     "capacity sweep points (repeat or comma-separate)")
        ->delimiter(',');

    auto* report = app.add_subcommand("report", "render a report.csv as text");
    report->add_option("--in", report_in, "report.csv path")->required();

    // convenience shorthands shared by the experiment subcommands
    for (auto&& [cmd, common] :
         std::initializer_list<std::pair<CLI::App*, CommonOptions*>>{
             {run, &run_common}, {sweep_cmd, &sweep_common}, {workload, &workload_common}}) {
        cmd->add_option_function<std::uint64_t>(
            "--seed", [common = common](std::uint64_t s) {
                common->overrides.push_back("seed=" + std::to_string(s));
            },
            "override the experiment seed");
        cmd->add_option_function<std::string>(
            "--policy", [common = common](const std::string& p) {
                common->overrides.push_back("policy=" + p);
            },
            "TSCABINET | TSCABINET_NO_FORECAST | TITLE | LRU");
    }
    for (auto&& [cmd, common] : std::initializer_list<std::pair<CLI::App*, CommonOptions*>>{
             {run, &run_common}, {sweep_cmd, &sweep_common}}) {
        cmd->add_option_function<std::string>(
            "--out", [common = common](const std::string& o) {
                common->overrides.push_back("out_dir=" + o);
            },
            "output directory");
    }

    try {
        app.parse(argc, argv);
        if (*ingest) return cmd_ingest(ingest_common, ingest_csv_path, synth_out);
        if (*workload) return cmd_generate_workload(workload_common, workload_out);
        if (*run) return cmd_run(run_common, run_capacity);
        if (*sweep_cmd) return cmd_sweep(sweep_common, sweep_capacities);
        if (*report) return cmd_report(report_in);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const tscab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
