// Command-line front end: one subcommand per campaign.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "xbar/config.hpp"
#include "xbar/error.hpp"
#include "xbar/experiments.hpp"
#include "xbar/report.hpp"
#include "xbar/rng.hpp"
#include "xbar/selftest.hpp"
#include "xbar/units.hpp"

namespace {

using nlohmann::ordered_json;
using namespace xbar;

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> size;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> trials;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "JSON config file");
    app->add_option("-s,--set", c.overrides, "Override, e.g. crossbar.r_wire=10ohm (repeatable)");
    app->add_option("-o,--output-dir", c.output_dir, "Output directory (default $XBAR_OUTPUT_DIR or ./out)");
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--size", c.size, "Square array size (rows = cols)");
    app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    app->add_option("--trials", c.trials, "Trial count");
}

RunConfig load(const Common& c) {
    std::vector<std::string> ov = c.overrides;
    if (c.seed) ov.push_back("seed=" + std::to_string(*c.seed));
    if (c.size) {
        ov.push_back("crossbar.rows=" + std::to_string(*c.size));
        ov.push_back("crossbar.cols=" + std::to_string(*c.size));
    }
    if (c.threads) ov.push_back("experiment.threads=" + std::to_string(*c.threads));
    if (c.trials) ov.push_back("experiment.trials=" + std::to_string(*c.trials));
    if (!c.output_dir.empty()) ov.push_back("output_dir=" + ordered_json(c.output_dir).dump());
    return parse_config(c.config, ov);
}

ordered_json summary_for(const RunConfig& cfg, const ExperimentOutput& out) {
    ordered_json s;
    s["config"] = config_to_json(cfg);
    s["statistics"] = out.stats;
    s["pass"] = out.pass;
    return s;
}

void report(const EmittedFiles& f, bool pass) {
    std::cout << ordered_json{{"csv", f.csv.string()}, {"json", f.json.string()}, {"pass", pass}}.dump() << '\n';
}

int cmd_experiment(ExperimentKind kind, const Common& c, std::optional<std::string> delta_v) {
    RunConfig cfg = load(c);
    ExperimentPlan plan = cfg.experiment_plan();
    if (delta_v) {
        cfg.delta_v = parse_quantity(*delta_v, "V");
        cfg.plan.delta_v_values = {cfg.delta_v};
        plan.delta_v_values = {cfg.delta_v};
    }
    const ExperimentOutput out = run_experiment(kind, plan);
    ordered_json summary = summary_for(cfg, out);
    if (kind == ExperimentKind::MismatchSweep) {
        ordered_json analytic;
        for (const auto& lim : out.stats["limits"]) analytic[lim["model"].get<std::string>()] = lim["analytic_n"];
        summary["analytic_n_at_first_delta_v"] = analytic;
    }
    report(emit_results(cfg.output_dir, out.name, cfg.seed, out.table, summary), out.pass);
    return 0;
}

int cmd_read_row(const Common& c, std::size_t row, const std::string& pattern_path, const std::string& dump) {
    const RunConfig cfg = load(c);
    DataPattern pattern;
    if (!pattern_path.empty()) {
        pattern = load_pattern(pattern_path);
        if (pattern.rows() != cfg.crossbar.rows || pattern.cols() != cfg.crossbar.cols)
            throw ConfigError("pattern", "pattern is " + std::to_string(pattern.rows()) + "x" +
                                             std::to_string(pattern.cols()) + " but the array is " +
                                             std::to_string(cfg.crossbar.rows) + "x" +
                                             std::to_string(cfg.crossbar.cols));
    } else {
        auto rng = seeded_trial_stream(cfg.seed, 0);
        pattern = DataPattern::random(cfg.crossbar.rows, cfg.crossbar.cols, cfg.plan.pattern_p, rng);
    }
    VariationSpec var = cfg.variation;
    var.seed = cfg.seed;
    const CellArray cells = sample_cells(pattern, cfg.device(), var);
    const double threshold = midpoint_threshold(cfg.crossbar, cfg.device());
    const RowReader reader(cfg.crossbar, cells, cfg.solver);
    const ReadResult r = reader.read(row, threshold);
    if (!dump.empty()) {
        std::ofstream os(dump);
        if (!os) throw std::runtime_error(dump + ": cannot open for writing");
        write_system_dump(os, reader.network(), reader.solve_row(row));
    }
    CsvTable t;
    t.header = {"row", "col", "true_bit", "current_A", "read_bit"};
    for (std::size_t j = 0; j < r.sensed.size(); ++j)
        t.add_row({std::to_string(row), std::to_string(j), std::to_string(to_int(r.true_bits[j])),
                   csv_number(r.sensed[j]), std::to_string(to_int(r.classified_bits[j]))});
    ExperimentOutput out;
    out.stats["row"] = row;
    out.stats["threshold_A"] = threshold;
    out.stats["errors"] = r.error_count;
    out.stats["error_columns"] = r.error_columns;
    out.pass = r.error_count == 0;
    report(emit_results(cfg.output_dir, "read-row", cfg.seed, t, summary_for(cfg, out)), out.pass);
    return 0;
}

int cmd_fom(const Common& c, std::size_t banks) {
    const RunConfig cfg = load(c);
    const auto rows = table1_report(banks);
    CsvTable t;
    t.header = {"technique",      "throughput_bits",  "array_usage", "power_W", "cell_count",
                "cell_area_um2",  "published_fom",    "computed_fom", "relative_error", "status"};
    bool all = true;
    std::cerr << "technique                   published    computed   status\n";
    for (const auto& r : rows) {
        all = all && r.match;
        t.add_row({r.technique, csv_number(r.inputs.throughput), csv_number(r.inputs.array_usage),
                   csv_number(r.inputs.reading_power_w), csv_number(r.inputs.cell_count),
                   csv_number(r.inputs.cell_area_um2), csv_number(r.published_fom), csv_number(r.computed_fom),
                   csv_number(r.relative_error), r.match ? "MATCH" : "MISMATCH"});
        char line[160];
        std::snprintf(line, sizeof line, "%-26s %10.4g %11.4g   %s\n", r.technique.c_str(), r.published_fom,
                      r.computed_fom, r.match ? "MATCH" : "MISMATCH");
        std::cerr << line;
    }
    ExperimentOutput out;
    out.stats["banks"] = banks;
    out.stats["all_match"] = all;
    out.pass = all;
    report(emit_results(cfg.output_dir, "fom-table", cfg.seed, t, summary_for(cfg, out)), all);
    return 0;
}

void print_error(const char* type, const std::string& message, const std::string& key = {}) {
    ordered_json e{{"error", {{"type", type}, {"message", message}}}};
    if (!key.empty()) e["error"]["key"] = key;
    std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resistive crossbar readout simulator"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    Common common;
    std::size_t row = 0;
    std::string pattern_path, dump_path;
    std::size_t banks = 1;
    std::optional<std::string> delta_v;

    auto* read_row = app.add_subcommand("read-row", "Read one row with the row readout scheme");
    add_common(read_row, common);
    read_row->add_option("--row", row, "Zero-based row index")->required();
    read_row->add_option("--pattern", pattern_path, "Data pattern file (ASCII grid or binary)");
    read_row->add_option("--dump", dump_path, "Write the solved nodal system to this file");

    auto* cdf = app.add_subcommand("cdf", "Conventional-read current CDFs");
    auto* map = app.add_subcommand("map", "Row-readout current map and histograms");
    auto* power = app.add_subcommand("power-sweep", "Reading power versus array size and V_B");
    auto* mismatch = app.add_subcommand("mismatch", "Bias-mismatch column-width limits");
    auto* compare = app.add_subcommand("compare-schemes", "BER and margins of all readout schemes");
    for (auto* sc : {cdf, map, power, mismatch, compare}) add_common(sc, common);
    mismatch->add_option("--delta-v", delta_v, "Single bias mismatch, e.g. 2mV");

    auto* fomc = app.add_subcommand("fom-table", "Figure-of-merit comparison table");
    add_common(fomc, common);
    fomc->add_option("--banks", banks, "Bank count R of the row readout entry");

    auto* self = app.add_subcommand("selftest", "Oracle-equivalence and invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", e.what());
        return 64;
    }

    try {
        if (*read_row) return cmd_read_row(common, row, pattern_path, dump_path);
        if (*cdf) return cmd_experiment(ExperimentKind::CdfConventional, common, std::nullopt);
        if (*map) return cmd_experiment(ExperimentKind::RowReadMap, common, std::nullopt);
        if (*power) return cmd_experiment(ExperimentKind::PowerSweep, common, std::nullopt);
        if (*mismatch) return cmd_experiment(ExperimentKind::MismatchSweep, common, delta_v);
        if (*compare) return cmd_experiment(ExperimentKind::SchemeCompare, common, std::nullopt);
        if (*fomc) return cmd_fom(common, banks);
        if (*self) return run_selftest(std::cout) ? 0 : 1;
    } catch (const ConfigError& e) {
        print_error("config", e.what(), e.key());
        return 2;
    } catch (const SingularNetworkError& e) {
        print_error("singular_network", e.what());
        return 3;
    } catch (const ConvergenceError& e) {
        print_error("convergence", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
    return 0;
}
