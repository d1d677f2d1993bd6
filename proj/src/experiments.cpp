#include "xbar/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "xbar/rng.hpp"

namespace xbar {

using nlohmann::ordered_json;

std::string_view to_string(ExperimentKind k) noexcept {
    switch (k) {
        case ExperimentKind::CdfConventional: return "cdf";
        case ExperimentKind::RowReadMap: return "map";
        case ExperimentKind::PowerSweep: return "power-sweep";
        case ExperimentKind::MismatchSweep: return "mismatch";
        case ExperimentKind::SchemeCompare: return "compare-schemes";
    }
    return "?";
}

void ExperimentPlan::validate() const {
    spec.validate();
    xbar::validate(device);
    variation.validate();
    sense.validate();
    solver.validate();
    if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
    if (!(pattern_p >= 0.0 && pattern_p <= 1.0)) throw std::invalid_argument("pattern_p: must be in [0, 1]");
    if (samples < 2) throw std::invalid_argument("samples: must be >= 2");
    if (histogram_bins < 1) throw std::invalid_argument("histogram_bins: must be >= 1");
    if (rows_per_trial < 1) throw std::invalid_argument("rows_per_trial: must be >= 1");
    for (std::size_t n : sizes)
        if (n < 1) throw std::invalid_argument("sizes: entries must be >= 1");
    for (double vb : v_b_values)
        if (!(vb >= 0.0 && vb < spec.v_dd)) throw std::invalid_argument("v_b_values: entries must be in [0, v_dd)");
    for (double dv : delta_v_values)
        if (!(dv >= 0.0)) throw std::invalid_argument("delta_v_values: entries must be >= 0");
    if (!(r_s > 0.0)) throw std::invalid_argument("r_s: must be > 0");
    if (!(baseline_v_b >= 0.0 && baseline_v_b < spec.v_dd))
        throw std::invalid_argument("baseline_v_b: must be in [0, v_dd)");
}

std::mt19937_64 seeded_trial_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{hash_key(master_seed, index, 0), hash_key(master_seed, index, 1)};
    return std::mt19937_64(seq);
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k; !stop && (k = next++) < n;) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!first) first = std::current_exception();
                    stop = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins, std::string tag) {
    if (bins == 0) throw std::invalid_argument("make_histogram: bins must be >= 1");
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 1e-6;
        lo -= pad;
        hi += pad;
    }
    Histogram h;
    h.tag = std::move(tag);
    h.edges.resize(bins + 1);
    const bool log_bins = lo > 0.0;
    for (std::size_t k = 0; k <= bins; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(bins);
        h.edges[k] = log_bins ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    }
    h.edges.front() = lo;
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
        std::size_t k = it == h.edges.begin() ? 0 : static_cast<std::size_t>(it - h.edges.begin()) - 1;
        h.counts[std::min(k, bins - 1)]++;
    }
    return h;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> out;
    out.reserve(values.size());
    const double n = static_cast<double>(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out.push_back({values[k], static_cast<double>(k + 1) / n});
    return out;
}

DeviceParams default_params(DeviceModel m) {
    if (m == DeviceModel::Linear) return LinearDeviceParams{};
    return NonlinearDeviceParams{};
}

namespace {

CellArray trial_cells_rng(const ExperimentPlan& plan, const CrossbarSpec& spec, const DeviceParams& device,
                          std::uint64_t trial, std::mt19937_64& rng) {
    const DataPattern pattern = DataPattern::random(spec.rows, spec.cols, plan.pattern_p, rng);
    VariationSpec var = plan.variation;
    var.seed = hash_key(plan.seed, trial, 0x7661726961ULL);
    return sample_cells(pattern, device, var);
}

DeviceParams params_for(const ExperimentPlan& plan, DeviceModel m) {
    return model_of(plan.device) == m ? plan.device : default_params(m);
}

CrossbarSpec square(const CrossbarSpec& base, std::size_t n) {
    CrossbarSpec s = base;
    s.rows = s.cols = n;
    s.bank_width = 0;
    return s;
}

std::vector<std::size_t> sampled_rows(std::size_t rows, std::size_t count) {
    count = std::min(count, rows);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back((2 * k + 1) * rows / (2 * count));
    return out;
}

std::size_t network_unknowns(const CrossbarSpec& s) {
    return s.r_wire > 0.0 ? 2 * s.rows * s.cols : s.rows + s.cols;
}

double min_of(const std::vector<double>& v) {
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::min_element(v.begin(), v.end());
}
double max_of(const std::vector<double>& v) {
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(v.begin(), v.end());
}

ordered_json histogram_json(const Histogram& h) {
    return ordered_json{{"tag", h.tag}, {"edges", h.edges}, {"counts", h.counts}};
}

ordered_json json_number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

CellArray trial_cells(const ExperimentPlan& plan, const CrossbarSpec& spec, const DeviceParams& device,
                      std::uint64_t trial) {
    auto rng = seeded_trial_stream(plan.seed, trial);
    return trial_cells_rng(plan, spec, device, trial, rng);
}

// ---------------------------------------------------------------------------

ExperimentOutput run_cdf_conventional(const ExperimentPlan& plan) {
    plan.validate();
    struct Obs {
        Bit bit;
        double current;
        std::size_t trial, row, col;
    };
    const std::size_t per_trial = (plan.samples + plan.trials - 1) / plan.trials;
    std::vector<std::vector<Obs>> obs(plan.trials);
    std::vector<std::size_t> failures(plan.trials, 0);
    std::vector<std::string> failure_notes(plan.trials);

    parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
        auto rng = seeded_trial_stream(plan.seed, t);
        const CellArray cells = trial_cells_rng(plan, plan.spec, plan.device, t, rng);
        std::unique_ptr<ConventionalReader> reader;
        try {
            reader = std::make_unique<ConventionalReader>(plan.spec, cells, plan.unselected, plan.solver);
        } catch (const std::exception& e) {
            failures[t] = per_trial;
            failure_notes[t] = e.what();
            return;
        }
        std::uniform_int_distribution<std::size_t> row_d(0, plan.spec.rows - 1), col_d(0, plan.spec.cols - 1);
        std::size_t quota[2] = {per_trial / 2, per_trial - per_trial / 2};  // HRS, LRS
        for (std::size_t attempt = 0; (quota[0] || quota[1]) && attempt < 64 * per_trial; ++attempt) {
            const std::size_t i = row_d(rng), j = col_d(rng);
            const Bit b = cells(i, j).bit;
            if (!quota[to_int(b)]) continue;
            --quota[to_int(b)];
            try {
                obs[t].push_back({b, reader->read(i, j), t, i, j});
            } catch (const std::exception& e) {
                ++failures[t];
                if (failure_notes[t].empty()) failure_notes[t] = e.what();
            }
        }
    });

    std::vector<Obs> all;
    std::size_t failed = 0;
    ordered_json notes = ordered_json::array();
    for (std::size_t t = 0; t < plan.trials; ++t) {
        all.insert(all.end(), obs[t].begin(), obs[t].end());
        failed += failures[t];
        if (!failure_notes[t].empty()) notes.push_back({{"trial", t}, {"error", failure_notes[t]}});
    }
    std::stable_sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) {
        if (a.bit != b.bit) return a.bit > b.bit;
        return a.current < b.current;
    });
    std::vector<double> lrs, hrs;
    for (const Obs& o : all) (o.bit == Bit::Lrs ? lrs : hrs).push_back(o.current);

    ExperimentOutput out;
    out.name = "cdf";
    out.table.header = {"state", "current_A", "cdf", "trial", "row", "col"};
    std::size_t seen_l = 0, seen_h = 0;
    for (const Obs& o : all) {
        const bool l = o.bit == Bit::Lrs;
        const double p = l ? static_cast<double>(++seen_l) / static_cast<double>(lrs.size())
                           : static_cast<double>(++seen_h) / static_cast<double>(hrs.size());
        out.table.add_row({l ? "LRS" : "HRS", csv_number(o.current), csv_number(p), std::to_string(o.trial),
                           std::to_string(o.row), std::to_string(o.col)});
    }
    auto& s = out.stats;
    s["rows"] = plan.spec.rows;
    s["cols"] = plan.spec.cols;
    s["unselected_lines"] = plan.unselected == UnselectedLines::Floating ? "floating" : "grounded";
    s["lrs_samples"] = lrs.size();
    s["hrs_samples"] = hrs.size();
    s["failed_reads"] = failed;
    s["failures"] = notes;
    if (!lrs.empty() && !hrs.empty()) {
        const auto best = best_threshold_ber(lrs, hrs);
        s["best_threshold_A"] = best.threshold;
        s["best_ber"] = best.ber;
        s["lrs_min_A"] = min_of(lrs);
        s["lrs_max_A"] = max_of(lrs);
        s["hrs_min_A"] = min_of(hrs);
        s["hrs_max_A"] = max_of(hrs);
        s["overlapping"] = max_of(hrs) >= min_of(lrs);
    } else {
        s["best_ber"] = nullptr;
        out.pass = false;
    }
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_row_read_map(const ExperimentPlan& plan) {
    plan.validate();
    const std::size_t M = plan.spec.rows, N = plan.spec.cols;
    const double threshold = midpoint_threshold(plan.spec, plan.device);
    std::vector<std::vector<double>> maps(plan.trials);
    std::vector<std::vector<Bit>> bits(plan.trials);

    parallel_for(plan.trials, plan.threads, [&](std::size_t t) {
        const CellArray cells = trial_cells(plan, plan.spec, plan.device, t);
        const RowReader reader(plan.spec, cells, plan.solver);
        maps[t].resize(M * N);
        bits[t].resize(M * N);
        for (std::size_t i = 0; i < M; ++i) {
            const auto c = reader.column_currents(i);
            for (std::size_t j = 0; j < N; ++j) {
                maps[t][i * N + j] = c[j];
                bits[t][i * N + j] = cells(i, j).bit;
            }
        }
    });

    ExperimentOutput out;
    out.name = "map";
    out.table.header = {"trial", "row", "col", "true_bit", "current_A", "read_bit"};
    std::vector<double> lrs, hrs;
    std::size_t errors = 0;
    for (std::size_t t = 0; t < plan.trials; ++t) {
        for (std::size_t k = 0; k < M * N; ++k) {
            const double c = maps[t][k];
            const Bit b = bits[t][k];
            const Bit r = c > threshold ? Bit::Lrs : Bit::Hrs;
            errors += r != b;
            (b == Bit::Lrs ? lrs : hrs).push_back(c);
            out.table.add_row({std::to_string(t), std::to_string(k / N), std::to_string(k % N),
                               std::to_string(to_int(b)), csv_number(c), std::to_string(to_int(r))});
        }
    }
    const double lo = std::min(lrs.empty() ? INFINITY : min_of(lrs), hrs.empty() ? INFINITY : min_of(hrs));
    const double hi = std::max(lrs.empty() ? -INFINITY : max_of(lrs), hrs.empty() ? -INFINITY : max_of(hrs));
    auto& s = out.stats;
    s["rows"] = M;
    s["cols"] = N;
    s["model"] = std::string(to_string(model_of(plan.device)));
    s["threshold_A"] = threshold;
    s["errors"] = errors;
    s["ber"] = (lrs.empty() || hrs.empty()) ? ordered_json(nullptr)
                                            : ordered_json(balanced_error_rate(lrs, hrs, threshold));
    s["min_lrs_A"] = json_number(min_of(lrs));
    s["max_hrs_A"] = json_number(max_of(hrs));
    const double ratio = min_of(lrs) / max_of(hrs);
    s["separation_ratio"] = json_number(ratio);
    s["histograms"] = ordered_json::array({histogram_json(make_histogram(lrs, lo, hi, plan.histogram_bins, "LRS")),
                                           histogram_json(make_histogram(hrs, lo, hi, plan.histogram_bins, "HRS"))});
    out.pass = errors == 0;
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_power_sweep(const ExperimentPlan& plan) {
    plan.validate();
    struct Config {
        DeviceModel model;
        std::size_t size;
        std::size_t trial;
    };
    struct Record {
        double r_wire, v_b, approx_row, exact_row, gap;
        bool exact_below_approx;  // every sampled row
    };
    std::vector<Config> configs;
    for (DeviceModel m : plan.models)
        for (std::size_t n : plan.sizes)
            for (std::size_t t = 0; t < plan.trials; ++t) configs.push_back({m, n, t});

    std::vector<double> wires{0.0};
    if (plan.spec.r_wire > 0.0) wires.push_back(plan.spec.r_wire);
    std::vector<double> v_bs = plan.v_b_values;
    std::sort(v_bs.begin(), v_bs.end());

    std::vector<std::vector<Record>> records(configs.size());
    std::vector<std::string> skipped(configs.size());
    parallel_for(configs.size(), plan.threads, [&](std::size_t c) {
        const Config& cfg = configs[c];
        const DeviceParams device = params_for(plan, cfg.model);
        const CrossbarSpec base = square(plan.spec, cfg.size);
        if (network_unknowns(base) > plan.max_unknowns) {
            skipped[c] = std::to_string(cfg.size) + "x" + std::to_string(cfg.size) + " " +
                         std::string(to_string(cfg.model)) + ": exceeds max_unknowns";
            return;
        }
        const CellArray cells = trial_cells(plan, base, device, hash_key(cfg.size, cfg.trial, to_int(Bit::Lrs)));
        const auto rows = sampled_rows(cfg.size, plan.rows_per_trial);
        for (double rw : wires) {
            CrossbarSpec spec = base;
            spec.r_wire = rw;
            const RowReader reader(spec, cells, plan.solver);
            for (double vb : v_bs) {
                CrossbarSpec at_vb = spec;
                at_vb.v_b = vb;
                BiasOffsets off;
                off.wordline_dv.assign(spec.rows, vb - spec.v_b);
                off.bitline_dv.assign(spec.cols, vb - spec.v_b);
                Record r{rw, vb, 0.0, 0.0, 0.0, true};
                for (std::size_t i : rows) {
                    const double approx = power_row_approx(at_vb, cells, i);
                    const ExactPower exact = power_exact(reader.network(), reader.solve_row(i, off));
                    r.approx_row += approx;
                    r.exact_row += exact.source_sum_w;
                    r.gap = std::max(r.gap, exact.relative_gap());
                    r.exact_below_approx = r.exact_below_approx && exact.source_sum_w < approx;
                }
                r.approx_row /= static_cast<double>(rows.size());
                r.exact_row /= static_cast<double>(rows.size());
                records[c].push_back(r);
            }
        }
    });

    ExperimentOutput out;
    out.name = "power-sweep";
    out.table.header = {"model",         "size",           "trial",         "r_wire_ohm",      "v_b_V",
                        "approx_row_W",  "exact_row_W",    "approx_array_W", "exact_array_W", "tellegen_rel_gap"};
    bool exact_below = true, monotone = true;
    double worst_gap = 0.0;
    ordered_json notes = ordered_json::array();
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const Config& cfg = configs[c];
        if (!skipped[c].empty()) {
            if (cfg.trial == 0) notes.push_back(skipped[c]);
            continue;
        }
        const double M = static_cast<double>(cfg.size);
        const auto& recs = records[c];
        for (std::size_t k = 0; k < recs.size(); ++k) {
            const Record& r = recs[k];
            out.table.add_row({std::string(to_string(cfg.model)), std::to_string(cfg.size), std::to_string(cfg.trial),
                               csv_number(r.r_wire), csv_number(r.v_b), csv_number(r.approx_row),
                               csv_number(r.exact_row), csv_number(r.approx_row * M), csv_number(r.exact_row * M),
                               csv_number(r.gap)});
            worst_gap = std::max(worst_gap, r.gap);
            if (cfg.model == DeviceModel::Linear && r.r_wire > 0.0 && cfg.size > 1) exact_below = exact_below && r.exact_below_approx;
            if (k > 0 && recs[k - 1].r_wire == r.r_wire)
                monotone = monotone && r.exact_row < recs[k - 1].exact_row && r.approx_row < recs[k - 1].approx_row;
        }
    }
    auto& s = out.stats;
    s["linear_exact_below_approx"] = exact_below;
    s["power_decreases_with_v_b"] = monotone;
    s["max_tellegen_rel_gap"] = worst_gap;
    s["quoted_row_readout_power_W"] = 1.358e-3;
    s["skipped"] = notes;
    out.pass = exact_below && monotone;
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_mismatch_sweep(const ExperimentPlan& plan) {
    plan.validate();
    struct Entry {
        DeviceModel model;
        double dv;
    };
    std::vector<Entry> entries;
    for (DeviceModel m : plan.models)
        for (double dv : plan.delta_v_values) entries.push_back({m, dv});
    std::vector<MismatchCheckResult> results(entries.size());
    parallel_for(entries.size(), plan.threads, [&](std::size_t k) {
        MismatchParams p;
        p.delta_v = entries[k].dv;
        p.i_max = plan.sense.i_max;
        p.i_min = plan.sense.i_min;
        p.device = params_for(plan, entries[k].model);
        results[k] = mismatch_simulation_check(plan.spec, p, plan.mismatch);
    });

    ExperimentOutput out;
    out.name = "mismatch";
    out.table.header = {"model", "delta_v_V", "analytic_n", "empirical_n", "relative_error", "within_5pct"};
    ordered_json limits = ordered_json::array();
    bool all_within = true;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& r = results[k];
        const bool bounded = entries[k].dv > 0.0;
        const bool within = bounded ? r.empirical && r.relative_error() <= 0.05 : !r.empirical;
        all_within = all_within && within;
        out.table.add_row({std::string(to_string(entries[k].model)), csv_number(entries[k].dv),
                           bounded ? std::to_string(r.analytic) : "",
                           r.empirical ? std::to_string(*r.empirical) : "",
                           bounded && r.empirical ? csv_number(r.relative_error()) : "", within ? "1" : "0"});
        limits.push_back({{"model", to_string(entries[k].model)},
                          {"delta_v_V", entries[k].dv},
                          {"analytic_n", bounded ? ordered_json(r.analytic) : ordered_json(nullptr)},
                          {"empirical_n", r.empirical ? ordered_json(*r.empirical) : ordered_json(nullptr)},
                          {"sweep_step", r.step},
                          {"sweep_cap", r.sweep_cap}});
    }
    out.stats["i_max_A"] = plan.sense.i_max;
    out.stats["i_min_A"] = plan.sense.i_min;
    out.stats["limits"] = limits;
    out.stats["all_within_5pct"] = all_within;
    out.pass = all_within;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr SchemeKind kSchemes[] = {SchemeKind::RowReadout, SchemeKind::Conventional, SchemeKind::FloatingBitlines,
                                   SchemeKind::ResistiveLoad};

struct Signals {
    std::vector<double> lrs, hrs;
    void add(Bit b, double v) { (b == Bit::Lrs ? lrs : hrs).push_back(v); }
};

std::array<Signals, 4> compare_trial(const ExperimentPlan& plan, std::size_t size, std::size_t trial) {
    const CrossbarSpec spec = square(plan.spec, size);
    auto rng = seeded_trial_stream(hash_key(plan.seed, size, 0x636d70ULL), trial);
    const CellArray cells = trial_cells_rng(plan, spec, plan.device, trial, rng);
    const auto rows = sampled_rows(size, plan.rows_per_trial);
    std::array<Signals, 4> sig;
    {
        const RowReader reader(spec, cells, plan.solver);
        for (std::size_t i : rows) {
            const auto c = reader.column_currents(i);
            for (std::size_t j = 0; j < size; ++j) sig[0].add(cells(i, j).bit, c[j]);
        }
    }
    {
        const ConventionalReader reader(spec, cells, plan.unselected, plan.solver);
        std::uniform_int_distribution<std::size_t> d(0, size - 1);
        for (std::size_t k = 0; k < plan.conventional_cells; ++k) {
            const std::size_t i = d(rng), j = d(rng);
            sig[1].add(cells(i, j).bit, reader.read(i, j));
        }
    }
    CrossbarSpec base = spec;
    base.v_b = plan.baseline_v_b;
    {
        const Network net = build_network(base, cells, floating_bitline_bias(base, 0));
        const NetworkSolver solver(net, plan.solver);
        for (std::size_t i : rows) {
            const auto v = bitline_sense_voltages(net, solver.solve(net.terminal_voltages(floating_bitline_bias(base, i))));
            for (std::size_t j = 0; j < size; ++j) sig[2].add(cells(i, j).bit, v[j] - base.v_b);
        }
    }
    {
        const Network net = build_network(base, cells, resistive_load_bias(base, 0, plan.r_s));
        const NetworkSolver solver(net, plan.solver);
        for (std::size_t i : rows) {
            const auto c =
                bitline_currents(net, solver.solve(net.terminal_voltages(resistive_load_bias(base, i, plan.r_s))));
            for (std::size_t j = 0; j < size; ++j) sig[3].add(cells(i, j).bit, c[j] * plan.r_s);
        }
    }
    return sig;
}

}  // namespace

ExperimentOutput run_scheme_compare(const ExperimentPlan& plan) {
    plan.validate();
    struct Config {
        std::size_t size, trial;
    };
    std::vector<Config> configs;
    std::vector<std::string> skipped;
    std::vector<std::size_t> sizes;
    for (std::size_t n : plan.sizes) {
        if (network_unknowns(square(plan.spec, n)) > plan.max_unknowns) {
            skipped.push_back(std::to_string(n) + "x" + std::to_string(n) + ": exceeds max_unknowns");
            continue;
        }
        sizes.push_back(n);
        for (std::size_t t = 0; t < plan.trials; ++t) configs.push_back({n, t});
    }
    std::vector<std::array<Signals, 4>> results(configs.size());
    parallel_for(configs.size(), plan.threads,
                 [&](std::size_t c) { results[c] = compare_trial(plan, configs[c].size, configs[c].trial); });

    ExperimentOutput out;
    out.name = "compare-schemes";
    out.table.header = {"scheme",        "size",        "lrs_count",      "hrs_count", "best_threshold", "ber",
                        "gap",           "margin_ratio", "resolution",    "unit",      "pass"};
    ordered_json first_fail = ordered_json::object();
    ordered_json per_scheme = ordered_json::object();
    bool row_readout_ok = true;
    for (std::size_t s = 0; s < 4; ++s) {
        const SchemeKind kind = kSchemes[s];
        const bool volts = kind == SchemeKind::FloatingBitlines || kind == SchemeKind::ResistiveLoad;
        const double resolution = volts ? plan.sense.noise_margin : plan.sense.noise_margin / plan.sense.r_l;
        ordered_json fail = nullptr;
        ordered_json table = ordered_json::array();
        for (std::size_t n : sizes) {
            Signals pooled;
            for (std::size_t c = 0; c < configs.size(); ++c) {
                if (configs[c].size != n) continue;
                const Signals& x = results[c][s];
                pooled.lrs.insert(pooled.lrs.end(), x.lrs.begin(), x.lrs.end());
                pooled.hrs.insert(pooled.hrs.end(), x.hrs.begin(), x.hrs.end());
            }
            double ber = 0.5, thr = NAN, gap = NAN, ratio = NAN;
            if (!pooled.lrs.empty() && !pooled.hrs.empty()) {
                const auto best = best_threshold_ber(pooled.lrs, pooled.hrs);
                ber = best.ber;
                thr = best.threshold;
                gap = min_of(pooled.lrs) - max_of(pooled.hrs);
                ratio = min_of(pooled.lrs) / max_of(pooled.hrs);
            }
            const bool pass = ber == 0.0 && gap >= resolution;
            if (!pass && fail.is_null()) fail = n;
            if (kind == SchemeKind::RowReadout) row_readout_ok = row_readout_ok && pass;
            out.table.add_row({std::string(to_string(kind)), std::to_string(n), std::to_string(pooled.lrs.size()),
                               std::to_string(pooled.hrs.size()), csv_number(thr), csv_number(ber), csv_number(gap),
                               csv_number(ratio), csv_number(resolution), volts ? "V" : "A", pass ? "1" : "0"});
            table.push_back({{"size", n}, {"ber", ber}, {"gap", json_number(gap)}, {"pass", pass}});
        }
        first_fail[std::string(to_string(kind))] = fail;
        per_scheme[std::string(to_string(kind))] = table;
    }
    out.stats["baseline_v_b_V"] = plan.baseline_v_b;
    out.stats["r_s_ohm"] = plan.r_s;
    out.stats["first_failing_size"] = first_fail;
    out.stats["schemes"] = per_scheme;
    out.stats["skipped"] = skipped;
    out.pass = row_readout_ok;
    return out;
}

ExperimentOutput run_experiment(ExperimentKind kind, const ExperimentPlan& plan) {
    switch (kind) {
        case ExperimentKind::CdfConventional: return run_cdf_conventional(plan);
        case ExperimentKind::RowReadMap: return run_row_read_map(plan);
        case ExperimentKind::PowerSweep: return run_power_sweep(plan);
        case ExperimentKind::MismatchSweep: return run_mismatch_sweep(plan);
        case ExperimentKind::SchemeCompare: return run_scheme_compare(plan);
    }
    throw std::invalid_argument("unknown experiment kind");
}

}  // namespace xbar
