#include "xbar/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "xbar/error.hpp"
#include "xbar/units.hpp"

namespace xbar {

using nlohmann::json;
using nlohmann::ordered_json;

DeviceParams RunConfig::device() const { return device(model); }

DeviceParams RunConfig::device(DeviceModel m) const {
    if (m == DeviceModel::Linear) return linear;
    return nonlinear;
}

MismatchParams RunConfig::mismatch_params(DeviceModel m) const {
    MismatchParams p;
    p.delta_v = delta_v;
    p.i_max = sense.i_max;
    p.i_min = sense.i_min;
    p.device = device(m);
    return p;
}

ExperimentPlan RunConfig::experiment_plan() const {
    ExperimentPlan p = plan;
    p.spec = crossbar;
    p.device = device();
    p.variation = variation;
    p.sense = sense;
    p.solver = solver;
    p.seed = seed;
    p.mismatch = mismatch;
    p.mismatch.solver = solver;
    return p;
}

namespace {

// Re-throws a section validator's message as a ConfigError with a key path.
template <class F>
void checked(const std::string& section, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        const auto colon = msg.find(": ");
        if (colon != std::string::npos && msg.compare(0, section.size(), section) == 0)
            throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
        throw ConfigError(section, msg);
    }
}

}  // namespace

void RunConfig::validate() const {
    checked("crossbar", [&] { crossbar.validate(); });
    checked("device", [&] {
        linear.validate();
        nonlinear.validate();
    });
    checked("variation", [&] { variation.validate(); });
    checked("sense", [&] { sense.validate(); });
    checked("solver", [&] { solver.validate(); });
    if (!(delta_v >= 0.0)) throw ConfigError("mismatch.delta_v", "must be >= 0");
    if (!(mismatch.r_wire >= 0.0)) throw ConfigError("mismatch.r_wire", "must be >= 0");
    if (std::abs(sense.v_dd - crossbar.v_dd) > 0.0 || std::abs(sense.v_b - crossbar.v_b) > 0.0)
        throw ConfigError("sense.v_dd", "sense v_dd/v_b must match crossbar v_dd/v_b");
    checked("experiment", [&] { experiment_plan().validate(); });
}

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("XBAR_OUTPUT_DIR"); env && *env) return env;
    return "out";
}

namespace {

class Section {
public:
    Section(const json& doc, std::string path) : path_(std::move(path)) {
        if (doc.is_null()) return;
        if (!doc.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
        obj_ = &doc;
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!obj_) return;
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!ok.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }

    const json* find(const char* k) const {
        if (!obj_) return nullptr;
        auto it = obj_->find(k);
        return it == obj_->end() ? nullptr : &*it;
    }

    Section sub(const char* k) const {
        static const json absent;
        const json* v = find(k);
        return Section(v ? *v : absent, key(k));
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    void quantity(const char* k, const char* unit, double& out) const {
        const json* v = find(k);
        if (!v) return;
        if (v->is_number())
            out = v->get<double>();
        else if (v->is_string()) {
            try {
                out = parse_quantity(v->get<std::string>(), unit);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(key(k), e.what());
            }
        } else
            throw ConfigError(key(k), "expected a number or a quantity string");
    }

    template <class T>
    void integer(const char* k, T& out) const {
        const json* v = find(k);
        if (!v) return;
        if (v->is_number_unsigned())
            out = static_cast<T>(v->get<std::uint64_t>());
        else if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
            out = static_cast<T>(v->get<std::int64_t>());
        else
            throw ConfigError(key(k), "expected a non-negative integer");
    }

    void text(const char* k, std::string& out) const {
        const json* v = find(k);
        if (!v) return;
        if (!v->is_string()) throw ConfigError(key(k), "expected a string");
        out = v->get<std::string>();
    }

    template <class T, class F>
    void list(const char* k, std::vector<T>& out, F&& convert) const {
        const json* v = find(k);
        if (!v) return;
        if (!v->is_array()) throw ConfigError(key(k), "expected an array");
        out.clear();
        for (std::size_t n = 0; n < v->size(); ++n) out.push_back(convert((*v)[n], key(k) + "[" + std::to_string(n) + "]"));
    }

private:
    const json* obj_ = nullptr;
    std::string path_;
};

double element_quantity(const json& v, const std::string& path, const char* unit) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return parse_quantity(v.get<std::string>(), unit);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(path, e.what());
        }
    }
    throw ConfigError(path, "expected a number or a quantity string");
}

DeviceModel parse_model(const std::string& s, const std::string& path) {
    if (s == "linear") return DeviceModel::Linear;
    if (s == "nonlinear") return DeviceModel::Nonlinear;
    throw ConfigError(path, "expected \"linear\" or \"nonlinear\"");
}

}  // namespace

RunConfig config_from_json(const json& doc) {
    RunConfig c;
    c.output_dir = default_output_dir();
    const Section root(doc, "");
    root.allow({"seed", "output_dir", "crossbar", "device", "variation", "sense", "mismatch", "solver", "experiment"});
    root.integer("seed", c.seed);
    if (const json* od = root.find("output_dir")) {
        if (!od->is_string()) throw ConfigError("output_dir", "expected a string");
        c.output_dir = od->get<std::string>();
    }

    const Section xb = root.sub("crossbar");
    xb.allow({"rows", "cols", "r_wire", "r_driver", "v_dd", "v_b", "bank_width"});
    xb.integer("rows", c.crossbar.rows);
    xb.integer("cols", c.crossbar.cols);
    xb.quantity("r_wire", "ohm", c.crossbar.r_wire);
    xb.quantity("r_driver", "ohm", c.crossbar.r_driver);
    xb.quantity("v_dd", "V", c.crossbar.v_dd);
    xb.quantity("v_b", "V", c.crossbar.v_b);
    xb.integer("bank_width", c.crossbar.bank_width);

    const Section dev = root.sub("device");
    dev.allow({"model", "lrs", "hrs", "k_on", "k_off", "a"});
    if (const json* m = dev.find("model")) {
        if (!m->is_string()) throw ConfigError("device.model", "expected a string");
        c.model = parse_model(m->get<std::string>(), "device.model");
    }
    dev.quantity("lrs", "ohm", c.linear.lrs_ohms);
    dev.quantity("hrs", "ohm", c.linear.hrs_ohms);
    dev.quantity("k_on", "A", c.nonlinear.k_on);
    dev.quantity("k_off", "A", c.nonlinear.k_off);
    dev.quantity("a", "", c.nonlinear.a);

    const Section var = root.sub("variation");
    var.allow({"relative_sigma"});
    var.quantity("relative_sigma", "", c.variation.relative_sigma);

    // Sense supply follows the crossbar unless given explicitly.
    c.sense.v_dd = c.crossbar.v_dd;
    c.sense.v_b = c.crossbar.v_b;
    const Section se = root.sub("sense");
    se.allow({"v_dd", "v_b", "r_l", "alpha", "i_ref", "i_1", "noise_margin", "v_disturb_pos", "v_disturb_neg",
              "recovery_time", "energy_per_bit", "i_max", "i_min"});
    se.quantity("v_dd", "V", c.sense.v_dd);
    se.quantity("v_b", "V", c.sense.v_b);
    se.quantity("r_l", "ohm", c.sense.r_l);
    se.quantity("alpha", "", c.sense.alpha);
    se.quantity("i_ref", "A", c.sense.i_ref);
    se.quantity("i_1", "A", c.sense.i_1);
    se.quantity("noise_margin", "V", c.sense.noise_margin);
    se.quantity("v_disturb_pos", "V", c.sense.v_disturb_pos);
    se.quantity("v_disturb_neg", "V", c.sense.v_disturb_neg);
    se.quantity("recovery_time", "s", c.sense.recovery_time);
    se.quantity("energy_per_bit", "J", c.sense.energy_per_bit);
    se.quantity("i_max", "A", c.sense.i_max);
    se.quantity("i_min", "A", c.sense.i_min);

    const Section mm = root.sub("mismatch");
    mm.allow({"delta_v", "step", "sweep_cap", "r_wire"});
    mm.quantity("delta_v", "V", c.delta_v);
    mm.integer("step", c.mismatch.step);
    mm.integer("sweep_cap", c.mismatch.sweep_cap);
    mm.quantity("r_wire", "ohm", c.mismatch.r_wire);

    const Section so = root.sub("solver");
    so.allow({"abs_tol", "max_newton_iters", "damping", "max_halvings", "polish_steps", "newton_linear", "pcg_threshold",
              "pcg_rel_tol", "pcg_max_iters"});
    so.quantity("abs_tol", "A", c.solver.abs_tol);
    so.integer("max_newton_iters", c.solver.max_newton_iters);
    so.quantity("damping", "", c.solver.damping);
    so.integer("max_halvings", c.solver.max_halvings);
    so.integer("polish_steps", c.solver.polish_steps);
    if (const json* nl = so.find("newton_linear")) {
        const std::string s = nl->is_string() ? nl->get<std::string>() : "";
        if (s == "auto")
            c.solver.newton_linear = NewtonLinearSolve::Auto;
        else if (s == "direct")
            c.solver.newton_linear = NewtonLinearSolve::Direct;
        else if (s == "pcg")
            c.solver.newton_linear = NewtonLinearSolve::PreconditionedCG;
        else
            throw ConfigError("solver.newton_linear", "expected \"auto\", \"direct\" or \"pcg\"");
    }
    so.integer("pcg_threshold", c.solver.pcg_threshold);
    so.quantity("pcg_rel_tol", "", c.solver.pcg_rel_tol);
    so.integer("pcg_max_iters", c.solver.pcg_max_iters);

    const Section ex = root.sub("experiment");
    ex.allow({"trials", "threads", "pattern_p", "samples", "unselected", "histogram_bins", "sizes", "v_b_values",
              "models", "rows_per_trial", "max_unknowns", "delta_v_values", "r_s", "baseline_v_b",
              "conventional_cells"});
    auto& p = c.plan;
    ex.integer("trials", p.trials);
    ex.integer("threads", p.threads);
    ex.quantity("pattern_p", "", p.pattern_p);
    ex.integer("samples", p.samples);
    if (const json* u = ex.find("unselected")) {
        const std::string s = u->is_string() ? u->get<std::string>() : "";
        if (s == "floating")
            p.unselected = UnselectedLines::Floating;
        else if (s == "grounded")
            p.unselected = UnselectedLines::Grounded;
        else
            throw ConfigError("experiment.unselected", "expected \"floating\" or \"grounded\"");
    }
    ex.integer("histogram_bins", p.histogram_bins);
    ex.list("sizes", p.sizes, [](const json& v, const std::string& path) -> std::size_t {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ConfigError(path, "expected a positive integer");
        return static_cast<std::size_t>(v.get<std::int64_t>());
    });
    ex.list("v_b_values", p.v_b_values,
            [](const json& v, const std::string& path) { return element_quantity(v, path, "V"); });
    ex.list("models", p.models, [](const json& v, const std::string& path) {
        if (!v.is_string()) throw ConfigError(path, "expected a string");
        return parse_model(v.get<std::string>(), path);
    });
    ex.integer("rows_per_trial", p.rows_per_trial);
    ex.integer("max_unknowns", p.max_unknowns);
    ex.list("delta_v_values", p.delta_v_values,
            [](const json& v, const std::string& path) { return element_quantity(v, path, "V"); });
    ex.quantity("r_s", "ohm", p.r_s);
    ex.quantity("baseline_v_b", "V", p.baseline_v_b);
    ex.integer("conventional_cells", p.conventional_cells);

    c.validate();
    return c;
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("<file>", "cannot read " + path.string());
        try {
            doc = json::parse(in, nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw ConfigError("<file>", path.string() + ": " + e.what());
        }
        if (doc.is_null()) doc = json::object();
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(ov, "override must be key=value");
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        json* node = &doc;
        std::stringstream ks(key);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ks, part, '.')) parts.push_back(part);
        for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
            if (!node->is_object()) throw ConfigError(key, "not an object path");
            node = &(*node)[parts[k]];
            if (node->is_null()) *node = json::object();
        }
        if (!node->is_object()) throw ConfigError(key, "not an object path");
        (*node)[parts.back()] = value;
    }
    return config_from_json(doc);
}

ordered_json config_to_json(const RunConfig& c) {
    auto model_name = [](DeviceModel m) { return std::string(to_string(m)); };
    ordered_json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir.string();
    j["crossbar"] = {{"rows", c.crossbar.rows},         {"cols", c.crossbar.cols}, {"r_wire", c.crossbar.r_wire},
                     {"r_driver", c.crossbar.r_driver}, {"v_dd", c.crossbar.v_dd}, {"v_b", c.crossbar.v_b},
                     {"bank_width", c.crossbar.bank_width}};
    j["device"] = {{"model", model_name(c.model)}, {"lrs", c.linear.lrs_ohms}, {"hrs", c.linear.hrs_ohms},
                   {"k_on", c.nonlinear.k_on},     {"k_off", c.nonlinear.k_off}, {"a", c.nonlinear.a}};
    j["variation"] = {{"relative_sigma", c.variation.relative_sigma}};
    const SenseParams& s = c.sense;
    j["sense"] = {{"v_dd", s.v_dd},
                  {"v_b", s.v_b},
                  {"r_l", s.r_l},
                  {"alpha", s.alpha},
                  {"i_ref", s.i_ref},
                  {"i_1", s.i_1},
                  {"noise_margin", s.noise_margin},
                  {"v_disturb_pos", s.v_disturb_pos},
                  {"v_disturb_neg", s.v_disturb_neg},
                  {"recovery_time", s.recovery_time},
                  {"energy_per_bit", s.energy_per_bit},
                  {"i_max", s.i_max},
                  {"i_min", s.i_min}};
    j["mismatch"] = {{"delta_v", c.delta_v},
                     {"step", c.mismatch.step},
                     {"sweep_cap", c.mismatch.sweep_cap},
                     {"r_wire", c.mismatch.r_wire}};
    const char* nl = c.solver.newton_linear == NewtonLinearSolve::Auto     ? "auto"
                     : c.solver.newton_linear == NewtonLinearSolve::Direct ? "direct"
                                                                           : "pcg";
    j["solver"] = {{"abs_tol", c.solver.abs_tol},
                   {"max_newton_iters", c.solver.max_newton_iters},
                   {"damping", c.solver.damping},
                   {"max_halvings", c.solver.max_halvings},
                   {"polish_steps", c.solver.polish_steps},
                   {"newton_linear", nl},
                   {"pcg_threshold", c.solver.pcg_threshold},
                   {"pcg_rel_tol", c.solver.pcg_rel_tol},
                   {"pcg_max_iters", c.solver.pcg_max_iters}};
    const auto& p = c.plan;
    std::vector<std::string> models;
    for (DeviceModel m : p.models) models.push_back(model_name(m));
    j["experiment"] = {{"trials", p.trials},
                       {"threads", p.threads},
                       {"pattern_p", p.pattern_p},
                       {"samples", p.samples},
                       {"unselected", p.unselected == UnselectedLines::Floating ? "floating" : "grounded"},
                       {"histogram_bins", p.histogram_bins},
                       {"sizes", p.sizes},
                       {"v_b_values", p.v_b_values},
                       {"models", models},
                       {"rows_per_trial", p.rows_per_trial},
                       {"max_unknowns", p.max_unknowns},
                       {"delta_v_values", p.delta_v_values},
                       {"r_s", p.r_s},
                       {"baseline_v_b", p.baseline_v_b},
                       {"conventional_cells", p.conventional_cells}};
    return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return config_to_json(a) == config_to_json(b); }

}  // namespace xbar
