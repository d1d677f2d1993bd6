#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "xbar/experiments.hpp"

namespace xbar {

/// Everything a CLI run needs. Defaults reproduce the published parameter set.
struct RunConfig {
    CrossbarSpec crossbar{};
    DeviceModel model = DeviceModel::Linear;
    LinearDeviceParams linear{};
    NonlinearDeviceParams nonlinear{};
    VariationSpec variation{};
    SenseParams sense{};
    double delta_v = 2e-3;
    MismatchCheckOptions mismatch{};
    SolverOptions solver{};
    ExperimentPlan plan{};  // experiment-only fields; shared sections above take precedence
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;

    DeviceParams device() const;
    DeviceParams device(DeviceModel m) const;
    MismatchParams mismatch_params(DeviceModel m) const;
    /// Plan with the shared sections folded in.
    ExperimentPlan experiment_plan() const;

    void validate() const;
};

/// Default output directory: $XBAR_OUTPUT_DIR if set, else "out".
std::filesystem::path default_output_dir();

/// Builds a validated config from a JSON document. Quantities may be numbers
/// in base SI or strings with SI prefixes and units ("10mV", "1MΩ").
/// Throws ConfigError naming the offending key.
RunConfig config_from_json(const nlohmann::json& doc);

/// Reads `path` (if non-empty) and applies `overrides` of the form
/// "section.key=value", where value is JSON or a bare string.
RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Full config in base SI units; config_from_json(config_to_json(c)) == c.
nlohmann::ordered_json config_to_json(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace xbar
