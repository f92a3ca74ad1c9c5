// config.hpp: run configuration: sectioned key-value files and their resolved form

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heom/errors.hpp"
#include "heom/propagator.hpp"
#include "heom/systems.hpp"

namespace heom::cli {

class ConfigError : public ArgumentError {
public:
    ConfigError(const std::string& origin, int line, const std::string& what)
        : ArgumentError(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct RawEntry {
    std::string value;
    int line{0};  // 0 when not read from a text file
    int seq{0};   // position in the source
};

struct RawConfig {
    std::string origin;
    std::map<std::string, std::map<std::string, RawEntry>> sections;
    std::map<std::string, int> section_lines;
};

// '#' and ';' start comments; keys are unique within a section.
RawConfig parse_ini(std::string_view text, std::string origin);

// The "config" object of a run manifest, as written by snapshot_json().
RawConfig parse_snapshot(const nlohmann::ordered_json& config, std::string origin);

RawConfig load_config_file(const std::string& path);

enum class TimeUnit { Reduced, Femtoseconds };

struct ObservableSpec {
    std::string name;
    std::string expr;  // "P i" | "X i j" | "Y i j" | sigma_x | sigma_y | sigma_z
};

struct RunConfig {
    std::string system_type;  // spin_boson | dimer
    SpinBosonModel spin_boson;
    DimerModel dimer;
    std::string initial;  // up | down | ground | site1 | site2

    TimeUnit time_unit{TimeUnit::Reduced};
    double lambda{0.0};
    double gamma{0.0};
    double beta{0.0};
    std::optional<double> temperature;  // kelvin, requires fs time unit

    int order{0};
    std::optional<std::string> order_target;  // set when order = auto

    double dt{0.001};
    double t_final{1.0};
    double filter_tol{0.0};
    int max_tier{kDefaultMaxTier};
    int record_stride{1};
    bool static_hierarchy{false};
    std::size_t ado_budget{4'000'000};
    double activation_factor{kDefaultActivationFactor};
    DriveFrame frame{DriveFrame::Rotating};

    std::vector<ObservableSpec> observables;
    std::optional<GaussianPulse> pulse;  // times in the configured unit
};

RunConfig resolve(const RawConfig& raw);

// Every resolved value, defaults included; resolve(parse_snapshot(snapshot_json(c))) == c.
nlohmann::ordered_json snapshot_json(const RunConfig& config);
std::string snapshot_ini(const RunConfig& config);

// Objects ready for propagation, in internal units.
struct PreparedRun {
    SystemModel model;
    HierarchySpec spec;
    Matrix initial;
    PropagationConfig config;
    HamiltonianProvider hamiltonian;
    double time_scale{1.0};  // internal time per configured time unit
};

PreparedRun prepare(const RunConfig& config);

Matrix observable_operator(const ObservableSpec& obs, int dim);

}  // namespace heom::cli
