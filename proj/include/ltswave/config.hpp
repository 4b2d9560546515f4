#ifndef LTSWAVE_CONFIG_HPP
#define LTSWAVE_CONFIG_HPP

#include "ltswave/harness.hpp"

#include <map>
#include <string>

namespace ltswave {

/// Parsed flat configuration: "section.key = value" lines, '#' comments.
/// Unknown and duplicate keys are rejected at parse time with the offending
/// key named in the error.
struct RunConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    /// Throws InvalidArgument naming the key when it is absent.
    const std::string& required(const std::string& key) const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Experiment selector plus the fully bound harness spec.
struct BoundConfig {
    ExperimentSpec spec;
    std::string experiment;    // run | converge | stability | lshape | bench
    ConvergenceMode mode = ConvergenceMode::Spatial;
    bool dt_auto = true;       // time.dt = auto (resolved per run)
};

/// Validate values and map them onto the harness spec.  When
/// `require_experiment` is set (cmd_run), run.experiment, time.T, and
/// output.dir become required keys.
BoundConfig bind_config(const RunConfig& cfg, bool require_experiment);

/// The resolved configuration, one sorted "key = value" per line -- the
/// manifest every run echoes next to its artifacts.
std::string manifest_text(const BoundConfig& bound, double resolved_dt);
void write_manifest(const std::string& path, const BoundConfig& bound,
                    double resolved_dt);

} // namespace ltswave

#endif
