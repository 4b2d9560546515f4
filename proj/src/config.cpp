#include "ltswave/config.hpp"

#include "ltswave/errors.hpp"
#include "ltswave/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ltswave {

namespace {

/// Every key the format admits; anything else is rejected by name.
constexpr std::array<const char*, 15> kKnownKeys = {
    "mesh.type",        "mesh.h_init",   "mesh.corner_refinements",
    "mesh.global_refinements",
    "fem.degree",       "fem.lumping",
    "lts.p",            "lts.safety",
    "time.T",           "time.dt",
    "problem.preset",   "problem.gauss_delta", "problem.gauss_x0",
    "output.dir",
    "run.experiment",
};
constexpr std::array<const char*, 3> kRunKeys = {"run.mode", "run.levels",
                                                 "run.experiment"};

bool known_key(const std::string& key) {
    auto match = [&key](const char* k) { return key == k; };
    return std::any_of(kKnownKeys.begin(), kKnownKeys.end(), match) ||
           std::any_of(kRunKeys.begin(), kRunKeys.end(), match);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

int parse_int(const std::string& key, const std::string& raw) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(raw, &used);
        if (used != raw.size())
            throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config: key '" + key + "' needs an integer, got '" +
                              raw + "'");
    }
}

double parse_double(const std::string& key, const std::string& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size())
            throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config: key '" + key + "' needs a number, got '" +
                              raw + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "1" || raw == "on")
        return true;
    if (raw == "false" || raw == "0" || raw == "off")
        return false;
    throw InvalidArgument("config: key '" + key + "' needs true/false, got '" +
                          raw + "'");
}

} // namespace

const std::string& RunConfig::required(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end())
        throw InvalidArgument("config: missing required key '" + key + "'");
    return it->second;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config: line " + std::to_string(line_no) +
                                  " is not of the form 'section.key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw InvalidArgument("config: line " + std::to_string(line_no) +
                                  " has an empty key or value");
        if (!known_key(key))
            throw InvalidArgument("config: unknown key '" + key + "'");
        if (!cfg.values.emplace(key, value).second)
            throw InvalidArgument("config: duplicate key '" + key + "'");
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw IoFailure("config: cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

BoundConfig bind_config(const RunConfig& cfg, bool require_experiment) {
    BoundConfig bound;
    ExperimentSpec& spec = bound.spec;

    const std::string mesh_type = cfg.required("mesh.type");
    if (mesh_type == "interval")
        spec.geometry = Geometry::Interval;
    else if (mesh_type == "square")
        spec.geometry = Geometry::UnitSquare;
    else if (mesh_type == "lshape")
        spec.geometry = Geometry::LShape;
    else
        throw InvalidArgument("config: mesh.type must be interval, square, or "
                              "lshape, got '" +
                              mesh_type + "'");

    if (cfg.has("mesh.h_init"))
        spec.h_init = parse_double("mesh.h_init", cfg.values.at("mesh.h_init"));
    if (cfg.has("mesh.corner_refinements"))
        spec.corner_refinements = parse_int(
            "mesh.corner_refinements", cfg.values.at("mesh.corner_refinements"));
    if (cfg.has("mesh.global_refinements"))
        spec.global_refinements = parse_int(
            "mesh.global_refinements", cfg.values.at("mesh.global_refinements"));

    if (cfg.has("fem.degree"))
        spec.degree = parse_int("fem.degree", cfg.values.at("fem.degree"));
    if (cfg.has("fem.lumping"))
        spec.lumping = parse_bool("fem.lumping", cfg.values.at("fem.lumping"));

    if (cfg.has("lts.p"))
        spec.p = parse_int("lts.p", cfg.values.at("lts.p"));
    if (cfg.has("lts.safety"))
        spec.safety = parse_double("lts.safety", cfg.values.at("lts.safety"));

    if (require_experiment)
        spec.T = parse_double("time.T", cfg.required("time.T"));
    else if (cfg.has("time.T"))
        spec.T = parse_double("time.T", cfg.values.at("time.T"));

    if (cfg.has("time.dt") && cfg.values.at("time.dt") != "auto") {
        spec.dt = parse_double("time.dt", cfg.values.at("time.dt"));
        bound.dt_auto = false;
    }

    if (cfg.has("problem.preset")) {
        const std::string& preset = cfg.values.at("problem.preset");
        if (preset == "manufactured")
            spec.preset = Preset::Manufactured;
        else if (preset == "gaussian")
            spec.preset = Preset::GaussianNarrow;
        else if (preset == "gaussian_resolvable")
            spec.preset = Preset::GaussianResolvable;
        else
            throw InvalidArgument("config: problem.preset must be manufactured, "
                                  "gaussian, or gaussian_resolvable, got '" +
                                  preset + "'");
    }
    if (cfg.has("problem.gauss_delta"))
        spec.gauss_delta =
            parse_double("problem.gauss_delta", cfg.values.at("problem.gauss_delta"));
    if (cfg.has("problem.gauss_x0"))
        spec.gauss_x0 =
            parse_double("problem.gauss_x0", cfg.values.at("problem.gauss_x0"));

    if (require_experiment) {
        bound.experiment = cfg.required("run.experiment");
        const bool known = bound.experiment == "run" ||
                           bound.experiment == "converge" ||
                           bound.experiment == "stability" ||
                           bound.experiment == "lshape" ||
                           bound.experiment == "bench";
        if (!known)
            throw InvalidArgument("config: run.experiment must be run, converge, "
                                  "stability, lshape, or bench, got '" +
                                  bound.experiment + "'");
        spec.out_dir = cfg.required("output.dir");
    } else if (cfg.has("output.dir")) {
        spec.out_dir = cfg.values.at("output.dir");
    }

    if (cfg.has("run.levels"))
        spec.levels = parse_int("run.levels", cfg.values.at("run.levels"));
    if (cfg.has("run.mode")) {
        const std::string& mode = cfg.values.at("run.mode");
        if (mode == "spatial")
            bound.mode = ConvergenceMode::Spatial;
        else if (mode == "temporal")
            bound.mode = ConvergenceMode::Temporal;
        else
            throw InvalidArgument(
                "config: run.mode must be spatial or temporal, got '" + mode + "'");
    }

    spec.validate();
    return bound;
}

std::string manifest_text(const BoundConfig& bound, double resolved_dt) {
    const ExperimentSpec& s = bound.spec;
    auto geometry = [&] {
        switch (s.geometry) {
        case Geometry::Interval: return "interval";
        case Geometry::UnitSquare: return "square";
        case Geometry::LShape: return "lshape";
        }
        return "?";
    }();
    auto preset = [&] {
        switch (s.preset) {
        case Preset::Manufactured: return "manufactured";
        case Preset::GaussianNarrow: return "gaussian";
        case Preset::GaussianResolvable: return "gaussian_resolvable";
        }
        return "?";
    }();

    std::ostringstream out;
    out << "fem.degree = " << s.degree << '\n'
        << "fem.lumping = " << (s.lumping ? "true" : "false") << '\n'
        << "lts.p = " << s.p << '\n'
        << "lts.safety = " << csv_num(s.safety) << '\n'
        << "mesh.corner_refinements = " << s.corner_refinements << '\n'
        << "mesh.global_refinements = " << s.global_refinements << '\n'
        << "mesh.h_init = " << csv_num(s.h_init) << '\n'
        << "mesh.type = " << geometry << '\n'
        << "output.dir = " << s.out_dir << '\n'
        << "problem.gauss_delta = " << csv_num(s.gauss_delta) << '\n'
        << "problem.gauss_x0 = " << csv_num(s.gauss_x0) << '\n'
        << "problem.preset = " << preset << '\n';
    if (!bound.experiment.empty()) {
        out << "run.experiment = " << bound.experiment << '\n'
            << "run.levels = " << s.levels << '\n'
            << "run.mode = "
            << (bound.mode == ConvergenceMode::Spatial ? "spatial" : "temporal")
            << '\n';
    }
    out << "time.T = " << csv_num(s.T) << '\n'
        << "time.dt = "
        << (bound.dt_auto ? std::string("auto") : csv_num(s.dt)) << '\n'
        << "time.dt_resolved = " << csv_num(resolved_dt) << '\n';
    return out.str();
}

void write_manifest(const std::string& path, const BoundConfig& bound,
                    double resolved_dt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out.good())
        throw IoFailure("manifest: cannot write '" + path + "'");
    out << manifest_text(bound, resolved_dt);
    if (!out.good())
        throw IoFailure("manifest: write failed for '" + path + "'");
}

} // namespace ltswave
