#include "romfv/case_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "romfv/error.hpp"
#include "romfv/mesh_io.hpp"

namespace romfv {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
    const auto mark = node.Mark();
    if (mark.line >= 0) throw ConfigError(fmt::format("line {}: {}", mark.line + 1, what));
    throw ConfigError(what);
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", where));
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(kv.first, fmt::format("unknown key '{}{}'", where.empty() ? "" : where + ".", key));
        }
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a scalar", key));
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, fmt::format("'{}' has an invalid value '{}'", key, node.Scalar()));
    }
}

template <typename T>
void read(const YAML::Node& map, const char* key, const std::string& where, T& out) {
    if (const auto node = map[key]) out = scalar<T>(node, where + "." + key);
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence()) fail(node, fmt::format("'{}' must be a list", key));
    std::vector<double> out;
    for (const auto& item : node) out.push_back(scalar<double>(item, key));
    return out;
}

template <typename Enum, typename Parse>
Enum enum_value(const YAML::Node& node, const std::string& key, Parse parse) {
    const auto text = scalar<std::string>(node, key);
    try {
        return parse(text);
    } catch (const ConfigError& e) {
        fail(node, e.what());
    }
}

BoundaryConditions parse_bcs(const YAML::Node& node, const std::string& where, int comps) {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must map patch names to conditions", where));
    BoundaryConditions out;
    for (const auto& kv : node) {
        const auto patch = kv.first.as<std::string>();
        const std::string key = where + "." + patch;
        check_keys(kv.second, key, {"type", "value"});
        if (!kv.second["type"]) fail(kv.second, fmt::format("'{}' needs a type", key));
        BoundaryCondition bc{patch, enum_value<BcKind>(kv.second["type"], key + ".type", bc_kind_from_string), {}, {}};
        const bool needs_value = bc.kind == BcKind::fixed_value || bc.kind == BcKind::fixed_gradient;
        if (needs_value != static_cast<bool>(kv.second["value"])) {
            fail(kv.second, fmt::format("'{}': {} conditions {} a value", key, to_string(bc.kind),
                                        needs_value ? "need" : "take no"));
        }
        if (needs_value) {
            const auto v = kv.second["value"];
            bc.datum = v.IsSequence() ? number_list(v, key + ".value") : std::vector<double>{scalar<double>(v, key)};
            if (static_cast<int>(bc.datum.size()) != comps) {
                fail(v, fmt::format("'{}' needs {} value component(s)", key, comps));
            }
        }
        out.push_back(std::move(bc));
    }
    return out;
}

void set_path(YAML::Node node, const std::vector<std::string>& keys, std::size_t i, const YAML::Node& value) {
    if (i + 1 == keys.size()) {
        node[keys[i]] = value;
        return;
    }
    if (!node[keys[i]] || !node[keys[i]].IsMap()) node[keys[i]] = YAML::Node(YAML::NodeType::Map);
    set_path(node[keys[i]], keys, i + 1, value);
}

void apply_override(YAML::Node& root, const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("override '{}' is not key=value", text));
    std::vector<std::string> keys;
    std::stringstream path(text.substr(0, eq));
    for (std::string part; std::getline(path, part, '.');) {
        if (part.empty()) throw ConfigError(fmt::format("override '{}' has an empty key segment", text));
        keys.push_back(part);
    }
    YAML::Node value;
    try {
        value = YAML::Load(text.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("override '{}': {}", text, e.msg));
    }
    set_path(root, keys, 0, value);
}

Index count(const YAML::Node& node, const std::string& key) {
    const auto v = scalar<long long>(node, key);
    if (v < 0) fail(node, fmt::format("'{}' must not be negative", key));
    return static_cast<Index>(v);
}

void parse_mesh(const YAML::Node& node, MeshConfig& m) {
    check_keys(node, "mesh", {"generator", "cells", "side", "path", "radial_cells", "azimuthal_cells", "cylinder_radius",
                              "block_half_width", "radial_growth", "x_min", "x_max", "y_min", "y_max", "upstream_cells",
                              "downstream_cells", "side_cells", "far_growth"});
    if (!node["generator"]) fail(node, "'mesh.generator' is required");
    const auto gen = scalar<std::string>(node["generator"], "mesh.generator");
    if (gen == "cavity") {
        m.generator = MeshGenerator::cavity;
    } else if (gen == "cylinder") {
        m.generator = MeshGenerator::cylinder;
    } else if (gen == "file") {
        m.generator = MeshGenerator::file;
    } else {
        fail(node["generator"], fmt::format("unknown mesh generator '{}' (expected cavity, cylinder or file)", gen));
    }
    read(node, "cells", "mesh", m.cells);
    read(node, "side", "mesh", m.side);
    std::string path;
    read(node, "path", "mesh", path);
    m.file = path;
    auto& c = m.cylinder;
    read(node, "radial_cells", "mesh", c.radial_cells);
    read(node, "azimuthal_cells", "mesh", c.azimuthal_cells);
    read(node, "cylinder_radius", "mesh", c.cylinder_radius);
    read(node, "block_half_width", "mesh", c.block_half_width);
    read(node, "radial_growth", "mesh", c.radial_growth);
    read(node, "x_min", "mesh", c.x_min);
    read(node, "x_max", "mesh", c.x_max);
    read(node, "y_min", "mesh", c.y_min);
    read(node, "y_max", "mesh", c.y_max);
    read(node, "upstream_cells", "mesh", c.upstream_cells);
    read(node, "downstream_cells", "mesh", c.downstream_cells);
    read(node, "side_cells", "mesh", c.side_cells);
    read(node, "far_growth", "mesh", c.far_growth);
    if (m.generator == MeshGenerator::file && m.file.empty()) fail(node, "'mesh.path' is required for file meshes");
}

bool is_multiple(double span, double step) {
    const double r = span / step;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::round(r));
}

void validate(const CaseConfig& c) {
    if (c.name.empty()) throw ConfigError("'name' is required");
    if (c.output.empty()) throw ConfigError("'output' is required");
    if (c.viscosities.empty()) throw ConfigError("'physics.viscosities' must list at least one value");
    for (double nu : c.viscosities) {
        if (!(nu > 0.0)) throw ConfigError(fmt::format("viscosity {} is not positive", nu));
    }
    if (std::set<double>(c.viscosities.begin(), c.viscosities.end()).size() != c.viscosities.size()) {
        throw ConfigError("'physics.viscosities' contains duplicates");
    }
    if (!c.initial_velocity.empty() && c.initial_velocity.size() != 2) {
        throw ConfigError("'initial_velocity' needs two components");
    }
    const auto mesh = build_mesh(c.mesh);
    TransientCase t = training_case(c, mesh);
    for (double nu : c.viscosities) {
        t.viscosity = nu;
        t.validate();
    }
    if (c.velocity_modes == 0 || c.pressure_modes == 0) throw ConfigError("mode counts must be at least 1");
    if (c.stabilisations.empty()) throw ConfigError("'reduction.stabilisation' must list at least one model");
    if (c.velocity_modes > kMaxReducedModes) {
        throw ConfigError(fmt::format("velocity_modes {} exceeds the cap of {}", c.velocity_modes, kMaxReducedModes));
    }
    const bool sup = std::count(c.stabilisations.begin(), c.stabilisations.end(), Stabilisation::sup) > 0;
    if (sup) {
        if (c.supremizer_modes == 0) throw ConfigError("SUP stabilisation needs supremizer_modes >= 1");
        if (c.velocity_modes + c.supremizer_modes > kMaxReducedModes) {
            throw ConfigError(fmt::format("enriched velocity space ({} + {}) exceeds the cap of {}", c.velocity_modes,
                                          c.supremizer_modes, kMaxReducedModes));
        }
        if (c.enrichment == EnrichmentStrategy::exact && c.supremizer_modes != c.pressure_modes) {
            throw ConfigError("exact enrichment gives one supremizer per pressure mode; set supremizer_modes = pressure_modes");
        }
    }
    const Index snapshots = t.n_snapshots() * c.viscosities.size();
    for (Index n : {c.velocity_modes, c.pressure_modes, c.supremizer_modes}) {
        if (n > snapshots) throw ConfigError(fmt::format("{} modes requested from {} snapshots", n, snapshots));
    }
    if (!(c.online_viscosity > 0.0)) throw ConfigError("'online.viscosity' must be positive");
    if (!(c.online_horizon > 0.0)) throw ConfigError("'online.horizon' must be positive");
    if (c.online_dt < 0.0) throw ConfigError("'online.dt' must not be negative");
    if (!is_multiple(c.snapshot_interval, c.effective_online_dt())) {
        throw ConfigError("'online.dt' must divide the snapshot interval");
    }
    if (!is_multiple(c.online_horizon, c.snapshot_interval) || c.online_end() < c.online_start() + c.snapshot_interval) {
        throw ConfigError("'online.horizon' must be a multiple of the snapshot interval covering at least two snapshots");
    }
    if (!is_multiple(c.online_end(), c.dt)) throw ConfigError("online end time is not a multiple of the HF time step");
    if (c.timing_repeats < 1) throw ConfigError("'online.timing_repeats' must be at least 1");
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += fmt::format("{:.17g};", x);
    return s;
}

std::string bcs_text(const BoundaryConditions& bcs) {
    std::string s;
    for (const auto& bc : bcs) s += fmt::format("{}:{}:{}|", bc.patch, to_string(bc.kind), join(bc.datum));
    return s;
}

}  // namespace

double CaseConfig::online_start() const { return snapshot_start + snapshot_interval; }

Index CaseConfig::online_steps_per_record() const {
    return static_cast<Index>(std::lround(snapshot_interval / effective_online_dt()));
}

Index CaseConfig::online_records() const {
    return static_cast<Index>(std::lround((online_end() - online_start()) / snapshot_interval));
}

bool CaseConfig::reference_in_training() const {
    return std::find(viscosities.begin(), viscosities.end(), online_viscosity) != viscosities.end() &&
           online_end() <= end_time + 1e-9 * snapshot_interval;
}

std::string CaseConfig::fingerprint(std::string_view stage) const {
    if (stage == "mesh") {
        const auto& y = mesh.cylinder;
        return fmt::format("mesh {} {} {:.17g} {} | {} {} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {} {} {} {:.17g}",
                           static_cast<int>(mesh.generator), mesh.cells, mesh.side, mesh.file.string(),
                           y.radial_cells, y.azimuthal_cells, y.cylinder_radius, y.block_half_width, y.radial_growth,
                           y.x_min, y.x_max, y.y_min, y.y_max, y.upstream_cells, y.downstream_cells, y.side_cells,
                           y.far_growth);
    }
    if (stage == "hf") {
        std::string probe_text;
        for (const auto& p : probes) probe_text += fmt::format("{:.17g},{:.17g};", p.x, p.y);
        return fmt::format(
            "hf u[{}] p[{}] init[{}] nu[{}] dt {:.17g} end {:.17g} start {:.17g} every {:.17g} | {} {} {} {} {:.17g} "
            "{:.17g} {:.17g} {} probes[{}] | online {:.17g} {:.17g}",
            bcs_text(velocity_bcs), bcs_text(pressure_bcs), join(initial_velocity), join(viscosities), dt, end_time,
            snapshot_start, snapshot_interval, to_string(convection), to_string(time_scheme), outer_iterations,
            correctors, momentum_tolerance, pressure_tolerance, continuity_tolerance, max_linear_iterations, probe_text,
            online_viscosity, online_horizon);
    }
    if (stage == "pod") return fmt::format("pod {} {}", velocity_modes, pressure_modes);
    if (stage == "supremizer") return fmt::format("supremizer {} {}", to_string(enrichment), supremizer_modes);
    if (stage == "offline") {
        std::string s = "offline";
        for (auto k : stabilisations) s += fmt::format(" {}", to_string(k));
        return s;
    }
    if (stage == "online") return fmt::format("online {:.17g} {}", effective_online_dt(), timing_repeats);
    if (stage == "compare") return "compare";
    throw ConfigError(fmt::format("unknown pipeline stage '{}'", stage));
}

CaseConfig parse_case(const std::string& text, const std::vector<std::string>& overrides,
                      const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) apply_override(root, o);

    check_keys(root, "", {"name", "output", "mesh", "boundary", "initial_velocity", "physics", "time", "solver",
                          "reduction", "online"});
    CaseConfig c;
    read(root, "name", "", c.name);
    std::string output;
    read(root, "output", "", output);
    c.output = output;

    if (!root["mesh"]) fail(root, "'mesh' section is required");
    parse_mesh(root["mesh"], c.mesh);
    if (c.mesh.generator == MeshGenerator::file && c.mesh.file.is_relative()) c.mesh.file = base_dir / c.mesh.file;

    const auto boundary = root["boundary"];
    if (!boundary) fail(root, "'boundary' section is required");
    check_keys(boundary, "boundary", {"velocity", "pressure"});
    if (!boundary["velocity"] || !boundary["pressure"]) fail(boundary, "'boundary' needs velocity and pressure entries");
    c.velocity_bcs = parse_bcs(boundary["velocity"], "boundary.velocity", 2);
    c.pressure_bcs = parse_bcs(boundary["pressure"], "boundary.pressure", 1);
    if (const auto init = root["initial_velocity"]) c.initial_velocity = number_list(init, "initial_velocity");

    if (const auto physics = root["physics"]) {
        check_keys(physics, "physics", {"viscosities"});
        if (physics["viscosities"]) c.viscosities = number_list(physics["viscosities"], "physics.viscosities");
    }

    const auto time = root["time"];
    if (!time) fail(root, "'time' section is required");
    check_keys(time, "time", {"dt", "end", "snapshot_start", "snapshot_interval"});
    read(time, "dt", "time", c.dt);
    read(time, "end", "time", c.end_time);
    read(time, "snapshot_start", "time", c.snapshot_start);
    read(time, "snapshot_interval", "time", c.snapshot_interval);

    if (const auto solver = root["solver"]) {
        check_keys(solver, "solver", {"convection", "time_scheme", "outer_iterations", "correctors",
                                      "momentum_tolerance", "pressure_tolerance", "continuity_tolerance",
                                      "max_linear_iterations", "probes"});
        if (solver["convection"]) {
            c.convection = enum_value<Scheme>(solver["convection"], "solver.convection", scheme_from_string);
        }
        if (solver["time_scheme"]) {
            c.time_scheme = enum_value<TimeScheme>(solver["time_scheme"], "solver.time_scheme", time_scheme_from_string);
        }
        read(solver, "outer_iterations", "solver", c.outer_iterations);
        read(solver, "correctors", "solver", c.correctors);
        read(solver, "momentum_tolerance", "solver", c.momentum_tolerance);
        read(solver, "pressure_tolerance", "solver", c.pressure_tolerance);
        read(solver, "continuity_tolerance", "solver", c.continuity_tolerance);
        read(solver, "max_linear_iterations", "solver", c.max_linear_iterations);
        if (const auto probes = solver["probes"]) {
            if (!probes.IsSequence()) fail(probes, "'solver.probes' must be a list of [x, y] points");
            for (const auto& p : probes) {
                const auto xy = number_list(p, "solver.probes");
                if (xy.size() != 2) fail(p, "probe locations need two coordinates");
                c.probes.push_back({xy[0], xy[1]});
            }
        }
    }

    if (const auto red = root["reduction"]) {
        check_keys(red, "reduction", {"velocity_modes", "pressure_modes", "supremizer_modes", "enrichment",
                                      "stabilisation"});
        if (red["velocity_modes"]) c.velocity_modes = count(red["velocity_modes"], "reduction.velocity_modes");
        if (red["pressure_modes"]) c.pressure_modes = count(red["pressure_modes"], "reduction.pressure_modes");
        if (red["supremizer_modes"]) c.supremizer_modes = count(red["supremizer_modes"], "reduction.supremizer_modes");
        if (red["enrichment"]) {
            c.enrichment = enum_value<EnrichmentStrategy>(red["enrichment"], "reduction.enrichment",
                                                          enrichment_from_string);
        }
        if (const auto list = red["stabilisation"]) {
            c.stabilisations.clear();
            if (list.IsScalar()) {
                c.stabilisations.push_back(
                    enum_value<Stabilisation>(list, "reduction.stabilisation", stabilisation_from_string));
            } else if (list.IsSequence()) {
                for (const auto& item : list) {
                    const auto k = enum_value<Stabilisation>(item, "reduction.stabilisation", stabilisation_from_string);
                    if (std::count(c.stabilisations.begin(), c.stabilisations.end(), k)) {
                        fail(item, fmt::format("stabilisation '{}' listed twice", to_string(k)));
                    }
                    c.stabilisations.push_back(k);
                }
            } else {
                fail(list, "'reduction.stabilisation' must be a name or a list of names");
            }
        }
    }

    const auto online = root["online"];
    if (!online) fail(root, "'online' section is required");
    check_keys(online, "online", {"viscosity", "horizon", "dt", "timing_repeats"});
    read(online, "viscosity", "online", c.online_viscosity);
    read(online, "horizon", "online", c.online_horizon);
    read(online, "dt", "online", c.online_dt);
    read(online, "timing_repeats", "online", c.timing_repeats);

    validate(c);
    return c;
}

CaseConfig load_case(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open case file '{}'", path.string()));
    std::stringstream text;
    text << in.rdbuf();
    return parse_case(text.str(), overrides, path.parent_path());
}

std::shared_ptr<const Mesh> build_mesh(const MeshConfig& config) {
    switch (config.generator) {
        case MeshGenerator::cavity:
            if (config.cells < 1 || !(config.side > 0.0)) throw ConfigError("cavity mesh needs cells >= 1 and side > 0");
            return std::make_shared<const Mesh>(generate_cavity_mesh(config.cells, config.side));
        case MeshGenerator::cylinder:
            try {
                return std::make_shared<const Mesh>(generate_cylinder_mesh(config.cylinder));
            } catch (const MeshError& e) {
                throw ConfigError(fmt::format("invalid cylinder mesh parameters: {}", e.what()));
            }
        case MeshGenerator::file:
            return std::make_shared<const Mesh>(load_mesh(config.file));
    }
    throw ConfigError("unknown mesh generator");
}

TransientCase training_case(const CaseConfig& config, std::shared_ptr<const Mesh> mesh) {
    TransientCase t;
    t.velocity_bcs = config.velocity_bcs;
    t.pressure_bcs = config.pressure_bcs;
    if (!config.initial_velocity.empty()) {
        t.initial_velocity.resize(static_cast<Eigen::Index>(2 * mesh->n_cells()));
        for (Index c = 0; c < mesh->n_cells(); ++c) {
            t.initial_velocity[static_cast<Eigen::Index>(2 * c)] = config.initial_velocity[0];
            t.initial_velocity[static_cast<Eigen::Index>(2 * c + 1)] = config.initial_velocity[1];
        }
    }
    t.mesh = std::move(mesh);
    t.viscosity = config.viscosities.empty() ? 0.0 : config.viscosities.front();
    t.dt = config.dt;
    t.end_time = config.end_time;
    t.snapshot_start = config.snapshot_start;
    t.snapshot_interval = config.snapshot_interval;
    t.convection_scheme = config.convection;
    t.time_scheme = config.time_scheme;
    t.outer_iterations = config.outer_iterations;
    t.correctors = config.correctors;
    t.momentum_tolerance = config.momentum_tolerance;
    t.pressure_tolerance = config.pressure_tolerance;
    t.continuity_tolerance = config.continuity_tolerance;
    t.max_linear_iterations = config.max_linear_iterations;
    t.probes = config.probes;
    return t;
}

}  // namespace romfv
