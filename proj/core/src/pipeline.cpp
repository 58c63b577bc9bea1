#include "romfv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "romfv/analysis.hpp"
#include "romfv/error.hpp"
#include "romfv/hashing.hpp"
#include "romfv/mesh_io.hpp"
#include "romfv/snapshot.hpp"

namespace romfv {

namespace fs = std::filesystem;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr const char* kMesh = "mesh.msh";
constexpr const char* kVelocity = "velocity.snap";
constexpr const char* kPressure = "pressure.snap";
constexpr const char* kRefVelocity = "reference_velocity.snap";
constexpr const char* kRefPressure = "reference_pressure.snap";
constexpr const char* kVelocityBasis = "velocity_basis.bin";
constexpr const char* kPressureBasis = "pressure_basis.bin";
constexpr const char* kSupremizerBasis = "supremizer_basis.bin";
constexpr const char* kInfSup = "infsup.csv";
constexpr const char* kHfTiming = "hf_timing.csv";
constexpr const char* kOnlineTiming = "online_timing.csv";
constexpr const char* kErrors = "errors.csv";
constexpr const char* kSummary = "summary.csv";
constexpr const char* kEigenvalues = "eigenvalues.csv";
constexpr const char* kSpeedup = "speedup.csv";
constexpr const char* kFinalFields = "final_fields.vtk";

std::string sidecar_name(const char* basis) { return eigenvalue_sidecar(basis).string(); }

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Records of a single-parameter set with t inside [t0, t1] (inclusive up to rounding).
SnapshotSet window(const SnapshotSet& set, double t0, double t1, double tol) {
    std::vector<SnapshotRecord> records;
    for (const auto& r : set.records()) {
        if (r.t >= t0 - tol && r.t <= t1 + tol) records.push_back(r);
    }
    const Index n = records.size();
    return {set.mesh_ptr(), set.rank(), n ? Index{1} : Index{0}, n, std::move(records)};
}

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::mesh: return "mesh";
        case Stage::hf: return "hf";
        case Stage::pod: return "pod";
        case Stage::supremizer: return "supremizer";
        case Stage::offline: return "offline";
        case Stage::online: return "online";
        case Stage::compare: return "compare";
    }
    return "?";
}

Stage stage_from_string(std::string_view text) {
    for (Stage s : all_stages()) {
        if (to_string(s) == text) return s;
    }
    throw ConfigError(fmt::format("unknown stage '{}'", text));
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages{Stage::mesh,    Stage::hf,     Stage::pod,    Stage::supremizer,
                                           Stage::offline, Stage::online, Stage::compare};
    return stages;
}

const std::vector<Stage>& upstream(Stage stage) {
    static const std::vector<Stage> none;
    static const std::vector<Stage> mesh{Stage::mesh};
    static const std::vector<Stage> hf{Stage::mesh, Stage::hf};
    static const std::vector<Stage> sup{Stage::mesh, Stage::hf, Stage::pod};
    static const std::vector<Stage> offline{Stage::mesh, Stage::pod, Stage::supremizer};
    static const std::vector<Stage> online{Stage::mesh, Stage::hf, Stage::pod, Stage::supremizer, Stage::offline};
    static const std::vector<Stage> compare{Stage::mesh, Stage::hf, Stage::pod, Stage::supremizer, Stage::offline,
                                            Stage::online};
    switch (stage) {
        case Stage::mesh: return none;
        case Stage::hf: return mesh;
        case Stage::pod: return hf;
        case Stage::supremizer: return sup;
        case Stage::offline: return offline;
        case Stage::online: return online;
        case Stage::compare: return compare;
    }
    return none;
}

Pipeline::Pipeline(CaseConfig config, LogFn log) : config_(std::move(config)), log_(std::move(log)) {
    if (!log_) log_ = [](std::string_view) {};
}

fs::path Pipeline::manifest_path(Stage stage) const { return dir() / fmt::format("{}.manifest", to_string(stage)); }
fs::path Pipeline::model_path(Stabilisation kind) const { return dir() / fmt::format("model_{}.bin", to_string(kind)); }
fs::path Pipeline::coefficients_path(Stabilisation kind) const {
    return dir() / fmt::format("coefficients_{}.csv", to_string(kind));
}
fs::path Pipeline::energy_path(Stabilisation kind) const { return dir() / fmt::format("energy_{}.csv", to_string(kind)); }

std::string Pipeline::hash(const fs::path& file) const {
    std::error_code ec;
    const auto stamp = fs::last_write_time(file, ec);
    if (ec) return {};
    const auto key = fs::absolute(file).string();
    auto it = hash_cache_.find(key);
    if (it != hash_cache_.end() && it->second.first == stamp) return it->second.second;
    auto digest = sha256_file(file);
    hash_cache_[key] = {stamp, digest};
    return digest;
}

std::vector<std::string> Pipeline::outputs_of(Stage stage) const {
    switch (stage) {
        case Stage::mesh: return {kMesh};
        case Stage::hf: return {kVelocity, kPressure, kRefVelocity, kRefPressure};
        case Stage::pod:
            return {kVelocityBasis, sidecar_name(kVelocityBasis), kPressureBasis, sidecar_name(kPressureBasis)};
        case Stage::supremizer: return {kSupremizerBasis};
        case Stage::offline: {
            std::vector<std::string> out{kInfSup};
            for (auto k : config_.stabilisations) out.push_back(model_path(k).filename().string());
            return out;
        }
        case Stage::online: {
            std::vector<std::string> out;
            for (auto k : config_.stabilisations) out.push_back(coefficients_path(k).filename().string());
            return out;
        }
        case Stage::compare: {
            std::vector<std::string> out{kErrors, kSummary, kEigenvalues, kFinalFields};
            for (auto k : config_.stabilisations) out.push_back(energy_path(k).filename().string());
            return out;
        }
    }
    return {};
}

void Pipeline::write_manifest(Stage stage, const std::vector<std::string>& inputs,
                              const std::vector<std::string>& outputs) const {
    std::ofstream out(manifest_path(stage), std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write manifest for stage '{}'", to_string(stage)));
    out << "romfv-manifest 1\n";
    out << "stage " << to_string(stage) << '\n';
    out << "config " << sha256_hex(config_.fingerprint(to_string(stage))) << '\n';
    for (const auto& f : inputs) out << "input " << f << ' ' << hash(dir() / f) << '\n';
    for (const auto& f : outputs) out << "output " << f << ' ' << hash(dir() / f) << '\n';
    if (!out) throw IoError(fmt::format("failed writing manifest for stage '{}'", to_string(stage)));
}

Pipeline::Manifest Pipeline::read_manifest(Stage stage) const {
    const auto name = std::string(to_string(stage));
    std::ifstream in(manifest_path(stage));
    if (!in) throw StaleArtifactError(fmt::format("stage '{}' has not been run; run it first", name), name);
    Manifest m;
    std::string line;
    std::getline(in, line);
    if (line != "romfv-manifest 1") throw StaleArtifactError(fmt::format("manifest of stage '{}' is corrupt", name), name);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag, a, b;
        ls >> tag >> a >> b;
        if (tag == "stage") m.stage = a;
        else if (tag == "config") m.config = a;
        else if (tag == "input") m.inputs[a] = b;
        else if (tag == "output") m.outputs[a] = b;
        else throw StaleArtifactError(fmt::format("manifest of stage '{}' is corrupt", name), name);
    }
    return m;
}

void Pipeline::verify(Stage stage) const {
    for (Stage up : upstream(stage)) verify(up);
    const auto name = std::string(to_string(stage));
    const Manifest m = read_manifest(stage);
    if (m.config != sha256_hex(config_.fingerprint(name))) {
        throw StaleArtifactError(fmt::format("configuration of stage '{}' changed since it ran; rerun '{}'", name, name),
                                 name);
    }
    for (const auto& f : outputs_of(stage)) {
        auto it = m.outputs.find(f);
        if (it == m.outputs.end() || hash(dir() / f) != it->second) {
            throw StaleArtifactError(
                fmt::format("artifact '{}' of stage '{}' is missing or modified; rerun '{}'", f, name, name), name);
        }
    }
    for (const auto& [f, digest] : m.inputs) {
        if (hash(dir() / f) != digest) {
            throw StaleArtifactError(
                fmt::format("input '{}' changed after stage '{}' ran; rerun '{}'", f, name, name), name);
        }
    }
}

bool Pipeline::is_current(Stage stage) const {
    try {
        verify(stage);
        return true;
    } catch (const StaleArtifactError&) {
        return false;
    }
}

void Pipeline::run(Stage stage) {
    for (Stage up : upstream(stage)) verify(up);
    fs::create_directories(dir());
    std::error_code ec;
    fs::remove(manifest_path(stage), ec);
    const auto start = std::chrono::steady_clock::now();
    switch (stage) {
        case Stage::mesh: run_mesh(); break;
        case Stage::hf: run_hf(); break;
        case Stage::pod: run_pod(); break;
        case Stage::supremizer: run_supremizer(); break;
        case Stage::offline: run_offline(); break;
        case Stage::online: run_online(); break;
        case Stage::compare: run_compare(); break;
    }
    log_(fmt::format("{}: done in {:.1f} s", to_string(stage), seconds_since(start)));
}

void Pipeline::run_all(bool force) {
    for (Stage s : all_stages()) {
        if (!force && is_current(s)) {
            log_(fmt::format("{}: up to date", to_string(s)));
            continue;
        }
        run(s);
    }
}

std::shared_ptr<const Mesh> Pipeline::load_mesh_artifact() const {
    return std::make_shared<const Mesh>(load_mesh(dir() / kMesh));
}

void Pipeline::run_mesh() {
    const auto mesh = build_mesh(config_.mesh);
    save_mesh(*mesh, dir() / kMesh);
    log_(fmt::format("mesh: {} cells, {} faces", mesh->n_cells(), mesh->n_faces()));
    write_manifest(Stage::mesh, {}, outputs_of(Stage::mesh));
}

void Pipeline::run_hf() {
    const auto mesh = load_mesh_artifact();
    const TransientCase base = training_case(config_, mesh);
    auto prefixed = [this](std::string_view m) { log_(fmt::format("hf: {}", m)); };

    CsvTable timing{{"run", "mu", "wall_seconds", "steps", "simulated_time"}, {}, {}, {}};
    timing.comments.push_back("wall clock around the HF time loop only");
    std::vector<std::string> outputs = outputs_of(Stage::hf);

    SweepResult sweep = run_parameter_sweep(base, config_.viscosities, prefixed);
    write_snapshots(dir() / kVelocity, sweep.velocity);
    write_snapshots(dir() / kPressure, sweep.pressure);
    for (std::size_t i = 0; i < config_.viscosities.size(); ++i) {
        const auto& t = sweep.timings[i];
        timing.labels.push_back("training");
        timing.rows.push_back({t.mu, t.wall_seconds, static_cast<double>(t.steps), t.simulated_time});
        const auto hist = fmt::format("hf_history_{}.csv", i);
        write_history_csv(dir() / hist, sweep.histories[i], t.mu);
        outputs.push_back(hist);
        if (!config_.probes.empty()) {
            const auto probes = fmt::format("hf_probes_{}.csv", i);
            write_probes_csv(dir() / probes, sweep.probes[i], config_.probes, t.mu);
            outputs.push_back(probes);
        }
        log_(fmt::format("hf: nu = {} took {:.1f} s for {} steps", t.mu, t.wall_seconds, t.steps));
    }

    const double tol = 1e-9 * config_.snapshot_interval;
    TimingRecord ref_timing;
    if (config_.reference_in_training()) {
        const auto it = std::find(config_.viscosities.begin(), config_.viscosities.end(), config_.online_viscosity);
        const auto idx = static_cast<Index>(it - config_.viscosities.begin());
        write_snapshots(dir() / kRefVelocity,
                        window(sweep.velocity.block(idx), config_.online_start(), config_.online_end(), tol));
        write_snapshots(dir() / kRefPressure,
                        window(sweep.pressure.block(idx), config_.online_start(), config_.online_end(), tol));
        ref_timing = sweep.timings[idx];
    } else {
        TransientCase ref = base;
        ref.viscosity = config_.online_viscosity;
        ref.end_time = config_.online_end();
        const TransientResult r = solve_transient(ref, prefixed);
        write_snapshots(dir() / kRefVelocity, r.velocity);
        write_snapshots(dir() / kRefPressure, r.pressure);
        write_history_csv(dir() / "hf_history_reference.csv", r.history, ref.viscosity);
        outputs.push_back("hf_history_reference.csv");
        if (!config_.probes.empty()) {
            write_probes_csv(dir() / "hf_probes_reference.csv", r.probes, config_.probes, ref.viscosity);
            outputs.push_back("hf_probes_reference.csv");
        }
        ref_timing = r.timing;
        log_(fmt::format("hf: reference nu = {} took {:.1f} s", ref.viscosity, r.timing.wall_seconds));
    }
    timing.labels.push_back("reference");
    timing.rows.push_back({ref_timing.mu, ref_timing.wall_seconds, static_cast<double>(ref_timing.steps),
                           ref_timing.simulated_time});
    write_csv(dir() / kHfTiming, timing);
    write_manifest(Stage::hf, {kMesh}, outputs);
}

void Pipeline::run_pod() {
    const auto mesh = load_mesh_artifact();
    const SnapshotSet u = read_snapshots(dir() / kVelocity, mesh);
    const SnapshotSet p = read_snapshots(dir() / kPressure, mesh);
    const PodBasis ub = compute_pod(u, config_.velocity_modes, config_.velocity_bcs, BasisKind::velocity);
    const PodBasis pb = compute_pod(p, config_.pressure_modes, config_.pressure_bcs, BasisKind::pressure);
    write_basis(dir() / kVelocityBasis, ub);
    write_basis(dir() / kPressureBasis, pb);
    log_(fmt::format("pod: {} velocity modes keep {:.6f} of the energy, {} pressure modes keep {:.6f}", ub.size(),
                     ub.cumulative[static_cast<Eigen::Index>(ub.size() - 1)], pb.size(),
                     pb.cumulative[static_cast<Eigen::Index>(pb.size() - 1)]));
    write_manifest(Stage::pod, {kMesh, kVelocity, kPressure}, outputs_of(Stage::pod));
}

void Pipeline::run_supremizer() {
    const auto mesh = load_mesh_artifact();
    std::vector<std::string> inputs{kMesh};
    std::vector<std::string> outputs = outputs_of(Stage::supremizer);
    PodBasis s;
    if (config_.enrichment == EnrichmentStrategy::exact) {
        s = exact_supremizer_basis(read_basis(dir() / kPressureBasis, mesh, config_.pressure_bcs, BasisKind::pressure));
        inputs.push_back(kPressureBasis);
    } else {
        s = approximate_supremizer_basis(read_snapshots(dir() / kPressure, mesh), config_.pressure_bcs,
                                         config_.supremizer_modes);
        inputs.push_back(kPressure);
    }
    write_basis(dir() / kSupremizerBasis, s);
    if (s.eigenvalues.size() > 0) outputs.push_back(sidecar_name(kSupremizerBasis));
    log_(fmt::format("supremizer: {} {} modes", s.size(), to_string(config_.enrichment)));
    write_manifest(Stage::supremizer, inputs, outputs);
}

void Pipeline::run_offline() {
    const auto mesh = load_mesh_artifact();
    const PodBasis u = read_basis(dir() / kVelocityBasis, mesh, config_.velocity_bcs, BasisKind::velocity);
    const PodBasis p = read_basis(dir() / kPressureBasis, mesh, config_.pressure_bcs, BasisKind::pressure);
    const PodBasis s =
        read_basis(dir() / kSupremizerBasis, mesh, all_fixed_zero(*mesh, Rank::vector), BasisKind::supremizer);
    const std::map<std::string, std::string> provenance{{"velocity_basis", hash(dir() / kVelocityBasis)},
                                                        {"pressure_basis", hash(dir() / kPressureBasis)},
                                                        {"supremizer_basis", hash(dir() / kSupremizerBasis)}};
    std::vector<std::string> outputs = outputs_of(Stage::offline);
    for (auto kind : config_.stabilisations) {
        const bool sup = kind == Stabilisation::sup;
        const ReducedModel m = project_offline(sup ? enrich(u, s) : u, p, kind, sup ? s.size() : 0);
        write_reduced_model(model_path(kind), m, provenance);
        outputs.push_back(model_path(kind).filename().string() + ".manifest");
        log_(fmt::format("offline: {} model with {} velocity and {} pressure unknowns", to_string(kind),
                         m.n_velocity(), m.n_p));
    }
    CsvTable beta{{"supremizers", "beta"}, {}, {}, {}};
    beta.rows.push_back({0.0, infsup_constant(u, p)});
    for (Index k = 1; k <= s.size(); ++k) {
        beta.rows.push_back({static_cast<double>(k), infsup_constant(enrich(u, s.head(k)), p)});
    }
    write_csv(dir() / kInfSup, beta);
    log_(fmt::format("offline: inf-sup constant {:.3e} without and {:.3e} with {} supremizers", beta.rows.front()[1],
                     beta.rows.back()[1], s.size()));
    write_manifest(Stage::offline, {kMesh, kVelocityBasis, kPressureBasis, kSupremizerBasis}, outputs);
}

void Pipeline::run_online() {
    const auto mesh = load_mesh_artifact();
    const PodBasis u = read_basis(dir() / kVelocityBasis, mesh, config_.velocity_bcs, BasisKind::velocity);
    const PodBasis s =
        read_basis(dir() / kSupremizerBasis, mesh, all_fixed_zero(*mesh, Rank::vector), BasisKind::supremizer);
    const SnapshotSet ref = read_snapshots(dir() / kRefVelocity, mesh);
    if (ref.size() < config_.online_records() + 1) {
        throw IoError(fmt::format("reference run holds {} snapshots, the online horizon needs {}", ref.size(),
                                  config_.online_records() + 1));
    }
    const Field u0(mesh, Rank::vector, ref[0].values, config_.velocity_bcs);
    const double dt = config_.effective_online_dt();
    const Index per_record = config_.online_steps_per_record();
    const Index records = config_.online_records();

    std::vector<std::string> inputs{kMesh, kVelocityBasis, kSupremizerBasis, kRefVelocity};
    CsvTable timing{{"model", "wall_seconds", "simulated_time", "n_u", "n_p", "n_s", "completed"}, {}, {}, {}};
    timing.comments.push_back(fmt::format("wall clock around the online loop only, median of {} runs",
                                          config_.timing_repeats));
    for (auto kind : config_.stabilisations) {
        const ReducedModel m = read_reduced_model(model_path(kind));
        inputs.push_back(model_path(kind).filename().string());
        const PodBasis vb = kind == Stabilisation::sup ? enrich(u, s) : u;
        const RomState initial{project_initial_condition(m, vb, u0), VectorXd::Zero(static_cast<Eigen::Index>(m.n_p)),
                               ref[0].t, config_.online_viscosity};

        std::vector<RomState> trajectory;
        std::string failure;
        std::vector<double> walls;
        for (int rep = 0; rep < config_.timing_repeats; ++rep) {
            std::vector<RomState> traj{initial};
            traj.reserve(records + 1);
            RomState state = initial;
            std::string fail_text;
            const auto start = std::chrono::steady_clock::now();
            for (Index step = 1; step <= records * per_record; ++step) {
                try {
                    state = step_rom(m, state, dt);
                } catch (const NumericalError& e) {
                    fail_text = fmt::format("diverged at t = {:.6g}: {}", state.t, e.what());
                    break;
                }
                if (!state.a.allFinite() || !state.b.allFinite()) {
                    fail_text = fmt::format("non-finite coefficients at t = {:.6g}", state.t);
                    break;
                }
                state.t = initial.t + static_cast<double>(step) * dt;
                if (step % per_record == 0) traj.push_back(state);
            }
            walls.push_back(seconds_since(start));
            trajectory = std::move(traj);
            failure = std::move(fail_text);
        }

        CsvTable coeffs;
        coeffs.header.push_back("t");
        for (Index i = 0; i < m.n_velocity(); ++i) coeffs.header.push_back(fmt::format("a{}", i + 1));
        for (Index i = 0; i < m.n_p; ++i) coeffs.header.push_back(fmt::format("b{}", i + 1));
        coeffs.comments.push_back(fmt::format("{} model, nu = {}, dt = {}", to_string(kind),
                                              format_number(config_.online_viscosity), format_number(dt)));
        if (!failure.empty()) coeffs.comments.push_back(failure);
        for (const auto& st : trajectory) {
            std::vector<double> row{st.t};
            row.insert(row.end(), st.a.data(), st.a.data() + st.a.size());
            row.insert(row.end(), st.b.data(), st.b.data() + st.b.size());
            coeffs.rows.push_back(std::move(row));
        }
        write_csv(coefficients_path(kind), coeffs);

        const double simulated = static_cast<double>(trajectory.size() - 1) * config_.snapshot_interval;
        timing.labels.push_back(std::string(to_string(kind)));
        timing.rows.push_back({median(walls), simulated, static_cast<double>(m.n_u), static_cast<double>(m.n_p),
                               static_cast<double>(m.n_s), failure.empty() ? 1.0 : 0.0});
        if (failure.empty()) {
            log_(fmt::format("online: {} integrated {} steps in {:.4f} s", to_string(kind), records * per_record,
                             median(walls)));
        } else {
            log_(fmt::format("online: {} {}", to_string(kind), failure));
        }
    }
    write_csv(dir() / kOnlineTiming, timing);
    write_manifest(Stage::online, inputs, outputs_of(Stage::online));
}

void Pipeline::run_compare() {
    const auto mesh = load_mesh_artifact();
    const PodBasis u = read_basis(dir() / kVelocityBasis, mesh, config_.velocity_bcs, BasisKind::velocity);
    const PodBasis p = read_basis(dir() / kPressureBasis, mesh, config_.pressure_bcs, BasisKind::pressure);
    const PodBasis s =
        read_basis(dir() / kSupremizerBasis, mesh, all_fixed_zero(*mesh, Rank::vector), BasisKind::supremizer);
    const SnapshotSet ref_u = read_snapshots(dir() / kRefVelocity, mesh);
    const SnapshotSet ref_p = read_snapshots(dir() / kRefPressure, mesh);
    const Index records = config_.online_records();
    const double tol = 1e-6 * config_.snapshot_interval;
    const double train_end = config_.end_time;

    // Reference records 1..records (the initial record is the projected starting point).
    auto tail = [&](const SnapshotSet& set) {
        std::vector<SnapshotRecord> r(set.records().begin() + 1, set.records().begin() + 1 + static_cast<long>(records));
        for (auto& rec : r) rec.mu = config_.online_viscosity;
        return SnapshotSet(mesh, set.rank(), 1, records, std::move(r));
    };
    const SnapshotSet hf_u = tail(ref_u);
    const SnapshotSet hf_p = tail(ref_p);

    std::vector<ErrorSeries> errors;
    CsvTable summary{{"model", "mean_u_train", "mean_p_train", "mean_u_all", "mean_p_all", "max_energy_error",
                      "completed"},
                     {}, {}, {}};
    summary.comments.push_back(fmt::format("train = records with t <= {}, all = full online horizon",
                                           format_number(train_end)));
    std::vector<std::pair<std::string, Field>> final_fields;
    final_fields.emplace_back("hf_u", Field(mesh, Rank::vector, hf_u.records().back().values, config_.velocity_bcs));
    final_fields.emplace_back("hf_p", Field(mesh, Rank::scalar, hf_p.records().back().values, config_.pressure_bcs));

    for (auto kind : config_.stabilisations) {
        const PodBasis vb = kind == Stabilisation::sup ? enrich(u, s) : u;
        const CsvTable coeffs = read_csv(coefficients_path(kind));
        const auto nv = static_cast<Eigen::Index>(vb.size());
        const auto np = static_cast<Eigen::Index>(p.size());
        if (coeffs.header.size() != static_cast<std::size_t>(1 + nv + np)) {
            throw IoError(fmt::format("'{}' does not match the bases", coefficients_path(kind).string()));
        }
        const bool completed = coeffs.rows.size() == records + 1;
        std::vector<SnapshotRecord> ru, rp;
        for (Index k = 0; k < records; ++k) {
            const double t = hf_u[k].t;
            VectorXd uv = VectorXd::Constant(vb.modes.rows(), kNaN);
            VectorXd pv = VectorXd::Constant(p.modes.rows(), kNaN);
            if (k + 1 < coeffs.rows.size()) {
                const auto& row = coeffs.rows[k + 1];
                if (std::abs(row[0] - t) > tol) {
                    throw IoError(fmt::format("online record at t = {} does not match reference time {}", row[0], t));
                }
                const VectorXd a = Eigen::Map<const VectorXd>(row.data() + 1, nv);
                const VectorXd b = Eigen::Map<const VectorXd>(row.data() + 1 + nv, np);
                uv = vb.modes * a;
                pv = p.modes * b;
            }
            ru.push_back({config_.online_viscosity, t, std::move(uv)});
            rp.push_back({config_.online_viscosity, t, std::move(pv)});
        }
        const SnapshotSet rom_u(mesh, Rank::vector, 1, records, std::move(ru));
        const SnapshotSet rom_p(mesh, Rank::scalar, 1, records, std::move(rp));
        const std::string label(to_string(kind));
        auto eu = relative_error(rom_u, hf_u, label, "u").front();
        auto ep = relative_error(rom_p, hf_p, label, "p").front();
        const auto energy = energy_series(rom_u, hf_u, label).front();
        write_csv(energy_path(kind), to_table(energy));

        auto window_mean = [&](const ErrorSeries& e, bool train_only) {
            if (!completed) return std::numeric_limits<double>::infinity();
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t k = 0; k < e.t.size(); ++k) {
                if (train_only && e.t[k] > train_end + tol) break;
                if (e.defined[k]) {
                    sum += e.error[k];
                    ++n;
                }
            }
            return n ? sum / static_cast<double>(n) : kNaN;
        };
        summary.labels.push_back(label);
        summary.rows.push_back({window_mean(eu, true), window_mean(ep, true), window_mean(eu, false),
                                window_mean(ep, false),
                                completed ? energy.max_relative_error() : std::numeric_limits<double>::infinity(),
                                completed ? 1.0 : 0.0});
        if (completed) {
            final_fields.emplace_back(label + "_u", Field(mesh, Rank::vector, rom_u.records().back().values,
                                                          scale_data(config_.velocity_bcs, 1.0)));
            final_fields.emplace_back(label + "_p", Field(mesh, Rank::scalar, rom_p.records().back().values,
                                                          scale_data(config_.pressure_bcs, 1.0)));
        }
        errors.push_back(std::move(eu));
        errors.push_back(std::move(ep));
    }
    write_csv(dir() / kErrors, to_table(errors));
    write_csv(dir() / kSummary, summary);

    std::vector<double> betas;
    const CsvTable beta = read_csv(dir() / kInfSup);
    for (std::size_t i = 1; i < beta.rows.size(); ++i) betas.push_back(beta.rows[i][1]);
    const Index rows = std::max({u.size(), p.size(), s.size()});
    CsvTable eig = to_table(eigenvalue_table(u, p, s, betas, rows));
    eig.comments.push_back(fmt::format("beta without supremizers: {}", format_number(beta.rows.front()[1])));
    write_csv(dir() / kEigenvalues, eig);

    std::vector<std::pair<std::string, const Field*>> vtk;
    for (const auto& [name, f] : final_fields) vtk.emplace_back(name, &f);
    write_vtk(dir() / kFinalFields, *mesh, vtk);

    const CsvTable hf_timing = read_csv(dir() / kHfTiming);
    const CsvTable online_timing = read_csv(dir() / kOnlineTiming);
    const auto& ref_row = hf_timing.rows.back();
    const TimingEntry hf{"hf", ref_row[1], ref_row[3], 0, 0, 0};
    std::vector<TimingEntry> roms;
    for (std::size_t i = 0; i < online_timing.rows.size(); ++i) {
        const auto& r = online_timing.rows[i];
        if (r[5] < 1.0 || !(r[1] > 0.0)) continue;
        roms.push_back({online_timing.labels[i], r[0], r[1], static_cast<Index>(r[2]), static_cast<Index>(r[3]),
                        static_cast<Index>(r[4])});
    }
    write_csv(dir() / kSpeedup, to_table(speedup_report(hf, roms)));

    for (std::size_t i = 0; i < summary.rows.size(); ++i) {
        log_(fmt::format("compare: {} mean error u {:.3e} p {:.3e} (training window), max energy error {:.3e}",
                         summary.labels[i], summary.rows[i][0], summary.rows[i][1], summary.rows[i][4]));
    }
    write_manifest(Stage::compare, {kMesh, kVelocityBasis, kPressureBasis, kSupremizerBasis, kRefVelocity,
                                    kRefPressure},
                   outputs_of(Stage::compare));
}

}  // namespace romfv
