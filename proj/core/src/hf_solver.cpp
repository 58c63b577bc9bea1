#include "romfv/hf_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "romfv/error.hpp"
#include "romfv/fv_matrices.hpp"

namespace romfv {

namespace {

using Eigen::VectorXd;

Index steps_for(double span, double dt, const char* what) {
    const double ratio = span / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
        throw ConfigError(fmt::format("{} ({}) is not an integer multiple of the time step ({})", what, span, dt));
    }
    return static_cast<Index>(rounded);
}

bool has_fixed_value(const BoundaryConditions& bcs) {
    return std::any_of(bcs.begin(), bcs.end(), [](const BoundaryCondition& bc) { return bc.kind == BcKind::fixed_value; });
}

double kinetic_energy_of(const Mesh& mesh, const VectorXd& u) {
    double e = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const auto i = static_cast<Eigen::Index>(2 * c);
        e += mesh.volume(c) * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    }
    return 0.5 * e;
}

double volume_mean(const Mesh& mesh, const VectorXd& p) {
    double s = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) s += mesh.volume(c) * p[static_cast<Eigen::Index>(c)];
    return s / mesh.total_volume();
}

Index nearest_cell(const Mesh& mesh, Vec2 x) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double d = norm(mesh.cell_centre(c) - x);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

/// Operators that stay fixed during a run, assembled once.
class Stepper {
public:
    explicit Stepper(const TransientCase& c)
        : c_(c),
          mesh_(*c.mesh),
          velocity_(Field::uniform(c.mesh, Rank::vector, {0.0, 0.0}, c.velocity_bcs)),
          pressure_(Field::uniform(c.mesh, Rank::scalar, {0.0}, c.pressure_bcs)),
          M_(mass_matrix(mesh_, 2)),
          A_(laplacian_map(velocity_)),
          B_(gradient_map(pressure_, Form::extensive)),
          P_(divergence_map(velocity_)),
          flux_(mass_flux_map(velocity_)),
          sum_(surface_sum_matrix(mesh_, 2)),
          interp_(face_interpolation_map(velocity_, Scheme::linear)),
          pinned_(!has_fixed_value(c.pressure_bcs)) {
        const Field correction(c.mesh, Rank::scalar, VectorXd::Zero(static_cast<Eigen::Index>(mesh_.n_cells())),
                               scale_data(c.pressure_bcs, 0.0));
        Gi_ = gradient_map(correction, Form::intensive).matrix;
        factorise();
        momentum_solver_.setTolerance(c.momentum_tolerance);
        momentum_solver_.setMaxIterations(c.max_linear_iterations);
    }

    const AffineMap& flux_map() const { return flux_; }
    const AffineMap& divergence() const { return P_; }
    bool pinned() const { return pinned_; }

    /// The correction operator div(V^-1 grad) does not depend on the step size.
    void factorise() {
        L_ = P_.matrix * Gi_;
        if (pinned_) {
            L_.prune([](Eigen::Index row, Eigen::Index, double) { return row != 0; });
            L_.coeffRef(0, 0) = 1.0;
        }
        L_.makeCompressed();
        pressure_solver_.compute(L_);
        if (pressure_solver_.info() != Eigen::Success) {
            throw NumericalError("pressure-correction matrix is singular: " + pressure_solver_.lastErrorMessage());
        }
    }

    AffineMap convection(const VectorXd& F) const {
        if (c_.convection_scheme != Scheme::linear) return convection_map(F, velocity_, c_.convection_scheme);
        VectorXd F2(2 * F.size());
        for (Eigen::Index f = 0; f < F.size(); ++f) F2[2 * f] = F2[2 * f + 1] = F[f];
        const SparseMatrix weighted = sum_ * F2.asDiagonal();
        return {SparseMatrix(weighted * interp_.matrix), weighted * interp_.offset};
    }

    /// Momentum predictor: (c/dt M + C(F) - nu A) u = M hist / dt - B(p), returns solver stats.
    std::pair<int, double> predict(double coeff, const VectorXd& hist, const VectorXd& F, const VectorXd& p,
                                   VectorXd& u, Index step) {
        const AffineMap C = convection(F);
        const double nu = c_.viscosity;
        SparseMatrix K = (coeff / c_.dt) * M_ + C.matrix - nu * A_.matrix;
        const VectorXd rhs = M_ * hist / c_.dt - C.offset + nu * A_.offset - B_(p);
        momentum_solver_.compute(K);
        if (rhs.norm() == 0.0) {
            u.setZero();
            return {0, 0.0};
        }
        const VectorXd x = momentum_solver_.solveWithGuess(rhs, u);
        const auto iters = static_cast<int>(momentum_solver_.iterations());
        if (momentum_solver_.info() != Eigen::Success) {
            throw NumericalError(fmt::format("momentum solver failed at step {} after {} iterations (residual {:.3e}, "
                                             "tolerance {:.1e})",
                                             step, iters, momentum_solver_.error(), c_.momentum_tolerance));
        }
        u = x;
        return {iters, momentum_solver_.error()};
    }

    /// One pressure correction with effective step dt_eff; updates u and p in place.
    void correct(double dt_eff, VectorXd& u, VectorXd& p, Index step) {
        VectorXd rhs = P_(u) / dt_eff;
        if (pinned_) rhs[0] = 0.0;
        const VectorXd dp = pressure_solver_.solve(rhs);
        const double scale = rhs.norm();
        const double residual = scale > 0.0 ? (L_ * dp - rhs).norm() / scale : 0.0;
        if (pressure_solver_.info() != Eigen::Success || !(residual <= c_.pressure_tolerance)) {
            throw NumericalError(fmt::format("pressure solve failed at step {} (relative residual {:.3e})", step, residual));
        }
        u -= dt_eff * (Gi_ * dp);
        p += dp;
    }

private:
    const TransientCase& c_;
    const Mesh& mesh_;
    Field velocity_;
    Field pressure_;
    SparseMatrix M_;
    AffineMap A_;
    AffineMap B_;
    AffineMap P_;
    AffineMap flux_;
    SparseMatrix sum_;
    AffineMap interp_;
    SparseMatrix Gi_;
    SparseMatrix L_;
    bool pinned_;
    Eigen::SparseLU<SparseMatrix> pressure_solver_;
    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> momentum_solver_;
};

}  // namespace

std::string_view to_string(TimeScheme scheme) {
    return scheme == TimeScheme::euler ? "euler" : "bdf2";
}

TimeScheme time_scheme_from_string(std::string_view text) {
    if (text == "euler") return TimeScheme::euler;
    if (text == "bdf2") return TimeScheme::bdf2;
    throw ConfigError(fmt::format("unknown time scheme '{}' (expected euler or bdf2)", text));
}

void TransientCase::validate() const {
    if (!mesh) throw ConfigError("transient case has no mesh");
    if (!(dt > 0.0)) throw ConfigError(fmt::format("time step must be positive, got {}", dt));
    if (!(viscosity > 0.0)) throw ConfigError(fmt::format("viscosity must be positive, got {}", viscosity));
    if (!(end_time > 0.0)) throw ConfigError(fmt::format("end time must be positive, got {}", end_time));
    if (!(snapshot_interval >= dt)) {
        throw ConfigError(fmt::format("snapshot interval {} is shorter than the time step {}", snapshot_interval, dt));
    }
    if (snapshot_start < 0.0 || snapshot_start >= end_time) {
        throw ConfigError(fmt::format("snapshot start {} must lie in [0, end time)", snapshot_start));
    }
    if (outer_iterations < 1 || correctors < 1) throw ConfigError("outer iterations and correctors must be at least 1");
    if (!(momentum_tolerance > 0.0) || !(pressure_tolerance > 0.0) || !(continuity_tolerance > 0.0)) {
        throw ConfigError("solver tolerances must be positive");
    }
    if (max_linear_iterations < 1) throw ConfigError("max linear iterations must be at least 1");
    const auto n_vec = static_cast<Eigen::Index>(2 * mesh->n_cells());
    if (initial_velocity.size() != 0 && initial_velocity.size() != n_vec) {
        throw ConfigError(fmt::format("initial velocity has {} values, expected {}", initial_velocity.size(), n_vec));
    }
    // Field construction validates the boundary conditions against the mesh.
    Field::uniform(mesh, Rank::vector, {0.0, 0.0}, velocity_bcs);
    Field::uniform(mesh, Rank::scalar, {0.0}, pressure_bcs);
    steps_for(end_time, dt, "end time");
    steps_for(snapshot_start, dt, "snapshot start");
    steps_for(snapshot_interval, dt, "snapshot interval");
    if (n_snapshots() == 0) throw ConfigError("no snapshot falls inside the simulated interval");
}

Index TransientCase::n_steps() const { return steps_for(end_time, dt, "end time"); }
Index TransientCase::steps_per_snapshot() const { return steps_for(snapshot_interval, dt, "snapshot interval"); }
Index TransientCase::first_snapshot_step() const {
    return steps_for(snapshot_start, dt, "snapshot start") + steps_per_snapshot();
}
Index TransientCase::n_snapshots() const {
    const Index first = first_snapshot_step();
    return n_steps() < first ? 0 : (n_steps() - first) / steps_per_snapshot() + 1;
}

TransientResult solve_transient(const TransientCase& c, const LogFn& log) {
    c.validate();
    const Mesh& mesh = *c.mesh;
    const auto n = static_cast<Eigen::Index>(mesh.n_cells());
    Stepper stepper(c);

    VectorXd u = c.initial_velocity.size() ? c.initial_velocity : VectorXd::Zero(2 * n);
    VectorXd u_old = u;
    VectorXd p = VectorXd::Zero(n);

    const Index n_steps = c.n_steps();
    const Index first = c.first_snapshot_step();
    const Index every = c.steps_per_snapshot();
    std::vector<Index> probe_cells;
    for (const Vec2& x : c.probes) probe_cells.push_back(nearest_cell(mesh, x));

    std::vector<SnapshotRecord> u_records;
    std::vector<SnapshotRecord> p_records;
    TransientResult result{SnapshotSet(c.mesh, Rank::vector, 0, 0, {}), SnapshotSet(c.mesh, Rank::scalar, 0, 0, {}),
                           {}, {}, {}, {}, {}};
    result.history.reserve(n_steps);
    bool warned = false;

    const auto start = std::chrono::steady_clock::now();
    for (Index step = 1; step <= n_steps; ++step) {
        const bool bdf2 = c.time_scheme == TimeScheme::bdf2 && step > 1;
        const double coeff = bdf2 ? 1.5 : 1.0;
        const VectorXd hist = bdf2 ? VectorXd(2.0 * u - 0.5 * u_old) : u;
        const double dt_eff = c.dt / coeff;

        StepRecord rec;
        rec.step = step;
        rec.t = static_cast<double>(step) * c.dt;
        const VectorXd F = stepper.flux_map()(u);
        // Second-order extrapolation of the convecting flux keeps BDF2 second order with one outer iteration.
        const VectorXd F_conv = bdf2 ? VectorXd(2.0 * F - stepper.flux_map()(u_old)) : F;
        for (Index f = 0; f < mesh.n_faces(); ++f) {
            rec.cfl = std::max(rec.cfl, std::abs(F[static_cast<Eigen::Index>(f)]) * c.dt / mesh.volume(mesh.owner()[f]));
        }
        if (rec.cfl > 1.0 && !warned && log) {
            log(fmt::format("warning: CFL number {:.3f} exceeds 1 at step {}", rec.cfl, step));
            warned = true;
        }

        VectorXd u_new = u;
        for (int outer = 0; outer < c.outer_iterations; ++outer) {
            const VectorXd flux = outer == 0 ? F_conv : stepper.flux_map()(u_new);
            const auto [iters, res] = stepper.predict(coeff, hist, flux, p, u_new, step);
            rec.momentum_iterations += iters;
            rec.momentum_residual = res;
            for (int k = 0; k < c.correctors; ++k) stepper.correct(dt_eff, u_new, p, step);
        }
        if (stepper.pinned()) p.array() -= volume_mean(mesh, p);

        if (!u_new.allFinite() || !p.allFinite()) {
            throw NumericalError(fmt::format("non-finite solution at step {} (t = {})", step, rec.t));
        }
        const double div = stepper.divergence()(u_new).cwiseAbs().maxCoeff();
        const double ref = stepper.flux_map()(u_new).cwiseAbs().maxCoeff();
        rec.continuity = ref > 0.0 ? div / ref : div;
        if (rec.continuity > c.continuity_tolerance) {
            throw NumericalError(fmt::format("continuity residual {:.3e} exceeds tolerance {:.1e} at step {}",
                                             rec.continuity, c.continuity_tolerance, step));
        }
        u_old = std::move(u);
        u = std::move(u_new);
        rec.kinetic_energy = kinetic_energy_of(mesh, u);
        result.history.push_back(rec);

        if (step >= first && (step - first) % every == 0) {
            u_records.push_back({c.viscosity, rec.t, u});
            p_records.push_back({c.viscosity, rec.t, p});
            ProbeSample sample{rec.t, {}, {}};
            for (Index cell : probe_cells) {
                const auto i = static_cast<Eigen::Index>(cell);
                sample.velocity.push_back({u[2 * i], u[2 * i + 1]});
                sample.pressure.push_back(p[i]);
            }
            result.probes.push_back(std::move(sample));
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const Index n_times = u_records.size();
    result.velocity = SnapshotSet(c.mesh, Rank::vector, 1, n_times, std::move(u_records));
    result.pressure = SnapshotSet(c.mesh, Rank::scalar, 1, n_times, std::move(p_records));
    result.timing = {c.viscosity, seconds, n_steps, static_cast<double>(n_steps) * c.dt};
    result.final_velocity = std::move(u);
    result.final_pressure = std::move(p);
    return result;
}

SweepResult run_parameter_sweep(const TransientCase& base, const std::vector<double>& viscosities, const LogFn& log) {
    if (viscosities.empty()) throw ConfigError("viscosity list is empty");
    for (double nu : viscosities) {
        if (!(nu > 0.0)) throw ConfigError(fmt::format("viscosity must be positive, got {}", nu));
    }
    std::vector<SnapshotSet> us;
    std::vector<SnapshotSet> ps;
    SweepResult out{SnapshotSet(base.mesh, Rank::vector, 0, 0, {}), SnapshotSet(base.mesh, Rank::scalar, 0, 0, {}),
                    {}, {}, {}};
    for (double nu : viscosities) {
        TransientCase c = base;
        c.viscosity = nu;
        TransientResult r = [&] {
            try {
                return solve_transient(c, log);
            } catch (const NumericalError& e) {
                throw NumericalError(fmt::format("nu = {}: {}", nu, e.what()));
            }
        }();
        us.push_back(std::move(r.velocity));
        ps.push_back(std::move(r.pressure));
        out.timings.push_back(r.timing);
        out.histories.push_back(std::move(r.history));
        out.probes.push_back(std::move(r.probes));
    }
    out.velocity = SnapshotSet::merge(us);
    out.pressure = SnapshotSet::merge(ps);
    return out;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<StepRecord>& history, double mu) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out << "mu,step,t,momentum_iterations,momentum_residual,continuity,cfl,kinetic_energy\n";
    for (const StepRecord& r : history) {
        out << fmt::format("{:.17g},{},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", mu, r.step, r.t,
                           r.momentum_iterations, r.momentum_residual, r.continuity, r.cfl, r.kinetic_energy);
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

void write_probes_csv(const std::filesystem::path& path, const std::vector<ProbeSample>& samples,
                      const std::vector<Vec2>& locations, double mu) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out << "mu,t,probe,x,y,ux,uy,p\n";
    for (const ProbeSample& s : samples) {
        for (std::size_t k = 0; k < s.velocity.size(); ++k) {
            out << fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", mu, s.t, k,
                               locations[k].x, locations[k].y, s.velocity[k].x, s.velocity[k].y, s.pressure[k]);
        }
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace romfv
