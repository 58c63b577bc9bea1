#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "romfv/pod_basis.hpp"
#include "romfv/snapshot.hpp"

namespace romfv {

/// Numeric CSV payload with an optional leading text column (used when `labels` is non-empty).
/// Lines starting with '#' are comments and are not part of the payload.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;
};

/// 17 significant digits, "nan" for undefined values.
std::string format_number(double value);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Relative L2 error over time for one field of one parameter value.
struct ErrorSeries {
    std::string label;  // model: none, sup, ppe, hf
    std::string field;
    double mu = 0.0;
    std::vector<double> t;
    std::vector<double> error;  // NaN where undefined
    std::vector<bool> defined;  // false where the reference norm is below 1e-14

    /// Mean over the defined entries.
    double time_average() const;
    double max() const;
};

/// ||rom - hf|| / ||hf|| per record in the volume-weighted L2 norm, one series per
/// parameter block. Both sets must share mesh size, rank and the exact (mu, t) grid.
std::vector<ErrorSeries> relative_error(const SnapshotSet& rom, const SnapshotSet& hf, const std::string& label,
                                        const std::string& field);

/// 1/2 sum_e V_e |u_e|^2.
double kinetic_energy(const Field& velocity);
double kinetic_energy(const Mesh& mesh, const Eigen::VectorXd& values);

struct EnergySeries {
    std::string label;
    double mu = 0.0;
    std::vector<double> t;
    std::vector<double> energy;
    std::vector<double> hf_energy;
    std::vector<double> relative_error;  // |E - E_hf| / E_hf, NaN where E_hf is below 1e-14

    double max_relative_error() const;
};

std::vector<EnergySeries> energy_series(const SnapshotSet& rom, const SnapshotSet& hf, const std::string& label);

/// Median of repeated wall-clock measurements.
double median(std::vector<double> samples);

struct TimingEntry {
    std::string label;
    double wall_seconds = 0.0;
    double simulated_time = 0.0;
    Index n_u = 0, n_p = 0, n_s = 0;
};

struct SpeedupRow {
    TimingEntry entry;
    double speedup = 1.0;  // (hf seconds per simulated second) / (own seconds per simulated second)
};

std::vector<SpeedupRow> speedup_report(const TimingEntry& hf, const std::vector<TimingEntry>& roms);

struct EigenvalueRow {
    Index n_modes = 0;
    double velocity = 0.0, pressure = 0.0, supremizer = 0.0, beta = 0.0;
};

/// Cumulative energies of the three spectra and the inf-sup constant with n supremizers,
/// for n = 1 .. rows. Missing entries (short spectra or beta lists) are NaN.
std::vector<EigenvalueRow> eigenvalue_table(const PodBasis& velocity, const PodBasis& pressure,
                                            const PodBasis& supremizer, const std::vector<double>& betas, Index rows);

CsvTable to_table(const std::vector<EigenvalueRow>& rows);
CsvTable to_table(const std::vector<SpeedupRow>& rows);
/// Column t plus one "<label>_<field>" error column per series; all series must share the grid.
CsvTable to_table(const std::vector<ErrorSeries>& series);
CsvTable to_table(const EnergySeries& series);

}  // namespace romfv
