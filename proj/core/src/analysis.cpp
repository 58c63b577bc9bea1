#include "romfv/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kUndefinedNorm = 1e-14;

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(const std::string& text, std::size_t line) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError(fmt::format("'{}' is not a number", text), line);
    return value;
}

void check_aligned(const SnapshotSet& rom, const SnapshotSet& hf) {
    if (rom.rank() != hf.rank() || rom.mesh().n_cells() != hf.mesh().n_cells()) {
        throw ConfigError("compared snapshot sets differ in rank or mesh size");
    }
    if (rom.n_params() != hf.n_params() || rom.n_times() != hf.n_times()) {
        throw ConfigError(fmt::format("misaligned grids: {}x{} records against {}x{}", rom.n_params(), rom.n_times(),
                                      hf.n_params(), hf.n_times()));
    }
    for (Index i = 0; i < rom.size(); ++i) {
        if (rom[i].t != hf[i].t || rom[i].mu != hf[i].mu) {
            throw ConfigError(fmt::format("misaligned grids at record {}: (mu {}, t {}) against (mu {}, t {})", i,
                                          rom[i].mu, rom[i].t, hf[i].mu, hf[i].t));
        }
    }
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    return fmt::format("{:.17g}", value);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    const bool labelled = !table.labels.empty();
    if (labelled && table.labels.size() != table.rows.size()) throw ConfigError("CSV label column has the wrong length");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    for (const auto& c : table.comments) out << "# " << c << '\n';
    for (std::size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
    out << '\n';
    const std::size_t width = table.header.size() - (labelled ? 1 : 0);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != width) throw ConfigError(fmt::format("CSV row {} has the wrong width", i));
        if (labelled) out << table.labels[i];
        for (std::size_t j = 0; j < width; ++j) out << (j || labelled ? "," : "") << format_number(table.rows[i][j]);
        out << '\n';
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    CsvTable table;
    std::string line;
    std::size_t n = 0;
    bool labelled = false;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
            continue;
        }
        auto cells = split(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw ParseError(fmt::format("expected {} columns, found {}", table.header.size(), cells.size()), n);
        }
        if (table.rows.empty()) {
            double probe = 0.0;
            const auto& first = cells.front();
            labelled = std::from_chars(first.data(), first.data() + first.size(), probe).ec != std::errc();
        }
        std::vector<double> row;
        for (std::size_t j = labelled ? 1 : 0; j < cells.size(); ++j) row.push_back(parse_number(cells[j], n));
        if (labelled) table.labels.push_back(cells.front());
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw ParseError("missing header row", n);
    return table;
}

double ErrorSeries::time_average() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < error.size(); ++i) {
        if (defined[i]) {
            sum += error[i];
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : kNaN;
}

double ErrorSeries::max() const {
    double m = kNaN;
    for (std::size_t i = 0; i < error.size(); ++i) {
        if (defined[i] && !(error[i] <= m)) m = error[i];
    }
    return m;
}

std::vector<ErrorSeries> relative_error(const SnapshotSet& rom, const SnapshotSet& hf, const std::string& label,
                                        const std::string& field) {
    check_aligned(rom, hf);
    const Mesh& mesh = hf.mesh();
    const int comps = components(hf.rank());
    std::vector<ErrorSeries> out;
    for (Index b = 0; b < hf.n_params(); ++b) {
        ErrorSeries s{label, field, hf[b * hf.n_times()].mu, {}, {}, {}};
        for (Index k = 0; k < hf.n_times(); ++k) {
            const auto& h = hf[b * hf.n_times() + k];
            const auto& r = rom[b * hf.n_times() + k];
            const Eigen::VectorXd diff = r.values - h.values;
            const double ref = std::sqrt(inner_product(mesh, comps, h.values, h.values));
            s.t.push_back(h.t);
            s.defined.push_back(ref >= kUndefinedNorm);
            s.error.push_back(ref >= kUndefinedNorm ? std::sqrt(inner_product(mesh, comps, diff, diff)) / ref : kNaN);
        }
        out.push_back(std::move(s));
    }
    return out;
}

double kinetic_energy(const Mesh& mesh, const Eigen::VectorXd& values) {
    return 0.5 * inner_product(mesh, 2, values, values);
}

double kinetic_energy(const Field& velocity) {
    if (velocity.rank() != Rank::vector) throw ConfigError("kinetic energy needs a vector field");
    return kinetic_energy(velocity.mesh(), velocity.values());
}

double EnergySeries::max_relative_error() const {
    double m = kNaN;
    for (double e : relative_error) {
        if (!std::isnan(e) && !(e <= m)) m = e;
    }
    return m;
}

std::vector<EnergySeries> energy_series(const SnapshotSet& rom, const SnapshotSet& hf, const std::string& label) {
    check_aligned(rom, hf);
    if (hf.rank() != Rank::vector) throw ConfigError("energy series need velocity snapshots");
    std::vector<EnergySeries> out;
    for (Index b = 0; b < hf.n_params(); ++b) {
        EnergySeries s;
        s.label = label;
        s.mu = hf[b * hf.n_times()].mu;
        for (Index k = 0; k < hf.n_times(); ++k) {
            const auto i = b * hf.n_times() + k;
            const double e = kinetic_energy(rom.mesh(), rom[i].values);
            const double eh = kinetic_energy(hf.mesh(), hf[i].values);
            s.t.push_back(hf[i].t);
            s.energy.push_back(e);
            s.hf_energy.push_back(eh);
            s.relative_error.push_back(eh >= kUndefinedNorm ? std::abs(e - eh) / eh : kNaN);
        }
        out.push_back(std::move(s));
    }
    return out;
}

double median(std::vector<double> samples) {
    if (samples.empty()) throw ConfigError("median of an empty sample");
    std::sort(samples.begin(), samples.end());
    const auto n = samples.size();
    return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

std::vector<SpeedupRow> speedup_report(const TimingEntry& hf, const std::vector<TimingEntry>& roms) {
    if (!(hf.wall_seconds > 0.0) || !(hf.simulated_time > 0.0)) throw ConfigError("HF timing must be positive");
    const double hf_rate = hf.wall_seconds / hf.simulated_time;
    std::vector<SpeedupRow> out{{hf, 1.0}};
    for (const auto& r : roms) {
        if (!(r.wall_seconds > 0.0) || !(r.simulated_time > 0.0)) {
            throw ConfigError(fmt::format("timing of '{}' must be positive", r.label));
        }
        out.push_back({r, hf_rate / (r.wall_seconds / r.simulated_time)});
    }
    return out;
}

std::vector<EigenvalueRow> eigenvalue_table(const PodBasis& velocity, const PodBasis& pressure,
                                            const PodBasis& supremizer, const std::vector<double>& betas, Index rows) {
    auto cumulative = [](const PodBasis& b, Index n) {
        return n <= static_cast<Index>(b.cumulative.size()) ? b.cumulative[static_cast<Eigen::Index>(n - 1)] : kNaN;
    };
    std::vector<EigenvalueRow> out;
    for (Index n = 1; n <= rows; ++n) {
        out.push_back({n, cumulative(velocity, n), cumulative(pressure, n), cumulative(supremizer, n),
                       n <= betas.size() ? betas[n - 1] : kNaN});
    }
    return out;
}

CsvTable to_table(const std::vector<EigenvalueRow>& rows) {
    CsvTable t{{"modes", "u", "p", "s", "beta"}, {}, {}, {}};
    for (const auto& r : rows) {
        t.rows.push_back({static_cast<double>(r.n_modes), r.velocity, r.pressure, r.supremizer, r.beta});
    }
    return t;
}

CsvTable to_table(const std::vector<SpeedupRow>& rows) {
    CsvTable t{{"model", "wall_seconds", "simulated_time", "n_u", "n_p", "n_s", "speedup"}, {}, {}, {}};
    t.comments.push_back("wall clock around the time loop only; online entries are the median of repeated runs");
    for (const auto& r : rows) {
        t.labels.push_back(r.entry.label);
        t.rows.push_back({r.entry.wall_seconds, r.entry.simulated_time, static_cast<double>(r.entry.n_u),
                          static_cast<double>(r.entry.n_p), static_cast<double>(r.entry.n_s), r.speedup});
    }
    return t;
}

CsvTable to_table(const std::vector<ErrorSeries>& series) {
    CsvTable t;
    t.header.push_back("t");
    if (series.empty()) return t;
    for (const auto& s : series) {
        if (s.t != series.front().t) throw ConfigError("error series do not share a time grid");
        t.header.push_back(s.label + "_" + s.field);
    }
    t.comments.push_back(fmt::format("relative L2 error, mu = {}; nan marks an undefined entry",
                                     format_number(series.front().mu)));
    for (std::size_t k = 0; k < series.front().t.size(); ++k) {
        std::vector<double> row{series.front().t[k]};
        for (const auto& s : series) row.push_back(s.error[k]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable to_table(const EnergySeries& series) {
    CsvTable t{{"t", "energy", "hf_energy", "relative_error"}, {}, {}, {}};
    t.comments.push_back(fmt::format("{} kinetic energy, mu = {}", series.label, format_number(series.mu)));
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        t.rows.push_back({series.t[k], series.energy[k], series.hf_energy[k], series.relative_error[k]});
    }
    return t;
}

}  // namespace romfv
