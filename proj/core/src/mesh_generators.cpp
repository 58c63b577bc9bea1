#include "romfv/mesh_generators.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

#include <fmt/format.h>

#include "romfv/error.hpp"

namespace romfv {

namespace {

struct EdgeHash {
    std::size_t operator()(const std::pair<Index, Index>& e) const noexcept {
        return std::hash<Index>{}(e.first) * 1000003u ^ std::hash<Index>{}(e.second);
    }
};

}  // namespace

Mesh mesh_from_cells(std::vector<Vec2> points,
                     const std::vector<std::vector<Index>>& cells,
                     const std::vector<std::pair<std::string, PatchKind>>& patches,
                     const std::function<std::string(const Vec2&)>& classify) {
    struct EdgeRecord {
        std::array<Index, 2> pts;
        Index owner;
        Index neighbour;
        bool has_neighbour;
    };
    std::vector<EdgeRecord> edges;
    std::unordered_map<std::pair<Index, Index>, Index, EdgeHash> lookup;
    for (Index c = 0; c < cells.size(); ++c) {
        const auto& poly = cells[c];
        for (Index k = 0; k < poly.size(); ++k) {
            const Index a = poly[k];
            const Index b = poly[(k + 1) % poly.size()];
            const auto key = std::minmax(a, b);
            auto it = lookup.find({key.first, key.second});
            if (it == lookup.end()) {
                lookup.emplace(std::pair{key.first, key.second}, edges.size());
                edges.push_back({{a, b}, c, 0, false});
            } else {
                auto& e = edges[it->second];
                if (e.has_neighbour) {
                    throw MeshError(fmt::format("edge ({}, {}) is shared by more than two cells", a, b));
                }
                e.neighbour = c;
                e.has_neighbour = true;
            }
        }
    }

    std::vector<std::array<Index, 2>> faces;
    std::vector<Index> owner;
    std::vector<Index> neighbour;
    for (const auto& e : edges) {
        if (!e.has_neighbour) continue;
        faces.push_back(e.pts);
        owner.push_back(e.owner);
        neighbour.push_back(e.neighbour);
    }

    std::vector<std::vector<Index>> by_patch(patches.size());
    for (Index i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (e.has_neighbour) continue;
        const Vec2 centre = 0.5 * (points[e.pts[0]] + points[e.pts[1]]);
        const std::string name = classify(centre);
        Index slot = patches.size();
        for (Index p = 0; p < patches.size(); ++p) {
            if (patches[p].first == name) slot = p;
        }
        if (slot == patches.size()) {
            throw MeshError(fmt::format("boundary face at ({}, {}) classified into unknown patch '{}'",
                                        centre.x, centre.y, name));
        }
        by_patch[slot].push_back(i);
    }

    std::vector<Patch> patch_list;
    for (Index p = 0; p < patches.size(); ++p) {
        Patch patch{patches[p].first, patches[p].second, faces.size(), by_patch[p].size()};
        for (Index i : by_patch[p]) {
            faces.push_back(edges[i].pts);
            owner.push_back(edges[i].owner);
        }
        if (patch.size > 0) patch_list.push_back(std::move(patch));
    }
    return Mesh(std::move(points), std::move(faces), std::move(owner), std::move(neighbour),
                std::move(patch_list));
}

Mesh generate_cavity_mesh(int n_per_side, double side_length) {
    if (n_per_side < 2) {
        throw ConfigError(fmt::format("cavity mesh needs at least 2 cells per side, got {}", n_per_side));
    }
    if (!(side_length > 0.0)) {
        throw ConfigError(fmt::format("cavity side length must be positive, got {}", side_length));
    }
    const auto n = static_cast<Index>(n_per_side);
    const double h = side_length / static_cast<double>(n);
    std::vector<Vec2> points;
    points.reserve((n + 1) * (n + 1));
    for (Index j = 0; j <= n; ++j) {
        for (Index i = 0; i <= n; ++i) {
            // Exact end coordinates so lid faces sit on y = L.
            const double x = i == n ? side_length : static_cast<double>(i) * h;
            const double y = j == n ? side_length : static_cast<double>(j) * h;
            points.push_back({x, y});
        }
    }
    auto pid = [n](Index i, Index j) { return j * (n + 1) + i; };
    std::vector<std::vector<Index>> cells;
    cells.reserve(n * n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            cells.push_back({pid(i, j), pid(i + 1, j), pid(i + 1, j + 1), pid(i, j + 1)});
        }
    }
    const double top = side_length * (1.0 - 1e-9);
    return mesh_from_cells(std::move(points), cells,
                           {{"lid", PatchKind::wall}, {"walls", PatchKind::wall}},
                           [top](const Vec2& c) { return c.y > top ? std::string("lid") : std::string("walls"); });
}

namespace {

/// Coordinates from `start` moving by `direction` with n geometric cells totalling `length`.
std::vector<double> graded_coordinates(double start, double length, int n, double growth, int direction) {
    std::vector<double> x(static_cast<Index>(n) + 1);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::pow(growth, i);
    const double h0 = length / sum;
    x[0] = start;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += h0 * std::pow(growth, i);
        x[static_cast<Index>(i) + 1] = start + direction * acc;
    }
    x.back() = start + direction * length;
    return x;
}

}  // namespace

Mesh generate_cylinder_mesh(const CylinderMeshSpec& spec) {
    const double r = spec.cylinder_radius;
    const double a = spec.block_half_width;
    if (spec.radial_cells < 1 || spec.upstream_cells < 1 || spec.downstream_cells < 1 || spec.side_cells < 1) {
        throw ConfigError("cylinder mesh cell counts must be positive");
    }
    if (spec.azimuthal_cells < 8 || spec.azimuthal_cells % 4 != 0) {
        throw ConfigError(fmt::format("azimuthal_cells must be a multiple of 4 and at least 8, got {}",
                                      spec.azimuthal_cells));
    }
    if (!(r > 0.0)) throw ConfigError("cylinder radius must be positive");
    if (!(a > r)) {
        throw ConfigError(fmt::format("degenerate cylinder geometry: block half-width {} must exceed radius {}", a, r));
    }
    if (!(spec.x_min < -a && spec.x_max > a && spec.y_min < -a && spec.y_max > a)) {
        throw ConfigError("channel rectangle must strictly contain the O-grid block");
    }
    if (!(spec.radial_growth > 0.0) || !(spec.far_growth > 0.0)) {
        throw ConfigError("growth ratios must be positive");
    }

    const int m = spec.azimuthal_cells / 4;
    const int nr = spec.radial_cells;
    const auto nt = static_cast<Index>(spec.azimuthal_cells);

    // Tangent-spaced side parameter in [-1, 1], exactly antisymmetric.
    std::vector<double> t(static_cast<Index>(m) + 1);
    for (int k = 0; k <= m; ++k) {
        if (2 * k < m) {
            t[static_cast<Index>(k)] = std::tan(-std::numbers::pi / 4.0 + k * std::numbers::pi / (2.0 * m));
        } else if (2 * k == m) {
            t[static_cast<Index>(k)] = 0.0;
        }
    }
    t.front() = -1.0;
    for (int k = 0; 2 * k < m; ++k) t[static_cast<Index>(m - k)] = -t[static_cast<Index>(k)];
    std::vector<double> side(t.size());
    for (Index k = 0; k < t.size(); ++k) side[k] = a * t[k];

    std::vector<Vec2> points;
    std::map<std::pair<double, double>, Index> point_id;
    auto add_point = [&](Vec2 p) {
        auto [it, inserted] = point_id.emplace(std::pair{p.x, p.y}, points.size());
        if (inserted) points.push_back(p);
        return it->second;
    };

    // O-block: outer ring on the square, counter-clockwise from the corner (a, -a).
    std::vector<Vec2> square(nt);
    for (Index k = 0; k < static_cast<Index>(m); ++k) {
        square[k] = {a, side[k]};
        square[k + m] = {side[m - k], a};
        square[k + 2 * m] = {-a, side[m - k]};
        square[k + 3 * m] = {side[k], -a};
    }
    std::vector<double> frac(static_cast<Index>(nr) + 1);
    for (int i = 0; i <= nr; ++i) {
        frac[static_cast<Index>(i)] = std::abs(spec.radial_growth - 1.0) < 1e-12
                                          ? static_cast<double>(i) / nr
                                          : (std::pow(spec.radial_growth, i) - 1.0) /
                                                (std::pow(spec.radial_growth, nr) - 1.0);
    }
    std::vector<std::vector<Index>> ring(static_cast<Index>(nr) + 1, std::vector<Index>(nt));
    for (Index j = 0; j < nt; ++j) {
        const double theta = -std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * static_cast<double>(j) / nt;
        const Vec2 inner{r * std::cos(theta), r * std::sin(theta)};
        for (int i = 0; i <= nr; ++i) {
            const Vec2 p = i == nr ? square[j] : inner + frac[static_cast<Index>(i)] * (square[j] - inner);
            ring[static_cast<Index>(i)][j] = add_point(p);
        }
    }
    std::vector<std::vector<Index>> cells;
    for (int i = 0; i < nr; ++i) {
        for (Index j = 0; j < nt; ++j) {
            const Index jn = (j + 1) % nt;
            const auto& lo = ring[static_cast<Index>(i)];
            const auto& hi = ring[static_cast<Index>(i) + 1];
            cells.push_back({lo[j], hi[j], hi[jn], lo[jn]});
        }
    }

    // Cartesian blocks around the square.
    std::vector<double> xs = graded_coordinates(-a, -a - spec.x_min, spec.upstream_cells, spec.far_growth, -1);
    std::reverse(xs.begin(), xs.end());
    xs.pop_back();
    xs.insert(xs.end(), side.begin(), side.end());
    {
        auto down = graded_coordinates(a, spec.x_max - a, spec.downstream_cells, spec.far_growth, 1);
        xs.insert(xs.end(), down.begin() + 1, down.end());
    }
    std::vector<double> ys = graded_coordinates(-a, -a - spec.y_min, spec.side_cells, spec.far_growth, -1);
    std::reverse(ys.begin(), ys.end());
    ys.pop_back();
    ys.insert(ys.end(), side.begin(), side.end());
    {
        auto up = graded_coordinates(a, spec.y_max - a, spec.side_cells, spec.far_growth, 1);
        ys.insert(ys.end(), up.begin() + 1, up.end());
    }
    const Index i0 = static_cast<Index>(spec.upstream_cells);
    const Index j0 = static_cast<Index>(spec.side_cells);
    const auto ms = static_cast<Index>(m);
    for (Index j = 0; j + 1 < ys.size(); ++j) {
        for (Index i = 0; i + 1 < xs.size(); ++i) {
            const bool inside_block = i >= i0 && i < i0 + ms && j >= j0 && j < j0 + ms;
            if (inside_block) continue;
            cells.push_back({add_point({xs[i], ys[j]}), add_point({xs[i + 1], ys[j]}),
                             add_point({xs[i + 1], ys[j + 1]}), add_point({xs[i], ys[j + 1]})});
        }
    }

    const double cut = 0.5 * (r + a);
    const double tol = 1e-9 * (spec.x_max - spec.x_min);
    const double xlo = spec.x_min;
    const double xhi = spec.x_max;
    return mesh_from_cells(std::move(points), cells,
                           {{"inlet", PatchKind::inlet},
                            {"outlet", PatchKind::outlet},
                            {"cylinder", PatchKind::wall},
                            {"top_bottom", PatchKind::symmetry}},
                           [=](const Vec2& c) {
                               if (norm(c) < cut) return std::string("cylinder");
                               if (std::abs(c.x - xlo) < tol) return std::string("inlet");
                               if (std::abs(c.x - xhi) < tol) return std::string("outlet");
                               return std::string("top_bottom");
                           });
}

}  // namespace romfv
