#include "romfv/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "romfv/error.hpp"

namespace romfv {

namespace {

constexpr std::string_view kMagic = "ROMFV-MESH";
constexpr int kVersion = 1;

/// Line reader that skips blank lines and '#' comments and tracks line numbers.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-empty line split on whitespace; empty vector at end of input.
    std::vector<std::string_view> next() {
        while (std::getline(in_, buffer_)) {
            ++line_;
            if (auto hash = buffer_.find('#'); hash != std::string::npos) buffer_.resize(hash);
            tokens_.clear();
            std::string_view rest(buffer_);
            while (!rest.empty()) {
                const auto b = rest.find_first_not_of(" \t\r");
                if (b == std::string_view::npos) break;
                rest.remove_prefix(b);
                const auto e = rest.find_first_of(" \t\r");
                tokens_.push_back(rest.substr(0, e));
                rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
            }
            if (!tokens_.empty()) return tokens_;
        }
        ++line_;
        tokens_.clear();
        return tokens_;
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    std::string buffer_;
    std::vector<std::string_view> tokens_;
    std::size_t line_ = 0;
};

template <typename T>
T parse_number(std::string_view text, std::string_view what, std::size_t line) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(fmt::format("cannot parse {} from '{}'", what, text), line);
    }
    return value;
}

Index section_header(LineReader& reader, std::string_view name) {
    const auto tokens = reader.next();
    if (tokens.empty()) {
        throw ParseError(fmt::format("unexpected end of file: missing section {}", name), reader.line());
    }
    if (tokens[0] != name || tokens.size() != 2) {
        throw ParseError(fmt::format("expected section header '{} <count>', found '{}'", name, tokens[0]),
                         reader.line());
    }
    return parse_number<Index>(tokens[1], fmt::format("{} count", name), reader.line());
}

std::vector<std::string_view> record(LineReader& reader, std::string_view section, Index i, std::size_t width) {
    auto tokens = reader.next();
    if (tokens.empty()) {
        throw ParseError(fmt::format("unexpected end of file in section {} (record {})", section, i), reader.line());
    }
    if (tokens.size() != width) {
        throw ParseError(fmt::format("section {} record {}: expected {} fields, found {}", section, i, width,
                                     tokens.size()),
                         reader.line());
    }
    return tokens;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
    fmt::print(out, "{} {}\n", kMagic, kVersion);
    fmt::print(out, "POINTS {}\n", mesh.n_points());
    for (const auto& p : mesh.points()) fmt::print(out, "{} {}\n", p.x, p.y);
    fmt::print(out, "FACES {}\n", mesh.n_faces());
    for (const auto& f : mesh.faces()) fmt::print(out, "{} {}\n", f[0], f[1]);
    fmt::print(out, "OWNER {}\n", mesh.n_faces());
    for (Index c : mesh.owner()) fmt::print(out, "{}\n", c);
    fmt::print(out, "NEIGHBOUR {}\n", mesh.n_internal_faces());
    for (Index c : mesh.neighbour()) fmt::print(out, "{}\n", c);
    fmt::print(out, "PATCHES {}\n", mesh.patches().size());
    for (const auto& p : mesh.patches()) fmt::print(out, "{} {} {} {}\n", p.name, to_string(p.kind), p.start, p.size);
    fmt::print(out, "END\n");
}

Mesh read_mesh(std::istream& in) {
    LineReader reader(in);
    {
        const auto tokens = reader.next();
        if (tokens.size() != 2 || tokens[0] != kMagic) {
            throw ParseError(fmt::format("missing '{} {}' header", kMagic, kVersion), reader.line());
        }
        const int version = parse_number<int>(tokens[1], "format version", reader.line());
        if (version != kVersion) {
            throw ParseError(fmt::format("unsupported mesh format version {}", version), reader.line());
        }
    }

    const Index np = section_header(reader, "POINTS");
    std::vector<Vec2> points(np);
    for (Index i = 0; i < np; ++i) {
        const auto t = record(reader, "POINTS", i, 2);
        points[i] = {parse_number<double>(t[0], "x coordinate", reader.line()),
                     parse_number<double>(t[1], "y coordinate", reader.line())};
    }

    const Index nf = section_header(reader, "FACES");
    std::vector<std::array<Index, 2>> faces(nf);
    for (Index i = 0; i < nf; ++i) {
        const auto t = record(reader, "FACES", i, 2);
        faces[i] = {parse_number<Index>(t[0], "point index", reader.line()),
                    parse_number<Index>(t[1], "point index", reader.line())};
    }

    const Index no = section_header(reader, "OWNER");
    if (no != nf) throw ParseError(fmt::format("OWNER count {} differs from FACES count {}", no, nf), reader.line());
    std::vector<Index> owner(no);
    for (Index i = 0; i < no; ++i) owner[i] = parse_number<Index>(record(reader, "OWNER", i, 1)[0], "cell index", reader.line());

    const Index nn = section_header(reader, "NEIGHBOUR");
    if (nn > nf) throw ParseError(fmt::format("NEIGHBOUR count {} exceeds FACES count {}", nn, nf), reader.line());
    std::vector<Index> neighbour(nn);
    for (Index i = 0; i < nn; ++i) {
        neighbour[i] = parse_number<Index>(record(reader, "NEIGHBOUR", i, 1)[0], "cell index", reader.line());
    }

    const Index npatch = section_header(reader, "PATCHES");
    std::vector<Patch> patches(npatch);
    for (Index i = 0; i < npatch; ++i) {
        const auto t = record(reader, "PATCHES", i, 4);
        const std::size_t line = reader.line();
        PatchKind kind{};
        try {
            kind = patch_kind_from_string(t[1]);
        } catch (const MeshError& e) {
            throw ParseError(e.what(), line);
        }
        patches[i] = {std::string(t[0]), kind, parse_number<Index>(t[2], "patch start", line),
                      parse_number<Index>(t[3], "patch size", line)};
    }

    const auto tail = reader.next();
    if (tail.empty()) throw ParseError("unexpected end of file: missing END", reader.line());
    if (tail.size() != 1 || tail[0] != "END") {
        throw ParseError(fmt::format("expected END, found '{}'", tail[0]), reader.line());
    }
    return Mesh(std::move(points), std::move(faces), std::move(owner), std::move(neighbour), std::move(patches));
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    write_mesh(out, mesh);
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open mesh file '{}'", path.string()));
    return read_mesh(in);
}

std::vector<std::vector<Index>> cell_polygons(const Mesh& mesh) {
    std::vector<std::vector<Index>> polys(mesh.n_cells());
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        // S_f = (dy, -dx) lies right of p0->p1, so faces run counter-clockwise around
        // their owner and must be reversed for the neighbour.
        std::vector<std::array<Index, 2>> edges;
        for (Index f : mesh.cell_faces(c)) {
            const auto& e = mesh.faces()[f];
            edges.push_back(mesh.owner()[f] == c ? e : std::array<Index, 2>{e[1], e[0]});
        }
        auto& poly = polys[c];
        poly.push_back(edges[0][0]);
        Index current = edges[0][1];
        std::vector<bool> used(edges.size(), false);
        used[0] = true;
        for (Index k = 1; k < edges.size(); ++k) {
            poly.push_back(current);
            bool found = false;
            for (Index j = 0; j < edges.size() && !found; ++j) {
                if (!used[j] && edges[j][0] == current) {
                    used[j] = true;
                    current = edges[j][1];
                    found = true;
                }
            }
            if (!found) throw MeshError(fmt::format("faces of cell {} do not form a closed loop", c));
        }
    }
    return polys;
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<std::pair<std::string, const Field*>>& fields) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    const auto polys = cell_polygons(mesh);
    Index total = 0;
    for (const auto& p : polys) total += p.size() + 1;

    fmt::print(out, "# vtk DataFile Version 3.0\nromfv\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    fmt::print(out, "POINTS {} double\n", mesh.n_points());
    for (const auto& p : mesh.points()) fmt::print(out, "{} {} 0\n", p.x, p.y);
    fmt::print(out, "CELLS {} {}\n", polys.size(), total);
    for (const auto& p : polys) {
        fmt::print(out, "{}", p.size());
        for (Index i : p) fmt::print(out, " {}", i);
        fmt::print(out, "\n");
    }
    fmt::print(out, "CELL_TYPES {}\n", polys.size());
    for (Index c = 0; c < polys.size(); ++c) fmt::print(out, "7\n");
    if (!fields.empty()) fmt::print(out, "CELL_DATA {}\n", mesh.n_cells());
    for (const auto& [name, field] : fields) {
        if (&field->mesh() != &mesh && !(field->mesh() == mesh)) {
            throw ConfigError(fmt::format("field '{}' lives on a different mesh", name));
        }
        if (field->rank() == Rank::scalar) {
            fmt::print(out, "SCALARS {} double 1\nLOOKUP_TABLE default\n", name);
            for (Index c = 0; c < mesh.n_cells(); ++c) fmt::print(out, "{}\n", field->scalar(c));
        } else {
            fmt::print(out, "VECTORS {} double\n", name);
            for (Index c = 0; c < mesh.n_cells(); ++c) {
                const Vec2 v = field->vector(c);
                fmt::print(out, "{} {} 0\n", v.x, v.y);
            }
        }
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace romfv
