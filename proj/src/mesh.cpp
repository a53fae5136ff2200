#include "unitcell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace unitcell {

namespace {

const std::pair<const char*, BoundaryTag> kTagNames[] = {
    {"none", BoundaryTag::none},         {"x_min", BoundaryTag::x_min},
    {"x_max", BoundaryTag::x_max},       {"y_min", BoundaryTag::y_min},
    {"y_max", BoundaryTag::y_max},       {"z_top", BoundaryTag::z_top},
    {"z_bottom", BoundaryTag::z_bottom}, {"electrode", BoundaryTag::electrode},
    {"pml_outer", BoundaryTag::pml_outer},
};

// 2D local faces: {v0,v1}, {v1,v2}, {v2,v0}; matches the reference
// triangle edges s=-1, r+s=0, r=-1 with vertices at (-1,-1),(1,-1),(-1,1).
constexpr int kTriFace[3][2] = {{0, 1}, {1, 2}, {2, 0}};

std::vector<double> axis_breaks(double lo, double hi, double h,
                                const std::vector<StructuredMeshSpec::Layer>& layers) {
    std::vector<double> breaks{lo};
    if (layers.empty()) {
        const int n = std::max(1, int(std::ceil((hi - lo) / h - 1e-12)));
        for (int i = 1; i <= n; ++i) breaks.push_back(lo + (hi - lo) * i / double(n));
        return breaks;
    }
    double pos = lo;
    for (const auto& layer : layers) {
        if (layer.thickness <= 0.0)
            throw std::invalid_argument("build_mesh: non-positive layer thickness");
        const int n = std::max(1, int(std::ceil(layer.thickness / h - 1e-12)));
        for (int i = 1; i <= n; ++i) breaks.push_back(pos + layer.thickness * i / double(n));
        pos += layer.thickness;
    }
    if (std::fabs(pos - hi) > 1e-9 * std::max(1.0, std::fabs(hi - lo)))
        throw std::invalid_argument("build_mesh: layer thicknesses do not sum to the extent");
    breaks.back() = hi;
    return breaks;
}

int region_at(double pos, double lo, const std::vector<StructuredMeshSpec::Layer>& layers) {
    if (layers.empty()) return 0;
    double acc = lo;
    for (const auto& layer : layers) {
        acc += layer.thickness;
        if (pos < acc) return layer.region;
    }
    return layers.back().region;
}

void build_adjacency(Mesh& mesh) {
    mesh.faces.assign(mesh.n_elements(), {});
    std::map<std::pair<int, int>, FaceRef> open;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int f = 0; f < mesh.faces_per_elem(); ++f) {
            auto fv = mesh.face_vertices(e, f);
            std::pair<int, int> key =
                mesh.dim == 1 ? std::make_pair(fv[0], -1)
                              : std::make_pair(std::min(fv[0], fv[1]), std::max(fv[0], fv[1]));
            auto it = open.find(key);
            if (it == open.end()) {
                open[key] = {e, f};
            } else {
                const FaceRef other = it->second;
                mesh.faces[e][f] = {other.elem, other.face, BoundaryTag::none};
                mesh.faces[other.elem][other.face] = {e, f, BoundaryTag::none};
                open.erase(it);
            }
        }
    }
    // whatever stayed unmatched is a boundary face; tag by coordinates
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& v : mesh.vertices) {
        xlo = std::min(xlo, v[0]);
        xhi = std::max(xhi, v[0]);
        ylo = std::min(ylo, v[1]);
        yhi = std::max(yhi, v[1]);
    }
    const double tol = 1e-9 * std::max({1.0, xhi - xlo, yhi - ylo});
    for (auto& [key, fr] : open) {
        auto c = mesh.face_centroid(fr.elem, fr.face);
        BoundaryTag tag = BoundaryTag::none;
        if (std::fabs(c[0] - xlo) < tol) tag = BoundaryTag::x_min;
        else if (std::fabs(c[0] - xhi) < tol) tag = BoundaryTag::x_max;
        else if (mesh.dim == 2 && std::fabs(c[1] - ylo) < tol) tag = BoundaryTag::y_min;
        else if (mesh.dim == 2 && std::fabs(c[1] - yhi) < tol) tag = BoundaryTag::y_max;
        mesh.faces[fr.elem][fr.face] = {-1, -1, tag};
    }
}

} // namespace

const char* to_string(BoundaryTag tag) {
    for (const auto& [name, t] : kTagNames)
        if (t == tag) return name;
    return "?";
}

std::optional<BoundaryTag> boundary_tag_from_string(const std::string& s) {
    for (const auto& [name, t] : kTagNames)
        if (s == name) return t;
    return std::nullopt;
}

std::array<int, 2> Mesh::face_vertices(int e, int f) const {
    if (dim == 1) return {elements[e][f], -1};
    return {elements[e][kTriFace[f][0]], elements[e][kTriFace[f][1]]};
}

double Mesh::signed_volume(int e) const {
    const auto& el = elements[e];
    if (dim == 1) return vertices[el[1]][0] - vertices[el[0]][0];
    const auto& a = vertices[el[0]];
    const auto& b = vertices[el[1]];
    const auto& c = vertices[el[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::array<double, 2> Mesh::centroid(int e) const {
    std::array<double, 2> c{0.0, 0.0};
    const int nv = dim + 1;
    for (int i = 0; i < nv; ++i) {
        c[0] += vertices[elements[e][i]][0] / nv;
        c[1] += vertices[elements[e][i]][1] / nv;
    }
    return c;
}

std::array<double, 2> Mesh::face_centroid(int e, int f) const {
    auto fv = face_vertices(e, f);
    if (dim == 1) return vertices[fv[0]];
    return {0.5 * (vertices[fv[0]][0] + vertices[fv[1]][0]),
            0.5 * (vertices[fv[0]][1] + vertices[fv[1]][1])};
}

double Mesh::min_edge_length() const {
    double m = 1e300;
    for (int e = 0; e < n_elements(); ++e) {
        if (dim == 1) {
            m = std::min(m, std::fabs(signed_volume(e)));
        } else {
            for (int f = 0; f < 3; ++f) {
                auto fv = face_vertices(e, f);
                const double dx = vertices[fv[1]][0] - vertices[fv[0]][0];
                const double dy = vertices[fv[1]][1] - vertices[fv[0]][1];
                m = std::min(m, std::hypot(dx, dy));
            }
        }
    }
    return m;
}

double Mesh::total_volume() const {
    double v = 0.0;
    for (int e = 0; e < n_elements(); ++e) v += signed_volume(e);
    return v;
}

Mesh build_mesh(const StructuredMeshSpec& spec) {
    if (spec.h <= 0.0) throw std::invalid_argument("build_mesh: non-positive edge length");
    if (spec.x1 <= spec.x0 || (spec.dim == 2 && spec.y1 <= spec.y0))
        throw std::invalid_argument("build_mesh: degenerate geometry");

    Mesh mesh;
    mesh.dim = spec.dim;

    if (spec.dim == 1) {
        auto xs = axis_breaks(spec.x0, spec.x1, spec.h, spec.layers);
        for (double x : xs) mesh.vertices.push_back({x, 0.0});
        for (size_t i = 0; i + 1 < xs.size(); ++i) {
            mesh.elements.push_back({int(i), int(i + 1), -1});
            mesh.region.push_back(region_at(0.5 * (xs[i] + xs[i + 1]), spec.x0, spec.layers));
        }
    } else if (spec.dim == 2) {
        auto xs = axis_breaks(spec.x0, spec.x1, spec.h, {});
        auto ys = axis_breaks(spec.y0, spec.y1, spec.h, spec.layers);
        const int nx = int(xs.size()), ny = int(ys.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) mesh.vertices.push_back({xs[i], ys[j]});
        auto vid = [&](int i, int j) { return j * nx + i; };
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                const int reg = region_at(0.5 * (ys[j] + ys[j + 1]), spec.y0, spec.layers);
                // split each cell along the same diagonal so opposing
                // periodic surfaces stay congruent
                mesh.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
                mesh.region.push_back(reg);
                mesh.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
                mesh.region.push_back(reg);
            }
    } else {
        throw std::invalid_argument("build_mesh: dim must be 1 or 2");
    }

    build_adjacency(mesh);
    check_mesh(mesh);
    return mesh;
}

void retag_boundary(Mesh& mesh, BoundaryTag from, BoundaryTag to) {
    for (auto& ff : mesh.faces)
        for (auto& fe : ff)
            if (fe.is_boundary() && fe.tag == from) fe.tag = to;
}

void check_mesh(const Mesh& mesh) {
    if (mesh.dim != 1 && mesh.dim != 2) throw std::runtime_error("mesh: bad dimension");
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (mesh.signed_volume(e) <= 0.0)
            throw std::runtime_error("mesh: non-positive element volume at element " +
                                     std::to_string(e));
        for (int f = 0; f < mesh.faces_per_elem(); ++f) {
            const auto& fe = mesh.faces[e][f];
            if (fe.is_boundary()) {
                if (fe.tag == BoundaryTag::none)
                    throw std::runtime_error("mesh: untagged boundary face on element " +
                                             std::to_string(e));
            } else {
                const auto& back = mesh.faces[fe.neighbor][fe.neighbor_face];
                if (back.neighbor != e || back.neighbor_face != f)
                    throw std::runtime_error("mesh: inconsistent face adjacency at element " +
                                             std::to_string(e));
            }
        }
    }
}

Mesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_mesh: cannot open " + path);
    std::string magic;
    int dim = 0, nv = 0, ne = 0;
    in >> magic >> dim >> nv >> ne;
    if (magic != "dgmesh" || !in) throw std::runtime_error("read_mesh: malformed header in " + path);
    Mesh mesh;
    mesh.dim = dim;
    mesh.vertices.resize(nv);
    for (int i = 0; i < nv; ++i) {
        in >> mesh.vertices[i][0];
        if (dim == 2) in >> mesh.vertices[i][1];
        else mesh.vertices[i][1] = 0.0;
    }
    mesh.elements.resize(ne);
    mesh.region.resize(ne);
    for (int e = 0; e < ne; ++e) {
        mesh.elements[e] = {-1, -1, -1};
        for (int i = 0; i <= dim; ++i) in >> mesh.elements[e][i];
        in >> mesh.region[e];
    }
    if (!in) throw std::runtime_error("read_mesh: malformed body in " + path);
    build_adjacency(mesh);
    std::string kw;
    while (in >> kw) {
        if (kw != "face") throw std::runtime_error("read_mesh: unexpected token " + kw);
        int e, f;
        std::string tag;
        in >> e >> f >> tag;
        auto t = boundary_tag_from_string(tag);
        if (!t) throw std::runtime_error("read_mesh: unknown boundary tag " + tag);
        if (e < 0 || e >= ne || f < 0 || f > dim || !mesh.faces[e][f].is_boundary())
            throw std::runtime_error("read_mesh: face line does not name a boundary face");
        mesh.faces[e][f].tag = *t;
    }
    check_mesh(mesh);
    return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_mesh: cannot open " + path);
    out.precision(17);
    out << "dgmesh " << mesh.dim << " " << mesh.n_vertices() << " " << mesh.n_elements() << "\n";
    for (const auto& v : mesh.vertices) {
        out << v[0];
        if (mesh.dim == 2) out << " " << v[1];
        out << "\n";
    }
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int i = 0; i <= mesh.dim; ++i) out << mesh.elements[e][i] << " ";
        out << mesh.region[e] << "\n";
    }
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int f = 0; f < mesh.faces_per_elem(); ++f)
            if (mesh.faces[e][f].is_boundary())
                out << "face " << e << " " << f << " " << to_string(mesh.faces[e][f].tag) << "\n";
}

FacePairing pair_periodic_faces(const Mesh& mesh, Axis axis) {
    const int ax = int(axis);
    const BoundaryTag lo_tag = axis == Axis::x ? BoundaryTag::x_min : BoundaryTag::y_min;
    const BoundaryTag hi_tag = axis == Axis::x ? BoundaryTag::x_max : BoundaryTag::y_max;

    std::vector<FaceRef> lo, hi;
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int f = 0; f < mesh.faces_per_elem(); ++f) {
            const auto& fe = mesh.faces[e][f];
            if (!fe.is_boundary()) continue;
            if (fe.tag == lo_tag) lo.push_back({e, f});
            if (fe.tag == hi_tag) hi.push_back({e, f});
        }
    if (lo.empty() || lo.size() != hi.size())
        throw std::runtime_error("pair_periodic_faces: surface face counts differ (" +
                                 std::to_string(lo.size()) + " vs " + std::to_string(hi.size()) +
                                 ")");

    double lo_pos = 1e300, hi_pos = -1e300;
    for (const auto& v : mesh.vertices) {
        lo_pos = std::min(lo_pos, v[ax]);
        hi_pos = std::max(hi_pos, v[ax]);
    }
    const double shift = hi_pos - lo_pos;
    const double scale = std::max({1.0, std::fabs(hi_pos), std::fabs(lo_pos)});
    const double tol = 1e-12 * scale * 100.0;

    FacePairing pairing;
    pairing.axis = axis;
    pairing.shift = shift;

    std::vector<bool> used(hi.size(), false);
    for (const auto& lf : lo) {
        auto lc = mesh.face_centroid(lf.elem, lf.face);
        lc[ax] += shift;
        int match = -1;
        for (size_t j = 0; j < hi.size(); ++j) {
            if (used[j]) continue;
            auto hc = mesh.face_centroid(hi[j].elem, hi[j].face);
            if (std::fabs(hc[0] - lc[0]) < tol && std::fabs(hc[1] - lc[1]) < tol) {
                match = int(j);
                break;
            }
        }
        if (match < 0) {
            auto c = mesh.face_centroid(lf.elem, lf.face);
            throw std::runtime_error(
                "pair_periodic_faces: no congruent partner for boundary face of element " +
                std::to_string(lf.elem) + " at (" + std::to_string(c[0]) + ", " +
                std::to_string(c[1]) + ")");
        }
        // verify vertex congruence, not just the centroid
        auto lv = mesh.face_vertices(lf.elem, lf.face);
        auto hv = mesh.face_vertices(hi[match].elem, hi[match].face);
        const int nfv = mesh.dim; // 1 vertex in 1D, 2 in 2D
        for (int i = 0; i < nfv; ++i) {
            auto p = mesh.vertices[lv[i]];
            p[ax] += shift;
            bool found = false;
            for (int j = 0; j < nfv; ++j) {
                const auto& q = mesh.vertices[hv[j]];
                if (std::fabs(p[0] - q[0]) < tol && std::fabs(p[1] - q[1]) < tol) found = true;
            }
            if (!found)
                throw std::runtime_error(
                    "pair_periodic_faces: vertex " + std::to_string(lv[i]) +
                    " has no translated counterpart on the opposing surface");
        }
        used[match] = true;
        pairing.pairs.push_back({lf, hi[match]});
    }
    return pairing;
}

} // namespace unitcell
