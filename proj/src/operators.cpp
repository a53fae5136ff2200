#include "unitcell/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace unitcell {

void Operators::phys_deriv(int e, int c, const double* u, double* du) const {
    const int np = ref.n_nodes;
    const auto& g = geom[e];
    if (mesh->dim == 1) {
        const double rx = g.drdx[0][0];
        const Dense& dr = ref.diff[0];
        for (int i = 0; i < np; ++i) {
            double s = 0.0;
            for (int j = 0; j < np; ++j) s += dr(i, j) * u[j];
            du[i] = rx * s;
        }
        return;
    }
    const double rc = g.drdx[0][c];
    const double sc = g.drdx[1][c];
    const Dense& dr = ref.diff[0];
    const Dense& ds = ref.diff[1];
    for (int i = 0; i < np; ++i) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < np; ++j) {
            a += dr(i, j) * u[j];
            b += ds(i, j) * u[j];
        }
        du[i] = rc * a + sc * b;
    }
}

Operators build_operators(const Mesh& mesh, const RefElement& ref) {
    if (mesh.dim != ref.dim) throw std::invalid_argument("build_operators: dimension mismatch");
    Operators ops;
    ops.mesh = &mesh;
    ops.ref = ref;
    const int np = ref.n_nodes;
    const int ne = mesh.n_elements();
    ops.geom.resize(ne);
    ops.x.resize(size_t(ne) * np);
    ops.y.assign(size_t(ne) * np, 0.0);

    double min_h = 1e300;
    for (int e = 0; e < ne; ++e) {
        ElemGeom& g = ops.geom[e];
        if (mesh.dim == 1) {
            const double xa = mesh.vertices[mesh.elements[e][0]][0];
            const double xb = mesh.vertices[mesh.elements[e][1]][0];
            const double j = 0.5 * (xb - xa);
            if (j <= 0.0) throw std::runtime_error("build_operators: inverted element");
            g.jac = j;
            g.drdx[0][0] = 1.0 / j;
            g.normal[0][0] = -1.0;
            g.normal[1][0] = 1.0;
            g.sjac[0] = g.sjac[1] = 1.0;
            g.fscale[0] = g.fscale[1] = 1.0 / j;
            for (int i = 0; i < np; ++i)
                ops.x[size_t(e) * np + i] = xa + 0.5 * (ref.r[i] + 1.0) * (xb - xa);
            min_h = std::min(min_h, xb - xa);
        } else {
            const auto& v0 = mesh.vertices[mesh.elements[e][0]];
            const auto& v1 = mesh.vertices[mesh.elements[e][1]];
            const auto& v2 = mesh.vertices[mesh.elements[e][2]];
            const double xr = 0.5 * (v1[0] - v0[0]), xs = 0.5 * (v2[0] - v0[0]);
            const double yr = 0.5 * (v1[1] - v0[1]), ys = 0.5 * (v2[1] - v0[1]);
            const double j = xr * ys - xs * yr;
            if (j <= 0.0) throw std::runtime_error("build_operators: inverted element");
            g.jac = j;
            g.drdx[0][0] = ys / j;  // rx
            g.drdx[0][1] = -xs / j; // ry
            g.drdx[1][0] = -yr / j; // sx
            g.drdx[1][1] = xr / j;  // sy

            // outward normals per face: f0 (v0->v1), f1 (v1->v2), f2 (v2->v0)
            const double nraw[3][2] = {{yr, -xr}, {ys - yr, xr - xs}, {-ys, xs}};
            double perim = 0.0;
            for (int f = 0; f < 3; ++f) {
                const double len = std::hypot(nraw[f][0], nraw[f][1]);
                g.sjac[f] = len;
                g.normal[f][0] = nraw[f][0] / len;
                g.normal[f][1] = nraw[f][1] / len;
                g.fscale[f] = len / j;
                perim += 2.0 * len;
            }
            // inradius-like characteristic length for the CFL estimate
            min_h = std::min(min_h, 2.0 * (2.0 * j) / perim);

            for (int i = 0; i < np; ++i) {
                const double l0 = -0.5 * (ref.r[i] + ref.s[i]);
                const double l1 = 0.5 * (1.0 + ref.r[i]);
                const double l2 = 0.5 * (1.0 + ref.s[i]);
                ops.x[size_t(e) * np + i] = l0 * v0[0] + l1 * v1[0] + l2 * v2[0];
                ops.y[size_t(e) * np + i] = l0 * v0[1] + l1 * v1[1] + l2 * v2[1];
            }
        }
    }
    ops.min_char_length = min_h;
    return ops;
}

namespace {

std::vector<int> align_nodes(const Operators& ops, int e, int f, int ne, int nf, double shift_x,
                             double shift_y) {
    const auto& ref = ops.ref;
    const auto& my = ref.face_nodes[f];
    const auto& their = ref.face_nodes[nf];
    std::vector<int> map(my.size(), -1);
    const double tol = 1e-8 * std::max(1.0, ops.mesh->min_edge_length());
    for (size_t i = 0; i < my.size(); ++i) {
        const double px = ops.node_x(e, my[i]) + shift_x;
        const double py = ops.node_y(e, my[i]) + shift_y;
        for (size_t j = 0; j < their.size(); ++j) {
            if (std::fabs(ops.node_x(ne, their[j]) - px) < tol &&
                std::fabs(ops.node_y(ne, their[j]) - py) < tol) {
                map[i] = their[j];
                break;
            }
        }
        if (map[i] < 0)
            throw std::runtime_error("build_connectivity: trace nodes do not align on face of "
                                     "element " +
                                     std::to_string(e));
    }
    return map;
}

// Flux ownership must alternate consistently in space (including across
// periodic seams), so the owner is the side whose outward normal points
// along a fixed reference direction. The direction is chosen so no mesh
// face of the structured families is orthogonal to it.
bool owns_face(const Operators& ops, int e, int f) {
    static constexpr double beta[2] = {0.95171041227044817, 0.30701365090036602};
    const double* n = ops.geom[e].normal[f];
    const double d = n[0] * beta[0] + (ops.ref.dim > 1 ? n[1] * beta[1] : 0.0);
    if (d > 1e-12) return true;
    if (d < -1e-12) return false;
    throw std::runtime_error("build_connectivity: face normal orthogonal to the owner "
                             "direction; perturb the mesh or the direction");
}

} // namespace

Connectivity build_connectivity(const Mesh& mesh, const Operators& ops,
                                const std::vector<FacePairing>& pairings) {
    Connectivity cc;
    cc.conn.resize(mesh.n_elements());

    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int f = 0; f < mesh.faces_per_elem(); ++f) {
            const auto& fe = mesh.faces[e][f];
            FaceConn& fc = cc.conn[e][f];
            if (!fe.is_boundary()) {
                fc.kind = FaceConn::Kind::interior;
                fc.nbr_elem = fe.neighbor;
                fc.nbr_face = fe.neighbor_face;
                fc.owner = owns_face(ops, e, f);
                fc.nbr_nodes = align_nodes(ops, e, f, fe.neighbor, fe.neighbor_face, 0.0, 0.0);
            } else {
                fc.kind = FaceConn::Kind::boundary;
                fc.tag = fe.tag;
                fc.owner = true;
            }
        }
    }

    for (const auto& pairing : pairings) {
        const int ax = int(pairing.axis);
        for (const auto& pr : pairing.pairs) {
            FaceConn& lo = cc.conn[pr.min_face.elem][pr.min_face.face];
            FaceConn& hi = cc.conn[pr.max_face.elem][pr.max_face.face];
            const double sx = ax == 0 ? pairing.shift : 0.0;
            const double sy = ax == 1 ? pairing.shift : 0.0;
            lo.kind = FaceConn::Kind::paired;
            lo.nbr_elem = pr.max_face.elem;
            lo.nbr_face = pr.max_face.face;
            lo.owner = owns_face(ops, pr.min_face.elem, pr.min_face.face);
            lo.nbr_nodes = align_nodes(ops, pr.min_face.elem, pr.min_face.face, pr.max_face.elem,
                                       pr.max_face.face, sx, sy);
            hi.kind = FaceConn::Kind::paired;
            hi.nbr_elem = pr.min_face.elem;
            hi.nbr_face = pr.min_face.face;
            hi.owner = !lo.owner;
            hi.nbr_nodes = align_nodes(ops, pr.max_face.elem, pr.max_face.face, pr.min_face.elem,
                                       pr.min_face.face, -sx, -sy);
        }
    }
    return cc;
}

double integrate(const Operators& ops, const Field& f, int comp) {
    const int np = ops.ref.n_nodes;
    double total = 0.0;
    for (int e = 0; e < f.n_elems; ++e) {
        const double* u = f.elem(e, comp);
        double s = 0.0;
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j) s += ops.ref.mass(i, j) * u[j];
        total += ops.geom[e].jac * s;
    }
    return total;
}

double l2_norm(const Operators& ops, const Field& f, int comp) {
    const int np = ops.ref.n_nodes;
    double total = 0.0;
    for (int e = 0; e < f.n_elems; ++e) {
        const double* u = f.elem(e, comp);
        for (int i = 0; i < np; ++i) {
            double s = 0.0;
            for (int j = 0; j < np; ++j) s += ops.ref.mass(i, j) * u[j];
            total += ops.geom[e].jac * u[i] * s;
        }
    }
    return std::sqrt(std::max(0.0, total));
}

} // namespace unitcell
