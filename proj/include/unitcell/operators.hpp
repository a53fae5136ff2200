#pragma once

#include <string>
#include <vector>

#include "unitcell/mesh.hpp"
#include "unitcell/refelement.hpp"

namespace unitcell {

// Per-element nodal coefficients for a named unknown. Storage is
// element-major, component-major within the element:
//   data[(e * n_comp + c) * n_nodes + i]
// Concurrent writers must own disjoint element ranges.
struct Field {
    std::string name;
    int n_elems = 0;
    int n_nodes = 0;
    int n_comp = 1;
    std::vector<double> data;

    Field() = default;
    Field(std::string nm, int ne, int np, int nc = 1)
        : name(std::move(nm)), n_elems(ne), n_nodes(np), n_comp(nc),
          data(size_t(ne) * np * nc, 0.0) {}

    double* elem(int e, int c = 0) { return data.data() + (size_t(e) * n_comp + c) * n_nodes; }
    const double* elem(int e, int c = 0) const {
        return data.data() + (size_t(e) * n_comp + c) * n_nodes;
    }
    double& at(int e, int c, int i) { return data[(size_t(e) * n_comp + c) * n_nodes + i]; }
    double at(int e, int c, int i) const { return data[(size_t(e) * n_comp + c) * n_nodes + i]; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

struct ElemGeom {
    double jac = 0.0;      // volume Jacobian (affine, constant per element)
    double drdx[2][2]{};   // [ref coord][phys coord]: rx, ry / sx, sy
    double normal[3][2]{}; // outward unit normal per face
    double sjac[3]{};      // surface Jacobian per face
    double fscale[3]{};    // sjac / jac
};

// Elemental operators shared by every solver: reference tables plus the
// per-element affine geometric factors. Immutable after build.
struct Operators {
    const Mesh* mesh = nullptr;
    RefElement ref;
    std::vector<ElemGeom> geom;
    std::vector<double> x, y; // physical node coordinates, e*Np + i
    double min_char_length = 0.0;

    int n_elems() const { return mesh->n_elements(); }
    int n_nodes() const { return ref.n_nodes; }
    double node_x(int e, int i) const { return x[size_t(e) * ref.n_nodes + i]; }
    double node_y(int e, int i) const { return y[size_t(e) * ref.n_nodes + i]; }

    // applies the physical derivative d/dx_c of the per-element nodal
    // values u (Np entries) into du (Np entries)
    void phys_deriv(int e, int c, const double* u, double* du) const;
};

// Throws std::runtime_error on an inverted element.
Operators build_operators(const Mesh& mesh, const RefElement& ref);

// Node-level face connectivity: for every element face, the aligned
// volume-node indices on the other side (interior and periodic faces)
// plus the flux-owner flag implementing the deterministic beta = n_hat
// convention (the lower element index owns the face; a periodic pair is
// one logical face).
struct FaceConn {
    enum class Kind { interior, boundary, paired };
    Kind kind = Kind::boundary;
    BoundaryTag tag = BoundaryTag::none; // boundary/paired faces keep their tag
    int nbr_elem = -1;
    int nbr_face = -1;
    bool owner = true; // beta == own outward normal on this side
    std::vector<int> nbr_nodes; // neighbor volume node per own face node
};

struct Connectivity {
    std::vector<std::array<FaceConn, 3>> conn;
    const FaceConn& at(int e, int f) const { return conn[e][f]; }
};

Connectivity build_connectivity(const Mesh& mesh, const Operators& ops,
                                const std::vector<FacePairing>& pairings);

// L2 norm of (field - reference functor) using the exact elemental mass
// matrices; used by convergence tests and observables.
double integrate(const Operators& ops, const Field& f, int comp = 0);
double l2_norm(const Operators& ops, const Field& f, int comp = 0);

} // namespace unitcell
