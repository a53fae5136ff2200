#pragma once

#include <vector>

#include "unitcell/dense.hpp"

namespace unitcell {

// Nodal reference-element tables on the unit simplex:
//   1D: r in [-1,1], faces are the two endpoints.
//   2D: triangle with vertices (-1,-1), (1,-1), (-1,1); faces are the
//       three edges (r=-1 side is face 2, s=-1 is face 0, hypotenuse 1).
// Nodes are warp-and-blend Legendre-Gauss-Lobatto-type points, giving a
// well-conditioned Vandermonde for p <= 6.
struct RefElement {
    int dim = 0;
    int order = 0;
    int n_nodes = 0;       // Np
    int n_faces = 0;
    int n_face_nodes = 0;  // Nfp

    std::vector<double> r;  // node coordinates, n_nodes entries
    std::vector<double> s;  // second coordinate (2D only)

    Dense vandermonde;          // modal -> nodal
    Dense mass;                 // inv(V V^T), reference mass matrix
    std::vector<Dense> diff;    // Dr (and Ds in 2D), n_nodes x n_nodes
    Dense lift;                 // n_nodes x (n_faces*n_face_nodes)

    // volume-node indices on each face, reference ordering
    std::vector<std::vector<int>> face_nodes;

    // outward reference normals per face (dim components)
    std::vector<std::vector<double>> face_normal;

    // 1D mass matrix of the face trace space (Nfp x Nfp), used for
    // surface integrals; in 1D it is the scalar 1.
    Dense face_mass;
};

// Builds the tables for dimension 1 or 2 and order 1 <= p <= 6.
// Throws std::invalid_argument outside that range.
RefElement reference_element(int dim, int p);

// Jacobi-Gauss-Lobatto nodes on [-1,1] for given order (n+1 points).
std::vector<double> gauss_lobatto_nodes(int p);

// Normalized Jacobi polynomial P_n^{(a,b)} evaluated at x.
double jacobi_p(double x, double a, double b, int n);
double grad_jacobi_p(double x, double a, double b, int n);

// average / jump helpers shared by every flux routine:
//   {u} = (u_minus + u_plus)/2,  [[u]] = u_minus - u_plus
struct AvgJump {
    double avg;
    double jump;
};
inline AvgJump average_jump(double u_minus, double u_plus) {
    return {0.5 * (u_minus + u_plus), u_minus - u_plus};
}
void average_jump(const std::vector<double>& u_minus, const std::vector<double>& u_plus,
                  std::vector<double>& avg, std::vector<double>& jump);

} // namespace unitcell
