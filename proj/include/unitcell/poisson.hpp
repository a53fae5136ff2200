#pragma once

#include <map>
#include <vector>

#include "unitcell/linalg.hpp"
#include "unitcell/operators.hpp"

namespace unitcell {

// Mixed-form DG problem  div(eps E) + g phi = f,  E = -grad phi.
// Periodic pairings live in the Connectivity; paired faces tagged
// x_min/x_max additionally carry the potential drop phi_drop. Boundary
// faces listed in `dirichlet` are electrodes; every other boundary face
// gets the Neumann rule n.(eps E) = f_neumann.
struct PoissonProblem {
    const Operators* ops = nullptr;
    const Connectivity* conn = nullptr;
    std::vector<double> eps; // relative permittivity per element
    Field g;                 // reaction coefficient (empty = 0)
    Field f;                 // source (empty = 0)
    double phi_drop = 0.0;
    double f_neumann = 0.0;
    std::map<BoundaryTag, double> dirichlet;
    // pure Neumann/periodic with g = 0 is singular up to a constant; pin
    // the first node of element 0 to pin_value to fix the gauge
    bool pin_node = false;
    double pin_value = 0.0;
};

// element-block system, unknowns per element: [phi; E_x (; E_y)]
struct BlockSystem {
    SparseBlockMatrix A;
    std::vector<double> rhs;
    int np = 0;
    int dim = 0;
};

// One-sided alternate flux pair. beta_sign = +1 on the side whose outward
// normal defines beta, -1 on the other; `normal` is this side's normal.
struct AltFlux {
    double u_star = 0.0;
    double w_star[2]{};
};
AltFlux alternate_flux(double u_minus, double u_plus, const double* w_minus,
                       const double* w_plus, const double* normal, int beta_sign, int dim);

BlockSystem assemble(const PoissonProblem& problem);

struct PoissonSolution {
    Field phi;
    Field E;
    GmresResult stats;
};

// Solves the assembled system; x0 (optional) supplies the initial guess in
// system layout. A caller-provided preconditioner is reused as-is,
// otherwise an ILU(0) factorization is built on the spot.
PoissonSolution solve(const PoissonProblem& problem, const BlockSystem& system,
                      const GmresOptions& opts = {.restart = 100, .max_iters = 5000,
                                                  .tol = 1e-10},
                      const BlockILU0* precond = nullptr,
                      const std::vector<double>* x0 = nullptr);

} // namespace unitcell
