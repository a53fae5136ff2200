#pragma once

#include <map>
#include <string>
#include <vector>

#include "unitcell/materials.hpp"
#include "unitcell/poisson.hpp"

namespace unitcell {

// n.(vn)* for the local Lax-Friedrichs drift flux; `normal` is this side's
// outward normal, v in any consistent unit
double lax_friedrichs_flux(double n_minus, double n_plus, const double* v_minus,
                           const double* v_plus, const double* normal, int dim);

// Stationary drift-diffusion problem div(d q) + div(v n) + a n = s with
// q = grad n. Interface units: d [cm^2/s], v [cm/s], densities [cm^-3],
// sources [cm^-3/ps]; assembly converts to um/ps internally. `active`
// restricts the solve to a subset of elements (empty = all); faces between
// an active and an inactive element become zero-flux Robin walls, as do
// untagged-by-`dirichlet` boundary faces.
struct DDProblem {
    const Operators* ops = nullptr;
    const Connectivity* conn = nullptr;
    Field d;        // nodal diffusion coefficient
    Field v;        // nodal drift velocity, dim components
    Field reaction; // a(r) [1/ps], empty = 0; a <= 0 keeps the operator coercive
    Field source;   // s(r), empty = 0
    double f_robin = 0.0;
    std::map<BoundaryTag, double> dirichlet; // contact densities
    std::vector<char> active;
};

// block system over the active elements, unknowns per element: [n; q_x (; q_y)]
struct DDSystem {
    SparseBlockMatrix A;
    std::vector<double> rhs;
    std::vector<int> elems; // block row -> element id
    std::vector<int> index; // element id -> block row, -1 if inactive
    int np = 0;
    int dim = 0;
};

DDSystem assemble_dd(const DDProblem& problem);

struct DDSolution {
    Field n; // full-mesh Field, zero on inactive elements
    Field q;
    GmresResult stats;
};

DDSolution solve_dd(const DDProblem& problem, const DDSystem& system,
                    const GmresOptions& opts = {.restart = 100, .max_iters = 5000,
                                                .tol = 1e-10},
                    const BlockILU0* precond = nullptr,
                    const std::vector<double>* x0 = nullptr);

struct ContactDensities {
    double n_e = 0.0;
    double n_h = 0.0;
};
// charge-neutral equilibrium densities at a contact with net doping C
ContactDensities equilibrium_contact_densities(double C, double n_i);
double contact_potential(double V_el, double n_e_surface, double n_i, double V_T);

struct Contact {
    BoundaryTag tag = BoundaryTag::none;
    double v_el = 0.0;
};

// Self-consistent device description for the Gummel driver. Either PDBC
// (phi_drop across the x pairing, densities periodic) or electrode contacts
// (Dirichlet phi and densities); `semiconductor` masks the carrier solve.
struct Device {
    const Operators* ops = nullptr;
    const Connectivity* conn = nullptr;
    SemiconductorParams semi;
    Field doping; // nodal net donor density [cm^-3]
    std::vector<double> eps;
    double phi_drop = 0.0;
    std::vector<Contact> contacts;
    Field generation; // optional photogeneration [cm^-3/ps]
    std::vector<char> semiconductor;
};

struct GummelHistoryRow {
    int iteration = 0;
    double d_phi = 0.0, d_ne = 0.0, d_nh = 0.0;
    int linear_iterations = 0;
};

struct SteadyState {
    Field phi, E, n_e, n_h;
    bool converged = false;
    int iterations = 0;
    int negative_clips = 0;
    std::vector<GummelHistoryRow> history;
};

struct GummelOptions {
    double tol = 1e-5;
    int max_iter = 300;
    double relax = 1.0;
    GmresOptions linear = {.restart = 100, .max_iters = 8000, .tol = 1e-10};
};

SteadyState gummel_solve(const Device& device, const GummelOptions& opts = {});

void write_convergence_csv(const SteadyState& state, const std::string& path);

} // namespace unitcell
