#pragma once

#include <functional>
#include <map>
#include <vector>

#include "unitcell/dd_steady.hpp"

namespace unitcell {

// Explicit strong-form evaluation of the stationary operator of DDProblem:
//   out = div(d q) + div(v n) + a n + s,   q = grad n,
// with the same fluxes, units and boundary rules as assemble_dd. q is
// recomputed from n on every call (two element-parallel passes).
struct DDApplyWork {
    Field q;
};
void dd_apply(const DDProblem& problem, const Field& n, DDApplyWork& work, Field& out,
              bool serial = false);

struct CarrierState {
    Field n_e, n_h; // cm^-3
    double t = 0.0; // ps
};

// Transient two-carrier transport on top of a converged steady state.
// Contacts keep their equilibrium densities; faces to non-semiconductor
// elements are zero-flux walls, matching the steady solve.
struct TransientDevice {
    const Operators* ops = nullptr;
    const Connectivity* conn = nullptr;
    SemiconductorParams semi;
    std::vector<char> semiconductor;
    std::map<BoundaryTag, double> contacts_e, contacts_h;
    bool mobility_instantaneous = true; // else use the frozen nodal fields
    Field mu_e_frozen, mu_h_frozen;     // cm^2/V/s, used when frozen
};

struct TransientWork {
    DDProblem pe, ph; // per-carrier coefficient carriers (d, v, source)
    DDApplyWork qwork;
    CarrierState u1, u2, k;
    bool ready = false;
};

CarrierState make_carrier_state(const TransientDevice& dev);

// d/dt (n_e, n_h) with drift from e_total [V/um] and optional
// photogeneration [cm^-3/ps]; R enters through the recombination model
void dd_rhs(const TransientDevice& dev, const CarrierState& state, const Field& e_total,
            const Field* generation, CarrierState& deriv, TransientWork& work,
            bool serial = false);

// Shu-Osher third-order TVD step; throws on non-finite densities naming
// the first offending element and the time. e_total is held across stages.
void tvdrk3_step(const TransientDevice& dev, CarrierState& state, const Field& e_total,
                 const Field* generation, double dt, TransientWork& work,
                 bool serial = false);

// generic vector form (scalar ODE tests, coupler plumbing)
void tvdrk3_step(std::vector<double>& y, double& t, double dt,
                 const std::function<void(const std::vector<double>&, double,
                                          std::vector<double>&)>& rhs);

} // namespace unitcell
