#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "unitcell/materials.hpp"
#include "unitcell/operators.hpp"

namespace unitcell {

// Scaled time-domain fields: Et = E [V/um], Ht = Z0*H [V/um]. With t in ps
// the curl equations read eps_r dEt/dt = c0 curl Ht - J~ and
// mu_r dHt/dt = -c0 curl Et, J~ = J/eps0 in (V/um)/ps. 1D carries (Ey, Hz)
// along x, 2D the TE set (Ex, Ey, Hz).

struct PumpSpec {
    double f1_thz = 374.5;
    double f2_thz = 375.5;
    double amplitude = 0.0; // scaled E amplitude per tone [V/um]
    double ramp_ps = 0.0;   // cosine ramp-up duration
};

// ramped two-tone signal at retarded time tau (0 for tau <= 0)
double pump_signal(const PumpSpec& pump, double tau);

// total-field/scattered-field plane-wave source on the mesh plane
// axis = position; the total-field region is downstream along `direction`
struct TfSfSpec {
    Axis axis = Axis::x;
    double position = 0.0;
    int direction = 1; // +-1 propagation sense along the axis
    PumpSpec pump;
};

// complex-frequency-shifted stretched-coordinate absorber occupying the
// slab between x0 (interface) and x1 (outer wall) along `axis`
struct PmlBlock {
    Axis axis = Axis::x;
    double x0 = 0.0;
    double x1 = 0.0;
    double sigma_max = -1.0; // < 0: auto-graded for 1e-6 target reflection
    double kappa = 1.0;      // real stretch at the outer wall
    double alpha = 0.05;     // CFS shift [rad/ps]
    int grading = 3;
};

struct EMMaterial {
    double eps_inf = 1.0;
    double mu_r = 1.0;
    DispersionModel dispersion; // realized by ADE polarization currents
};

struct EMSystem {
    const Operators* ops = nullptr;
    const Connectivity* conn = nullptr;
    std::vector<EMMaterial> materials; // indexed by mesh region id
    std::vector<PmlBlock> pml;
    std::optional<TfSfSpec> source;
    // external conduction current J~ (components matching E), or null
    const Field* conduction = nullptr;
};

// immutable per-element tables derived from an EMSystem
struct EMSolver {
    EMSystem sys;
    int dim = 0, np = 0;
    int n_e_comp = 0; // 1 in 1D (Ey), 2 in 2D (Ex, Ey)
    int n_psi = 0;    // PML memory components (2 in 1D, 4 in 2D)
    std::vector<double> eps_inf, mu_r, z_imp, y_adm; // per element
    std::vector<int> disp_kind;                      // 0 none, 1 drude, 2 lorentz
    std::vector<double> wp2, gam, wo2;               // rad/ps units
    std::vector<signed char> tfsf; // per elem*face: +-1 = add that sign of
                                   // the incident wave to the neighbor trace
    std::vector<char> in_pml;
    Field sigma, kappa, alpha; // nodal, one component per dimension
};

// validates and precomputes; throws std::invalid_argument on bad setups
EMSolver build_em(const EMSystem& sys);

struct EMState {
    Field E, H;
    Field jp, pol; // ADE polarization current / Lorentz polarization
    Field psi;     // PML memory on the face-corrected derivatives
    double t = 0.0;
};

EMState make_state(const EMSolver& em);

// upwind flux, full 3-vector form:
//   E* = (Y-E- + Y+E+ - n x (H- - H+)) / (Y- + Y+)
//   H* = (Z-H- + Z+H+ + n x (E- - E+)) / (Z- + Z+)
void upwind_flux(const double e_minus[3], const double e_plus[3], const double h_minus[3],
                 const double h_plus[3], double z_minus, double z_plus, const double normal[3],
                 double e_star[3], double h_star[3]);

// element-parallel / serial-reference RHS evaluations (bitwise identical)
void maxwell_rhs(const EMSolver& em, const EMState& state, EMState& deriv);
void maxwell_rhs_serial(const EMSolver& em, const EMState& state, EMState& deriv);

struct Lsrk54Workspace {
    EMState rhs, res;
};

// low-storage five-stage fourth-order step; throws on non-finite fields,
// naming the first offending element and the time
void lsrk54_step(const EMSolver& em, EMState& state, double dt, Lsrk54Workspace& ws,
                 bool serial = false);

// generic vector form of the same integrator (scalar ODE tests, coupler)
void lsrk54_step(std::vector<double>& y, double& t, double dt,
                 const std::function<void(const std::vector<double>&, double,
                                          std::vector<double>&)>& rhs);

// dt = cfl * min over elements of h / (c_local * (2p+1))
double cfl_dt(const EMSolver& em, double cfl = 0.5);

// 1/2 integral of (eps_inf |E|^2 + mu_r |H|^2) in scaled units
double em_energy(const EMSolver& em, const EMState& state);

} // namespace unitcell
