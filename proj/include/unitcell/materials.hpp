#pragma once

#include <complex>
#include <string>

namespace unitcell {

// Frequency-dependent relative permittivity models.
struct DispersionModel {
    enum class Kind { none, lorentz, drude };
    Kind kind = Kind::none;
    double eps_inf = 1.0;
    double omega_p = 0.0; // plasma frequency [rad/s]
    double omega_o = 0.0; // Lorentz resonance [rad/s]
    double gamma = 0.0;   // damping [rad/s]

    static DispersionModel none(double eps_r = 1.0) {
        DispersionModel m;
        m.eps_inf = eps_r;
        return m;
    }
    static DispersionModel lorentz(double eps_inf, double omega_o, double omega_p, double gamma);
    static DispersionModel drude(double eps_inf, double omega_p, double gamma);
};

// relative permittivity at angular frequency omega [rad/s], using the
// exp(-i omega t) phasor convention (lossy media have Im eps > 0)
std::complex<double> permittivity(const DispersionModel& model, double omega);

// Semiconductor parameter set; units follow the data sheet conventions
// (densities cm^-3, mobilities cm^2/V/s, velocities cm/s, lifetimes ps,
// Auger coefficients cm^6/s).
struct SemiconductorParams {
    double doping = 0.0;      // net donor concentration C [cm^-3]
    double n_intrinsic = 0.0; // n_i [cm^-3]

    double mu0_e = 0.0, mu0_h = 0.0;       // low-field mobility
    double vsat_e = 0.0, vsat_h = 0.0;     // saturation velocity
    double beta_e = 1.0, beta_h = 1.0;     // saturation exponent

    double tau_e = 1.0, tau_h = 1.0;       // SRH lifetimes [ps]
    double n1_e = 0.0, n1_h = 0.0;         // SRH reference densities
    double auger_e = 0.0, auger_h = 0.0;   // Auger coefficients [cm^6/s]

    double thermal_voltage = 0.025852;     // V_T [V]
    double photon_energy_ev = 1.55;        // pump photon energy [eV]
    double quantum_efficiency = 1.0;       // eta in the generation model
};

// LT-GaAs parameter preset used throughout the examples ("ltgaas-paper").
SemiconductorParams ltgaas_params();
DispersionModel ltgaas_dispersion();
DispersionModel gold_dispersion();
inline constexpr double kSiGaAsEpsR = 13.26;

// Caughey-Thomas field-dependent mobility.
//   mu(E) = mu0 / (1 + (mu0 E / vsat)^beta)^(1/beta)
// E in V/cm, result in cm^2/V/s.
double mobility(double mu0, double vsat, double beta, double e_mag);

// SRH + Auger net recombination rate [cm^-3/ps].
double recombination(double n_e, double n_h, const SemiconductorParams& p);
// derivative of the rate w.r.t. one carrier density (for the Gummel
// linearization); carrier: 0 = electron, 1 = hole
double recombination_deriv(double n_e, double n_h, const SemiconductorParams& p, int carrier);

// Photogeneration from the instantaneous polarization-current work term.
// `dissipation` is the scaled product K~.E~ summed over field components
// (K~ = Jp/eps0 in (V/um)/ps, E~ in V/um); result in cm^-3/ps. Can be
// negative instantaneously; only the cycle average is sign-definite.
double generation(double dissipation, const SemiconductorParams& p);

} // namespace unitcell
