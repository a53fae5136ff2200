#pragma once

// Internal unit system: lengths in micrometers, time in picoseconds,
// potential in volts. Carrier densities stay in cm^-3 (the transport
// equations are linear in n, so the density unit never mixes with the
// geometric units). Mobilities are cm^2/V/s and velocities cm/s at the
// interface level; solver kernels convert to um/ps once per update.

namespace unitcell::units {

// speed of light [um/ps]
inline constexpr double c0 = 299.792458;

// free-space impedance [ohm]
inline constexpr double Z0 = 376.730313668;

// elementary charge [C]
inline constexpr double q_e = 1.602176634e-19;

// vacuum permittivity [F/m]
inline constexpr double eps0 = 8.8541878128e-12;

// Boltzmann voltage at 300 K [V]
inline constexpr double VT_300K = 0.025851999786;

// reduced Planck constant [J*s]
inline constexpr double hbar = 1.054571817e-34;

// electron-volt [J]
inline constexpr double eV = 1.602176634e-19;

// q/eps0 with n in cm^-3 and lengths in um:
//   div(eps_r E)[V/um^2] = QN * n[cm^-3]
// q/eps0 = 1.80952e-2 V*um, times 1e-12 (cm^-3 -> um^-3).
inline constexpr double QN = q_e / eps0 * 1.0e-2 * 1.0e-12;

// E-field conversion: V/um -> V/cm
inline constexpr double Vum_to_Vcm = 1.0e4;

// velocity conversion: cm/s -> um/ps
inline constexpr double cms_to_umps = 1.0e-8;

// diffusion conversion: cm^2/s -> um^2/ps
inline constexpr double cm2s_to_um2ps = 1.0e-4;

// conduction current scaling for the Maxwell update.
// Scaled fields: Et = E [V/um], Ht = Z0*H [V/um]; the Ampere law reads
//   eps_r dEt/dt = c0 (curl Ht) - Jt,  Jt = J_SI/(eps0) in (V/um)/ps.
// J_SI = q * n * v with n in cm^-3 (1e6 m^-3) and v in cm/s (1e-2 m/s):
//   Jt = q/eps0 * 1e4 * n * v * 1e-18  (V/(m s) -> (V/um)/ps)
inline constexpr double JSCALE = q_e / eps0 * 1.0e4 * 1.0e-18;

// current density from n [cm^-3] and v [cm/s] in A/cm^2
inline constexpr double J_Acm2 = q_e; // q*n*v is already A/cm^2

// angular frequency conversion: rad/s -> rad/ps
inline constexpr double rads_to_radps = 1.0e-12;

// generation-rate scaling: scaled dissipation K~*E~ (K~ = Jp/eps0 in
// (V/um)/ps, E~ in V/um) to carriers per cm^3 per ps, divided by the
// photon energy in joules:
//   p_SI [W/m^3] = eps0 * (K~*E~) * 1e24
//   G [cm^-3/ps] = eta * p_SI / E_photon * 1e-18
inline constexpr double GEN_SCALE = eps0 * 1.0e6;

} // namespace unitcell::units
