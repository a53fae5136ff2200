#include "unitcell/materials.hpp"

#include <cmath>

#include "unitcell/units.hpp"

namespace unitcell {

DispersionModel DispersionModel::lorentz(double eps_inf, double omega_o, double omega_p,
                                         double gamma) {
    DispersionModel m;
    m.kind = Kind::lorentz;
    m.eps_inf = eps_inf;
    m.omega_o = omega_o;
    m.omega_p = omega_p;
    m.gamma = gamma;
    return m;
}

DispersionModel DispersionModel::drude(double eps_inf, double omega_p, double gamma) {
    DispersionModel m;
    m.kind = Kind::drude;
    m.eps_inf = eps_inf;
    m.omega_p = omega_p;
    m.gamma = gamma;
    return m;
}

std::complex<double> permittivity(const DispersionModel& model, double omega) {
    const std::complex<double> i(0.0, 1.0);
    const double wp2 = model.omega_p * model.omega_p;
    switch (model.kind) {
    case DispersionModel::Kind::lorentz:
        return model.eps_inf +
               wp2 / (model.omega_o * model.omega_o - omega * omega - i * model.gamma * omega);
    case DispersionModel::Kind::drude:
        return model.eps_inf - wp2 / (omega * omega + i * model.gamma * omega);
    case DispersionModel::Kind::none:
        break;
    }
    return model.eps_inf;
}

SemiconductorParams ltgaas_params() {
    SemiconductorParams p;
    p.doping = 1.3e16;
    p.n_intrinsic = 9.0e6;
    p.mu0_e = 8000.0;
    p.mu0_h = 400.0;
    p.vsat_e = 1.725e7;
    p.vsat_h = 0.9e7;
    p.beta_e = 1.82;
    p.beta_h = 1.75;
    p.tau_e = 0.3;
    p.tau_h = 0.4;
    p.n1_e = 4.5e6;
    p.n1_h = 4.5e6;
    p.auger_e = 7.0e-30;
    p.auger_h = 7.0e-30;
    p.thermal_voltage = units::VT_300K;
    p.photon_energy_ev = 1.5509;
    p.quantum_efficiency = 1.0;
    return p;
}

DispersionModel ltgaas_dispersion() {
    return DispersionModel::lorentz(5.785, 4.783e15, 1.061e16, 4.557e14);
}

DispersionModel gold_dispersion() { return DispersionModel::drude(1.0, 1.372e16, 8.052e13); }

double mobility(double mu0, double vsat, double beta, double e_mag) {
    const double r = mu0 * std::fabs(e_mag) / vsat;
    return mu0 / std::pow(1.0 + std::pow(r, beta), 1.0 / beta);
}

namespace {
// cm^6/s -> cm^6/ps
constexpr double kAugerScale = 1.0e-12;
} // namespace

double recombination(double n_e, double n_h, const SemiconductorParams& p) {
    const double excess = n_e * n_h - p.n_intrinsic * p.n_intrinsic;
    const double srh_denom = p.tau_e * (n_h + p.n1_h) + p.tau_h * (n_e + p.n1_e);
    const double auger = (p.auger_e * n_e + p.auger_h * n_h) * kAugerScale;
    return excess / srh_denom + auger * excess;
}

double recombination_deriv(double n_e, double n_h, const SemiconductorParams& p, int carrier) {
    const double excess = n_e * n_h - p.n_intrinsic * p.n_intrinsic;
    const double srh_denom = p.tau_e * (n_h + p.n1_h) + p.tau_h * (n_e + p.n1_e);
    const double auger = (p.auger_e * n_e + p.auger_h * n_h) * kAugerScale;
    if (carrier == 0) {
        return n_h / srh_denom - excess * p.tau_h / (srh_denom * srh_denom) +
               p.auger_e * kAugerScale * excess + auger * n_h;
    }
    return n_e / srh_denom - excess * p.tau_e / (srh_denom * srh_denom) +
           p.auger_h * kAugerScale * excess + auger * n_e;
}

double generation(double dissipation, const SemiconductorParams& p) {
    const double photon_energy = p.photon_energy_ev * units::eV;
    return p.quantum_efficiency * units::GEN_SCALE * dissipation / photon_energy;
}

} // namespace unitcell
