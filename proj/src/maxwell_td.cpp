#include "unitcell/maxwell_td.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "unitcell/units.hpp"

namespace unitcell {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

inline void cross3(const double a[3], const double b[3], double out[3]) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

} // namespace

double pump_signal(const PumpSpec& pump, double tau) {
    if (tau <= 0.0) return 0.0;
    double ramp = 1.0;
    if (pump.ramp_ps > 0.0 && tau < pump.ramp_ps)
        ramp = 0.5 * (1.0 - std::cos(M_PI * tau / pump.ramp_ps));
    const double w1 = kTwoPi * pump.f1_thz;
    const double w2 = kTwoPi * pump.f2_thz;
    return pump.amplitude * ramp * 0.5 * (std::sin(w1 * tau) + std::sin(w2 * tau));
}

void upwind_flux(const double e_minus[3], const double e_plus[3], const double h_minus[3],
                 const double h_plus[3], double z_minus, double z_plus, const double normal[3],
                 double e_star[3], double h_star[3]) {
    const double y_minus = 1.0 / z_minus, y_plus = 1.0 / z_plus;
    double jump_e[3], jump_h[3], nxe[3], nxh[3];
    for (int c = 0; c < 3; ++c) {
        jump_e[c] = e_minus[c] - e_plus[c];
        jump_h[c] = h_minus[c] - h_plus[c];
    }
    cross3(normal, jump_e, nxe);
    cross3(normal, jump_h, nxh);
    for (int c = 0; c < 3; ++c) {
        e_star[c] = (y_minus * e_minus[c] + y_plus * e_plus[c] - nxh[c]) / (y_minus + y_plus);
        h_star[c] = (z_minus * h_minus[c] + z_plus * h_plus[c] + nxe[c]) / (z_minus + z_plus);
    }
}

EMSolver build_em(const EMSystem& sys) {
    if (!sys.ops || !sys.conn) throw std::invalid_argument("maxwell: ops/conn not set");
    const Operators& ops = *sys.ops;
    const Mesh& mesh = *ops.mesh;
    const int ne = ops.n_elems();
    const int dim = ops.ref.dim;
    const int nf = ops.ref.n_faces;

    EMSolver em;
    em.sys = sys;
    em.dim = dim;
    em.np = ops.n_nodes();
    em.n_e_comp = dim == 1 ? 1 : 2;
    em.n_psi = 2 * dim;

    em.eps_inf.resize(ne);
    em.mu_r.resize(ne);
    em.z_imp.resize(ne);
    em.y_adm.resize(ne);
    em.disp_kind.assign(ne, 0);
    em.wp2.assign(ne, 0.0);
    em.gam.assign(ne, 0.0);
    em.wo2.assign(ne, 0.0);
    for (int e = 0; e < ne; ++e) {
        const int r = mesh.region[e];
        if (r < 0 || r >= int(sys.materials.size()))
            throw std::invalid_argument("maxwell: region " + std::to_string(r) +
                                        " has no material");
        const EMMaterial& m = sys.materials[r];
        if (!(m.eps_inf > 0.0) || !(m.mu_r > 0.0))
            throw std::invalid_argument("maxwell: eps_inf and mu_r must be positive");
        em.eps_inf[e] = m.eps_inf;
        em.mu_r[e] = m.mu_r;
        em.z_imp[e] = std::sqrt(m.mu_r / m.eps_inf);
        em.y_adm[e] = 1.0 / em.z_imp[e];
        switch (m.dispersion.kind) {
        case DispersionModel::Kind::none: break;
        case DispersionModel::Kind::drude: em.disp_kind[e] = 1; break;
        case DispersionModel::Kind::lorentz: em.disp_kind[e] = 2; break;
        }
        if (em.disp_kind[e]) {
            const double u = units::rads_to_radps;
            em.wp2[e] = m.dispersion.omega_p * u * (m.dispersion.omega_p * u);
            em.gam[e] = m.dispersion.gamma * u;
            em.wo2[e] = m.dispersion.omega_o * u * (m.dispersion.omega_o * u);
        }
    }

    // TF/SF face flags: interface faces lie exactly on the source plane
    em.tfsf.assign(size_t(ne) * nf, 0);
    if (sys.source) {
        const TfSfSpec& src = *sys.source;
        if (src.direction != 1 && src.direction != -1)
            throw std::invalid_argument("maxwell: tf/sf direction must be +-1");
        const int ax = int(src.axis);
        if (dim == 1 && ax != 0)
            throw std::invalid_argument("maxwell: 1D source must run along x");
        const double tol = 1.0e-6 * ops.min_char_length;
        int hits = 0;
        for (int e = 0; e < ne; ++e)
            for (int f = 0; f < nf; ++f) {
                const FaceConn& fc = sys.conn->at(e, f);
                if (fc.kind == FaceConn::Kind::boundary) continue;
                if (std::fabs(ops.geom[e].normal[f][ax]) < 0.99) continue;
                double fcenter = 0.0;
                for (int i : ops.ref.face_nodes[f])
                    fcenter += (ax == 0 ? ops.node_x(e, i) : ops.node_y(e, i));
                fcenter /= double(ops.ref.n_face_nodes);
                if (std::fabs(fcenter - src.position) > tol) continue;
                const auto ctr = mesh.centroid(e);
                const bool total = (ctr[ax] - src.position) * src.direction > 0.0;
                em.tfsf[size_t(e) * nf + f] = total ? 1 : -1;
                ++hits;
            }
        if (hits == 0)
            throw std::invalid_argument("maxwell: tf/sf plane does not hit any mesh face");
    }

    // PML nodal profiles
    em.in_pml.assign(ne, 0);
    em.sigma = Field("pml_sigma", ne, em.np, dim);
    em.kappa = Field("pml_kappa", ne, em.np, dim);
    em.alpha = Field("pml_alpha", ne, em.np, dim);
    em.kappa.fill(1.0);
    for (const PmlBlock& blk : sys.pml) {
        const int ax = int(blk.axis);
        if (ax >= dim) throw std::invalid_argument("maxwell: pml axis outside mesh dimension");
        const double len = std::fabs(blk.x1 - blk.x0);
        if (!(len > 0.0)) throw std::invalid_argument("maxwell: pml block has zero depth");
        double smax = blk.sigma_max;
        if (smax < 0.0)
            smax = (blk.grading + 1) * units::c0 * std::log(1.0e6) / (2.0 * len);
        for (int e = 0; e < ne; ++e)
            for (int i = 0; i < em.np; ++i) {
                const double c = ax == 0 ? ops.node_x(e, i) : ops.node_y(e, i);
                const double t = (c - blk.x0) / (blk.x1 - blk.x0);
                if (t <= 0.0 || t > 1.0 + 1e-12) continue;
                const double g = std::pow(std::min(t, 1.0), blk.grading);
                em.sigma.at(e, ax, i) = smax * g;
                em.kappa.at(e, ax, i) = 1.0 + (blk.kappa - 1.0) * g;
                em.alpha.at(e, ax, i) = blk.alpha;
                em.in_pml[e] = 1;
            }
    }

    if (sys.conduction && sys.conduction->n_comp != em.n_e_comp)
        throw std::invalid_argument("maxwell: conduction current components must match E");
    return em;
}

EMState make_state(const EMSolver& em) {
    const int ne = em.sys.ops->n_elems();
    EMState st;
    st.E = Field("E", ne, em.np, em.n_e_comp);
    st.H = Field("H", ne, em.np, 1);
    st.jp = Field("jp", ne, em.np, em.n_e_comp);
    st.pol = Field("pol", ne, em.np, em.n_e_comp);
    st.psi = Field("psi", ne, em.np, em.n_psi);
    return st;
}

namespace {

// incident plane wave of the TF/SF source at (x, y), time t; E is the
// transverse component (Ey along x-propagation, Ex along y), H is Hz
inline void incident(const TfSfSpec& src, double x, double y, double t, double& e_inc,
                     double& h_inc) {
    const double c = int(src.axis) == 0 ? x : y;
    const double tau = t - (c - src.position) * src.direction / units::c0;
    e_inc = pump_signal(src.pump, tau);
    h_inc = (int(src.axis) == 0 ? src.direction : -src.direction) * e_inc;
}

void rhs_elem(const EMSolver& em, const EMState& st, EMState& out, int e) {
    const Operators& ops = *em.sys.ops;
    const RefElement& ref = ops.ref;
    const int np = em.np;
    const int dim = em.dim;
    const int nfp = ref.n_face_nodes;
    const ElemGeom& gm = ops.geom[e];

    // face-corrected derivatives: g[0] = Dx Hz, g[1] = Dy Hz,
    // g[2] = Dx Ey, g[3] = Dy Ex (1D uses g[0] and g[2])
    double g[4][32]; // np <= 28 for p <= 6 in 2D
    const int iEy = dim == 1 ? 0 : 1;
    ops.phys_deriv(e, 0, st.H.elem(e), g[0]);
    ops.phys_deriv(e, 0, st.E.elem(e, iEy), g[2]);
    if (dim == 2) {
        ops.phys_deriv(e, 1, st.H.elem(e), g[1]);
        ops.phys_deriv(e, 1, st.E.elem(e, 0), g[3]);
    }

    for (int f = 0; f < ref.n_faces; ++f) {
        const FaceConn& fc = em.sys.conn->at(e, f);
        const auto& fn = ref.face_nodes[f];
        const double* nrm = gm.normal[f];
        const double n3[3] = {nrm[0], dim == 2 ? nrm[1] : 0.0, 0.0};
        const signed char sflag = em.tfsf[size_t(e) * ref.n_faces + f];

        for (int i = 0; i < nfp; ++i) {
            const int o = fn[i];
            double em3[3] = {0.0, 0.0, 0.0}, ep3[3] = {0.0, 0.0, 0.0};
            double hm3[3] = {0.0, 0.0, 0.0}, hp3[3] = {0.0, 0.0, 0.0};
            if (dim == 1) {
                em3[1] = st.E.at(e, 0, o);
            } else {
                em3[0] = st.E.at(e, 0, o);
                em3[1] = st.E.at(e, 1, o);
            }
            hm3[2] = st.H.at(e, 0, o);
            double zp = em.z_imp[e];
            if (fc.kind == FaceConn::Kind::boundary) {
                // PEC image: tangential E flips, H copies
                for (int c = 0; c < 3; ++c) {
                    ep3[c] = -em3[c];
                    hp3[c] = hm3[c];
                }
            } else {
                const int nb = fc.nbr_elem;
                const int q = fc.nbr_nodes[i];
                if (dim == 1) {
                    ep3[1] = st.E.at(nb, 0, q);
                } else {
                    ep3[0] = st.E.at(nb, 0, q);
                    ep3[1] = st.E.at(nb, 1, q);
                }
                hp3[2] = st.H.at(nb, 0, q);
                zp = em.z_imp[nb];
                if (sflag) {
                    double e_inc, h_inc;
                    incident(*em.sys.source, ops.node_x(e, o),
                             dim == 2 ? ops.node_y(e, o) : 0.0, st.t, e_inc, h_inc);
                    const int ce = em.sys.source->axis == Axis::x ? 1 : 0;
                    ep3[ce] += sflag * e_inc;
                    hp3[2] += sflag * h_inc;
                }
            }
            double es[3], hs[3];
            upwind_flux(em3, ep3, hm3, hp3, em.z_imp[e], zp, n3, es, hs);
            const double d_hz = hs[2] - hm3[2];
            const double d_ex = es[0] - em3[0];
            const double d_ey = es[1] - em3[1];
            for (int a = 0; a < np; ++a) {
                const double L = gm.fscale[f] * ref.lift(a, f * nfp + i);
                g[0][a] += L * n3[0] * d_hz;
                g[2][a] += L * n3[0] * d_ey;
                if (dim == 2) {
                    g[1][a] += L * n3[1] * d_hz;
                    g[3][a] += L * n3[1] * d_ex;
                }
            }
        }
    }

    // CFS-PML stretch applied to the corrected derivatives; memory ODE
    // d psi = -(alpha + sigma/kappa) psi - sigma/kappa^2 * g
    static constexpr int psi_dir[4] = {0, 1, 0, 1};
    if (em.in_pml[e]) {
        const int comps[4] = {0, 1, 2, 3};
        for (int ci = 0; ci < em.n_psi; ++ci) {
            const int gi = dim == 1 ? (ci == 0 ? 0 : 2) : comps[ci];
            const int d = psi_dir[gi];
            for (int k = 0; k < np; ++k) {
                const double s = em.sigma.at(e, d, k);
                const double kp = em.kappa.at(e, d, k);
                const double al = em.alpha.at(e, d, k);
                const double psi = st.psi.at(e, ci, k);
                out.psi.at(e, ci, k) = -(al + s / kp) * psi - s / (kp * kp) * g[gi][k];
                g[gi][k] = g[gi][k] / kp + psi;
            }
        }
    } else {
        for (int ci = 0; ci < em.n_psi; ++ci)
            for (int k = 0; k < np; ++k) out.psi.at(e, ci, k) = 0.0;
    }

    const double epsi = 1.0 / em.eps_inf[e];
    const double mui = 1.0 / em.mu_r[e];
    const int kind = em.disp_kind[e];
    const Field* jc = em.sys.conduction;
    for (int k = 0; k < np; ++k) {
        double jx = 0.0, jy = 0.0;
        if (kind) {
            jx = st.jp.at(e, 0, k);
            if (dim == 2) jy = st.jp.at(e, 1, k);
        }
        if (jc) {
            jx += jc->at(e, 0, k);
            if (dim == 2) jy += jc->at(e, 1, k);
        }
        if (dim == 1) {
            out.E.at(e, 0, k) = epsi * (-units::c0 * g[0][k] - jx);
            out.H.at(e, 0, k) = mui * (-units::c0 * g[2][k]);
        } else {
            out.E.at(e, 0, k) = epsi * (units::c0 * g[1][k] - jx);
            out.E.at(e, 1, k) = epsi * (-units::c0 * g[0][k] - jy);
            out.H.at(e, 0, k) = mui * (-units::c0 * (g[2][k] - g[3][k]));
        }
    }

    // ADE polarization currents
    for (int c = 0; c < em.n_e_comp; ++c)
        for (int k = 0; k < np; ++k) {
            if (kind == 0) {
                out.jp.at(e, c, k) = 0.0;
                out.pol.at(e, c, k) = 0.0;
            } else if (kind == 1) {
                out.jp.at(e, c, k) =
                    em.wp2[e] * st.E.at(e, c, k) - em.gam[e] * st.jp.at(e, c, k);
                out.pol.at(e, c, k) = 0.0;
            } else {
                out.jp.at(e, c, k) = em.wp2[e] * st.E.at(e, c, k) -
                                     em.gam[e] * st.jp.at(e, c, k) -
                                     em.wo2[e] * st.pol.at(e, c, k);
                out.pol.at(e, c, k) = st.jp.at(e, c, k);
            }
        }
}

} // namespace

void maxwell_rhs(const EMSolver& em, const EMState& state, EMState& deriv) {
    const int ne = em.sys.ops->n_elems();
    deriv.t = state.t;
#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e) rhs_elem(em, state, deriv, e);
}

void maxwell_rhs_serial(const EMSolver& em, const EMState& state, EMState& deriv) {
    const int ne = em.sys.ops->n_elems();
    deriv.t = state.t;
    for (int e = 0; e < ne; ++e) rhs_elem(em, state, deriv, e);
}

namespace {

// Carpenter-Kennedy low-storage coefficients
constexpr double kA[5] = {0.0, -567301805773.0 / 1357537059087.0,
                          -2404267990393.0 / 2016746695238.0,
                          -3550918686646.0 / 2091501179385.0,
                          -1275806237668.0 / 842570457699.0};
constexpr double kB[5] = {1432997174477.0 / 9575080441755.0,
                          5161836677717.0 / 13612068292357.0,
                          1720146321549.0 / 2090206949498.0,
                          3134564353537.0 / 4481467310338.0,
                          2277821191437.0 / 14882151754819.0};
constexpr double kC[5] = {0.0, 1432997174477.0 / 9575080441755.0,
                          2526269341429.0 / 6820363962896.0,
                          2006345519317.0 / 3224310063776.0,
                          2802321613138.0 / 2924317926251.0};

void em_check_finite(const EMState& st) {
    for (int e = 0; e < st.E.n_elems; ++e)
        for (int c = 0; c < st.E.n_comp; ++c)
            for (int i = 0; i < st.E.n_nodes; ++i)
                if (!std::isfinite(st.E.at(e, c, i)) || !std::isfinite(st.H.at(e, 0, i)))
                    throw std::runtime_error("maxwell: non-finite field in element " +
                                             std::to_string(e) + " at t = " +
                                             std::to_string(st.t) + " ps");
}

} // namespace

void lsrk54_step(const EMSolver& em, EMState& state, double dt, Lsrk54Workspace& ws,
                 bool serial) {
    if (ws.rhs.E.data.empty()) {
        ws.rhs = make_state(em);
        ws.res = make_state(em);
    }
    const double t0 = state.t;
    std::vector<double>* st[5] = {&state.E.data, &state.H.data, &state.jp.data,
                                  &state.pol.data, &state.psi.data};
    std::vector<double>* rh[5] = {&ws.rhs.E.data, &ws.rhs.H.data, &ws.rhs.jp.data,
                                  &ws.rhs.pol.data, &ws.rhs.psi.data};
    std::vector<double>* rs[5] = {&ws.res.E.data, &ws.res.H.data, &ws.res.jp.data,
                                  &ws.res.pol.data, &ws.res.psi.data};
    for (int stage = 0; stage < 5; ++stage) {
        state.t = t0 + kC[stage] * dt;
        if (serial)
            maxwell_rhs_serial(em, state, ws.rhs);
        else
            maxwell_rhs(em, state, ws.rhs);
        for (int b = 0; b < 5; ++b) {
            double* r = rs[b]->data();
            const double* k = rh[b]->data();
            double* u = st[b]->data();
            const size_t n = st[b]->size();
            for (size_t j = 0; j < n; ++j) {
                r[j] = kA[stage] * r[j] + dt * k[j];
                u[j] += kB[stage] * r[j];
            }
        }
    }
    state.t = t0 + dt;
    em_check_finite(state);
}

void lsrk54_step(std::vector<double>& y, double& t, double dt,
                 const std::function<void(const std::vector<double>&, double,
                                          std::vector<double>&)>& rhs) {
    std::vector<double> res(y.size(), 0.0), k(y.size(), 0.0);
    for (int stage = 0; stage < 5; ++stage) {
        rhs(y, t + kC[stage] * dt, k);
        for (size_t j = 0; j < y.size(); ++j) {
            res[j] = kA[stage] * res[j] + dt * k[j];
            y[j] += kB[stage] * res[j];
        }
    }
    t += dt;
}

double cfl_dt(const EMSolver& em, double cfl) {
    const Operators& ops = *em.sys.ops;
    double dt = 1e300;
    for (int e = 0; e < ops.n_elems(); ++e) {
        double fmax = 0.0;
        for (int f = 0; f < ops.ref.n_faces; ++f)
            fmax = std::max(fmax, ops.geom[e].fscale[f]);
        const double h = 2.0 / fmax;
        const double c = units::c0 / std::sqrt(em.eps_inf[e] * em.mu_r[e]);
        dt = std::min(dt, h / (c * (2 * ops.ref.order + 1)));
    }
    return cfl * dt;
}

double em_energy(const EMSolver& em, const EMState& state) {
    const Operators& ops = *em.sys.ops;
    const Dense& M = ops.ref.mass;
    const int np = em.np;
    double total = 0.0;
    for (int e = 0; e < ops.n_elems(); ++e) {
        double ee = 0.0, hh = 0.0;
        for (int a = 0; a < np; ++a)
            for (int b = 0; b < np; ++b) {
                for (int c = 0; c < em.n_e_comp; ++c)
                    ee += state.E.at(e, c, a) * M(a, b) * state.E.at(e, c, b);
                hh += state.H.at(e, 0, a) * M(a, b) * state.H.at(e, 0, b);
            }
        total += 0.5 * ops.geom[e].jac * (em.eps_inf[e] * ee + em.mu_r[e] * hh);
    }
    return total;
}

} // namespace unitcell
