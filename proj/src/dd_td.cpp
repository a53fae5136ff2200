#include "unitcell/dd_td.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "unitcell/units.hpp"

namespace unitcell {

namespace {

inline bool is_wall(const DDProblem& p, const FaceConn& fc) {
    if (fc.kind == FaceConn::Kind::boundary)
        return p.dirichlet.find(fc.tag) == p.dirichlet.end();
    return !p.active.empty() && !p.active[fc.nbr_elem];
}

// pass 1: q = grad n with the alternate scalar trace on non-owner faces
void q_pass(const DDProblem& p, const Field& n, Field& q, int e) {
    const Operators& ops = *p.ops;
    const RefElement& ref = ops.ref;
    const int np = ref.n_nodes, dim = ref.dim, nfp = ref.n_face_nodes;
    const ElemGeom& gm = ops.geom[e];

    for (int d = 0; d < dim; ++d) ops.phys_deriv(e, d, n.elem(e), q.elem(e, d));

    for (int f = 0; f < ref.n_faces; ++f) {
        const FaceConn& fc = p.conn->at(e, f);
        const auto& fn = ref.face_nodes[f];
        const double* nrm = gm.normal[f];
        const bool wall = is_wall(p, fc);
        if (fc.kind == FaceConn::Kind::boundary || wall) {
            if (wall) continue; // scalar trace from the interior
            const double n_d = p.dirichlet.at(fc.tag);
            for (int i = 0; i < nfp; ++i) {
                const double corr = n_d - n.at(e, 0, fn[i]);
                for (int a = 0; a < np; ++a) {
                    const double L = gm.fscale[f] * ref.lift(a, f * nfp + i);
                    for (int d = 0; d < dim; ++d) q.at(e, d, a) += L * nrm[d] * corr;
                }
            }
            continue;
        }
        if (fc.owner) continue; // scalar correction lives on the non-owner side
        for (int i = 0; i < nfp; ++i) {
            const double corr = n.at(fc.nbr_elem, 0, fc.nbr_nodes[i]) - n.at(e, 0, fn[i]);
            for (int a = 0; a < np; ++a) {
                const double L = gm.fscale[f] * ref.lift(a, f * nfp + i);
                for (int d = 0; d < dim; ++d) q.at(e, d, a) += L * nrm[d] * corr;
            }
        }
    }
}

// pass 2: out = div(d q + v n) + a n + s with the alternate vector trace
// on owner faces and local Lax-Friedrichs drift
void div_pass(const DDProblem& p, const Field& n, const Field& q, Field& out, int e) {
    const Operators& ops = *p.ops;
    const RefElement& ref = ops.ref;
    const int np = ref.n_nodes, dim = ref.dim, nfp = ref.n_face_nodes;
    const ElemGeom& gm = ops.geom[e];
    constexpr double DU = units::cm2s_to_um2ps;
    constexpr double VU = units::cms_to_umps;

    double flux[2][32], dflux[32];
    const double* de = p.d.elem(e);
    for (int d = 0; d < dim; ++d) {
        const double* vd = p.v.elem(e, d);
        const double* qd = q.elem(e, d);
        const double* ne = n.elem(e);
        for (int k = 0; k < np; ++k) flux[d][k] = de[k] * DU * qd[k] + vd[k] * VU * ne[k];
    }
    double* oe = out.elem(e);
    for (int d = 0; d < dim; ++d) {
        ops.phys_deriv(e, d, flux[d], dflux);
        for (int k = 0; k < np; ++k) oe[k] += dflux[k];
    }
    if (!p.reaction.data.empty())
        for (int k = 0; k < np; ++k) oe[k] += p.reaction.at(e, 0, k) * n.at(e, 0, k);
    if (!p.source.data.empty())
        for (int k = 0; k < np; ++k) oe[k] += p.source.at(e, 0, k);

    for (int f = 0; f < ref.n_faces; ++f) {
        const FaceConn& fc = p.conn->at(e, f);
        const auto& fn = ref.face_nodes[f];
        const double* nrm = gm.normal[f];
        const bool wall = is_wall(p, fc);

        for (int i = 0; i < nfp; ++i) {
            const int o = fn[i];
            double vm[2], nflux_m = 0.0, ndq_m = 0.0, vdotn_m = 0.0;
            for (int d = 0; d < dim; ++d) {
                vm[d] = p.v.at(e, d, o) * VU;
                ndq_m += nrm[d] * de[o] * DU * q.at(e, d, o);
                vdotn_m += nrm[d] * vm[d];
            }
            nflux_m = ndq_m + vdotn_m * n.at(e, 0, o);

            double corr = 0.0;
            if (fc.kind == FaceConn::Kind::boundary || wall) {
                if (wall) {
                    corr = p.f_robin - nflux_m; // prescribe the whole flux
                } else {
                    const double n_d = p.dirichlet.at(fc.tag);
                    const double tau =
                        de[o] * DU * (ref.order + 1) * (ref.order + 1) * gm.fscale[f];
                    const double drift =
                        lax_friedrichs_flux(n.at(e, 0, o), n_d, vm, vm, nrm, dim);
                    corr = -tau * (n.at(e, 0, o) - n_d) + drift - vdotn_m * n.at(e, 0, o);
                }
            } else {
                const int nb = fc.nbr_elem;
                const int nn = fc.nbr_nodes[i];
                double vp[2], ndq_p = 0.0;
                for (int d = 0; d < dim; ++d) {
                    vp[d] = p.v.at(nb, d, nn) * VU;
                    ndq_p += nrm[d] * p.d.at(nb, 0, nn) * DU * q.at(nb, d, nn);
                }
                const double drift =
                    lax_friedrichs_flux(n.at(e, 0, o), n.at(nb, 0, nn), vm, vp, nrm, dim);
                corr = drift - vdotn_m * n.at(e, 0, o);
                if (fc.owner) corr += ndq_p - ndq_m; // (d q)* from the neighbor
            }
            for (int a = 0; a < np; ++a)
                oe[a] += gm.fscale[f] * ref.lift(a, f * nfp + i) * corr;
        }
    }
}

} // namespace

void dd_apply(const DDProblem& p, const Field& n, DDApplyWork& work, Field& out,
              bool serial) {
    const Operators& ops = *p.ops;
    const int ne = ops.n_elems();
    if (p.d.n_elems != ne || p.v.n_elems != ne)
        throw std::invalid_argument("dd_apply: d and v fields must cover the mesh");
    if (p.v.n_comp != ops.ref.dim)
        throw std::invalid_argument("dd_apply: v must have one component per dimension");
    if (work.q.n_elems != ne) work.q = Field("q", ne, ops.n_nodes(), ops.ref.dim);
    std::fill(work.q.data.begin(), work.q.data.end(), 0.0);
    std::fill(out.data.begin(), out.data.end(), 0.0);

    auto active = [&](int e) { return p.active.empty() || p.active[e]; };
    if (serial) {
        for (int e = 0; e < ne; ++e)
            if (active(e)) q_pass(p, n, work.q, e);
        for (int e = 0; e < ne; ++e)
            if (active(e)) div_pass(p, n, work.q, out, e);
    } else {
#pragma omp parallel for schedule(static)
        for (int e = 0; e < ne; ++e)
            if (active(e)) q_pass(p, n, work.q, e);
#pragma omp parallel for schedule(static)
        for (int e = 0; e < ne; ++e)
            if (active(e)) div_pass(p, n, work.q, out, e);
    }
}

CarrierState make_carrier_state(const TransientDevice& dev) {
    const int ne = dev.ops->n_elems(), np = dev.ops->n_nodes();
    CarrierState st;
    st.n_e = Field("n_e", ne, np, 1);
    st.n_h = Field("n_h", ne, np, 1);
    return st;
}

namespace {

void prepare_problem(const TransientDevice& dev, DDProblem& p,
                     const std::map<BoundaryTag, double>& dirichlet) {
    const int ne = dev.ops->n_elems(), np = dev.ops->n_nodes(), dim = dev.ops->ref.dim;
    p.ops = dev.ops;
    p.conn = dev.conn;
    p.d = Field("d", ne, np, 1);
    p.v = Field("v", ne, np, dim);
    p.source = Field("s", ne, np, 1);
    p.dirichlet = dirichlet;
    p.active = dev.semiconductor;
}

} // namespace

void dd_rhs(const TransientDevice& dev, const CarrierState& state, const Field& e_total,
            const Field* generation, CarrierState& deriv, TransientWork& work,
            bool serial) {
    const Operators& ops = *dev.ops;
    const int ne = ops.n_elems(), np = ops.n_nodes(), dim = ops.ref.dim;
    const SemiconductorParams& sp = dev.semi;
    if (e_total.n_comp != dim)
        throw std::invalid_argument("dd_rhs: e_total must have one component per dimension");
    if (!work.ready) {
        prepare_problem(dev, work.pe, dev.contacts_e);
        prepare_problem(dev, work.ph, dev.contacts_h);
        work.ready = true;
    }
    auto in_sem = [&](int e) { return dev.semiconductor.empty() || dev.semiconductor[e]; };

    for (int e = 0; e < ne; ++e) {
        if (!in_sem(e)) continue;
        for (int i = 0; i < np; ++i) {
            double emag = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double c = e_total.at(e, d, i);
                emag += c * c;
            }
            emag = std::sqrt(emag) * units::Vum_to_Vcm;
            double mu_e, mu_h;
            if (dev.mobility_instantaneous) {
                mu_e = mobility(sp.mu0_e, sp.vsat_e, sp.beta_e, emag);
                mu_h = mobility(sp.mu0_h, sp.vsat_h, sp.beta_h, emag);
            } else {
                mu_e = dev.mu_e_frozen.at(e, 0, i);
                mu_h = dev.mu_h_frozen.at(e, 0, i);
            }
            work.pe.d.at(e, 0, i) = mu_e * sp.thermal_voltage;
            work.ph.d.at(e, 0, i) = mu_h * sp.thermal_voltage;
            for (int d = 0; d < dim; ++d) {
                const double e_cm = e_total.at(e, d, i) * units::Vum_to_Vcm;
                work.pe.v.at(e, d, i) = mu_e * e_cm;
                work.ph.v.at(e, d, i) = -mu_h * e_cm;
            }
            const double r = recombination(state.n_e.at(e, 0, i), state.n_h.at(e, 0, i), sp);
            const double g = generation ? generation->at(e, 0, i) : 0.0;
            work.pe.source.at(e, 0, i) = g - r;
            work.ph.source.at(e, 0, i) = g - r;
        }
    }
    dd_apply(work.pe, state.n_e, work.qwork, deriv.n_e, serial);
    dd_apply(work.ph, state.n_h, work.qwork, deriv.n_h, serial);
    deriv.t = state.t;
}

namespace {

void dd_check_finite(const CarrierState& st) {
    for (int e = 0; e < st.n_e.n_elems; ++e)
        for (int i = 0; i < st.n_e.n_nodes; ++i)
            if (!std::isfinite(st.n_e.at(e, 0, i)) || !std::isfinite(st.n_h.at(e, 0, i)))
                throw std::runtime_error("dd: non-finite density in element " +
                                         std::to_string(e) + " at t = " +
                                         std::to_string(st.t) + " ps");
}

} // namespace

void tvdrk3_step(const TransientDevice& dev, CarrierState& state, const Field& e_total,
                 const Field* generation, double dt, TransientWork& work, bool serial) {
    if (work.u1.n_e.data.empty()) {
        work.u1 = make_carrier_state(dev);
        work.u2 = make_carrier_state(dev);
        work.k = make_carrier_state(dev);
    }
    auto axpy3 = [](Field& out, double a, const Field& x, double b, const Field& y, double c,
                    const Field& z) {
        for (size_t j = 0; j < out.data.size(); ++j)
            out.data[j] = a * x.data[j] + b * y.data[j] + c * z.data[j];
    };
    const double t0 = state.t;

    dd_rhs(dev, state, e_total, generation, work.k, work, serial);
    axpy3(work.u1.n_e, 1.0, state.n_e, dt, work.k.n_e, 0.0, state.n_e);
    axpy3(work.u1.n_h, 1.0, state.n_h, dt, work.k.n_h, 0.0, state.n_h);
    work.u1.t = t0 + dt;

    dd_rhs(dev, work.u1, e_total, generation, work.k, work, serial);
    axpy3(work.u2.n_e, 0.75, state.n_e, 0.25, work.u1.n_e, 0.25 * dt, work.k.n_e);
    axpy3(work.u2.n_h, 0.75, state.n_h, 0.25, work.u1.n_h, 0.25 * dt, work.k.n_h);
    work.u2.t = t0 + 0.5 * dt;

    dd_rhs(dev, work.u2, e_total, generation, work.k, work, serial);
    const double c13 = 1.0 / 3.0, c23 = 2.0 / 3.0;
    axpy3(state.n_e, c13, state.n_e, c23, work.u2.n_e, c23 * dt, work.k.n_e);
    axpy3(state.n_h, c13, state.n_h, c23, work.u2.n_h, c23 * dt, work.k.n_h);
    state.t = t0 + dt;
    dd_check_finite(state);
}

void tvdrk3_step(std::vector<double>& y, double& t, double dt,
                 const std::function<void(const std::vector<double>&, double,
                                          std::vector<double>&)>& rhs) {
    const size_t n = y.size();
    std::vector<double> k(n), u1(n), u2(n);
    rhs(y, t, k);
    for (size_t j = 0; j < n; ++j) u1[j] = y[j] + dt * k[j];
    rhs(u1, t + dt, k);
    for (size_t j = 0; j < n; ++j) u2[j] = 0.75 * y[j] + 0.25 * (u1[j] + dt * k[j]);
    rhs(u2, t + 0.5 * dt, k);
    for (size_t j = 0; j < n; ++j) y[j] = y[j] / 3.0 + 2.0 / 3.0 * (u2[j] + dt * k[j]);
    t += dt;
}

} // namespace unitcell
