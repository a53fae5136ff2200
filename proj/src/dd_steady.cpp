#include "unitcell/dd_steady.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <optional>
#include <stdexcept>

#include "unitcell/log.hpp"
#include "unitcell/units.hpp"

namespace unitcell {

double lax_friedrichs_flux(double n_minus, double n_plus, const double* v_minus,
                           const double* v_plus, const double* normal, int dim) {
    double vm = 0.0, vp = 0.0;
    for (int d = 0; d < dim; ++d) {
        vm += normal[d] * v_minus[d];
        vp += normal[d] * v_plus[d];
    }
    const double alpha = 0.5 * std::max(std::fabs(vm), std::fabs(vp));
    return 0.5 * (vm * n_minus + vp * n_plus) + alpha * (n_minus - n_plus);
}

DDSystem assemble_dd(const DDProblem& problem) {
    const Operators& ops = *problem.ops;
    const Connectivity& conn = *problem.conn;
    const RefElement& ref = ops.ref;
    const int ne = ops.n_elems();
    const int np = ref.n_nodes;
    const int dim = ref.dim;
    const int nfp = ref.n_face_nodes;
    const int bs = np * (1 + dim);

    if (problem.d.n_elems != ne || problem.v.n_elems != ne)
        throw std::invalid_argument("dd: d and v fields must cover the mesh");
    if (problem.v.n_comp != dim)
        throw std::invalid_argument("dd: v must have one component per dimension");

    DDSystem sys;
    sys.np = np;
    sys.dim = dim;
    sys.index.assign(ne, -1);
    for (int e = 0; e < ne; ++e) {
        if (!problem.active.empty() && !problem.active[e]) continue;
        sys.index[e] = int(sys.elems.size());
        sys.elems.push_back(e);
    }
    const int na = int(sys.elems.size());
    if (na == 0) throw std::invalid_argument("dd: no active elements");

    std::vector<std::vector<int>> adj(na);
    for (int b = 0; b < na; ++b) {
        const int e = sys.elems[b];
        for (int f = 0; f < ref.n_faces; ++f) {
            const FaceConn& fc = conn.at(e, f);
            if (fc.kind == FaceConn::Kind::boundary) {
                if (fc.tag == BoundaryTag::none)
                    throw std::runtime_error("dd: boundary face without a tag");
                continue;
            }
            if (sys.index[fc.nbr_elem] >= 0) adj[b].push_back(sys.index[fc.nbr_elem]);
        }
    }
    sys.A = SparseBlockMatrix(na, bs, adj);
    sys.rhs.assign(size_t(na) * bs, 0.0);

    const Dense emat = ref.mass * ref.lift;
    const bool has_a = !problem.reaction.data.empty();
    const bool has_s = !problem.source.data.empty();
    constexpr double DU = units::cm2s_to_um2ps;
    constexpr double VU = units::cms_to_umps;

#pragma omp parallel for schedule(static)
    for (int b = 0; b < na; ++b) {
        const int e = sys.elems[b];
        const ElemGeom& gm = ops.geom[e];
        const double J = gm.jac;
        const int diag = sys.A.find(b, b);
        double* B = sys.A.block(diag);
        double* rhs_e = sys.rhs.data() + size_t(b) * bs;
        const double* de = problem.d.elem(e);
        const double* ve[2] = {problem.v.elem(e, 0),
                               dim > 1 ? problem.v.elem(e, 1) : nullptr};

        // volume terms
        for (int d = 0; d < dim; ++d) {
            const int row0 = (1 + d) * np;
            for (int a = 0; a < np; ++a)
                for (int k = 0; k < np; ++k) {
                    double mdk = 0.0;
                    for (int kk = 0; kk < np; ++kk) {
                        double dd = 0.0;
                        for (int r = 0; r < dim; ++r)
                            dd += gm.drdx[r][d] * ref.diff[r](kk, k);
                        mdk += ref.mass(a, kk) * dd;
                    }
                    mdk *= J;
                    // q_d rows: J M q_d - J M D_d n = 0
                    B[(row0 + a) * bs + row0 + k] += J * ref.mass(a, k);
                    B[(row0 + a) * bs + k] -= mdk;
                    // n rows: J M D_d (d q_d) + J M D_d (v_d n)
                    B[a * bs + row0 + k] += mdk * de[k] * DU;
                    B[a * bs + k] += mdk * ve[d][k] * VU;
                }
        }
        for (int a = 0; a < np; ++a)
            for (int k = 0; k < np; ++k) {
                if (has_a) B[a * bs + k] += J * ref.mass(a, k) * problem.reaction.elem(e)[k];
                if (has_s) rhs_e[a] += J * ref.mass(a, k) * problem.source.elem(e)[k];
            }

        // face terms
        for (int f = 0; f < ref.n_faces; ++f) {
            const FaceConn& fc = conn.at(e, f);
            const auto& fn = ref.face_nodes[f];
            const double sj = gm.sjac[f];
            const double* nrm = gm.normal[f];
            const bool wall = fc.kind == FaceConn::Kind::boundary
                                  ? problem.dirichlet.find(fc.tag) == problem.dirichlet.end()
                                  : sys.index[fc.nbr_elem] < 0;

            if (fc.kind == FaceConn::Kind::boundary || wall) {
                if (wall) {
                    // Robin n.(dq + vn) = f_R: prescribe the whole flux
                    for (int a = 0; a < np; ++a)
                        for (int i = 0; i < nfp; ++i) {
                            const double base = sj * emat(a, f * nfp + i);
                            double vn = 0.0;
                            for (int d = 0; d < dim; ++d) {
                                B[a * bs + (1 + d) * np + fn[i]] -=
                                    base * nrm[d] * de[fn[i]] * DU;
                                vn += nrm[d] * ve[d][fn[i]] * VU;
                            }
                            B[a * bs + fn[i]] -= base * vn;
                            rhs_e[a] -= base * problem.f_robin;
                        }
                } else {
                    // Dirichlet density: scalar trace prescribed (with
                    // penalty), drift flux upwinded against the contact value
                    const double n_d = problem.dirichlet.at(fc.tag);
                    for (int a = 0; a < np; ++a)
                        for (int i = 0; i < nfp; ++i) {
                            const double base = sj * emat(a, f * nfp + i);
                            const double tau = de[fn[i]] * DU * (ref.order + 1) *
                                               (ref.order + 1) * gm.fscale[f];
                            for (int d = 0; d < dim; ++d) {
                                const double c = base * nrm[d];
                                const int row = ((1 + d) * np + a) * bs;
                                // q rows carry -(n* - n^-)
                                B[row + fn[i]] += c;
                                rhs_e[(1 + d) * np + a] += c * n_d;
                            }
                            // dissipative orientation for the +div(d grad n)
                            // operator: the n residual gains -tau (n^- - n_D)
                            B[a * bs + fn[i]] -= base * tau;
                            rhs_e[a] -= base * tau * n_d;
                            double vn = 0.0;
                            for (int d = 0; d < dim; ++d) vn += nrm[d] * ve[d][fn[i]] * VU;
                            const double alpha = 0.5 * std::fabs(vn);
                            B[a * bs + fn[i]] += base * (alpha - 0.5 * vn);
                            rhs_e[a] -= base * (0.5 * vn - alpha) * n_d;
                        }
                }
                continue;
            }

            const int nb = fc.nbr_elem;
            double* Bn = sys.A.block(sys.A.find(b, sys.index[nb]));
            const double* dn = problem.d.elem(nb);
            const double* vn_e[2] = {problem.v.elem(nb, 0),
                                     dim > 1 ? problem.v.elem(nb, 1) : nullptr};

            for (int a = 0; a < np; ++a)
                for (int i = 0; i < nfp; ++i) {
                    const double base = sj * emat(a, f * nfp + i);
                    const int own = fn[i], nbn = fc.nbr_nodes[i];
                    if (fc.owner) {
                        // diffusion vector correction n.(dq)^+ - n.(dq)^-
                        for (int d = 0; d < dim; ++d) {
                            const double c = base * nrm[d];
                            Bn[a * bs + (1 + d) * np + nbn] += c * dn[nbn] * DU;
                            B[a * bs + (1 + d) * np + own] -= c * de[own] * DU;
                        }
                    } else {
                        // diffusion scalar correction -(n^+ - n^-) on q rows
                        for (int d = 0; d < dim; ++d) {
                            const double c = base * nrm[d];
                            const int row = ((1 + d) * np + a) * bs;
                            Bn[row + nbn] -= c;
                            B[row + own] += c;
                        }
                    }
                    // two-sided Lax-Friedrichs drift correction
                    double vm = 0.0, vp = 0.0;
                    for (int d = 0; d < dim; ++d) {
                        vm += nrm[d] * ve[d][own] * VU;
                        vp += nrm[d] * vn_e[d][nbn] * VU;
                    }
                    const double alpha = 0.5 * std::max(std::fabs(vm), std::fabs(vp));
                    B[a * bs + own] += base * (alpha - 0.5 * vm);
                    Bn[a * bs + nbn] += base * (0.5 * vp - alpha);
                }
        }
    }
    return sys;
}

DDSolution solve_dd(const DDProblem& problem, const DDSystem& system,
                    const GmresOptions& opts, const BlockILU0* precond,
                    const std::vector<double>* x0) {
    const int np = system.np;
    const int dim = system.dim;
    const int bs = np * (1 + dim);
    const int na = int(system.elems.size());

    std::vector<double> x(size_t(na) * bs, 0.0);
    if (x0) x = *x0;

    std::optional<BlockILU0> local_ilu;
    if (!precond) local_ilu.emplace(system.A);
    const BlockILU0* pc = precond ? precond : &*local_ilu;

    DDSolution sol;
    sol.stats = gmres(system.A, pc, system.rhs.data(), x.data(), opts);
    if (!sol.stats.converged)
        log::warn("dd solve: gmres stopped at rel residual %.3e after %d iterations",
                  sol.stats.relative_residual, sol.stats.iterations);

    const int ne = problem.ops->n_elems();
    sol.n = Field("n", ne, np, 1);
    sol.q = Field("q", ne, np, dim);
    for (int b = 0; b < na; ++b) {
        const int e = system.elems[b];
        const double* xe = x.data() + size_t(b) * bs;
        std::memcpy(sol.n.elem(e), xe, sizeof(double) * np);
        for (int d = 0; d < dim; ++d)
            std::memcpy(sol.q.elem(e, d), xe + (1 + d) * np, sizeof(double) * np);
    }
    return sol;
}

ContactDensities equilibrium_contact_densities(double C, double n_i) {
    if (!(n_i > 0.0)) throw std::invalid_argument("equilibrium densities need n_i > 0");
    // solve the majority carrier to avoid cancellation for |C| >> n_i
    ContactDensities out;
    const double root = std::sqrt(C * C + 4.0 * n_i * n_i);
    if (C >= 0.0) {
        out.n_e = 0.5 * (C + root);
        out.n_h = n_i * n_i / out.n_e;
    } else {
        out.n_h = 0.5 * (-C + root);
        out.n_e = n_i * n_i / out.n_h;
    }
    return out;
}

double contact_potential(double V_el, double n_e_surface, double n_i, double V_T) {
    if (!(n_e_surface > 0.0) || !(n_i > 0.0))
        throw std::invalid_argument("contact potential needs positive densities");
    return V_el + V_T * std::log(n_e_surface / n_i);
}

namespace {

// max nodal update relative to the field's own scale
double rel_update(const Field& now, const Field& prev, const std::vector<char>& mask) {
    double scale = 0.0, diff = 0.0;
    for (int e = 0; e < now.n_elems; ++e) {
        if (!mask.empty() && !mask[e]) continue;
        for (int i = 0; i < now.n_nodes; ++i) {
            scale = std::max(scale, std::fabs(now.at(e, 0, i)));
            diff = std::max(diff, std::fabs(now.at(e, 0, i) - prev.at(e, 0, i)));
        }
    }
    return scale > 0.0 ? diff / scale : diff;
}

} // namespace

SteadyState gummel_solve(const Device& device, const GummelOptions& opts) {
    const Operators& ops = *device.ops;
    const int ne = ops.n_elems();
    const int np = ops.n_nodes();
    const int dim = ops.ref.dim;
    const SemiconductorParams& sp = device.semi;
    const double VT = sp.thermal_voltage;

    if (device.doping.n_elems != ne)
        throw std::invalid_argument("gummel: doping field must cover the mesh");

    SteadyState st;
    st.n_e = Field("n_e", ne, np, 1);
    st.n_h = Field("n_h", ne, np, 1);
    st.phi = Field("phi", ne, np, 1);
    st.E = Field("E", ne, np, dim);

    const std::vector<char>& mask = device.semiconductor;
    auto in_sem = [&](int e) { return mask.empty() || mask[e]; };

    for (int e = 0; e < ne; ++e) {
        if (!in_sem(e)) continue;
        for (int i = 0; i < np; ++i) {
            auto eq = equilibrium_contact_densities(device.doping.at(e, 0, i), sp.n_intrinsic);
            st.n_e.at(e, 0, i) = eq.n_e;
            st.n_h.at(e, 0, i) = eq.n_h;
            st.phi.at(e, 0, i) = VT * std::log(eq.n_e / sp.n_intrinsic);
        }
    }
    const double phi_pin = st.phi.at(0, 0, 0);

    // contact data from the local doping at each electrode
    struct ContactData {
        double phi_d, n_e, n_h;
    };
    std::map<BoundaryTag, ContactData> contact_data;
    for (const Contact& c : device.contacts) {
        double C = 0.0;
        bool found = false;
        for (int e = 0; e < ne && !found; ++e)
            for (int f = 0; f < ops.ref.n_faces && !found; ++f)
                if (device.conn->at(e, f).kind == FaceConn::Kind::boundary &&
                    device.conn->at(e, f).tag == c.tag) {
                    C = device.doping.at(e, 0, ops.ref.face_nodes[f][0]);
                    found = true;
                }
        if (!found) throw std::invalid_argument("gummel: contact tag has no boundary faces");
        auto eq = equilibrium_contact_densities(C, sp.n_intrinsic);
        contact_data[c.tag] = {contact_potential(c.v_el, eq.n_e, sp.n_intrinsic, VT), eq.n_e,
                               eq.n_h};
    }

    PoissonProblem pp;
    pp.ops = device.ops;
    pp.conn = device.conn;
    pp.eps = device.eps;
    pp.phi_drop = device.phi_drop;
    for (auto& [tag, cd] : contact_data) pp.dirichlet[tag] = cd.phi_d;
    pp.pin_node = device.contacts.empty();
    pp.pin_value = phi_pin;
    pp.g = Field("g", ne, np, 1);
    pp.f = Field("f", ne, np, 1);

    DDProblem dp_e, dp_h;
    for (DDProblem* dp : {&dp_e, &dp_h}) {
        dp->ops = device.ops;
        dp->conn = device.conn;
        dp->d = Field("d", ne, np, 1);
        dp->v = Field("v", ne, np, dim);
        dp->reaction = Field("a", ne, np, 1);
        dp->source = Field("s", ne, np, 1);
        dp->active = mask;
    }
    for (auto& [tag, cd] : contact_data) {
        dp_e.dirichlet[tag] = cd.n_e;
        dp_h.dirichlet[tag] = cd.n_h;
    }

    std::optional<BlockILU0> ilu_p, ilu_e, ilu_h;
    int first_iters_p = 0, first_iters_e = 0, first_iters_h = 0;
    std::vector<double> xp, xe, xh; // warm starts in system layout
    Field phi_prev = st.phi, ne_prev = st.n_e, nh_prev = st.n_h;

    const bool has_gen = !device.generation.data.empty();

    for (int it = 1; it <= opts.max_iter; ++it) {
        // linearized Poisson about the previous iterate
        for (int e = 0; e < ne; ++e)
            for (int i = 0; i < np; ++i) {
                const double sum = st.n_e.at(e, 0, i) + st.n_h.at(e, 0, i);
                const double rho =
                    device.doping.at(e, 0, i) + st.n_h.at(e, 0, i) - st.n_e.at(e, 0, i);
                const double g = in_sem(e) ? units::QN * sum / VT : 0.0;
                pp.g.at(e, 0, i) = g;
                pp.f.at(e, 0, i) = (in_sem(e) ? units::QN * rho : 0.0) + g * st.phi.at(e, 0, i);
            }
        auto psys = assemble(pp);
        if (!ilu_p) {
            ilu_p.emplace(psys.A);
            xp.assign(psys.rhs.size(), 0.0);
        }
        auto psol = solve(pp, psys, opts.linear, &*ilu_p, &xp);
        if (psol.stats.iterations > 2 * std::max(first_iters_p, 10)) {
            ilu_p->factor(psys.A);
            psol = solve(pp, psys, opts.linear, &*ilu_p, &xp);
        }
        if (it == 1) first_iters_p = psol.stats.iterations;
        int lin_iters = psol.stats.iterations;
        st.phi = psol.phi;
        st.E = psol.E;
        for (int e = 0; e < ne; ++e) {
            double* dst = xp.data() + size_t(e) * np * (1 + dim);
            std::memcpy(dst, st.phi.elem(e), sizeof(double) * np);
            for (int d = 0; d < dim; ++d)
                std::memcpy(dst + (1 + d) * np, st.E.elem(e, d), sizeof(double) * np);
        }

        // transport coefficients from the fresh field
        for (int e = 0; e < ne; ++e) {
            if (!in_sem(e)) continue;
            for (int i = 0; i < np; ++i) {
                double emag = 0.0;
                for (int d = 0; d < dim; ++d) {
                    const double c = st.E.at(e, d, i);
                    emag += c * c;
                }
                emag = std::sqrt(emag) * units::Vum_to_Vcm; // V/cm
                const double mu_e = mobility(sp.mu0_e, sp.vsat_e, sp.beta_e, emag);
                const double mu_h = mobility(sp.mu0_h, sp.vsat_h, sp.beta_h, emag);
                dp_e.d.at(e, 0, i) = mu_e * VT;
                dp_h.d.at(e, 0, i) = mu_h * VT;
                for (int d = 0; d < dim; ++d) {
                    const double e_cm = st.E.at(e, d, i) * units::Vum_to_Vcm;
                    dp_e.v.at(e, d, i) = mu_e * e_cm;
                    dp_h.v.at(e, d, i) = -mu_h * e_cm;
                }
            }
        }

        // recombination linearized in the carrier being solved
        auto fill_rx = [&](DDProblem& dp, int carrier) {
            for (int e = 0; e < ne; ++e) {
                if (!in_sem(e)) continue;
                for (int i = 0; i < np; ++i) {
                    const double a = st.n_e.at(e, 0, i), b = st.n_h.at(e, 0, i);
                    const double r0 = recombination(a, b, sp);
                    const double rp = recombination_deriv(a, b, sp, carrier);
                    const double n0 = carrier == 0 ? a : b;
                    dp.reaction.at(e, 0, i) = -rp;
                    dp.source.at(e, 0, i) =
                        r0 - rp * n0 - (has_gen ? device.generation.at(e, 0, i) : 0.0);
                }
            }
        };

        auto carrier_step = [&](DDProblem& dp, Field& n_field, std::optional<BlockILU0>& ilu,
                                int& first_iters, std::vector<double>& warm) {
            auto sys = assemble_dd(dp);
            if (!ilu) {
                ilu.emplace(sys.A);
                warm.assign(sys.rhs.size(), 0.0);
            }
            auto sol = solve_dd(dp, sys, opts.linear, &*ilu, &warm);
            if (sol.stats.iterations > 2 * std::max(first_iters, 10)) {
                ilu->factor(sys.A);
                sol = solve_dd(dp, sys, opts.linear, &*ilu, &warm);
            }
            if (first_iters == 0) first_iters = sol.stats.iterations;
            lin_iters += sol.stats.iterations;
            for (int b = 0; b < int(sys.elems.size()); ++b) {
                const int e = sys.elems[b];
                double* dst = warm.data() + size_t(b) * np * (1 + dim);
                std::memcpy(dst, sol.n.elem(e), sizeof(double) * np);
                for (int d = 0; d < dim; ++d)
                    std::memcpy(dst + (1 + d) * np, sol.q.elem(e, d), sizeof(double) * np);
            }
            for (int e = 0; e < ne; ++e) {
                if (!in_sem(e)) continue;
                for (int i = 0; i < np; ++i) {
                    double v = sol.n.at(e, 0, i);
                    if (v < 0.0) {
                        v = 0.0;
                        ++st.negative_clips;
                    }
                    n_field.at(e, 0, i) =
                        n_field.at(e, 0, i) + opts.relax * (v - n_field.at(e, 0, i));
                }
            }
        };

        fill_rx(dp_e, 0);
        carrier_step(dp_e, st.n_e, ilu_e, first_iters_e, xe);
        fill_rx(dp_h, 1);
        carrier_step(dp_h, st.n_h, ilu_h, first_iters_h, xh);

        GummelHistoryRow row;
        row.iteration = it;
        row.d_phi = rel_update(st.phi, phi_prev, {});
        row.d_ne = rel_update(st.n_e, ne_prev, mask);
        row.d_nh = rel_update(st.n_h, nh_prev, mask);
        row.linear_iterations = lin_iters;
        st.history.push_back(row);
        st.iterations = it;
        log::debug("gummel it %d: dphi %.3e dne %.3e dnh %.3e", it, row.d_phi, row.d_ne,
                   row.d_nh);

        phi_prev = st.phi;
        ne_prev = st.n_e;
        nh_prev = st.n_h;
        if (std::max({row.d_phi, row.d_ne, row.d_nh}) < opts.tol) {
            st.converged = true;
            break;
        }
    }
    if (!st.converged)
        log::warn("gummel: not converged after %d iterations", st.iterations);
    if (st.negative_clips > 0)
        log::warn("gummel: clipped %d negative density values", st.negative_clips);
    return st;
}

void write_convergence_csv(const SteadyState& state, const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "iteration,d_phi,d_ne,d_nh,linear_iterations\n");
    for (const auto& r : state.history)
        std::fprintf(f, "%d,%.12e,%.12e,%.12e,%d\n", r.iteration, r.d_phi, r.d_ne, r.d_nh,
                     r.linear_iterations);
    std::fclose(f);
}

} // namespace unitcell
