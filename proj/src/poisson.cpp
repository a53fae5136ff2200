#include "unitcell/poisson.hpp"

#include <cstring>
#include <optional>
#include <stdexcept>

#include "unitcell/log.hpp"

namespace unitcell {

AltFlux alternate_flux(double u_minus, double u_plus, const double* w_minus,
                       const double* w_plus, const double* normal, int beta_sign, int dim) {
    AltFlux out;
    out.u_star = 0.5 * (u_minus + u_plus) + 0.5 * beta_sign * (u_minus - u_plus);
    double njump = 0.0;
    for (int d = 0; d < dim; ++d) njump += normal[d] * (w_minus[d] - w_plus[d]);
    for (int d = 0; d < dim; ++d)
        out.w_star[d] = 0.5 * (w_minus[d] + w_plus[d]) - 0.5 * beta_sign * normal[d] * njump;
    return out;
}

BlockSystem assemble(const PoissonProblem& problem) {
    const Operators& ops = *problem.ops;
    const Connectivity& conn = *problem.conn;
    const RefElement& ref = ops.ref;
    const int ne = ops.n_elems();
    const int np = ref.n_nodes;
    const int dim = ref.dim;
    const int nfp = ref.n_face_nodes;
    const int bs = np * (1 + dim);

    if (int(problem.eps.size()) != ne)
        throw std::invalid_argument("poisson: eps must have one entry per element");
    for (double e : problem.eps)
        if (!(e > 0.0)) throw std::invalid_argument("poisson: eps must be positive");

    std::vector<std::vector<int>> adj(ne);
    for (int e = 0; e < ne; ++e)
        for (int f = 0; f < ref.n_faces; ++f) {
            const FaceConn& fc = conn.at(e, f);
            if (fc.kind != FaceConn::Kind::boundary)
                adj[e].push_back(fc.nbr_elem);
            else if (fc.tag == BoundaryTag::none)
                throw std::runtime_error("poisson: boundary face without a tag");
        }

    BlockSystem sys;
    sys.np = np;
    sys.dim = dim;
    sys.A = SparseBlockMatrix(ne, bs, adj);
    sys.rhs.assign(size_t(ne) * bs, 0.0);

    // face-mass extraction operator: Emat = M * lift, column f*nfp+i pairs
    // volume rows with trace node i of face f on the reference element
    const Dense emat = ref.mass * ref.lift;
    const bool has_g = !problem.g.data.empty();
    const bool has_f = !problem.f.data.empty();

#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e) {
        const ElemGeom& gm = ops.geom[e];
        const double J = gm.jac;
        const double eps_e = problem.eps[e];
        const int diag = sys.A.find(e, e);
        double* B = sys.A.block(diag);
        double* rhs_e = sys.rhs.data() + size_t(e) * bs;

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
                    // E_d rows: J M E_d + J M D_d phi = 0
                    B[(row0 + a) * bs + row0 + k] += J * ref.mass(a, k);
                    B[(row0 + a) * bs + k] += mdk;
                    // phi rows: J M D_d (eps E_d)
                    B[a * bs + row0 + k] += mdk * eps_e;
                }
        }
        for (int a = 0; a < np; ++a)
            for (int k = 0; k < np; ++k) {
                if (has_g) B[a * bs + k] += J * ref.mass(a, k) * problem.g.elem(e)[k];
                if (has_f) rhs_e[a] += J * ref.mass(a, k) * problem.f.elem(e)[k];
            }

        // face terms
        for (int f = 0; f < ref.n_faces; ++f) {
            const FaceConn& fc = conn.at(e, f);
            const auto& fn = ref.face_nodes[f];
            const double sj = gm.sjac[f];
            const double* nrm = gm.normal[f];

            if (fc.kind == FaceConn::Kind::boundary) {
                auto dit = problem.dirichlet.find(fc.tag);
                if (dit != problem.dirichlet.end()) {
                    // scalar correction (phi_D - phi^-) on the E rows, and a
                    // penalty tau (phi^- - phi_D) added to the vector flux:
                    // the one-sided pairing alone is rank deficient at a
                    // Dirichlet face
                    const double phi_d = dit->second;
                    const double tau =
                        eps_e * (ref.order + 1) * (ref.order + 1) * gm.fscale[f];
                    for (int a = 0; a < np; ++a)
                        for (int i = 0; i < nfp; ++i) {
                            const double base = sj * emat(a, f * nfp + i);
                            for (int d = 0; d < dim; ++d) {
                                const double c = base * nrm[d];
                                const int row = ((1 + d) * np + a) * bs;
                                B[row + fn[i]] -= c;
                                rhs_e[(1 + d) * np + a] -= c * phi_d;
                            }
                            B[a * bs + fn[i]] += base * tau;
                            rhs_e[a] += base * tau * phi_d;
                        }
                } else {
                    // Neumann: vector correction (f_N - n.(eps E)^-) on phi rows
                    for (int a = 0; a < np; ++a)
                        for (int i = 0; i < nfp; ++i) {
                            const double base = sj * emat(a, f * nfp + i);
                            for (int d = 0; d < dim; ++d)
                                B[a * bs + (1 + d) * np + fn[i]] -= base * nrm[d] * eps_e;
                            rhs_e[a] -= base * problem.f_neumann;
                        }
                }
                continue;
            }

            const int nb = fc.nbr_elem;
            double* Bn = sys.A.block(sys.A.find(e, nb));

            if (fc.owner) {
                // vector correction (n.(eps E)^+ - n.(eps E)^-) on phi rows
                const double eps_n = problem.eps[nb];
                for (int a = 0; a < np; ++a)
                    for (int i = 0; i < nfp; ++i) {
                        const double base = sj * emat(a, f * nfp + i);
                        for (int d = 0; d < dim; ++d) {
                            const double c = base * nrm[d];
                            Bn[a * bs + (1 + d) * np + fc.nbr_nodes[i]] += c * eps_n;
                            B[a * bs + (1 + d) * np + fn[i]] -= c * eps_e;
                        }
                    }
            } else {
                // scalar correction (phi^+ - phi^-) on E rows
                double drop = 0.0;
                if (fc.kind == FaceConn::Kind::paired) {
                    if (fc.tag == BoundaryTag::x_min) drop = problem.phi_drop;
                    if (fc.tag == BoundaryTag::x_max) drop = -problem.phi_drop;
                }
                for (int a = 0; a < np; ++a)
                    for (int i = 0; i < nfp; ++i) {
                        const double base = sj * emat(a, f * nfp + i);
                        for (int d = 0; d < dim; ++d) {
                            const double c = base * nrm[d];
                            const int row = ((1 + d) * np + a) * bs;
                            Bn[row + fc.nbr_nodes[i]] += c;
                            B[row + fn[i]] -= c;
                            rhs_e[(1 + d) * np + a] -= c * drop;
                        }
                    }
            }
        }
    }

    if (problem.pin_node) {
        // fix the additive constant: replace the first phi equation
        for (int k = sys.A.row_ptr()[0]; k < sys.A.row_ptr()[1]; ++k) {
            double* b = sys.A.block(k);
            for (int j = 0; j < bs; ++j) b[j] = 0.0;
        }
        sys.A.at(0, 0, 0, 0) = 1.0;
        sys.rhs[0] = problem.pin_value;
    }
    return sys;
}

PoissonSolution solve(const PoissonProblem& problem, const BlockSystem& system,
                      const GmresOptions& opts, const BlockILU0* precond,
                      const std::vector<double>* x0) {
    const int ne = problem.ops->n_elems();
    const int np = system.np;
    const int dim = system.dim;
    const int bs = np * (1 + dim);

    std::vector<double> x(size_t(ne) * bs, 0.0);
    if (x0) x = *x0;

    std::optional<BlockILU0> local_ilu;
    if (!precond) local_ilu.emplace(system.A);
    const BlockILU0* pc = precond ? precond : &*local_ilu;

    PoissonSolution sol;
    sol.stats = gmres(system.A, pc, system.rhs.data(), x.data(), opts);
    if (!sol.stats.converged)
        log::warn("poisson solve: gmres stopped at rel residual %.3e after %d iterations",
                  sol.stats.relative_residual, sol.stats.iterations);

    sol.phi = Field("phi", ne, np, 1);
    sol.E = Field("E", ne, np, dim);
    for (int e = 0; e < ne; ++e) {
        const double* xe = x.data() + size_t(e) * bs;
        std::memcpy(sol.phi.elem(e), xe, sizeof(double) * np);
        for (int d = 0; d < dim; ++d)
            std::memcpy(sol.E.elem(e, d), xe + (1 + d) * np, sizeof(double) * np);
    }
    return sol;
}

} // namespace unitcell
