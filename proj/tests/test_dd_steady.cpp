#include "doctest.h"

#include <cmath>
#include <vector>

#include "unitcell/dd_steady.hpp"
#include "unitcell/units.hpp"

using namespace unitcell;

namespace {

struct Setup {
    Mesh mesh;
    Operators ops;
    Connectivity conn;
};

Setup make_1d(double w, double h, bool pair_x, int order,
              std::vector<std::pair<int, double>> layers = {}) {
    StructuredMeshSpec spec;
    spec.dim = 1;
    spec.x1 = w;
    spec.h = h;
    for (auto& [r, t] : layers) spec.layers.push_back({r, t});
    Setup s{build_mesh(spec), {}, {}};
    s.ops = build_operators(s.mesh, reference_element(1, order));
    std::vector<FacePairing> pr;
    if (pair_x) pr.push_back(pair_periodic_faces(s.mesh, Axis::x));
    s.conn = build_connectivity(s.mesh, s.ops, pr);
    return s;
}

// 1D equilibrium Poisson-Boltzmann finite-difference oracle on a fine grid:
// eps phi'' = -QN (C + n_i e^(-phi/VT) - n_i e^(phi/VT)), Newton iteration
std::vector<double> fd_equilibrium_phi(const std::vector<double>& xg,
                                       const std::vector<double>& C, double eps_r, double n_i,
                                       double VT, double phi_l, double phi_r) {
    const int n = int(xg.size());
    const double h = xg[1] - xg[0];
    std::vector<double> phi(n);
    for (int j = 0; j < n; ++j)
        phi[j] = phi_l + (phi_r - phi_l) * (xg[j] - xg.front()) / (xg.back() - xg.front());
    phi.front() = phi_l;
    phi.back() = phi_r;
    for (int newton = 0; newton < 100; ++newton) {
        // tridiagonal Jacobian, Thomas solve
        std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), r(n, 0.0);
        double maxr = 0.0;
        for (int j = 1; j + 1 < n; ++j) {
            const double ne = n_i * std::exp(phi[j] / VT);
            const double nh = n_i * std::exp(-phi[j] / VT);
            const double res = eps_r * (phi[j - 1] - 2.0 * phi[j] + phi[j + 1]) / (h * h) +
                               units::QN * (C[j] + nh - ne);
            a[j] = eps_r / (h * h);
            c[j] = eps_r / (h * h);
            b[j] = -2.0 * eps_r / (h * h) - units::QN * (nh + ne) / VT;
            r[j] = -res;
            maxr = std::max(maxr, std::fabs(res));
        }
        if (maxr < 1e-12) break;
        for (int j = 1; j < n; ++j) {
            const double m = a[j] / b[j - 1];
            b[j] -= m * c[j - 1];
            r[j] -= m * r[j - 1];
        }
        std::vector<double> dphi(n, 0.0);
        dphi[n - 1] = r[n - 1] / b[n - 1];
        for (int j = n - 2; j >= 0; --j) dphi[j] = (r[j] - c[j] * dphi[j + 1]) / b[j];
        double damp = 1.0;
        for (int j = 0; j < n; ++j)
            damp = std::min(damp, 2.0 * VT / std::max(std::fabs(dphi[j]), 1e-300));
        for (int j = 1; j + 1 < n; ++j) phi[j] += damp * dphi[j];
    }
    return phi;
}

} // namespace

TEST_CASE("lax-friedrichs flux basics") {
    const double np1[1] = {1.0};
    const double vm[1] = {1.0}, vp[1] = {-3.0};
    // alpha = max(|1|, |-3|)/2 = 1.5
    CHECK(lax_friedrichs_flux(2.0, 2.0, vm, vp, np1, 1) ==
          doctest::Approx(0.5 * (2.0 - 6.0) + 1.5 * 0.0));
    CHECK(lax_friedrichs_flux(1.0, 0.0, vm, vp, np1, 1) ==
          doctest::Approx(0.5 * 1.0 + 1.5 * 1.0));
    // consistency on continuous traces
    const double v2[2] = {0.4, -0.2};
    const double nr[2] = {0.0, 1.0};
    CHECK(lax_friedrichs_flux(3.0, 3.0, v2, v2, nr, 2) == doctest::Approx(-0.6));
    // constant positive advection reduces to pure upwind
    const double vc[1] = {2.0};
    CHECK(lax_friedrichs_flux(5.0, 7.0, vc, vc, np1, 1) == doctest::Approx(2.0 * 5.0));
    const double nm[1] = {-1.0};
    CHECK(lax_friedrichs_flux(5.0, 7.0, vc, vc, nm, 1) == doctest::Approx(-2.0 * 7.0));
}

TEST_CASE("zero source, zero drift, equal contacts: constant density") {
    auto s = make_1d(1.0, 0.2, false, 2);
    const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
    DDProblem dp;
    dp.ops = &s.ops;
    dp.conn = &s.conn;
    dp.d = Field("d", ne, np, 1);
    dp.d.fill(1.0e4);
    dp.v = Field("v", ne, np, 1);
    dp.dirichlet = {{BoundaryTag::x_min, 7.5}, {BoundaryTag::x_max, 7.5}};
    auto sys = assemble_dd(dp);
    auto sol = solve_dd(dp, sys, {.restart = 60, .max_iters = 2000, .tol = 1e-12});
    REQUIRE(sol.stats.converged);
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i) {
            CHECK(sol.n.at(e, 0, i) == doctest::Approx(7.5).epsilon(1e-9));
            CHECK(sol.q.at(e, 0, i) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
        }
}

TEST_CASE("periodic diffusion-reaction manufactured solution converges at p+1") {
    const double w = 1.0, pi2 = 2.0 * M_PI;
    for (int p : {1, 2, 3}) {
        std::vector<double> errs;
        for (double h : {0.25, 0.125, 0.0625}) {
            auto s = make_1d(w, h, true, p);
            const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
            DDProblem dp;
            dp.ops = &s.ops;
            dp.conn = &s.conn;
            dp.d = Field("d", ne, np, 1);
            dp.d.fill(1.0e4); // 1 um^2/ps internally
            dp.v = Field("v", ne, np, 1);
            dp.reaction = Field("a", ne, np, 1);
            dp.reaction.fill(-1.0);
            dp.source = Field("s", ne, np, 1);
            for (int e = 0; e < ne; ++e)
                for (int i = 0; i < np; ++i) {
                    const double x = s.ops.node_x(e, i);
                    dp.source.elem(e)[i] = (-pi2 * pi2 - 1.0) * std::cos(pi2 * x / w);
                }
            auto sys = assemble_dd(dp);
            auto sol = solve_dd(dp, sys, {.restart = 100, .max_iters = 4000, .tol = 1e-13});
            REQUIRE(sol.stats.converged);
            Field diff("d", ne, np, 1);
            for (int e = 0; e < ne; ++e)
                for (int i = 0; i < np; ++i)
                    diff.elem(e)[i] =
                        sol.n.at(e, 0, i) - std::cos(pi2 * s.ops.node_x(e, i) / w);
            errs.push_back(l2_norm(s.ops, diff));
        }
        CHECK(std::log2(errs[1] / errs[2]) > p + 1 - 0.3);
    }
}

TEST_CASE("constant-coefficient boundary layer matches the exact ODE solution") {
    // d n'' + v n' = 0 on [0,1], n(0)=1, n(1)=0:
    // n(x) = (e^(-vx/d) - e^(-v/d)) / (1 - e^(-v/d))
    const double vbar = 1.0, dbar = 0.25; // um/ps, um^2/ps
    auto exact = [&](double x) {
        const double k = vbar / dbar;
        return (std::exp(-k * x) - std::exp(-k)) / (1.0 - std::exp(-k));
    };
    for (int p : {2, 3}) {
        std::vector<double> errs;
        for (double h : {0.25, 0.125, 0.0625}) {
            auto s = make_1d(1.0, h, false, p);
            const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
            DDProblem dp;
            dp.ops = &s.ops;
            dp.conn = &s.conn;
            dp.d = Field("d", ne, np, 1);
            dp.d.fill(dbar / units::cm2s_to_um2ps);
            dp.v = Field("v", ne, np, 1);
            dp.v.fill(vbar / units::cms_to_umps);
            dp.dirichlet = {{BoundaryTag::x_min, 1.0}, {BoundaryTag::x_max, 0.0}};
            auto sys = assemble_dd(dp);
            auto sol = solve_dd(dp, sys, {.restart = 100, .max_iters = 4000, .tol = 1e-13});
            REQUIRE(sol.stats.converged);
            Field diff("d", ne, np, 1);
            for (int e = 0; e < ne; ++e)
                for (int i = 0; i < np; ++i)
                    diff.elem(e)[i] = sol.n.at(e, 0, i) - exact(s.ops.node_x(e, i));
            errs.push_back(l2_norm(s.ops, diff));
        }
        CHECK(std::log2(errs[1] / errs[2]) > p + 1 - 0.35);
    }
}

TEST_CASE("equilibrium contact densities") {
    auto eq0 = equilibrium_contact_densities(0.0, 9.0e6);
    CHECK(eq0.n_e == doctest::Approx(9.0e6));
    CHECK(eq0.n_h == doctest::Approx(9.0e6));
    auto eq = equilibrium_contact_densities(1.3e16, 9.0e6);
    CHECK(eq.n_e == doctest::Approx(1.3e16).epsilon(1e-12));
    CHECK(eq.n_h == doctest::Approx(8.1e13 / 1.3e16).epsilon(1e-10));
    CHECK(eq.n_e * eq.n_h == doctest::Approx(8.1e13).epsilon(1e-12));
    auto eq2 = equilibrium_contact_densities(2.0 * 9.0e6, 9.0e6);
    CHECK(eq2.n_e == doctest::Approx(9.0e6 * (1.0 + std::sqrt(2.0))).epsilon(1e-12));
    // acceptor-type contact
    auto eqa = equilibrium_contact_densities(-1.3e16, 9.0e6);
    CHECK(eqa.n_h == doctest::Approx(1.3e16).epsilon(1e-12));
}

TEST_CASE("contact potential formula") {
    CHECK(contact_potential(3.0, 9.0e6, 9.0e6, 0.02585) == doctest::Approx(3.0));
    CHECK(contact_potential(10.0, 9.0e6 * M_E, 9.0e6, 0.02585) ==
          doctest::Approx(10.02585).epsilon(1e-12));
    // Table-style contact: 0.02585 * ln(1.3e16/9e6) = 0.5452 V
    CHECK(contact_potential(0.0, 1.3e16, 9.0e6, 0.02585) ==
          doctest::Approx(0.5452).epsilon(1e-4));
}

TEST_CASE("gummel at zero bias hits the equilibrium fixed point immediately") {
    auto s = make_1d(0.18, 0.03, true, 2);
    const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
    Device dev;
    dev.ops = &s.ops;
    dev.conn = &s.conn;
    dev.semi = ltgaas_params();
    dev.doping = Field("C", ne, np, 1);
    dev.doping.fill(dev.semi.doping);
    dev.eps.assign(ne, kSiGaAsEpsR);
    dev.phi_drop = 0.0;
    GummelOptions go;
    go.tol = 1e-8;
    auto st = gummel_solve(dev, go);
    REQUIRE(st.converged);
    CHECK(st.iterations <= 2);
    auto eq = equilibrium_contact_densities(dev.semi.doping, dev.semi.n_intrinsic);
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i) {
            CHECK(st.n_e.at(e, 0, i) == doctest::Approx(eq.n_e).epsilon(1e-10));
            CHECK(st.n_h.at(e, 0, i) == doctest::Approx(eq.n_h).epsilon(1e-10));
            CHECK(st.phi.at(e, 0, i) ==
                  doctest::Approx(st.phi.at(0, 0, 0)).epsilon(1e-10));
        }
    CHECK(st.negative_clips == 0);
    // re-running from equilibrium converges right away again
    auto st2 = gummel_solve(dev, go);
    CHECK(st2.converged);
    CHECK(st2.iterations <= 2);
}

TEST_CASE("gummel with a masked region solves only the semiconductor") {
    auto s = make_1d(0.4, 0.05, true, 2, {{1, 0.2}, {2, 0.2}});
    const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
    Device dev;
    dev.ops = &s.ops;
    dev.conn = &s.conn;
    dev.semi = ltgaas_params();
    dev.doping = Field("C", ne, np, 1);
    dev.doping.fill(dev.semi.doping);
    dev.eps.assign(ne, kSiGaAsEpsR);
    dev.semiconductor.assign(ne, 0);
    for (int e = 0; e < ne; ++e) dev.semiconductor[e] = s.mesh.region[e] == 1;
    GummelOptions go;
    go.tol = 1e-8;
    auto st = gummel_solve(dev, go);
    REQUIRE(st.converged);
    auto eq = equilibrium_contact_densities(dev.semi.doping, dev.semi.n_intrinsic);
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i) {
            if (s.mesh.region[e] == 1)
                CHECK(st.n_e.at(e, 0, i) == doctest::Approx(eq.n_e).epsilon(1e-8));
            else
                CHECK(st.n_e.at(e, 0, i) == 0.0);
        }
}

TEST_CASE("biased 1d unit cell converges within the iteration budget") {
    auto s = make_1d(0.18, 0.03, true, 2);
    const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
    Device dev;
    dev.ops = &s.ops;
    dev.conn = &s.conn;
    dev.semi = ltgaas_params();
    dev.doping = Field("C", ne, np, 1);
    dev.doping.fill(dev.semi.doping);
    dev.eps.assign(ne, kSiGaAsEpsR);
    dev.phi_drop = 0.6667; // w_x * V_bias / w_sd
    GummelOptions go;
    go.tol = 1e-5;
    go.max_iter = 300;
    auto st = gummel_solve(dev, go);
    CHECK(st.converged);
    CHECK(st.iterations <= 300);
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i) {
            CHECK(st.n_e.at(e, 0, i) >= 0.0);
            CHECK(st.n_h.at(e, 0, i) >= 0.0);
        }
    // field magnitude is set by the drop across the cell
    double e_mean = 0.0;
    int cnt = 0;
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i) {
            e_mean += st.E.at(e, 0, i);
            ++cnt;
        }
    e_mean /= cnt;
    CHECK(e_mean == doctest::Approx(0.6667 / 0.18).epsilon(0.05));
    // convergence history is recorded and monotone-terminated below tol
    REQUIRE(!st.history.empty());
    auto last = st.history.back();
    CHECK(std::max({last.d_phi, last.d_ne, last.d_nh}) < 1e-5);
}

TEST_CASE("pn diode built-in potential matches the fine-grid oracle") {
    const double L = 1.0, VT = 0.02585;
    auto s = make_1d(L, 0.025, false, 2);
    const int ne = s.mesh.n_elements(), np = s.ops.n_nodes();
    Device dev;
    dev.ops = &s.ops;
    dev.conn = &s.conn;
    dev.semi = ltgaas_params();
    dev.semi.thermal_voltage = VT;
    dev.doping = Field("C", ne, np, 1);
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i)
            dev.doping.elem(e)[i] = s.ops.node_x(e, i) < 0.5 * L ? -1.3e16 : 1.3e16;
    dev.eps.assign(ne, kSiGaAsEpsR);
    dev.contacts = {{BoundaryTag::x_min, 0.0}, {BoundaryTag::x_max, 0.0}};
    GummelOptions go;
    go.tol = 1e-7;
    go.max_iter = 300;
    auto st = gummel_solve(dev, go);
    REQUIRE(st.converged);

    const double phi_l = contact_potential(0.0, 8.1e13 / 1.3e16, 9.0e6, VT);
    const double phi_r = contact_potential(0.0, 1.3e16, 9.0e6, VT);
    const int nfd = 4001;
    std::vector<double> xg(nfd), C(nfd);
    for (int j = 0; j < nfd; ++j) {
        xg[j] = L * j / (nfd - 1);
        C[j] = xg[j] < 0.5 * L ? -1.3e16 : 1.3e16;
    }
    auto phi_fd = fd_equilibrium_phi(xg, C, kSiGaAsEpsR, 9.0e6, VT, phi_l, phi_r);

    // compare potentials at the plateaus and the analytic built-in step
    auto fd_at = [&](double x) {
        const double t = x / L * (nfd - 1);
        const int j = std::min(int(t), nfd - 2);
        return phi_fd[j] + (t - j) * (phi_fd[j + 1] - phi_fd[j]);
    };
    const double built_in = phi_r - phi_l;
    CHECK(built_in == doctest::Approx(VT * std::log(1.3e16 * 1.3e16 / 8.1e13)).epsilon(1e-10));
    double max_err = 0.0;
    for (int e = 0; e < ne; ++e)
        for (int i = 0; i < np; ++i)
            max_err = std::max(
                max_err, std::fabs(st.phi.at(e, 0, i) - fd_at(s.ops.node_x(e, i))));
    CHECK(max_err < 0.01 * built_in);
}

TEST_CASE("bad problems are rejected") {
    auto s = make_1d(1.0, 0.25, false, 1);
    DDProblem dp;
    dp.ops = &s.ops;
    dp.conn = &s.conn;
    CHECK_THROWS(assemble_dd(dp)); // missing d, v
    dp.d = Field("d", s.mesh.n_elements(), s.ops.n_nodes(), 1);
    dp.v = Field("v", s.mesh.n_elements(), s.ops.n_nodes(), 1);
    dp.active.assign(s.mesh.n_elements(), 0);
    CHECK_THROWS(assemble_dd(dp)); // nothing active
}
