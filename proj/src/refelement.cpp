#include "unitcell/refelement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace unitcell {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

double jacobi_p(double x, double a, double b, int n) {
    // normalized Jacobi polynomial (orthonormal on [-1,1] with the
    // (1-x)^a (1+x)^b weight)
    const double gamma0 = std::pow(2.0, a + b + 1.0) / (a + b + 1.0) * std::tgamma(a + 1.0) *
                          std::tgamma(b + 1.0) / std::tgamma(a + b + 1.0);
    double pl0 = 1.0 / std::sqrt(gamma0);
    if (n == 0) return pl0;
    const double gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    double pl1 = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / std::sqrt(gamma1);
    if (n == 1) return pl1;

    double aold = 2.0 / (2.0 + a + b) * std::sqrt((a + 1.0) * (b + 1.0) / (a + b + 3.0));
    for (int i = 1; i < n; ++i) {
        const double h1 = 2.0 * i + a + b;
        double anew = 2.0 / (h1 + 2.0) *
                      std::sqrt((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b) /
                                ((h1 + 1.0) * (h1 + 3.0)));
        const double bnew = -(a * a - b * b) / (h1 * (h1 + 2.0));
        const double plnew = (-aold * pl0 + (x - bnew) * pl1) / anew;
        pl0 = pl1;
        pl1 = plnew;
        aold = anew;
    }
    return pl1;
}

double grad_jacobi_p(double x, double a, double b, int n) {
    if (n == 0) return 0.0;
    return std::sqrt(n * (n + a + b + 1.0)) * jacobi_p(x, a + 1.0, b + 1.0, n - 1);
}

namespace {

// roots of the degree-m Jacobi polynomial via Newton iteration
std::vector<double> jacobi_roots(double a, double b, int m) {
    std::vector<double> x(m);
    for (int k = 0; k < m; ++k) {
        double xk = -std::cos((2.0 * k + 1.0) * kPi / (2.0 * m));
        for (int it = 0; it < 100; ++it) {
            double p = jacobi_p(xk, a, b, m);
            // deflate previously found roots for robustness
            double dp = grad_jacobi_p(xk, a, b, m);
            double defl = 0.0;
            for (int j = 0; j < k; ++j) defl += 1.0 / (xk - x[j]);
            const double dx = -p / (dp - p * defl);
            xk += dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        x[k] = xk;
    }
    std::sort(x.begin(), x.end());
    return x;
}

Dense vandermonde1d(int p, const std::vector<double>& r) {
    Dense v(int(r.size()), p + 1);
    for (int i = 0; i < int(r.size()); ++i)
        for (int j = 0; j <= p; ++j) v(i, j) = jacobi_p(r[i], 0.0, 0.0, j);
    return v;
}

Dense grad_vandermonde1d(int p, const std::vector<double>& r) {
    Dense v(int(r.size()), p + 1);
    for (int i = 0; i < int(r.size()); ++i)
        for (int j = 0; j <= p; ++j) v(i, j) = grad_jacobi_p(r[i], 0.0, 0.0, j);
    return v;
}

// Warp-and-blend edge warp (Hesthaven & Warburton)
std::vector<double> warp_factor(int p, const std::vector<double>& rout) {
    const int n = int(rout.size());
    std::vector<double> lgl = gauss_lobatto_nodes(p);
    std::vector<double> req(p + 1);
    for (int i = 0; i <= p; ++i) req[i] = -1.0 + 2.0 * i / double(p);

    Dense veq = vandermonde1d(p, req);
    Dense pmat(p + 1, n);
    for (int i = 0; i <= p; ++i)
        for (int j = 0; j < n; ++j) pmat(i, j) = jacobi_p(rout[j], 0.0, 0.0, i);
    Dense lmat = DenseLU(veq.transposed()).solve(pmat); // (p+1) x n

    std::vector<double> warp(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double w = 0.0;
        for (int i = 0; i <= p; ++i) w += lmat(i, j) * (lgl[i] - req[i]);
        const bool zerof = std::fabs(rout[j]) < 1.0 - 1e-10;
        const double sf = 1.0 - (zerof ? rout[j] * rout[j] : 0.0);
        warp[j] = w / sf + w * (zerof ? 0.0 : -1.0);
    }
    return warp;
}

struct Nodes2D {
    std::vector<double> r, s;
};

Nodes2D nodes2d(int p) {
    static const double alpopt[] = {0.0,    0.0,    1.4152, 0.1001, 0.2751,
                                    0.9800, 1.0999, 1.2832, 1.3648, 1.4773};
    const double alpha = (p < 10) ? alpopt[p] : 5.0 / 3.0;
    const int np = (p + 1) * (p + 2) / 2;

    std::vector<double> l1(np), l2(np), l3(np);
    int sk = 0;
    for (int n = 0; n <= p; ++n)
        for (int m = 0; m <= p - n; ++m) {
            l1[sk] = n / double(p);
            l3[sk] = m / double(p);
            l2[sk] = 1.0 - l1[sk] - l3[sk];
            ++sk;
        }

    std::vector<double> x(np), y(np);
    for (int i = 0; i < np; ++i) {
        x[i] = -l2[i] + l3[i];
        y[i] = (-l2[i] - l3[i] + 2.0 * l1[i]) / std::sqrt(3.0);
    }

    auto apply_warp = [&](const std::vector<double>& la, const std::vector<double>& lb,
                          const std::vector<double>& lc, double angle) {
        std::vector<double> arg(np);
        for (int i = 0; i < np; ++i) arg[i] = lc[i] - lb[i];
        std::vector<double> wf = warp_factor(p, arg);
        for (int i = 0; i < np; ++i) {
            const double blend = 4.0 * lb[i] * lc[i];
            const double w = blend * wf[i] * (1.0 + alpha * alpha * la[i] * la[i]);
            x[i] += std::cos(angle) * w;
            y[i] += std::sin(angle) * w;
        }
    };
    apply_warp(l1, l2, l3, 0.0);
    apply_warp(l2, l3, l1, 2.0 * kPi / 3.0);
    apply_warp(l3, l1, l2, 4.0 * kPi / 3.0);

    Nodes2D out;
    out.r.resize(np);
    out.s.resize(np);
    for (int i = 0; i < np; ++i) {
        const double ll1 = (std::sqrt(3.0) * y[i] + 1.0) / 3.0;
        const double ll2 = (-3.0 * x[i] - std::sqrt(3.0) * y[i] + 2.0) / 6.0;
        const double ll3 = (3.0 * x[i] - std::sqrt(3.0) * y[i] + 2.0) / 6.0;
        out.r[i] = -ll2 + ll3 - ll1;
        out.s[i] = -ll2 - ll3 + ll1;
    }
    return out;
}

void rstoab(double r, double s, double& a, double& b) {
    a = (std::fabs(s - 1.0) > 1e-12) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
    b = s;
}

double simplex2dp(double a, double b, int i, int j) {
    return std::sqrt(2.0) * jacobi_p(a, 0.0, 0.0, i) * jacobi_p(b, 2.0 * i + 1.0, 0.0, j) *
           std::pow(1.0 - b, i);
}

void grad_simplex2dp(double a, double b, int id, int jd, double& dr, double& ds) {
    const double fa = jacobi_p(a, 0.0, 0.0, id);
    const double dfa = grad_jacobi_p(a, 0.0, 0.0, id);
    const double gb = jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
    const double dgb = grad_jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);

    dr = dfa * gb;
    if (id > 0) dr *= std::pow(0.5 * (1.0 - b), id - 1);
    ds = dfa * (gb * (0.5 * (1.0 + a)));
    if (id > 0) ds *= std::pow(0.5 * (1.0 - b), id - 1);
    double tmp = dgb * std::pow(0.5 * (1.0 - b), id);
    if (id > 0) tmp -= 0.5 * id * gb * std::pow(0.5 * (1.0 - b), id - 1);
    ds += fa * tmp;

    dr *= std::pow(2.0, id + 0.5);
    ds *= std::pow(2.0, id + 0.5);
}

RefElement build_1d(int p) {
    RefElement re;
    re.dim = 1;
    re.order = p;
    re.n_nodes = p + 1;
    re.n_faces = 2;
    re.n_face_nodes = 1;
    re.r = gauss_lobatto_nodes(p);

    re.vandermonde = vandermonde1d(p, re.r);
    Dense vinv = inverse(re.vandermonde);
    re.mass = vinv.transposed() * vinv;

    Dense vr = grad_vandermonde1d(p, re.r);
    re.diff.push_back(vr * vinv);

    Dense emat(re.n_nodes, 2);
    emat(0, 0) = 1.0;
    emat(re.n_nodes - 1, 1) = 1.0;
    re.lift = re.vandermonde * (re.vandermonde.transposed() * emat);

    re.face_nodes = {{0}, {re.n_nodes - 1}};
    re.face_normal = {{-1.0}, {1.0}};
    re.face_mass = Dense(1, 1);
    re.face_mass(0, 0) = 1.0;
    return re;
}

RefElement build_2d(int p) {
    RefElement re;
    re.dim = 2;
    re.order = p;
    re.n_nodes = (p + 1) * (p + 2) / 2;
    re.n_faces = 3;
    re.n_face_nodes = p + 1;

    Nodes2D nd = nodes2d(p);
    re.r = nd.r;
    re.s = nd.s;

    Dense v(re.n_nodes, re.n_nodes);
    Dense vr(re.n_nodes, re.n_nodes), vs(re.n_nodes, re.n_nodes);
    for (int n = 0; n < re.n_nodes; ++n) {
        double a, b;
        rstoab(re.r[n], re.s[n], a, b);
        int sk = 0;
        for (int i = 0; i <= p; ++i)
            for (int j = 0; j <= p - i; ++j) {
                v(n, sk) = simplex2dp(a, b, i, j);
                double dr, ds;
                grad_simplex2dp(a, b, i, j, dr, ds);
                vr(n, sk) = dr;
                vs(n, sk) = ds;
                ++sk;
            }
    }
    re.vandermonde = v;
    Dense vinv = inverse(v);
    re.mass = vinv.transposed() * vinv;
    re.diff.push_back(vr * vinv);
    re.diff.push_back(vs * vinv);

    // face node lists: face 0 (s=-1), face 1 (r+s=0), face 2 (r=-1),
    // each sorted by the face parameter for a deterministic trace order
    const double tol = 1e-10;
    auto collect = [&](auto pred, auto param) {
        std::vector<int> ids;
        for (int n = 0; n < re.n_nodes; ++n)
            if (pred(re.r[n], re.s[n])) ids.push_back(n);
        std::sort(ids.begin(), ids.end(),
                  [&](int i, int j) { return param(re.r[i], re.s[i]) < param(re.r[j], re.s[j]); });
        return ids;
    };
    re.face_nodes.push_back(collect([&](double, double ss) { return std::fabs(ss + 1.0) < tol; },
                                    [](double rr, double) { return rr; }));
    re.face_nodes.push_back(collect([&](double rr, double ss) { return std::fabs(rr + ss) < tol; },
                                    [](double, double ss) { return ss; }));
    re.face_nodes.push_back(collect([&](double rr, double) { return std::fabs(rr + 1.0) < tol; },
                                    [](double, double ss) { return ss; }));
    for (const auto& fn : re.face_nodes)
        if (int(fn.size()) != re.n_face_nodes)
            throw std::runtime_error("reference_element: face node extraction failed");

    re.face_normal = {{0.0, -1.0},
                      {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)},
                      {-1.0, 0.0}};

    // edge trace mass on [-1,1]; edge nodes are LGL points for all faces
    {
        std::vector<double> fr(re.n_face_nodes);
        for (int i = 0; i < re.n_face_nodes; ++i) fr[i] = re.r[re.face_nodes[0][i]];
        Dense fv = vandermonde1d(p, fr);
        Dense fvinv = inverse(fv);
        re.face_mass = fvinv.transposed() * fvinv;
    }

    // lift = V V^T Emat with per-face edge mass matrices
    Dense emat(re.n_nodes, re.n_faces * re.n_face_nodes);
    for (int f = 0; f < re.n_faces; ++f) {
        for (int i = 0; i < re.n_face_nodes; ++i)
            for (int j = 0; j < re.n_face_nodes; ++j)
                emat(re.face_nodes[f][i], f * re.n_face_nodes + j) += re.face_mass(i, j);
    }
    re.lift = re.vandermonde * (re.vandermonde.transposed() * emat);
    return re;
}

} // namespace

std::vector<double> gauss_lobatto_nodes(int p) {
    if (p < 1) throw std::invalid_argument("gauss_lobatto_nodes: p >= 1 required");
    std::vector<double> r;
    r.push_back(-1.0);
    if (p > 1) {
        std::vector<double> interior = jacobi_roots(1.0, 1.0, p - 1);
        r.insert(r.end(), interior.begin(), interior.end());
    }
    r.push_back(1.0);
    return r;
}

void average_jump(const std::vector<double>& u_minus, const std::vector<double>& u_plus,
                  std::vector<double>& avg, std::vector<double>& jump) {
    if (u_minus.size() != u_plus.size())
        throw std::invalid_argument("average_jump: trace shape mismatch");
    avg.resize(u_minus.size());
    jump.resize(u_minus.size());
    for (size_t i = 0; i < u_minus.size(); ++i) {
        avg[i] = 0.5 * (u_minus[i] + u_plus[i]);
        jump[i] = u_minus[i] - u_plus[i];
    }
}

RefElement reference_element(int dim, int p) {
    if (p < 1 || p > 6) throw std::invalid_argument("reference_element: order must be in [1,6]");
    if (dim == 1) return build_1d(p);
    if (dim == 2) return build_2d(p);
    throw std::invalid_argument("reference_element: dim must be 1 or 2");
}

} // namespace unitcell
