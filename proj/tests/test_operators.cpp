#include "doctest.h"

#include <cmath>
#include <vector>

#include "unitcell/operators.hpp"

using namespace unitcell;

namespace {

Mesh unit_square(double h) {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = spec.y1 = 1.0;
    spec.h = h;
    return build_mesh(spec);
}

} // namespace

TEST_CASE("mass matrices sum to the domain volume") {
    Mesh m = unit_square(0.25);
    for (int p : {1, 3}) {
        Operators ops = build_operators(m, reference_element(2, p));
        double vol = 0.0;
        for (int e = 0; e < m.n_elements(); ++e) {
            double s = 0.0;
            for (int i = 0; i < ops.ref.n_nodes; ++i)
                for (int j = 0; j < ops.ref.n_nodes; ++j) s += ops.ref.mass(i, j);
            vol += ops.geom[e].jac * s;
        }
        CHECK(vol == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("uniform scaling law: mass ~ s^2, derivative ~ 1/s") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.h = 0.5;
    spec.x1 = spec.y1 = 1.0;
    Mesh m1 = build_mesh(spec);
    spec.h = 1.5;
    spec.x1 = spec.y1 = 3.0;
    Mesh m3 = build_mesh(spec);
    Operators o1 = build_operators(m1, reference_element(2, 2));
    Operators o3 = build_operators(m3, reference_element(2, 2));
    REQUIRE(m1.n_elements() == m3.n_elements());
    for (int e = 0; e < m1.n_elements(); ++e) {
        CHECK(o3.geom[e].jac == doctest::Approx(9.0 * o1.geom[e].jac));
        CHECK(o3.geom[e].drdx[0][0] == doctest::Approx(o1.geom[e].drdx[0][0] / 3.0));
    }
}

TEST_CASE("physical derivative is exact on linear fields") {
    Mesh m = unit_square(0.34); // non-uniform spacing from snapping
    Operators ops = build_operators(m, reference_element(2, 3));
    const int np = ops.ref.n_nodes;
    std::vector<double> u(np), du(np);
    const double a = 2.25, b = -1.75;
    for (int e = 0; e < m.n_elements(); ++e) {
        for (int i = 0; i < np; ++i) u[i] = a * ops.node_x(e, i) + b * ops.node_y(e, i);
        ops.phys_deriv(e, 0, u.data(), du.data());
        for (int i = 0; i < np; ++i) CHECK(du[i] == doctest::Approx(a).epsilon(1e-10));
        ops.phys_deriv(e, 1, u.data(), du.data());
        for (int i = 0; i < np; ++i) CHECK(du[i] == doctest::Approx(b).epsilon(1e-10));
    }
}

TEST_CASE("outward normals are unit and outward") {
    Mesh m = unit_square(0.5);
    Operators ops = build_operators(m, reference_element(2, 1));
    for (int e = 0; e < m.n_elements(); ++e) {
        auto c = m.centroid(e);
        for (int f = 0; f < 3; ++f) {
            const auto& g = ops.geom[e];
            CHECK(std::hypot(g.normal[f][0], g.normal[f][1]) == doctest::Approx(1.0));
            auto fc = m.face_centroid(e, f);
            const double dot =
                g.normal[f][0] * (fc[0] - c[0]) + g.normal[f][1] * (fc[1] - c[1]);
            CHECK(dot > 0.0);
        }
    }
}

TEST_CASE("connectivity aligns interior trace nodes") {
    Mesh m = unit_square(0.5);
    Operators ops = build_operators(m, reference_element(2, 3));
    Connectivity cc = build_connectivity(m, ops, {});
    for (int e = 0; e < m.n_elements(); ++e)
        for (int f = 0; f < 3; ++f) {
            const auto& fc = cc.at(e, f);
            if (fc.kind != FaceConn::Kind::interior) continue;
            const auto& fn = ops.ref.face_nodes[f];
            for (size_t i = 0; i < fn.size(); ++i) {
                CHECK(ops.node_x(e, fn[i]) ==
                      doctest::Approx(ops.node_x(fc.nbr_elem, fc.nbr_nodes[i])).epsilon(1e-12));
                CHECK(ops.node_y(e, fn[i]) ==
                      doctest::Approx(ops.node_y(fc.nbr_elem, fc.nbr_nodes[i])).epsilon(1e-12));
            }
            // owner flag is complementary across the face
            CHECK(cc.at(fc.nbr_elem, fc.nbr_face).owner == !fc.owner);
        }
}

TEST_CASE("periodic pairing round trip is the identity") {
    Mesh m = unit_square(0.25);
    Operators ops = build_operators(m, reference_element(2, 2));
    auto px = pair_periodic_faces(m, Axis::x);
    Connectivity cc = build_connectivity(m, ops, {px});
    for (const auto& pr : px.pairs) {
        const auto& lo = cc.at(pr.min_face.elem, pr.min_face.face);
        CHECK(lo.kind == FaceConn::Kind::paired);
        CHECK(lo.nbr_elem == pr.max_face.elem);
        const auto& hi = cc.at(pr.max_face.elem, pr.max_face.face);
        CHECK(hi.nbr_elem == pr.min_face.elem);
        CHECK(hi.nbr_face == pr.min_face.face);
        CHECK(hi.owner == !lo.owner);
        // applying the two node maps in sequence returns each trace node
        const auto& fn_lo = ops.ref.face_nodes[pr.min_face.face];
        for (size_t i = 0; i < fn_lo.size(); ++i) {
            const int via = lo.nbr_nodes[i];
            // find which trace slot of the max face holds `via`, then map back
            const auto& fn_hi = ops.ref.face_nodes[pr.max_face.face];
            int slot = -1;
            for (size_t j = 0; j < fn_hi.size(); ++j)
                if (fn_hi[j] == via) slot = int(j);
            REQUIRE(slot >= 0);
            CHECK(hi.nbr_nodes[slot] == fn_lo[i]);
        }
    }
}

TEST_CASE("integrate and l2_norm agree with closed forms") {
    Mesh m = unit_square(0.25);
    Operators ops = build_operators(m, reference_element(2, 3));
    Field f("u", m.n_elements(), ops.ref.n_nodes, 1);
    for (int e = 0; e < m.n_elements(); ++e)
        for (int i = 0; i < ops.ref.n_nodes; ++i)
            f.elem(e)[i] = ops.node_x(e, i);
    CHECK(integrate(ops, f) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(l2_norm(ops, f) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("inverted element is rejected") {
    StructuredMeshSpec spec;
    spec.dim = 1;
    spec.x1 = 1.0;
    spec.h = 0.5;
    Mesh m = build_mesh(spec);
    std::swap(m.elements[0][0], m.elements[0][1]);
    CHECK_THROWS(build_operators(m, reference_element(1, 2)));
}
