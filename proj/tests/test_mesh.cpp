#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "unitcell/mesh.hpp"

using namespace unitcell;

TEST_CASE("unit square at h=0.5 gives the 2x2 split grid") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = spec.y1 = 1.0;
    spec.h = 0.5;
    Mesh m = build_mesh(spec);
    CHECK(m.n_elements() == 8);
    CHECK(m.n_vertices() == 9);
    CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interval at h=0.25 gives 4 segments") {
    StructuredMeshSpec spec;
    spec.dim = 1;
    spec.x1 = 1.0;
    spec.h = 0.25;
    Mesh m = build_mesh(spec);
    CHECK(m.n_elements() == 4);
    CHECK(m.n_vertices() == 5);
    CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("paper-regime unit cell mesh resolution") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = 0.18; // grating pitch
    spec.y1 = 0.62; // stack height
    spec.h = 0.02;
    Mesh m = build_mesh(spec);
    CHECK(m.min_edge_length() >= 0.01);
    CHECK(m.total_volume() == doctest::Approx(0.18 * 0.62).epsilon(1e-12));
}

TEST_CASE("invalid specs are rejected") {
    StructuredMeshSpec spec;
    spec.dim = 1;
    spec.h = -1.0;
    CHECK_THROWS(build_mesh(spec));
    spec.h = 0.1;
    spec.x1 = -2.0;
    CHECK_THROWS(build_mesh(spec));
}

TEST_CASE("interior face references are mutual") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = spec.y1 = 1.0;
    spec.h = 0.25;
    Mesh m = build_mesh(spec);
    for (int e = 0; e < m.n_elements(); ++e)
        for (int f = 0; f < m.faces_per_elem(); ++f) {
            const auto& fe = m.faces[e][f];
            if (fe.is_boundary()) continue;
            const auto& back = m.faces[fe.neighbor][fe.neighbor_face];
            CHECK(back.neighbor == e);
            CHECK(back.neighbor_face == f);
        }
}

TEST_CASE("layered 1D mesh assigns regions and snaps interfaces") {
    StructuredMeshSpec spec;
    spec.dim = 1;
    spec.x1 = 1.0;
    spec.h = 0.3;
    spec.layers = {{7, 0.4}, {3, 0.6}};
    Mesh m = build_mesh(spec);
    for (int e = 0; e < m.n_elements(); ++e) {
        const double xc = m.centroid(e)[0];
        CHECK(m.region[e] == (xc < 0.4 ? 7 : 3));
    }
    // a vertex sits exactly on the interface
    bool has_iface = false;
    for (const auto& v : m.vertices)
        if (std::fabs(v[0] - 0.4) < 1e-12) has_iface = true;
    CHECK(has_iface);
}

TEST_CASE("structured 2D pairing along x matches all faces") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = 0.5;
    spec.y1 = 1.0;
    spec.h = 0.25;
    Mesh m = build_mesh(spec);
    FacePairing pairing = pair_periodic_faces(m, Axis::x);
    CHECK(pairing.shift == doctest::Approx(0.5));
    CHECK(int(pairing.pairs.size()) == 4);
    // bijection: each max face used once
    for (size_t i = 0; i < pairing.pairs.size(); ++i)
        for (size_t j = i + 1; j < pairing.pairs.size(); ++j)
            CHECK(!(pairing.pairs[i].max_face == pairing.pairs[j].max_face));
}

TEST_CASE("1D pairing is the single endpoint pair") {
    StructuredMeshSpec spec;
    spec.dim = 1;
    spec.x1 = 2.0;
    spec.h = 0.5;
    Mesh m = build_mesh(spec);
    FacePairing pairing = pair_periodic_faces(m, Axis::x);
    REQUIRE(int(pairing.pairs.size()) == 1);
    CHECK(pairing.pairs[0].min_face.elem == 0);
    CHECK(pairing.pairs[0].max_face.elem == m.n_elements() - 1);
}

TEST_CASE("perturbed boundary vertex is reported") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = spec.y1 = 1.0;
    spec.h = 0.5;
    Mesh m = build_mesh(spec);
    // nudge one x_max boundary vertex along y
    for (auto& v : m.vertices)
        if (std::fabs(v[0] - 1.0) < 1e-12 && std::fabs(v[1] - 0.5) < 1e-12) v[1] += 0.07;
    CHECK_THROWS_AS(pair_periodic_faces(m, Axis::x), std::runtime_error);
}

TEST_CASE("mesh file round trip preserves everything") {
    StructuredMeshSpec spec;
    spec.dim = 2;
    spec.x1 = 0.5;
    spec.y1 = 1.0;
    spec.h = 0.25;
    spec.layers = {{1, 0.5}, {2, 0.5}};
    Mesh m = build_mesh(spec);
    retag_boundary(m, BoundaryTag::y_min, BoundaryTag::electrode);

    const std::string path = "roundtrip.dgmesh";
    write_mesh(m, path);
    Mesh m2 = read_mesh(path);
    std::remove(path.c_str());

    REQUIRE(m2.n_elements() == m.n_elements());
    REQUIRE(m2.n_vertices() == m.n_vertices());
    CHECK(m2.region == m.region);
    for (int e = 0; e < m.n_elements(); ++e)
        for (int f = 0; f < m.faces_per_elem(); ++f) {
            CHECK(m2.faces[e][f].neighbor == m.faces[e][f].neighbor);
            CHECK(m2.faces[e][f].tag == m.faces[e][f].tag);
        }
}

TEST_CASE("malformed mesh file is rejected") {
    const std::string path = "malformed.dgmesh";
    {
        FILE* f = fopen(path.c_str(), "w");
        fputs("notamesh 2 3 1\n", f);
        fclose(f);
    }
    CHECK_THROWS(read_mesh(path));
    std::remove(path.c_str());
}
