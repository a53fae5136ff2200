#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace unitcell {

enum class BoundaryTag {
    none = 0,
    x_min,
    x_max,
    y_min,
    y_max,
    z_top,
    z_bottom,
    electrode,
    pml_outer,
};

const char* to_string(BoundaryTag tag);
std::optional<BoundaryTag> boundary_tag_from_string(const std::string& s);

struct FaceRef {
    int elem = -1;
    int face = -1;
    bool operator==(const FaceRef&) const = default;
};

// per element-face connectivity entry: interior faces reference the
// neighbor, boundary faces carry a tag
struct FaceEntry {
    int neighbor = -1;
    int neighbor_face = -1;
    BoundaryTag tag = BoundaryTag::none;
    bool is_boundary() const { return neighbor < 0; }
};

// Simplicial mesh, 1D segments or 2D triangles. Coordinates in um.
// Immutable after construction (solvers only read it).
struct Mesh {
    int dim = 0;
    std::vector<std::array<double, 2>> vertices; // [x, y]; y unused in 1D
    std::vector<std::array<int, 3>> elements;    // vertex ids; [2] unused in 1D
    std::vector<int> region;                     // region id per element
    std::vector<std::array<FaceEntry, 3>> faces; // dim+1 entries used

    int n_elements() const { return int(elements.size()); }
    int n_vertices() const { return int(vertices.size()); }
    int faces_per_elem() const { return dim + 1; }

    // local face -> vertex ids (1 vertex in 1D, 2 in 2D)
    std::array<int, 2> face_vertices(int e, int f) const;
    // signed volume (length/area) of element e
    double signed_volume(int e) const;
    std::array<double, 2> centroid(int e) const;
    std::array<double, 2> face_centroid(int e, int f) const;
    double min_edge_length() const;
    double total_volume() const;
};

// Structured generation of an interval (1D) or rectangle (2D) split into
// simplices. Layers partition the stack axis (x in 1D, y in 2D) into
// material regions; grid lines snap to the layer interfaces.
struct StructuredMeshSpec {
    int dim = 1;
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0; // 2D only
    double h = 0.1;            // target edge length

    struct Layer {
        int region = 0;
        double thickness = 0.0;
    };
    std::vector<Layer> layers; // empty -> single region 0 spanning the axis
};

// Throws std::invalid_argument on non-positive h or degenerate geometry.
Mesh build_mesh(const StructuredMeshSpec& spec);

// Mesh file round trip (plain ASCII, header "dgmesh <dim> <nv> <ne>").
Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

// Retags every boundary face currently tagged `from` with `to` (e.g. the
// x-extremes of a 1D stack become electrode faces).
void retag_boundary(Mesh& mesh, BoundaryTag from, BoundaryTag to);

// Verifies the type invariants; throws std::runtime_error on violation.
void check_mesh(const Mesh& mesh);

enum class Axis { x = 0, y = 1 };

// Bijective pairing between the min and max boundary surfaces along an
// axis; paired faces must be congruent up to the translation `shift`.
struct FacePairing {
    Axis axis = Axis::x;
    double shift = 0.0; // unit-cell width along the axis
    struct Pair {
        FaceRef min_face;
        FaceRef max_face;
    };
    std::vector<Pair> pairs;
};

// Throws std::runtime_error naming the offending face when the boundary
// triangulations are not congruent.
FacePairing pair_periodic_faces(const Mesh& mesh, Axis axis);

} // namespace unitcell
