#pragma once

// Structured Q1 grids on the unit square: the fine mesh that resolves the
// permeability and the nested coarse mesh carrying the multiscale space.
//
// Node numbering is lexicographic: node(i, j) = j * (nx + 1) + i, with i the
// x1 index. Element (i, j) = j * nx + i covers [i h1, (i+1) h1] x [j h2, (j+1) h2]
// and lists its nodes in tensor order (i,j), (i+1,j), (i,j+1), (i+1,j+1).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "damgms/errors.hpp"

namespace damgms {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

enum class BoundaryTag {
    Water,       // Dirichlet head data
    Seepage,     // in contact with air, p <= 0 enforced by duality
    Impervious,  // zero normal flux
};

inline const char* to_string(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::Water: return "water";
        case BoundaryTag::Seepage: return "seepage";
        case BoundaryTag::Impervious: return "impervious";
    }
    return "?";
}

enum class Side { Bottom, Right, Top, Left };

/// Which part of the boundary is wetted and the heads imposed there.
///
/// Lateral sides are wetted from x2 = 0 up to the given heights, the bottom is
/// impervious and the top is seepage unless `top_dirichlet` is set. Heads
/// give Dirichlet data p = head - x2 on each lateral water segment and
/// `top_value` on a Dirichlet top.
struct BoundaryPartition {
    double left_wet_height = 0.6;
    double right_wet_height = 0.4;
    bool top_dirichlet = false;
    double head_left = 0.6;
    double head_right = 0.4;
    double top_value = 0.0;

    static BoundaryPartition dam() { return {}; }

    /// Both lateral sides fully wetted with the same head, top held at zero.
    static BoundaryPartition submerged(double head = 1.0) {
        return {1.0, 1.0, true, head, head, 0.0};
    }

    /// Tag of a boundary edge from its midpoint (closed segments).
    BoundaryTag classify(Side side, Point mid) const {
        switch (side) {
            case Side::Bottom: return BoundaryTag::Impervious;
            case Side::Top: return top_dirichlet ? BoundaryTag::Water : BoundaryTag::Seepage;
            case Side::Left:
                return mid.x2 <= left_wet_height ? BoundaryTag::Water : BoundaryTag::Seepage;
            case Side::Right:
                return mid.x2 <= right_wet_height ? BoundaryTag::Water : BoundaryTag::Seepage;
        }
        return BoundaryTag::Impervious;
    }

    double head_value(Side side, Point x) const {
        switch (side) {
            case Side::Left: return head_left - x.x2;
            case Side::Right: return head_right - x.x2;
            case Side::Top: return top_value;
            case Side::Bottom: break;
        }
        return 0.0;
    }
};

struct BoundaryEdge {
    std::array<int, 2> nodes{};
    int element = -1;
    Side side = Side::Bottom;
    BoundaryTag tag = BoundaryTag::Impervious;
    double length = 0.0;
};

class FineMesh {
public:
    FineMesh(int nx, int ny, BoundaryPartition partition)
        : nx_(nx), ny_(ny), partition_(partition) {
        if (nx < 1 || ny < 1) {
            throw InvalidArgument("fine mesh needs at least one element per direction, got " +
                                  std::to_string(nx) + "x" + std::to_string(ny));
        }
        h1_ = 1.0 / nx_;
        h2_ = 1.0 / ny_;
        tag_edges();
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h1() const { return h1_; }
    double h2() const { return h2_; }
    int node_count() const { return (nx_ + 1) * (ny_ + 1); }
    int element_count() const { return nx_ * ny_; }
    const BoundaryPartition& partition() const { return partition_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }

    int node(int i, int j) const { return j * (nx_ + 1) + i; }
    int element(int i, int j) const { return j * nx_ + i; }
    int node_i(int n) const { return n % (nx_ + 1); }
    int node_j(int n) const { return n / (nx_ + 1); }

    Point coord(int n) const {
        return {static_cast<double>(node_i(n)) / nx_, static_cast<double>(node_j(n)) / ny_};
    }

    std::array<int, 4> element_nodes(int e) const {
        const int i = e % nx_;
        const int j = e / nx_;
        return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
    }

    Point element_origin(int e) const {
        return {(e % nx_) * h1_, (e / nx_) * h2_};
    }

    Point centroid(int e) const {
        const Point o = element_origin(e);
        return {o.x1 + 0.5 * h1_, o.x2 + 0.5 * h2_};
    }

    /// Element containing a point of the closed unit square. Points on an
    /// interior grid line go to the element above/right; the last row and
    /// column absorb x = 1.
    int locate(Point x) const {
        int i = static_cast<int>(std::floor(x.x1 * nx_));
        int j = static_cast<int>(std::floor(x.x2 * ny_));
        i = std::min(std::max(i, 0), nx_ - 1);
        j = std::min(std::max(j, 0), ny_ - 1);
        return element(i, j);
    }

    /// Dirichlet datum for a node on a water edge.
    double head_at(int n) const {
        const Point x = coord(n);
        if (node_i(n) == 0) return partition_.head_value(Side::Left, x);
        if (node_i(n) == nx_) return partition_.head_value(Side::Right, x);
        return partition_.head_value(Side::Top, x);
    }

private:
    void tag_edges() {
        edges_.clear();
        edges_.reserve(2 * (nx_ + ny_));
        auto add = [&](int a, int b, int e, Side side, double len) {
            const Point pa = coord(a);
            const Point pb = coord(b);
            const Point mid{0.5 * (pa.x1 + pb.x1), 0.5 * (pa.x2 + pb.x2)};
            edges_.push_back({{a, b}, e, side, partition_.classify(side, mid), len});
        };
        for (int i = 0; i < nx_; ++i) add(node(i, 0), node(i + 1, 0), element(i, 0), Side::Bottom, h1_);
        for (int j = 0; j < ny_; ++j) add(node(nx_, j), node(nx_, j + 1), element(nx_ - 1, j), Side::Right, h2_);
        for (int i = 0; i < nx_; ++i) add(node(i, ny_), node(i + 1, ny_), element(i, ny_ - 1), Side::Top, h1_);
        for (int j = 0; j < ny_; ++j) add(node(0, j), node(0, j + 1), element(0, j), Side::Left, h2_);
    }

    int nx_;
    int ny_;
    double h1_ = 0.0;
    double h2_ = 0.0;
    BoundaryPartition partition_;
    std::vector<BoundaryEdge> edges_;
};

inline FineMesh build_fine_mesh(int nx, int ny, BoundaryPartition partition = BoundaryPartition::dam()) {
    return FineMesh(nx, ny, partition);
}

/// Sorted fine nodes incident to at least one edge with `tag`. Junction nodes
/// appear in every incident tag's set.
inline std::vector<int> boundary_nodes(const FineMesh& mesh, BoundaryTag tag) {
    std::vector<char> hit(mesh.node_count(), 0);
    for (const auto& edge : mesh.boundary_edges()) {
        if (edge.tag == tag) hit[edge.nodes[0]] = hit[edge.nodes[1]] = 1;
    }
    std::vector<int> out;
    for (int n = 0; n < mesh.node_count(); ++n) {
        if (hit[n]) out.push_back(n);
    }
    return out;
}

/// Half-open range of fine elements [i0, i1) x [j0, j1).
struct ElementBox {
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

    int width() const { return i1 - i0; }
    int height() const { return j1 - j0; }
    int element_count() const { return width() * height(); }
    int node_count() const { return (width() + 1) * (height() + 1); }
    bool contains_element(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
    bool contains_node(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }

    /// Box-local node index (lexicographic within the box).
    int local_node(int i, int j) const { return (j - j0) * (width() + 1) + (i - i0); }
};

/// Fine-grid support of a coarse node: the coarse cells sharing it.
struct Neighborhood {
    int coarse_node = -1;
    int coarse_cells = 0;
    ElementBox box;
    std::vector<int> elements;  // fine element ids, box-lexicographic
    std::vector<int> nodes;     // fine node ids, box-lexicographic
};

class CoarseMesh {
public:
    CoarseMesh(const FineMesh& fine, int Nx, int Ny) : Nx_(Nx), Ny_(Ny) {
        if (Nx < 1 || Ny < 1) throw InvalidArgument("coarse mesh needs at least one cell per direction");
        if (fine.nx() % Nx != 0 || fine.ny() % Ny != 0) {
            throw InvalidArgument("fine mesh " + std::to_string(fine.nx()) + "x" + std::to_string(fine.ny()) +
                                  " does not nest in coarse mesh " + std::to_string(Nx) + "x" +
                                  std::to_string(Ny));
        }
        m1_ = fine.nx() / Nx;
        m2_ = fine.ny() / Ny;
        H_ = 1.0 / Nx;
        build_neighborhoods(fine);
    }

    int Nx() const { return Nx_; }
    int Ny() const { return Ny_; }
    /// Coarse mesh size used to scale the spectral weight.
    double H() const { return H_; }
    int cell_count() const { return Nx_ * Ny_; }
    int node_count() const { return (Nx_ + 1) * (Ny_ + 1); }
    int fine_per_cell_x() const { return m1_; }
    int fine_per_cell_y() const { return m2_; }

    int node(int I, int J) const { return J * (Nx_ + 1) + I; }
    int node_I(int n) const { return n % (Nx_ + 1); }
    int node_J(int n) const { return n / (Nx_ + 1); }
    int cell(int I, int J) const { return J * Nx_ + I; }

    bool is_boundary_node(int n) const {
        const int I = node_I(n), J = node_J(n);
        return I == 0 || J == 0 || I == Nx_ || J == Ny_;
    }

    ElementBox cell_box(int c) const {
        const int I = c % Nx_, J = c / Nx_;
        return {I * m1_, (I + 1) * m1_, J * m2_, (J + 1) * m2_};
    }

    /// Coarse nodes at the corners of a cell, tensor order.
    std::array<int, 4> cell_nodes(int c) const {
        const int I = c % Nx_, J = c / Nx_;
        return {node(I, J), node(I + 1, J), node(I, J + 1), node(I + 1, J + 1)};
    }

    int cell_of_fine_element(const FineMesh& fine, int e) const {
        const int i = e % fine.nx(), j = e / fine.nx();
        return cell(i / m1_, j / m2_);
    }

    const Neighborhood& neighborhood(int n) const { return hoods_.at(n); }
    const std::vector<Neighborhood>& neighborhoods() const { return hoods_; }

private:
    void build_neighborhoods(const FineMesh& fine) {
        hoods_.resize(node_count());
        for (int J = 0; J <= Ny_; ++J) {
            for (int I = 0; I <= Nx_; ++I) {
                Neighborhood& hood = hoods_[node(I, J)];
                hood.coarse_node = node(I, J);
                const int I0 = std::max(I - 1, 0), I1 = std::min(I + 1, Nx_);
                const int J0 = std::max(J - 1, 0), J1 = std::min(J + 1, Ny_);
                hood.coarse_cells = (I1 - I0) * (J1 - J0);
                hood.box = {I0 * m1_, I1 * m1_, J0 * m2_, J1 * m2_};
                const ElementBox& b = hood.box;
                hood.elements.reserve(b.element_count());
                for (int j = b.j0; j < b.j1; ++j)
                    for (int i = b.i0; i < b.i1; ++i) hood.elements.push_back(fine.element(i, j));
                hood.nodes.reserve(b.node_count());
                for (int j = b.j0; j <= b.j1; ++j)
                    for (int i = b.i0; i <= b.i1; ++i) hood.nodes.push_back(fine.node(i, j));
            }
        }
    }

    int Nx_;
    int Ny_;
    int m1_ = 1;
    int m2_ = 1;
    double H_ = 1.0;
    std::vector<Neighborhood> hoods_;
};

inline CoarseMesh build_coarse_mesh(const FineMesh& fine, int Nx, int Ny) {
    return CoarseMesh(fine, Nx, Ny);
}

}  // namespace damgms
