#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcf {

/// Points live in R^2 or R^3; unused trailing components are zero.
using Point = std::array<double, 3>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DomainKind { Ball, Ellipse, Stadium };

const char* to_string(DomainKind kind);

/// Analytic convex domain.
///
/// Ball: `radius`, dimension 2 or 3.
/// Ellipse: semi-axes `semi_a >= semi_b` along x1 and x2 (planar).
/// Stadium: rounded rectangle whose straight walls x1 = +-half_width span
/// |x2| <= straight_half_length, closed off by flat caps with rounded corners
/// of radius corner_radius (planar). With corner_radius == half_width the caps
/// are semicircles.
struct DomainSpec {
    DomainKind kind = DomainKind::Ball;
    int dim = 2;
    Point center{0.0, 0.0, 0.0};
    double radius = 1.0;
    double semi_a = 1.0;
    double semi_b = 1.0;
    double half_width = 1.0;
    double straight_half_length = 1.0;
    double corner_radius = 1.0;

    static DomainSpec ball(double radius, int dim = 2, Point center = {});
    static DomainSpec ellipse(double a, double b, Point center = {});
    static DomainSpec stadium(double half_width, double straight_half_length,
                              double corner_radius, Point center = {});

    /// Throws mcf::Error naming the offending field.
    void validate() const;

    double smallest_parameter() const;
    /// Half extents of the axis-aligned bounding box around `center`.
    Point half_extents() const;
    double diameter() const;
};

/// Raised when the ellipse projection fails to converge.
class ProjectionError : public Error {
public:
    ProjectionError(const std::string& what, Point last_iterate)
        : Error(what), last_iterate(last_iterate) {}
    Point last_iterate;
};

/// Distance to the boundary, positive inside the domain.
double signed_distance(const DomainSpec& domain, const Point& x);

/// Nearest boundary point (ellipse: Newton projection).
Point project_to_boundary(const DomainSpec& domain, const Point& x);

/// Infimum over the boundary of the mean curvature (average of the
/// principal curvatures).
double boundary_mean_curvature_bound(const DomainSpec& domain);

/// Supremum over the boundary of the largest principal curvature; 1/value is
/// the reach of the boundary, i.e. the width of the band where d is C^2.
double boundary_max_curvature(const DomainSpec& domain);

struct SpeedInterval {
    double lo;
    double hi;
    bool contains(double nu) const { return nu > lo && nu < hi; }
};

/// Open interval (-n H0 / (n+1), n H0 / (n+1)) with n = dim - 1.
SpeedInterval admissible_nu_interval(const DomainSpec& domain);

/// Deterministic, roughly uniform boundary samples.
std::vector<Point> sample_boundary(const DomainSpec& domain, int count);

/// Fraction s in (0, 1] with signed_distance(x + s * step * e_axis) == 0,
/// assuming x is inside and x + step * e_axis is not.
double boundary_crossing(const DomainSpec& domain, const Point& x, int axis,
                         double step);

// ---------------------------------------------------------------------------
// Grid embedding
// ---------------------------------------------------------------------------

enum class NodeKind : std::uint8_t { Exterior, Interior, NearBoundary };

/// Intersection of a grid line with the boundary, owned by the active node
/// `node`, at `node + side * theta * h * e_axis`.
struct BoundaryCut {
    std::int32_t node;
    int axis;
    int side;
    double theta;
    Point point;
};

/// One term of a linear stencil over the extended value vector.
struct StencilTerm {
    std::int32_t index;
    double weight;
};

/// Axis neighbours of an active node. Indices address the extended value
/// vector: [0, node_count) are grid nodes, node_count + c is the boundary
/// value at cut c.
struct AxisStencil {
    std::array<std::int32_t, 3> minus{-1, -1, -1};
    std::array<std::int32_t, 3> plus{-1, -1, -1};
    std::array<double, 3> h_minus{0.0, 0.0, 0.0};
    std::array<double, 3> h_plus{0.0, 0.0, 0.0};
};

/// Pinned node value = weight * value(source) + (1 - weight) * boundary(cut).
struct PinnedNode {
    std::int32_t node;
    std::int32_t source;
    std::int32_t cut;
    double weight;
};

/// Uniform node-centred Cartesian embedding of a domain.
///
/// Nodes are indexed with x1 varying fastest. A node is active when its
/// signed distance is positive; active nodes with an exterior axis neighbour
/// are NearBoundary and own one BoundaryCut per exterior direction.
/// NearBoundary nodes whose nearest cut has theta below kPinThreshold are
/// pinned: they follow the linear interpolation between the boundary point
/// and the opposite neighbour instead of being time-stepped.
class Grid {
public:
    static constexpr double kPinThreshold = 0.5;

    int dim() const { return dim_; }
    double spacing() const { return h_; }
    const DomainSpec& domain() const { return domain_; }
    const std::array<int, 3>& counts() const { return counts_; }
    const Point& lower() const { return lower_; }
    Point upper() const;
    std::int32_t node_count() const { return static_cast<std::int32_t>(kind_.size()); }
    std::int32_t cut_count() const { return static_cast<std::int32_t>(cuts_.size()); }
    std::int32_t extended_size() const { return node_count() + cut_count(); }

    NodeKind kind(std::int32_t node) const { return kind_[node]; }
    bool active(std::int32_t node) const { return kind_[node] != NodeKind::Exterior; }
    bool pinned(std::int32_t node) const { return pinned_flag_[node] != 0; }
    double distance(std::int32_t node) const { return distance_[node]; }
    Point position(std::int32_t node) const;
    std::array<int, 3> multi_index(std::int32_t node) const;
    /// Returns -1 outside the box.
    std::int32_t index(std::array<int, 3> ijk) const;

    /// Active nodes in index order.
    std::span<const std::int32_t> active_nodes() const { return active_; }
    /// Active nodes that are not pinned; these carry the time-stepped unknowns.
    std::span<const std::int32_t> stepped_nodes() const { return stepped_; }
    std::span<const PinnedNode> pinned_nodes() const { return pinned_; }
    std::span<const BoundaryCut> cuts() const { return cuts_; }

    /// Axis stencil for an active node (indexed by position in active_nodes()).
    const AxisStencil& axis_stencil(std::size_t active_pos) const { return axis_[active_pos]; }
    /// Mixed-derivative terms for pair p of an active node; pairs are ordered
    /// (0,1), (0,2), (1,2).
    std::span<const StencilTerm> mixed_terms(std::size_t active_pos, int pair) const;
    /// Position of an active node inside active_nodes(), or -1.
    std::int32_t active_position(std::int32_t node) const { return active_pos_[node]; }
    /// Quadrature weight of an active node (cell volume).
    double cell_volume(std::size_t active_pos) const { return volume_[active_pos]; }

    std::int32_t inside_count() const { return static_cast<std::int32_t>(active_.size()); }
    std::int32_t count(NodeKind kind) const;

    /// Minimum theta over the cuts owned by a node (1 for nodes without cuts).
    double min_theta(std::int32_t node) const;

private:
    friend Grid build_grid(const DomainSpec& domain, double spacing);

    DomainSpec domain_;
    int dim_ = 2;
    double h_ = 0.0;
    std::array<int, 3> counts_{1, 1, 1};
    Point lower_{};
    std::vector<NodeKind> kind_;
    std::vector<std::uint8_t> pinned_flag_;
    std::vector<double> distance_;
    std::vector<std::int32_t> active_;
    std::vector<std::int32_t> active_pos_;
    std::vector<std::int32_t> stepped_;
    std::vector<PinnedNode> pinned_;
    std::vector<BoundaryCut> cuts_;
    std::vector<AxisStencil> axis_;
    std::vector<std::int32_t> mixed_offsets_;
    std::vector<StencilTerm> mixed_;
    std::vector<double> volume_;
};

/// Builds the embedding. Throws mcf::Error when the spacing is non-positive or
/// larger than half the smallest shape parameter.
Grid build_grid(const DomainSpec& domain, double spacing);

/// Largest spacing build_grid accepts for a domain.
double max_grid_spacing(const DomainSpec& domain);

}  // namespace mcf
