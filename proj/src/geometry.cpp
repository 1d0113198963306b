#include "mcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kProjectionMaxIter = 64;
constexpr double kProjectionTol = 1e-12;

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double norm(const Point& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

double stadium_outside_distance(const DomainSpec& s, const Point& y) {
    const double qx = std::abs(y[0]) - (s.half_width - s.corner_radius);
    const double qy = std::abs(y[1]) - s.straight_half_length;
    const double ox = std::max(qx, 0.0);
    const double oy = std::max(qy, 0.0);
    return std::sqrt(ox * ox + oy * oy) + std::min(std::max(qx, qy), 0.0) - s.corner_radius;
}

/// Nearest point on the ellipse to a first-quadrant point (px, py >= 0),
/// returned as the parameter t in [0, pi/2].
double ellipse_nearest_parameter(double a, double b, double px, double py) {
    auto f = [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return (a * c - px) * (-a * s) + (b * s - py) * (b * c);
    };
    auto fprime = [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return a * a * s * s + b * b * c * c + (a * c - px) * (-a * c) + (b * s - py) * (-b * s);
    };
    auto dist2 = [&](double t) {
        const double dx = a * std::cos(t) - px, dy = b * std::sin(t) - py;
        return dx * dx + dy * dy;
    };

    constexpr int kSamples = 64;
    const double dt = 0.5 * kPi / (kSamples - 1);
    int best = 0;
    double best_d = dist2(0.0);
    for (int i = 1; i < kSamples; ++i) {
        const double d = dist2(i * dt);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    const double tb = best * dt;
    const double fb = f(tb);
    if (fb == 0.0) return tb;

    // Bracket a sign change from - to + adjacent to the best sample.
    double lo, hi;
    if (fb < 0.0) {
        lo = tb;
        hi = std::min(tb + dt, 0.5 * kPi);
        if (f(hi) < 0.0) return hi;  // minimum sits on the endpoint t = pi/2
    } else {
        hi = tb;
        lo = std::max(tb - dt, 0.0);
        if (f(lo) > 0.0) return lo;
    }

    double t = 0.5 * (lo + hi);
    for (int it = 0; it < kProjectionMaxIter; ++it) {
        const double ft = f(t);
        if (ft < 0.0) lo = t; else hi = t;
        const double fp = fprime(t);
        double next = (fp > 0.0) ? t - ft / fp : 0.5 * (lo + hi);
        // Damping: fall back to bisection when Newton leaves the bracket.
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) < kProjectionTol || hi - lo < kProjectionTol) return next;
        t = next;
    }
    throw ProjectionError("ellipse projection did not converge", {a * std::cos(t), b * std::sin(t), 0.0});
}

}  // namespace

const char* to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::Ball: return "ball";
        case DomainKind::Ellipse: return "ellipse";
        case DomainKind::Stadium: return "stadium";
    }
    return "unknown";
}

DomainSpec DomainSpec::ball(double radius, int dim, Point center) {
    DomainSpec d;
    d.kind = DomainKind::Ball;
    d.dim = dim;
    d.center = center;
    d.radius = radius;
    return d;
}

DomainSpec DomainSpec::ellipse(double a, double b, Point center) {
    DomainSpec d;
    d.kind = DomainKind::Ellipse;
    d.dim = 2;
    d.center = center;
    d.semi_a = a;
    d.semi_b = b;
    return d;
}

DomainSpec DomainSpec::stadium(double half_width, double straight_half_length,
                               double corner_radius, Point center) {
    DomainSpec d;
    d.kind = DomainKind::Stadium;
    d.dim = 2;
    d.center = center;
    d.half_width = half_width;
    d.straight_half_length = straight_half_length;
    d.corner_radius = corner_radius;
    return d;
}

void DomainSpec::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(std::string("domain.") + name + " must be strictly positive");
    };
    switch (kind) {
        case DomainKind::Ball:
            if (dim != 2 && dim != 3) throw Error("domain.dim must be 2 or 3");
            positive(radius, "radius");
            break;
        case DomainKind::Ellipse:
            if (dim != 2) throw Error("domain.dim must be 2 for an ellipse");
            positive(semi_a, "a");
            positive(semi_b, "b");
            if (semi_a < semi_b) throw Error("domain.a must be >= domain.b");
            break;
        case DomainKind::Stadium:
            if (dim != 2) throw Error("domain.dim must be 2 for a stadium");
            positive(half_width, "half_width");
            positive(straight_half_length, "straight_half_length");
            positive(corner_radius, "corner_radius");
            if (corner_radius > half_width)
                throw Error("domain.corner_radius must be <= domain.half_width");
            break;
    }
}

double DomainSpec::smallest_parameter() const {
    switch (kind) {
        case DomainKind::Ball: return radius;
        case DomainKind::Ellipse: return std::min(semi_a, semi_b);
        case DomainKind::Stadium:
            return std::min({half_width, straight_half_length, corner_radius});
    }
    return radius;
}

Point DomainSpec::half_extents() const {
    switch (kind) {
        case DomainKind::Ball:
            return {radius, radius, dim == 3 ? radius : 0.0};
        case DomainKind::Ellipse:
            return {semi_a, semi_b, 0.0};
        case DomainKind::Stadium:
            return {half_width, straight_half_length + corner_radius, 0.0};
    }
    return {};
}

double DomainSpec::diameter() const {
    switch (kind) {
        case DomainKind::Ball: return 2.0 * radius;
        case DomainKind::Ellipse: return 2.0 * semi_a;
        case DomainKind::Stadium: {
            // Farthest pair of boundary points: opposite rounded corners.
            const double cx = half_width - corner_radius;
            const double cy = straight_half_length;
            return 2.0 * (std::hypot(cx, cy) + corner_radius);
        }
    }
    return 0.0;
}

Point project_to_boundary(const DomainSpec& domain, const Point& x) {
    const Point y = sub(x, domain.center);
    switch (domain.kind) {
        case DomainKind::Ball: {
            const double r = norm(y);
            Point dir = r > 0.0 ? Point{y[0] / r, y[1] / r, y[2] / r} : Point{1.0, 0.0, 0.0};
            return {domain.center[0] + domain.radius * dir[0],
                    domain.center[1] + domain.radius * dir[1],
                    domain.center[2] + domain.radius * dir[2]};
        }
        case DomainKind::Ellipse: {
            const double t = ellipse_nearest_parameter(domain.semi_a, domain.semi_b,
                                                       std::abs(y[0]), std::abs(y[1]));
            return {domain.center[0] + sign_of(y[0]) * domain.semi_a * std::cos(t),
                    domain.center[1] + sign_of(y[1]) * domain.semi_b * std::sin(t), 0.0};
        }
        case DomainKind::Stadium: {
            // Walk along the distance gradient, estimated by central differences
            // of the exact distance; one step lands on the boundary up to the
            // exactness of the gradient.
            Point p = x;
            for (int it = 0; it < kProjectionMaxIter; ++it) {
                const double d = signed_distance(domain, p);
                if (std::abs(d) < kProjectionTol) return p;
                const double e = 1e-7;
                Point g{};
                for (int k = 0; k < 2; ++k) {
                    Point a = p, b = p;
                    a[k] += e;
                    b[k] -= e;
                    g[k] = (signed_distance(domain, a) - signed_distance(domain, b)) / (2 * e);
                }
                const double gn = std::hypot(g[0], g[1]);
                if (gn == 0.0) break;
                p[0] += d * g[0] / gn;
                p[1] += d * g[1] / gn;
            }
            if (std::abs(signed_distance(domain, p)) < 1e-10) return p;
            throw ProjectionError("stadium projection did not converge", p);
        }
    }
    return x;
}

double signed_distance(const DomainSpec& domain, const Point& x) {
    const Point y = sub(x, domain.center);
    switch (domain.kind) {
        case DomainKind::Ball:
            return domain.radius - norm(y);
        case DomainKind::Ellipse: {
            const double a = domain.semi_a, b = domain.semi_b;
            const double px = std::abs(y[0]), py = std::abs(y[1]);
            const double t = ellipse_nearest_parameter(a, b, px, py);
            const double dist = std::hypot(a * std::cos(t) - px, b * std::sin(t) - py);
            const double level = (px / a) * (px / a) + (py / b) * (py / b);
            return level < 1.0 ? dist : -dist;
        }
        case DomainKind::Stadium:
            return -stadium_outside_distance(domain, y);
    }
    return 0.0;
}

double boundary_mean_curvature_bound(const DomainSpec& domain) {
    switch (domain.kind) {
        case DomainKind::Ball:
            return 1.0 / domain.radius;
        case DomainKind::Ellipse:
            return domain.semi_b / (domain.semi_a * domain.semi_a);
        case DomainKind::Stadium: {
            // Sampled: flat walls have zero curvature, rounded corners 1/r_c.
            constexpr int kSamples = 20000;
            const double r = domain.corner_radius;
            const double wall = 2.0 * domain.straight_half_length;
            const double cap = 2.0 * (domain.half_width - r);
            const double arc = 0.5 * kPi * r;
            const double perimeter = 2.0 * wall + 2.0 * cap + 4.0 * arc;
            double h0 = std::numeric_limits<double>::infinity();
            for (int i = 0; i < kSamples; ++i) {
                double s = std::fmod((i + 0.5) * perimeter / kSamples, perimeter / 2.0);
                const double k = (s < wall) ? 0.0
                                 : (s < wall + arc) ? 1.0 / r
                                 : (s < wall + arc + cap) ? 0.0
                                                          : 1.0 / r;
                h0 = std::min(h0, k);
            }
            return h0;
        }
    }
    return 0.0;
}

double boundary_max_curvature(const DomainSpec& domain) {
    switch (domain.kind) {
        case DomainKind::Ball: return 1.0 / domain.radius;
        case DomainKind::Ellipse: return domain.semi_a / (domain.semi_b * domain.semi_b);
        case DomainKind::Stadium: return 1.0 / domain.corner_radius;
    }
    return 0.0;
}

SpeedInterval admissible_nu_interval(const DomainSpec& domain) {
    const int n = domain.dim - 1;
    const double bound = n * boundary_mean_curvature_bound(domain) / (n + 1);
    return {-bound, bound};
}

std::vector<Point> sample_boundary(const DomainSpec& domain, int count) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(count));
    const Point& c = domain.center;
    switch (domain.kind) {
        case DomainKind::Ball:
            if (domain.dim == 2) {
                for (int i = 0; i < count; ++i) {
                    const double t = 2.0 * kPi * i / count;
                    out.push_back({c[0] + domain.radius * std::cos(t),
                                   c[1] + domain.radius * std::sin(t), 0.0});
                }
            } else {
                // Fibonacci lattice on the sphere.
                const double golden = kPi * (3.0 - std::sqrt(5.0));
                for (int i = 0; i < count; ++i) {
                    const double z = 1.0 - 2.0 * (i + 0.5) / count;
                    const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
                    const double phi = golden * i;
                    out.push_back({c[0] + domain.radius * rr * std::cos(phi),
                                   c[1] + domain.radius * rr * std::sin(phi),
                                   c[2] + domain.radius * z});
                }
            }
            break;
        case DomainKind::Ellipse:
            for (int i = 0; i < count; ++i) {
                const double t = 2.0 * kPi * i / count;
                out.push_back({c[0] + domain.semi_a * std::cos(t),
                               c[1] + domain.semi_b * std::sin(t), 0.0});
            }
            break;
        case DomainKind::Stadium: {
            const double r = domain.corner_radius;
            const double ix = domain.half_width - r;       // inner rectangle half extents
            const double iy = domain.straight_half_length;
            const double wall = 2.0 * iy, cap = 2.0 * ix, arc = 0.5 * kPi * r;
            const double perimeter = 2.0 * (wall + cap) + 4.0 * arc;
            for (int i = 0; i < count; ++i) {
                double s = perimeter * i / count;
                Point p{};
                // Counter-clockwise from the bottom of the right wall.
                if (s < wall) {
                    p = {ix + r, -iy + s, 0.0};
                } else if ((s -= wall) < arc) {
                    const double t = s / r;
                    p = {ix + r * std::cos(t), iy + r * std::sin(t), 0.0};
                } else if ((s -= arc) < cap) {
                    p = {ix - s, iy + r, 0.0};
                } else if ((s -= cap) < arc) {
                    const double t = 0.5 * kPi + s / r;
                    p = {-ix + r * std::cos(t), iy + r * std::sin(t), 0.0};
                } else if ((s -= arc) < wall) {
                    p = {-ix - r, iy - s, 0.0};
                } else if ((s -= wall) < arc) {
                    const double t = kPi + s / r;
                    p = {-ix + r * std::cos(t), -iy + r * std::sin(t), 0.0};
                } else if ((s -= arc) < cap) {
                    p = {-ix + s, -iy - r, 0.0};
                } else {
                    s -= cap;
                    const double t = 1.5 * kPi + s / r;
                    p = {ix + r * std::cos(t), -iy + r * std::sin(t), 0.0};
                }
                out.push_back({c[0] + p[0], c[1] + p[1], 0.0});
            }
            break;
        }
    }
    return out;
}

double boundary_crossing(const DomainSpec& domain, const Point& x, int axis, double step) {
    Point end = x;
    end[axis] += step;
    if (signed_distance(domain, end) == 0.0) return 1.0;
    const Point y = sub(x, domain.center);
    const double dir = sign_of(step);
    auto clamp_fraction = [](double s) { return std::clamp(s, std::numeric_limits<double>::min(), 1.0); };
    switch (domain.kind) {
        case DomainKind::Ball: {
            double rest = 0.0;
            for (int k = 0; k < 3; ++k)
                if (k != axis) rest += y[k] * y[k];
            const double reach = std::sqrt(std::max(0.0, domain.radius * domain.radius - rest));
            return clamp_fraction((dir * reach - y[axis]) / step);
        }
        case DomainKind::Ellipse: {
            const double a = domain.semi_a, b = domain.semi_b;
            const double reach = (axis == 0) ? a * std::sqrt(std::max(0.0, 1.0 - (y[1] / b) * (y[1] / b)))
                                             : b * std::sqrt(std::max(0.0, 1.0 - (y[0] / a) * (y[0] / a)));
            return clamp_fraction((dir * reach - y[axis]) / step);
        }
        case DomainKind::Stadium: {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                Point p = x;
                p[axis] += mid * step;
                if (signed_distance(domain, p) > 0.0) lo = mid; else hi = mid;
            }
            return clamp_fraction(hi);
        }
    }
    return 1.0;
}

// ---------------------------------------------------------------------------

double max_grid_spacing(const DomainSpec& domain) { return 0.5 * domain.smallest_parameter(); }

Point Grid::upper() const {
    Point u = lower_;
    for (int k = 0; k < dim_; ++k) u[k] += (counts_[k] - 1) * h_;
    return u;
}

Point Grid::position(std::int32_t node) const {
    const auto ijk = multi_index(node);
    Point p{};
    for (int k = 0; k < dim_; ++k) p[k] = lower_[k] + ijk[k] * h_;
    return p;
}

std::array<int, 3> Grid::multi_index(std::int32_t node) const {
    std::array<int, 3> ijk{0, 0, 0};
    ijk[0] = node % counts_[0];
    ijk[1] = (node / counts_[0]) % counts_[1];
    ijk[2] = node / (counts_[0] * counts_[1]);
    return ijk;
}

std::int32_t Grid::index(std::array<int, 3> ijk) const {
    for (int k = 0; k < 3; ++k)
        if (ijk[k] < 0 || ijk[k] >= counts_[k]) return -1;
    return ijk[0] + counts_[0] * (ijk[1] + counts_[1] * ijk[2]);
}

std::span<const StencilTerm> Grid::mixed_terms(std::size_t active_pos, int pair) const {
    const std::size_t slot = active_pos * 3 + static_cast<std::size_t>(pair);
    const auto begin = static_cast<std::size_t>(mixed_offsets_[slot]);
    const auto end = static_cast<std::size_t>(mixed_offsets_[slot + 1]);
    return std::span<const StencilTerm>(mixed_).subspan(begin, end - begin);
}

std::int32_t Grid::count(NodeKind kind) const {
    return static_cast<std::int32_t>(std::count(kind_.begin(), kind_.end(), kind));
}

double Grid::min_theta(std::int32_t node) const {
    const auto pos = active_pos_[node];
    if (pos < 0) return 0.0;
    const auto& st = axis_[pos];
    double m = 1.0;
    for (int k = 0; k < dim_; ++k) {
        m = std::min(m, st.h_minus[k] / h_);
        m = std::min(m, st.h_plus[k] / h_);
    }
    return m;
}

Grid build_grid(const DomainSpec& domain, double spacing) {
    domain.validate();
    const double limit = max_grid_spacing(domain);
    if (!(spacing > 0.0)) throw Error("grid spacing must be positive");
    if (spacing > limit) {
        std::ostringstream os;
        os << "grid spacing " << spacing << " too coarse for " << to_string(domain.kind)
           << "; required spacing <= " << limit;
        throw Error(os.str());
    }

    Grid g;
    g.domain_ = domain;
    g.dim_ = domain.dim;
    g.h_ = spacing;
    const Point ext = domain.half_extents();
    for (int k = 0; k < 3; ++k) {
        if (k < g.dim_) {
            const int half = static_cast<int>(std::ceil(ext[k] / spacing - 1e-9));
            g.counts_[k] = 2 * half + 1;
            g.lower_[k] = domain.center[k] - half * spacing;
        } else {
            g.counts_[k] = 1;
            g.lower_[k] = 0.0;
        }
    }
    const std::int32_t n = g.counts_[0] * g.counts_[1] * g.counts_[2];
    g.kind_.assign(static_cast<std::size_t>(n), NodeKind::Exterior);
    g.pinned_flag_.assign(static_cast<std::size_t>(n), 0);
    g.distance_.resize(static_cast<std::size_t>(n));
    g.active_pos_.assign(static_cast<std::size_t>(n), -1);

    for (std::int32_t i = 0; i < n; ++i) {
        g.distance_[i] = signed_distance(domain, g.position(i));
        if (g.distance_[i] > 0.0) {
            g.kind_[i] = NodeKind::Interior;
            g.active_pos_[i] = static_cast<std::int32_t>(g.active_.size());
            g.active_.push_back(i);
        }
    }

    // Axis stencils and boundary cuts.
    g.axis_.resize(g.active_.size());
    for (std::size_t pos = 0; pos < g.active_.size(); ++pos) {
        const std::int32_t node = g.active_[pos];
        const auto ijk = g.multi_index(node);
        const Point x = g.position(node);
        auto& st = g.axis_[pos];
        for (int k = 0; k < g.dim_; ++k) {
            for (int side : {-1, 1}) {
                auto nb = ijk;
                nb[k] += side;
                const std::int32_t j = g.index(nb);
                std::int32_t slot;
                double len;
                if (j >= 0 && g.distance_[j] > 0.0) {
                    slot = j;
                    len = spacing;
                } else {
                    const double theta = boundary_crossing(domain, x, k, side * spacing);
                    Point b = x;
                    b[k] += side * theta * spacing;
                    slot = n + static_cast<std::int32_t>(g.cuts_.size());
                    g.cuts_.push_back({node, k, side, theta, b});
                    len = theta * spacing;
                    g.kind_[node] = NodeKind::NearBoundary;
                }
                if (side < 0) {
                    st.minus[k] = slot;
                    st.h_minus[k] = len;
                } else {
                    st.plus[k] = slot;
                    st.h_plus[k] = len;
                }
            }
        }
    }

    // Pinned nodes: nearest cut closer than kPinThreshold * h.
    for (std::int32_t node : g.active_)
        if (g.min_theta(node) < Grid::kPinThreshold) g.pinned_flag_[node] = 1;
    std::vector<std::int32_t> nearest_cut(static_cast<std::size_t>(n), -1);
    for (std::size_t c = 0; c < g.cuts_.size(); ++c) {
        const auto& cut = g.cuts_[c];
        auto& best = nearest_cut[cut.node];
        if (best < 0 || cut.theta < g.cuts_[best].theta) best = static_cast<std::int32_t>(c);
    }
    for (std::int32_t node : g.active_) {
        if (!g.pinned_flag_[node]) continue;
        const std::int32_t c = nearest_cut[node];
        const auto& cut = g.cuts_[c];
        const auto& st = g.axis_[g.active_pos_[node]];
        const std::int32_t opposite = cut.side > 0 ? st.minus[cut.axis] : st.plus[cut.axis];
        PinnedNode p{node, node, c, 0.0};
        if (opposite < n && !g.pinned_flag_[opposite]) {
            p.source = opposite;
            p.weight = cut.theta / (1.0 + cut.theta);
        }
        g.pinned_.push_back(p);
    }
    for (std::int32_t node : g.active_)
        if (!g.pinned_flag_[node]) g.stepped_.push_back(node);

    // Mixed-derivative stencils.
    const double inv_h2 = 1.0 / (spacing * spacing);
    g.mixed_offsets_.reserve(g.active_.size() * 3 + 1);
    g.mixed_offsets_.push_back(0);
    auto available = [&](std::array<int, 3> ijk) {
        const std::int32_t j = g.index(ijk);
        return (j >= 0 && g.distance_[j] > 0.0) ? j : -1;
    };
    constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (std::size_t pos = 0; pos < g.active_.size(); ++pos) {
        const std::int32_t node = g.active_[pos];
        const auto ijk = g.multi_index(node);
        for (int p = 0; p < 3; ++p) {
            const int k = kPairs[p][0], l = kPairs[p][1];
            if (l < g.dim_) {
                auto shifted = [&](int sk, int sl) {
                    auto m = ijk;
                    m[k] += sk;
                    m[l] += sl;
                    return available(m);
                };
                const std::int32_t pp = shifted(1, 1), pm = shifted(1, -1);
                const std::int32_t mp = shifted(-1, 1), mm = shifted(-1, -1);
                if (pp >= 0 && pm >= 0 && mp >= 0 && mm >= 0) {
                    const double w = 0.25 * inv_h2;
                    g.mixed_.push_back({pp, w});
                    g.mixed_.push_back({pm, -w});
                    g.mixed_.push_back({mp, -w});
                    g.mixed_.push_back({mm, w});
                } else {
                    std::vector<std::array<std::int32_t, 4>> quads;
                    std::vector<double> signs;
                    for (int sk : {-1, 1})
                        for (int sl : {-1, 1}) {
                            const std::int32_t d = shifted(sk, sl);
                            const std::int32_t ak = shifted(sk, 0);
                            const std::int32_t al = shifted(0, sl);
                            if (d >= 0 && ak >= 0 && al >= 0) {
                                quads.push_back({d, ak, al, node});
                                signs.push_back(sk * sl);
                            }
                        }
                    if (!quads.empty()) {
                        const double w = inv_h2 / static_cast<double>(quads.size());
                        for (std::size_t q = 0; q < quads.size(); ++q) {
                            const double s = signs[q] * w;
                            g.mixed_.push_back({quads[q][0], s});
                            g.mixed_.push_back({quads[q][1], -s});
                            g.mixed_.push_back({quads[q][2], -s});
                            g.mixed_.push_back({quads[q][3], s});
                        }
                    }
                }
            }
            g.mixed_offsets_.push_back(static_cast<std::int32_t>(g.mixed_.size()));
        }
    }

    // Cell volumes: half a spacing towards grid neighbours, theta towards cuts.
    g.volume_.resize(g.active_.size());
    for (std::size_t pos = 0; pos < g.active_.size(); ++pos) {
        const auto& st = g.axis_[pos];
        double vol = 1.0;
        for (int k = 0; k < g.dim_; ++k) {
            const double lm = st.minus[k] >= n ? st.h_minus[k] : 0.5 * spacing;
            const double lp = st.plus[k] >= n ? st.h_plus[k] : 0.5 * spacing;
            vol *= lm + lp;
        }
        g.volume_[pos] = vol;
    }
    return g;
}

}  // namespace mcf
