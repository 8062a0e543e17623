#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mcvd/channel.hpp"

/// Receiver-field geometry: sampling one realization of the Boolean Poisson
/// process of spherical receivers around the transmitter, plus the point and
/// segment queries the particle simulator runs in its inner loop.

namespace mcvd::geom {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Point3& a) { return dot(a, a); }
inline double norm(const Point3& a) { return std::sqrt(norm2(a)); }

/// Reproducible stream descriptor: identical (seed, stream_id) always yield
/// the identical engine sequence, independent of scheduling or worker count.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    std::mt19937_64 make_engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        return std::mt19937_64(seq);
    }
};

/// Uniform-grid spatial index over points in the cube [-half_extent, half_extent]^3.
/// Cells are closed-open boxes of edge cell_edge; point ids are bucketed by
/// counting sort.  Query positions outside the cube clamp onto the boundary
/// cells, which is safe because all indexed points lie inside.
class UniformGridIndex {
public:
    UniformGridIndex() = default;
    UniformGridIndex(const std::vector<Point3>& points, double half_extent, double cell_edge);

    double cell_edge() const { return edge_; }
    bool empty() const { return ids_.empty(); }

    /// Invokes fn(id) for every indexed point whose cell intersects the
    /// axis-aligned box [lo, hi].
    template <class Fn>
    void visit_box(const Point3& lo, const Point3& hi, Fn&& fn) const {
        if (ids_.empty()) return;
        const int x0 = coord(lo.x), x1 = coord(hi.x);
        const int y0 = coord(lo.y), y1 = coord(hi.y);
        const int z0 = coord(lo.z), z1 = coord(hi.z);
        for (int ix = x0; ix <= x1; ++ix) {
            for (int iy = y0; iy <= y1; ++iy) {
                const std::size_t base = (static_cast<std::size_t>(ix) * n_ + iy) * n_;
                for (int iz = z0; iz <= z1; ++iz) {
                    const std::size_t c = base + iz;
                    for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) fn(ids_[k]);
                }
            }
        }
    }

private:
    int coord(double v) const {
        int c = static_cast<int>((v - origin_) / edge_);
        if (c < 0) c = 0;
        if (c >= n_) c = n_ - 1;
        return c;
    }

    double origin_ = 0.0;
    double edge_ = 1.0;
    int n_ = 0;
    std::vector<std::uint32_t> start_;  // n^3 + 1 cell offsets
    std::vector<std::uint32_t> ids_;
};

/// One realization of the receiver deployment: sphere centers, their common
/// radius, the simulation truncation radius, and the spatial index.
/// Immutable after construction; concurrent queries are safe.
struct ReceiverField {
    std::vector<Point3> centers;
    double radius = 0.0;         ///< receiver radius a [um]
    double domain_radius = 0.0;  ///< truncation radius of the sampled region [um]
    UniformGridIndex index;

    /// Builds a field from explicit centers (validates the placement
    /// invariants: strictly outside B(0, radius), inside B(0, domain_radius)).
    static ReceiverField from_centers(std::vector<Point3> centers, double radius,
                                      double domain_radius);

    /// True when q lies inside or on any receiver sphere.
    bool contains(const Point3& q) const;

    /// Lower bound on the distance from q to the nearest receiver surface,
    /// exact whenever the nearest center lies within one grid cell edge.
    /// Negative or zero means q is inside/on a receiver; +infinity for an
    /// empty field.  This is the simulator's step-budget query.
    double local_clearance(const Point3& q) const;
};

/// Samples receiver centers as a uniform Poisson process of density
/// p.lambda on the spherical shell p.a < r < domain_radius (inverse-CDF in
/// r^3, exact) and builds the index.  Throws std::runtime_error when the
/// expected center count exceeds capacity_cap.
ReceiverField sample_receiver_field(const ChannelParams& p, double domain_radius,
                                    const RngStream& rng, double capacity_cap = 1e8);

struct SegmentHit {
    Point3 point;
    double fraction = 0.0;  ///< parametric position in [0, 1] along from->to
};

/// Earliest intersection of the segment from->to with any receiver surface,
/// or nullopt.  Exact quadratic solve per candidate sphere.
std::optional<SegmentHit> first_hit_on_segment(const ReceiverField& field, const Point3& from,
                                               const Point3& to);

/// Signed distance from q to the nearest receiver surface (negative inside);
/// +infinity sentinel for an empty field.
double nearest_surface_distance(const ReceiverField& field, const Point3& q);

/// Center dump/load for reproducibility (CSV columns x_um,y_um,z_um with
/// 17-significant-digit values, so the round trip is bit exact).
void save_centers_csv(const ReceiverField& field, const std::string& path);
ReceiverField load_centers_csv(const std::string& path, double radius, double domain_radius);

}  // namespace mcvd::geom
