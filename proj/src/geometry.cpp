#include "mcvd/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mcvd::geom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cell edge rule: at least one receiver diameter so a radius-a ball query
// never spans more than two cells per axis, but no finer than 1/256 of the
// domain radius to bound the cell count at large domains.
double default_cell_edge(double receiver_radius, double domain_radius) {
    return std::max(2.0 * receiver_radius, domain_radius / 256.0);
}

}  // namespace

UniformGridIndex::UniformGridIndex(const std::vector<Point3>& points, double half_extent,
                                   double cell_edge) {
    if (!(half_extent > 0.0) || !(cell_edge > 0.0)) {
        throw std::invalid_argument("UniformGridIndex: extent and cell edge must be > 0");
    }
    origin_ = -half_extent;
    edge_ = cell_edge;
    n_ = std::max(1, static_cast<int>(std::ceil(2.0 * half_extent / cell_edge)));
    const std::size_t n_cells = static_cast<std::size_t>(n_) * n_ * n_;
    start_.assign(n_cells + 1, 0);
    ids_.resize(points.size());

    auto cell_of = [&](const Point3& q) {
        return (static_cast<std::size_t>(coord(q.x)) * n_ + coord(q.y)) * n_ + coord(q.z);
    };
    for (const Point3& q : points) ++start_[cell_of(q) + 1];
    for (std::size_t c = 1; c <= n_cells; ++c) start_[c] += start_[c - 1];
    std::vector<std::uint32_t> cursor(start_.begin(), start_.end() - 1);
    for (std::uint32_t i = 0; i < points.size(); ++i) {
        ids_[cursor[cell_of(points[i])]++] = i;
    }
}

ReceiverField ReceiverField::from_centers(std::vector<Point3> centers, double radius,
                                          double domain_radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("ReceiverField: radius must be > 0");
    if (!(domain_radius > radius)) {
        throw std::invalid_argument("ReceiverField: domain_radius must exceed the receiver radius");
    }
    for (const Point3& c : centers) {
        const double r = norm(c);
        if (!(r > radius)) {
            throw std::invalid_argument("ReceiverField: center inside the transmitter exclusion ball");
        }
        if (!(r < domain_radius)) {
            throw std::invalid_argument("ReceiverField: center outside the truncation domain");
        }
    }
    ReceiverField f;
    f.radius = radius;
    f.domain_radius = domain_radius;
    f.index = UniformGridIndex(centers, domain_radius, default_cell_edge(radius, domain_radius));
    f.centers = std::move(centers);
    return f;
}

bool ReceiverField::contains(const Point3& q) const {
    if (centers.empty()) return false;
    const double r2 = radius * radius;
    bool hit = false;
    const Point3 lo{q.x - radius, q.y - radius, q.z - radius};
    const Point3 hi{q.x + radius, q.y + radius, q.z + radius};
    index.visit_box(lo, hi, [&](std::uint32_t id) {
        if (!hit && norm2(q - centers[id]) <= r2) hit = true;
    });
    return hit;
}

double ReceiverField::local_clearance(const Point3& q) const {
    if (centers.empty()) return kInf;
    const double reach = index.cell_edge();
    double best2 = reach * reach;
    const Point3 lo{q.x - reach, q.y - reach, q.z - reach};
    const Point3 hi{q.x + reach, q.y + reach, q.z + reach};
    index.visit_box(lo, hi, [&](std::uint32_t id) {
        best2 = std::min(best2, norm2(q - centers[id]));
    });
    // Any center not visited has an axis gap > reach, hence distance > reach.
    return std::sqrt(best2) - radius;
}

ReceiverField sample_receiver_field(const ChannelParams& p, double domain_radius,
                                    const RngStream& rng, double capacity_cap) {
    p.validate();
    if (!(domain_radius > p.a)) {
        throw std::invalid_argument("sample_receiver_field: domain_radius must exceed a");
    }
    const double a3 = p.a * p.a * p.a;
    const double R3 = domain_radius * domain_radius * domain_radius;
    const double shell_volume = (4.0 / 3.0) * std::numbers::pi * (R3 - a3);
    const double expected = p.lambda * shell_volume;
    if (expected > capacity_cap) {
        throw std::runtime_error("sample_receiver_field: expected receiver count exceeds capacity cap");
    }

    auto engine = rng.make_engine();
    std::vector<Point3> centers;
    if (expected > 0.0) {
        std::poisson_distribution<long long> count_dist(expected);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss;
        const long long count = count_dist(engine);
        centers.reserve(static_cast<std::size_t>(count));
        for (long long i = 0; i < count; ++i) {
            // Radius by inverse CDF on r^3: uniform in shell volume.
            double r;
            do {
                r = std::cbrt(a3 + unit(engine) * (R3 - a3));
            } while (!(r > p.a) || !(r < domain_radius));
            // Direction from a normalized Gaussian triple.
            double nx, ny, nz, n2;
            do {
                nx = gauss(engine);
                ny = gauss(engine);
                nz = gauss(engine);
                n2 = nx * nx + ny * ny + nz * nz;
            } while (n2 < 1e-30);
            const double s = r / std::sqrt(n2);
            centers.push_back({nx * s, ny * s, nz * s});
        }
    }
    return ReceiverField::from_centers(std::move(centers), p.a, domain_radius);
}

std::optional<SegmentHit> first_hit_on_segment(const ReceiverField& field, const Point3& from,
                                               const Point3& to) {
    if (!std::isfinite(norm2(from)) || !std::isfinite(norm2(to))) {
        throw std::invalid_argument("first_hit_on_segment: endpoints must be finite");
    }
    if (field.centers.empty()) return std::nullopt;
    const double a = field.radius;
    const Point3 d = to - from;
    const double dd = norm2(d);

    const Point3 lo{std::min(from.x, to.x) - a, std::min(from.y, to.y) - a,
                    std::min(from.z, to.z) - a};
    const Point3 hi{std::max(from.x, to.x) + a, std::max(from.y, to.y) + a,
                    std::max(from.z, to.z) + a};

    double best = kInf;
    field.index.visit_box(lo, hi, [&](std::uint32_t id) {
        const Point3 m = from - field.centers[id];
        const double c0 = norm2(m) - a * a;
        if (c0 <= 0.0) {  // already inside/on this sphere at the segment start
            best = 0.0;
            return;
        }
        if (dd == 0.0) return;
        const double b = dot(m, d);
        if (b >= 0.0) return;  // moving away
        const double disc = b * b - dd * c0;
        if (disc < 0.0) return;
        const double u = (-b - std::sqrt(disc)) / dd;  // first surface crossing
        if (u >= 0.0 && u <= 1.0 && u < best) best = u;
    });
    if (best == kInf) return std::nullopt;
    return SegmentHit{{from.x + best * d.x, from.y + best * d.y, from.z + best * d.z}, best};
}

double nearest_surface_distance(const ReceiverField& field, const Point3& q) {
    if (!std::isfinite(norm2(q))) {
        throw std::invalid_argument("nearest_surface_distance: point must be finite");
    }
    if (field.centers.empty()) return kInf;
    const double edge = field.index.cell_edge();
    // Expanding box search: a center not found inside box radius k*edge has
    // some axis gap > k*edge, so once best <= k*edge the minimum is certain.
    const double span = 2.0 * field.domain_radius + norm(q);
    double best = kInf;
    for (int k = 1;; ++k) {
        const double reach = k * edge;
        const Point3 lo{q.x - reach, q.y - reach, q.z - reach};
        const Point3 hi{q.x + reach, q.y + reach, q.z + reach};
        double best2 = kInf;
        field.index.visit_box(lo, hi, [&](std::uint32_t id) {
            best2 = std::min(best2, norm2(q - field.centers[id]));
        });
        if (best2 < kInf) best = std::min(best, std::sqrt(best2));
        if (best <= reach || reach > span) break;
    }
    return best - field.radius;
}

void save_centers_csv(const ReceiverField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_centers_csv: cannot open " + path);
    out << "x_um,y_um,z_um\n";
    char buf[96];
    for (const Point3& c : field.centers) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", c.x, c.y, c.z);
        out << buf;
    }
}

ReceiverField load_centers_csv(const std::string& path, double radius, double domain_radius) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_centers_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_centers_csv: empty file");
    std::vector<Point3> centers;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Point3 c;
        std::istringstream ss(line);
        char comma;
        if (!(ss >> c.x >> comma >> c.y >> comma >> c.z)) {
            throw std::runtime_error("load_centers_csv: malformed row: " + line);
        }
        centers.push_back(c);
    }
    return ReceiverField::from_centers(std::move(centers), radius, domain_radius);
}

}  // namespace mcvd::geom
