#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

#include "mcvd/geometry.hpp"

namespace geo = mcvd::geom;
using geo::Point3;
using geo::ReceiverField;
using geo::RngStream;
using mcvd::ChannelParams;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute-force references, written independently of the indexed queries.
double brute_nearest_surface(const ReceiverField& f, const Point3& q) {
    double best = kInf;
    for (const Point3& c : f.centers) best = std::min(best, geo::norm(q - c));
    return best == kInf ? kInf : best - f.radius;
}

std::optional<double> brute_first_hit_fraction(const ReceiverField& f, const Point3& from,
                                               const Point3& to) {
    const Point3 d = to - from;
    const double dd = geo::norm2(d);
    double best = kInf;
    for (const Point3& c : f.centers) {
        const Point3 m = from - c;
        const double c0 = geo::norm2(m) - f.radius * f.radius;
        if (c0 <= 0.0) return 0.0;
        if (dd == 0.0) continue;
        const double b = geo::dot(m, d);
        const double disc = b * b - dd * c0;
        if (disc < 0.0) continue;
        const double u = (-b - std::sqrt(disc)) / dd;
        if (u >= 0.0 && u <= 1.0) best = std::min(best, u);
    }
    if (best == kInf) return std::nullopt;
    return best;
}

// 99th percentile of chi-square via the Wilson-Hilferty cube approximation.
double chi2_crit_99(double df) {
    const double z99 = 2.3263478740408408;
    const double h = 2.0 / (9.0 * df);
    const double c = 1.0 - h + z99 * std::sqrt(h);
    return df * c * c * c;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("sample_receiver_field: empty for zero density, capacity cap") {
    ChannelParams p{5.0, 100.0, 0.0, 0.0};
    const auto f = geo::sample_receiver_field(p, 200.0, {1, 0});
    CHECK(f.centers.empty());
    CHECK(f.radius == 5.0);

    ChannelParams dense{5.0, 100.0, 1.0, 0.0};
    CHECK_THROWS_AS(geo::sample_receiver_field(dense, 1000.0, {1, 0}), std::runtime_error);
    CHECK_THROWS_AS(geo::sample_receiver_field(p, 4.0, {1, 0}), std::invalid_argument);
}

TEST_CASE("sample_receiver_field: Poisson mean over 200 draws") {
    ChannelParams p{5.0, 100.0, 1e-5, 0.0};
    const double R = 500.0;
    const double mean = p.lambda * (4.0 / 3.0) * M_PI * (R * R * R - std::pow(p.a, 3));
    CHECK(mean == doctest::Approx(5235.9).epsilon(1e-3));

    double total = 0.0;
    const int draws = 200;
    for (int i = 0; i < draws; ++i) {
        total += static_cast<double>(geo::sample_receiver_field(p, R, {42, static_cast<std::uint64_t>(i)}).centers.size());
    }
    const double empirical = total / draws;
    const double sigma = std::sqrt(mean / draws);
    CHECK(std::fabs(empirical - mean) < 3.0 * sigma);
}

TEST_CASE("sample_receiver_field: exclusion ball and domain invariants") {
    // ~1e5 centers in one large draw
    ChannelParams p{5.0, 100.0, 1e-4, 0.0};
    const double R = 620.35;
    const auto f = geo::sample_receiver_field(p, R, {7, 0});
    CHECK(f.centers.size() > 90000);
    for (const Point3& c : f.centers) {
        const double r = geo::norm(c);
        CHECK(r > p.a);
        CHECK(r < R);
    }
}

TEST_CASE("sample_receiver_field: radial inverse-CDF uniformity (KS at 1%)") {
    ChannelParams p{5.0, 100.0, 1e-4, 0.0};
    const double R = 620.35;
    const auto f = geo::sample_receiver_field(p, R, {8, 0});
    std::vector<double> radii;
    radii.reserve(f.centers.size());
    for (const Point3& c : f.centers) radii.push_back(geo::norm(c));
    std::sort(radii.begin(), radii.end());
    const double n = static_cast<double>(radii.size());
    const double a3 = std::pow(p.a, 3), R3 = R * R * R;
    double ks = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double cdf = (std::pow(radii[i], 3) - a3) / (R3 - a3);
        ks = std::max(ks, std::fabs(cdf - static_cast<double>(i + 1) / n));
        ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / n));
    }
    CHECK(ks < 1.628 / std::sqrt(n));
}

TEST_CASE("sample_receiver_field: Poisson count chi-square GOF (1% level)") {
    // small mean so the count distribution is resolvable across 500 draws
    ChannelParams p{2.0, 100.0, 1e-3, 0.0};
    const double R = 19.5;
    const double mean = p.lambda * (4.0 / 3.0) * M_PI * (std::pow(R, 3) - std::pow(p.a, 3));

    const int draws = 500;
    std::vector<int> counts;
    counts.reserve(draws);
    for (int i = 0; i < draws; ++i) {
        counts.push_back(static_cast<int>(
            geo::sample_receiver_field(p, R, {99, static_cast<std::uint64_t>(i)}).centers.size()));
    }

    // bins fixed from the known mean: k = 0.. pooled so expected >= 5
    std::vector<double> pmf;
    double pk = std::exp(-mean);
    double cum = 0.0;
    for (int k = 0; cum < 1.0 - 5.0 / draws && k < 400; ++k) {
        if (k > 0) pk *= mean / k;
        if (pk * draws >= 5.0) {
            pmf.push_back(pk);
            cum += pk;
        } else if (!pmf.empty() && cum > 0.5) {
            break;  // entered the upper tail
        }
    }
    REQUIRE(pmf.size() >= 5);
    const int k_lo_offset = [&] {
        double q = std::exp(-mean);
        int k = 0;
        while (q * draws < 5.0) {
            ++k;
            q *= mean / k;
        }
        return k;
    }();

    std::vector<double> observed(pmf.size() + 2, 0.0);  // low tail, bins, high tail
    for (int c : counts) {
        const int idx = c - k_lo_offset;
        if (idx < 0) observed[0] += 1.0;
        else if (idx >= static_cast<int>(pmf.size())) observed[pmf.size() + 1] += 1.0;
        else observed[idx + 1] += 1.0;
    }
    double tail_lo = 0.0;
    {
        double q = std::exp(-mean);
        for (int k = 0; k < k_lo_offset; ++k) {
            tail_lo += q;
            q *= mean / (k + 1);
        }
    }
    double total_binned = tail_lo;
    for (double q : pmf) total_binned += q;
    const double tail_hi = 1.0 - total_binned;

    double chi2 = 0.0;
    auto add = [&](double obs, double prob) {
        const double expct = prob * draws;
        if (expct > 0.0) chi2 += (obs - expct) * (obs - expct) / expct;
    };
    add(observed[0], tail_lo);
    for (std::size_t i = 0; i < pmf.size(); ++i) add(observed[i + 1], pmf[i]);
    add(observed[pmf.size() + 1], tail_hi);

    const double df = static_cast<double>(pmf.size() + 2 - 1);
    CHECK(chi2 < chi2_crit_99(df));
}

TEST_CASE("nearest_surface_distance: sentinels and brute-force equivalence") {
    ChannelParams p0{5.0, 100.0, 0.0, 0.0};
    const auto empty = geo::sample_receiver_field(p0, 100.0, {1, 1});
    CHECK(geo::nearest_surface_distance(empty, {0, 0, 0}) == kInf);

    const auto single = ReceiverField::from_centers({{20.0, 0.0, 0.0}}, 5.0, 100.0);
    CHECK(geo::nearest_surface_distance(single, {20.0, 0.0, 0.0}) == doctest::Approx(-5.0));

    ChannelParams p{2.0, 100.0, 1e-4, 0.0};
    const auto f = geo::sample_receiver_field(p, 60.0, {21, 0});
    REQUIRE(f.centers.size() > 10);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-55.0, 55.0);
    for (int i = 0; i < 10000; ++i) {
        const Point3 q{u(rng), u(rng), u(rng)};
        const double fast = geo::nearest_surface_distance(f, q);
        const double slow = brute_nearest_surface(f, q);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("first_hit_on_segment: analytic cases") {
    const auto f = ReceiverField::from_centers({{20.0, 0.0, 0.0}}, 2.0, 100.0);

    // fully outside
    CHECK_FALSE(geo::first_hit_on_segment(f, {0, 0, 0}, {10, 0, 0}).has_value());
    CHECK_FALSE(geo::first_hit_on_segment(f, {0, 30, 0}, {30, 30, 0}).has_value());

    // straight through the center: fraction = (d - a) / segment length
    const auto hit = geo::first_hit_on_segment(f, {0, 0, 0}, {30, 0, 0});
    REQUIRE(hit.has_value());
    CHECK(hit->fraction == doctest::Approx((20.0 - 2.0) / 30.0).epsilon(1e-14));
    CHECK(hit->point.x == doctest::Approx(18.0).epsilon(1e-12));

    // degenerate segment inside the sphere
    const auto inside = geo::first_hit_on_segment(f, {20.5, 0, 0}, {20.5, 0, 0});
    REQUIRE(inside.has_value());
    CHECK(inside->fraction == 0.0);
}

TEST_CASE("first_hit_on_segment: randomized brute-force equivalence") {
    ChannelParams p{2.0, 100.0, 1e-4, 0.0};
    const auto f = geo::sample_receiver_field(p, 60.0, {22, 0});
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_real_distribution<double> step(-8.0, 8.0);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        const Point3 from{u(rng), u(rng), u(rng)};
        const Point3 to{from.x + step(rng), from.y + step(rng), from.z + step(rng)};
        const auto fast = geo::first_hit_on_segment(f, from, to);
        const auto slow = brute_first_hit_fraction(f, from, to);
        CHECK(fast.has_value() == slow.has_value());
        if (fast && slow) {
            ++hits;
            CHECK(fast->fraction == doctest::Approx(*slow).epsilon(1e-12));
        }
    }
    CHECK(hits > 50);  // the comparison actually exercised intersections
}

TEST_CASE("RngStream: reproducible, scheduling-independent sequences") {
    ChannelParams p{2.0, 100.0, 5e-5, 0.0};
    const auto f1 = geo::sample_receiver_field(p, 80.0, {1234, 77});
    const auto f2 = geo::sample_receiver_field(p, 80.0, {1234, 77});
    REQUIRE(f1.centers.size() == f2.centers.size());
    for (std::size_t i = 0; i < f1.centers.size(); ++i) {
        CHECK(f1.centers[i].x == f2.centers[i].x);
        CHECK(f1.centers[i].y == f2.centers[i].y);
        CHECK(f1.centers[i].z == f2.centers[i].z);
    }
    const auto f3 = geo::sample_receiver_field(p, 80.0, {1234, 78});
    const bool differs = f3.centers.size() != f1.centers.size() ||
                         (f3.centers[0].x != f1.centers[0].x);
    CHECK(differs);
}

TEST_CASE("ReceiverField::from_centers validates placement invariants") {
    CHECK_THROWS_AS(ReceiverField::from_centers({{1.0, 0.0, 0.0}}, 2.0, 50.0),
                    std::invalid_argument);  // inside exclusion ball
    CHECK_THROWS_AS(ReceiverField::from_centers({{60.0, 0.0, 0.0}}, 2.0, 50.0),
                    std::invalid_argument);  // outside domain
    CHECK_THROWS_AS(ReceiverField::from_centers({}, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("field dump/load round trip is bit exact") {
    ChannelParams p{2.0, 100.0, 1e-4, 0.0};
    const auto f = geo::sample_receiver_field(p, 40.0, {31, 0});
    const std::string path = temp_path("mcvd_centers_test.csv");
    geo::save_centers_csv(f, path);
    const auto g = geo::load_centers_csv(path, f.radius, f.domain_radius);
    REQUIRE(g.centers.size() == f.centers.size());
    for (std::size_t i = 0; i < f.centers.size(); ++i) {
        CHECK(g.centers[i].x == f.centers[i].x);
        CHECK(g.centers[i].y == f.centers[i].y);
        CHECK(g.centers[i].z == f.centers[i].z);
    }
    std::remove(path.c_str());
}

TEST_CASE("local_clearance: sign convention and lower-bound property") {
    const auto f = ReceiverField::from_centers({{20.0, 0.0, 0.0}}, 2.0, 100.0);
    CHECK(f.local_clearance({20.0, 0.0, 0.0}) == doctest::Approx(-2.0));
    CHECK(f.local_clearance({17.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(f.contains({18.5, 0.0, 0.0}));
    CHECK_FALSE(f.contains({17.9, 0.0, 0.0}));

    // far away the clearance is a valid positive lower bound
    const double lb = f.local_clearance({-90.0, 0.0, 0.0});
    CHECK(lb > 0.0);
    CHECK(lb <= brute_nearest_surface(f, {-90.0, 0.0, 0.0}) + 1e-12);

    ChannelParams p{2.0, 100.0, 1e-4, 0.0};
    const auto g = geo::sample_receiver_field(p, 60.0, {23, 0});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-55.0, 55.0);
    for (int i = 0; i < 5000; ++i) {
        const Point3 q{u(rng), u(rng), u(rng)};
        const double lower = g.local_clearance(q);
        const double exact = brute_nearest_surface(g, q);
        CHECK(lower <= exact + 1e-12);
        if (exact <= 0.0) CHECK(lower <= 0.0);  // exact whenever inside
    }
}
