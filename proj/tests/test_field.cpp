#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gpocc/field.hpp"
#include "gpocc/sim.hpp"

using namespace gpocc;

namespace {

PriorParams default_prior() { return {}; }

FieldConfig config_with(double l, double nr, PriorMode mode, double sigma2 = 1e-6) {
    FieldConfig cfg;
    cfg.lengthscale = l;
    cfg.neighborhood_radius = nr;
    cfg.prior_mode = mode;
    cfg.obs_noise_sigma2 = sigma2;
    return cfg;
}

}  // namespace

TEST_CASE("no measurements: free inside a bubble, prior variance") {
    Map map(0.05);
    const PriorParams prior = default_prior();
    map.coverage.add({{0.0, 0.0}, 1.0, BubbleState::active}, prior);
    const FieldView field(map, config_with(0.3, 1.0, PriorMode::bubbles), prior);

    const auto inside = field.query({0.5, 0.0});
    CHECK(inside.occupancy == OccClass::free);
    CHECK(inside.variance == doctest::Approx(1.0));

    const auto far = field.query({9.0, 0.0});
    CHECK(far.occupancy == OccClass::unknown);
    CHECK(far.variance == doctest::Approx(1.0));
}

TEST_CASE("a stored centroid is pinned to the level set") {
    Map map(0.05);
    const PriorParams prior = default_prior();
    map.poses.push_back({{0.0, 0.0}, 0.0, M_PI, 2.0});
    map.store.insert(std::vector<Point2>{{1.5, 0.0}});
    const FieldView field(map, config_with(0.3, 1.0, PriorMode::pose_only), prior);

    const auto at = field.query({1.5, 0.0});
    CHECK(std::abs(at.mean - 1.0) <= 1e-3);
    CHECK(at.variance <= 10.0 * 1e-6);
}

TEST_CASE("1D scenario: level-set crossings at the measurements and the frontier") {
    // Three poses on the x-axis, a wall measured twice near x = 2.8, and an
    // open frontier at the leftmost FoV edge (x = -2).
    Map map(0.05);
    PriorParams prior = default_prior();
    prior.lengthscale = 0.5;
    for (double sx : {0.0, 1.2, 2.4}) map.poses.push_back({{sx, 0.0}, 0.0, M_PI, 2.0});
    map.store.insert(std::vector<Point2>{{2.80, 0.0}, {2.86, 0.0}});

    FieldConfig cfg = config_with(0.5, 1.5, PriorMode::pose_only);
    const FieldView field(map, cfg, prior);

    // Sweep the axis and collect crossing intervals.
    struct Crossing {
        double x;
        double variance;
    };
    std::vector<Crossing> crossings;
    FieldSample prev = field.query({-3.0, 0.0});
    for (double x = -2.95; x <= 4.0; x += 0.05) {
        const FieldSample cur = field.query({x, 0.0});
        if ((prev.occupancy == OccClass::free) != (cur.occupancy == OccClass::free)) {
            crossings.push_back({x - 0.025, std::max(prev.variance, cur.variance)});
        }
        prev = cur;
    }

    REQUIRE(!crossings.empty());
    bool has_frontier = false;
    bool has_wall = false;
    for (const auto& cr : crossings) {
        const bool near_frontier = std::abs(cr.x - (-2.0)) <= 0.06;
        const bool near_wall = cr.x >= 2.80 - 0.06 && cr.x <= 2.86 + 0.06;
        CHECK((near_frontier || near_wall));
        if (near_frontier) {
            has_frontier = true;
            CHECK(cr.variance > 0.9);
        }
        if (near_wall) {
            has_wall = true;
            CHECK(cr.variance < 0.4);
        }
    }
    CHECK(has_frontier);
    CHECK(has_wall);
}

TEST_CASE("full pipeline reproduces the 1D translation identity") {
    Map map(0.05);
    PriorParams prior = default_prior();
    prior.lengthscale = 0.5;
    const double r_max = 2.0;
    map.poses.push_back({{0.0, 0.0}, 0.0, M_PI, r_max});
    map.store.insert(std::vector<Point2>{{1.3, 0.0}});

    FieldConfig cfg = config_with(0.5, 2.5, PriorMode::pose_only, 0.0);
    const FieldView field(map, cfg, prior);
    const double gamma = std::exp(r_max / 0.5);
    for (double x : {0.1, 0.4, 0.9, 1.6}) {
        const auto sample = field.query({1.3 + x, 0.0});
        const double want = gamma * std::exp(-(r_max + x) / 0.5);
        CHECK(std::abs(sample.mean - want) <= 1e-6);
    }
}

TEST_CASE("batch query equals sequential queries across thread counts") {
    const World world{{{{0.0, 0.0}, {6.0, 0.0}, {6.0, 6.0}, {0.0, 6.0}}}, {}, {{0, 0}, {6, 6}}};
    Map map(0.05);
    const PriorParams prior = default_prior();
    const auto scans = simulate_trajectory(
        world, {{{2.0, 2.0}, 0.0}, {{3.5, 3.0}, 1.0}}, {360, M_PI, 4.0, 0.01}, 17);
    for (const auto& s : scans) map.ingest(s, prior);
    const FieldView field(map, config_with(0.3, 1.0, PriorMode::bubbles), prior);

    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.5, 6.5);
    std::vector<Point2> queries(1000);
    for (auto& q : queries) q = {u(rng), u(rng)};

    const auto single = field.batch_query({queries.data(), 1});
    CHECK(single[0].mean == field.query(queries[0]).mean);

    const auto seq = field.batch_query(queries, 1);
    const auto par = field.batch_query(queries, 4);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        CHECK(std::abs(seq[i].mean - par[i].mean) <= 1e-12);
        CHECK(std::abs(seq[i].variance - par[i].variance) <= 1e-12);
        CHECK(seq[i].occupancy == par[i].occupancy);
        // And both agree with a direct query.
        CHECK(std::abs(seq[i].mean - field.query(queries[i]).mean) <= 1e-12);
    }

    // Variance bounds over a realistic map.
    for (const auto& s : seq) {
        CHECK(s.variance >= 0.0);
        CHECK(s.variance <= 1.0 + 10.0 * field.config().jitter);
    }
}

TEST_CASE("with no stored points classification equals the prior level set") {
    Map map(0.05);
    const PriorParams prior = default_prior();
    map.coverage.add({{1.0, 1.0}, 0.8, BubbleState::active}, prior);
    map.coverage.add({{2.5, 1.2}, 1.2, BubbleState::fixed}, prior);
    const FieldConfig cfg = config_with(0.3, 1.0, PriorMode::bubbles);
    const FieldView field(map, cfg, prior);

    for (double x = -1.0; x <= 5.0; x += 0.11) {
        for (double y = -1.0; y <= 3.0; y += 0.13) {
            const auto s = field.query({x, y});
            const bool free_by_prior = map.coverage.prior_mean({x, y}, prior) > cfg.level_set_c;
            CHECK((s.occupancy == OccClass::free) == free_by_prior);
        }
    }
}

TEST_CASE("every stored centroid is pinned within one percent of c") {
    const World world{{{{0.0, 0.0}, {5.0, 0.0}, {5.0, 4.0}, {0.0, 4.0}}}, {}, {{0, 0}, {5, 4}}};
    Map map(0.05);
    const PriorParams prior = default_prior();
    const auto scans =
        simulate_trajectory(world, {{{2.0, 2.0}, 0.0}, {{3.0, 1.5}, 0.5}}, {360, M_PI, 4.0, 0.01}, 23);
    for (const auto& s : scans) map.ingest(s, prior);
    const FieldView field(map, config_with(0.3, 1.0, PriorMode::bubbles), prior);

    for (const CellIndex cell : map.store.sorted_cells()) {
        const auto sample = field.query(map.store.centroid_of(cell));
        CHECK(std::abs(sample.mean - 1.0) <= 1e-2);
    }
}

TEST_CASE("locality: a far-away point does not change a query") {
    Map map(0.05);
    const PriorParams prior = default_prior();
    map.coverage.add({{0.0, 0.0}, 1.0, BubbleState::active}, prior);
    map.store.insert(std::vector<Point2>{{0.9, 0.0}, {0.95, 0.1}});
    const FieldConfig cfg = config_with(0.3, 1.0, PriorMode::bubbles);

    const Point2 q{0.3, 0.0};
    FieldSample before;
    {
        const FieldView field(map, cfg, prior);
        before = field.query(q);
    }
    // Farther than neighborhood_radius + pruning radius, and no bubble is
    // spawned for it (inserted directly, no growth pass).
    map.store.insert(std::vector<Point2>{{9.0, 0.0}});
    const FieldView field(map, cfg, prior);
    const FieldSample after = field.query(q);
    CHECK(std::abs(before.mean - after.mean) <= 1e-6);
    CHECK(std::abs(before.variance - after.variance) <= 1e-6);
}

TEST_CASE("classify_crossing thresholds on the larger variance") {
    FieldConfig cfg;
    FieldSample lo_free{1.4, 0.01, OccClass::free, CrossingKind::none, true};
    FieldSample lo_unknown{0.6, 0.02, OccClass::unknown, CrossingKind::none, true};
    CHECK(FieldView::classify_crossing(lo_free, lo_unknown, cfg) == CrossingKind::wall);

    FieldSample hi_free{1.4, 0.95, OccClass::free, CrossingKind::none, true};
    FieldSample hi_unknown{0.6, 0.99, OccClass::unknown, CrossingKind::none, true};
    CHECK(FieldView::classify_crossing(hi_free, hi_unknown, cfg) == CrossingKind::frontier);

    FieldSample also_free{1.2, 0.5, OccClass::free, CrossingKind::none, true};
    CHECK_THROWS_AS(FieldView::classify_crossing(lo_free, also_free, cfg), ContractViolation);
}

TEST_CASE("config invariants are enforced") {
    FieldConfig cfg;
    cfg.neighborhood_radius = 2.0 * cfg.lengthscale;  // below the 3x floor
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}
