#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "virolbi/path.hpp"

using namespace virolbi;

namespace {

double recon_error(const Snapshot& snap, const std::vector<double>& x) {
    return testsupport::rel_l2_error(snap.image, x);
}

void check_feasible(const Snapshot& snap) {
    const LatticeGraph g = build_lattice(snap.height, snap.width);
    const std::size_t p = static_cast<std::size_t>(snap.height) * snap.width;
    for (int c = 0; c < snap.channels; ++c)
        for (int e = 0; e < g.edge_count(); ++e) {
            if (snap.support.member[e]) continue;
            const double di = snap.image[c * p + g.edges[e].first] -
                              snap.image[c * p + g.edges[e].second];
            REQUIRE(di == 0.0);
        }
}

}  // namespace

TEST_SUITE("path") {

TEST_CASE("constant image truncates with a single baseline snapshot") {
    const ImagePlane x(6, 6, 0.43);
    PathConfig cfg;
    cfg.snapshot_levels = {0.2, 0.5};
    cfg.stop_level = 0.5;
    cfg.max_iters = 3000;
    const PathResult res = run_path(x, cfg);
    CHECK(res.truncated);
    REQUIRE(res.snapshots.size() == 1);
    CHECK(res.snapshots[0].requested_level == 0.0);
    CHECK(res.snapshots[0].achieved_sparsity == 0.0);
    for (double v : res.snapshots[0].image)
        CHECK(v == doctest::Approx(0.43).epsilon(1e-9));
}

TEST_CASE("level 1.0 reconstructs a random 8x8 image") {
    const ImagePlane x = testsupport::random_image(8, 8, 71);
    PathConfig cfg;
    cfg.snapshot_levels = {1.0};
    cfg.stop_level = 1.0;
    cfg.max_iters = 5000000;
    const PathResult res = run_path(x, cfg);
    CHECK(!res.truncated);
    REQUIRE(res.snapshots.size() == 1);
    CHECK(res.snapshots[0].achieved_sparsity == 1.0);
    CHECK(recon_error(res.snapshots[0], x.pixels) < 0.01);
}

TEST_CASE("five-level path: ordering, fidelity and feasibility") {
    PathConfig cfg;
    cfg.snapshot_levels = {0.2, 0.4, 0.6, 0.8, 1.0};
    cfg.stop_level = 1.0;
    cfg.max_iters = 2000000;
    for (std::uint64_t seed : {81u, 82u, 83u}) {
        const ImagePlane x = testsupport::natural_image(20, 20, seed);
        const PathResult res = run_path(x, cfg);
        CHECK(!res.truncated);
        REQUIRE(res.snapshots.size() == 5);
        double prev_sparsity = 0.0;
        double prev_err = 1e100;
        for (const Snapshot& snap : res.snapshots) {
            CHECK(snap.achieved_sparsity >= snap.requested_level);
            CHECK(snap.achieved_sparsity >= prev_sparsity);
            prev_sparsity = snap.achieved_sparsity;
            const double err = recon_error(snap, x.pixels);
            CHECK(err <= prev_err + 1e-12);
            prev_err = err;
            check_feasible(snap);
        }
        CHECK(res.snapshots.back().achieved_sparsity == 1.0);
        CHECK(recon_error(res.snapshots.back(), x.pixels) < 0.01);
    }
}

TEST_CASE("smooth_to_level lands just past the requested level") {
    const ImagePlane x = testsupport::natural_image(32, 32, 91);
    const LatticeGraph g = build_lattice(32, 32);
    HyperParams hp;
    const Snapshot snap = smooth_to_level(x, 0.6, hp, 200000);
    CHECK(snap.achieved_sparsity >= 0.6);
    CHECK(snap.achieved_sparsity <= 0.6 + 2.0 / g.edge_count());
}

TEST_CASE("reproducibility: identical input and config give identical snapshots") {
    const ImagePlane x = testsupport::natural_image(16, 16, 101);
    PathConfig cfg;
    cfg.snapshot_levels = {0.3, 0.7};
    cfg.stop_level = 0.7;
    cfg.max_iters = 500000;
    const PathResult a = run_path(x, cfg);
    const PathResult b = run_path(x, cfg);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        CHECK(a.snapshots[i].iteration == b.snapshots[i].iteration);
        CHECK(a.snapshots[i].image == b.snapshots[i].image);  // bit-identical
    }
}

TEST_CASE("config validation") {
    const ImagePlane x = testsupport::natural_image(8, 8, 111);
    PathConfig cfg;
    cfg.snapshot_levels = {0.5, 0.4};
    CHECK_THROWS_AS(run_path(x, cfg), std::invalid_argument);
    cfg.snapshot_levels = {0.0, 0.4};
    CHECK_THROWS_AS(run_path(x, cfg), std::invalid_argument);
    cfg.snapshot_levels = {0.4};
    cfg.stop_level = 1.5;
    CHECK_THROWS_AS(run_path(x, cfg), std::invalid_argument);
    cfg.stop_level = 0.0;
    CHECK_THROWS_AS(run_path(x, cfg), std::invalid_argument);
    cfg.stop_level = 0.95;  // allowed but flagged
    cfg.max_iters = 100;
    const PathResult res = run_path(x, cfg);
    CHECK(res.stop_level_flagged);
}

TEST_CASE("levels above stop_level are dropped") {
    const ImagePlane x = testsupport::natural_image(10, 10, 121);
    PathConfig cfg;
    cfg.snapshot_levels = {0.2, 0.4, 0.9};
    cfg.stop_level = 0.5;
    cfg.max_iters = 500000;
    const PathResult res = run_path(x, cfg);
    CHECK(!res.truncated);
    REQUIRE(res.snapshots.size() == 2);
    CHECK(res.snapshots[0].requested_level == 0.2);
    CHECK(res.snapshots[1].requested_level == 0.4);
}

TEST_CASE("color path produces feasible snapshots with shared support") {
    const ColorImage x = testsupport::natural_color_image(12, 12, 131);
    PathConfig cfg;
    cfg.snapshot_levels = {0.3, 0.6};
    cfg.stop_level = 0.6;
    cfg.max_iters = 1000000;
    const PathResult res = run_path(x, cfg);
    CHECK(!res.truncated);
    REQUIRE(res.snapshots.size() == 2);
    for (const Snapshot& snap : res.snapshots) {
        CHECK(snap.channels == 3);
        CHECK(snap.achieved_sparsity >= snap.requested_level);
        check_feasible(snap);
    }
    const ColorImage out = res.snapshots.back().as_color();
    CHECK(out.height() == 12);
}

TEST_CASE("smooth_to_level rejects out-of-range levels") {
    const ImagePlane x = testsupport::natural_image(6, 6, 141);
    HyperParams hp;
    CHECK_THROWS_AS(smooth_to_level(x, 0.0, hp), std::invalid_argument);
    CHECK_THROWS_AS(smooth_to_level(x, 1.2, hp), std::invalid_argument);
}

}  // TEST_SUITE
