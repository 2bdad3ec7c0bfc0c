#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "virolbi/path.hpp"
#include "virolbi/spectral.hpp"

using namespace virolbi;

TEST_SUITE("spectral") {

TEST_CASE("radius covering everything keeps the image in the low band") {
    const ImagePlane x = testsupport::random_image(12, 9, 7);
    const auto split = spectral::decompose(x, 100.0);
    CHECK(testsupport::max_abs_diff(split.low.pixels, x.pixels) < 1e-10);
    for (double v : split.high.pixels) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("constant image is pure DC") {
    const ImagePlane x(8, 8, 0.6);
    const auto split = spectral::decompose(x, 0.5);
    CHECK(testsupport::max_abs_diff(split.low.pixels, x.pixels) < 1e-12);
    for (double v : split.high.pixels) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("exact partition: low + high reconstructs x") {
    for (auto [h, w] : {std::pair{32, 32}, std::pair{17, 23}, std::pair{128, 128}}) {
        const ImagePlane x = testsupport::random_image(h, w, 100 + h + w);
        const auto split = spectral::decompose(x, 6.0);
        double err = 0.0;
        for (int i = 0; i < x.pixel_count(); ++i)
            err = std::max(err, std::abs(split.low.pixels[i] + split.high.pixels[i] -
                                         x.pixels[i]));
        CHECK(err < 1e-10);
    }
}

TEST_CASE("Parseval consistency of the band energies") {
    const ImagePlane x = testsupport::natural_image(48, 48, 17);
    const auto energy = spectral::band_energy(x, 6.0);
    double total = 0.0;
    for (double v : x.pixels) total += v * v;
    CHECK(std::abs(energy.low + energy.high - total) / total < 1e-8);
}

TEST_CASE("invalid radius is rejected") {
    const ImagePlane x(4, 4, 0.5);
    CHECK_THROWS_AS(spectral::decompose(x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(spectral::decompose(x, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(spectral::spectrum_band_energy(x, 0.0), std::invalid_argument);
}

TEST_CASE("identical lists give a zero spectrum") {
    std::vector<ImagePlane> a, b;
    for (int i = 0; i < 3; ++i) {
        a.push_back(testsupport::natural_image(16, 16, 200 + i));
        b.push_back(a.back());
    }
    const ImagePlane spec = spectral::expected_spectral_diff(a, b);
    for (double v : spec.pixels) CHECK(v == 0.0);
    const auto energy = spectral::spectrum_band_energy(spec, 6.0);
    CHECK(energy.low == 0.0);
    CHECK(energy.high == 0.0);
}

TEST_CASE("a single-pixel impulse difference has flat magnitude") {
    const ImagePlane x = testsupport::random_image(8, 8, 300);
    ImagePlane y = x;
    y.at(3, 5) += 0.25;
    const ImagePlane spec = spectral::expected_spectral_diff({x}, {y});
    for (double v : spec.pixels) CHECK(v == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("empty or misaligned lists are rejected") {
    CHECK_THROWS_AS(spectral::expected_spectral_diff({}, {}), std::invalid_argument);
    const ImagePlane a(4, 4, 0.1);
    const ImagePlane b(4, 5, 0.1);
    CHECK_THROWS_AS(spectral::expected_spectral_diff({a}, {a, a}),
                    std::invalid_argument);
    CHECK_THROWS_AS(spectral::expected_spectral_diff({a}, {b}), std::invalid_argument);
}

// Direction of Fig-3c style analysis: residuals of lightly-smoothed images
// carry more high-band energy than residuals of heavily-smoothed ones,
// on batch average.
TEST_CASE("high-band residual energy shrinks as the stop level rises") {
    PathConfig cfg;
    cfg.snapshot_levels = {0.6, 0.8};
    cfg.stop_level = 0.8;
    cfg.max_iters = 1000000;
    double high_06 = 0.0, high_08 = 0.0;
    const int batch = 10;
    for (int i = 0; i < batch; ++i) {
        const ImagePlane x = testsupport::natural_image(24, 24, 400 + i);
        const PathResult res = run_path(x, cfg);
        REQUIRE(res.snapshots.size() == 2);
        ImagePlane resid(24, 24);
        for (int j = 0; j < x.pixel_count(); ++j)
            resid.pixels[j] = x.pixels[j] - res.snapshots[0].image[j];
        high_06 += spectral::band_energy(resid, 6.0).high;
        for (int j = 0; j < x.pixel_count(); ++j)
            resid.pixels[j] = x.pixels[j] - res.snapshots[1].image[j];
        high_08 += spectral::band_energy(resid, 6.0).high;
    }
    CHECK(high_06 / batch > high_08 / batch);
}

}  // TEST_SUITE
