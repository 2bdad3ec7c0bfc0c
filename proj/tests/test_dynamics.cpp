#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "test_support.hpp"
#include "virolbi/dynamics.hpp"

using namespace virolbi;

namespace {

// Central finite differences of L_beta, the independent gradient oracle.
double eval_objective(const LatticeGraph& g, const std::vector<double>& x,
                      const std::vector<double>& u, const std::vector<double>& gamma,
                      int channels, double beta) {
    return objective(g, x, u, gamma, channels, beta);
}

std::vector<double> fd_grad_u(const LatticeGraph& g, const std::vector<double>& x,
                              const IterState& s, double beta, double h) {
    std::vector<double> u = s.u;
    std::vector<double> grad(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double keep = u[i];
        u[i] = keep + h;
        const double fp = eval_objective(g, x, u, s.gamma.values, s.channels(), beta);
        u[i] = keep - h;
        const double fm = eval_objective(g, x, u, s.gamma.values, s.channels(), beta);
        u[i] = keep;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

std::vector<double> fd_grad_gamma(const LatticeGraph& g, const std::vector<double>& x,
                                  const IterState& s, double beta, double h) {
    std::vector<double> gamma = s.gamma.values;
    std::vector<double> grad(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const double keep = gamma[i];
        gamma[i] = keep + h;
        const double fp = eval_objective(g, x, s.u, gamma, s.channels(), beta);
        gamma[i] = keep - h;
        const double fm = eval_objective(g, x, s.u, gamma, s.channels(), beta);
        gamma[i] = keep;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

IterState random_state(const LatticeGraph& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    IterState s = IterState::zero(g, 1);
    for (double& v : s.u) v = dist(rng);
    for (double& v : s.gamma.values) v = dist(rng);
    return s;
}

Eigen::MatrixXd dense_hessian(const LatticeGraph& g, double beta) {
    const int p = g.pixel_count();
    const int m = g.edge_count();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, p);
    for (int e = 0; e < m; ++e) {
        D(e, g.edges[e].first) = 1.0;
        D(e, g.edges[e].second) = -1.0;
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p + m, p + m);
    H.topLeftCorner(p, p) =
        Eigen::MatrixXd::Identity(p, p) + 2.0 * beta * D.transpose() * D;
    H.topRightCorner(p, m) = -2.0 * beta * D.transpose();
    H.bottomLeftCorner(m, p) = -2.0 * beta * D;
    H.bottomRightCorner(m, m) = 2.0 * beta * Eigen::MatrixXd::Identity(m, m);
    return H;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("grad_u vanishes at the stationary pair") {
    const LatticeGraph g = build_lattice(3, 3);
    const ImagePlane x = testsupport::random_image(3, 3, 1);
    IterState s = IterState::zero(g, 1);
    s.u = x.pixels;
    s.gamma = apply_D(g, ImagePlane{x});
    for (double v : grad_u(g, x.pixels, s, 1.0)) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("grad_u at the zero state is -x") {
    const LatticeGraph g = build_lattice(2, 4);
    const ImagePlane x = testsupport::random_image(2, 4, 2);
    const IterState s = IterState::zero(g, 1);
    const std::vector<double> gu = grad_u(g, x.pixels, s, 0.7);
    for (int i = 0; i < g.pixel_count(); ++i)
        CHECK(gu[i] == doctest::Approx(-x.pixels[i]).epsilon(1e-15));
}

TEST_CASE("gradients match central finite differences") {
    const LatticeGraph g = build_lattice(4, 4);
    const ImagePlane x = testsupport::random_image(4, 4, 3);
    for (int trial = 0; trial < 10; ++trial) {
        const IterState s = random_state(g, 50 + trial);
        const double beta = 0.25 + 0.5 * trial;
        const std::vector<double> gu = grad_u(g, x.pixels, s, beta);
        const std::vector<double> gu_fd = fd_grad_u(g, x.pixels, s, beta, 1e-5);
        const EdgeVector gg = grad_gamma(g, s, beta);
        const std::vector<double> gg_fd = fd_grad_gamma(g, x.pixels, s, beta, 1e-5);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < gu.size(); ++i) {
            num += (gu[i] - gu_fd[i]) * (gu[i] - gu_fd[i]);
            den += gu_fd[i] * gu_fd[i];
        }
        CHECK(std::sqrt(num / den) < 1e-6);
        num = den = 0.0;
        for (std::size_t i = 0; i < gg.values.size(); ++i) {
            num += (gg.values[i] - gg_fd[i]) * (gg.values[i] - gg_fd[i]);
            den += gg_fd[i] * gg_fd[i];
        }
        CHECK(std::sqrt(num / den) < 1e-6);
    }
}

TEST_CASE("grad_gamma zero cases") {
    const LatticeGraph g = build_lattice(3, 3);
    IterState s = IterState::zero(g, 1);
    for (double v : grad_gamma(g, s, 1.0).values) CHECK(v == 0.0);
    const ImagePlane u = testsupport::random_image(3, 3, 4);
    s.u = u.pixels;
    s.gamma = apply_D(g, u);
    for (double v : grad_gamma(g, s, 2.0).values) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("prox_l1 boundary and interior cases") {
    EdgeVector z(4, 1);
    z.values = {0.5, 2.0, -3.0, 1.0};
    const EdgeVector out = prox_l1(z);
    CHECK(out.values[0] == 0.0);
    CHECK(out.values[1] == 1.0);
    CHECK(out.values[2] == -2.0);
    CHECK(out.values[3] == 0.0);
}

TEST_CASE("prox_group cases") {
    EdgeVector z(3, 3);
    // group 0: (0.5,0.5,0.5) norm < 1 -> zero
    z.at(0, 0) = 0.5; z.at(0, 1) = 0.5; z.at(0, 2) = 0.5;
    // group 1: (2,0,0) -> (1,0,0)
    z.at(1, 0) = 2.0;
    // group 2: (3,4,0) norm 5 -> (2.4, 3.2, 0)
    z.at(2, 0) = 3.0; z.at(2, 1) = 4.0;
    const EdgeVector out = prox_group(z);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(0, 1) == 0.0);
    CHECK(out.at(0, 2) == 0.0);
    CHECK(out.at(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.at(1, 1) == 0.0);
    CHECK(out.at(2, 0) == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(out.at(2, 1) == doctest::Approx(3.2).epsilon(1e-12));
    CHECK(out.at(2, 2) == 0.0);
}

TEST_CASE("hessian norm: beta = 0 gives 1") {
    const LatticeGraph g = build_lattice(4, 4);
    CHECK(estimate_hessian_norm(g, 0.0) == 1.0);
}

TEST_CASE("hessian norm matches dense eigendecomposition") {
    for (auto [h, w] : {std::pair{1, 2}, std::pair{4, 4}, std::pair{3, 5}}) {
        const LatticeGraph g = build_lattice(h, w);
        const Eigen::MatrixXd H = dense_hessian(g, 1.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        const double expected = eig.eigenvalues().cwiseAbs().maxCoeff();
        bool fallback = false;
        const double got = estimate_hessian_norm(g, 1.0, &fallback);
        CHECK(!fallback);
        CHECK(std::abs(got - expected) / expected < 1e-4);
    }
}

TEST_CASE("resolve_alpha enforces the step bound") {
    const LatticeGraph g = build_lattice(4, 4);
    HyperParams hp;
    hp.alpha_mode = AlphaMode::Auto;
    const double auto_alpha = resolve_alpha(g, hp);
    const double hnorm = estimate_hessian_norm(g, hp.beta);
    CHECK(auto_alpha == doctest::Approx(1.0 / (hp.kappa * hnorm)).epsilon(1e-12));

    hp.alpha_mode = AlphaMode::Explicit;
    hp.alpha = 1.9 / (hp.kappa * hnorm);
    CHECK_NOTHROW(resolve_alpha(g, hp));
    hp.alpha = 2.1 / (hp.kappa * hnorm);
    CHECK_THROWS_AS(resolve_alpha(g, hp), std::invalid_argument);
}

TEST_CASE("one step from zero on constant image keeps edges silent") {
    const LatticeGraph g = build_lattice(3, 3);
    const ImagePlane x(3, 3, 0.8);
    HyperParams hp;
    hp.alpha = resolve_alpha(g, hp);
    IterState s = step(g, x.pixels, IterState::zero(g, 1), hp);
    for (int i = 0; i < g.pixel_count(); ++i)
        CHECK(s.u[i] == doctest::Approx(hp.kappa * hp.alpha * 0.8).epsilon(1e-14));
    for (double v : s.z.values) CHECK(v == 0.0);
    for (double v : s.gamma.values) CHECK(v == 0.0);
    CHECK(s.k == 1);
    CHECK(s.support_size == 0);

    // gamma stays zero along the whole constant-image path
    StepWorkspace ws;
    for (int k = 0; k < 200; ++k) step_in_place(g, x.pixels, s, hp.kappa, hp.beta, hp.alpha, ws);
    for (double v : s.gamma.values) CHECK(v == 0.0);
}

TEST_CASE("one step on 1x2 image [1,0] matches the hand evaluation") {
    const LatticeGraph g = build_lattice(1, 2);
    ImagePlane x(1, 2);
    x.pixels = {1.0, 0.0};
    HyperParams hp;  // kappa 5, beta 1, auto alpha
    hp.alpha = resolve_alpha(g, hp);
    const IterState s = step(g, x.pixels, IterState::zero(g, 1), hp);
    CHECK(s.u[0] == doctest::Approx(5.0 * hp.alpha).epsilon(1e-14));
    CHECK(s.u[1] == 0.0);
    CHECK(s.z.values[0] == 0.0);
    CHECK(s.gamma.values[0] == 0.0);
}

TEST_CASE("fixed point: u = x and gamma = Du is unchanged by step") {
    const LatticeGraph g = build_lattice(3, 4);
    const ImagePlane x = testsupport::random_image(3, 4, 11);
    HyperParams hp;
    hp.alpha = resolve_alpha(g, hp);
    IterState s = IterState::zero(g, 1);
    s.u = x.pixels;
    s.gamma = apply_D(g, x);
    // align z with the subgradient inverse of gamma so the prox reproduces it
    for (int e = 0; e < g.edge_count(); ++e) {
        const double ge = s.gamma.values[e] / hp.kappa;
        s.z.values[e] = ge + (ge > 0.0 ? 1.0 : (ge < 0.0 ? -1.0 : 0.0));
    }
    const IterState before = s;
    StepWorkspace ws;
    step_in_place(g, x.pixels, s, hp.kappa, hp.beta, hp.alpha, ws);
    CHECK(testsupport::max_abs_diff(s.u, before.u) < 1e-15);
    CHECK(testsupport::max_abs_diff(s.z.values, before.z.values) < 1e-15);
    CHECK(testsupport::max_abs_diff(s.gamma.values, before.gamma.values) < 1e-12);
}

TEST_CASE("monotone descent over 2000 iterations on random 8x8 images") {
    const LatticeGraph g = build_lattice(8, 8);
    HyperParams hp;
    hp.alpha = resolve_alpha(g, hp);
    for (std::uint64_t seed : {21u, 22u}) {
        const ImagePlane x = testsupport::random_image(8, 8, seed);
        IterState s = IterState::zero(g, 1);
        StepWorkspace ws;
        double prev = objective(g, x.pixels, s.u, s.gamma.values, 1, hp.beta);
        for (int k = 0; k < 2000; ++k) {
            step_in_place(g, x.pixels, s, hp.kappa, hp.beta, hp.alpha, ws);
            const double cur = objective(g, x.pixels, s.u, s.gamma.values, 1, hp.beta);
            REQUIRE(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("descent check triggers on an oversized explicit step") {
    const LatticeGraph g = build_lattice(6, 6);
    const ImagePlane x = testsupport::random_image(6, 6, 31);
    const double hnorm = estimate_hessian_norm(g, 1.0);
    IterState s = IterState::zero(g, 1);
    StepWorkspace ws;
    const double bad_alpha = 40.0 / (5.0 * hnorm);
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 50; ++k)
                step_in_place(g, x.pixels, s, 5.0, 1.0, bad_alpha, ws, true);
        }(),
        std::runtime_error);
}

TEST_CASE("derived gamma invariant: gamma == kappa*prox(z) exactly") {
    const LatticeGraph g = build_lattice(6, 6);
    const ImagePlane x = testsupport::natural_image(6, 6, 41);
    HyperParams hp;
    hp.alpha = resolve_alpha(g, hp);
    IterState s = IterState::zero(g, 1);
    StepWorkspace ws;
    for (int k = 0; k < 800; ++k) {
        step_in_place(g, x.pixels, s, hp.kappa, hp.beta, hp.alpha, ws);
        const EdgeVector expected = prox_l1(s.z);
        for (std::size_t i = 0; i < expected.values.size(); ++i)
            REQUIRE(s.gamma.values[i] == hp.kappa * expected.values[i]);
    }

    // color variant, group prox
    const ColorImage xc = testsupport::natural_color_image(6, 6, 42);
    std::vector<double> planar;
    for (int c = 0; c < 3; ++c)
        planar.insert(planar.end(), xc.channels[c].pixels.begin(),
                      xc.channels[c].pixels.end());
    IterState sc = IterState::zero(g, 3);
    for (int k = 0; k < 800; ++k) {
        step_in_place(g, planar, sc, hp.kappa, hp.beta, hp.alpha, ws);
        const EdgeVector expected = prox_group(sc.z);
        for (std::size_t i = 0; i < expected.values.size(); ++i)
            REQUIRE(sc.gamma.values[i] == hp.kappa * expected.values[i]);
    }
}

TEST_CASE("first nonzero gamma appears only after a z crossing") {
    const LatticeGraph g = build_lattice(8, 8);
    const ImagePlane x = testsupport::natural_image(8, 8, 51);
    HyperParams hp;
    hp.alpha = resolve_alpha(g, hp);
    IterState s = IterState::zero(g, 1);
    StepWorkspace ws;
    bool crossed = false;
    for (int k = 0; k < 5000 && !crossed; ++k) {
        step_in_place(g, x.pixels, s, hp.kappa, hp.beta, hp.alpha, ws);
        double zmax = 0.0;
        for (double v : s.z.values) zmax = std::max(zmax, std::abs(v));
        if (s.support_size > 0) {
            crossed = true;
            CHECK(zmax > 1.0);
        } else {
            REQUIRE(zmax <= 1.0);
        }
    }
    CHECK(crossed);
}

TEST_CASE("color path with two zero channels reduces to the grayscale path") {
    const LatticeGraph g = build_lattice(6, 6);
    const ImagePlane plane = testsupport::natural_image(6, 6, 61);
    HyperParams hp;
    hp.alpha = resolve_alpha(g, hp);

    IterState gray = IterState::zero(g, 1);
    IterState color = IterState::zero(g, 3);
    std::vector<double> planar(static_cast<std::size_t>(g.pixel_count()) * 3, 0.0);
    std::copy(plane.pixels.begin(), plane.pixels.end(), planar.begin());

    StepWorkspace ws;
    const std::size_t p = g.pixel_count();
    const std::size_t m = g.edge_count();
    for (int k = 0; k < 1500; ++k) {
        step_in_place(g, plane.pixels, gray, hp.kappa, hp.beta, hp.alpha, ws);
        step_in_place(g, planar, color, hp.kappa, hp.beta, hp.alpha, ws);
        REQUIRE(gray.support_size == color.support_size);
        for (std::size_t e = 0; e < m; ++e) {
            REQUIRE(std::abs(gray.gamma.values[e] - color.gamma.values[e]) < 1e-12);
            REQUIRE((gray.gamma.values[e] != 0.0) == (color.gamma.values[e] != 0.0));
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        REQUIRE(std::abs(gray.u[i] - color.u[i]) < 1e-12);
    // untouched channels stay identically zero
    for (std::size_t i = p; i < 3 * p; ++i) REQUIRE(color.u[i] == 0.0);
}

}  // TEST_SUITE
