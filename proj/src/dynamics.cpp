#include "virolbi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace virolbi {

namespace {

constexpr double kDescentSlack = 1e-12;

// Joint Hessian apply: (vu, vz) -> (vu + 2b*D^T(D vu - vz), -2b*(D vu - vz)).
void apply_hessian(const LatticeGraph& g, double beta, std::span<const double> in,
                   std::span<double> out, std::vector<double>& edge_buf) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    apply_D(g, in.subspan(0, p), 1, edge_buf);
    for (std::size_t e = 0; e < m; ++e) edge_buf[e] -= in[p + e];
    apply_D_transpose(g, edge_buf, 1, out.subspan(0, p));
    for (std::size_t i = 0; i < p; ++i) out[i] = in[i] + 2.0 * beta * out[i];
    for (std::size_t e = 0; e < m; ++e) out[p + e] = -2.0 * beta * edge_buf[e];
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

IterState IterState::zero(const LatticeGraph& g, int channels) {
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("IterState: channels must be 1 or 3");
    IterState s;
    s.u.assign(static_cast<std::size_t>(g.pixel_count()) * channels, 0.0);
    s.z = EdgeVector(g.edge_count(), channels, 0.0);
    s.gamma = EdgeVector(g.edge_count(), channels, 0.0);
    return s;
}

double estimate_hessian_norm(const LatticeGraph& g, double beta, bool* used_fallback) {
    if (used_fallback) *used_fallback = false;
    if (beta < 0.0) throw std::invalid_argument("estimate_hessian_norm: beta must be >= 0");
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    const std::size_t n = p + m;

    if (beta == 0.0) return 1.0;  // H = diag(I, 0)

    // Deterministic, nowhere-vanishing start vector.
    std::vector<double> v(n), hv(n);
    std::vector<double> edge_buf(m);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    double nv = norm2(v);
    for (double& x : v) x /= nv;

    const int max_power_iters = 50000;
    double lambda = 0.0;
    for (int it = 0; it < max_power_iters; ++it) {
        apply_hessian(g, beta, v, hv, edge_buf);
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < n; ++i) rayleigh += v[i] * hv[i];
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = hv[i] - rayleigh * v[i];
            resid += r * r;
        }
        resid = std::sqrt(resid);
        lambda = rayleigh;
        if (resid <= 1e-6 * std::max(rayleigh, 1e-300)) return lambda;
        const double nhv = norm2(hv);
        if (nhv == 0.0) break;
        for (std::size_t i = 0; i < n; ++i) v[i] = hv[i] / nhv;
    }

    if (used_fallback) *used_fallback = true;
    return 1.0 + 2.0 * beta * (8.0 + 1.0);
}

double resolve_alpha(const LatticeGraph& g, const HyperParams& hp, bool* used_fallback) {
    if (hp.kappa <= 0.0) throw std::invalid_argument("resolve_alpha: kappa must be positive");
    if (hp.beta < 0.0) throw std::invalid_argument("resolve_alpha: beta must be >= 0");
    const double hnorm = estimate_hessian_norm(g, hp.beta, used_fallback);
    if (hp.alpha_mode == AlphaMode::Auto) return 1.0 / (hp.kappa * hnorm);
    if (!(hp.alpha > 0.0)) throw std::invalid_argument("resolve_alpha: alpha must be positive");
    if (!(hp.alpha < 2.0 / (hp.kappa * hnorm)))
        throw std::invalid_argument("resolve_alpha: alpha violates alpha < 2/(kappa*||H||)");
    return hp.alpha;
}

std::vector<double> grad_u(const LatticeGraph& g, std::span<const double> x,
                           const IterState& state, double beta) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    const int ch = state.channels();
    if (x.size() != p * ch || state.u.size() != p * ch ||
        state.gamma.values.size() != m * ch)
        throw std::invalid_argument("grad_u: dimension mismatch");
    std::vector<double> edge_buf(m * ch), out(p * ch);
    apply_D(g, state.u, ch, edge_buf);
    for (std::size_t i = 0; i < edge_buf.size(); ++i) edge_buf[i] -= state.gamma.values[i];
    apply_D_transpose(g, edge_buf, ch, out);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (state.u[i] - x[i]) + 2.0 * beta * out[i];
    return out;
}

EdgeVector grad_gamma(const LatticeGraph& g, const IterState& state, double beta) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    const int ch = state.channels();
    if (state.u.size() != p * ch || state.gamma.values.size() != m * ch)
        throw std::invalid_argument("grad_gamma: dimension mismatch");
    EdgeVector out(g.edge_count(), ch);
    apply_D(g, state.u, ch, out.values);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = -2.0 * beta * (out.values[i] - state.gamma.values[i]);
    return out;
}

EdgeVector prox_l1(const EdgeVector& z) {
    EdgeVector out = z;
    for (double& v : out.values) {
        const double a = std::abs(v) - 1.0;
        v = a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
    }
    return out;
}

EdgeVector prox_group(const EdgeVector& z) {
    if (z.channels != 3)
        throw std::invalid_argument("prox_group: expects 3-channel edge vector");
    const int m = z.edge_count();
    EdgeVector out(m, 3, 0.0);
    for (int e = 0; e < m; ++e) {
        const double z0 = z.values[e];
        const double z1 = z.values[m + e];
        const double z2 = z.values[2 * m + e];
        const double norm = std::sqrt(z0 * z0 + z1 * z1 + z2 * z2);
        if (norm >= 1.0) {
            const double scale = 1.0 - 1.0 / norm;
            out.values[e] = scale * z0;
            out.values[m + e] = scale * z1;
            out.values[2 * m + e] = scale * z2;
        }
    }
    return out;
}

double objective(const LatticeGraph& g, std::span<const double> x,
                 std::span<const double> u, std::span<const double> gamma,
                 int channels, double beta) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    if (x.size() != p * channels || u.size() != p * channels || gamma.size() != m * channels)
        throw std::invalid_argument("objective: dimension mismatch");
    double fid = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - x[i];
        fid += d * d;
    }
    double split = 0.0;
    for (int c = 0; c < channels; ++c) {
        const double* uc = u.data() + c * p;
        const double* gc = gamma.data() + c * m;
        for (std::size_t e = 0; e < m; ++e) {
            const double d = (uc[g.edges[e].first] - uc[g.edges[e].second]) - gc[e];
            split += d * d;
        }
    }
    return 0.5 * fid + beta * split;
}

void step_in_place(const LatticeGraph& g, std::span<const double> x, IterState& state,
                   double kappa, double beta, double alpha, StepWorkspace& ws,
                   bool check_descent, bool* support_changed) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    const int ch = state.channels();
    if (x.size() != p * ch || state.u.size() != p * ch)
        throw std::invalid_argument("step: dimension mismatch");
    ws.edge_buf.resize(m * ch);
    ws.pixel_buf.resize(p * ch);

    double loss_before = 0.0;
    if (check_descent)
        loss_before = objective(g, x, state.u, state.gamma.values, ch, beta);

    // Residual Du - gamma at (u_k, gamma_k) drives both gradients.
    apply_D(g, state.u, ch, ws.edge_buf);
    for (std::size_t i = 0; i < m * ch; ++i) ws.edge_buf[i] -= state.gamma.values[i];
    apply_D_transpose(g, ws.edge_buf, ch, ws.pixel_buf);

    const double ka = kappa * alpha;
    for (std::size_t i = 0; i < p * ch; ++i)
        state.u[i] -= ka * ((state.u[i] - x[i]) + 2.0 * beta * ws.pixel_buf[i]);

    const double two_ab = 2.0 * alpha * beta;
    for (std::size_t i = 0; i < m * ch; ++i) state.z.values[i] += two_ab * ws.edge_buf[i];

    bool changed = false;
    int count = 0;
    if (ch == 1) {
        for (std::size_t e = 0; e < m; ++e) {
            const double zv = state.z.values[e];
            const double a = std::abs(zv) - 1.0;
            const bool was = state.gamma.values[e] != 0.0;
            if (a > 0.0) {
                state.gamma.values[e] = kappa * (zv > 0.0 ? a : -a);
                ++count;
                changed |= !was;
            } else {
                state.gamma.values[e] = 0.0;
                changed |= was;
            }
        }
    } else {
        for (std::size_t e = 0; e < m; ++e) {
            const double z0 = state.z.values[e];
            const double z1 = state.z.values[m + e];
            const double z2 = state.z.values[2 * m + e];
            const double norm = std::sqrt(z0 * z0 + z1 * z1 + z2 * z2);
            const bool was = state.gamma.values[e] != 0.0 ||
                             state.gamma.values[m + e] != 0.0 ||
                             state.gamma.values[2 * m + e] != 0.0;
            if (norm > 1.0) {
                // Same association as kappa*prox_group(z) so the derived-gamma
                // invariant holds bitwise.
                const double scale = 1.0 - 1.0 / norm;
                state.gamma.values[e] = kappa * (scale * z0);
                state.gamma.values[m + e] = kappa * (scale * z1);
                state.gamma.values[2 * m + e] = kappa * (scale * z2);
                ++count;
                changed |= !was;
            } else {
                state.gamma.values[e] = 0.0;
                state.gamma.values[m + e] = 0.0;
                state.gamma.values[2 * m + e] = 0.0;
                changed |= was;
            }
        }
    }
    state.support_size = count;
    state.k += 1;
    if (support_changed) *support_changed = changed;

    if (check_descent) {
        const double loss_after = objective(g, x, state.u, state.gamma.values, ch, beta);
        if (loss_after > loss_before + kDescentSlack)
            throw std::runtime_error("step: objective increased, step size too large");
    }
}

IterState step(const LatticeGraph& g, std::span<const double> x, IterState state,
               const HyperParams& hp, bool check_descent) {
    if (!(hp.alpha > 0.0))
        throw std::invalid_argument("step: hp.alpha must be resolved (see resolve_alpha)");
    StepWorkspace ws;
    step_in_place(g, x, state, hp.kappa, hp.beta, hp.alpha, ws, check_descent);
    return state;
}

}  // namespace virolbi
