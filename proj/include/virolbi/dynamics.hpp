#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "virolbi/lattice.hpp"

namespace virolbi {

enum class AlphaMode { Auto, Explicit };

// kappa: elastic-net scale; beta: splitting weight of
// L_beta(u,gamma) = 1/2 ||u-x||^2 + beta ||Du-gamma||^2; alpha: step size.
// With AlphaMode::Auto, alpha = 1/(kappa*||H||_2) where H is the joint
// Hessian of L_beta in (u,gamma). Any alpha must satisfy
// alpha < 2/(kappa*||H||_2).
struct HyperParams {
    double kappa = 5.0;
    double beta = 1.0;
    double alpha = 0.0;
    std::int64_t max_iters = 50000;
    AlphaMode alpha_mode = AlphaMode::Auto;
};

// The dynamical triple (u, z, gamma) plus iteration counter. gamma is
// always kappa*prox(z); support_size counts edges whose gamma group is
// nonzero and is maintained incrementally by step().
struct IterState {
    std::vector<double> u;  // p*channels, planar
    EdgeVector z;
    EdgeVector gamma;
    std::int64_t k = 0;
    int support_size = 0;

    int channels() const { return z.channels; }
    static IterState zero(const LatticeGraph& g, int channels);
};

// Spectral norm of the constant joint Hessian
//   H = [[I + 2b D^T D, -2b D^T], [-2b D, 2b I]]
// by power iteration (deterministic start, rel. tol 1e-4 or better).
// On non-convergence falls back to the analytic bound 1 + 2b*(8 + 1)
// (lambda_max(D^T D) <= 8 on the 4-connected lattice) and sets
// *used_fallback when given.
double estimate_hessian_norm(const LatticeGraph& g, double beta,
                             bool* used_fallback = nullptr);

// Resolves the step size for hp on lattice g (computes 1/(kappa*||H||) in
// Auto mode) and checks alpha < 2/(kappa*||H||). Throws std::invalid_argument
// on violation.
double resolve_alpha(const LatticeGraph& g, const HyperParams& hp,
                     bool* used_fallback = nullptr);

// grad_u L_beta = (u - x) + 2*beta*D^T(Du - gamma)
std::vector<double> grad_u(const LatticeGraph& g, std::span<const double> x,
                           const IterState& state, double beta);
// grad_gamma L_beta = -2*beta*(Du - gamma)
EdgeVector grad_gamma(const LatticeGraph& g, const IterState& state, double beta);

// Elementwise sign(z)*max(|z|-1, 0).
EdgeVector prox_l1(const EdgeVector& z);
// Per edge group i of a 3-channel vector: (1 - 1/||z(i,)||_2)*z(i,) when
// ||z(i,)||_2 >= 1, else zero.
EdgeVector prox_group(const EdgeVector& z);

// L_beta(u, gamma) for a (possibly multichannel, planar) instance.
double objective(const LatticeGraph& g, std::span<const double> x,
                 std::span<const double> u, std::span<const double> gamma,
                 int channels, double beta);

// Reusable scratch for the iteration loop.
struct StepWorkspace {
    std::vector<double> edge_buf;   // m*channels
    std::vector<double> pixel_buf;  // p*channels
};

// One ViRoLBI iteration:
//   u' = u - kappa*alpha*grad_u(u_k, gamma_k)
//   z' = z - alpha*grad_gamma(u_k, gamma_k)
//   gamma' = kappa*prox(z')   (prox_l1 for 1 channel, prox_group for 3)
// Updates state in place, maintains support_size, and reports through
// *support_changed (when given) whether the support set changed.
// With check_descent, throws std::runtime_error if L_beta increased by
// more than 1e-12.
void step_in_place(const LatticeGraph& g, std::span<const double> x, IterState& state,
                   double kappa, double beta, double alpha, StepWorkspace& ws,
                   bool check_descent = false, bool* support_changed = nullptr);

// Pure-value convenience wrapper; hp.alpha must already be resolved
// (see resolve_alpha).
IterState step(const LatticeGraph& g, std::span<const double> x, IterState state,
               const HyperParams& hp, bool check_descent = false);

}  // namespace virolbi
