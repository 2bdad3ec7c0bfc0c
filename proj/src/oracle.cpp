#include "virolbi/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "virolbi/dynamics.hpp"

namespace virolbi::oracle {

namespace {

constexpr int kMaxOraclePixels = 64;
constexpr int kDenseCutoffPixels = 7500;

Eigen::MatrixXd assemble_complement_rows(const LatticeGraph& g, const SupportSet& s,
                                         int rows) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, g.pixel_count());
    int r = 0;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (s.member[e]) continue;
        D(r, g.edges[e].first) = 1.0;
        D(r, g.edges[e].second) = -1.0;
        ++r;
    }
    return D;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Deterministic synthetic benchmark image: smooth large-scale structure with
// spatially varying micro-texture so every edge eventually activates.
ImagePlane make_bench_image(int h, int w) {
    ImagePlane img(h, w);
    const double pi = 3.14159265358979323846;
    for (int y = 0; y < h; ++y) {
        const double fy = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
        for (int x = 0; x < w; ++x) {
            const double fx = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            double v = 0.42 + 0.22 * fy - 0.12 * fx;
            v += 0.30 * std::exp(-((fx - 0.32) * (fx - 0.32) + (fy - 0.38) * (fy - 0.38)) / 0.02);
            v += 0.22 * std::exp(-((fx - 0.70) * (fx - 0.70) + (fy - 0.64) * (fy - 0.64)) / 0.045);
            v += 0.08 * std::sin(2.0 * pi * (1.7 * fx + 0.6 * fy));
            const double amp = 0.006 + 0.018 * fx + 0.011 * fy;
            v += amp * std::sin(12.9898 * x + 78.233 * y + 0.17 * x * y);
            img.at(y, x) = std::clamp(v, 0.01, 0.99);
        }
    }
    return img;
}

// Per-iteration projection by warm-started CG on the masked edge Laplacian:
// solve (M D D^T M) w = M D u, then u_tilde = u - D^T (M w). Any null-space
// component of w is annihilated by D^T, so warm starts are safe.
class CgLeastSquaresProjector {
public:
    explicit CgLeastSquaresProjector(const LatticeGraph& g)
        : g_(g),
          p_(g.pixel_count()),
          m_(g.edge_count()),
          w_(m_, 0.0),
          mask_(m_, 1),
          b_(m_), r_(m_), d_(m_), q_(m_), pix_(p_) {}

    void sync_mask(const EdgeVector& gamma) {
        for (int e = 0; e < m_; ++e) {
            mask_[e] = gamma.values[e] == 0.0 ? 1 : 0;
            if (!mask_[e]) w_[e] = 0.0;
        }
    }

    void project(std::span<const double> u, std::span<double> out, double rtol,
                 int max_cg) {
        apply_D(g_, u, 1, b_);
        for (int e = 0; e < m_; ++e) b_[e] *= mask_[e];
        double bn = 0.0;
        for (int e = 0; e < m_; ++e) bn += b_[e] * b_[e];
        bn = std::sqrt(bn);
        if (bn == 0.0) {
            std::fill(w_.begin(), w_.end(), 0.0);  // iterate already feasible
        } else {
            apply_op(w_, q_);
            double rr = 0.0;
            for (int e = 0; e < m_; ++e) {
                r_[e] = b_[e] - q_[e];
                d_[e] = r_[e];
                rr += r_[e] * r_[e];
            }
            const double stop2 = (rtol * bn) * (rtol * bn);
            for (int it = 0; it < max_cg && rr > stop2; ++it) {
                apply_op(d_, q_);
                double dq = 0.0;
                for (int e = 0; e < m_; ++e) dq += d_[e] * q_[e];
                if (dq <= 0.0) break;
                const double a = rr / dq;
                double rr_next = 0.0;
                for (int e = 0; e < m_; ++e) {
                    w_[e] += a * d_[e];
                    r_[e] -= a * q_[e];
                    rr_next += r_[e] * r_[e];
                }
                const double br = rr_next / rr;
                for (int e = 0; e < m_; ++e) d_[e] = r_[e] + br * d_[e];
                rr = rr_next;
            }
            max_rel_residual = std::max(max_rel_residual, std::sqrt(rr) / bn);
        }
        apply_D_transpose(g_, w_, 1, pix_);
        for (int i = 0; i < p_; ++i) out[i] = u[i] - pix_[i];
    }

    double max_rel_residual = 0.0;

private:
    void apply_op(const std::vector<double>& w, std::vector<double>& out) {
        apply_D_transpose(g_, w, 1, pix_);
        apply_D(g_, pix_, 1, out);
        for (int e = 0; e < m_; ++e) out[e] *= mask_[e];
    }

    const LatticeGraph& g_;
    int p_, m_;
    std::vector<double> w_;
    std::vector<std::uint8_t> mask_;
    std::vector<double> b_, r_, d_, q_, pix_;
};

// Dense closed-form projector, kept as an explicit p x p matrix and applied
// per iteration as a full matvec. Entry (i,j) is 1/|V_c| when i and j share
// component c and 0 otherwise, which is exactly I - pinv(D_{S^c}) D_{S^c};
// the matrix is rebuilt block-wise when the component partition changes.
class DenseProjector {
public:
    explicit DenseProjector(int p) : p_(p), P_(Eigen::MatrixXd::Zero(p, p)) {}

    void sync(const ComponentPartition& np) {
        std::vector<std::int32_t> noffset(np.component_count + 1, 0);
        for (std::int32_t c = 0; c < np.component_count; ++c)
            noffset[c + 1] = noffset[c] + np.component_size[c];
        std::vector<std::int32_t> nmembers(p_);
        {
            std::vector<std::int32_t> cursor(noffset.begin(), noffset.end() - 1);
            for (int i = 0; i < p_; ++i) nmembers[cursor[np.component_id[i]]++] = i;
        }

        if (!built_) {
            for (std::int32_t c = 0; c < np.component_count; ++c)
                fill_block(nmembers, noffset, c, 1.0 / np.component_size[c]);
            built_ = true;
        } else {
            // A new component is clean iff it equals an old component as a
            // set; only blocks of changed components are rewritten.
            std::vector<std::int32_t> common_old(np.component_count, -2);
            for (int i = 0; i < p_; ++i) {
                const std::int32_t c = np.component_id[i];
                const std::int32_t o = part_.component_id[i];
                if (common_old[c] == -2)
                    common_old[c] = o;
                else if (common_old[c] != o)
                    common_old[c] = -1;
            }
            std::vector<std::uint8_t> old_matched(part_.component_count, 0);
            std::vector<std::uint8_t> new_dirty(np.component_count, 0);
            for (std::int32_t c = 0; c < np.component_count; ++c) {
                const std::int32_t o = common_old[c];
                if (o >= 0 && part_.component_size[o] == np.component_size[c])
                    old_matched[o] = 1;
                else
                    new_dirty[c] = 1;
            }
            for (std::int32_t o = 0; o < part_.component_count; ++o) {
                if (old_matched[o]) continue;
                zero_block(members_, offset_, o);
            }
            for (std::int32_t c = 0; c < np.component_count; ++c) {
                if (!new_dirty[c]) continue;
                fill_block(nmembers, noffset, c, 1.0 / np.component_size[c]);
            }
        }
        part_ = np;
        members_ = std::move(nmembers);
        offset_ = std::move(noffset);
    }

    void apply(std::span<const double> u, std::span<double> out) const {
        Eigen::Map<const Eigen::VectorXd> uv(u.data(), p_);
        Eigen::Map<Eigen::VectorXd> ov(out.data(), p_);
        ov.noalias() = P_ * uv;
    }

private:
    void fill_block(const std::vector<std::int32_t>& members,
                    const std::vector<std::int32_t>& offset, std::int32_t c,
                    double value) {
        for (std::int32_t a = offset[c]; a < offset[c + 1]; ++a) {
            double* col = P_.col(members[a]).data();
            for (std::int32_t b = offset[c]; b < offset[c + 1]; ++b)
                col[members[b]] = value;
        }
    }
    void zero_block(const std::vector<std::int32_t>& members,
                    const std::vector<std::int32_t>& offset, std::int32_t c) {
        for (std::int32_t a = offset[c]; a < offset[c + 1]; ++a) {
            double* col = P_.col(members[a]).data();
            for (std::int32_t b = offset[c]; b < offset[c + 1]; ++b)
                col[members[b]] = 0.0;
        }
    }

    int p_;
    Eigen::MatrixXd P_;
    ComponentPartition part_;
    std::vector<std::int32_t> members_, offset_;
    bool built_ = false;
};

enum class Strategy { Graph, Lsq, Dense };

double run_strategy(Strategy strat, const LatticeGraph& g, const ImagePlane& x,
                    double kappa, double beta, double alpha, std::int64_t iters,
                    std::vector<double>& final_projected, double* lsq_residual,
                    double* final_sparsity) {
    const int p = g.pixel_count();
    IterState state = IterState::zero(g, 1);
    StepWorkspace ws;
    std::vector<double> proj(p, 0.0);

    CgLeastSquaresProjector cg(g);
    DenseProjector dense(p);
    bool support_dirty = true;

    const double t0 = now_seconds();
    for (std::int64_t k = 0; k < iters; ++k) {
        bool changed = false;
        step_in_place(g, x.pixels, state, kappa, beta, alpha, ws, false, &changed);
        support_dirty |= changed;
        switch (strat) {
            case Strategy::Graph: {
                const SupportSet s = SupportSet::from_gamma(state.gamma);
                const ComponentPartition part = find_components(g, s);
                project(state.u, 1, part, proj);
                break;
            }
            case Strategy::Lsq: {
                if (support_dirty) {
                    cg.sync_mask(state.gamma);
                    support_dirty = false;
                }
                cg.project(state.u, proj, 1e-12, 4 * g.edge_count());
                break;
            }
            case Strategy::Dense: {
                if (support_dirty) {
                    const SupportSet s = SupportSet::from_gamma(state.gamma);
                    dense.sync(find_components(g, s));
                    support_dirty = false;
                }
                dense.apply(state.u, proj);
                break;
            }
        }
    }
    const double elapsed = now_seconds() - t0;

    final_projected = proj;
    if (lsq_residual && strat == Strategy::Lsq) *lsq_residual = cg.max_rel_residual;
    if (final_sparsity)
        *final_sparsity = sparsity_level(SupportSet::from_gamma(state.gamma));
    return elapsed;
}

}  // namespace

ScaleSpaceSolution solve_scale_space(const ImagePlane& x, double lambda, double beta,
                                     double tol) {
    if (x.pixel_count() > kMaxOraclePixels)
        throw std::invalid_argument("solve_scale_space: oracle instance too large");
    if (lambda < 0.0 || beta <= 0.0 || tol <= 0.0)
        throw std::invalid_argument("solve_scale_space: invalid parameters");
    const LatticeGraph g = build_lattice(x.height, x.width);
    const int p = g.pixel_count();
    const int m = g.edge_count();

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p);
    for (int e = 0; e < m; ++e) {
        const auto [i, j] = g.edges[e];
        A(i, i) += 2.0 * beta;
        A(j, j) += 2.0 * beta;
        A(i, j) -= 2.0 * beta;
        A(j, i) -= 2.0 * beta;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(A);

    ScaleSpaceSolution sol;
    sol.u = x.pixels;
    sol.gamma = EdgeVector(m, 1, 0.0);
    const double thresh = lambda / (2.0 * beta);
    std::vector<double> du(m), rhs(p);
    double prev_obj = std::numeric_limits<double>::infinity();

    const int max_iters = 500000;
    for (int it = 1; it <= max_iters; ++it) {
        apply_D(g, sol.u, 1, du);
        for (int e = 0; e < m; ++e) {
            const double a = std::abs(du[e]) - thresh;
            sol.gamma.values[e] = a > 0.0 ? (du[e] > 0.0 ? a : -a) : 0.0;
        }
        apply_D_transpose(g, sol.gamma.values, 1, rhs);
        Eigen::VectorXd b(p);
        for (int i = 0; i < p; ++i) b[i] = x.pixels[i] + 2.0 * beta * rhs[i];
        const Eigen::VectorXd u = llt.solve(b);
        for (int i = 0; i < p; ++i) sol.u[i] = u[i];

        double l1 = 0.0;
        for (int e = 0; e < m; ++e) l1 += std::abs(sol.gamma.values[e]);
        const double obj =
            objective(g, x.pixels, sol.u, sol.gamma.values, 1, beta) + lambda * l1;
        sol.iterations = it;
        sol.objective = obj;
        if (prev_obj - obj < tol && it > 1) return sol;
        prev_obj = obj;
    }
    throw std::runtime_error("solve_scale_space: did not converge");
}

std::vector<double> dense_projection(std::span<const double> u, int channels,
                                     const LatticeGraph& g, const SupportSet& s) {
    const int p = g.pixel_count();
    if (p > kMaxOraclePixels)
        throw std::invalid_argument("dense_projection: oracle instance too large");
    if (s.edge_count() != g.edge_count())
        throw std::invalid_argument("dense_projection: support does not match lattice");
    if (channels < 1 || u.size() != static_cast<std::size_t>(p) * channels)
        throw std::invalid_argument("dense_projection: dimension mismatch");

    const int rows = g.edge_count() - s.nonzero_count;
    std::vector<double> out(u.begin(), u.end());
    if (rows == 0) return out;  // full support: identity

    const Eigen::MatrixXd D = assemble_complement_rows(g, s, rows);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(D);
    for (int c = 0; c < channels; ++c) {
        Eigen::Map<const Eigen::VectorXd> uc(u.data() + static_cast<std::size_t>(c) * p, p);
        const Eigen::VectorXd y = cod.solve(D * uc);  // minimum-norm least squares
        Eigen::Map<Eigen::VectorXd>(out.data() + static_cast<std::size_t>(c) * p, p) =
            uc - y;
    }
    return out;
}

ImagePlane dense_projection(const ImagePlane& u, const LatticeGraph& g,
                            const SupportSet& s) {
    ImagePlane out(u.height, u.width);
    out.pixels = dense_projection(u.pixels, 1, g, s);
    return out;
}

BenchReport timing_benchmark(int height, int width, std::int64_t iters) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("timing_benchmark: dimensions must be positive");
    if (iters < 1) throw std::invalid_argument("timing_benchmark: iters must be positive");

    const LatticeGraph g = build_lattice(height, width);
    const ImagePlane x = make_bench_image(height, width);

    BenchReport report;
    report.height = height;
    report.width = width;
    report.iters = iters;
    report.kappa = 5.0;
    report.beta = 1.0;
    report.alpha = resolve_alpha(g, HyperParams{.kappa = 5.0, .beta = 1.0});
    report.dense_skipped = g.pixel_count() > kDenseCutoffPixels;

    std::vector<double> proj_graph, proj_lsq, proj_dense;
    report.graph_seconds = run_strategy(Strategy::Graph, g, x, report.kappa, report.beta,
                                        report.alpha, iters, proj_graph, nullptr,
                                        &report.final_sparsity);
    report.lsq_seconds = run_strategy(Strategy::Lsq, g, x, report.kappa, report.beta,
                                      report.alpha, iters, proj_lsq,
                                      &report.lsq_max_rel_residual, nullptr);
    if (!report.dense_skipped)
        report.dense_seconds = run_strategy(Strategy::Dense, g, x, report.kappa,
                                            report.beta, report.alpha, iters, proj_dense,
                                            nullptr, nullptr);

    double err = 0.0;
    for (std::size_t i = 0; i < proj_graph.size(); ++i) {
        err = std::max(err, std::abs(proj_graph[i] - proj_lsq[i]));
        if (!report.dense_skipped)
            err = std::max(err, std::abs(proj_graph[i] - proj_dense[i]));
    }
    report.max_cross_error = err;
    report.outputs_match = err < 1e-8;
    return report;
}

std::string to_kv_text(const BenchReport& r) {
    std::ostringstream os;
    os << "bench.height=" << r.height << "\n";
    os << "bench.width=" << r.width << "\n";
    os << "bench.iters=" << r.iters << "\n";
    os << "bench.kappa=" << r.kappa << "\n";
    os << "bench.beta=" << r.beta << "\n";
    os << "bench.alpha=" << r.alpha << "\n";
    os << "bench.graph_seconds=" << r.graph_seconds << "\n";
    os << "bench.lsq_seconds=" << r.lsq_seconds << "\n";
    if (r.dense_skipped)
        os << "bench.dense_seconds=skipped\n";
    else
        os << "bench.dense_seconds=" << r.dense_seconds << "\n";
    if (!r.dense_skipped && r.graph_seconds > 0.0)
        os << "bench.dense_over_graph=" << r.dense_seconds / r.graph_seconds << "\n";
    os << "bench.outputs_match=" << (r.outputs_match ? "true" : "false") << "\n";
    os << "bench.max_cross_error=" << r.max_cross_error << "\n";
    os << "bench.lsq_max_rel_residual=" << r.lsq_max_rel_residual << "\n";
    os << "bench.final_sparsity=" << r.final_sparsity << "\n";
    return os.str();
}

}  // namespace virolbi::oracle
