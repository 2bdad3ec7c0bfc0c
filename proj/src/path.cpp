#include "virolbi/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace virolbi {

namespace {

// First-crossing thresholds as integer support counts so level comparisons
// are exact and reproducible.
std::int64_t level_to_count(double level, int edge_count) {
    const double raw = std::ceil(level * edge_count - 1e-9);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(raw));
}

struct ValidatedConfig {
    std::vector<double> levels;
    std::vector<std::int64_t> level_counts;
    std::int64_t stop_count = 0;
    bool stop_flagged = false;
};

ValidatedConfig validate(const PathConfig& cfg, int edge_count) {
    if (!(cfg.stop_level > 0.0 && cfg.stop_level <= 1.0))
        throw std::invalid_argument("run_path: stop_level must lie in (0,1]");
    if (cfg.max_iters < 1)
        throw std::invalid_argument("run_path: max_iters must be positive");
    double prev = 0.0;
    for (double lv : cfg.snapshot_levels) {
        if (!(lv > 0.0 && lv <= 1.0))
            throw std::invalid_argument("run_path: snapshot levels must lie in (0,1]");
        if (lv <= prev)
            throw std::invalid_argument("run_path: snapshot levels must be strictly ascending");
        prev = lv;
    }
    ValidatedConfig v;
    v.stop_flagged = cfg.stop_level > 0.9;
    for (double lv : cfg.snapshot_levels)
        if (lv <= cfg.stop_level) v.levels.push_back(lv);
    for (double lv : v.levels) v.level_counts.push_back(level_to_count(lv, edge_count));
    v.stop_count = level_to_count(cfg.stop_level, edge_count);
    return v;
}

Snapshot make_snapshot(const LatticeGraph& g, const IterState& state, int channels,
                       double requested_level) {
    Snapshot snap;
    snap.height = g.height;
    snap.width = g.width;
    snap.channels = channels;
    snap.requested_level = requested_level;
    snap.iteration = state.k;
    snap.support = SupportSet::from_gamma(state.gamma);
    snap.achieved_sparsity = sparsity_level(snap.support);
    const ComponentPartition part = find_components(g, snap.support);
    snap.image = project(state.u, channels, part);
    return snap;
}

PathResult run_path_impl(std::span<const double> x, int height, int width, int channels,
                         const PathConfig& cfg) {
    const LatticeGraph g = build_lattice(height, width);
    const ValidatedConfig v = validate(cfg, g.edge_count());

    PathResult result;
    result.stop_level_flagged = v.stop_flagged;
    HyperParams hp = cfg.hp;
    result.alpha = resolve_alpha(g, hp, &result.hessian_fallback);

    IterState state = IterState::zero(g, channels);
    StepWorkspace ws;
    std::size_t next_level = 0;
    bool stopped = false;

    for (std::int64_t k = 0; k < cfg.max_iters; ++k) {
        step_in_place(g, x, state, hp.kappa, hp.beta, result.alpha, ws);
        const std::int64_t support = state.support_size;
        // Record every level first crossed by this iterate (one projection,
        // shared by all of them).
        if (next_level < v.levels.size() && support >= v.level_counts[next_level]) {
            Snapshot snap = make_snapshot(g, state, channels, v.levels[next_level]);
            result.snapshots.push_back(snap);
            ++next_level;
            while (next_level < v.levels.size() && support >= v.level_counts[next_level]) {
                Snapshot again = snap;
                again.requested_level = v.levels[next_level];
                result.snapshots.push_back(std::move(again));
                ++next_level;
            }
        }
        if (support >= v.stop_count) {
            stopped = true;
            result.iterations = state.k;
            break;
        }
    }

    if (!stopped) {
        result.truncated = true;
        result.iterations = state.k;
    }
    result.final_sparsity = sparsity_level(SupportSet::from_gamma(state.gamma));

    if (result.snapshots.empty())
        result.snapshots.push_back(make_snapshot(g, state, channels, 0.0));
    return result;
}

}  // namespace

ImagePlane Snapshot::as_plane() const {
    if (channels != 1) throw std::logic_error("Snapshot: not a single-channel image");
    ImagePlane out(height, width);
    out.pixels = image;
    return out;
}

ColorImage Snapshot::as_color() const {
    if (channels != 3) throw std::logic_error("Snapshot: not a color image");
    ColorImage out;
    const std::size_t p = static_cast<std::size_t>(height) * width;
    for (int c = 0; c < 3; ++c) {
        out.channels[c] = ImagePlane(height, width);
        std::copy(image.begin() + c * p, image.begin() + (c + 1) * p,
                  out.channels[c].pixels.begin());
    }
    return out;
}

PathResult run_path(const ImagePlane& x, const PathConfig& cfg) {
    return run_path_impl(x.pixels, x.height, x.width, 1, cfg);
}

PathResult run_path(const ColorImage& x, const PathConfig& cfg) {
    for (int c = 1; c < 3; ++c)
        if (x.channels[c].height != x.height() || x.channels[c].width != x.width())
            throw std::invalid_argument("run_path: color channels disagree on dimensions");
    std::vector<double> planar;
    planar.reserve(static_cast<std::size_t>(x.pixel_count()) * 3);
    for (int c = 0; c < 3; ++c)
        planar.insert(planar.end(), x.channels[c].pixels.begin(), x.channels[c].pixels.end());
    return run_path_impl(planar, x.height(), x.width(), 3, cfg);
}

namespace {
template <typename Img>
Snapshot smooth_impl(const Img& x, double level, const HyperParams& hp,
                     std::int64_t max_iters) {
    if (!(level > 0.0 && level <= 1.0))
        throw std::invalid_argument("smooth_to_level: level must lie in (0,1]");
    PathConfig cfg;
    cfg.snapshot_levels = {level};
    cfg.stop_level = level;
    cfg.max_iters = max_iters;
    cfg.hp = hp;
    PathResult res = run_path(x, cfg);
    return std::move(res.snapshots.back());
}
}  // namespace

Snapshot smooth_to_level(const ImagePlane& x, double level, const HyperParams& hp,
                         std::int64_t max_iters) {
    return smooth_impl(x, level, hp, max_iters);
}

Snapshot smooth_to_level(const ColorImage& x, double level, const HyperParams& hp,
                         std::int64_t max_iters) {
    return smooth_impl(x, level, hp, max_iters);
}

}  // namespace virolbi
