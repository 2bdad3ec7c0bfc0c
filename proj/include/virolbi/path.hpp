#pragma once

#include <cstdint>
#include <vector>

#include "virolbi/dynamics.hpp"
#include "virolbi/lattice.hpp"
#include "virolbi/projection.hpp"

namespace virolbi {

// Snapshot levels must be strictly ascending and in (0,1]; levels above
// stop_level are dropped. stop_level above 0.9 is allowed but flagged on
// the result (robustness degrades past that point).
struct PathConfig {
    std::vector<double> snapshot_levels;
    double stop_level = 1.0;
    std::int64_t max_iters = 50000;
    HyperParams hp;
};

// Projected smoothed image at a recorded sparsity level. Taken at the first
// iteration whose sparsity reaches requested_level, so
// achieved_sparsity >= requested_level. image is planar p*channels and
// satisfies D_{S^c} image == 0 exactly for its own support.
struct Snapshot {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> image;
    SupportSet support;  // supp(gamma) at the recorded iteration
    double achieved_sparsity = 0.0;
    double requested_level = 0.0;
    std::int64_t iteration = 0;

    ImagePlane as_plane() const;
    ColorImage as_color() const;
};

struct PathResult {
    std::vector<Snapshot> snapshots;   // ascending requested level
    bool truncated = false;            // max_iters hit before stop_level
    bool stop_level_flagged = false;   // stop_level > 0.9
    std::int64_t iterations = 0;
    double final_sparsity = 0.0;
    double alpha = 0.0;                // resolved step size
    bool hessian_fallback = false;
};

// Iterates the dynamics from the zero state, recording a projected snapshot
// at the first crossing of each requested level. When a single iteration
// crosses several levels they all record the same iterate. Terminates at
// the stop_level crossing or max_iters; if no requested level was reached
// the result carries one baseline snapshot with requested_level 0.
PathResult run_path(const ImagePlane& x, const PathConfig& cfg);
PathResult run_path(const ColorImage& x, const PathConfig& cfg);

// Single-level convenience wrapper; returns the one snapshot (the baseline
// snapshot for truncated runs). Inspect run_path for truncation details.
Snapshot smooth_to_level(const ImagePlane& x, double level, const HyperParams& hp,
                         std::int64_t max_iters = 50000);
Snapshot smooth_to_level(const ColorImage& x, double level, const HyperParams& hp,
                         std::int64_t max_iters = 50000);

}  // namespace virolbi
