#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "virolbi/dynamics.hpp"

namespace virolbi::batch {

enum class ColorMode { Auto, Gray, Rgb };

// One preprocessing job: smooth a file or a directory of files to the target
// sparsity level(s). Levels default per image size when empty (0.6 up to
// 64x64, 0.3 above, following the CIFAR/ImageNet split). Runs are seedless
// and deterministic by construction.
struct JobSpec {
    std::filesystem::path input;
    std::filesystem::path out_dir;
    std::vector<double> levels;
    ColorMode color = ColorMode::Auto;
    HyperParams hp;
    std::string out_format = "png";  // png | pnm
    int workers = 0;                 // 0 = hardware default (bounded)
    std::filesystem::path report_path;
};

// Exit codes: 0 success, 1 partial failure (some files failed), 2 invalid
// arguments. Writes <out>/manifest.csv with one row per input file:
// file,status,achieved_sparsity,iterations,kappa,beta,alpha,input_hash.
int cmd_smooth(const JobSpec& job);

// Like cmd_smooth with default levels {0.2,0.4,0.6,0.8,1.0}; also writes
// <out>/snapshots.csv with per-snapshot metadata
// (file,requested_level,achieved_sparsity,iteration).
int cmd_path(const JobSpec& job);

struct BenchSpec {
    int height = 0;
    int width = 0;
    std::int64_t iters = 15000;
    std::filesystem::path report_path;
};

// Runs oracle::timing_benchmark, prints the key=value report (plus machine
// metadata) to stdout and optionally to report_path.
int cmd_bench(const BenchSpec& spec);

struct SpectrumSpec {
    std::filesystem::path originals;
    std::filesystem::path smoothed;
    std::filesystem::path out_dir;
    double radius = 6.0;
    std::filesystem::path report_path;
};

// Pairs files by stem (a trailing _s<level> suffix on smoothed files is
// stripped), computes the expected spectral difference, writes
// <out>/spectral_diff.png and reports the low/high energy split at radius r.
int cmd_spectrum(const SpectrumSpec& spec);

}  // namespace virolbi::batch
