#include "virolbi/batch.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "virolbi/imageio.hpp"
#include "virolbi/oracle.hpp"
#include "virolbi/path.hpp"
#include "virolbi/spectral.hpp"

namespace virolbi::batch {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fmt_level(double level) { return fmt("%g", level); }

std::string file_hash_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return {};
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

struct SnapRow {
    double requested = 0.0;
    double achieved = 0.0;
    std::int64_t iteration = 0;
};

struct FileOutcome {
    std::string file;
    std::string status;  // ok | truncated | error | skipped
    double achieved = 0.0;
    std::int64_t iterations = 0;
    std::string hash;
    std::vector<SnapRow> snaps;
    std::string message;
};

std::vector<fs::path> enumerate_inputs(const fs::path& input) {
    std::vector<fs::path> files;
    if (fs::is_directory(input)) {
        for (const auto& entry : fs::directory_iterator(input))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }
    return files;
}

std::vector<double> default_levels(int height, int width) {
    return (height <= 64 && width <= 64) ? std::vector<double>{0.6}
                                         : std::vector<double>{0.3};
}

std::vector<double> normalize_levels(std::vector<double> levels) {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double lv : levels)
        if (!(lv > 0.0 && lv <= 1.0))
            throw std::invalid_argument("levels must lie in (0, 1]");
    return levels;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

struct ProcessedFile {
    FileOutcome outcome;
};

FileOutcome process_file(const fs::path& file, const JobSpec& job, bool path_mode) {
    FileOutcome out;
    out.file = file.string();
    out.hash = file_hash_hex(file);
    if (!io::supported_input(file)) {
        out.status = "skipped";
        out.message = "unsupported format";
        return out;
    }
    try {
        io::RasterImage raster = io::read_image(file);
        if (job.color == ColorMode::Gray) raster = io::to_gray(raster);
        if (job.color == ColorMode::Rgb) raster = io::to_rgb(raster);

        std::vector<double> levels = job.levels.empty()
                                         ? default_levels(raster.height, raster.width)
                                         : job.levels;
        if (path_mode && job.levels.empty()) levels = {0.2, 0.4, 0.6, 0.8, 1.0};
        levels = normalize_levels(std::move(levels));

        PathConfig cfg;
        cfg.snapshot_levels = levels;
        cfg.stop_level = levels.back();
        cfg.max_iters = job.hp.max_iters;
        cfg.hp = job.hp;

        PathResult result = raster.channels == 1
                                ? run_path(raster.as_plane(), cfg)
                                : run_path(raster.as_color(), cfg);

        const std::string ext = job.out_format == "pnm"
                                    ? (raster.channels == 1 ? ".pgm" : ".ppm")
                                    : ".png";
        for (const Snapshot& snap : result.snapshots) {
            io::RasterImage img;
            img.height = snap.height;
            img.width = snap.width;
            img.channels = snap.channels;
            img.data = snap.image;
            const fs::path dest =
                job.out_dir / (file.stem().string() + "_s" +
                               fmt_level(snap.requested_level) + ext);
            if (job.out_format == "pnm")
                io::write_pnm(dest, img);
            else
                io::write_png(dest, img);
            out.snaps.push_back(
                {snap.requested_level, snap.achieved_sparsity, snap.iteration});
        }
        out.status = result.truncated ? "truncated" : "ok";
        out.achieved = result.final_sparsity;
        out.iterations = result.iterations;
    } catch (const std::exception& e) {
        out.status = "error";
        out.message = e.what();
    }
    return out;
}

void write_manifest(const fs::path& dest, const std::vector<FileOutcome>& rows,
                    const JobSpec& job) {
    std::ofstream out(dest, std::ios::binary);
    out << "file,status,achieved_sparsity,iterations,kappa,beta,alpha,input_hash\n";
    for (const FileOutcome& row : rows) {
        out << row.file << "," << row.status << ",";
        if (row.status == "ok" || row.status == "truncated") {
            out << fmt("%.6g", row.achieved) << "," << row.iterations << ","
                << fmt("%g", job.hp.kappa) << "," << fmt("%g", job.hp.beta) << ","
                << (job.hp.alpha_mode == AlphaMode::Auto ? "auto"
                                                         : fmt("%.9g", job.hp.alpha));
        } else {
            out << ",,,,";
        }
        out << "," << row.hash << "\n";
    }
}

void write_snapshot_meta(const fs::path& dest, const std::vector<FileOutcome>& rows) {
    std::ofstream out(dest, std::ios::binary);
    out << "file,requested_level,achieved_sparsity,iteration\n";
    for (const FileOutcome& row : rows)
        for (const SnapRow& s : row.snaps)
            out << row.file << "," << fmt_level(s.requested) << ","
                << fmt("%.6g", s.achieved) << "," << s.iteration << "\n";
}

int run_batch(const JobSpec& job, bool path_mode) {
    if (job.input.empty() || job.out_dir.empty()) {
        std::cerr << "error: input and output directory are required\n";
        return 2;
    }
    std::error_code ec;
    if (!fs::exists(job.input, ec)) {
        std::cerr << "error: input does not exist: " << job.input << "\n";
        return 2;
    }
    const fs::path input_dir =
        fs::is_directory(job.input) ? job.input : job.input.parent_path();
    fs::create_directories(job.out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory: " << job.out_dir << "\n";
        return 2;
    }
    if (!input_dir.empty() &&
        fs::equivalent(input_dir, job.out_dir, ec) && !ec) {
        std::cerr << "error: output directory must be distinct from the input\n";
        return 2;
    }
    try {
        normalize_levels(job.levels);  // validate before touching any file
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const std::vector<fs::path> files = enumerate_inputs(job.input);
    if (files.empty()) {
        std::cerr << "error: no input files in " << job.input << "\n";
        return 2;
    }

    // Distinct inputs mapping to the same output stem would silently
    // overwrite each other; first (in sorted order) wins.
    std::map<std::string, std::size_t> stem_owner;
    std::vector<bool> collides(files.size(), false);
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto [it, inserted] = stem_owner.emplace(files[i].stem().string(), i);
        if (!inserted) collides[i] = true;
    }

    std::vector<FileOutcome> outcomes(files.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(resolve_workers(job.workers),
                                      static_cast<int>(files.size()));
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < files.size();
             i = next.fetch_add(1)) {
            if (collides[i]) {
                outcomes[i].file = files[i].string();
                outcomes[i].hash = file_hash_hex(files[i]);
                outcomes[i].status = "error";
                outcomes[i].message = "output stem collides with another input";
            } else {
                outcomes[i] = process_file(files[i], job, path_mode);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    write_manifest(job.out_dir / "manifest.csv", outcomes, job);
    if (path_mode) write_snapshot_meta(job.out_dir / "snapshots.csv", outcomes);

    int ok = 0, failed = 0, skipped = 0;
    for (const FileOutcome& row : outcomes) {
        if (row.status == "error") {
            ++failed;
            std::cerr << row.file << ": " << row.message << "\n";
        } else if (row.status == "skipped") {
            ++skipped;
            std::cerr << row.file << ": skipped (" << row.message << ")\n";
        } else {
            ++ok;
        }
    }

    if (!job.report_path.empty()) {
        std::ofstream rep(job.report_path, std::ios::binary);
        rep << "job.command=" << (path_mode ? "path" : "smooth") << "\n"
            << "job.inputs=" << files.size() << "\n"
            << "job.ok=" << ok << "\n"
            << "job.failed=" << failed << "\n"
            << "job.skipped=" << skipped << "\n";
    }
    return failed > 0 ? 1 : 0;
}

std::string machine_metadata() {
    std::ostringstream os;
    utsname un{};
    if (uname(&un) == 0)
        os << "machine.uname=" << un.sysname << " " << un.release << " " << un.machine
           << "\n";
    os << "machine.hardware_threads=" << std::thread::hardware_concurrency() << "\n";
    return os.str();
}

// Smoothed outputs are named <stem>_s<level>.<ext>; map them back to the
// original stem when no exact match exists.
std::string strip_level_suffix(const std::string& stem) {
    const std::size_t pos = stem.rfind("_s");
    if (pos == std::string::npos || pos + 2 >= stem.size()) return stem;
    const std::string tail = stem.substr(pos + 2);
    char* end = nullptr;
    std::strtod(tail.c_str(), &end);
    if (end && *end == '\0') return stem.substr(0, pos);
    return stem;
}

}  // namespace

int cmd_smooth(const JobSpec& job) { return run_batch(job, false); }

int cmd_path(const JobSpec& job) { return run_batch(job, true); }

int cmd_bench(const BenchSpec& spec) {
    if (spec.height < 1 || spec.width < 1 || spec.iters < 1) {
        std::cerr << "error: bench size and iteration count must be positive\n";
        return 2;
    }
    const oracle::BenchReport report =
        oracle::timing_benchmark(spec.height, spec.width, spec.iters);
    const std::string text = oracle::to_kv_text(report) + machine_metadata();
    std::cout << text;
    if (!spec.report_path.empty()) {
        std::ofstream out(spec.report_path, std::ios::binary);
        out << text;
    }
    return 0;
}

int cmd_spectrum(const SpectrumSpec& spec) {
    if (!(spec.radius > 0.0)) {
        std::cerr << "error: cutoff radius must be positive\n";
        return 2;
    }
    if (!fs::is_directory(spec.originals) || !fs::is_directory(spec.smoothed)) {
        std::cerr << "error: originals and smoothed must be directories\n";
        return 2;
    }

    std::map<std::string, fs::path> originals;
    for (const auto& entry : fs::directory_iterator(spec.originals))
        if (entry.is_regular_file() && io::supported_input(entry.path()))
            originals.emplace(entry.path().stem().string(), entry.path());

    std::map<std::string, fs::path> smoothed;
    std::vector<std::string> problems;
    for (const auto& entry : fs::directory_iterator(spec.smoothed)) {
        if (!entry.is_regular_file() || !io::supported_input(entry.path())) continue;
        std::string key = entry.path().stem().string();
        if (!originals.count(key)) key = strip_level_suffix(key);
        if (!originals.count(key)) {
            problems.push_back("unmatched smoothed file: " + entry.path().string());
            continue;
        }
        if (!smoothed.emplace(key, entry.path()).second)
            problems.push_back("ambiguous smoothed match for stem '" + key +
                               "': " + entry.path().string());
    }
    for (const auto& [stem, path] : originals)
        if (!smoothed.count(stem))
            problems.push_back("unmatched original file: " + path.string());

    if (originals.empty()) {
        std::cerr << "error: no supported images in " << spec.originals << "\n";
        return 2;
    }
    if (!problems.empty()) {
        for (const std::string& p : problems) std::cerr << "error: " << p << "\n";
        return 2;
    }

    std::vector<ImagePlane> xs, ss;
    try {
        for (const auto& [stem, orig_path] : originals) {
            xs.push_back(io::to_gray(io::read_image(orig_path)).as_plane());
            ss.push_back(io::to_gray(io::read_image(smoothed.at(stem))).as_plane());
        }
        const ImagePlane spectrum = spectral::expected_spectral_diff(xs, ss);
        const spectral::BandEnergy energy =
            spectral::spectrum_band_energy(spectrum, spec.radius);

        std::error_code ec;
        fs::create_directories(spec.out_dir, ec);
        double peak = 0.0;
        for (double v : spectrum.pixels) peak = std::max(peak, v);
        io::RasterImage heat;
        heat.height = spectrum.height;
        heat.width = spectrum.width;
        heat.channels = 1;
        heat.data = spectrum.pixels;
        if (peak > 0.0)
            for (double& v : heat.data) v /= peak;
        io::write_png(spec.out_dir / "spectral_diff.png", heat);

        const double total = energy.low + energy.high;
        std::ostringstream os;
        os << "spectrum.pairs=" << xs.size() << "\n"
           << "spectrum.radius=" << fmt("%g", spec.radius) << "\n"
           << "spectrum.low_energy=" << fmt("%.9g", energy.low) << "\n"
           << "spectrum.high_energy=" << fmt("%.9g", energy.high) << "\n"
           << "spectrum.high_band_fraction="
           << fmt("%.9g", total > 0.0 ? energy.high / total : 0.0) << "\n";
        std::cout << os.str();
        if (!spec.report_path.empty()) {
            std::ofstream out(spec.report_path, std::ios::binary);
            out << os.str();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace virolbi::batch
