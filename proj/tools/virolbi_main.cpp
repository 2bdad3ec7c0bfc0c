#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "virolbi/batch.hpp"

namespace {

using virolbi::AlphaMode;
using virolbi::batch::ColorMode;

struct JobCli {
    virolbi::batch::JobSpec job;
    double alpha = 0.0;
    std::string color = "auto";
    std::string config_file;
    CLI::Option* level_opt = nullptr;
    CLI::Option* kappa_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* iters_opt = nullptr;
    CLI::Option* color_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* report_opt = nullptr;
};

void add_job_options(CLI::App* cmd, JobCli& cli) {
    cmd->add_option("input", cli.job.input, "Input image file or directory")->required();
    cmd->add_option("-o,--out", cli.job.out_dir, "Output directory")->required();
    cli.level_opt = cmd->add_option("-l,--level", cli.job.levels,
                                    "Target sparsity level in (0,1], repeatable");
    cli.kappa_opt = cmd->add_option("--kappa", cli.job.hp.kappa, "Elastic-net scale kappa");
    cli.beta_opt = cmd->add_option("--beta", cli.job.hp.beta, "Splitting weight beta");
    cli.alpha_opt = cmd->add_option("--alpha", cli.alpha,
                                    "Explicit step size (default: 1/(kappa*||H||))");
    cli.iters_opt = cmd->add_option("--max-iters", cli.job.hp.max_iters,
                                    "Iteration cap per image");
    cli.color_opt = cmd->add_option("--color", cli.color, "Color handling: auto|gray|rgb")
                        ->check(CLI::IsMember({"auto", "gray", "rgb"}));
    cli.format_opt = cmd->add_option("--format", cli.job.out_format, "Output format: png|pnm")
                         ->check(CLI::IsMember({"png", "pnm"}));
    cli.workers_opt = cmd->add_option("--workers", cli.job.workers,
                                      "Worker threads (0 = auto)");
    cli.report_opt = cmd->add_option("--report", cli.job.report_path,
                                     "Write a key=value job report");
    cmd->add_option("--config", cli.config_file,
                    "Config file with key=value lines (flags take precedence)");
}

// Plain key=value config; command-line flags take precedence over the file,
// the file over built-in defaults.
bool apply_config(JobCli& cli) {
    if (cli.config_file.empty()) return true;
    std::ifstream in(cli.config_file);
    if (!in) {
        std::cerr << "error: cannot read config file: " << cli.config_file << "\n";
        return false;
    }
    std::vector<double> config_levels;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: " << cli.config_file << ":" << lineno
                      << ": expected key=value\n";
            return false;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "level") {
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ','))
                    config_levels.push_back(std::stod(trim(item)));
            } else if (key == "kappa") {
                if (!cli.kappa_opt->count()) cli.job.hp.kappa = std::stod(value);
            } else if (key == "beta") {
                if (!cli.beta_opt->count()) cli.job.hp.beta = std::stod(value);
            } else if (key == "alpha") {
                if (!cli.alpha_opt->count()) cli.alpha = std::stod(value);
            } else if (key == "max-iters") {
                if (!cli.iters_opt->count()) cli.job.hp.max_iters = std::stoll(value);
            } else if (key == "color") {
                if (!cli.color_opt->count()) cli.color = value;
            } else if (key == "format") {
                if (!cli.format_opt->count()) cli.job.out_format = value;
            } else if (key == "workers") {
                if (!cli.workers_opt->count()) cli.job.workers = std::stoi(value);
            } else if (key == "report") {
                if (!cli.report_opt->count()) cli.job.report_path = value;
            } else {
                std::cerr << "error: " << cli.config_file << ":" << lineno
                          << ": unknown key '" << key << "'\n";
                return false;
            }
        } catch (const std::exception&) {
            std::cerr << "error: " << cli.config_file << ":" << lineno
                      << ": bad value for '" << key << "'\n";
            return false;
        }
    }
    if (!cli.level_opt->count() && !config_levels.empty())
        cli.job.levels = config_levels;
    if (cli.color != "auto" && cli.color != "gray" && cli.color != "rgb") {
        std::cerr << "error: config color must be auto|gray|rgb\n";
        return false;
    }
    if (cli.job.out_format != "png" && cli.job.out_format != "pnm") {
        std::cerr << "error: config format must be png|pnm\n";
        return false;
    }
    return true;
}

void finish_job(JobCli& cli) {
    if (cli.alpha > 0.0) {
        cli.job.hp.alpha = cli.alpha;
        cli.job.hp.alpha_mode = AlphaMode::Explicit;
    }
    if (cli.color == "gray")
        cli.job.color = ColorMode::Gray;
    else if (cli.color == "rgb")
        cli.job.color = ColorMode::Rgb;
    else
        cli.job.color = ColorMode::Auto;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "virolbi - inverse scale variational sparsification for images:\n"
        "smooth images toward a target sparsity level, emit snapshot paths,\n"
        "benchmark projection strategies, and analyze spectra."};
    app.require_subcommand(1);

    JobCli smooth_cli, path_cli;

    CLI::App* smooth = app.add_subcommand(
        "smooth", "Smooth image(s) to target sparsity level(s)");
    add_job_options(smooth, smooth_cli);

    CLI::App* path = app.add_subcommand(
        "path", "Emit the snapshot path (default levels 0.2..1.0)");
    add_job_options(path, path_cli);

    virolbi::batch::BenchSpec bench_spec;
    int bench_size = 0;
    CLI::App* bench = app.add_subcommand(
        "bench", "Time graph vs dense vs least-squares projection");
    bench->add_option("--size", bench_size, "Square image side length");
    bench->add_option("--height", bench_spec.height, "Image height");
    bench->add_option("--width", bench_spec.width, "Image width");
    bench->add_option("--iters", bench_spec.iters, "Iteration count");
    bench->add_option("--report", bench_spec.report_path, "Write report to file");

    virolbi::batch::SpectrumSpec spectrum_spec;
    CLI::App* spectrum = app.add_subcommand(
        "spectrum", "Expected spectral difference between two directories");
    spectrum->add_option("--originals", spectrum_spec.originals, "Original images")
        ->required();
    spectrum->add_option("--smoothed", spectrum_spec.smoothed, "Smoothed images")
        ->required();
    spectrum->add_option("-r,--radius", spectrum_spec.radius, "Cut-off radius");
    spectrum->add_option("-o,--out", spectrum_spec.out_dir, "Output directory")
        ->required();
    spectrum->add_option("--report", spectrum_spec.report_path, "Write report to file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (smooth->parsed()) {
            if (!apply_config(smooth_cli)) return 2;
            finish_job(smooth_cli);
            return virolbi::batch::cmd_smooth(smooth_cli.job);
        }
        if (path->parsed()) {
            if (!apply_config(path_cli)) return 2;
            finish_job(path_cli);
            return virolbi::batch::cmd_path(path_cli.job);
        }
        if (bench->parsed()) {
            if (bench_size > 0) {
                bench_spec.height = bench_size;
                bench_spec.width = bench_size;
            }
            return virolbi::batch::cmd_bench(bench_spec);
        }
        if (spectrum->parsed()) return virolbi::batch::cmd_spectrum(spectrum_spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
