// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Needs CLI11.hpp on the include path.
//
//   simulate --config scene.cfg --out a.wcsi [--seed S] [--set key=value]...
//   extract  --in a.wcsi --out a.wddt [--config cfg] [--set key=value]...
//            [--spectrogram map.pgm|map.csv]
//   baseline --method cacc|casr --config scene.cfg --out b.wddt [--plain-fft]
//   augment  --in a.wddt --out b.wddt --kind K [--magnitude X] [--seed S]
//   evaluate --in a.wddt --truth scene.cfg [--target k]
//   bench    [--reps N] [--warmup N] [--delay-bins L] [--include-srcc]
//            [--parallel T] [--scaling]
//
// Failures print one line to the error stream:
//   error: code=<ErrorCode> message=<text>

#pragma once

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "augment.hpp"
#include "baselines.hpp"
#include "bench.hpp"
#include "config.hpp"
#include "core.hpp"
#include "extractor.hpp"
#include "io.hpp"
#include "metrics.hpp"

namespace bisense {

namespace detail {

inline SceneConfig load_scene(const std::string& path, const std::vector<std::string>& overrides) {
    ConfigMap map = load_config(path);
    apply_overrides(map, overrides);
    return scene_from_config(map);
}

inline SpectrogramFormat format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return SpectrogramFormat::csv;
    if (ext == ".pgm") return SpectrogramFormat::pgm;
    throw Error(ErrorCode::invalid_argument, "spectrogram path must end in .pgm or .csv");
}

} // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bistatic delay-Doppler sensing toolkit", "bisense"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, spectrogram_path, truth_path, method, kind;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double magnitude = 0.0;
    bool plain_fft = false, include_srcc = false, scaling = false;
    std::size_t reps = 100, warmup = 5, delay_bins = 32, target = 0;
    unsigned parallel = 0;

    auto* sim = app.add_subcommand("simulate", "Generate a CSI capture from a scene file");
    sim->add_option("--config", config_path, "Scene file")->required();
    sim->add_option("--out", out_path, "Output .wcsi")->required();
    sim->add_option("--set", overrides, "key=value override");
    sim->add_option("--seed", seed, "Noise seed (overrides the file)")
        ->each([&](const std::string&) { seed_given = true; });

    auto* ext = app.add_subcommand("extract", "CSI capture to delay-Doppler-time tensor");
    ext->add_option("--in", in_path, "Input .wcsi")->required();
    ext->add_option("--out", out_path, "Output .wddt")->required();
    ext->add_option("--config", config_path, "Extractor settings");
    ext->add_option("--set", overrides, "key=value override");
    ext->add_option("--spectrogram", spectrogram_path, "Doppler-time map (.pgm or .csv)");

    auto* base = app.add_subcommand("baseline", "Two-antenna baseline on a simulated scene");
    base->add_option("--method", method, "cacc or casr")->required()->check(CLI::IsMember({"cacc", "casr"}));
    base->add_option("--config", config_path, "Scene file")->required();
    base->add_option("--out", out_path, "Output .wddt")->required();
    base->add_option("--set", overrides, "key=value override");
    base->add_flag("--plain-fft", plain_fft, "Delay matched filter instead of MVDR");

    auto* aug = app.add_subcommand("augment", "Augment a tensor file");
    aug->add_option("--in", in_path, "Input .wddt")->required();
    aug->add_option("--out", out_path, "Output .wddt")->required();
    aug->add_option("--kind", kind, "translate|affine_scale|mirror|time_shift|noise")->required();
    aug->add_option("--magnitude", magnitude, "Kind-specific amount");
    aug->add_option("--seed", seed, "Noise seed");

    auto* eval = app.add_subcommand("evaluate", "Score a tensor against scene ground truth");
    eval->add_option("--in", in_path, "Input .wddt")->required();
    eval->add_option("--truth", truth_path, "Scene file")->required();
    eval->add_option("--set", overrides, "key=value override");
    eval->add_option("--target", target, "Index of the dynamic path to score");

    auto* bench = app.add_subcommand("bench", "Per-CPI extraction latency");
    bench->add_option("--reps", reps, "Timed repetitions (>= 10)");
    bench->add_option("--warmup", warmup, "Untimed repetitions");
    bench->add_option("--delay-bins", delay_bins, "Delay bins (1 m each)");
    bench->add_flag("--include-srcc", include_srcc, "Time SRCC as well");
    bench->add_option("--parallel", parallel, "Worker threads for the parallel mode (0 = off)");
    bench->add_flag("--scaling", scaling, "Report latency for 8, 16, 32, 64 delay bins");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: code=" << to_string(ErrorCode::invalid_argument) << " message=" << e.what()
            << '\n';
        return 2;
    }

    try {
        out << std::setprecision(10);
        if (sim->parsed()) {
            if (seed_given) {
                overrides.push_back("seed=" + std::to_string(seed));
            }
            const SceneConfig cfg = detail::load_scene(config_path, overrides);
            write_csi(out_path, generate_csi(cfg.scene, cfg.seed));
            out << "wrote " << out_path << " subcarriers=" << cfg.scene.grid.size()
                << " symbols=" << cfg.scene.grid.num_symbols << '\n';
        } else if (ext->parsed()) {
            ConfigMap map = config_path.empty() ? ConfigMap{} : load_config(config_path);
            apply_overrides(map, overrides);
            const ExtractorConfig config = extractor_from_config(map);
            const FeatureTensor tensor = extract_stream(read_csi(in_path), config);
            write_tensor(out_path, tensor);
            if (!spectrogram_path.empty()) {
                export_spectrogram(compress_delay(tensor), spectrogram_path,
                                   detail::format_from_extension(spectrogram_path));
            }
            out << "wrote " << out_path << " delay=" << tensor.delay_bins()
                << " doppler=" << tensor.doppler_bins() << " cpis=" << tensor.cpis() << '\n';
        } else if (base->parsed()) {
            const SceneConfig cfg = detail::load_scene(config_path, overrides);
            ExtractorConfig config = cfg.extractor;
            if (plain_fft) {
                config.beamformer = BeamformerKind::matched;
            }
            const SrccMatrix product =
                baseline_product(simulate_ula_pair(cfg.scene, cfg.seed), parse_baseline_method(method));
            const FeatureTensor tensor =
                extract_tensor(split_cpis(product, config.cpi_length, config.cpi_stride), config);
            write_tensor(out_path, tensor);
            out << "wrote " << out_path << " method=" << method << " cpis=" << tensor.cpis() << '\n';
        } else if (aug->parsed()) {
            const AugmentationSpec spec{parse_augment_kind(kind), magnitude, seed};
            write_tensor(out_path, augment(read_tensor(in_path), spec));
            out << "wrote " << out_path << " kind=" << kind << '\n';
        } else if (eval->parsed()) {
            const SceneConfig cfg = detail::load_scene(truth_path, overrides);
            detail::require(target < cfg.truth.size(), ErrorCode::index_out_of_range,
                            "scene has " + std::to_string(cfg.truth.size()) + " dynamic paths");
            evaluate(read_tensor(in_path), cfg.truth[target], cfg.extractor.dc_exclusion_bins)
                .write(out);
        } else if (bench->parsed()) {
            ExtractorConfig config;
            config.delay_max_m = static_cast<double>(delay_bins);
            BenchOptions options;
            options.repetitions = reps;
            options.warmup = warmup;
            options.include_srcc = include_srcc;
            const auto report = [&](const char* mode, std::size_t bins, const LatencyStats& s) {
                out << "mode=" << mode << " delay_bins=" << bins << " reps=" << s.samples_ms.size()
                    << " mean_ms=" << s.mean_ms << " stddev_ms=" << s.stddev_ms << '\n';
            };
            if (scaling) {
                const std::vector<std::size_t> bins{8, 16, 32, 64};
                const auto stats = bench_delay_scaling(config, bins, options);
                for (std::size_t i = 0; i < bins.size(); ++i) {
                    report("single", bins[i], stats[i]);
                }
            } else {
                report("single", delay_bins, bench_pipeline(config, options));
            }
            if (parallel > 0) {
                options.parallel_threads = parallel;
                report("parallel", delay_bins, bench_pipeline(config, options));
            }
        }
    } catch (const Error& e) {
        err << "error: code=" << to_string(e.code()) << " message=" << e.message() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: code=" << to_string(ErrorCode::io_error) << " message=" << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace bisense
