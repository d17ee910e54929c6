// SPDX-License-Identifier: Apache-2.0
//
// Per-CPI latency of frame extraction.
//
// Protocol: build the canonical scene on the default grid with random clock
// impairment at 20 dB SNR, run SRCC once, then time extract_frame on that
// CPI. `warmup` untimed calls precede the timed ones. With include_srcc the
// SRCC step is inside the timed region. Parallel mode times extract_tensor
// over `parallel_cpis` copies of the CPI and reports wall time per CPI.

#pragma once

#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

#include "csi_sim.hpp"
#include "extractor.hpp"
#include "metrics.hpp"
#include "srcc.hpp"

namespace bisense {

struct BenchOptions {
    std::size_t repetitions = 100;
    std::size_t warmup = 5;
    bool include_srcc = false;
    unsigned parallel_threads = 0; ///< 0 = single-stream mode
    std::size_t parallel_cpis = 64;
    std::uint64_t seed = 1;
};

inline CsiFrame bench_cpi(const ExtractorConfig& config, std::uint64_t seed) {
    PathScene scene = canonical_scene(SubcarrierGrid::wifi_default(config.cpi_length));
    scene.impairment = random_impairment(config.cpi_length, 50e-9, seed + 1);
    scene.impairment.noise_power = noise_power_for_snr(scene, 20.0);
    return generate_csi(scene, seed);
}

inline LatencyStats bench_pipeline(const ExtractorConfig& config, const BenchOptions& options) {
    using clock = std::chrono::steady_clock;
    detail::require(options.repetitions >= 10, ErrorCode::invalid_argument,
                    "benchmark needs at least 10 repetitions");
    const CsiFrame cpi = bench_cpi(config, options.seed);
    std::vector<double> samples;
    samples.reserve(options.repetitions);

    if (options.parallel_threads > 0) {
        ExtractorConfig par = config;
        par.threads = options.parallel_threads;
        const std::vector<CsiFrame> batch(options.parallel_cpis, cpi);
        for (std::size_t r = 0; r < options.warmup + options.repetitions; ++r) {
            const auto t0 = clock::now();
            [[maybe_unused]] const FeatureTensor t = extract_tensor(batch, par);
            const auto t1 = clock::now();
            if (r >= options.warmup) {
                samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count() /
                                  static_cast<double>(batch.size()));
            }
        }
        return LatencyStats::from_samples(std::move(samples));
    }

    const Reconstructor recon(cpi.grid, config.window);
    const DelayDopplerExtractor extractor(config, cpi.grid);
    const SrccMatrix pre = srcc(cpi, recon);
    for (std::size_t r = 0; r < options.warmup + options.repetitions; ++r) {
        const auto t0 = clock::now();
        [[maybe_unused]] const DelayDopplerFrame f =
            options.include_srcc ? extract_frame(srcc(cpi, recon), extractor.delay_grid(), config)
                                 : extract_frame(pre, extractor.delay_grid(), config);
        const auto t1 = clock::now();
        if (r >= options.warmup) {
            samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }
    return LatencyStats::from_samples(std::move(samples));
}

/// Mean latency for each delay-bin count, 1 m bins from 0 m.
inline std::vector<LatencyStats> bench_delay_scaling(ExtractorConfig config,
                                                     const std::vector<std::size_t>& delay_bins,
                                                     const BenchOptions& options) {
    std::vector<LatencyStats> out;
    for (std::size_t l : delay_bins) {
        config.delay_step_m = 1.0;
        config.delay_max_m = static_cast<double>(l);
        out.push_back(bench_pipeline(config, options));
    }
    return out;
}

} // namespace bisense
