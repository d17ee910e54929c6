// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "bisense/cli.hpp"
#include "oracles.hpp"

using namespace bisense;
namespace fs = std::filesystem;

namespace {

// Tolerances and trial counts.
constexpr int kAc1Scenes = 100;
constexpr double kAc1RelTol = 1e-9;
constexpr double kAc1MaxSeconds = 10.0;
constexpr int kAc2Trials = 200;
constexpr double kAc2MinRate = 0.95;
constexpr double kAc3MinSrccDb = 10.0;
constexpr double kAc3MaxCaccDb = 3.0;
constexpr int kAc4Covariances = 50;
constexpr double kAc4Distortionless = 1e-9;
constexpr double kAc4Hermitian = 1e-10;
constexpr int kAc5Realizations = 10'000;
constexpr double kAc5MinRatio = 0.8;
constexpr double kAc6Tol = 0.01;
constexpr double kAc7MaxMeanMs = 10.0;
constexpr double kAc7MaxExponent = 2.0;
constexpr int kAc8Seeds = 100;
constexpr double kAc8MinRate = 0.90;
constexpr double kSnrDb = 20.0;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

PathScene scene_with(std::size_t m, std::vector<DynamicPath> targets) {
    PathScene s;
    s.grid = SubcarrierGrid::wifi_default(m);
    s.static_paths = {{{1.0, 0.0}, 0.0}};
    s.dynamic_paths = std::move(targets);
    s.impairment = ClockImpairment::none(m);
    return s;
}

void impair(PathScene& s, std::uint64_t seed, double snr_db) {
    s.impairment = random_impairment(s.grid.num_symbols, 50e-9, seed);
    s.impairment.noise_power = noise_power_for_snr(s, snr_db);
}

long nearest_index(double value, const std::vector<double>& axis) {
    long best = 0;
    for (std::size_t k = 1; k < axis.size(); ++k) {
        if (std::abs(axis[k] - value) < std::abs(axis[static_cast<std::size_t>(best)] - value)) {
            best = static_cast<long>(k);
        }
    }
    return best;
}

Outcome ac1_invariance() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const WindowSpec spec;
    double worst = 0.0;
    for (int trial = 0; trial < kAc1Scenes; ++trial) {
        PathScene s = scene_with(128, {});
        s.static_paths = {{std::polar(1.0, kTwoPi * u(rng)), 0.0},
                          {std::polar(0.6 * u(rng), kTwoPi * u(rng)), 25.0 * u(rng) / oracle::c}};
        const int targets = 1 + static_cast<int>(3.0 * u(rng));
        for (int k = 0; k < targets; ++k) {
            s.dynamic_paths.push_back({std::polar(0.4 * u(rng), kTwoPi * u(rng)), 32.0 * u(rng) / oracle::c,
                                       -300.0 + 600.0 * u(rng)});
        }
        const SrccMatrix clean = srcc(generate_csi(s, 0), spec);
        s.impairment = random_impairment(128, 50e-9, static_cast<std::uint64_t>(trial) + 1);
        const SrccMatrix dirty = srcc(generate_csi(s, 0), spec);
        for (Eigen::Index i = 0; i < clean.values.size(); ++i) {
            const double ref = std::abs(clean.values(i));
            const double err = std::abs(dirty.values(i) - clean.values(i));
            worst = std::max(worst, ref > 0.0 ? err / ref : err);
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < kAc1RelTol && seconds < kAc1MaxSeconds,
            fmt("max entrywise relative error %.3g (tol %.0e), %.2f s for %d scenes (limit %.0f s)", worst,
                kAc1RelTol, seconds, kAc1Scenes, kAc1MaxSeconds)};
}

Outcome ac2_single_target() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> range(2.0, 30.0);
    std::uniform_real_distribution<double> speed(16.0, 150.0);
    std::bernoulli_distribution sign(0.5);
    const ExtractorConfig config;
    const DelayGrid grid = config.delay_grid();
    int hits = 0;
    for (int trial = 0; trial < kAc2Trials; ++trial) {
        const double r = range(rng);
        const double f = sign(rng) ? speed(rng) : -speed(rng);
        PathScene s = scene_with(128, {{std::polar(0.3, 0.0), r / oracle::c, f}});
        impair(s, static_cast<std::uint64_t>(trial) + 1000, kSnrDb);
        const auto frame = extract_frame(srcc(generate_csi(s, static_cast<std::uint64_t>(trial)), config.window),
                                         grid, config);
        const PeakEstimate peak = estimate_peak(frame, config.dc_exclusion_bins);
        const long d_err = static_cast<long>(peak.delay_bin) - nearest_index(r, grid.ranges_m);
        const long f_err = static_cast<long>(peak.doppler_bin) - nearest_index(f, frame.doppler_axis);
        hits += (std::abs(d_err) <= 1 && std::abs(f_err) <= 1) ? 1 : 0;
    }
    const double rate = static_cast<double>(hits) / kAc2Trials;
    return {rate >= kAc2MinRate,
            fmt("%d/%d trials within 1 delay bin and 1 Doppler bin (%.1f%%, need %.0f%%)", hits, kAc2Trials,
                100.0 * rate, 100.0 * kAc2MinRate)};
}

Outcome ac3_mirror() {
    PathScene s = canonical_scene(SubcarrierGrid::wifi_default(128));
    impair(s, 303, kSnrDb);
    const ExtractorConfig config;
    const auto frame = extract_frame(srcc(generate_csi(s, 3), config.window), config.delay_grid(), config);
    const double srcc_db = mirror_ratio(frame.magnitudes.row(8).transpose(), frame.doppler_axis, 40.0);

    PathScene pair_scene = canonical_scene(SubcarrierGrid::wifi_default(128));
    impair(pair_scene, 304, kSnrDb);
    const DopplerSpectrum profile = subcarrier_doppler_profile(cacc(simulate_ula_pair(pair_scene, 5)), 150.0);
    const double cacc_db = mirror_ratio(profile.magnitudes, profile.axis, 40.0);
    return {srcc_db >= kAc3MinSrccDb && std::abs(cacc_db) <= kAc3MaxCaccDb,
            fmt("SRCC mirror ratio %.1f dB (need >= %.0f), CACC %.2f dB (need |.| <= %.0f)", srcc_db,
                kAc3MinSrccDb, cacc_db, kAc3MaxCaccDb)};
}

Outcome ac4_mvdr() {
    std::mt19937_64 rng(404);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto grid = SubcarrierGrid::wifi_default(128);
    const SteeringMatrix steering = steering_matrix(DelayGrid::from_range(32.0, 1.0), grid.frequencies);
    double worst_dist = 0.0;
    double worst_herm = 0.0;
    bool definite = true;
    for (int trial = 0; trial < kAc4Covariances; ++trial) {
        DynamicMatrix dyn;
        dyn.values.resize(30, 128);
        for (Eigen::Index i = 0; i < dyn.values.size(); ++i) {
            dyn.values(i) = cplx(g(rng), g(rng)) * (0.1 + static_cast<double>(trial) / kAc4Covariances);
        }
        const ObservationMatrix obs = build_observation(dyn);
        const auto cov = smoothed_covariance(obs, relative_epsilon(obs, 1e-3));
        worst_herm = std::max(worst_herm, (cov.values - cov.values.adjoint()).cwiseAbs().maxCoeff());
        const Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.values, Eigen::EigenvaluesOnly);
        definite = definite && eig.eigenvalues().minCoeff() > 0.0;
        const CMatrix w = MvdrSolver(cov).weights(steering.values);
        for (Eigen::Index l = 0; l < w.cols(); ++l) {
            worst_dist = std::max(worst_dist, std::abs(w.col(l).dot(steering.values.col(l)) - 1.0));
        }
    }
    return {worst_dist < kAc4Distortionless && worst_herm <= kAc4Hermitian && definite,
            fmt("max |w^H a - 1| %.3g (tol %.0e), max Hermitian residual %.3g (tol %.0e), positive definite: %s",
                worst_dist, kAc4Distortionless, worst_herm, kAc4Hermitian, definite ? "yes" : "no")};
}

Outcome ac5_crlb() {
    // One static path; each realization is one noisy symbol.
    constexpr std::size_t kSymbols = 100;
    const WindowSpec spec;
    std::string detail;
    bool pass = true;
    for (double snr : {10.0, 20.0, 30.0}) {
        PathScene s = scene_with(kSymbols, {});
        s.static_paths = {{std::polar(1.0, 0.7), 6.0 / oracle::c}};
        const CsiFrame clean = generate_csi(s, 0);
        const Reconstructor recon(clean.grid, spec);
        const CMatrix clean_recon = recon.reconstruct(clean.samples);
        const CirProfile cir = cir_from_symbol(clean, 0, spec);
        const double center = recon.center_for(clean.samples.col(0), cir.taps);
        s.impairment.noise_power = noise_power_for_snr(s, snr);
        const double bound = crlb_phase_bound(cir, gaussian_window(center, spec), s.impairment.noise_power);

        const auto n = static_cast<Eigen::Index>(clean.grid.size());
        RVector sum = RVector::Zero(n);
        RVector sum_sq = RVector::Zero(n);
        const int frames = kAc5Realizations / static_cast<int>(kSymbols);
        for (int k = 0; k < frames; ++k) {
            const CMatrix noisy = recon.reconstruct(generate_csi(s, static_cast<std::uint64_t>(k) + 1).samples);
            for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d = std::arg(noisy(i, j) * std::conj(clean_recon(i, j)));
                    sum(i) += d;
                    sum_sq(i) += d * d;
                }
            }
        }
        const double count = kAc5Realizations;
        const RVector var = (sum_sq - sum.cwiseAbs2() / count) / (count - 1.0);
        const double ratio = var.minCoeff() / bound;
        pass = pass && ratio >= kAc5MinRatio;
        detail += fmt("%g dB: min variance/bound %.2f; ", snr, ratio);
    }

    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PathScene multi = scene_with(2, {});
    multi.static_paths = {{{1.0, 0.0}, 0.0}, {std::polar(0.5, 1.0), 9.0 / oracle::c},
                          {std::polar(0.3, 2.5), 21.0 / oracle::c}};
    const CsiFrame f = generate_csi(multi, 0);
    const CirProfile cir = cir_from_symbol(f, 0, spec);
    const double center = Reconstructor(f.grid, spec).center_for(f.samples.col(0), cir.taps);
    bool monotone = true;
    double previous = std::numeric_limits<double>::infinity();
    for (double sigma : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
        WindowSpec w = spec;
        w.sigma = sigma;
        const double bound = crlb_phase_bound(cir, gaussian_window(center, w), 0.01);
        monotone = monotone && bound <= previous;
        previous = bound;
    }
    pass = pass && monotone;
    detail += fmt("bound monotone in sigma: %s (need >= %.1f at every SNR)", monotone ? "yes" : "no",
                  kAc5MinRatio);
    return {pass, detail};
}

Outcome ac6_velocity() {
    const auto v = [](Vec2 p, Vec2 vel) { return doppler_velocity({{0, 0}, {4, 0}, p, vel}); };
    const double a = v({2, 2}, {0, 1});
    const double b = v({3, 2}, {0, 1});
    const double c = v({2, 2}, {std::sqrt(0.5), std::sqrt(0.5)});
    const bool pass = std::abs(a - 1.41) <= kAc6Tol && std::abs(b - 1.45) <= kAc6Tol && std::abs(c - 1.00) <= kAc6Tol;
    return {pass, fmt("%.4f / %.4f / %.4f m/s vs 1.41 / 1.45 / 1.00 (tol %.2f)", a, b, c, kAc6Tol)};
}

Outcome ac7_latency() {
    BenchOptions options;
    options.repetitions = 100;
    options.warmup = 5;
    const ExtractorConfig config;
    const LatencyStats single = bench_pipeline(config, options);
    const std::vector<std::size_t> bins{8, 16, 32, 64};
    const auto scaling = bench_delay_scaling(config, bins, options);
    // least-squares slope of log(latency) against log(L)
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < bins.size(); ++k) {
        mx += std::log(static_cast<double>(bins[k]));
        my += std::log(scaling[k].mean_ms);
    }
    mx /= static_cast<double>(bins.size());
    my /= static_cast<double>(bins.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const double dx = std::log(static_cast<double>(bins[k])) - mx;
        sxy += dx * (std::log(scaling[k].mean_ms) - my);
        sxx += dx * dx;
    }
    const double exponent = sxy / sxx;
    return {single.mean_ms <= kAc7MaxMeanMs && exponent < kAc7MaxExponent,
            fmt("mean %.3f ms (limit %.0f), L=8/16/32/64: %.3f/%.3f/%.3f/%.3f ms, fitted exponent %.2f (need < %.0f)",
                single.mean_ms, kAc7MaxMeanMs, scaling[0].mean_ms, scaling[1].mean_ms, scaling[2].mean_ms,
                scaling[3].mean_ms, exponent, kAc7MaxExponent)};
}

bool is_local_max(const RMatrix& m, long r, long c) {
    for (long rr = std::max(r - 1, 0L); rr <= std::min(r + 1, static_cast<long>(m.rows()) - 1); ++rr) {
        for (long cc = std::max(c - 1, 0L); cc <= std::min(c + 1, static_cast<long>(m.cols()) - 1); ++cc) {
            if (m(rr, cc) > m(r, c)) {
                return false;
            }
        }
    }
    return true;
}

bool has_local_max_near(const RMatrix& m, long row, long col) {
    for (long r = std::max(row - 1, 0L); r <= std::min(row + 1, static_cast<long>(m.rows()) - 1); ++r) {
        for (long c = std::max(col - 1, 0L); c <= std::min(col + 1, static_cast<long>(m.cols()) - 1); ++c) {
            if (is_local_max(m, r, c)) {
                return true;
            }
        }
    }
    return false;
}

Outcome ac8_two_targets() {
    const ExtractorConfig config;
    const DelayGrid grid = config.delay_grid();
    int hits = 0;
    int exact = 0;
    for (int seed = 0; seed < kAc8Seeds; ++seed) {
        PathScene s = scene_with(128, {{std::polar(0.3, 0.0), 5.0 / oracle::c, 30.0},
                                       {std::polar(0.3, 1.0), 12.0 / oracle::c, -60.0}});
        impair(s, static_cast<std::uint64_t>(seed) + 800, kSnrDb);
        const auto frame =
            extract_frame(srcc(generate_csi(s, static_cast<std::uint64_t>(seed)), config.window), grid, config);
        bool near = true;
        bool strict = true;
        for (auto [range, hz] : {std::pair{5.0, 30.0}, std::pair{12.0, -60.0}}) {
            const long row = nearest_index(range, grid.ranges_m);
            const long col = nearest_index(hz, frame.doppler_axis);
            near = near && has_local_max_near(frame.magnitudes, row, col);
            strict = strict && is_local_max(frame.magnitudes, row, col);
        }
        hits += near ? 1 : 0;
        exact += strict ? 1 : 0;
    }
    const double rate = static_cast<double>(exact) / kAc8Seeds;
    return {rate >= kAc8MinRate,
            fmt("%d/%d seeds show both targets as local maxima in the true cells, need %.0f%% "
                "(%d/%d within 1 bin)",
                exact, kAc8Seeds, 100.0 * kAc8MinRate, hits, kAc8Seeds)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome ac9_formats() {
    const fs::path dir = fs::temp_directory_path() / ("bisense_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::vector<std::string> failures;
    const auto check = [&](bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    };
    const auto cli = [&](std::vector<std::string> args) {
        std::ostringstream out, err;
        return run_cli(args, out, err);
    };

    PathScene s = canonical_scene(SubcarrierGrid::wifi_default(256));
    impair(s, 909, kSnrDb);
    const CsiFrame frame = generate_csi(s, 9);
    write_csi(dir / "a.wcsi", frame);
    const CsiFrame back = read_csi(dir / "a.wcsi");
    check(back.samples == frame.samples.cast<std::complex<float>>().cast<cplx>(), "csi values");
    write_csi(dir / "b.wcsi", back);
    check(slurp(dir / "a.wcsi") == slurp(dir / "b.wcsi"), "csi bytes");

    const FeatureTensor t = extract_stream(frame, ExtractorConfig{});
    write_tensor(dir / "a.wddt", t);
    write_tensor(dir / "b.wddt", read_tensor(dir / "a.wddt"));
    check(slurp(dir / "a.wddt") == slurp(dir / "b.wddt"), "tensor bytes");

    const DopplerTimeMap map = compress_delay(t);
    export_spectrogram(map, dir / "m.csv", SpectrogramFormat::csv);
    const LabeledGrid g = read_spectrogram_csv(dir / "m.csv");
    check(g.values.rows() == static_cast<Eigen::Index>(t.cpis()) && g.values.cols() == 39, "csv shape");

    std::ofstream(dir / "scene.cfg") << "symbols = 256\nstatic.0 = 1, 0, 0\npath.0 = 0.3, 0, 8, 40\n"
                                        "random_impairment = true\nsnr_db = 20\nseed = 3\n";
    for (const char* run : {"1", "2"}) {
        const std::string tag = run;
        check(cli({"simulate", "--config", (dir / "scene.cfg").string(), "--out", (dir / ("s" + tag + ".wcsi")).string()}) == 0,
              "cli simulate");
        check(cli({"extract", "--in", (dir / ("s" + tag + ".wcsi")).string(), "--out",
                   (dir / ("s" + tag + ".wddt")).string(), "--spectrogram", (dir / ("s" + tag + ".pgm")).string()}) == 0,
              "cli extract");
    }
    check(slurp(dir / "s1.wcsi") == slurp(dir / "s2.wcsi"), "cli simulate determinism");
    check(slurp(dir / "s1.wddt") == slurp(dir / "s2.wddt"), "cli extract determinism");
    check(slurp(dir / "s1.pgm") == slurp(dir / "s2.pgm"), "cli spectrogram determinism");
    check(cli({"evaluate", "--in", (dir / "s1.wddt").string(), "--truth", (dir / "scene.cfg").string()}) == 0,
          "cli evaluate");
    fs::remove_all(dir);

    std::string detail = failures.empty() ? "csi, tensor and csv roundtrips plus CLI smoke are deterministic"
                                          : "failed:";
    for (const auto& f : failures) {
        detail += " " + f;
    }
    return {failures.empty(), detail};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 impairment invariance", ac1_invariance},
        {"AC2 single-target recovery", ac2_single_target},
        {"AC3 mirror suppression", ac3_mirror},
        {"AC4 MVDR contracts", ac4_mvdr},
        {"AC5 phase variance bound", ac5_crlb},
        {"AC6 Doppler velocity anchors", ac6_velocity},
        {"AC7 latency", ac7_latency},
        {"AC8 two-target separability", ac8_two_targets},
        {"AC9 formats and CLI", ac9_formats},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
