// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"

using namespace bisense;
using Catch::Approx;

namespace {

PathScene two_path_scene(std::size_t m = 128) {
    PathScene s;
    s.grid = SubcarrierGrid::wifi_default(m);
    s.static_paths = {{{1.0, 0.2}, 0.0}, {{0.4, -0.3}, 5.0 / oracle::c}};
    s.dynamic_paths = {{std::polar(0.3, 1.1), 8.0 / oracle::c, 40.0}};
    s.impairment = ClockImpairment::none(m);
    return s;
}

} // namespace

TEST_CASE("unit static path with no impairment gives all ones") {
    PathScene s;
    s.grid = SubcarrierGrid::wifi_default(16);
    s.static_paths = {{{1.0, 0.0}, 0.0}};
    s.impairment = ClockImpairment::none(16);
    const CsiFrame f = generate_csi(s, 0);
    REQUIRE(f.samples.rows() == 30);
    REQUIRE(f.samples.cols() == 16);
    for (Eigen::Index i = 0; i < f.samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < f.samples.cols(); ++j) {
            CHECK(f.samples(i, j) == cplx(1.0, 0.0));
        }
    }
}

TEST_CASE("default grid produces a 30 x 128 frame") {
    const CsiFrame f = generate_csi(two_path_scene(), 1);
    CHECK(f.subcarriers() == 30);
    CHECK(f.symbols() == 128);
    CHECK(f.grid.sample_rate() == Approx(1000.0));
}

TEST_CASE("generated frame matches the term-by-term channel sum") {
    PathScene s = two_path_scene();
    s.impairment = random_impairment(128, 80e-9, 5);
    const CsiFrame f = generate_csi(s, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
        for (std::size_t j = 0; j < 128; ++j) {
            worst = std::max(worst, std::abs(f.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                             oracle::channel(s, i, j)));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("dynamic phase advances 2 pi f_D dt per symbol") {
    PathScene s;
    s.grid = SubcarrierGrid::wifi_default(32);
    s.dynamic_paths = {{{1.0, 0.0}, 3.0 / oracle::c, 50.0}};
    s.static_paths = {{{1e-9, 0.0}, 0.0}};
    s.impairment = ClockImpairment::none(32);
    const CsiFrame f = generate_csi(s, 0);
    for (Eigen::Index j = 1; j < 32; ++j) {
        const double step = std::arg(f.samples(7, j) * std::conj(f.samples(7, j - 1)));
        CHECK(step == Approx(-2.0 * oracle::pi * 50.0 * 1e-3).margin(1e-7));
    }
}

TEST_CASE("Doppler at or beyond Nyquist is rejected") {
    PathScene s = two_path_scene();
    s.dynamic_paths[0].doppler = 500.0;
    try {
        (void)generate_csi(s, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::doppler_beyond_nyquist);
    }
}

TEST_CASE("impairment length mismatch is rejected") {
    PathScene s = two_path_scene();
    s.impairment.cfo_phases.pop_back();
    try {
        (void)generate_csi(s, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::dimension_mismatch);
    }
}

TEST_CASE("random impairment contracts") {
    SECTION("zero scale gives zero offsets") {
        const auto imp = random_impairment(64, 0.0, 3);
        for (double t : imp.timing_offsets) {
            CHECK(t == 0.0);
        }
    }
    SECTION("deterministic per seed") {
        const auto a = random_impairment(64, 1e-7, 9);
        const auto b = random_impairment(64, 1e-7, 9);
        CHECK(a.timing_offsets == b.timing_offsets);
        CHECK(a.cfo_phases == b.cfo_phases);
        CHECK(a.hardware_phase == b.hardware_phase);
    }
    SECTION("uniform offsets have mean scale/2 within 3 standard errors") {
        const double scale = 100e-9;
        const auto imp = random_impairment(128, scale, 21);
        REQUIRE(imp.timing_offsets.size() == 128);
        double mean = 0.0;
        for (double t : imp.timing_offsets) {
            mean += t;
        }
        mean /= 128.0;
        const double se = scale / std::sqrt(12.0) / std::sqrt(128.0);
        CHECK(std::abs(mean - 50e-9) < 3.0 * se);
    }
}

TEST_CASE("superposition of path sets without impairment") {
    PathScene a = two_path_scene();
    PathScene b = a;
    a.dynamic_paths.clear();
    b.static_paths = {{{0.7, 0.5}, 11.0 / oracle::c}};
    PathScene both = two_path_scene();
    both.static_paths.push_back(b.static_paths[0]);
    const CMatrix sum = generate_csi(a, 0).samples + generate_csi(b, 0).samples;
    CHECK((generate_csi(both, 0).samples - sum).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("impairment leaves magnitudes unchanged") {
    PathScene s = two_path_scene();
    const CMatrix clean = generate_csi(s, 0).samples;
    s.impairment = random_impairment(128, 1e-6, 77);
    const CMatrix dirty = generate_csi(s, 0).samples;
    CHECK((clean.cwiseAbs() - dirty.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("same scene and seed give bit-identical frames") {
    PathScene s = two_path_scene();
    s.impairment = random_impairment(128, 5e-8, 4);
    s.impairment.noise_power = 0.01;
    CHECK(generate_csi(s, 99).samples == generate_csi(s, 99).samples);
    CHECK(generate_csi(s, 99).samples != generate_csi(s, 100).samples);
}

TEST_CASE("noise power matches the requested SNR") {
    PathScene s = two_path_scene(4096);
    s.impairment.noise_power = noise_power_for_snr(s, 10.0);
    CHECK(s.impairment.noise_power == Approx(mean_signal_power(s) / 10.0));
    const CMatrix noise = generate_csi(s, 5).samples - generate_csi(two_path_scene(4096), 0).samples;
    const double measured = noise.squaredNorm() / static_cast<double>(noise.size());
    CHECK(measured == Approx(s.impairment.noise_power).epsilon(0.03));
}

TEST_CASE("non-uniform subcarrier grids are accepted") {
    PathScene s = two_path_scene();
    s.grid.frequencies[3] += 1e3;
    const CsiFrame f = generate_csi(s, 0);
    CHECK(std::abs(f.samples(3, 5) - oracle::channel(s, 3, 5)) < 1e-9);
    s.grid.frequencies[4] = s.grid.frequencies[3];
    CHECK_THROWS_AS(generate_csi(s, 0), Error);
}

TEST_CASE("CPI splitting") {
    const CsiFrame f = generate_csi(two_path_scene(512), 0);
    const auto cpis = split_cpis(f, 128, 32);
    CHECK(cpis.size() == 13);
    CHECK(cpis[2].samples == f.samples.middleCols(64, 128));
    CHECK(cpis[2].grid.num_symbols == 128);
}

TEST_CASE("bistatic excess range") {
    BistaticGeometry g{{0, 0}, {4, 0}, {2, 2}, {0, 1}};
    CHECK(bistatic_excess_range(g) ==
          Approx(oracle::distance({0, 0}, {2, 2}) + oracle::distance({2, 2}, {4, 0}) - 4.0));
    CHECK(bistatic_excess_range(g) == Approx(2.0 * std::sqrt(8.0) - 4.0).margin(1e-12));
    g.target = {1.0, 0.0};
    CHECK(bistatic_excess_range(g) == Approx(0.0).margin(1e-12));
    g.target = {2.0, 1e-4};
    CHECK(std::abs(bistatic_excess_range(g)) < 1e-7);
    g.target = g.tx;
    CHECK_THROWS_AS(bistatic_excess_range(g), Error);
}
