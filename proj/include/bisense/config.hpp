// SPDX-License-Identifier: Apache-2.0
//
// Plain-text scene/extractor configuration. One `key = value` per line, `#`
// starts a comment. Vector values are comma separated. Keys:
//
//   carrier_hz, bandwidth_hz, subcarriers, sample_rate_hz, symbols
//   tx, rx                        x, y (m); used by target.* entries
//   static.<k>                    amp, phase_rad, excess_m
//   path.<k>                      amp, phase_rad, excess_m, doppler_hz
//   target.<k>                    amp, phase_rad, x, y, vx, vy
//   random_impairment             true/false
//   timing_offset_scale_s         upper bound of the per-symbol timing offset
//   snr_db | noise_power          at most one of the two
//   seed                          noise seed; impairment uses seed + 1
//   sigma, ifft_size, window      window width (bins), delay FFT size, periodic|nearest_image
//   delay_max_m, delay_step_m, doppler_max_hz, epsilon_rel,
//   cpi_length, cpi_stride, dc_exclusion_bins, threads,
//   beamformer                    mvdr|matched
//
// Every path's delay is its bistatic excess range divided by c.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "csi_sim.hpp"
#include "extractor.hpp"
#include "geometry.hpp"

namespace bisense {

/// Ground truth for one moving reflector.
struct TruthTarget {
    double excess_m = 0.0;
    double doppler_hz = 0.0;
};

struct SceneConfig {
    PathScene scene;
    std::uint64_t seed = 0;
    ExtractorConfig extractor;
    std::vector<TruthTarget> truth; ///< one per dynamic path, same order
};

using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    require(ec == std::errc() && ptr == t.data() + t.size(), ErrorCode::invalid_config,
            "key '" + key + "': expected a number, got '" + t + "'");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    require(ec == std::errc() && ptr == t.data() + t.size(), ErrorCode::invalid_config,
            "key '" + key + "': expected a nonnegative integer, got '" + t + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw Error(ErrorCode::invalid_config, "key '" + key + "': expected true/false, got '" + t + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text,
                                      std::size_t expected) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, item));
    }
    require(out.size() == expected, ErrorCode::invalid_config,
            "key '" + key + "': expected " + std::to_string(expected) + " values, got " +
                std::to_string(out.size()));
    return out;
}

inline bool is_known_key(const std::string& key) {
    static const char* const scalars[] = {
        "carrier_hz", "bandwidth_hz", "subcarriers", "sample_rate_hz", "symbols", "tx", "rx",
        "random_impairment", "timing_offset_scale_s", "snr_db", "noise_power", "seed", "sigma",
        "ifft_size", "window", "delay_max_m", "delay_step_m", "doppler_max_hz", "epsilon_rel",
        "cpi_length", "cpi_stride", "dc_exclusion_bins", "threads", "beamformer"};
    for (const char* k : scalars) {
        if (key == k) {
            return true;
        }
    }
    for (const char* prefix : {"static.", "path.", "target."}) {
        const std::string p(prefix);
        if (key.size() > p.size() && key.compare(0, p.size(), p) == 0) {
            return true;
        }
    }
    return false;
}

} // namespace detail

/// Parses `key = value` lines. Unknown or repeated keys are rejected.
inline ConfigMap parse_config(const std::string& text) {
    ConfigMap map;
    std::stringstream in(text);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        detail::require(eq != std::string::npos, ErrorCode::invalid_config,
                        "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        detail::require(detail::is_known_key(key), ErrorCode::invalid_config,
                        "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        detail::require(map.emplace(key, value).second, ErrorCode::invalid_config,
                        "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return map;
}

inline ConfigMap load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Applies `key=value` overrides on top of a parsed file.
inline void apply_overrides(ConfigMap& map, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        detail::require(eq != std::string::npos, ErrorCode::invalid_config,
                        "override '" + item + "' is not key=value");
        const std::string key = detail::trim(item.substr(0, eq));
        detail::require(detail::is_known_key(key), ErrorCode::invalid_config,
                        "unknown key '" + key + "'");
        map[key] = detail::trim(item.substr(eq + 1));
    }
}

/// Extractor settings only; scene keys are ignored.
inline ExtractorConfig extractor_from_config(const ConfigMap& map) {
    ExtractorConfig c;
    auto num = [&](const char* key, auto& field) {
        if (const auto it = map.find(key); it != map.end()) {
            using T = std::decay_t<decltype(field)>;
            if constexpr (std::is_floating_point_v<T>) {
                field = detail::parse_double(key, it->second);
            } else {
                field = static_cast<T>(detail::parse_unsigned(key, it->second));
            }
        }
    };
    num("sigma", c.window.sigma);
    num("ifft_size", c.window.ifft_size);
    num("delay_max_m", c.delay_max_m);
    num("delay_step_m", c.delay_step_m);
    num("doppler_max_hz", c.doppler_max_hz);
    num("epsilon_rel", c.epsilon_rel);
    num("cpi_length", c.cpi_length);
    num("cpi_stride", c.cpi_stride);
    num("dc_exclusion_bins", c.dc_exclusion_bins);
    num("threads", c.threads);
    if (const auto it = map.find("window"); it != map.end()) {
        if (it->second == "periodic") {
            c.window.shape = WindowShape::periodic;
        } else if (it->second == "nearest_image") {
            c.window.shape = WindowShape::nearest_image;
        } else {
            throw Error(ErrorCode::invalid_config, "window must be periodic or nearest_image");
        }
    }
    if (const auto it = map.find("beamformer"); it != map.end()) {
        if (it->second == "mvdr") {
            c.beamformer = BeamformerKind::mvdr;
        } else if (it->second == "matched") {
            c.beamformer = BeamformerKind::matched;
        } else {
            throw Error(ErrorCode::invalid_config, "beamformer must be mvdr or matched");
        }
    }
    detail::require(c.threads >= 1, ErrorCode::invalid_config, "threads must be >= 1");
    return c;
}

inline SceneConfig scene_from_config(const ConfigMap& map) {
    auto get = [&](const char* key) -> std::optional<std::string> {
        const auto it = map.find(key);
        return it == map.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    auto number = [&](const char* key, double fallback) {
        const auto v = get(key);
        return v ? detail::parse_double(key, *v) : fallback;
    };

    SceneConfig cfg;
    cfg.extractor = extractor_from_config(map);
    const double carrier = number("carrier_hz", 5.32e9);
    const double bandwidth = number("bandwidth_hz", 20e6);
    const double rate = number("sample_rate_hz", 1000.0);
    const auto n = get("subcarriers") ? detail::parse_unsigned("subcarriers", *get("subcarriers")) : 30;
    const auto m = get("symbols") ? detail::parse_unsigned("symbols", *get("symbols")) : 128;
    detail::require(carrier > 0.0 && bandwidth > 0.0 && rate > 0.0, ErrorCode::invalid_config,
                    "carrier, bandwidth and sample rate must be positive");
    detail::require(n >= 2 && m >= 2, ErrorCode::invalid_config,
                    "need at least 2 subcarriers and 2 symbols");
    cfg.scene.grid = SubcarrierGrid::uniform(carrier, bandwidth, n, 1.0 / rate, m);

    Vec2 tx{0.0, 0.0};
    Vec2 rx{4.0, 0.0};
    if (const auto v = get("tx")) {
        const auto xy = detail::parse_list("tx", *v, 2);
        tx = {xy[0], xy[1]};
    }
    if (const auto v = get("rx")) {
        const auto xy = detail::parse_list("rx", *v, 2);
        rx = {xy[0], xy[1]};
    }

    // path.2 before path.10: order by key length, then lexically
    std::vector<std::pair<std::string, std::string>> entries(map.begin(), map.end());
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.first.size() != b.first.size() ? a.first.size() < b.first.size() : a.first < b.first;
    });
    for (const auto& [key, value] : entries) {
        if (key.rfind("static.", 0) == 0) {
            const auto v = detail::parse_list(key, value, 3);
            detail::require(v[2] >= 0.0, ErrorCode::invalid_config, key + ": excess range must be >= 0");
            cfg.scene.static_paths.push_back({std::polar(v[0], v[1]), v[2] / kSpeedOfLight});
        } else if (key.rfind("path.", 0) == 0) {
            const auto v = detail::parse_list(key, value, 4);
            detail::require(v[2] >= 0.0, ErrorCode::invalid_config, key + ": excess range must be >= 0");
            cfg.scene.dynamic_paths.push_back({std::polar(v[0], v[1]), v[2] / kSpeedOfLight, v[3]});
            cfg.truth.push_back({v[2], v[3]});
        } else if (key.rfind("target.", 0) == 0) {
            const auto v = detail::parse_list(key, value, 6);
            const BistaticGeometry g{tx, rx, {v[2], v[3]}, {v[4], v[5]}, carrier};
            const double excess = bistatic_excess_range(g);
            const double fd = doppler_frequency(g);
            cfg.scene.dynamic_paths.push_back({std::polar(v[0], v[1]), excess / kSpeedOfLight, fd});
            cfg.truth.push_back({excess, fd});
        }
    }
    if (cfg.scene.static_paths.empty()) {
        cfg.scene.static_paths.push_back({{1.0, 0.0}, 0.0}); // direct path
    }

    cfg.seed = get("seed") ? detail::parse_unsigned("seed", *get("seed")) : 0;
    const bool randomize = get("random_impairment") && detail::parse_bool("random_impairment", *get("random_impairment"));
    const double to_scale = number("timing_offset_scale_s", 50e-9);
    cfg.scene.impairment = randomize ? random_impairment(m, to_scale, cfg.seed + 1)
                                     : ClockImpairment::none(m);
    detail::require(!(get("snr_db") && get("noise_power")), ErrorCode::invalid_config,
                    "give snr_db or noise_power, not both");
    if (const auto v = get("snr_db")) {
        cfg.scene.impairment.noise_power = noise_power_for_snr(cfg.scene, detail::parse_double("snr_db", *v));
    } else {
        cfg.scene.impairment.noise_power = number("noise_power", 0.0);
    }
    try {
        cfg.scene.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_config, e.what());
    }
    return cfg;
}

} // namespace bisense
