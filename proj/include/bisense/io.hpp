// SPDX-License-Identifier: Apache-2.0
//
// On-disk formats. All multi-byte fields are little-endian.
//
// CSI file (.wcsi), version 1:
//   char[4]  "WCSI"
//   u16      version (1 = little-endian layout below)
//   u32      N subcarriers
//   u64      M symbols
//   f64      sample rate, Hz
//   f64      carrier, Hz
//   f64[N]   subcarrier frequencies, Hz
//   f32[2NM] samples as (re, im) pairs, subcarrier-major
//
// Delay-Doppler-time tensor file (.wddt):
//   char[4]  "WDDT"
//   u32      L_delay, L_doppler, L_cpi
//   f64[L_delay]    delay axis, meters (bistatic excess range)
//   f64[L_doppler]  Doppler axis, Hz
//   f64[L_cpi]      CPI start times, seconds
//   f32[...]        magnitudes, row-major over (delay, doppler, cpi)
//
// Spectrogram export: 16-bit binary PGM (P5, min-max normalized) or CSV whose
// first row holds the column axis and first column the row axis. Doppler-time
// maps are written with one row per CPI and one column per Doppler bin;
// delay-Doppler frames with one row per delay bin.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "csi_sim.hpp"
#include "extractor.hpp"

namespace bisense {

inline constexpr std::array<char, 4> kCsiMagic{'W', 'C', 'S', 'I'};
inline constexpr std::array<char, 4> kTensorMagic{'W', 'D', 'D', 'T'};
inline constexpr std::uint16_t kCsiVersion = 1;

struct CsiFileHeader {
    std::uint16_t version = kCsiVersion;
    std::uint32_t subcarriers = 0;
    std::uint64_t symbols = 0;
    double sample_rate = 0.0;
    double carrier = 0.0;
    std::vector<double> frequencies;

    [[nodiscard]] std::uint64_t header_bytes() const { return 4 + 2 + 4 + 8 + 8 + 8 + 8ull * subcarriers; }
    [[nodiscard]] std::uint64_t payload_bytes() const { return 8ull * subcarriers * symbols; }
};

namespace detail {

class ByteWriter {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_arithmetic_v<T>);
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        auto bits = std::bit_cast<U>(value);
        for (std::size_t b = 0; b < sizeof(T); ++b) {
            bytes_.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
        }
    }
    void put_magic(const std::array<char, 4>& magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }
    [[nodiscard]] const std::vector<char>& bytes() const { return bytes_; }

private:
    std::vector<char> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    template <typename T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        require(remaining() >= sizeof(T), ErrorCode::truncated_payload, "file ends early");
        U bits = 0;
        for (std::size_t b = 0; b < sizeof(T); ++b) {
            bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
        }
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }
    std::array<char, 4> get_magic() {
        require(remaining() >= 4, ErrorCode::bad_magic, "file too short for magic");
        std::array<char, 4> m{};
        std::memcpy(m.data(), bytes_.data() + pos_, 4);
        pos_ += 4;
        return m;
    }
    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void dump(const std::filesystem::path& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::io_error, "write failed for " + path.string());
}

} // namespace detail

inline void write_csi(const std::filesystem::path& path, const CsiFrame& frame) {
    frame.validate();
    detail::ByteWriter w;
    w.put_magic(kCsiMagic);
    w.put<std::uint16_t>(kCsiVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(frame.subcarriers()));
    w.put<std::uint64_t>(frame.symbols());
    w.put<double>(frame.grid.sample_rate());
    w.put<double>(frame.grid.carrier());
    for (double f : frame.grid.frequencies) {
        w.put<double>(f);
    }
    for (Eigen::Index i = 0; i < frame.samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < frame.samples.cols(); ++j) {
            w.put<float>(static_cast<float>(frame.samples(i, j).real()));
            w.put<float>(static_cast<float>(frame.samples(i, j).imag()));
        }
    }
    detail::dump(path, w.bytes());
}

namespace detail {

inline CsiFileHeader read_csi_header(ByteReader& r) {
    require(r.get_magic() == kCsiMagic, ErrorCode::bad_magic, "not a WCSI file");
    CsiFileHeader h;
    h.version = r.get<std::uint16_t>();
    require(h.version == kCsiVersion, ErrorCode::version_mismatch,
            "unsupported WCSI version " + std::to_string(h.version));
    h.subcarriers = r.get<std::uint32_t>();
    h.symbols = r.get<std::uint64_t>();
    h.sample_rate = r.get<double>();
    h.carrier = r.get<double>();
    require(r.remaining() >= 8ull * h.subcarriers, ErrorCode::truncated_payload,
            "header truncated");
    h.frequencies.resize(h.subcarriers);
    for (auto& f : h.frequencies) {
        f = r.get<double>();
    }
    return h;
}

} // namespace detail

inline CsiFileHeader read_csi_header(const std::filesystem::path& path) {
    detail::ByteReader r(detail::slurp(path));
    return detail::read_csi_header(r);
}

inline CsiFrame read_csi(const std::filesystem::path& path) {
    detail::ByteReader r(detail::slurp(path));
    const CsiFileHeader h = detail::read_csi_header(r);
    detail::require(r.remaining() >= h.payload_bytes(), ErrorCode::truncated_payload,
                    "payload shorter than N*M*8 bytes");
    detail::require(r.remaining() == h.payload_bytes(), ErrorCode::trailing_data,
                    "unexpected bytes after payload");
    CsiFrame frame;
    frame.grid.frequencies = h.frequencies;
    frame.grid.symbol_interval = 1.0 / h.sample_rate;
    frame.grid.num_symbols = h.symbols;
    frame.samples.resize(h.subcarriers, static_cast<Eigen::Index>(h.symbols));
    for (Eigen::Index i = 0; i < frame.samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < frame.samples.cols(); ++j) {
            const float re = r.get<float>();
            const float im = r.get<float>();
            frame.samples(i, j) = cplx(re, im);
        }
    }
    frame.validate();
    return frame;
}

inline void write_tensor(const std::filesystem::path& path, const FeatureTensor& t) {
    detail::ByteWriter w;
    w.put_magic(kTensorMagic);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.delay_bins()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.doppler_bins()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.cpis()));
    for (std::size_t d = 0; d < t.delay_bins(); ++d) {
        w.put<double>(t.grid.range_m(d));
    }
    for (double f : t.doppler_axis) {
        w.put<double>(f);
    }
    detail::require(t.cpi_times.size() == t.cpis(), ErrorCode::inconsistent_axes,
                    "CPI axis length does not match frame count");
    for (double c : t.cpi_times) {
        w.put<double>(c);
    }
    for (std::size_t d = 0; d < t.delay_bins(); ++d) {
        for (std::size_t f = 0; f < t.doppler_bins(); ++f) {
            for (std::size_t c = 0; c < t.cpis(); ++c) {
                w.put<float>(static_cast<float>(t.at(d, f, c)));
            }
        }
    }
    detail::dump(path, w.bytes());
}

inline FeatureTensor read_tensor(const std::filesystem::path& path) {
    detail::ByteReader r(detail::slurp(path));
    detail::require(r.get_magic() == kTensorMagic, ErrorCode::bad_magic, "not a WDDT file");
    const auto ld = r.get<std::uint32_t>();
    const auto lf = r.get<std::uint32_t>();
    const auto lc = r.get<std::uint32_t>();
    const std::uint64_t axes = 8ull * (ld + lf + lc);
    const std::uint64_t payload = 4ull * ld * lf * lc;
    detail::require(r.remaining() >= axes + payload, ErrorCode::truncated_payload,
                    "tensor file shorter than its dimensions");
    detail::require(r.remaining() == axes + payload, ErrorCode::trailing_data,
                    "unexpected bytes after tensor payload");
    std::vector<double> ranges(ld);
    for (auto& v : ranges) {
        v = r.get<double>();
    }
    FeatureTensor t;
    t.grid = DelayGrid::from_ranges(std::move(ranges));
    t.doppler_axis.resize(lf);
    for (auto& v : t.doppler_axis) {
        v = r.get<double>();
    }
    t.cpi_times.resize(lc);
    for (auto& v : t.cpi_times) {
        v = r.get<double>();
    }
    t.frames.assign(lc, RMatrix(ld, lf));
    for (std::size_t d = 0; d < ld; ++d) {
        for (std::size_t f = 0; f < lf; ++f) {
            for (std::size_t c = 0; c < lc; ++c) {
                t.at(d, f, c) = static_cast<double>(r.get<float>());
            }
        }
    }
    return t;
}

enum class SpectrogramFormat { pgm, csv };

inline SpectrogramFormat parse_spectrogram_format(const std::string& name) {
    if (name == "pgm") return SpectrogramFormat::pgm;
    if (name == "csv") return SpectrogramFormat::csv;
    throw Error(ErrorCode::invalid_argument, "unknown spectrogram format '" + name + "'");
}

/// Row/column-labeled real grid, as written by export_spectrogram.
struct LabeledGrid {
    RMatrix values;
    std::vector<double> row_axis;
    std::vector<double> col_axis;
};

inline LabeledGrid to_labeled(const DopplerTimeMap& map) {
    return {map.magnitudes.transpose(), map.cpi_times, map.doppler_axis};
}

inline LabeledGrid to_labeled(const DelayDopplerFrame& frame) {
    std::vector<double> rows(frame.grid.size());
    for (std::size_t d = 0; d < rows.size(); ++d) {
        rows[d] = frame.grid.range_m(d);
    }
    return {frame.magnitudes, std::move(rows), frame.doppler_axis};
}

inline void export_spectrogram(const LabeledGrid& grid, const std::filesystem::path& path,
                               SpectrogramFormat format) {
    detail::require((grid.values.array() >= 0.0).all(), ErrorCode::invalid_argument,
                    "spectrogram magnitudes must be nonnegative");
    if (format == SpectrogramFormat::pgm) {
        const double lo = grid.values.size() ? grid.values.minCoeff() : 0.0;
        const double hi = grid.values.size() ? grid.values.maxCoeff() : 0.0;
        std::ostringstream header;
        header << "P5\n" << grid.values.cols() << ' ' << grid.values.rows() << "\n65535\n";
        std::vector<char> bytes;
        const std::string h = header.str();
        bytes.insert(bytes.end(), h.begin(), h.end());
        for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
            for (Eigen::Index c = 0; c < grid.values.cols(); ++c) {
                const double v = hi > lo ? (grid.values(r, c) - lo) / (hi - lo) : 0.0;
                const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
                bytes.push_back(static_cast<char>(q >> 8)); // PGM samples are big-endian
                bytes.push_back(static_cast<char>(q & 0xFF));
            }
        }
        detail::dump(path, bytes);
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    detail::require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "axis";
    for (double c : grid.col_axis) {
        out << ',' << c;
    }
    out << '\n';
    for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
        out << grid.row_axis[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < grid.values.cols(); ++c) {
            out << ',' << grid.values(r, c);
        }
        out << '\n';
    }
}

inline void export_spectrogram(const DopplerTimeMap& map, const std::filesystem::path& path,
                               SpectrogramFormat format) {
    export_spectrogram(to_labeled(map), path, format);
}

inline void export_spectrogram(const DelayDopplerFrame& frame, const std::filesystem::path& path,
                               SpectrogramFormat format) {
    export_spectrogram(to_labeled(frame), path, format);
}

inline LabeledGrid read_spectrogram_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
    auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        return fields;
    };
    std::string line;
    detail::require(static_cast<bool>(std::getline(in, line)), ErrorCode::truncated_payload,
                    "empty CSV");
    LabeledGrid grid;
    const auto header = split(line);
    for (std::size_t c = 1; c < header.size(); ++c) {
        grid.col_axis.push_back(std::stod(header[c]));
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line);
        detail::require(fields.size() == grid.col_axis.size() + 1, ErrorCode::inconsistent_axes,
                        "CSV row width does not match header");
        grid.row_axis.push_back(std::stod(fields[0]));
        std::vector<double> row;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            row.push_back(std::stod(fields[c]));
        }
        rows.push_back(std::move(row));
    }
    grid.values.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(grid.col_axis.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            grid.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return grid;
}

} // namespace bisense
