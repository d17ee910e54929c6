// SPDX-License-Identifier: Apache-2.0
//
// Delay-Doppler feature extraction from an SRCC matrix:
//
//   static mean -> normalized dynamic component W -> observation [W | conj W]
//   -> forward-backward smoothed covariance -> MVDR weights per delay bin
//   -> beamformed slow-time sequence -> Doppler spectrum
//
// Frames from consecutive CPIs are stacked into a delay-Doppler-time tensor.

#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "core.hpp"
#include "csi_sim.hpp"
#include "doppler.hpp"
#include "srcc.hpp"

namespace bisense {

struct DynamicMatrix {
    CMatrix values;      ///< W, N x M
    CVector static_mean; ///< U, length N
};

struct ObservationMatrix {
    CMatrix values; ///< N x 2M, [W | conj(W)]

    [[nodiscard]] Eigen::Index symbols() const { return values.cols() / 2; }
    [[nodiscard]] auto original() const { return values.leftCols(symbols()); }
    [[nodiscard]] auto conjugate() const { return values.rightCols(symbols()); }
};

/// Relative delays (seconds) searched by the beamformer, with the meters view
/// kept alongside when the grid was specified in meters.
struct DelayGrid {
    std::vector<double> delays;
    std::vector<double> ranges_m;

    /// [0, max_m) in steps of step_m.
    static DelayGrid from_range(double max_m, double step_m) {
        detail::require(step_m > 0.0 && max_m > 0.0, ErrorCode::invalid_argument,
                        "delay range and step must be positive");
        std::vector<double> ranges;
        for (std::size_t l = 0;; ++l) {
            const double r = static_cast<double>(l) * step_m;
            if (r >= max_m * (1.0 - 1e-12)) {
                break;
            }
            ranges.push_back(r);
        }
        return from_ranges(std::move(ranges));
    }

    static DelayGrid from_ranges(std::vector<double> ranges) {
        DelayGrid g;
        g.delays.reserve(ranges.size());
        for (double r : ranges) {
            g.delays.push_back(r / kSpeedOfLight);
        }
        g.ranges_m = std::move(ranges);
        g.validate();
        return g;
    }

    [[nodiscard]] std::size_t size() const { return delays.size(); }

    [[nodiscard]] double range_m(std::size_t l) const {
        return ranges_m.empty() ? delays[l] * kSpeedOfLight : ranges_m[l];
    }

    void validate() const {
        detail::require(!delays.empty(), ErrorCode::invalid_argument, "delay grid is empty");
        detail::require(delays.front() >= 0.0, ErrorCode::invalid_argument,
                        "delay grid must be nonnegative");
        for (std::size_t l = 1; l < delays.size(); ++l) {
            detail::require(delays[l] > delays[l - 1], ErrorCode::invalid_argument,
                            "delay grid must be strictly increasing");
        }
    }

    friend bool operator==(const DelayGrid&, const DelayGrid&) = default;
};

struct SteeringMatrix {
    CMatrix values; ///< N x L
    DelayGrid grid;
};

struct SmoothedCovariance {
    CMatrix values; ///< N x N Hermitian
    double epsilon = 0.0;
};

struct DelayDopplerFrame {
    RMatrix magnitudes; ///< L_delay x L_doppler
    std::vector<double> doppler_axis;
    DelayGrid grid;
};

struct FeatureTensor {
    std::vector<RMatrix> frames; ///< one L_delay x L_doppler slice per CPI
    DelayGrid grid;
    std::vector<double> doppler_axis;
    std::vector<double> cpi_times; ///< start time of each CPI, seconds
    std::size_t cpi_stride = 0;    ///< symbols between CPI starts; 0 if unknown

    [[nodiscard]] std::size_t delay_bins() const { return grid.size(); }
    [[nodiscard]] std::size_t doppler_bins() const { return doppler_axis.size(); }
    [[nodiscard]] std::size_t cpis() const { return frames.size(); }
    [[nodiscard]] double at(std::size_t d, std::size_t f, std::size_t c) const {
        return frames[c](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(f));
    }
    [[nodiscard]] double& at(std::size_t d, std::size_t f, std::size_t c) {
        return frames[c](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(f));
    }
};

struct DopplerTimeMap {
    RMatrix magnitudes; ///< L_doppler x L_cpi
    std::vector<double> doppler_axis;
    std::vector<double> cpi_times;
};

enum class BeamformerKind {
    mvdr,
    matched, ///< plain delay matched filter (2D FFT equivalent), w = a / N
};

struct ExtractorConfig {
    WindowSpec window{};
    double delay_max_m = 32.0;
    double delay_step_m = 1.0;
    double doppler_max_hz = 150.0;
    double epsilon_rel = 1e-3; ///< epsilon = epsilon_rel * trace(R) / N
    std::size_t cpi_length = 128;
    std::size_t cpi_stride = 32;
    std::size_t dc_exclusion_bins = 2;
    unsigned threads = 1;
    BeamformerKind beamformer = BeamformerKind::mvdr;

    [[nodiscard]] DelayGrid delay_grid() const {
        return DelayGrid::from_range(delay_max_m, delay_step_m);
    }
};

// ---------------------------------------------------------------------------

/// Per-subcarrier mean over the symbols of the CPI.
inline CVector static_mean(const SrccMatrix& srcc) {
    detail::require(srcc.values.cols() >= 1, ErrorCode::invalid_argument, "need >= 1 symbol");
    return srcc.values.rowwise().mean();
}

/// W = (dCSI - U) / U with U the static mean.
inline DynamicMatrix dynamic_component(const SrccMatrix& srcc) {
    DynamicMatrix dyn;
    dyn.static_mean = static_mean(srcc);
    const double floor = 1e-12 * detail::rms(srcc.values);
    for (Eigen::Index i = 0; i < dyn.static_mean.size(); ++i) {
        detail::require(std::abs(dyn.static_mean(i)) > floor, ErrorCode::near_zero_static_mean,
                        "static mean on subcarrier " + std::to_string(i) + " is near zero");
    }
    dyn.values = (srcc.values.colwise() - dyn.static_mean).array().colwise() /
                 dyn.static_mean.array();
    return dyn;
}

inline ObservationMatrix build_observation(const DynamicMatrix& dyn) {
    ObservationMatrix obs;
    obs.values.resize(dyn.values.rows(), 2 * dyn.values.cols());
    obs.values << dyn.values, dyn.values.conjugate();
    return obs;
}

/// Column l holds exp(-i 2 pi f_n delay_l).
inline SteeringMatrix steering_matrix(const DelayGrid& grid, const std::vector<double>& frequencies) {
    grid.validate();
    SteeringMatrix s{CMatrix(static_cast<Eigen::Index>(frequencies.size()),
                             static_cast<Eigen::Index>(grid.size())),
                     grid};
    for (std::size_t l = 0; l < grid.size(); ++l) {
        for (std::size_t n = 0; n < frequencies.size(); ++n) {
            // reduce the phase in cycles first to keep precision at GHz carriers
            const double cycles = frequencies[n] * grid.delays[l];
            const double frac = cycles - std::floor(cycles);
            s.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)) =
                std::polar(1.0, -kTwoPi * frac);
        }
    }
    return s;
}

/// R + J R J + eps I with R = Lambda Lambda^H and J the exchange matrix.
inline SmoothedCovariance smoothed_covariance(const ObservationMatrix& obs, double epsilon) {
    detail::require(epsilon > 0.0, ErrorCode::invalid_argument, "epsilon must be > 0");
    CMatrix r = obs.values * obs.values.adjoint();
    CMatrix smoothed = r + r.reverse();
    smoothed = 0.5 * (smoothed + smoothed.adjoint()).eval();
    smoothed.diagonal().array() += epsilon;
    return {smoothed, epsilon};
}

/// Relative regularization: epsilon = rel * trace(Lambda Lambda^H) / N, or
/// `rel` itself when the observation carries no energy.
inline double relative_epsilon(const ObservationMatrix& obs, double rel) {
    detail::require(rel > 0.0, ErrorCode::invalid_argument, "relative epsilon must be > 0");
    const double trace = obs.values.squaredNorm();
    const double eps = rel * trace / static_cast<double>(obs.values.rows());
    return eps > 0.0 ? eps : rel;
}

/// Factorizes a smoothed covariance once and produces MVDR weights
/// w = R^-1 a / (a^H R^-1 a) for any number of steering vectors.
class MvdrSolver {
public:
    static constexpr double kMaxCondition = 1e12;

    explicit MvdrSolver(const SmoothedCovariance& cov) {
        const Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.values, Eigen::EigenvaluesOnly);
        detail::require(eig.info() == Eigen::Success, ErrorCode::ill_conditioned,
                        "eigen decomposition failed");
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        detail::require(lo > 0.0 && hi / lo <= kMaxCondition, ErrorCode::ill_conditioned,
                        "covariance condition number exceeds 1e12");
        llt_.compute(cov.values);
        detail::require(llt_.info() == Eigen::Success, ErrorCode::ill_conditioned,
                        "Cholesky factorization failed");
    }

    [[nodiscard]] CMatrix weights(const CMatrix& steering) const {
        CMatrix w = llt_.solve(steering);
        for (Eigen::Index l = 0; l < w.cols(); ++l) {
            const cplx denom = steering.col(l).dot(w.col(l)); // a^H R^-1 a
            w.col(l) /= denom;
        }
        return w;
    }

private:
    Eigen::LLT<CMatrix> llt_;
};

inline CVector mvdr_weights(const SmoothedCovariance& cov, const CVector& steering) {
    detail::require(cov.values.rows() == steering.size(), ErrorCode::dimension_mismatch,
                    "steering length must match covariance");
    return MvdrSolver(cov).weights(steering);
}

/// X = w^H Lambda_orig + w^H Lambda_conj, one value per symbol.
inline CVector beamform(const ObservationMatrix& obs, const CVector& w) {
    detail::require(obs.values.rows() == w.size(), ErrorCode::dimension_mismatch,
                    "weight length must match observation rows");
    return (w.adjoint() * obs.original()).transpose() + (w.adjoint() * obs.conjugate()).transpose();
}

/// Frame extractor with steering vectors and Doppler crop prepared once.
class DelayDopplerExtractor {
public:
    DelayDopplerExtractor(const ExtractorConfig& config, const SubcarrierGrid& grid)
        : DelayDopplerExtractor(config, grid, config.delay_grid()) {}

    DelayDopplerExtractor(const ExtractorConfig& config, const SubcarrierGrid& grid,
                          DelayGrid delays)
        : config_(config), grid_(grid), delays_(std::move(delays)),
          steering_(steering_matrix(delays_, grid.frequencies)),
          doppler_(grid.num_symbols, grid.sample_rate(), config.doppler_max_hz) {}

    [[nodiscard]] const DelayGrid& delay_grid() const { return delays_; }
    [[nodiscard]] const std::vector<double>& doppler_axis() const { return doppler_.axis(); }
    [[nodiscard]] const SteeringMatrix& steering() const { return steering_; }
    [[nodiscard]] const ExtractorConfig& config() const { return config_; }

    /// Beamformed slow-time sequences, one column per delay bin (M x L).
    [[nodiscard]] CMatrix beamformed(const SrccMatrix& srcc) const {
        const ObservationMatrix obs = build_observation(dynamic_component(srcc));
        CMatrix w;
        if (config_.beamformer == BeamformerKind::mvdr) {
            const auto cov = smoothed_covariance(obs, relative_epsilon(obs, config_.epsilon_rel));
            w = MvdrSolver(cov).weights(steering_.values);
        } else {
            w = steering_.values / static_cast<double>(steering_.values.rows());
        }
        // columns of X: w_l^H (orig + conj) for every delay l
        const CMatrix summed = obs.original() + obs.conjugate();
        return (w.adjoint() * summed).transpose();
    }

    [[nodiscard]] DelayDopplerFrame frame(const SrccMatrix& srcc) const {
        detail::require(srcc.values.rows() == static_cast<Eigen::Index>(grid_.size()) &&
                            srcc.values.cols() == static_cast<Eigen::Index>(doppler_.length()),
                        ErrorCode::dimension_mismatch, "SRCC matrix does not match extractor grid");
        const CMatrix x = beamformed(srcc);
        DelayDopplerFrame out;
        out.magnitudes.resize(x.cols(), static_cast<Eigen::Index>(doppler_.axis().size()));
        for (Eigen::Index l = 0; l < x.cols(); ++l) {
            out.magnitudes.row(l) = doppler_.magnitudes(x.col(l)).transpose();
        }
        out.doppler_axis = doppler_.axis();
        out.grid = delays_;
        return out;
    }

private:
    ExtractorConfig config_;
    SubcarrierGrid grid_;
    DelayGrid delays_;
    SteeringMatrix steering_;
    DopplerAnalyzer doppler_;
};

inline DelayDopplerFrame extract_frame(const SrccMatrix& srcc, const DelayGrid& grid,
                                       const ExtractorConfig& config) {
    grid.validate();
    return DelayDopplerExtractor(config, srcc.grid, grid).frame(srcc);
}

namespace detail {

// Fills tensor.frames[c] = extractor.frame(make(c)) for c in [0, count) on
// config.threads workers, keeping input order.
template <typename MakeSrcc>
FeatureTensor run_tensor(std::size_t count, const SubcarrierGrid& cpi_grid,
                         const ExtractorConfig& config, MakeSrcc make) {
    const DelayDopplerExtractor extractor(config, cpi_grid);
    FeatureTensor tensor;
    tensor.grid = extractor.delay_grid();
    tensor.doppler_axis = extractor.doppler_axis();
    tensor.cpi_stride = config.cpi_stride;
    tensor.frames.resize(count);
    tensor.cpi_times.resize(count);
    for (std::size_t c = 0; c < count; ++c) {
        tensor.cpi_times[c] = static_cast<double>(c * config.cpi_stride) * cpi_grid.symbol_interval;
    }
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            tensor.frames[c] = extractor.frame(make(c)).magnitudes;
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, count);
    if (workers == 1) {
        work(0, count);
    } else {
        std::vector<std::future<void>> jobs;
        const std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t begin = 0; begin < count; begin += chunk) {
            jobs.push_back(std::async(std::launch::async, work, begin, std::min(begin + chunk, count)));
        }
        for (auto& job : jobs) {
            job.get();
        }
    }
    return tensor;
}

inline void require_shared_grid(const SubcarrierGrid& a, std::size_t ma, const SubcarrierGrid& b,
                                std::size_t mb) {
    require(a.frequencies == b.frequencies && a.symbol_interval == b.symbol_interval && ma == mb,
            ErrorCode::inconsistent_axes, "CPIs do not share a grid");
}

} // namespace detail

/// Runs SRCC and frame extraction for every CPI and stacks the frames in
/// input order. CPIs are distributed over config.threads workers.
inline FeatureTensor extract_tensor(std::span<const CsiFrame> cpis, const ExtractorConfig& config) {
    detail::require(!cpis.empty(), ErrorCode::empty_input, "need at least one CPI");
    for (const auto& cpi : cpis) {
        detail::require_shared_grid(cpi.grid, cpi.symbols(), cpis.front().grid, cpis.front().symbols());
    }
    SubcarrierGrid cpi_grid = cpis.front().grid;
    cpi_grid.num_symbols = cpis.front().symbols();
    const Reconstructor recon(cpi_grid, config.window);
    return detail::run_tensor(cpis.size(), cpi_grid, config,
                              [&](std::size_t c) { return srcc(cpis[c], recon); });
}

/// Same as above for matrices that are already phase-cleaned (SRCC or a
/// multi-antenna baseline).
inline FeatureTensor extract_tensor(std::span<const SrccMatrix> cpis, const ExtractorConfig& config) {
    detail::require(!cpis.empty(), ErrorCode::empty_input, "need at least one CPI");
    const auto m = static_cast<std::size_t>(cpis.front().values.cols());
    for (const auto& cpi : cpis) {
        detail::require_shared_grid(cpi.grid, static_cast<std::size_t>(cpi.values.cols()),
                                    cpis.front().grid, m);
    }
    SubcarrierGrid cpi_grid = cpis.front().grid;
    cpi_grid.num_symbols = m;
    return detail::run_tensor(cpis.size(), cpi_grid, config,
                              [&](std::size_t c) -> const SrccMatrix& { return cpis[c]; });
}

/// Column blocks of `length` symbols advancing by `stride`.
inline std::vector<SrccMatrix> split_cpis(const SrccMatrix& m, std::size_t length, std::size_t stride) {
    detail::require(length >= 2 && stride >= 1, ErrorCode::invalid_argument,
                    "CPI length must be >= 2 and stride >= 1");
    detail::require(static_cast<std::size_t>(m.values.cols()) >= length, ErrorCode::invalid_argument,
                    "matrix shorter than one CPI");
    std::vector<SrccMatrix> out;
    for (std::size_t start = 0; start + length <= static_cast<std::size_t>(m.values.cols());
         start += stride) {
        SrccMatrix cpi{m.values.middleCols(static_cast<Eigen::Index>(start),
                                           static_cast<Eigen::Index>(length)),
                       m.grid};
        cpi.grid.num_symbols = length;
        out.push_back(std::move(cpi));
    }
    return out;
}

/// Splits a long capture with config.cpi_length / cpi_stride and extracts.
inline FeatureTensor extract_stream(const CsiFrame& capture, const ExtractorConfig& config) {
    const auto cpis = split_cpis(capture, config.cpi_length, config.cpi_stride);
    return extract_tensor(cpis, config);
}

/// Sums the tensor over its delay axis.
inline DopplerTimeMap compress_delay(const FeatureTensor& tensor) {
    DopplerTimeMap map;
    map.magnitudes.resize(static_cast<Eigen::Index>(tensor.doppler_bins()),
                          static_cast<Eigen::Index>(tensor.cpis()));
    for (std::size_t c = 0; c < tensor.cpis(); ++c) {
        map.magnitudes.col(static_cast<Eigen::Index>(c)) =
            tensor.frames[c].colwise().sum().transpose();
    }
    map.doppler_axis = tensor.doppler_axis;
    map.cpi_times = tensor.cpi_times;
    return map;
}

struct PeakEstimate {
    std::size_t delay_bin = 0;
    std::size_t doppler_bin = 0;
    double delay = 0.0;   ///< seconds
    double range_m = 0.0; ///< delay * c
    double doppler = 0.0; ///< Hz
    double magnitude = 0.0;
};

/// Strongest cell with |Doppler bin offset| > dc_exclusion_bins. Ties go to the
/// smaller delay, then the smaller |Doppler|.
inline PeakEstimate estimate_peak(const DelayDopplerFrame& frame, std::size_t dc_exclusion_bins) {
    const auto rows = frame.magnitudes.rows();
    const auto cols = frame.magnitudes.cols();
    detail::require(cols == static_cast<Eigen::Index>(frame.doppler_axis.size()) &&
                        rows == static_cast<Eigen::Index>(frame.grid.size()),
                    ErrorCode::dimension_mismatch, "frame axes do not match magnitudes");
    const auto center = static_cast<Eigen::Index>(doppler_center(frame.doppler_axis));
    const auto excl = static_cast<Eigen::Index>(dc_exclusion_bins);
    std::optional<PeakEstimate> best;
    bool searched = false;
    for (Eigen::Index d = 0; d < rows; ++d) {
        // visit Doppler bins in order of increasing |offset| so strict '>' keeps the tie rule
        for (Eigen::Index off = excl + 1; off <= std::max(center, cols - 1 - center); ++off) {
            for (const Eigen::Index k : {center + off, center - off}) {
                if (k < 0 || k >= cols) {
                    continue;
                }
                searched = true;
                const double v = frame.magnitudes(d, k);
                if (!best || v > best->magnitude) {
                    best = PeakEstimate{static_cast<std::size_t>(d),
                                        static_cast<std::size_t>(k),
                                        frame.grid.delays[static_cast<std::size_t>(d)],
                                        frame.grid.range_m(static_cast<std::size_t>(d)),
                                        frame.doppler_axis[static_cast<std::size_t>(k)],
                                        v};
                }
            }
        }
    }
    detail::require(searched, ErrorCode::empty_search_region,
                    "DC exclusion leaves no Doppler bins to search");
    detail::require(best->magnitude > 0.0, ErrorCode::empty_search_region,
                    "frame has no energy outside the DC band");
    return *best;
}

} // namespace bisense
