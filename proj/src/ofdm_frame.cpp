#include "pnbound/ofdm_frame.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fft.hpp"
#include "pnbound/constants.hpp"
#include "pnbound/errors.hpp"

namespace pnbound {

using cd = std::complex<double>;

SymbolGrid::SymbolGrid(Eigen::MatrixXcd entries) : x_(std::move(entries)) {
    if (x_.rows() == 0 || x_.cols() == 0) throw DimensionError("empty symbol grid");
}

SymbolGrid SymbolGrid::qpsk(std::size_t num_subcarriers, std::size_t num_symbols,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double a = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd x(static_cast<Eigen::Index>(num_subcarriers),
                       static_cast<Eigen::Index>(num_symbols));
    for (Eigen::Index m = 0; m < x.cols(); ++m) {
        for (Eigen::Index n = 0; n < x.rows(); ++n) {
            const auto bits = rng();
            x(n, m) = cd((bits & 1u) ? a : -a, (bits & 2u) ? a : -a);
        }
    }
    return SymbolGrid(std::move(x));
}

bool SymbolGrid::unit_modulus(double tol) const {
    return ((x_.array().abs() - 1.0).abs() <= tol).all();
}

void SymbolGrid::check_matches(const OfdmConfig& cfg) const {
    if (rows() != cfg.num_subcarriers || cols() != cfg.num_symbols) {
        throw DimensionError("symbol grid is " + std::to_string(rows()) + "x" +
                             std::to_string(cols()) + " but the frame is " +
                             std::to_string(cfg.num_subcarriers) + "x" +
                             std::to_string(cfg.num_symbols));
    }
}

CVector delay_steering(const OfdmConfig& cfg, double delay_s) {
    const auto n = static_cast<Eigen::Index>(cfg.num_subcarriers);
    CVector b(n);
    for (Eigen::Index k = 0; k < n; ++k)
        b(k) = std::polar(1.0, -kTwoPi * static_cast<double>(k) * cfg.subcarrier_spacing_hz * delay_s);
    return b;
}

CVector doppler_steering(const OfdmConfig& cfg, double normalized_doppler) {
    const auto m = static_cast<Eigen::Index>(cfg.num_symbols);
    const double tsym = cfg.total_symbol_duration_s();
    CVector c(m);
    for (Eigen::Index k = 0; k < m; ++k)
        c(k) = std::polar(1.0, -kTwoPi * cfg.carrier_freq_hz * static_cast<double>(k) * tsym *
                                   normalized_doppler);
    return c;
}

namespace {

// Unitary inverse DFT down every column, then column-major vectorization.
CVector inverse_columns(Eigen::MatrixXcd grid) {
    const int n = static_cast<int>(grid.rows());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index m = 0; m < grid.cols(); ++m) detail::dft_inplace(grid.col(m).data(), n, +1);
    grid *= scale;
    return Eigen::Map<CVector>(grid.data(), grid.size());
}

// Phase-slope factors of d/dtau on b (per subcarrier) and d/dnu on conj(c) (per symbol).
CVector tau_slopes(const OfdmConfig& cfg) {
    CVector s(static_cast<Eigen::Index>(cfg.num_subcarriers));
    for (Eigen::Index n = 0; n < s.size(); ++n)
        s(n) = cd(0.0, -kTwoPi * static_cast<double>(n) * cfg.subcarrier_spacing_hz);
    return s;
}

CVector nu_slopes(const OfdmConfig& cfg) {
    CVector s(static_cast<Eigen::Index>(cfg.num_symbols));
    const double tsym = cfg.total_symbol_duration_s();
    for (Eigen::Index m = 0; m < s.size(); ++m)
        s(m) = cd(0.0, kTwoPi * cfg.carrier_freq_hz * static_cast<double>(m) * tsym);
    return s;
}

Eigen::MatrixXcd modulated_grid(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                double delay_s, double normalized_doppler) {
    symbols.check_matches(cfg);
    const CVector b = delay_steering(cfg, delay_s);
    const CVector c = doppler_steering(cfg, normalized_doppler);
    return symbols.entries().array() * (b * c.adjoint()).array();
}

// Scales the N-block of each symbol m by factor(m).
CVector scale_symbols(const CVector& v, const CVector& factor, std::size_t n) {
    CVector out(v.size());
    for (Eigen::Index m = 0; m < factor.size(); ++m) {
        const auto off = m * static_cast<Eigen::Index>(n);
        out.segment(off, static_cast<Eigen::Index>(n)) =
            v.segment(off, static_cast<Eigen::Index>(n)) * factor(m);
    }
    return out;
}

} // namespace

CVector synthesize_q(const OfdmConfig& cfg, const SymbolGrid& symbols, double delay_s,
                     double normalized_doppler) {
    return inverse_columns(modulated_grid(cfg, symbols, delay_s, normalized_doppler));
}

QDerivatives q_derivatives(const OfdmConfig& cfg, const SymbolGrid& symbols, double delay_s,
                           double normalized_doppler, int order) {
    if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
    const Eigen::MatrixXcd v = modulated_grid(cfg, symbols, delay_s, normalized_doppler);
    const CVector st = tau_slopes(cfg);
    const CVector sn = nu_slopes(cfg);
    const std::size_t n = cfg.num_subcarriers;

    QDerivatives d;
    d.order = order;
    d.q = inverse_columns(v);
    d.d_tau = inverse_columns(st.asDiagonal() * v);
    d.d_nu = scale_symbols(d.q, sn, n);
    if (order == 2) {
        d.d_tau_tau = inverse_columns(st.array().square().matrix().asDiagonal() * v);
        d.d_tau_nu = scale_symbols(d.d_tau, sn, n);
        d.d_nu_nu = scale_symbols(d.q, sn.array().square().matrix(), n);
    }
    return d;
}

void check_model_validity(const OfdmConfig& cfg, const TargetTruth& truth) {
    cfg.validate();
    truth.validate();
    if (truth.delay_s > cfg.cp_duration_s) {
        throw ModelValidityError("target delay " + std::to_string(truth.delay_s) +
                                 " s exceeds the cyclic prefix " +
                                 std::to_string(cfg.cp_duration_s) + " s");
    }
    if (std::abs(truth.normalized_doppler) >= 1.0 / static_cast<double>(cfg.num_subcarriers))
        throw ModelValidityError("normalized Doppler violates |nu| < 1/N");
    // fc T nu << 1: reject anything beyond a tenth of a cycle of intra-symbol Doppler.
    if (cfg.carrier_freq_hz * cfg.elementary_duration_s() * std::abs(truth.normalized_doppler) >=
        0.1)
        throw ModelValidityError("intra-symbol Doppler phase fc*T*|nu| must stay below 0.1");
}

CVector observation_mean(const OfdmConfig& cfg, const SymbolGrid& symbols,
                         const TargetTruth& truth, const PnRealization* pn) {
    CVector mu = truth.gain * synthesize_q(cfg, symbols, truth.delay_s, truth.normalized_doppler);
    if (pn) {
        if (static_cast<std::size_t>(pn->xi.size()) != cfg.frame_size())
            throw DimensionError("PN realization length does not match N*M");
        for (Eigen::Index k = 0; k < mu.size(); ++k) mu(k) *= std::polar(1.0, -pn->xi(k));
    }
    return mu;
}

CVector synthesize_observation(const OfdmConfig& cfg, const SymbolGrid& symbols,
                               const TargetTruth& truth, const NoiseModel& noise,
                               const PnRealization* pn, std::uint64_t rng_seed) {
    check_model_validity(cfg, truth);
    noise.validate();
    CVector y = observation_mean(cfg, symbols, truth, pn);
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> g(0.0, std::sqrt(noise.sigma_sq));
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const double re = g(rng);
        const double im = g(rng);
        y(k) += cd(re, im);
    }
    return y;
}

} // namespace pnbound
