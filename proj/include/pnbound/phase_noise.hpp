#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pnbound/ofdm_config.hpp"
#include "pnbound/parallel.hpp"

namespace pnbound {

enum class OscillatorKind { Fro, Pll };

/// Free-running oscillator (Wiener phase) or PLL-stabilized oscillator
/// (stationary Gauss-Markov phase). floop_hz is ignored for FRO.
struct OscillatorModel {
    OscillatorKind kind = OscillatorKind::Fro;
    double f3db_hz = 100e3;
    double floop_hz = 1e6;

    static OscillatorModel fro(double f3db_hz) { return {OscillatorKind::Fro, f3db_hz, 0.0}; }
    static OscillatorModel pll(double f3db_hz, double floop_hz) {
        return {OscillatorKind::Pll, f3db_hz, floop_hz};
    }
    /// Both variance branches are linear in f3dB, so this scales sigma_xi^2 by `factor`.
    OscillatorModel with_variance_scaled(double factor) const;
    void validate() const;
};

const char* to_string(OscillatorKind kind);

/// Variance of the differential phase phi(t) - phi(t - lag).
double pn_variance(const OscillatorModel& osc, double lag_s);

/// d/dlag of pn_variance. Throws UndefinedDerivativeError at lag == 0.
double pn_variance_deriv(const OscillatorModel& osc, double lag_s);

/// Correlation of the differential PN process at time offset delta_t for target delay delay_s.
double pn_correlation(const OscillatorModel& osc, double delta_t_s, double delay_s);

/// Receiver sampling instants of the frame: entry i = n + mN sits at i*Ts + m*Tcp.
class SampleTimeGrid {
public:
    explicit SampleTimeGrid(const OfdmConfig& cfg);

    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times_s() const { return times_; }
    double time_s(std::size_t i) const { return times_[i]; }

    /// (i1 - i2) Ts + (m1 - m2) Tcp, evaluated from indices rather than by subtracting times.
    double delta_t(std::size_t i1, std::size_t i2) const;

    std::size_t num_subcarriers() const { return n_; }

private:
    std::size_t n_;
    double ts_;
    double tcp_;
    std::vector<double> times_;
};

struct JitterPolicy {
    bool enabled = true;
    std::array<double, 3> ladder{1e-12, 1e-10, 1e-8};
};

/// Delay-dependent covariance of the sampled differential PN vector.
struct PnCovariance {
    Eigen::MatrixXd matrix;
    double delay_s = 0.0;
    double jitter_used = 0.0;  // epsilon * sigma_xi^2(delay) actually added to the diagonal
    Eigen::MatrixXd lower;     // Cholesky factor of matrix + jitter_used * I
};

PnCovariance build_covariance(const OscillatorModel& osc, const SampleTimeGrid& grid,
                              double delay_s, const JitterPolicy& jitter = {},
                              Exec exec = Exec::Parallel);

/// Entrywise d R(delay) / d delay. Throws UndefinedDerivativeError at any kink.
Eigen::MatrixXd covariance_delay_deriv(const OscillatorModel& osc, const SampleTimeGrid& grid,
                                       double delay_s, Exec exec = Exec::Parallel);

enum class PnMethod { ExactPath, CovarianceFactor };

struct PnRealization {
    Eigen::VectorXd xi;
    std::uint64_t seed = 0;
    PnMethod method = PnMethod::ExactPath;

    static PnRealization zeros(std::size_t n) {
        return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), 0, PnMethod::ExactPath};
    }
};

/// Samples the oscillator phase jointly at {t_i} and {t_i - delay} with the
/// exact Wiener (FRO) or Gauss-Markov (PLL) transition law and differences them.
PnRealization sample_pn_exact(const OscillatorModel& osc, const SampleTimeGrid& grid,
                              double delay_s, std::uint64_t seed);

/// xi = L g with L the stored Cholesky factor. Used to cross-check sample_pn_exact.
PnRealization sample_pn_covariance_factor(const PnCovariance& covariance, std::uint64_t seed);

} // namespace pnbound
