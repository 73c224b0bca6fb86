#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "pnbound/ofdm_config.hpp"
#include "pnbound/phase_noise.hpp"

namespace pnbound {

using CVector = Eigen::VectorXcd;

/// N x M data symbols, one per subcarrier and OFDM symbol.
class SymbolGrid {
public:
    explicit SymbolGrid(Eigen::MatrixXcd entries);

    /// (+-1 +- j)/sqrt(2) drawn from a seeded stream.
    static SymbolGrid qpsk(std::size_t num_subcarriers, std::size_t num_symbols,
                           std::uint64_t seed);
    static SymbolGrid qpsk(const OfdmConfig& cfg, std::uint64_t seed) {
        return qpsk(cfg.num_subcarriers, cfg.num_symbols, seed);
    }

    const Eigen::MatrixXcd& entries() const { return x_; }
    std::size_t rows() const { return static_cast<std::size_t>(x_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(x_.cols()); }
    double squared_frobenius() const { return x_.squaredNorm(); }
    bool unit_modulus(double tol = 1e-12) const;

    void check_matches(const OfdmConfig& cfg) const;

private:
    Eigen::MatrixXcd x_;
};

/// b(tau): entry n = exp(-j 2 pi n df tau).
CVector delay_steering(const OfdmConfig& cfg, double delay_s);

/// c(nu): entry m = exp(-j 2 pi fc m Tsym nu). The model applies its conjugate.
CVector doppler_steering(const OfdmConfig& cfg, double normalized_doppler);

/// vec{ F_N^H [X .* b(tau) c(nu)^H] }, column-major, unitary inverse FFT per symbol.
CVector synthesize_q(const OfdmConfig& cfg, const SymbolGrid& symbols, double delay_s,
                     double normalized_doppler);

struct QDerivatives {
    CVector q;
    CVector d_tau;
    CVector d_nu;
    // Present only for order 2.
    CVector d_tau_tau;
    CVector d_nu_nu;
    CVector d_tau_nu;
    int order = 1;
};

QDerivatives q_derivatives(const OfdmConfig& cfg, const SymbolGrid& symbols, double delay_s,
                           double normalized_doppler, int order);

/// Checks the delay <= Tcp, |nu| < 1/N and fc T |nu| << 1 conditions.
void check_model_validity(const OfdmConfig& cfg, const TargetTruth& truth);

/// alpha diag(exp(-j xi)) q + z, with z circular Gaussian of variance 2 sigma^2 per entry.
CVector synthesize_observation(const OfdmConfig& cfg, const SymbolGrid& symbols,
                               const TargetTruth& truth, const NoiseModel& noise,
                               const PnRealization* pn, std::uint64_t rng_seed);

/// Noiseless mean alpha Xi q(tau, nu).
CVector observation_mean(const OfdmConfig& cfg, const SymbolGrid& symbols,
                         const TargetTruth& truth, const PnRealization* pn);

} // namespace pnbound
