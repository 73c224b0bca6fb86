#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pnbound/bounds_crb.hpp"
#include "pnbound/mcrb.hpp"
#include "pnbound/ofdm_frame.hpp"
#include "pnbound/phase_noise.hpp"

namespace pnbound::oracles {

/// Entrywise comparison of a closed-form matrix against a Monte-Carlo mean.
struct MomentCheck {
    Eigen::MatrixXd expected;
    Eigen::MatrixXd empirical;
    Eigen::MatrixXd std_error;
    double max_z = 0.0;            // max |empirical - expected| / tolerance scale
    std::size_t n_outside = 0;     // entries beyond `sigmas` standard errors
    std::size_t n_draws = 0;

    bool within(double sigmas = 3.0) const { return max_z <= sigmas; }
};

/// Accumulates samples of a symmetric matrix statistic; the tolerance of each
/// entry is max(SE, floor_rel * sqrt(|E_ii E_jj|)).
MomentCheck compare(const Eigen::MatrixXd& expected, const Eigen::MatrixXd& sum,
                    const Eigen::MatrixXd& sum_sq, std::size_t n, double floor_rel,
                    double sigmas = 3.0);

/// |X_ij - Y_ij| / sqrt(|Y_ii Y_jj|), maximised over entries.
double max_relative_error(const Eigen::MatrixXd& x, const Eigen::MatrixXd& ref);

/// Empirical covariance of n draws against build_covariance (zero mean known).
MomentCheck pn_covariance_mc(const OscillatorModel& osc, const SampleTimeGrid& grid,
                             double delay_s, std::size_t n_draws, std::uint64_t seed,
                             PnMethod method = PnMethod::ExactPath);

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic critical value.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_critical(std::size_t n, std::size_t m, double alpha = 0.01);

/// Worst KS statistic / critical value ratio over the marginals of the two samplers.
double sampler_marginal_ks_ratio(const OscillatorModel& osc, const SampleTimeGrid& grid,
                                 double delay_s, std::size_t n_draws, std::uint64_t seed);

/// E_xi of the conditional observation FIM, built from dense derivative columns of
/// mu = alpha Xi q at sampled xi.
MomentCheck observation_fim_mc(const OfdmConfig& cfg, const SymbolGrid& symbols,
                               const TargetTruth& truth, const NoiseModel& noise,
                               const OscillatorModel& osc, std::size_t n_draws,
                               std::uint64_t seed);

/// Outer product of numerically differentiated log-priors log p(xi; tau).
MomentCheck prior_fim_mc(const OscillatorModel& osc, const SampleTimeGrid& grid,
                         double delay_s, std::size_t n_draws, std::uint64_t seed,
                         double tau_step_s = 1e-12);

/// (1/sigma^2) Re{D^H D} with D from central differences of the PN-free mean.
Eigen::Matrix4d fd_deterministic_fim(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                     const TargetTruth& truth, const NoiseModel& noise);

/// A as the Hessian and B as grad grad^T + score covariance of
/// E_p log p~(y; eta) = -||mu - mu~(eta)||^2 / (2 sigma^2) + const, by differences.
std::pair<Eigen::Matrix4d, Eigen::Matrix4d> fd_mcrb_ab(const OfdmConfig& cfg,
                                                        const SymbolGrid& symbols,
                                                        const CVector& true_mean,
                                                        const NoiseModel& noise,
                                                        const PseudoTrueParams& pseudo);

} // namespace pnbound::oracles
