#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pnbound/ofdm_frame.hpp"
#include "pnbound/phase_noise.hpp"

namespace pnbound {

// Parameter order shared by every FIM: tau, nu, alpha_R, alpha_I, then xi_0..xi_{NM-1}.
inline constexpr Eigen::Index kTau = 0;
inline constexpr Eigen::Index kNu = 1;
inline constexpr Eigen::Index kGainRe = 2;
inline constexpr Eigen::Index kGainIm = 3;
inline constexpr Eigen::Index kNumTargetParams = 4;

const char* parameter_name(Eigen::Index index);

struct FimMatrix {
    Eigen::MatrixXd matrix;
    Eigen::Index size() const { return matrix.rows(); }
};

enum class BoundFamily { CrbPnFree, CrbHybrid, Mcrb, Lb, LbAveraged };

const char* to_string(BoundFamily family);

struct BoundReport {
    BoundFamily family = BoundFamily::CrbPnFree;
    double delay_var_s2 = 0.0;
    double doppler_var = 0.0;
    double range_rmse_m = 0.0;
    double velocity_rmse_mps = 0.0;
    std::optional<OfdmConfig> config;
    std::vector<std::uint64_t> seeds;

    static BoundReport from_variances(BoundFamily family, double delay_var_s2,
                                      double doppler_var);
};

FimMatrix deterministic_fim(const OfdmConfig& cfg, const SymbolGrid& symbols,
                            const TargetTruth& truth, const NoiseModel& noise);

/// Throws UnidentifiableError for a singular FIM.
BoundReport deterministic_crb(const FimMatrix& fim);

/// Closed-form E_xi of the observation information; independent of xi.
FimMatrix hybrid_fim_observation(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                 const TargetTruth& truth, const NoiseModel& noise);

/// Prior information of the Gaussian PN law: R^-1 on the xi block and
/// tr[(R^-1 dR/dtau)^2]/2 on the tau entry; everything else zero.
/// include_delay_information = false zeroes the tau entry (sensitivity runs).
FimMatrix hybrid_fim_prior(const OscillatorModel& osc, const SampleTimeGrid& grid,
                           double delay_s, Exec exec = Exec::Parallel,
                           bool include_delay_information = true);

BoundReport hybrid_crb(const FimMatrix& observation, const FimMatrix& prior);

/// [J^-1]_{0,0} and [J^-1]_{1,1} from a diagonally equilibrated Cholesky
/// (LDLT fallback) solve against e_0 and e_1. No explicit inverse.
/// Throws UnidentifiableError if J is singular.
std::pair<double, double> delay_doppler_inverse_diagonal(const Eigen::MatrixXd& fim);

/// Full 4x4 inverse of a small symmetric positive definite matrix.
Eigen::Matrix4d invert_target_fim(const Eigen::Matrix4d& fim);

} // namespace pnbound
