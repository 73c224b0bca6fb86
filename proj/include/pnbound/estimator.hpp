#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pnbound/mcrb.hpp"

namespace pnbound {

struct EstimateResult {
    double delay_s = 0.0;
    double normalized_doppler = 0.0;
    std::complex<double> gain{};
    double objective_value = 0.0;
    double coarse_objective_value = 0.0;
    bool refined = false;
};

/// Zero-padded delay-Doppler periodogram of the reciprocal-filtered observation.
/// power(k, l) is |y^H q(delays[k], dopplers[l])|^2 for unit-modulus symbols.
struct CoarseMap {
    Eigen::MatrixXd power;
    std::vector<double> delays_s;
    std::vector<double> dopplers;
};

CoarseMap coarse_periodogram(const OfdmConfig& cfg, const SymbolGrid& symbols, const CVector& y,
                             int padding = 4);

struct EstimatorOptions {
    int padding = 4;
    RefineOptions refine{.tolerance_cells = 1e-4};
};

/// PN-unaware ML estimate: FFT periodogram peak, then local refinement of |y^H q|^2.
/// Throws NumericalError ("no peak") for an all-zero observation.
EstimateResult ml_estimate(const OfdmConfig& cfg, const SymbolGrid& symbols, const CVector& y,
                           const EstimatorOptions& opts = {});

enum class SymbolPolicy { Fixed, Redrawn };

struct TrialRecord {
    EstimateResult estimate;
    std::optional<PseudoTrueParams> pseudo_true;
    std::uint64_t noise_seed = 0;
    std::uint64_t pn_seed = 0;
    std::uint64_t symbol_seed = 0;
};

struct CampaignResult {
    std::vector<TrialRecord> trials;
    std::size_t n_trials = 0;
    double range_rmse_m = 0.0;
    double velocity_rmse_mps = 0.0;
    double delay_rmse_s = 0.0;
    double doppler_rmse = 0.0;
    double mean_delay_s = 0.0;
    double mean_doppler = 0.0;
    double delay_std_error = 0.0;    // standard error of mean_delay_s
    double doppler_std_error = 0.0;
    // Means of per-trial pseudo-true values (PN active only).
    std::optional<double> mean_pseudo_delay_s;
    std::optional<double> mean_pseudo_doppler;
    std::uint64_t seed = 0;
};

struct CampaignSpec {
    std::size_t n_trials = 100;
    std::uint64_t seed = 1;
    SymbolPolicy symbol_policy = SymbolPolicy::Fixed;
    bool track_pseudo_true = true;
    EstimatorOptions estimator{};
};

/// Monte-Carlo RMSE of ml_estimate against the truth. Each trial uses seeds
/// derived from (seed, trial index), so the parallel and serial paths agree bit for bit.
CampaignResult rmse_campaign(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const TargetTruth& truth, const NoiseModel& noise,
                             const std::optional<OscillatorModel>& osc, const CampaignSpec& spec,
                             Exec exec = Exec::Parallel);

} // namespace pnbound
