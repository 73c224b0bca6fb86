#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pnbound/bounds_crb.hpp"
#include "pnbound/peak_search.hpp"

namespace pnbound {

struct PseudoTrueOptions {
    double window_cells = 3.0;  // +- resolution cells around the truth
    RefineOptions refine{};
};

/// Minimizer of ||mu - alpha q(tau, nu)||^2 for mu = alpha_bar Xi q(tau_bar, nu_bar).
struct PseudoTrueParams {
    double delay_s = 0.0;
    double normalized_doppler = 0.0;
    std::complex<double> gain{};
    double objective_value = 0.0;        // |mu^H q(tau0, nu0)|^2
    double coarse_objective_value = 0.0; // best coarse-grid value
    bool converged = false;
    std::vector<SearchStep> search_trace;
};

PseudoTrueParams pseudo_true_search(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                    const TargetTruth& truth, const PnRealization& pn,
                                    const PseudoTrueOptions& opts = {});

/// Same search for an arbitrary true mean vector, centred on (delay, doppler).
PseudoTrueParams pseudo_true_search_for_mean(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                             const CVector& mean, double center_delay_s,
                                             double center_doppler,
                                             const PseudoTrueOptions& opts = {});

struct McrbReport {
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d b = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d mcrb = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d bias_outer = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d lb = Eigen::Matrix4d::Zero();
    std::uint64_t pn_seed = 0;
    // max_i |Re{r^H d_i}| / (||r|| ||d_i||); first-order optimality diagnostic.
    double stationarity = 0.0;
};

/// A and B of the misspecified model at the pseudo-true point (Gaussian closed forms).
McrbReport mcrb_matrices(const OfdmConfig& cfg, const SymbolGrid& symbols,
                         const TargetTruth& truth, const PnRealization& pn,
                         const NoiseModel& noise, const PseudoTrueParams& pseudo);

/// A^-1 B A^-1 plus the pseudo-true bias outer product. Throws NumericalError for singular A.
McrbReport mcrb_and_lb(McrbReport report, const TargetTruth& truth,
                       const PseudoTrueParams& pseudo);

struct AveragedLbResult {
    BoundReport lb;    // LbAveraged
    BoundReport mcrb;  // mean MCRB over the same realizations
    std::vector<McrbReport> per_realization;
    std::vector<PseudoTrueParams> pseudo_true;
    std::size_t n_requested = 0;
    std::size_t n_excluded = 0;
    double lb_delay_std = 0.0;    // dispersion of the per-realization LB diagonals
    double lb_doppler_std = 0.0;
};

/// Mean LB over realizations drawn with sample_pn_exact from per-index seeds
/// derive_seed(seed, k). Non-converged searches are excluded; more than 10%
/// exclusions throws NumericalError.
AveragedLbResult averaged_lb(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const TargetTruth& truth, const NoiseModel& noise,
                             const OscillatorModel& osc, std::size_t n_realizations,
                             std::uint64_t seed, Exec exec = Exec::Parallel,
                             const PseudoTrueOptions& opts = {});

/// Same reduction over caller-supplied realizations.
AveragedLbResult averaged_lb(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const TargetTruth& truth, const NoiseModel& noise,
                             std::span<const PnRealization> realizations,
                             Exec exec = Exec::Parallel, const PseudoTrueOptions& opts = {});

} // namespace pnbound
