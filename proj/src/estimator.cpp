#include "pnbound/estimator.hpp"

#include <cmath>
#include <exception>

#include "fft.hpp"
#include "pnbound/constants.hpp"
#include "pnbound/errors.hpp"

namespace pnbound {

CoarseMap coarse_periodogram(const OfdmConfig& cfg, const SymbolGrid& symbols, const CVector& y,
                             int padding) {
    symbols.check_matches(cfg);
    const auto n = static_cast<Eigen::Index>(cfg.num_subcarriers);
    const auto m = static_cast<Eigen::Index>(cfg.num_symbols);
    if (y.size() != n * m) throw DimensionError("observation length must be N*M");
    if (padding < 1) throw std::invalid_argument("padding must be >= 1");

    // Per-symbol unitary DFT, then reciprocal filtering by the known symbols.
    Eigen::MatrixXcd h = Eigen::Map<const Eigen::MatrixXcd>(y.data(), n, m);
    for (Eigen::Index k = 0; k < m; ++k) detail::dft_inplace(h.col(k).data(), static_cast<int>(n), -1);
    h = (h / std::sqrt(static_cast<double>(n))).cwiseQuotient(symbols.entries());

    const Eigen::Index pn = padding * n;
    const Eigen::Index pm = padding * m;
    Eigen::MatrixXcd grid = Eigen::MatrixXcd::Zero(pn, pm);
    grid.topLeftCorner(n, m) = h;
    // Delay axis: inverse DFT over subcarriers.
    for (Eigen::Index k = 0; k < m; ++k) detail::dft_inplace(grid.col(k).data(), static_cast<int>(pn), +1);
    // Doppler axis: forward DFT over symbols.
    Eigen::VectorXcd row(pm);
    for (Eigen::Index k = 0; k < pn; ++k) {
        row = grid.row(k).transpose();
        detail::dft_inplace(row.data(), static_cast<int>(pm), -1);
        grid.row(k) = row.transpose();
    }

    CoarseMap map;
    map.power = grid.cwiseAbs2();
    const double period_t = cfg.elementary_duration_s();
    const double period_n = 1.0 / (cfg.carrier_freq_hz * cfg.total_symbol_duration_s());
    for (Eigen::Index k = 0; k < pn; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(pn) * period_t;
        map.delays_s.push_back(2 * k >= pn ? t - period_t : t);
    }
    for (Eigen::Index l = 0; l < pm; ++l) {
        const double v = static_cast<double>(l) / static_cast<double>(pm) * period_n;
        map.dopplers.push_back(2 * l >= pm ? v - period_n : v);
    }
    return map;
}

EstimateResult ml_estimate(const OfdmConfig& cfg, const SymbolGrid& symbols, const CVector& y,
                           const EstimatorOptions& opts) {
    if (y.size() > 0 && y.squaredNorm() == 0.0)
        throw NumericalError("no peak: observation is identically zero");
    const CoarseMap map = coarse_periodogram(cfg, symbols, y, opts.padding);
    Eigen::Index bk = 0, bl = 0;
    const double peak = map.power.maxCoeff(&bk, &bl);
    if (!(peak > 0.0)) throw NumericalError("no peak in delay-Doppler map");

    const DelayDopplerCorrelator corr(cfg, symbols, y);
    RefineOptions ro = opts.refine;
    ro.initial_step_cells = 1.0 / static_cast<double>(opts.padding);
    const PeakResult ref = refine_peak(corr, map.delays_s[static_cast<std::size_t>(bk)],
                                       map.dopplers[static_cast<std::size_t>(bl)], ro);
    EstimateResult est;
    est.coarse_objective_value = ref.start_objective;
    est.delay_s = ref.delay_s;
    est.normalized_doppler = ref.normalized_doppler;
    est.objective_value = ref.objective;
    est.refined = ref.simplex_converged;
    const CVector q = synthesize_q(cfg, symbols, est.delay_s, est.normalized_doppler);
    est.gain = q.dot(y) / q.squaredNorm();
    return est;
}

CampaignResult rmse_campaign(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const TargetTruth& truth, const NoiseModel& noise,
                             const std::optional<OscillatorModel>& osc, const CampaignSpec& spec,
                             Exec exec) {
    if (spec.n_trials == 0) throw std::invalid_argument("campaign needs at least one trial");
    check_model_validity(cfg, truth);
    noise.validate();
    symbols.check_matches(cfg);
    if (osc) osc->validate();
    const SampleTimeGrid grid(cfg);

    const std::size_t n = spec.n_trials;
    std::vector<TrialRecord> trials(n);
    std::vector<std::exception_ptr> errors(n);

    auto one = [&](std::size_t k) {
        try {
            TrialRecord& t = trials[k];
            t.noise_seed = derive_seed(spec.seed, 3 * k);
            t.pn_seed = derive_seed(spec.seed, 3 * k + 1);
            t.symbol_seed = derive_seed(spec.seed, 3 * k + 2);
            const SymbolGrid x = spec.symbol_policy == SymbolPolicy::Fixed
                                     ? symbols
                                     : SymbolGrid::qpsk(cfg, t.symbol_seed);
            std::optional<PnRealization> pn;
            if (osc) pn = sample_pn_exact(*osc, grid, truth.delay_s, t.pn_seed);
            const CVector y = synthesize_observation(cfg, x, truth, noise, pn ? &*pn : nullptr,
                                                     t.noise_seed);
            t.estimate = ml_estimate(cfg, x, y, spec.estimator);
            if (pn && spec.track_pseudo_true) t.pseudo_true = pseudo_true_search(cfg, x, truth, *pn);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const auto count = static_cast<long long>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long long k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
    } else {
        for (long long k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    CampaignResult res;
    res.n_trials = n;
    res.seed = spec.seed;
    double se_t = 0, se_n = 0, sum_t = 0, sum_n = 0, sum_pt = 0, sum_pn = 0;
    for (const auto& t : trials) {
        se_t += std::pow(t.estimate.delay_s - truth.delay_s, 2);
        se_n += std::pow(t.estimate.normalized_doppler - truth.normalized_doppler, 2);
        sum_t += t.estimate.delay_s;
        sum_n += t.estimate.normalized_doppler;
        if (t.pseudo_true) {
            sum_pt += t.pseudo_true->delay_s;
            sum_pn += t.pseudo_true->normalized_doppler;
        }
    }
    const auto dn = static_cast<double>(n);
    res.delay_rmse_s = std::sqrt(se_t / dn);
    res.doppler_rmse = std::sqrt(se_n / dn);
    res.range_rmse_m = 0.5 * kSpeedOfLight * res.delay_rmse_s;
    res.velocity_rmse_mps = 0.5 * kSpeedOfLight * res.doppler_rmse;
    res.mean_delay_s = sum_t / dn;
    res.mean_doppler = sum_n / dn;
    double vt = 0, vn = 0;
    for (const auto& t : trials) {
        vt += std::pow(t.estimate.delay_s - res.mean_delay_s, 2);
        vn += std::pow(t.estimate.normalized_doppler - res.mean_doppler, 2);
    }
    if (n > 1) {
        res.delay_std_error = std::sqrt(vt / (dn - 1) / dn);
        res.doppler_std_error = std::sqrt(vn / (dn - 1) / dn);
    }
    if (osc && spec.track_pseudo_true) {
        res.mean_pseudo_delay_s = sum_pt / dn;
        res.mean_pseudo_doppler = sum_pn / dn;
    }
    res.trials = std::move(trials);
    return res;
}

} // namespace pnbound
