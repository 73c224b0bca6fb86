#include "pnbound/mcrb.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>

#include "pnbound/errors.hpp"

namespace pnbound {

using cd = std::complex<double>;

PseudoTrueParams pseudo_true_search_for_mean(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                             const CVector& mean, double center_delay_s,
                                             double center_doppler, const PseudoTrueOptions& opts) {
    const DelayDopplerCorrelator corr(cfg, symbols, mean);
    const double cell_t = cfg.delay_cell_s();
    const double cell_n = cfg.doppler_cell();

    // Half-cell spacing over +-window cells, kept inside half an ambiguity
    // period (N delay cells, M Doppler cells) so aliases cannot tie with the centre.
    const int half = static_cast<int>(std::ceil(2.0 * opts.window_cells));
    const int half_t = std::min(half, static_cast<int>(cfg.num_subcarriers) - 1);
    const int half_n = std::min(half, static_cast<int>(cfg.num_symbols) - 1);
    std::vector<double> delays, dopplers;
    for (int k = -half_t; k <= half_t; ++k) delays.push_back(center_delay_s + 0.5 * k * cell_t);
    for (int k = -half_n; k <= half_n; ++k) dopplers.push_back(center_doppler + 0.5 * k * cell_n);
    const Eigen::MatrixXd grid = corr.objective_grid(delays, dopplers);
    Eigen::Index bi = 0, bk = 0;
    const double coarse = grid.maxCoeff(&bi, &bk);

    PseudoTrueParams out;
    out.coarse_objective_value = coarse;
    out.search_trace.push_back({"coarse", delays[static_cast<std::size_t>(bi)],
                                dopplers[static_cast<std::size_t>(bk)], coarse});

    const PeakResult peak = refine_peak(corr, delays[static_cast<std::size_t>(bi)],
                                        dopplers[static_cast<std::size_t>(bk)], opts.refine);
    out.delay_s = peak.delay_s;
    out.normalized_doppler = peak.normalized_doppler;
    out.objective_value = peak.objective;
    out.converged = peak.simplex_converged;
    out.search_trace.insert(out.search_trace.end(), peak.trace.begin(), peak.trace.end());

    const CVector q = synthesize_q(cfg, symbols, out.delay_s, out.normalized_doppler);
    out.gain = q.dot(mean) / q.squaredNorm();
    return out;
}

PseudoTrueParams pseudo_true_search(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                    const TargetTruth& truth, const PnRealization& pn,
                                    const PseudoTrueOptions& opts) {
    const CVector mu = observation_mean(cfg, symbols, truth, &pn);
    return pseudo_true_search_for_mean(cfg, symbols, mu, truth.delay_s, truth.normalized_doppler,
                                       opts);
}

McrbReport mcrb_matrices(const OfdmConfig& cfg, const SymbolGrid& symbols,
                         const TargetTruth& truth, const PnRealization& pn,
                         const NoiseModel& noise, const PseudoTrueParams& pseudo) {
    noise.validate();
    const CVector mu = observation_mean(cfg, symbols, truth, &pn);
    const QDerivatives q =
        q_derivatives(cfg, symbols, pseudo.delay_s, pseudo.normalized_doppler, 2);
    const cd alpha = pseudo.gain;
    const cd j(0.0, 1.0);
    const CVector r = mu - alpha * q.q;

    std::array<CVector, 4> d{alpha * q.d_tau, alpha * q.d_nu, q.q, j * q.q};
    // Second derivatives of alpha q; the gain-gain block vanishes.
    auto second = [&](int a, int b) -> std::optional<CVector> {
        if (a > b) std::swap(a, b);
        if (a == kTau && b == kTau) return CVector(alpha * q.d_tau_tau);
        if (a == kTau && b == kNu) return CVector(alpha * q.d_tau_nu);
        if (a == kNu && b == kNu) return CVector(alpha * q.d_nu_nu);
        if (a == kTau && b == kGainRe) return q.d_tau;
        if (a == kTau && b == kGainIm) return CVector(j * q.d_tau);
        if (a == kNu && b == kGainRe) return q.d_nu;
        if (a == kNu && b == kGainIm) return CVector(j * q.d_nu);
        return std::nullopt;
    };

    const double inv_s2 = 1.0 / noise.sigma_sq;
    Eigen::Vector4d score;
    for (int i = 0; i < 4; ++i) score(i) = r.dot(d[static_cast<std::size_t>(i)]).real();

    McrbReport rep;
    rep.pn_seed = pn.seed;
    const double rn = r.norm();
    for (int i = 0; i < 4; ++i) {
        const auto& di = d[static_cast<std::size_t>(i)];
        if (rn > 0.0) rep.stationarity = std::max(rep.stationarity, std::abs(score(i)) / (rn * di.norm()));
        for (int k = i; k < 4; ++k) {
            const auto& dk = d[static_cast<std::size_t>(k)];
            const double gram = di.dot(dk).real();
            const auto h = second(i, k);
            const double curv = h ? r.dot(*h).real() : 0.0;
            rep.a(i, k) = rep.a(k, i) = inv_s2 * (curv - gram);
            rep.b(i, k) = rep.b(k, i) = inv_s2 * inv_s2 * score(i) * score(k) + inv_s2 * gram;
        }
    }
    return rep;
}

McrbReport mcrb_and_lb(McrbReport report, const TargetTruth& truth,
                       const PseudoTrueParams& pseudo) {
    const Eigen::Vector4d d = report.a.diagonal().cwiseAbs();
    if (!(d.array() > 0.0).all()) throw NumericalError("A matrix has a zero diagonal entry");
    const Eigen::Vector4d s = d.cwiseSqrt().cwiseInverse();
    const Eigen::Matrix4d scaled = s.asDiagonal() * report.a * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(scaled);
    const Eigen::Vector4d ev = es.eigenvalues();
    const double cond = ev.cwiseAbs().maxCoeff() / ev.cwiseAbs().minCoeff();
    if (!(cond < 1e13)) {
        std::ostringstream os;
        os << "A matrix is singular (equilibrated condition number " << cond << ")";
        throw NumericalError(os.str());
    }
    const Eigen::Matrix4d a_inv = s.asDiagonal() *
                                  (es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose()) *
                                  s.asDiagonal();
    Eigen::Matrix4d m = a_inv * report.b * a_inv;
    report.mcrb = 0.5 * (m + m.transpose());

    Eigen::Vector4d bias;
    bias << truth.delay_s - pseudo.delay_s, truth.normalized_doppler - pseudo.normalized_doppler,
        truth.gain.real() - pseudo.gain.real(), truth.gain.imag() - pseudo.gain.imag();
    report.bias_outer = bias * bias.transpose();
    report.lb = report.mcrb + report.bias_outer;
    return report;
}

namespace {

struct RealizationOutcome {
    std::optional<McrbReport> report;
    PseudoTrueParams pseudo;
    std::exception_ptr error;  // anything other than a numerical failure
};

template <class Provider>
AveragedLbResult average_over(const OfdmConfig& cfg, const SymbolGrid& symbols,
                              const TargetTruth& truth, const NoiseModel& noise, std::size_t n,
                              Provider&& realization, Exec exec, const PseudoTrueOptions& opts) {
    if (n == 0) throw std::invalid_argument("averaged LB needs at least one realization");
    noise.validate();
    symbols.check_matches(cfg);
    std::vector<RealizationOutcome> out(n);

    auto one = [&](std::size_t k) {
        try {
            const PnRealization pn = realization(k);
            out[k].pseudo = pseudo_true_search(cfg, symbols, truth, pn, opts);
            if (!out[k].pseudo.converged) return;
            out[k].report = mcrb_and_lb(mcrb_matrices(cfg, symbols, truth, pn, noise, out[k].pseudo),
                                        truth, out[k].pseudo);
        } catch (const NumericalError&) {
            out[k].report.reset();
        } catch (...) {
            out[k].error = std::current_exception();
        }
    };
    const auto count = static_cast<long long>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long long k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
    } else {
        for (long long k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
    }

    for (const auto& o : out)
        if (o.error) std::rethrow_exception(o.error);

    AveragedLbResult res;
    res.n_requested = n;
    double lb_t = 0.0, lb_n = 0.0, mc_t = 0.0, mc_n = 0.0;
    for (auto& o : out) {
        res.pseudo_true.push_back(std::move(o.pseudo));
        if (!o.report) {
            ++res.n_excluded;
            continue;
        }
        lb_t += o.report->lb(kTau, kTau);
        lb_n += o.report->lb(kNu, kNu);
        mc_t += o.report->mcrb(kTau, kTau);
        mc_n += o.report->mcrb(kNu, kNu);
        res.per_realization.push_back(*o.report);
    }
    if (res.n_excluded * 10 > n || res.per_realization.empty()) {
        throw NumericalError("averaged LB: " + std::to_string(res.n_excluded) + " of " +
                             std::to_string(n) + " realizations failed to converge");
    }
    const auto used = static_cast<double>(res.per_realization.size());
    res.lb = BoundReport::from_variances(BoundFamily::LbAveraged, lb_t / used, lb_n / used);
    res.mcrb = BoundReport::from_variances(BoundFamily::Mcrb, mc_t / used, mc_n / used);
    res.lb.config = cfg;
    res.mcrb.config = cfg;
    double vt = 0.0, vn = 0.0;
    for (const auto& r : res.per_realization) {
        vt += std::pow(r.lb(kTau, kTau) - res.lb.delay_var_s2, 2);
        vn += std::pow(r.lb(kNu, kNu) - res.lb.doppler_var, 2);
    }
    if (used > 1) {
        res.lb_delay_std = std::sqrt(vt / (used - 1));
        res.lb_doppler_std = std::sqrt(vn / (used - 1));
    }
    return res;
}

} // namespace

AveragedLbResult averaged_lb(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const TargetTruth& truth, const NoiseModel& noise,
                             const OscillatorModel& osc, std::size_t n_realizations,
                             std::uint64_t seed, Exec exec, const PseudoTrueOptions& opts) {
    osc.validate();
    const SampleTimeGrid grid(cfg);
    auto res = average_over(
        cfg, symbols, truth, noise, n_realizations,
        [&](std::size_t k) { return sample_pn_exact(osc, grid, truth.delay_s, derive_seed(seed, k)); },
        exec, opts);
    res.lb.seeds = {seed};
    res.mcrb.seeds = {seed};
    return res;
}

AveragedLbResult averaged_lb(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const TargetTruth& truth, const NoiseModel& noise,
                             std::span<const PnRealization> realizations, Exec exec,
                             const PseudoTrueOptions& opts) {
    auto res = average_over(
        cfg, symbols, truth, noise, realizations.size(),
        [&](std::size_t k) { return realizations[k]; }, exec, opts);
    for (const auto& r : realizations) res.lb.seeds.push_back(r.seed);
    res.mcrb.seeds = res.lb.seeds;
    return res;
}

} // namespace pnbound
