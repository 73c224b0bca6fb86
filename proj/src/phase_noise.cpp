#include "pnbound/phase_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pnbound/constants.hpp"
#include "pnbound/errors.hpp"

namespace pnbound {

OscillatorModel OscillatorModel::with_variance_scaled(double factor) const {
    OscillatorModel o = *this;
    o.f3db_hz *= factor;
    return o;
}

void OscillatorModel::validate() const {
    if (!(f3db_hz > 0.0) || !std::isfinite(f3db_hz))
        throw ModelValidityError("oscillator f3dB must be positive");
    if (kind == OscillatorKind::Pll && (!(floop_hz > 0.0) || !std::isfinite(floop_hz)))
        throw ModelValidityError("PLL loop bandwidth must be positive");
}

const char* to_string(OscillatorKind kind) { return kind == OscillatorKind::Fro ? "fro" : "pll"; }

double pn_variance(const OscillatorModel& osc, double lag_s) {
    const double a = std::abs(lag_s);
    if (osc.kind == OscillatorKind::Fro) return 4.0 * kPi * osc.f3db_hz * a;
    return 2.0 * osc.f3db_hz / osc.floop_hz * -std::expm1(-kTwoPi * osc.floop_hz * a);
}

double pn_variance_deriv(const OscillatorModel& osc, double lag_s) {
    if (lag_s == 0.0)
        throw UndefinedDerivativeError("PN variance is not differentiable at zero lag");
    const double sign = lag_s > 0.0 ? 1.0 : -1.0;
    const double slope = 4.0 * kPi * osc.f3db_hz;
    if (osc.kind == OscillatorKind::Fro) return slope * sign;
    return slope * std::exp(-kTwoPi * osc.floop_hz * std::abs(lag_s)) * sign;
}

double pn_correlation(const OscillatorModel& osc, double delta_t_s, double delay_s) {
    if (osc.kind == OscillatorKind::Fro) {
        // Same formula, with |tau + dt| + |tau - dt| - 2|dt| = 2 max(0, |tau| - |dt|) folded in.
        return 4.0 * kPi * osc.f3db_hz * std::max(0.0, std::abs(delay_s) - std::abs(delta_t_s));
    }
    const double dt = std::abs(delta_t_s);
    return 0.5 * (pn_variance(osc, delay_s + dt) + pn_variance(osc, delay_s - dt)) -
           pn_variance(osc, dt);
}

SampleTimeGrid::SampleTimeGrid(const OfdmConfig& cfg)
    : n_(cfg.num_subcarriers), ts_(cfg.sample_interval_s()), tcp_(cfg.cp_duration_s) {
    cfg.validate();
    times_.resize(cfg.frame_size());
    for (std::size_t i = 0; i < times_.size(); ++i) {
        const std::size_t m = i / n_;
        times_[i] = static_cast<double>(i) * ts_ + static_cast<double>(m) * tcp_;
    }
}

double SampleTimeGrid::delta_t(std::size_t i1, std::size_t i2) const {
    const auto di = static_cast<double>(static_cast<long long>(i1) - static_cast<long long>(i2));
    const auto dm = static_cast<double>(static_cast<long long>(i1 / n_) -
                                        static_cast<long long>(i2 / n_));
    return di * ts_ + dm * tcp_;
}

namespace {

template <class F>
void fill_symmetric(Eigen::MatrixXd& out, F&& entry, Exec exec) {
    const Eigen::Index n = out.rows();
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) out(i, j) = entry(i, j);
    } else {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) out(i, j) = entry(i, j);
    }
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
}

} // namespace

PnCovariance build_covariance(const OscillatorModel& osc, const SampleTimeGrid& grid,
                              double delay_s, const JitterPolicy& jitter, Exec exec) {
    if (!(delay_s >= 0.0)) throw ModelValidityError("delay must be non-negative");
    const auto n = static_cast<Eigen::Index>(grid.size());
    PnCovariance cov;
    cov.delay_s = delay_s;
    cov.matrix.resize(n, n);
    fill_symmetric(
        cov.matrix,
        [&](Eigen::Index i, Eigen::Index j) {
            return pn_correlation(osc, grid.delta_t(static_cast<std::size_t>(i),
                                                    static_cast<std::size_t>(j)),
                                  delay_s);
        },
        exec);
    // The diagonal is sigma_xi^2(delay) by definition; pin it against rounding.
    const double var = pn_variance(osc, delay_s);
    cov.matrix.diagonal().setConstant(var);

    if (var == 0.0) {
        cov.lower = Eigen::MatrixXd::Zero(n, n);
        return cov;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(cov.matrix);
    if (llt.info() == Eigen::Success) {
        cov.lower = llt.matrixL();
        return cov;
    }
    if (jitter.enabled) {
        for (double eps : jitter.ladder) {
            Eigen::MatrixXd jittered = cov.matrix;
            jittered.diagonal().array() += eps * var;
            llt.compute(jittered);
            if (llt.info() == Eigen::Success) {
                cov.jitter_used = eps * var;
                cov.lower = llt.matrixL();
                return cov;
            }
        }
    }
    throw DegenerateCovarianceError("PN covariance is not factorizable at delay " +
                                    std::to_string(delay_s) + " s even with maximum jitter");
}

Eigen::MatrixXd covariance_delay_deriv(const OscillatorModel& osc, const SampleTimeGrid& grid,
                                       double delay_s, Exec exec) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    // Kinks are flagged with NaN inside the parallel fill and reported afterwards.
    const double tol = 1e-12 * std::max(delay_s, grid.size() > 1 ? grid.delta_t(grid.size() - 1, 0) : 0.0);
    if (delay_s <= tol) throw UndefinedDerivativeError("covariance derivative undefined at zero delay");
    Eigen::MatrixXd d(n, n);
    fill_symmetric(
        d,
        [&](Eigen::Index i, Eigen::Index j) {
            const double dt = grid.delta_t(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            const double lp = delay_s + dt;
            const double lm = delay_s - dt;
            if (std::abs(lp) <= tol || std::abs(lm) <= tol) return std::nan("");
            return 0.5 * (pn_variance_deriv(osc, lp) + pn_variance_deriv(osc, lm));
        },
        exec);
    if (d.hasNaN()) throw UndefinedDerivativeError("covariance derivative hits a kink");
    return d;
}

PnRealization sample_pn_exact(const OscillatorModel& osc, const SampleTimeGrid& grid,
                              double delay_s, std::uint64_t seed) {
    if (!(delay_s >= 0.0)) throw ModelValidityError("delay must be non-negative");
    const std::size_t n = grid.size();
    const auto& t = grid.times_s();

    // Joint time set {t_i} U {t_i - delay}; entry k < n is t_k, k >= n is t_{k-n} - delay.
    std::vector<double> when(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        when[i] = t[i];
        when[n + i] = t[i] - delay_s;
    }
    std::vector<std::size_t> order(2 * n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return when[a] < when[b]; });

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> phase(2 * n);

    const bool fro = osc.kind == OscillatorKind::Fro;
    const double stationary_var = fro ? 0.0 : osc.f3db_hz / osc.floop_hz;
    double phi = fro ? 0.0 : std::sqrt(stationary_var) * g(rng);
    double prev = when[order[0]];
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double now = when[order[k]];
        if (now != prev) {
            const double dt = now - prev;
            if (fro) {
                phi += std::sqrt(4.0 * kPi * osc.f3db_hz * dt) * g(rng);
            } else {
                const double rho = std::exp(-kTwoPi * osc.floop_hz * dt);
                phi = rho * phi + std::sqrt(stationary_var * -std::expm1(-2.0 * kTwoPi * osc.floop_hz * dt)) * g(rng);
            }
            prev = now;
        }
        phase[order[k]] = phi;
    }

    PnRealization out;
    out.seed = seed;
    out.method = PnMethod::ExactPath;
    out.xi.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out.xi(static_cast<Eigen::Index>(i)) = phase[i] - phase[n + i];
    return out;
}

PnRealization sample_pn_covariance_factor(const PnCovariance& covariance, std::uint64_t seed) {
    const Eigen::Index n = covariance.matrix.rows();
    if (covariance.lower.rows() != n)
        throw DegenerateCovarianceError("covariance has no factor");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = g(rng);
    PnRealization out;
    out.seed = seed;
    out.method = PnMethod::CovarianceFactor;
    out.xi = covariance.lower.triangularView<Eigen::Lower>() * z;
    return out;
}

} // namespace pnbound
