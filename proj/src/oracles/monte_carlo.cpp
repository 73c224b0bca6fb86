#include "monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pnbound/parallel.hpp"

namespace pnbound::oracles {

using cd = std::complex<double>;

MomentCheck compare(const Eigen::MatrixXd& expected, const Eigen::MatrixXd& sum,
                    const Eigen::MatrixXd& sum_sq, std::size_t n, double floor_rel,
                    double sigmas) {
    MomentCheck out;
    const double dn = static_cast<double>(n);
    out.expected = expected;
    out.empirical = sum / dn;
    out.std_error = ((sum_sq / dn - out.empirical.cwiseAbs2()).cwiseMax(0.0) / dn).cwiseSqrt();
    out.n_draws = n;
    for (Eigen::Index i = 0; i < expected.rows(); ++i) {
        for (Eigen::Index j = 0; j < expected.cols(); ++j) {
            const double scale = std::sqrt(std::abs(expected(i, i) * expected(j, j)));
            const double tol = std::max(out.std_error(i, j), floor_rel * scale);
            const double diff = std::abs(out.empirical(i, j) - expected(i, j));
            double z = 0.0;
            if (tol > 0.0) z = diff / tol;
            else if (diff > 0.0) z = std::numeric_limits<double>::infinity();
            out.max_z = std::max(out.max_z, z);
            if (z > sigmas) ++out.n_outside;
        }
    }
    return out;
}

double max_relative_error(const Eigen::MatrixXd& x, const Eigen::MatrixXd& ref) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < ref.rows(); ++i)
        for (Eigen::Index j = 0; j < ref.cols(); ++j) {
            const double scale = std::sqrt(std::abs(ref(i, i) * ref(j, j)));
            const double diff = std::abs(x(i, j) - ref(i, j));
            worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
        }
    return worst;
}

MomentCheck pn_covariance_mc(const OscillatorModel& osc, const SampleTimeGrid& grid,
                             double delay_s, std::size_t n_draws, std::uint64_t seed,
                             PnMethod method) {
    const PnCovariance cov = build_covariance(osc, grid, delay_s);
    const Eigen::Index n = cov.matrix.rows();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < n_draws; ++k) {
        const std::uint64_t s = derive_seed(seed, k);
        const PnRealization pn = method == PnMethod::ExactPath
                                     ? sample_pn_exact(osc, grid, delay_s, s)
                                     : sample_pn_covariance_factor(cov, s);
        const Eigen::MatrixXd outer = pn.xi * pn.xi.transpose();
        sum += outer;
        sum_sq += outer.cwiseAbs2();
    }
    return compare(cov.matrix, sum, sum_sq, n_draws, 0.0);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) * std::sqrt((dn + dm) / (dn * dm));
}

double sampler_marginal_ks_ratio(const OscillatorModel& osc, const SampleTimeGrid& grid,
                                 double delay_s, std::size_t n_draws, std::uint64_t seed) {
    const PnCovariance cov = build_covariance(osc, grid, delay_s);
    const auto n = static_cast<std::size_t>(cov.matrix.rows());
    std::vector<std::vector<double>> exact(n), factor(n);
    for (std::size_t k = 0; k < n_draws; ++k) {
        const PnRealization a = sample_pn_exact(osc, grid, delay_s, derive_seed(seed, 2 * k));
        const PnRealization b = sample_pn_covariance_factor(cov, derive_seed(seed, 2 * k + 1));
        for (std::size_t i = 0; i < n; ++i) {
            exact[i].push_back(a.xi(static_cast<Eigen::Index>(i)));
            factor[i].push_back(b.xi(static_cast<Eigen::Index>(i)));
        }
    }
    const double crit = ks_critical(n_draws, n_draws);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, ks_statistic(exact[i], factor[i]) / crit);
    return worst;
}

MomentCheck observation_fim_mc(const OfdmConfig& cfg, const SymbolGrid& symbols,
                               const TargetTruth& truth, const NoiseModel& noise,
                               const OscillatorModel& osc, std::size_t n_draws,
                               std::uint64_t seed) {
    const QDerivatives d = q_derivatives(cfg, symbols, truth.delay_s, truth.normalized_doppler, 1);
    const SampleTimeGrid grid(cfg);
    const Eigen::Index nm = d.q.size();
    const Eigen::Index p = nm + kNumTargetParams;
    const cd a = truth.gain;
    const cd j(0.0, 1.0);

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t k = 0; k < n_draws; ++k) {
        const PnRealization pn = sample_pn_exact(osc, grid, truth.delay_s, derive_seed(seed, k));
        Eigen::MatrixXcd dmu = Eigen::MatrixXcd::Zero(nm, p);
        for (Eigen::Index i = 0; i < nm; ++i) {
            const cd xi = std::polar(1.0, -pn.xi(i));
            dmu(i, kTau) = a * xi * d.d_tau(i);
            dmu(i, kNu) = a * xi * d.d_nu(i);
            dmu(i, kGainRe) = xi * d.q(i);
            dmu(i, kGainIm) = j * xi * d.q(i);
            dmu(i, kNumTargetParams + i) = -j * a * xi * d.q(i);
        }
        const Eigen::MatrixXd fim = (dmu.adjoint() * dmu).real() / noise.sigma_sq;
        sum += fim;
        sum_sq += fim.cwiseAbs2();
    }
    const FimMatrix closed = hybrid_fim_observation(cfg, symbols, truth, noise);
    return compare(closed.matrix, sum, sum_sq, n_draws, 1e-10);
}

namespace {

struct GaussianLogPdf {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double half_logdet = 0.0;

    explicit GaussianLogPdf(const Eigen::MatrixXd& r) : llt(r) {
        half_logdet = llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    double operator()(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd w = llt.matrixL().solve(x);
        return -half_logdet - 0.5 * w.squaredNorm();
    }
};

} // namespace

MomentCheck prior_fim_mc(const OscillatorModel& osc, const SampleTimeGrid& grid, double delay_s,
                         std::size_t n_draws, std::uint64_t seed, double tau_step_s) {
    JitterPolicy none;
    none.enabled = false;
    const GaussianLogPdf at(build_covariance(osc, grid, delay_s, none).matrix);
    const GaussianLogPdf up(build_covariance(osc, grid, delay_s + tau_step_s, none).matrix);
    const GaussianLogPdf down(build_covariance(osc, grid, delay_s - tau_step_s, none).matrix);
    const Eigen::Index nm = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index p = nm + kNumTargetParams;
    const double hx = 1e-6;

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd score(p);
    for (std::size_t k = 0; k < n_draws; ++k) {
        const PnRealization pn = sample_pn_exact(osc, grid, delay_s, derive_seed(seed, k));
        score.setZero();
        score(kTau) = (up(pn.xi) - down(pn.xi)) / (2.0 * tau_step_s);
        Eigen::VectorXd x = pn.xi;
        for (Eigen::Index i = 0; i < nm; ++i) {
            x(i) = pn.xi(i) + hx;
            const double fp = at(x);
            x(i) = pn.xi(i) - hx;
            const double fm = at(x);
            x(i) = pn.xi(i);
            score(kNumTargetParams + i) = (fp - fm) / (2.0 * hx);
        }
        const Eigen::MatrixXd outer = score * score.transpose();
        sum += outer;
        sum_sq += outer.cwiseAbs2();
    }
    const FimMatrix closed = hybrid_fim_prior(osc, grid, delay_s);
    return compare(closed.matrix, sum, sum_sq, n_draws, 0.0);
}

namespace {

struct ParamSteps {
    std::array<double, 4> h;
};

ParamSteps steps_for(const OfdmConfig& cfg, cd gain, double frac) {
    const double g = std::max(std::abs(gain), 1e-300);
    return {{frac * cfg.delay_cell_s(), frac * cfg.doppler_cell(), frac * g, frac * g}};
}

CVector mean_at(const OfdmConfig& cfg, const SymbolGrid& symbols, const std::array<double, 4>& eta) {
    return cd(eta[2], eta[3]) * synthesize_q(cfg, symbols, eta[0], eta[1]);
}

std::array<double, 4> shifted(std::array<double, 4> eta, int i, double di, int j = -1,
                              double dj = 0.0) {
    eta[static_cast<std::size_t>(i)] += di;
    if (j >= 0) eta[static_cast<std::size_t>(j)] += dj;
    return eta;
}

Eigen::MatrixXcd fd_jacobian(const OfdmConfig& cfg, const SymbolGrid& symbols,
                             const std::array<double, 4>& eta, const ParamSteps& st) {
    const Eigen::Index nm = static_cast<Eigen::Index>(cfg.frame_size());
    Eigen::MatrixXcd dmu(nm, 4);
    for (int i = 0; i < 4; ++i) {
        const double h = st.h[static_cast<std::size_t>(i)];
        dmu.col(i) = (mean_at(cfg, symbols, shifted(eta, i, h)) -
                      mean_at(cfg, symbols, shifted(eta, i, -h))) /
                     (2.0 * h);
    }
    return dmu;
}

} // namespace

Eigen::Matrix4d fd_deterministic_fim(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                     const TargetTruth& truth, const NoiseModel& noise) {
    const std::array<double, 4> eta{truth.delay_s, truth.normalized_doppler, truth.gain.real(),
                                    truth.gain.imag()};
    const Eigen::MatrixXcd dmu = fd_jacobian(cfg, symbols, eta, steps_for(cfg, truth.gain, 1e-5));
    return (dmu.adjoint() * dmu).real() / noise.sigma_sq;
}

std::pair<Eigen::Matrix4d, Eigen::Matrix4d> fd_mcrb_ab(const OfdmConfig& cfg,
                                                        const SymbolGrid& symbols,
                                                        const CVector& true_mean,
                                                        const NoiseModel& noise,
                                                        const PseudoTrueParams& pseudo) {
    const std::array<double, 4> eta{pseudo.delay_s, pseudo.normalized_doppler,
                                    pseudo.gain.real(), pseudo.gain.imag()};
    const double s2 = noise.sigma_sq;
    auto expected_loglik = [&](const std::array<double, 4>& e) {
        return -(true_mean - mean_at(cfg, symbols, e)).squaredNorm() / (2.0 * s2);
    };

    const ParamSteps wide = steps_for(cfg, pseudo.gain, 1e-3);
    const double f0 = expected_loglik(eta);
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i) {
        const double hi = wide.h[static_cast<std::size_t>(i)];
        a(i, i) = (expected_loglik(shifted(eta, i, hi)) - 2.0 * f0 +
                   expected_loglik(shifted(eta, i, -hi))) /
                  (hi * hi);
        for (int j = 0; j < i; ++j) {
            const double hj = wide.h[static_cast<std::size_t>(j)];
            a(i, j) = a(j, i) = (expected_loglik(shifted(eta, i, hi, j, hj)) -
                                 expected_loglik(shifted(eta, i, hi, j, -hj)) -
                                 expected_loglik(shifted(eta, i, -hi, j, hj)) +
                                 expected_loglik(shifted(eta, i, -hi, j, -hj))) /
                                (4.0 * hi * hj);
        }
    }

    const ParamSteps fine = steps_for(cfg, pseudo.gain, 1e-5);
    Eigen::Vector4d grad;
    for (int i = 0; i < 4; ++i) {
        const double h = fine.h[static_cast<std::size_t>(i)];
        grad(i) = (expected_loglik(shifted(eta, i, h)) - expected_loglik(shifted(eta, i, -h))) /
                  (2.0 * h);
    }
    const Eigen::MatrixXcd dmu = fd_jacobian(cfg, symbols, eta, fine);
    const Eigen::Matrix4d b = grad * grad.transpose() + Eigen::Matrix4d((dmu.adjoint() * dmu).real() / s2);
    return {a, b};
}

} // namespace pnbound::oracles
