#include "pnbound/bounds_crb.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "pnbound/constants.hpp"
#include "pnbound/errors.hpp"

namespace pnbound {

using cd = std::complex<double>;

const char* parameter_name(Eigen::Index index) {
    switch (index) {
    case kTau: return "tau";
    case kNu: return "nu";
    case kGainRe: return "alpha_R";
    case kGainIm: return "alpha_I";
    default: return "xi";
    }
}

const char* to_string(BoundFamily family) {
    switch (family) {
    case BoundFamily::CrbPnFree: return "crb_pn_free";
    case BoundFamily::CrbHybrid: return "crb_hybrid";
    case BoundFamily::Mcrb: return "mcrb";
    case BoundFamily::Lb: return "lb";
    case BoundFamily::LbAveraged: return "lb_averaged";
    }
    return "?";
}

BoundReport BoundReport::from_variances(BoundFamily family, double delay_var_s2,
                                        double doppler_var) {
    BoundReport r;
    r.family = family;
    r.delay_var_s2 = delay_var_s2;
    r.doppler_var = doppler_var;
    r.range_rmse_m = 0.5 * kSpeedOfLight * std::sqrt(std::max(delay_var_s2, 0.0));
    r.velocity_rmse_mps = 0.5 * kSpeedOfLight * std::sqrt(std::max(doppler_var, 0.0));
    return r;
}

namespace {

// Columns d_i = d(alpha q)/d eta_i for eta = [tau, nu, alpha_R, alpha_I].
Eigen::MatrixXcd target_jacobian(const QDerivatives& d, cd alpha) {
    Eigen::MatrixXcd jac(d.q.size(), kNumTargetParams);
    jac.col(kTau) = alpha * d.d_tau;
    jac.col(kNu) = alpha * d.d_nu;
    jac.col(kGainRe) = d.q;
    jac.col(kGainIm) = cd(0.0, 1.0) * d.q;
    return jac;
}

std::string null_direction(const Eigen::MatrixXd& scaled) {
    if (scaled.rows() > 64) return "unknown";
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled);
    Eigen::Index idx = 0;
    es.eigenvectors().col(0).cwiseAbs().maxCoeff(&idx);
    if (idx < kNumTargetParams) return parameter_name(idx);
    return "xi_" + std::to_string(idx - kNumTargetParams);
}

[[noreturn]] void throw_singular(const Eigen::MatrixXd& scaled, const std::string& why) {
    const std::string dir = null_direction(scaled);
    throw UnidentifiableError("singular Fisher information (" + why + "); null-space direction " + dir,
                              dir);
}

} // namespace

std::pair<double, double> delay_doppler_inverse_diagonal(const Eigen::MatrixXd& fim) {
    const Eigen::Index n = fim.rows();
    Eigen::VectorXd d = fim.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(d(i) > 0.0)) {
            const std::string dir = i < kNumTargetParams ? parameter_name(i)
                                                         : "xi_" + std::to_string(i - kNumTargetParams);
            throw UnidentifiableError("singular Fisher information (zero diagonal); null-space direction " + dir,
                                      dir);
        }
    }
    const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = s.asDiagonal() * fim * s.asDiagonal();

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
    rhs(kTau, 0) = 1.0;
    rhs(kNu, 1) = 1.0;

    Eigen::MatrixXd x;
    Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-15) {
        x = llt.solve(rhs);
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
        if (ldlt.info() != Eigen::Success || ldlt.rcond() <= 1e-15 || !ldlt.isPositive())
            throw_singular(scaled, "factorization failed");
        x = ldlt.solve(rhs);
    }
    const double vt = x(kTau, 0) * s(kTau) * s(kTau);
    const double vn = x(kNu, 1) * s(kNu) * s(kNu);
    if (!(vt > 0.0) || !(vn > 0.0) || !std::isfinite(vt) || !std::isfinite(vn))
        throw_singular(scaled, "non-positive inverse diagonal");
    return {vt, vn};
}

Eigen::Matrix4d invert_target_fim(const Eigen::Matrix4d& fim) {
    const Eigen::Vector4d d = fim.diagonal();
    if (!(d.array() > 0.0).all()) {
        Eigen::Index i = 0;
        d.minCoeff(&i);
        throw UnidentifiableError(std::string("singular 4x4 matrix; null-space direction ") +
                                      parameter_name(i),
                                  parameter_name(i));
    }
    const Eigen::Vector4d s = d.cwiseSqrt().cwiseInverse();
    const Eigen::Matrix4d scaled = s.asDiagonal() * fim * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(scaled);
    if (es.eigenvalues()(0) <= 1e-13 * es.eigenvalues()(3)) throw_singular(scaled, "rank deficient");
    const Eigen::Matrix4d inv_scaled = es.eigenvectors() *
                                       es.eigenvalues().cwiseInverse().asDiagonal() *
                                       es.eigenvectors().transpose();
    return s.asDiagonal() * inv_scaled * s.asDiagonal();
}

FimMatrix deterministic_fim(const OfdmConfig& cfg, const SymbolGrid& symbols,
                            const TargetTruth& truth, const NoiseModel& noise) {
    noise.validate();
    const QDerivatives d = q_derivatives(cfg, symbols, truth.delay_s, truth.normalized_doppler, 1);
    const Eigen::MatrixXcd jac = target_jacobian(d, truth.gain);
    FimMatrix fim;
    fim.matrix = (jac.adjoint() * jac).real() / noise.sigma_sq;
    return fim;
}

BoundReport deterministic_crb(const FimMatrix& fim) {
    if (fim.size() != kNumTargetParams) throw DimensionError("deterministic FIM must be 4x4");
    const Eigen::Matrix4d j = fim.matrix;
    const Eigen::Vector4d d = j.diagonal();
    if ((d.array() > 0.0).all()) {
        const Eigen::Vector4d s = d.cwiseSqrt().cwiseInverse();
        const Eigen::Matrix4d scaled = s.asDiagonal() * j * s.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(scaled);
        if (es.eigenvalues()(0) <= 1e-12 * es.eigenvalues()(3)) throw_singular(scaled, "rank deficient");
    }
    const auto [vt, vn] = delay_doppler_inverse_diagonal(fim.matrix);
    return BoundReport::from_variances(BoundFamily::CrbPnFree, vt, vn);
}

FimMatrix hybrid_fim_observation(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                 const TargetTruth& truth, const NoiseModel& noise) {
    noise.validate();
    const QDerivatives d = q_derivatives(cfg, symbols, truth.delay_s, truth.normalized_doppler, 1);
    const Eigen::MatrixXcd jac = target_jacobian(d, truth.gain);
    const Eigen::Index nm = d.q.size();
    const double inv_s2 = 1.0 / noise.sigma_sq;
    const double g2 = std::norm(truth.gain);
    const double ar = truth.gain.real();
    const double ai = truth.gain.imag();

    FimMatrix fim;
    fim.matrix = Eigen::MatrixXd::Zero(nm + kNumTargetParams, nm + kNumTargetParams);
    fim.matrix.topLeftCorner<4, 4>() = (jac.adjoint() * jac).real() / noise.sigma_sq;
    const cd j(0.0, 1.0);
    for (Eigen::Index k = 0; k < nm; ++k) {
        const Eigen::Index r = kNumTargetParams + k;
        const double q2 = std::norm(d.q(k));
        const double xt = (j * g2 * std::conj(d.q(k)) * d.d_tau(k)).real() * inv_s2;
        const double xn = (j * g2 * std::conj(d.q(k)) * d.d_nu(k)).real() * inv_s2;
        fim.matrix(r, r) = g2 * q2 * inv_s2;
        fim.matrix(r, kTau) = fim.matrix(kTau, r) = xt;
        fim.matrix(r, kNu) = fim.matrix(kNu, r) = xn;
        fim.matrix(r, kGainRe) = fim.matrix(kGainRe, r) = ai * q2 * inv_s2;
        fim.matrix(r, kGainIm) = fim.matrix(kGainIm, r) = -ar * q2 * inv_s2;
    }
    return fim;
}

FimMatrix hybrid_fim_prior(const OscillatorModel& osc, const SampleTimeGrid& grid, double delay_s,
                           Exec exec, bool include_delay_information) {
    if (pn_variance(osc, delay_s) == 0.0)
        throw DegenerateCovarianceError("PN prior is degenerate at zero delay");
    const PnCovariance cov = build_covariance(osc, grid, delay_s, {}, exec);
    const Eigen::Index nm = cov.matrix.rows();
    const auto lower = cov.lower.triangularView<Eigen::Lower>();

    double tau_info = 0.0;
    if (include_delay_information) {
        const Eigen::MatrixXd dr = covariance_delay_deriv(osc, grid, delay_s, exec);
        // S = L^-1 R' L^-T is symmetric and tr[(R^-1 R')^2] = ||S||_F^2.
        Eigen::MatrixXd w = lower.solve(dr);
        Eigen::MatrixXd s = lower.solve(w.transpose());
        tau_info = 0.5 * s.squaredNorm();
    }

    Eigen::MatrixXd linv = lower.solve(Eigen::MatrixXd::Identity(nm, nm));
    FimMatrix fim;
    fim.matrix = Eigen::MatrixXd::Zero(nm + kNumTargetParams, nm + kNumTargetParams);
    Eigen::MatrixXd rinv = linv.transpose() * linv;
    fim.matrix.bottomRightCorner(nm, nm) = 0.5 * (rinv + rinv.transpose());
    fim.matrix(kTau, kTau) = tau_info;
    return fim;
}

BoundReport hybrid_crb(const FimMatrix& observation, const FimMatrix& prior) {
    if (observation.size() != prior.size())
        throw DimensionError("observation and prior FIMs differ in size");
    const Eigen::MatrixXd total = observation.matrix + prior.matrix;
    const auto [vt, vn] = delay_doppler_inverse_diagonal(total);
    return BoundReport::from_variances(BoundFamily::CrbHybrid, vt, vn);
}

} // namespace pnbound
