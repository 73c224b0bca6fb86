#include "pnbound/peak_search.hpp"

#include <cmath>

#include "fft.hpp"
#include "pnbound/constants.hpp"

namespace pnbound {

using cd = std::complex<double>;

DelayDopplerCorrelator::DelayDopplerCorrelator(const OfdmConfig& cfg, const SymbolGrid& symbols,
                                               const CVector& v)
    : cfg_(cfg) {
    symbols.check_matches(cfg);
    const auto n = static_cast<Eigen::Index>(cfg.num_subcarriers);
    const auto m = static_cast<Eigen::Index>(cfg.num_symbols);
    if (v.size() != n * m) throw std::invalid_argument("correlator vector length must be N*M");
    u_ = Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index k = 0; k < m; ++k) detail::dft_inplace(u_.col(k).data(), static_cast<int>(n), -1);
    u_ = (u_.conjugate() * scale).cwiseProduct(symbols.entries());
}

std::complex<double> DelayDopplerCorrelator::inner(double delay_s, double normalized_doppler) const {
    const CVector b = delay_steering(cfg_, delay_s);
    const CVector c = doppler_steering(cfg_, normalized_doppler);
    const CVector g = u_.transpose() * b;
    return c.dot(g);
}

DelayDopplerCorrelator::Local DelayDopplerCorrelator::local(double delay_s,
                                                            double normalized_doppler) const {
    const Eigen::Index n = u_.rows();
    const Eigen::Index m = u_.cols();
    const CVector b = delay_steering(cfg_, delay_s);
    const CVector c = doppler_steering(cfg_, normalized_doppler);
    CVector bt(n), btt(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const cd slope(0.0, -kTwoPi * static_cast<double>(k) * cfg_.subcarrier_spacing_hz);
        bt(k) = slope * b(k);
        btt(k) = slope * slope * b(k);
    }
    const double tsym = cfg_.total_symbol_duration_s();
    CVector cn(m), cnn(m);  // conj(c) and its nu-derivatives
    for (Eigen::Index k = 0; k < m; ++k) {
        const cd slope(0.0, kTwoPi * cfg_.carrier_freq_hz * static_cast<double>(k) * tsym);
        const cd cc = std::conj(c(k));
        cn(k) = slope * cc;
        cnn(k) = slope * slope * cc;
    }
    const CVector g = u_.transpose() * b;
    const CVector gt = u_.transpose() * bt;
    const CVector gtt = u_.transpose() * btt;
    const CVector cc = c.conjugate();

    const cd s = cc.transpose() * g;
    const cd st = cc.transpose() * gt;
    const cd sn = cn.transpose() * g;
    const cd stt = cc.transpose() * gtt;
    const cd snn = cnn.transpose() * g;
    const cd stn = cn.transpose() * gt;

    Local out;
    out.value = std::norm(s);
    out.gradient << 2.0 * (std::conj(s) * st).real(), 2.0 * (std::conj(s) * sn).real();
    out.hessian(0, 0) = 2.0 * (std::norm(st) + (std::conj(s) * stt).real());
    out.hessian(1, 1) = 2.0 * (std::norm(sn) + (std::conj(s) * snn).real());
    out.hessian(0, 1) = out.hessian(1, 0) =
        2.0 * ((std::conj(st) * sn).real() + (std::conj(s) * stn).real());
    return out;
}

Eigen::MatrixXd DelayDopplerCorrelator::objective_grid(const std::vector<double>& delays,
                                                       const std::vector<double>& dopplers) const {
    const auto nd = static_cast<Eigen::Index>(delays.size());
    const auto nv = static_cast<Eigen::Index>(dopplers.size());
    Eigen::MatrixXcd bmat(u_.rows(), nd);
    for (Eigen::Index i = 0; i < nd; ++i) bmat.col(i) = delay_steering(cfg_, delays[static_cast<std::size_t>(i)]);
    Eigen::MatrixXcd cmat(u_.cols(), nv);
    for (Eigen::Index k = 0; k < nv; ++k)
        cmat.col(k) = doppler_steering(cfg_, dopplers[static_cast<std::size_t>(k)]).conjugate();
    const Eigen::MatrixXcd g = bmat.transpose() * u_;  // nd x M
    const Eigen::MatrixXcd s = g * cmat;               // nd x nv
    return s.cwiseAbs2();
}

PeakResult refine_peak(const DelayDopplerCorrelator& corr, double delay_s, double normalized_doppler,
                       const RefineOptions& opts) {
    const double cell_t = corr.config().delay_cell_s();
    const double cell_n = corr.config().doppler_cell();

    PeakResult res;
    res.start_objective = corr.objective(delay_s, normalized_doppler);
    res.trace.push_back({"start", delay_s, normalized_doppler, res.start_objective});
    const double norm = res.start_objective > 0.0 ? res.start_objective : 1.0;

    auto neg_obj = [&](const Eigen::VectorXd& x) {
        return -corr.objective(x(0) * cell_t, x(1) * cell_n) / norm;
    };
    Eigen::VectorXd x0(2);
    x0 << delay_s / cell_t, normalized_doppler / cell_n;
    std::vector<Eigen::VectorXd> path;
    const SimplexResult sr = nelder_mead(neg_obj, x0, opts.initial_step_cells, opts.tolerance_cells,
                                         opts.max_simplex_iterations, &path);
    res.simplex_converged = sr.converged;
    res.simplex_iterations = sr.iterations;
    for (const auto& p : path)
        res.trace.push_back({"simplex", p(0) * cell_t, p(1) * cell_n, -neg_obj(p) * norm});

    Eigen::Vector2d x = sr.x;
    double fx = corr.objective(x(0) * cell_t, x(1) * cell_n);
    if (fx < res.start_objective) {
        x = x0;
        fx = res.start_objective;
    }

    // Newton polish in cell units; a step is kept only if the local model is
    // concave and the objective does not drop.
    const Eigen::Vector2d cells(cell_t, cell_n);
    for (int k = 0; k < opts.max_newton_steps; ++k) {
        const auto loc = corr.local(x(0) * cell_t, x(1) * cell_n);
        const Eigen::Vector2d g = loc.gradient.cwiseProduct(cells);
        const Eigen::Matrix2d h = cells.asDiagonal() * loc.hessian * cells.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
        if (!(es.eigenvalues()(1) < 0.0)) break;
        const Eigen::Vector2d step = -h.ldlt().solve(g);
        if (!step.allFinite() || step.cwiseAbs().maxCoeff() > 1.0) break;
        const Eigen::Vector2d xn = x + step;
        const double fn = corr.objective(xn(0) * cell_t, xn(1) * cell_n);
        if (fn < fx * (1.0 - 1e-14)) break;
        x = xn;
        fx = fn;
        ++res.newton_steps;
        res.trace.push_back({"newton", x(0) * cell_t, x(1) * cell_n, fn});
        if (step.cwiseAbs().maxCoeff() < 1e-13) break;
    }
    res.delay_s = x(0) * cell_t;
    res.normalized_doppler = x(1) * cell_n;
    res.objective = corr.objective(res.delay_s, res.normalized_doppler);
    return res;
}

} // namespace pnbound
