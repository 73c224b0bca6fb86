#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pnbound/ofdm_frame.hpp"

namespace pnbound {

/// Evaluates v^H q(tau, nu) for a fixed vector v in O(NM) per point.
/// The per-symbol FFT of v and the symbol multiplication are done once at
/// construction, so v^H q = sum_m e^{+j2pi fc m Tsym nu} sum_n u_nm e^{-j2pi n df tau}.
class DelayDopplerCorrelator {
public:
    DelayDopplerCorrelator(const OfdmConfig& cfg, const SymbolGrid& symbols, const CVector& v);

    std::complex<double> inner(double delay_s, double normalized_doppler) const;
    double objective(double delay_s, double normalized_doppler) const {
        return std::norm(inner(delay_s, normalized_doppler));
    }

    struct Local {
        double value;
        Eigen::Vector2d gradient;  // d/dtau, d/dnu
        Eigen::Matrix2d hessian;
    };
    Local local(double delay_s, double normalized_doppler) const;

    /// |v^H q|^2 on the tensor grid delays x dopplers; result(i, k) pairs delays[i], dopplers[k].
    Eigen::MatrixXd objective_grid(const std::vector<double>& delays,
                                   const std::vector<double>& dopplers) const;

    const OfdmConfig& config() const { return cfg_; }

private:
    OfdmConfig cfg_;
    Eigen::MatrixXcd u_;
};

struct RefineOptions {
    int max_simplex_iterations = 500;
    double tolerance_cells = 1e-4;
    double initial_step_cells = 0.5;
    int max_newton_steps = 12;
};

struct SearchStep {
    std::string stage;  // "coarse", "simplex", "newton"
    double delay_s;
    double normalized_doppler;
    double objective;
};

struct PeakResult {
    double delay_s = 0.0;
    double normalized_doppler = 0.0;
    double objective = 0.0;
    double start_objective = 0.0;
    bool simplex_converged = false;
    int simplex_iterations = 0;
    int newton_steps = 0;
    std::vector<SearchStep> trace;
};

/// Maximizes |v^H q|^2 from (delay, doppler): Nelder-Mead in resolution-cell
/// units, then a safeguarded Newton polish on the analytic Hessian.
PeakResult refine_peak(const DelayDopplerCorrelator& corr, double delay_s,
                       double normalized_doppler, const RefineOptions& opts = {});

/// Minimal Nelder-Mead for small dense problems. Minimizes f.
struct SimplexResult {
    Eigen::VectorXd x;
    double value;
    int iterations;
    bool converged;
};

template <class F>
SimplexResult nelder_mead(F&& f, const Eigen::VectorXd& start, double step, double x_tol,
                          int max_iterations, std::vector<Eigen::VectorXd>* best_path = nullptr);

} // namespace pnbound

#include "pnbound/detail/nelder_mead.ipp"
