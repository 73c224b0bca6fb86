#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "pnbound/ofdm_config.hpp"
#include "pnbound/ofdm_frame.hpp"

namespace fixtures {

inline pnbound::OfdmConfig frame(std::size_t n, std::size_t m) {
    pnbound::OfdmConfig cfg;
    cfg.num_subcarriers = n;
    cfg.num_symbols = m;
    return cfg;
}

// R = 50 m, v = 20 m/s.
inline pnbound::TargetTruth reference_target(std::complex<double> gain = {1.0, 0.0}) {
    return pnbound::TargetTruth::from_range_velocity(50.0, 20.0, gain);
}

inline pnbound::NoiseModel at_snr_db(double snr_db, std::complex<double> gain = {1.0, 0.0}) {
    return {pnbound::snr_to_sigma_sq(pnbound::db_to_linear(snr_db), gain)};
}

template <class A, class B>
double rel_diff(const A& x, const B& ref) {
    return (x - ref).norm() / ref.norm();
}

inline double rel_diff(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// Dense oracle: vec{F_N^H [X .* b c^H]} with explicit matrices.
inline pnbound::CVector dense_q(const pnbound::OfdmConfig& cfg, const Eigen::MatrixXcd& x,
                                double tau, double nu) {
    const auto n = static_cast<Eigen::Index>(cfg.num_subcarriers);
    const auto m = static_cast<Eigen::Index>(cfg.num_symbols);
    const double pi = 3.14159265358979323846;
    Eigen::MatrixXcd f(n, n);
    for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index k = 0; k < n; ++k)
            f(l, k) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * pi * double(k * l) / double(n));
    Eigen::VectorXcd b(n), c(m);
    for (Eigen::Index k = 0; k < n; ++k)
        b(k) = std::polar(1.0, -2.0 * pi * double(k) * cfg.subcarrier_spacing_hz * tau);
    for (Eigen::Index k = 0; k < m; ++k)
        c(k) = std::polar(1.0, -2.0 * pi * cfg.carrier_freq_hz * double(k) *
                                   cfg.total_symbol_duration_s() * nu);
    const Eigen::MatrixXcd y = f.adjoint() * x.cwiseProduct(b * c.adjoint());
    return Eigen::Map<const Eigen::VectorXcd>(y.data(), y.size());
}

} // namespace fixtures
