#include "pnbound/ofdm_config.hpp"

#include <cmath>
#include <string>

#include "pnbound/constants.hpp"
#include "pnbound/errors.hpp"

namespace pnbound {

void OfdmConfig::validate() const {
    if (num_subcarriers == 0 || num_symbols == 0)
        throw ModelValidityError("OFDM frame needs at least one subcarrier and one symbol");
    if (!(carrier_freq_hz > 0.0) || !std::isfinite(carrier_freq_hz))
        throw ModelValidityError("carrier frequency must be positive");
    if (!(subcarrier_spacing_hz > 0.0) || !std::isfinite(subcarrier_spacing_hz))
        throw ModelValidityError("subcarrier spacing must be positive");
    if (!(cp_duration_s > 0.0) || !std::isfinite(cp_duration_s))
        throw ModelValidityError("cyclic prefix duration must be positive");
}

double TargetTruth::range_m() const { return 0.5 * kSpeedOfLight * delay_s; }
double TargetTruth::velocity_mps() const { return 0.5 * kSpeedOfLight * normalized_doppler; }

TargetTruth TargetTruth::from_range_velocity(double range_m, double velocity_mps,
                                             std::complex<double> gain) {
    return {2.0 * range_m / kSpeedOfLight, 2.0 * velocity_mps / kSpeedOfLight, gain};
}

void TargetTruth::validate() const {
    if (!(delay_s >= 0.0) || !std::isfinite(delay_s))
        throw ModelValidityError("target delay must be finite and non-negative");
    if (!(std::abs(normalized_doppler) < 1.0))
        throw ModelValidityError("normalized Doppler must satisfy |nu| < 1");
}

void NoiseModel::validate() const {
    if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
        throw ModelValidityError("noise variance must be positive");
}

double snr_to_sigma_sq(double snr_linear, std::complex<double> gain) {
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("SNR must be positive, got " + std::to_string(snr_linear));
    return std::norm(gain) / (2.0 * snr_linear);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace pnbound
