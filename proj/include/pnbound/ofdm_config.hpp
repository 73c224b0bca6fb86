#pragma once

#include <complex>
#include <cstddef>

namespace pnbound {

/// Frame geometry of one OFDM radar frame: N subcarriers by M symbols.
struct OfdmConfig {
    double carrier_freq_hz = 28e9;
    double subcarrier_spacing_hz = 120e3;
    std::size_t num_subcarriers = 256;
    std::size_t num_symbols = 10;
    double cp_duration_s = 0.58e-6;

    double elementary_duration_s() const { return 1.0 / subcarrier_spacing_hz; }
    double total_symbol_duration_s() const { return cp_duration_s + elementary_duration_s(); }
    double sample_interval_s() const {
        return elementary_duration_s() / static_cast<double>(num_subcarriers);
    }
    double bandwidth_hz() const {
        return static_cast<double>(num_subcarriers) * subcarrier_spacing_hz;
    }
    std::size_t frame_size() const { return num_subcarriers * num_symbols; }

    /// One delay resolution cell, 1/B.
    double delay_cell_s() const { return 1.0 / bandwidth_hz(); }
    /// One Doppler resolution cell, 1/(fc M Tsym), in normalized-Doppler units.
    double doppler_cell() const {
        return 1.0 / (carrier_freq_hz * static_cast<double>(num_symbols) *
                      total_symbol_duration_s());
    }

    /// Throws ModelValidityError on non-positive durations or empty frames.
    void validate() const;

    /// 5G NR FR2 numerology: 28 GHz, 120 kHz spacing, 256 x 10, 0.58 us CP.
    static OfdmConfig nr_fr2() { return OfdmConfig{}; }
};

/// Ground-truth single-target parameters.
struct TargetTruth {
    double delay_s = 0.0;
    double normalized_doppler = 0.0;
    std::complex<double> gain{1.0, 0.0};

    double range_m() const;
    double velocity_mps() const;
    static TargetTruth from_range_velocity(double range_m, double velocity_mps,
                                           std::complex<double> gain = {1.0, 0.0});
    void validate() const;
};

/// sigma_sq is the per-real-dimension variance; complex entries carry 2 sigma_sq.
struct NoiseModel {
    double sigma_sq = 0.5;
    void validate() const;
};

double snr_to_sigma_sq(double snr_linear, std::complex<double> gain);
double db_to_linear(double db);

} // namespace pnbound
