#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pnbound/estimator.hpp"

namespace pnbound {

enum class SweepAxis { Snr, TargetRange, F3db, Floop };

const char* to_string(SweepAxis axis);

// Requested result families; bit flags.
enum Family : unsigned {
    kFamilyCrbFree = 1u << 0,
    kFamilyCrb = 1u << 1,
    kFamilyLb = 1u << 2,
    kFamilyMl = 1u << 3,
};
inline constexpr unsigned kDefaultFamilies = kFamilyCrbFree | kFamilyCrb | kFamilyLb;

/// Parses "crb_free,crb,lb,ml". Throws ConfigError on unknown names.
unsigned parse_families(const std::string& list);
std::string families_to_string(unsigned families);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Snr;
    std::vector<double> values{0, 10, 20, 30, 40, 50, 60};

    OfdmConfig ofdm{};
    double range_m = 50.0;
    double velocity_mps = 20.0;
    std::complex<double> gain{1.0, 0.0};
    OscillatorModel osc = OscillatorModel::fro(100e3);
    double snr_db = 20.0;

    std::size_t n_pn_realizations = 100;
    std::uint64_t seed = 1;
    std::uint64_t symbol_seed = 7;
    double search_window_cells = 3.0;
    std::size_t campaign_trials = 200;
    unsigned families = kDefaultFamilies;
    bool include_delay_prior = true;  // tau-tau entry of the PN prior information

    /// Throws ConfigError / ModelValidityError.
    void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys throw
/// ConfigError listing all of them.
SweepSpec parse_config(const std::string& text);
SweepSpec load_config(const std::filesystem::path& path);

/// Resolved configuration as `key = value` lines, every key present.
std::string to_config_text(const SweepSpec& spec);

/// FNV-1a 64 of to_config_text(spec), hex.
std::string config_hash(const SweepSpec& spec);

struct PointContext {
    OfdmConfig ofdm;
    TargetTruth truth;
    OscillatorModel osc;
    NoiseModel noise;
};

/// Fixed context with the axis value substituted.
PointContext point_context(const SweepSpec& spec, double axis_value);

struct ResultRow {
    double axis_value = 0.0;
    std::optional<double> crb_free_range_m, crb_free_vel_mps;
    std::optional<double> crb_range_m, crb_vel_mps;
    std::optional<double> lb_range_m, lb_vel_mps;
    std::optional<double> ml_range_m, ml_vel_mps;
    std::size_t n_real = 0;
    std::size_t n_excluded = 0;
    std::string status = "ok";
    double wall_time_s = 0.0;
};

std::vector<ResultRow> run_sweep(const SweepSpec& spec, Exec exec = Exec::Parallel);

enum class OutputFormat { Csv, Json };

std::vector<std::string> csv_columns(unsigned families);
std::string render_csv(const std::vector<ResultRow>& rows, unsigned families);
std::string render_json(const std::vector<ResultRow>& rows, const SweepSpec& spec);

/// Writes rows to path. Throws std::runtime_error for empty rows or an unwritable path.
void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                  const std::filesystem::path& path, const SweepSpec& spec);

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace pnbound
