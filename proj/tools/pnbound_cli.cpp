// pnbound: sweep driver for the PN range/velocity bounds.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "monte_carlo.hpp"
#include "pnbound/errors.hpp"
#include "pnbound/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

using namespace pnbound;

struct Line {
    bool ok;
    std::string text;
};

void report(const Line& l) { std::printf("%s  %s\n", l.ok ? "PASS" : "FAIL", l.text.c_str()); }

OfdmConfig scaled(std::size_t n, std::size_t m) {
    OfdmConfig cfg;
    cfg.num_subcarriers = n;
    cfg.num_symbols = m;
    return cfg;
}

int run_validate(std::uint64_t seed) {
    bool all = true;
    auto emit = [&](bool ok, const std::string& text) {
        report({ok, text});
        all = all && ok;
    };
    const TargetTruth truth = TargetTruth::from_range_velocity(50.0, 20.0);
    const double tau = truth.delay_s;
    char buf[256];

    {
        const SampleTimeGrid grid(scaled(8, 2));
        for (const auto& osc : {OscillatorModel::fro(100e3), OscillatorModel::pll(100e3, 1e6)}) {
            const auto c = oracles::pn_covariance_mc(osc, grid, tau, 20000, seed);
            std::snprintf(buf, sizeof buf, "PN covariance (%s, exact path, 20000 draws): max z %.2f",
                          to_string(osc.kind), c.max_z);
            emit(c.within(3.0), buf);
            const auto f = oracles::pn_covariance_mc(osc, grid, tau, 20000, seed + 1,
                                                     PnMethod::CovarianceFactor);
            std::snprintf(buf, sizeof buf, "PN covariance (%s, factor, 20000 draws): max z %.2f",
                          to_string(osc.kind), f.max_z);
            emit(f.within(3.0), buf);
            const double ks = oracles::sampler_marginal_ks_ratio(osc, grid, tau, 20000, seed + 2);
            std::snprintf(buf, sizeof buf, "sampler marginals KS (%s): D / D_crit(1%%) = %.3f",
                          to_string(osc.kind), ks);
            emit(ks <= 1.0, buf);
        }
    }
    {
        const OfdmConfig cfg = scaled(4, 2);
        const SymbolGrid sym = SymbolGrid::qpsk(cfg, seed);
        const NoiseModel noise{snr_to_sigma_sq(db_to_linear(20.0), truth.gain)};
        const auto osc = OscillatorModel::fro(100e3);
        const auto o = oracles::observation_fim_mc(cfg, sym, truth, noise, osc, 200, seed);
        std::snprintf(buf, sizeof buf, "observation FIM E_xi (200 draws): max z %.2f", o.max_z);
        emit(o.within(3.0), buf);
        const auto p = oracles::prior_fim_mc(osc, SampleTimeGrid(cfg), tau, 5000, seed);
        std::snprintf(buf, sizeof buf, "prior FIM score outer product (5000 draws): max z %.2f",
                      p.max_z);
        emit(p.within(3.0), buf);
    }
    return all ? 0 : kExitNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Range/velocity accuracy bounds for OFDM radar under oscillator phase noise"};
    app.set_version_flag("--version", std::string(pnbound::kToolVersion));
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", families;
    std::uint64_t seed = 0;
    int jobs = 0;

    auto* sweep = app.add_subcommand("sweep", "Evaluate the requested bounds along one axis");
    sweep->add_option("--config", config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
    sweep->add_option("--out", out_path, "Output file; stdout if omitted");
    sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = sweep->add_option("--seed", seed, "Override mc.seed");
    sweep->add_option("--families", families, "Comma list of crb_free,crb,lb,ml");
    sweep->add_option("--jobs", jobs, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

    std::uint64_t validate_seed = 1;
    auto* validate = app.add_subcommand("validate", "Run the slow Monte-Carlo oracles");
    validate->add_option("--seed", validate_seed, "Master seed");

    std::string show_path;
    auto* show = app.add_subcommand("show-config", "Print the resolved configuration");
    show->add_option("--config", show_path, "Config file")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*show) {
            const SweepSpec spec = show_path.empty() ? SweepSpec{} : load_config(show_path);
            std::cout << to_config_text(spec);
            return 0;
        }
        if (*validate) return run_validate(validate_seed);

        SweepSpec spec;
        try {
            spec = config_path.empty() ? SweepSpec{} : load_config(config_path);
            if (*seed_opt) spec.seed = seed;
            if (!families.empty()) spec.families = parse_families(families);
            spec.validate();
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const ModelValidityError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
        if (jobs > 0) set_num_threads(jobs);

        const auto rows = run_sweep(spec);
        const OutputFormat fmt = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
        if (out_path.empty()) {
            std::cout << (fmt == OutputFormat::Csv ? render_csv(rows, spec.families)
                                                   : render_json(rows, spec));
        } else {
            emit_results(rows, fmt, out_path, spec);
            std::ofstream side(out_path + ".config");
            side << "# config_hash = " << config_hash(spec) << "\n"
                 << "# tool_version = " << kToolVersion << "\n"
                 << to_config_text(spec);
        }
        for (const auto& r : rows)
            if (r.status.find("error:") != std::string::npos) {
                std::cerr << "numerical failure at axis value " << r.axis_value << ": " << r.status << "\n";
                return kExitNumerical;
            }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
