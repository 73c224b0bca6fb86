#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "pnbound/errors.hpp"
#include "pnbound/estimator.hpp"

using namespace pnbound;
using fixtures::frame;

TEST_CASE("coarse periodogram equals brute force") {
    const OfdmConfig cfg = frame(8, 4);
    const auto x = SymbolGrid::qpsk(cfg, 3);
    const TargetTruth truth = fixtures::reference_target({0.2, 0.9});
    const CVector y = synthesize_observation(cfg, x, truth, {0.05}, nullptr, 4);
    const CoarseMap map = coarse_periodogram(cfg, x, y, 4);
    REQUIRE(map.delays_s.size() == 32);
    REQUIRE(map.dopplers.size() == 16);
    double worst = 0.0;
    for (std::size_t i = 0; i < map.delays_s.size(); ++i)
        for (std::size_t k = 0; k < map.dopplers.size(); ++k) {
            const double ref = std::norm(y.dot(synthesize_q(cfg, x, map.delays_s[i], map.dopplers[k])));
            worst = std::max(worst, std::abs(map.power(Eigen::Index(i), Eigen::Index(k)) - ref));
        }
    CHECK(worst <= 1e-10 * map.power.maxCoeff());
}

TEST_CASE("noiseless recovery") {
    const OfdmConfig cfg = frame(64, 8);
    const auto x = SymbolGrid::qpsk(cfg, 5);
    SUBCASE("grid aligned") {
        TargetTruth truth;
        truth.delay_s = 3.0 * cfg.delay_cell_s();
        truth.normalized_doppler = 2.0 * cfg.doppler_cell();
        truth.gain = {0.5, 0.5};
        const auto e = ml_estimate(cfg, x, observation_mean(cfg, x, truth, nullptr));
        CHECK(std::abs(e.delay_s - truth.delay_s) < 1e-4 * cfg.delay_cell_s());
        CHECK(std::abs(e.normalized_doppler - truth.normalized_doppler) < 1e-4 * cfg.doppler_cell());
        CHECK(std::abs(e.gain - truth.gain) < 1e-6);
    }
    SUBCASE("off grid") {
        const TargetTruth truth = fixtures::reference_target({-0.3, 1.1});
        const auto e = ml_estimate(cfg, x, observation_mean(cfg, x, truth, nullptr));
        CHECK(std::abs(e.delay_s - truth.delay_s) < 1e-3 * cfg.delay_cell_s());
        CHECK(std::abs(e.normalized_doppler - truth.normalized_doppler) < 1e-3 * cfg.doppler_cell());
        CHECK(e.objective_value >= e.coarse_objective_value);
        CHECK(e.refined);
    }
}

TEST_CASE("global phase invariance") {
    const OfdmConfig cfg = frame(32, 4);
    const auto x = SymbolGrid::qpsk(cfg, 8);
    const TargetTruth truth = fixtures::reference_target();
    const CVector y = synthesize_observation(cfg, x, truth, {0.01}, nullptr, 9);
    const auto rot = std::polar(1.0, 1.3);
    const auto a = ml_estimate(cfg, x, y);
    const auto b = ml_estimate(cfg, x, rot * y);
    CHECK(b.delay_s == doctest::Approx(a.delay_s).epsilon(1e-9));
    CHECK(b.normalized_doppler == doctest::Approx(a.normalized_doppler).epsilon(1e-9));
    CHECK(std::abs(b.gain - rot * a.gain) < 1e-9);
}

TEST_CASE("no peak") {
    const OfdmConfig cfg = frame(8, 2);
    const auto x = SymbolGrid::qpsk(cfg, 1);
    CHECK_THROWS_AS(ml_estimate(cfg, x, CVector::Zero(16)), NumericalError);
    CHECK_THROWS_AS(ml_estimate(cfg, x, CVector::Ones(5)), DimensionError);
}

TEST_CASE("campaign") {
    const OfdmConfig cfg = frame(32, 4);
    const auto x = SymbolGrid::qpsk(cfg, 2);
    const TargetTruth truth = fixtures::reference_target();
    const NoiseModel noise = fixtures::at_snr_db(20.0);
    const auto fro = OscillatorModel::fro(100e3);

    SUBCASE("zero trials") {
        CampaignSpec spec;
        spec.n_trials = 0;
        CHECK_THROWS_AS(rmse_campaign(cfg, x, truth, noise, std::nullopt, spec), std::invalid_argument);
    }
    SUBCASE("serial and parallel agree") {
        CampaignSpec spec;
        spec.n_trials = 16;
        spec.seed = 3;
        const auto a = rmse_campaign(cfg, x, truth, noise, fro, spec, Exec::Serial);
        const auto b = rmse_campaign(cfg, x, truth, noise, fro, spec, Exec::Parallel);
        CHECK(a.n_trials == 16);
        CHECK(a.trials.size() == 16);
        CHECK(a.range_rmse_m == b.range_rmse_m);
        CHECK(a.velocity_rmse_mps == b.velocity_rmse_mps);
        CHECK(*a.mean_pseudo_delay_s == *b.mean_pseudo_delay_s);
        for (std::size_t k = 0; k < 16; ++k) CHECK(a.trials[k].estimate.delay_s == b.trials[k].estimate.delay_s);
    }
    SUBCASE("redrawn symbols") {
        CampaignSpec spec;
        spec.n_trials = 4;
        spec.symbol_policy = SymbolPolicy::Redrawn;
        const auto r = rmse_campaign(cfg, x, truth, noise, std::nullopt, spec);
        CHECK(r.trials[0].symbol_seed != r.trials[1].symbol_seed);
        CHECK_FALSE(r.mean_pseudo_delay_s.has_value());
        CHECK(r.range_rmse_m > 0.0);
    }
}

TEST_CASE("ml mean tracks the pseudo-true mean") {
    const OfdmConfig cfg = frame(64, 8);
    const auto x = SymbolGrid::qpsk(cfg, 7);
    const TargetTruth truth = fixtures::reference_target();
    CampaignSpec spec;
    spec.n_trials = 500;
    spec.seed = 11;
    const auto r = rmse_campaign(cfg, x, truth, fixtures::at_snr_db(40.0), OscillatorModel::fro(100e3), spec);
    // Paired differences estimate - pseudo-true per trial.
    double mt = 0, mn = 0, st = 0, sn = 0;
    for (const auto& t : r.trials) {
        const double dt = t.estimate.delay_s - t.pseudo_true->delay_s;
        const double dn = t.estimate.normalized_doppler - t.pseudo_true->normalized_doppler;
        mt += dt; mn += dn; st += dt * dt; sn += dn * dn;
    }
    const double n = double(r.trials.size());
    mt /= n; mn /= n;
    const double set = std::sqrt((st / n - mt * mt) / (n - 1)), sen = std::sqrt((sn / n - mn * mn) / (n - 1));
    CHECK(std::abs(mt) <= 3 * set);
    CHECK(std::abs(mn) <= 3 * sen);
}
