#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "pnbound/errors.hpp"
#include "pnbound/ofdm_frame.hpp"

using namespace pnbound;
using fixtures::frame;

TEST_CASE("delay steering") {
    const OfdmConfig cfg = frame(256, 10);
    CHECK((delay_steering(cfg, 0.0).array() == std::complex<double>(1.0, 0.0)).all());

    const auto b = delay_steering(cfg, 333.33e-9);
    CHECK(b(1).real() == doctest::Approx(0.9686).epsilon(1e-4));
    CHECK(b(1).imag() == doctest::Approx(-0.2487).epsilon(1e-3));
    CHECK(std::arg(b(1)) == doctest::Approx(-0.25133).epsilon(1e-4));

    const auto wrap = delay_steering(cfg, 1.0 / cfg.subcarrier_spacing_hz);
    CHECK((wrap.array() - 1.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("doppler steering") {
    const OfdmConfig cfg = frame(256, 10);
    CHECK((doppler_steering(cfg, 0.0).array() == std::complex<double>(1.0, 0.0)).all());
    const auto c = doppler_steering(cfg, 1.3333e-7);
    CHECK(c(0) == std::complex<double>(1.0, 0.0));
    // Tsym = 8.913 us here; 0.20901 rad at the rounded 8.91 us.
    CHECK(std::arg(c(1)) == doctest::Approx(-0.20901).epsilon(1e-3));
    CHECK(std::abs(c(1) - std::complex<double>(0.9782, -0.2075)) < 1e-3);
}

TEST_CASE("synthesize_q") {
    SUBCASE("single entry frame") {
        const OfdmConfig cfg = frame(1, 1);
        const SymbolGrid x(Eigen::MatrixXcd::Ones(1, 1));
        const auto q = synthesize_q(cfg, x, 123e-9, 0.0);
        REQUIRE(q.size() == 1);
        CHECK(std::abs(q(0) - 1.0) < 1e-15);
    }
    SUBCASE("matches dense matrices") {
        for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 8u, 12u, 16u})
            for (std::size_t m : {1u, 2u, 3u, 4u}) {
                const OfdmConfig cfg = frame(n, m);
                const auto x = SymbolGrid::qpsk(cfg, 11 + n * 7 + m);
                const double tau = 271.4e-9, nu = 3.1e-7;
                const auto q = synthesize_q(cfg, x, tau, nu);
                const auto ref = fixtures::dense_q(cfg, x.entries(), tau, nu);
                CHECK((q - ref).cwiseAbs().maxCoeff() < 1e-12);
            }
    }
    SUBCASE("norm equals symbol energy") {
        const OfdmConfig cfg = frame(64, 8);
        const auto x = SymbolGrid::qpsk(cfg, 5);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < 20; ++k) {
            const auto q = synthesize_q(cfg, x, 1e-6 * (u(rng) + 1.0), 1e-6 * u(rng));
            CHECK(fixtures::rel_diff(q.squaredNorm(), x.squared_frobenius()) < 1e-12);
        }
    }
    SUBCASE("delay ambiguity") {
        const OfdmConfig cfg = frame(16, 4);
        const auto x = SymbolGrid::qpsk(cfg, 2);
        const auto a = synthesize_q(cfg, x, 100e-9, 2e-7);
        const auto b = synthesize_q(cfg, x, 100e-9 + 1.0 / cfg.subcarrier_spacing_hz, 2e-7);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("dimension mismatch") {
        const auto x = SymbolGrid::qpsk(4, 2, 1);
        CHECK_THROWS_AS(synthesize_q(frame(8, 2), x, 0.0, 0.0), DimensionError);
    }
}

TEST_CASE("q derivatives against finite differences") {
    const OfdmConfig cfg = frame(16, 4);
    const auto x = SymbolGrid::qpsk(cfg, 3);
    const double tau = 333.33e-9, nu = 1.3333e-7;
    const auto d = q_derivatives(cfg, x, tau, nu, 2);
    const double ht = 1e-12, hn = 1e-12;
    const CVector fd_t = (synthesize_q(cfg, x, tau + ht, nu) - synthesize_q(cfg, x, tau - ht, nu)) / (2 * ht);
    const CVector fd_n = (synthesize_q(cfg, x, tau, nu + hn) - synthesize_q(cfg, x, tau, nu - hn)) / (2 * hn);
    CHECK(fixtures::rel_diff(fd_t, d.d_tau) < 1e-4);
    CHECK(fixtures::rel_diff(fd_n, d.d_nu) < 1e-4);

    const double h2t = 1e-11, h2n = 1e-11;
    auto first = [&](double t, double v) { return q_derivatives(cfg, x, t, v, 1); };
    const CVector fd_tt = (first(tau + h2t, nu).d_tau - first(tau - h2t, nu).d_tau) / (2 * h2t);
    const CVector fd_nn = (first(tau, nu + h2n).d_nu - first(tau, nu - h2n).d_nu) / (2 * h2n);
    const CVector fd_tn = (first(tau, nu + h2n).d_tau - first(tau, nu - h2n).d_tau) / (2 * h2n);
    const CVector fd_nt = (first(tau + h2t, nu).d_nu - first(tau - h2t, nu).d_nu) / (2 * h2t);
    CHECK(fixtures::rel_diff(fd_tt, d.d_tau_tau) < 1e-4);
    CHECK(fixtures::rel_diff(fd_nn, d.d_nu_nu) < 1e-4);
    CHECK(fixtures::rel_diff(fd_tn, d.d_tau_nu) < 1e-4);
    CHECK(fixtures::rel_diff(fd_nt, d.d_tau_nu) < 1e-4);
    CHECK(first(tau, nu).d_tau_tau.size() == 0);
}

TEST_CASE("q derivative vanishes in delay for one subcarrier") {
    const OfdmConfig cfg = frame(1, 4);
    const auto x = SymbolGrid::qpsk(cfg, 3);
    const auto d = q_derivatives(cfg, x, 100e-9, 2e-7, 1);
    CHECK(d.d_tau.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("snr conversion") {
    CHECK(snr_to_sigma_sq(100.0, 1.0) == doctest::Approx(0.005));
    CHECK(snr_to_sigma_sq(1.0, 1.0) == doctest::Approx(0.5));
    CHECK(snr_to_sigma_sq(1.0, 2.0) == doctest::Approx(2.0));
    CHECK(snr_to_sigma_sq(db_to_linear(20.0), 1.0) == doctest::Approx(0.005));
    CHECK_THROWS(snr_to_sigma_sq(0.0, 1.0));
    CHECK_THROWS(snr_to_sigma_sq(-1.0, 1.0));
}

TEST_CASE("observation synthesis") {
    const OfdmConfig cfg = frame(16, 4);
    const auto x = SymbolGrid::qpsk(cfg, 4);
    const TargetTruth truth = fixtures::reference_target({0.6, -0.8});

    SUBCASE("vanishing noise") {
        const auto y = synthesize_observation(cfg, x, truth, {1e-300}, nullptr, 3);
        const CVector ref = truth.gain * synthesize_q(cfg, x, truth.delay_s, truth.normalized_doppler);
        CHECK((y - ref).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("zero PN is bit identical to the PN-free path") {
        const auto pn = PnRealization::zeros(cfg.frame_size());
        const auto a = synthesize_observation(cfg, x, truth, {0.1}, nullptr, 77);
        const auto b = synthesize_observation(cfg, x, truth, {0.1}, &pn, 77);
        CHECK((a.array() == b.array()).all());
    }
    SUBCASE("noise power") {
        const NoiseModel noise{0.05};
        Eigen::VectorXd xi = Eigen::VectorXd::LinSpaced(64, -1.0, 1.0);
        const PnRealization pn{xi, 0, PnMethod::ExactPath};
        const CVector mean = observation_mean(cfg, x, truth, &pn);
        double acc = 0.0;
        for (int k = 0; k < 1000; ++k)
            acc += (synthesize_observation(cfg, x, truth, noise, &pn, 1000 + k) - mean).squaredNorm() /
                   double(cfg.frame_size());
        CHECK(acc / 1000.0 == doctest::Approx(2.0 * noise.sigma_sq).epsilon(0.05));
    }
    SUBCASE("model validity") {
        TargetTruth far = truth;
        far.delay_s = 1.1 * cfg.cp_duration_s;
        CHECK_THROWS_AS(synthesize_observation(cfg, x, far, {0.1}, nullptr, 1), ModelValidityError);
        TargetTruth fast = truth;
        fast.normalized_doppler = 1.0 / 16.0;
        CHECK_THROWS_AS(synthesize_observation(cfg, x, fast, {0.1}, nullptr, 1), ModelValidityError);
        const auto short_pn = PnRealization::zeros(3);
        CHECK_THROWS_AS(synthesize_observation(cfg, x, truth, {0.1}, &short_pn, 1), DimensionError);
    }
}

TEST_CASE("qpsk grid") {
    const auto a = SymbolGrid::qpsk(8, 3, 42);
    const auto b = SymbolGrid::qpsk(8, 3, 42);
    CHECK(a.entries() == b.entries());
    CHECK(a.unit_modulus());
    CHECK(a.squared_frobenius() == doctest::Approx(24.0));
}
