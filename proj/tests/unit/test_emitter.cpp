#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "snvsim/emitter.hpp"
#include "snvsim/stats.hpp"
#include "support/oracles.hpp"

using namespace snvsim;

namespace {
const EmitterParams kDefault = EmitterParams::snv_a();
}

TEST_CASE("scattering rate: analytic anchors") {
    EmitterParams p = kDefault;
    p.natural_linewidth_mhz = 31.0;

    // no drive
    CHECK(scattering_rate(0.0, 0.0, p) == 0.0);
    CHECK(scattering_rate(123.0, 0.0, p) == 0.0);

    // R(0, s=1) = Gamma/4
    const double r0 = scattering_rate(0.0, 1.0, p);
    CHECK(r0 == doctest::Approx(4.8694686e7).epsilon(1e-5));

    // half of the on-resonance rate exactly where (2 delta / gamma)^2 = 1 + s
    for (double s : {0.3, 1.0, 4.0}) {
        const double delta = 0.5 * p.natural_linewidth_mhz * std::sqrt(1.0 + s);
        CHECK(scattering_rate(delta, s, p) ==
              doctest::Approx(0.5 * scattering_rate(0.0, s, p)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(scattering_rate(0.0, -0.1, p), std::invalid_argument);
}

TEST_CASE("scattering rate is even in delta and decreasing in |delta|") {
    double prev = scattering_rate(0.0, 2.0, kDefault);
    for (double d = 1.0; d < 200.0; d += 1.0) {
        const double r = scattering_rate(d, 2.0, kDefault);
        CHECK(r == scattering_rate(-d, 2.0, kDefault));
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("sample_counts: zero mean and calibration anchor") {
    EmitterParams p = kDefault;
    RngStream rng = derive_stream(21, 0);

    // zero rate, zero dark counts -> always zero
    EmitterParams p0 = p;
    p0.dark_count_rate_hz = 0.0;
    for (int i = 0; i < 100; ++i) CHECK(sample_counts(0.0, 500.0, p0, rng) == 0);

    // default calibration: 500 us on-resonance probe at 100 nW averages ~110.6
    const double rate = scattering_rate(0.0, p.saturation(100.0), p);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += double(sample_counts(rate, 500.0, p, rng));
    CHECK(sum / n == doctest::Approx(110.6).epsilon(0.009));  // within +-1
}

TEST_CASE("sample_counts: poisson gof at mean 5") {
    RngStream rng = derive_stream(22, 0);
    EmitterParams p = kDefault;
    p.dark_count_rate_hz = 0.0;
    // pick a rate giving mean exactly 5 over 100 us
    const double rate = 5.0 / (p.detection_efficiency * 100e-6);
    std::vector<std::int64_t> xs(100000);
    for (auto& x : xs) x = sample_counts(rate, 100.0, p, rng);
    CHECK(poisson_gof_pvalue(xs, 5.0) > 0.01);
}

TEST_CASE("sample_counts: fano factor within 2% for means 1..500") {
    EmitterParams p = kDefault;
    p.dark_count_rate_hz = 0.0;
    for (double mean : {1.0, 10.0, 110.0, 500.0}) {
        RngStream rng = derive_stream(23, std::uint64_t(mean));
        const double rate = mean / (p.detection_efficiency * 100e-6);
        std::vector<std::int64_t> xs(100000);
        for (auto& x : xs) x = sample_counts(rate, 100.0, p, rng);
        CHECK(std::abs(fano_factor(xs) - 1.0) < 0.02);
    }
}

TEST_CASE("probe_with_ionization: yield 0 is distributionally a plain probe") {
    EmitterParams p = kDefault;
    p.ionization_yield = 0.0;
    RngStream rng = derive_stream(24, 0);
    const DriveField d = DriveField::cw(p, 100.0, 0.0);
    const double rate = scattering_rate(0.0, p.saturation(100.0), p);

    std::vector<double> a, b;
    EmitterState st = EmitterState::bright(0.0);
    for (int i = 0; i < 100000; ++i) {
        const ProbeResult r = probe_with_ionization(st, d, 500.0, p, rng);
        REQUIRE(st.charge == Charge::Bright);
        REQUIRE(!r.ion_time_us);
        a.push_back(double(r.counts));
        b.push_back(double(sample_counts(rate, 500.0, p, rng)));
    }
    CHECK(ks2_pvalue(a, b) > 0.01);
}

TEST_CASE("probe_with_ionization: dark emitter yields dark counts only") {
    EmitterParams p = kDefault;
    RngStream rng = derive_stream(25, 0);
    const DriveField d = DriveField::cw(p, 100.0, 0.0);
    EmitterState st = EmitterState::dark();
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const ProbeResult r = probe_with_ionization(st, d, 500.0, p, rng);
        CHECK(r.signal_counts == 0);
        sum += double(r.counts);
    }
    // mean = dark_rate * duration = 100/s * 500us = 0.05
    CHECK(sum / n == doctest::Approx(0.05).epsilon(0.05));
    CHECK(st.charge == Charge::Dark);
}

TEST_CASE("probe_with_ionization matches a 1 us sliced oracle") {
    EmitterParams p = kDefault;
    p.ionization_yield = 2e-5;  // exaggerated so jumps are common in-window
    const DriveField d = DriveField::cw(p, 100.0, 0.0);

    const int n = 100000;
    std::vector<double> direct, sliced;
    std::int64_t ion_direct = 0, ion_sliced = 0;
    RngStream rng1 = derive_stream(26, 0), rng2 = derive_stream(26, 1);
    for (int i = 0; i < n; ++i) {
        EmitterState s1 = EmitterState::bright(0.0);
        const ProbeResult r = probe_with_ionization(s1, d, 50.0, p, rng1);
        direct.push_back(double(r.counts));
        ion_direct += r.ion_time_us ? 1 : 0;

        EmitterState s2 = EmitterState::bright(0.0);
        const auto [c, ion] = test::sliced_probe(s2, 0.0, 100.0, 50.0, 1.0, p, rng2);
        sliced.push_back(double(c));
        ion_sliced += ion ? 1 : 0;
    }
    CHECK(std::abs(double(ion_direct - ion_sliced)) / n < 0.01);
    // total-variation distance between the two count distributions
    std::map<int, int> ha, hb;
    for (double v : direct) ++ha[int(v)];
    for (double v : sliced) ++hb[int(v)];
    double tv = 0;
    for (int k = 0; k <= 40; ++k) tv += std::abs(double(ha[k]) - double(hb[k])) / (2.0 * n);
    CHECK(tv < 0.02);
}

TEST_CASE("repump_apply: identity at zero dose, anchors at strong dose") {
    EmitterParams p = kDefault;
    RngStream rng = derive_stream(27, 0);

    EmitterState st = EmitterState::dark();
    st.center_detuning_mhz = 17.0;
    repump_apply(st, 0.0, p, rng);
    CHECK(st.charge == Charge::Dark);
    CHECK(st.center_detuning_mhz == 17.0);

    // strong repump (500 us x 100 uW), conditioned on dark before:
    // P(bright after) = repump_max_prob within +-0.02
    const int n = 100000;
    int bright = 0;
    for (int i = 0; i < n; ++i) {
        EmitterState s = EmitterState::dark();
        repump_apply(s, 500.0 * 100.0, p, rng);
        bright += s.charge == Charge::Bright ? 1 : 0;
    }
    CHECK(double(bright) / n == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("repump_apply: saturating dose decorrelates the center") {
    EmitterParams p = kDefault;
    RngStream rng = derive_stream(28, 0);
    const int n = 20000;
    std::vector<double> before, after;
    for (int i = 0; i < n; ++i) {
        EmitterState s = EmitterState::bright(rng.normal(0, p.inhomogeneous_sigma_mhz));
        before.push_back(s.center_detuning_mhz);
        repump_apply(s, 5e4, p, rng);
        after.push_back(s.charge == Charge::Bright ? s.center_detuning_mhz : -999.0);
    }
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    int m = 0;
    for (int i = 0; i < n; ++i) {
        if (after[i] == -999.0) continue;
        ++m;
        sx += before[i];
        sy += after[i];
        sxy += before[i] * after[i];
        sxx += before[i] * before[i];
        syy += after[i] * after[i];
    }
    const double r = (sxy / m - sx / m * sy / m) /
                     std::sqrt((sxx / m - sx / m * sx / m) * (syy / m - sy / m * sy / m));
    CHECK(std::abs(r) < 0.03);
}

TEST_CASE("spectral_jump_sample moments") {
    EmitterParams p = kDefault;
    p.inhomogeneous_sigma_mhz = 0.0;
    RngStream rng = derive_stream(29, 0);
    for (int i = 0; i < 10; ++i) CHECK(spectral_jump_sample(p, rng) == 0.0);

    p.inhomogeneous_sigma_mhz = 60.0;
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = spectral_jump_sample(p, rng);
        s += x;
        s2 += x * x;
    }
    const double std_est = std::sqrt(s2 / n - (s / n) * (s / n));
    CHECK(std_est == doctest::Approx(60.0).epsilon(0.02));
}

TEST_CASE("heralded centers are narrower than the unconditional spread") {
    // rejection-sampling oracle: conditioning a fresh center on the probe
    // counts clearing a threshold must shrink the spread
    EmitterParams p = kDefault;
    RngStream rng = derive_stream(30, 0);
    const DriveField d = DriveField::cw(p, 100.0, 0.0);
    std::vector<double> accepted;
    double s = 0, s2 = 0;
    int n_total = 0;
    while (accepted.size() < 3000 && n_total < 2000000) {
        ++n_total;
        EmitterState st = EmitterState::bright(spectral_jump_sample(p, rng));
        s += st.center_detuning_mhz;
        s2 += st.center_detuning_mhz * st.center_detuning_mhz;
        const ProbeResult r = probe_with_ionization(st, d, 500.0, p, rng);
        if (r.counts >= 100) accepted.push_back(st.center_detuning_mhz);
    }
    REQUIRE(accepted.size() >= 3000);
    double hs = 0, hs2 = 0;
    for (double v : accepted) {
        hs += v;
        hs2 += v * v;
    }
    const double cond_std =
        std::sqrt(hs2 / double(accepted.size()) - std::pow(hs / double(accepted.size()), 2));
    const double uncond_std = std::sqrt(s2 / n_total - std::pow(s / n_total, 2));
    CHECK(cond_std < uncond_std);
}

TEST_CASE("emitter params validation") {
    EmitterParams p = kDefault;
    p.detection_efficiency = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = kDefault;
    p.natural_linewidth_mhz = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = kDefault;
    p.repump_max_prob = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_THROWS_AS(EmitterParams::preset("nope"), std::invalid_argument);
}
