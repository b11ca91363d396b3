#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "thermoscreen/error.hpp"
#include "thermoscreen/rng.hpp"
#include "thermoscreen/simulate.hpp"
#include "thermoscreen/thermal.hpp"

using namespace thermoscreen;

namespace {

const ProfileLibrary& lib() {
    static const auto l = ProfileLibrary::builtin();
    return l;
}

ThermistorSeries curve_series(double t0, double tpeak, double k, std::size_t n, double span_s) {
    ThermistorSeries s{"probe", {}};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = span_s * static_cast<double>(i) / static_cast<double>(n - 1);
        s.samples.push_back({t, (t0 - tpeak) * std::exp(-k * t) + tpeak});
    }
    return s;
}

ThermistorSeries line_series(double slope, double t0, std::size_t n, double dt = 1.0) {
    ThermistorSeries s{"probe", {}};
    for (std::size_t i = 0; i < n; ++i) s.samples.push_back({dt * static_cast<double>(i), t0 + slope * dt * static_cast<double>(i)});
    return s;
}

std::vector<double> times(const ThermistorSeries& s) {
    std::vector<double> v;
    for (const auto& p : s.samples) v.push_back(p.t_s);
    return v;
}

std::vector<double> temps(const ThermistorSeries& s) {
    std::vector<double> v;
    for (const auto& p : s.samples) v.push_back(p.temp_f);
    return v;
}

} // namespace

TEST_CASE("truncate_series") {
    const auto s = line_series(0.01, 75, 181);
    CHECK(truncate_series(s, 180).samples == s.samples);
    CHECK(truncate_series(s, 90).samples.size() == 91);
    CHECK(truncate_series(s, 90).samples.back().t_s == 90.0);

    SimConfig c;
    c.device = lib().at(kPhoneProfile);
    const auto trial = simulate_trial(c);
    CHECK(truncate_series(*trial.find_series("battery"), 90).samples.size() == 2);

    ThermistorSeries late{"x", {{10.0, 70.0}}};
    CHECK_THROWS_AS(truncate_series(late, 5), InsufficientDataError);
    CHECK_THROWS_AS(truncate_series(s, 0), ValidationError);
}

TEST_CASE("linear_slope") {
    const auto flat = line_series(0.0, 75, 50);
    CHECK(linear_slope(flat).slope_f_per_s == 0.0);
    CHECK(linear_slope(flat).t0_f == 75.0);

    const auto line = line_series(0.01, 75, 181);
    CHECK(linear_slope(line).slope_f_per_s == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(linear_slope(line).t0_f == 75.0);

    const auto curve = curve_series(75, 98.6, 0.002, 181, 180);
    CHECK(std::abs(linear_slope(curve).slope_f_per_s - oracle::ols_slope(times(curve), temps(curve))) <= 1e-9);

    CHECK_THROWS_AS(linear_slope(line_series(0.01, 75, 1)), InsufficientDataError);
    ThermistorSeries bad{"x", {{0.0, 70.0}}};
    CHECK_THROWS_AS(linear_slope(bad), InsufficientDataError);
}

TEST_CASE("linear_slope is affine-equivariant") {
    Rng rng(31);
    for (int round = 0; round < 100; ++round) {
        ThermistorSeries s{"x", {}};
        double t = 0;
        const auto n = rng.uniform_int(2, 60);
        for (int i = 0; i < n; ++i) {
            s.samples.push_back({t, rng.uniform(60, 100)});
            t += rng.uniform(0.5, 10);
        }
        const auto base = linear_slope(s);
        const double shift = rng.uniform(-20, 20);
        const double scale = rng.uniform(0.1, 10);
        auto shifted = s;
        auto stretched = s;
        for (auto& p : shifted.samples) p.temp_f += shift;
        for (auto& p : stretched.samples) p.t_s *= scale;
        CHECK(linear_slope(shifted).slope_f_per_s == doctest::Approx(base.slope_f_per_s).epsilon(1e-9).scale(1e-9));
        CHECK(linear_slope(shifted).t0_f == doctest::Approx(base.t0_f + shift).epsilon(1e-12));
        CHECK(linear_slope(stretched).slope_f_per_s == doctest::Approx(base.slope_f_per_s / scale).epsilon(1e-9));
    }
}

TEST_CASE("simple_rate") {
    ThermistorSeries s{"x", {{0, 80}, {60, 83}, {180, 89}}};
    CHECK(simple_rate(s) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(simple_rate(line_series(0, 70, 5)) == 0.0);
    CHECK_THROWS_AS(simple_rate(ThermistorSeries{"x", {{0, 80}}}), InsufficientDataError);

    // Equals linear_slope for any 2-sample series.
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const double t1 = rng.uniform(0.1, 200);
        ThermistorSeries two{"x", {{0, rng.uniform(60, 90)}, {t1, rng.uniform(60, 100)}}};
        CHECK(simple_rate(two) == doctest::Approx(linear_slope(two).slope_f_per_s).epsilon(1e-12));
    }
}

TEST_CASE("simple_rate on a simulated watch trial read back from its file") {
    SimConfig c;
    c.device = lib().at(kWatchProfile);
    c.source_temp_f = 99.0;
    c.initial_device_f = 80.0;
    c.seed = 7;
    const auto trial = parse_trial(write_trial(simulate_trial(c)), lib());
    const auto& s = trial.series.at(0).samples;
    const double expected = (s.back().temp_f - s.front().temp_f) / (s.back().t_s - s.front().t_s);
    CHECK(simple_rate(trial.series[0]) == expected);
}

TEST_CASE("fit_exponential recovers a noiseless curve") {
    const auto s = curve_series(78, 101, 0.01, 8, 180);
    const auto fit = fit_exponential(s);
    CHECK(fit.t0_f == 78.0);
    CHECK(std::abs(fit.t_peak_f - 101.0) <= 1e-6);
    CHECK(std::abs(fit.k - 0.01) <= 1e-6);
    CHECK(fit.n == 8);
    CHECK(fit.rss < 1e-12);
}

TEST_CASE("fit_exponential error paths") {
    CHECK_THROWS_AS(fit_exponential(curve_series(78, 101, 0.01, 3, 180)), InsufficientDataError);
    CHECK_THROWS_AS(fit_exponential(curve_series(101, 78, 0.01, 8, 180)), CoolingDirectionError);
    // Flat series: zero rise is a legal (degenerate) heating fit.
    const auto flat = fit_exponential(line_series(0, 80, 6));
    CHECK(flat.t_peak_f == 80.0);
    CHECK(flat.k > 0);
}

TEST_CASE("fit_exponential matches a dense grid minimum on sparse quantized data") {
    // Four battery readings, quantized to 0.1 F with 0.1 F noise.
    Rng rng(2024);
    for (int round = 0; round < 5; ++round) {
        ThermistorSeries s{"battery", {}};
        const double t0 = rng.uniform(72, 84), tp = rng.uniform(96, 103), k = rng.uniform(0.01, 0.03);
        for (int i = 0; i < 4; ++i) {
            const double t = 60.0 * i;
            const double v = (t0 - tp) * std::exp(-k * t) + tp + (i == 0 ? 0.0 : rng.normal(0, 0.1));
            s.samples.push_back({t, std::round(v * 10) / 10});
        }
        const auto fit = fit_exponential(s);
        const auto t = times(s), y = temps(s);
        const auto grid = oracle::grid_search(t, y, y.back(), y.back() + 30, 1e-4, 0.1);
        CAPTURE(round);
        CHECK(std::abs(fit.rss - grid.rss) <= 1e-6);
        CHECK(fit.rss <= grid.rss + 1e-12);
        CHECK(fit.t_peak_f >= y.back());
        CHECK(oracle::heating_rss(t, y, fit.t_peak_f, fit.k) == doctest::Approx(fit.rss).epsilon(1e-9).scale(1e-12));
    }
}

TEST_CASE("fit_exponential parameter recovery sweep") {
    Rng rng(5);
    for (int round = 0; round < 100; ++round) {
        const double k = std::exp(rng.uniform(std::log(5e-4), std::log(0.05)));
        const double rise = rng.uniform(2, 30);
        const double t0 = rng.uniform(65, 85);
        const auto n = static_cast<std::size_t>(rng.uniform_int(8, 60));
        const auto fit = fit_exponential(curve_series(t0, t0 + rise, k, n, 180));
        CAPTURE(k);
        CAPTURE(rise);
        CAPTURE(n);
        CHECK(std::abs(fit.t_peak_f - (t0 + rise)) <= 1e-6);
        CHECK(std::abs(fit.k - k) / k <= 1e-6);
    }
}

TEST_CASE("fitted slope rises strictly with source temperature") {
    for (double t0 : {70.0, 76.5, 83.0}) {
        double prev = -1;
        for (double tp = 95.0; tp <= 102.5; tp += 0.25) {
            const double m = linear_slope(curve_series(t0, tp, 0.003, 181, 180)).slope_f_per_s;
            CHECK(m > prev);
            prev = m;
        }
    }
}

TEST_CASE("build_features") {
    SimConfig c;
    c.device = lib().at(kPhoneProfile);
    c.patch = {20, 31, 0, 15};
    c.source_temp_f = 100.5;
    c.initial_device_f = 76;
    c.seed = 3;
    const auto trial = simulate_trial(c);

    const auto f = build_features(trial, c.device, "pa_0", 180);
    CHECK(f.slope_f_per_s > 0);
    CHECK(std::abs(f.percent - c.patch.percent()) <= 1.0 / 512);
    CHECK(f.centroid == doctest::Approx(c.patch.centroid()));
    CHECK(f.t0_f == trial.find_series("pa_0")->samples.front().temp_f);
    CHECK(f.sensor_id == "pa_0");
    CHECK(f.duration_s == 180);

    CHECK_THROWS_AS(build_features(trial, c.device, "battery", 30), InsufficientDataError);
    CHECK_THROWS_AS(build_features(trial, c.device, "thermocouple", 180), ValidationError);
    auto frameless = trial;
    frameless.frames.clear();
    CHECK_THROWS_AS(build_features(frameless, c.device, "pa_0", 180), InsufficientDataError);

    SimConfig w;
    w.device = lib().at(kWatchProfile);
    const auto wf = build_features(simulate_trial(w), w.device, "battery", 180);
    CHECK(wf.centroid == 1.0);
    CHECK(wf.percent == 1.0);
}
