#include "thermoscreen/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "thermoscreen/contact.hpp"
#include "thermoscreen/error.hpp"

namespace thermoscreen {

double heating_curve(double t0_f, double t_peak_f, double k, double t_s) {
    return (t0_f - t_peak_f) * std::exp(-k * t_s) + t_peak_f;
}

ThermistorSeries truncate_series(const ThermistorSeries& series, double duration_s) {
    if (!(duration_s > 0)) throw ValidationError("duration_s", "must be > 0");
    ThermistorSeries out;
    out.sensor_id = series.sensor_id;
    for (const auto& s : series.samples)
        if (s.t_s <= duration_s) out.samples.push_back(s);
    if (out.samples.empty())
        throw InsufficientDataError("sensor '" + series.sensor_id + "' has no samples within " +
                                    std::to_string(duration_s) + " s");
    return out;
}

LinearFit linear_slope(const ThermistorSeries& series) {
    const auto& s = series.samples;
    if (s.size() < 2) throw InsufficientDataError("linear_slope: sensor '" + series.sensor_id + "' needs >= 2 samples");
    const auto n = static_cast<double>(s.size());
    double t_mean = 0, y_mean = 0;
    for (const auto& p : s) {
        t_mean += p.t_s;
        y_mean += p.temp_f;
    }
    t_mean /= n;
    y_mean /= n;
    double sxx = 0, sxy = 0;
    for (const auto& p : s) {
        const double dt = p.t_s - t_mean;
        sxx += dt * dt;
        sxy += dt * (p.temp_f - y_mean);
    }
    if (!(sxx > 0)) throw InsufficientDataError("linear_slope: all sample times are equal");
    return {sxy / sxx, s.front().temp_f};
}

double simple_rate(const ThermistorSeries& series) {
    const auto& s = series.samples;
    if (s.size() < 2) throw InsufficientDataError("simple_rate: sensor '" + series.sensor_id + "' needs >= 2 samples");
    const double span = s.back().t_s - s.front().t_s;
    if (!(span > 0)) throw InsufficientDataError("simple_rate: zero time span");
    return (s.back().temp_f - s.front().temp_f) / span;
}

namespace {

// Residuals A*g_i - d_i with g_i = 1 - e^{-k tau_i}, tau and d measured from
// the first sample; A = Tpeak - T0.
struct HeatingProblem {
    std::vector<double> tau;
    std::vector<double> rise;
    double min_amplitude = 0.0;

    explicit HeatingProblem(const ThermistorSeries& series) {
        const auto& s = series.samples;
        const auto& first = s.front();
        for (const auto& p : s) {
            tau.push_back(p.t_s - first.t_s);
            rise.push_back(p.temp_f - first.temp_f);
        }
        min_amplitude = std::max(0.0, rise.back());
    }

    double rss(double amplitude, double k) const {
        double sum = 0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double r = amplitude * -std::expm1(-k * tau[i]) - rise[i];
            sum += r * r;
        }
        return sum;
    }

    // Conditionally optimal amplitude for a fixed k, respecting the floor.
    double best_amplitude(double k) const {
        double sgd = 0, sgg = 0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double g = -std::expm1(-k * tau[i]);
            sgd += g * rise[i];
            sgg += g * g;
        }
        const double a = sgg > 0 ? sgd / sgg : 0.0;
        return std::max(a, min_amplitude);
    }
};

} // namespace

double heating_rss(const ThermistorSeries& series, double t_peak_f, double k) {
    if (series.samples.empty()) return 0.0;
    HeatingProblem p(series);
    return p.rss(t_peak_f - series.samples.front().temp_f, k);
}

ExpFit fit_exponential(const ThermistorSeries& series, const ExpFitOptions& options) {
    const auto& s = series.samples;
    if (s.size() < kMinExpFitSamples)
        throw InsufficientDataError("fit_exponential: series too sparse (" + std::to_string(s.size()) +
                                    " samples, need at least 4)");
    if (s.back().temp_f < s.front().temp_f)
        throw CoolingDirectionError("fit_exponential: series cools; only heating toward a warmer source is modelled");

    const HeatingProblem prob(series);

    // Coarse scan.
    double k = options.k_min;
    double amp = prob.best_amplitude(k);
    double rss = prob.rss(amp, k);
    const double log_lo = std::log(options.k_min);
    const double log_hi = std::log(options.k_max);
    for (int j = 0; j < options.grid_points; ++j) {
        const double kj = std::exp(log_lo + (log_hi - log_lo) * j / std::max(1, options.grid_points - 1));
        const double aj = prob.best_amplitude(kj);
        const double rj = prob.rss(aj, kj);
        if (rj < rss) {
            k = kj;
            amp = aj;
            rss = rj;
        }
    }

    // Levenberg-Marquardt on (A, k). When A sits on its floor and the gradient
    // pushes it lower, only k is updated.
    double lambda = 1e-3;
    for (int iter = 0; iter < options.max_iterations && rss > 0; ++iter) {
        double jaa = 0, jak = 0, jkk = 0, ga = 0, gk = 0;
        for (std::size_t i = 0; i < prob.tau.size(); ++i) {
            const double e = std::exp(-k * prob.tau[i]);
            const double g = -std::expm1(-k * prob.tau[i]);
            const double r = amp * g - prob.rise[i];
            const double dk = amp * prob.tau[i] * e;
            jaa += g * g;
            jak += g * dk;
            jkk += dk * dk;
            ga += g * r;
            gk += dk * r;
        }
        const bool amp_pinned = amp <= prob.min_amplitude && ga > 0;

        double step_a = 0, step_k = 0;
        const double maa = jaa + lambda * (jaa > 0 ? jaa : 1.0);
        const double mkk = jkk + lambda * (jkk > 0 ? jkk : 1.0);
        if (amp_pinned) {
            step_k = -gk / mkk;
        } else {
            const double det = maa * mkk - jak * jak;
            if (!(std::abs(det) > 0)) break;
            step_a = (-ga * mkk + gk * jak) / det;
            step_k = (-gk * maa + ga * jak) / det;
        }

        const double new_amp = std::max(amp + step_a, prob.min_amplitude);
        const double new_k = std::max(k + step_k, 0.1 * k);
        const double new_rss = prob.rss(new_amp, new_k);
        if (new_rss < rss) {
            const double improvement = (rss - new_rss) / rss;
            amp = new_amp;
            k = new_k;
            rss = new_rss;
            lambda = std::max(lambda * 0.1, 1e-15);
            if (improvement < options.rel_tolerance) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e16) break;
        }
    }

    ExpFit fit;
    fit.t0_f = s.front().temp_f;
    fit.t_peak_f = fit.t0_f + amp;
    fit.k = k;
    fit.rss = rss;
    fit.n = s.size();
    return fit;
}

FeatureVector build_features(const TrialRecord& trial, const DeviceProfile& profile, std::string_view sensor_id,
                             double duration_s) {
    const auto* series = trial.find_series(sensor_id);
    if (!series)
        throw ValidationError("sensor_id", "trial '" + trial.trial_id + "' has no sensor '" + std::string(sensor_id) + "'");

    const auto window = truncate_series(*series, duration_s);
    const auto lin = linear_slope(window);

    FeatureVector f;
    f.slope_f_per_s = lin.slope_f_per_s;
    f.t0_f = lin.t0_f;
    f.sensor_id = std::string(sensor_id);
    f.duration_s = duration_s;

    if (profile.has_screen_matrix) {
        if (trial.frames.empty())
            throw InsufficientDataError("trial '" + trial.trial_id + "' has no capacitance frames");
        const auto stats = contact_stats(trial.frames);
        if (!stats.centroid) throw InsufficientDataError("trial '" + trial.trial_id + "' shows no screen contact");
        f.centroid = *stats.centroid;
        f.percent = stats.percent;
    } else {
        f.centroid = 1.0;
        f.percent = 1.0;
    }
    return f;
}

} // namespace thermoscreen
