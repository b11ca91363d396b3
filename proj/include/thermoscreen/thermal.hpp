#pragma once

#include <array>
#include <string>
#include <string_view>

#include "thermoscreen/device_profile.hpp"
#include "thermoscreen/trialdata.hpp"

namespace thermoscreen {

inline constexpr double kDefaultDurationS = 180.0;
inline constexpr std::array<double, 6> kSweepDurationsS = {30.0, 60.0, 90.0, 120.0, 150.0, 180.0};

// Newton heating curve T(t) = (T0 - Tpeak) e^{-kt} + Tpeak.
double heating_curve(double t0_f, double t_peak_f, double k, double t_s);

struct LinearFit {
    double slope_f_per_s = 0.0;
    double t0_f = 0.0;  // first sample, not the regression intercept
};

struct ExpFit {
    double t0_f = 0.0;
    double t_peak_f = 0.0;
    double k = 0.0;
    double rss = 0.0;
    std::size_t n = 0;
};

// Exponential-fit search and refinement settings.
struct ExpFitOptions {
    double k_min = 1e-4;
    double k_max = 0.1;
    int grid_points = 200;  // log-spaced
    double rel_tolerance = 1e-10;
    int max_iterations = 100;
};

inline constexpr std::size_t kMinExpFitSamples = 4;

struct FeatureVector {
    double slope_f_per_s = 0.0;
    double t0_f = 0.0;
    double centroid = 0.0;
    double percent = 0.0;
    std::string sensor_id;
    double duration_s = kDefaultDurationS;

    // Model inputs in basis order (m, T0, centroid, percent).
    std::array<double, 4> values() const { return {slope_f_per_s, t0_f, centroid, percent}; }
};

// Samples with t_s <= duration_s, order preserved. Throws
// InsufficientDataError if nothing survives, ValidationError if duration_s <= 0.
ThermistorSeries truncate_series(const ThermistorSeries& series, double duration_s);

// Ordinary least-squares slope of temp against time; t0 is the first reading.
// Throws InsufficientDataError for < 2 samples or zero time spread.
LinearFit linear_slope(const ThermistorSeries& series);

// (last - first) / (t_last - t_first).
double simple_rate(const ThermistorSeries& series);

// Two-parameter fit of the heating curve with T0 pinned to the first reading
// and time measured from the first sample. A log-spaced scan over k (with the
// closed-form best Tpeak at each k) seeds a Levenberg-Marquardt refinement.
// Tpeak is held at or above the last observed temperature.
//
// Throws InsufficientDataError for fewer than 4 samples and
// CoolingDirectionError when the series ends colder than it starts.
ExpFit fit_exponential(const ThermistorSeries& series, const ExpFitOptions& options = {});

// Residual sum of squares of the heating curve with T0 = first reading.
double heating_rss(const ThermistorSeries& series, double t_peak_f, double k);

// Slope and T0 from the truncated series of `sensor_id`; contact features from
// all frames. Profiles without a screen matrix (watches) use the full-contact
// convention centroid = percent = 1.
FeatureVector build_features(const TrialRecord& trial, const DeviceProfile& profile, std::string_view sensor_id,
                             double duration_s = kDefaultDurationS);

} // namespace thermoscreen
