#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermoscreen/device_profile.hpp"
#include "thermoscreen/grid.hpp"

namespace thermoscreen {

// Standard fever cutoff (38 °C); inclusive.
inline constexpr double kFeverCutoffF = 100.4;

// Physical sanity bounds for any thermistor reading.
inline constexpr double kMinSaneTempF = 32.0;
inline constexpr double kMaxSaneTempF = 150.0;

inline constexpr double fahrenheit_to_celsius(double f) { return (f - 32.0) * 5.0 / 9.0; }

struct ThermistorSample {
    double t_s = 0.0;
    double temp_f = 0.0;

    bool operator==(const ThermistorSample&) const = default;
};

struct ThermistorSeries {
    std::string sensor_id;
    std::vector<ThermistorSample> samples;

    bool operator==(const ThermistorSeries&) const = default;
};

struct CapacitanceFrame {
    double t_s = 0.0;
    CapacitanceGrid matrix;

    bool operator==(const CapacitanceFrame&) const = default;
};

struct TrialRecord {
    std::string trial_id;
    std::string device;  // DeviceProfile name
    std::vector<ThermistorSeries> series;
    std::vector<CapacitanceFrame> frames;  // empty for watch trials
    std::optional<double> ground_truth_f;
    double duration_s = 0.0;
    std::map<std::string, std::string> metadata;

    const ThermistorSeries* find_series(std::string_view sensor_id) const;

    bool operator==(const TrialRecord&) const = default;
};

// Checks every record invariant against the device profile. Throws
// ValidationError naming the offending field.
void validate_trial(const TrialRecord& trial, const DeviceProfile& profile);

// Parses and validates one trial document. Syntax and type problems raise
// ParseError (with line or field context); invariant violations raise
// ValidationError.
TrialRecord parse_trial(std::string_view text, const ProfileLibrary& profiles);

// Canonical serialization: sorted keys, shortest round-trip floats.
std::string write_trial(const TrialRecord& trial);

struct DatasetSummary {
    std::size_t n = 0;
    std::size_t n_febrile = 0;
    double temp_min_f = 0.0;
    double temp_max_f = 0.0;
    std::vector<std::string> sensors_common;  // sorted
};

// Requires a non-empty list where every trial carries ground truth.
DatasetSummary validate_dataset(const std::vector<TrialRecord>& trials);

// On-disk corpus: one <trial_id>.json per trial plus manifest.json listing the
// files in order.
inline constexpr std::string_view kDatasetManifest = "manifest.json";

std::vector<std::string> write_dataset(const std::filesystem::path& dir, const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> load_dataset(const std::filesystem::path& dir, const ProfileLibrary& profiles);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace thermoscreen
