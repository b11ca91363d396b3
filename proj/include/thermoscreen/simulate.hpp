#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermoscreen/device_profile.hpp"
#include "thermoscreen/trialdata.hpp"

namespace thermoscreen {

// Inclusive rectangle of touched cells on the 32x16 grid.
struct ContactPatch {
    int row_lo = 0;
    int row_hi = 31;
    int col_lo = 0;
    int col_hi = 15;

    std::size_t cells() const;
    double percent() const;   // cells / 512
    double centroid() const;  // row centre / 31

    bool operator==(const ContactPatch&) const = default;
};

inline constexpr ContactPatch kFullPatch{0, 31, 0, 15};

// Slow sinusoidal wander of the source set point; off when amplitude is 0.
struct SourceDrift {
    double amplitude_f = 0.0;
    double period_s = 600.0;
};

struct SimConfig {
    DeviceProfile device;
    std::string trial_id = "sim";
    double source_temp_f = 100.0;
    double initial_device_f = 75.0;
    ContactPatch patch = kFullPatch;
    double duration_s = 180.0;
    double frame_period_s = 5.0;
    std::uint64_t seed = 0;
    std::optional<double> noise_sd_f;  // overrides every sensor's noise
    SourceDrift drift;
};

// In-patch and background capacitance ranges for synthetic frames.
inline constexpr long long kPatchCapMin = 800;
inline constexpr long long kPatchCapMax = 1000;
inline constexpr long long kBackgroundCapMin = 0;
inline constexpr long long kBackgroundCapMax = 50;

void validate_config(const SimConfig& config);

// base_k * percent * (1 - 0.5 * |centroid - position|).
double effective_k(const SensorSpec& sensor, const ContactPatch& patch);

// Device temperature at time t under the (optionally drifting) source.
double simulated_temperature(const SimConfig& config, double k, double t_s);

// Deterministic given the config (including its seed).
TrialRecord simulate_trial(const SimConfig& config);

struct DatasetOptions {
    std::optional<double> noise_sd_f;
    SourceDrift drift;
    double duration_s = 180.0;
};

// Lab replica: sources in [95, 102.5] F with doubled density in
// [99.4, 101.4], devices starting in [70, 83] F, 30-50 % screen contact with
// 70 % of patches starting in the top third (row_lo >= 21).
std::vector<TrialRecord> simulate_lab_dataset(const DeviceProfile& device, std::size_t n = 51, std::uint64_t seed = 0,
                                              const DatasetOptions& options = {});

// Clinical style: 8-20 % contact and mostly afebrile sources in [97, 101] F.
std::vector<TrialRecord> simulate_clinical_dataset(const DeviceProfile& device, std::size_t n = 7,
                                                   std::uint64_t seed = 0, const DatasetOptions& options = {});

} // namespace thermoscreen
