#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermoscreen {

enum class DeviceKind { phone, watch };

std::string_view to_string(DeviceKind kind);
DeviceKind device_kind_from_string(std::string_view s);

struct SensorSpec {
    std::string sensor_id;
    double sample_period_s = 1.0;
    double noise_sd_f = 0.0;
    double quantization_f = 0.0;
    double position = 0.5;  // normalized major-axis location, 0 = bottom, 1 = top
    double base_k = 0.004;  // 1/s at full-screen contact centred on the sensor

    bool operator==(const SensorSpec&) const = default;
};

struct DeviceProfile {
    std::string name;
    DeviceKind kind = DeviceKind::phone;
    std::vector<SensorSpec> sensors;
    bool has_screen_matrix = true;

    const SensorSpec* find_sensor(std::string_view sensor_id) const;
    const SensorSpec& sensor(std::string_view sensor_id) const;  // throws ValidationError

    bool operator==(const DeviceProfile&) const = default;
};

// Throws ValidationError naming the offending field.
void validate_profile(const DeviceProfile& profile);

class ProfileLibrary {
public:
    ProfileLibrary() = default;
    explicit ProfileLibrary(std::vector<DeviceProfile> profiles);

    // "pixel4-like-phone" (18 thermistors) and "wear-watch" (battery only).
    static ProfileLibrary builtin();

    // Document keyed by profile name; see write().
    static ProfileLibrary parse(std::string_view text);
    static ProfileLibrary load_file(const std::string& path);
    std::string write() const;

    const DeviceProfile* find(std::string_view name) const;
    const DeviceProfile& at(std::string_view name) const;  // throws ValidationError
    std::vector<std::string> names() const;

    void add(DeviceProfile profile);

private:
    std::map<std::string, DeviceProfile, std::less<>> profiles_;
};

// Built-in profile names.
inline constexpr std::string_view kPhoneProfile = "pixel4-like-phone";
inline constexpr std::string_view kWatchProfile = "wear-watch";

} // namespace thermoscreen
