#include "thermoscreen/device_profile.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_fields.hpp"
#include "thermoscreen/canonical_json.hpp"
#include "thermoscreen/error.hpp"

namespace thermoscreen {

using detail::as_array;
using detail::as_bool;
using detail::index_path;
using detail::join_path;
using detail::number_field;
using detail::require;
using detail::string_field;

std::string_view to_string(DeviceKind kind) { return kind == DeviceKind::phone ? "phone" : "watch"; }

DeviceKind device_kind_from_string(std::string_view s) {
    if (s == "phone") return DeviceKind::phone;
    if (s == "watch") return DeviceKind::watch;
    throw ValidationError("kind", "unknown device kind '" + std::string(s) + "'");
}

const SensorSpec* DeviceProfile::find_sensor(std::string_view sensor_id) const {
    for (const auto& s : sensors)
        if (s.sensor_id == sensor_id) return &s;
    return nullptr;
}

const SensorSpec& DeviceProfile::sensor(std::string_view sensor_id) const {
    if (const auto* s = find_sensor(sensor_id)) return *s;
    throw ValidationError("sensor_id", "sensor '" + std::string(sensor_id) + "' not in profile '" + name + "'");
}

void validate_profile(const DeviceProfile& p) {
    if (p.name.empty()) throw ValidationError("name", "profile name is empty");
    if (p.sensors.empty()) throw ValidationError(p.name + ".sensors", "profile has no sensors");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < p.sensors.size(); ++i) {
        const auto& s = p.sensors[i];
        const std::string ctx = p.name + ".sensors[" + std::to_string(i) + "]";
        if (s.sensor_id.empty()) throw ValidationError(ctx + ".sensor_id", "empty sensor id");
        if (!seen.insert(s.sensor_id).second) throw ValidationError(ctx + ".sensor_id", "duplicate sensor id " + s.sensor_id);
        if (!(s.sample_period_s > 0)) throw ValidationError(ctx + ".sample_period_s", "must be > 0");
        if (!(s.noise_sd_f >= 0)) throw ValidationError(ctx + ".noise_sd_f", "must be >= 0");
        if (!(s.quantization_f >= 0)) throw ValidationError(ctx + ".quantization_f", "must be >= 0");
        if (!(s.position >= 0 && s.position <= 1)) throw ValidationError(ctx + ".position", "must lie in [0, 1]");
        if (!(s.base_k > 0)) throw ValidationError(ctx + ".base_k", "must be > 0");
    }
    if (p.kind == DeviceKind::watch) {
        if (p.has_screen_matrix) throw ValidationError(p.name + ".has_screen_matrix", "watch profiles have no screen matrix");
        if (p.sensors.size() != 1 || p.sensors.front().sensor_id != "battery")
            throw ValidationError(p.name + ".sensors", "watch profiles carry exactly one sensor, 'battery'");
    }
}

ProfileLibrary::ProfileLibrary(std::vector<DeviceProfile> profiles) {
    for (auto& p : profiles) add(std::move(p));
}

void ProfileLibrary::add(DeviceProfile profile) {
    validate_profile(profile);
    auto name = profile.name;
    profiles_.insert_or_assign(std::move(name), std::move(profile));
}

ProfileLibrary ProfileLibrary::builtin() {
    // Root-readable thermistors sample far faster than the battery gauge
    // (~1 reading per minute). Positions lean toward the top of the handset.
    DeviceProfile phone;
    phone.name = std::string(kPhoneProfile);
    phone.kind = DeviceKind::phone;
    phone.has_screen_matrix = true;
    //               id             period  noise  quant  pos    base_k
    phone.sensors = {
        {"battery",      60.0, 0.10, 0.20, 0.45, 0.0030},
        {"pa_0",          1.0, 0.05, 0.10, 0.85, 0.0080},
        {"dcxo0",         1.0, 0.05, 0.10, 0.80, 0.0065},
        {"system_h",      1.0, 0.05, 0.10, 0.70, 0.0060},
        {"charger",       1.0, 0.05, 0.10, 0.10, 0.0055},
        {"pa_1",          1.0, 0.05, 0.10, 0.90, 0.0050},
        {"xo_therm",      2.0, 0.05, 0.10, 0.78, 0.0045},
        {"quiet_therm",   2.0, 0.05, 0.10, 0.60, 0.0040},
        {"sdm_therm",     2.0, 0.05, 0.10, 0.65, 0.0035},
        {"usb_pwr",       2.0, 0.05, 0.10, 0.02, 0.0030},
        {"cpu0_silver",   1.0, 0.08, 0.10, 0.66, 0.0030},
        {"cpu1_silver",   1.0, 0.08, 0.10, 0.67, 0.0030},
        {"cpu4_gold",     1.0, 0.08, 0.10, 0.68, 0.0025},
        {"cpu7_gold",     1.0, 0.08, 0.10, 0.69, 0.0025},
        {"gpu0",          1.0, 0.08, 0.10, 0.62, 0.0025},
        {"modem0",        2.0, 0.05, 0.10, 0.92, 0.0040},
        {"wlan",          2.0, 0.05, 0.10, 0.95, 0.0035},
        {"disp_therm",    5.0, 0.05, 0.10, 0.50, 0.0020},
    };

    // Worn on the wrist and pressed to the forehead: full-face contact and
    // fast heating, but only the coarse battery thermistor is readable.
    DeviceProfile watch;
    watch.name = std::string(kWatchProfile);
    watch.kind = DeviceKind::watch;
    watch.has_screen_matrix = false;
    watch.sensors = {{"battery", 60.0, 0.10, 0.10, 0.50, 0.0200}};

    return ProfileLibrary({std::move(phone), std::move(watch)});
}

ProfileLibrary ProfileLibrary::parse(std::string_view text) {
    const auto doc = parse_json_document(text, "profiles");
    if (!doc.is_object()) throw ParseError("profiles", "expected an object keyed by profile name");
    ProfileLibrary lib;
    for (const auto& [name, body] : doc.items()) {
        DeviceProfile p;
        p.name = name;
        p.kind = device_kind_from_string(string_field(body, "kind", name));
        p.has_screen_matrix = as_bool(require(body, "has_screen_matrix", name), join_path(name, "has_screen_matrix"));
        const auto& sensors = as_array(require(body, "sensors", name), join_path(name, "sensors"));
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            const auto ctx = index_path(join_path(name, "sensors"), i);
            const auto& s = sensors[i];
            p.sensors.push_back({string_field(s, "sensor_id", ctx), number_field(s, "sample_period_s", ctx),
                                 number_field(s, "noise_sd_f", ctx), number_field(s, "quantization_f", ctx),
                                 number_field(s, "position", ctx), number_field(s, "base_k", ctx)});
        }
        lib.add(std::move(p));
    }
    return lib;
}

ProfileLibrary ProfileLibrary::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open profile library " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ProfileLibrary::write() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [name, p] : profiles_) {
        nlohmann::json sensors = nlohmann::json::array();
        for (const auto& s : p.sensors) {
            sensors.push_back({{"sensor_id", s.sensor_id},
                               {"sample_period_s", s.sample_period_s},
                               {"noise_sd_f", s.noise_sd_f},
                               {"quantization_f", s.quantization_f},
                               {"position", s.position},
                               {"base_k", s.base_k}});
        }
        doc[name] = {{"kind", std::string(to_string(p.kind))},
                     {"has_screen_matrix", p.has_screen_matrix},
                     {"sensors", std::move(sensors)}};
    }
    return to_canonical_json(doc);
}

const DeviceProfile* ProfileLibrary::find(std::string_view name) const {
    auto it = profiles_.find(name);
    return it == profiles_.end() ? nullptr : &it->second;
}

const DeviceProfile& ProfileLibrary::at(std::string_view name) const {
    if (const auto* p = find(name)) return *p;
    throw ValidationError("device", "unknown device profile '" + std::string(name) + "'");
}

std::vector<std::string> ProfileLibrary::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : profiles_) out.push_back(name);
    return out;
}

} // namespace thermoscreen
