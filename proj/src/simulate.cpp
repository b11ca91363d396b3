#include "thermoscreen/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thermoscreen/canonical_json.hpp"
#include "thermoscreen/error.hpp"
#include "thermoscreen/rng.hpp"
#include "thermoscreen/thermal.hpp"

namespace thermoscreen {

std::size_t ContactPatch::cells() const {
    return static_cast<std::size_t>(row_hi - row_lo + 1) * static_cast<std::size_t>(col_hi - col_lo + 1);
}

double ContactPatch::percent() const { return static_cast<double>(cells()) / static_cast<double>(kGridCells); }

double ContactPatch::centroid() const {
    return (static_cast<double>(row_lo + row_hi) / 2.0) / static_cast<double>(kGridRows - 1);
}

void validate_config(const SimConfig& c) {
    validate_profile(c.device);
    if (c.trial_id.empty()) throw ValidationError("trial_id", "empty trial id");
    if (!(c.source_temp_f > c.initial_device_f))
        throw ValidationError("source_temp_f", "source must be warmer than the device (heating only)");
    if (!(c.initial_device_f >= kMinSaneTempF && c.source_temp_f <= kMaxSaneTempF))
        throw ValidationError("source_temp_f", "temperatures outside sanity bounds");
    const auto& p = c.patch;
    if (p.row_lo < 0 || p.row_hi >= static_cast<int>(kGridRows) || p.row_lo > p.row_hi || p.col_lo < 0 ||
        p.col_hi >= static_cast<int>(kGridCols) || p.col_lo > p.col_hi)
        throw ValidationError("patch", "contact patch outside the 32x16 grid");
    if (!(c.duration_s > 0)) throw ValidationError("duration_s", "must be > 0");
    if (!(c.frame_period_s > 0)) throw ValidationError("frame_period_s", "must be > 0");
    if (c.noise_sd_f && !(*c.noise_sd_f >= 0)) throw ValidationError("noise_sd_f", "must be >= 0");
    if (!(c.drift.amplitude_f >= 0) || !(c.drift.period_s > 0))
        throw ValidationError("drift", "amplitude must be >= 0 and period > 0");
}

double effective_k(const SensorSpec& sensor, const ContactPatch& patch) {
    return sensor.base_k * patch.percent() * (1.0 - 0.5 * std::abs(patch.centroid() - sensor.position));
}

double simulated_temperature(const SimConfig& c, double k, double t_s) {
    if (c.drift.amplitude_f == 0.0) return heating_curve(c.initial_device_f, c.source_temp_f, k, t_s);
    // Exact solution of dT/dt = k (S + a sin(wt) - T), T(0) = T0.
    const double a = c.drift.amplitude_f;
    const double w = 2.0 * std::numbers::pi / c.drift.period_s;
    const double denom = k * k + w * w;
    const double forced = a * k * (k * std::sin(w * t_s) - w * std::cos(w * t_s)) / denom;
    const double transient = (c.initial_device_f - c.source_temp_f + a * k * w / denom) * std::exp(-k * t_s);
    return c.source_temp_f + transient + forced;
}

namespace {

double quantize(double v, double q) {
    if (!(q > 0)) return v;
    const double inv = 1.0 / q;
    const double inv_r = std::round(inv);
    // Dividing by an integral reciprocal gives the nearest double to n*q
    // (98.6 rather than 98.60000000000001).
    if (std::abs(inv - inv_r) < 1e-9) return std::round(v * inv_r) / inv_r;
    return std::round(v / q) * q;
}

std::string patch_range(int lo, int hi) { return std::to_string(lo) + "-" + std::to_string(hi); }

} // namespace

TrialRecord simulate_trial(const SimConfig& c) {
    validate_config(c);

    TrialRecord t;
    t.trial_id = c.trial_id;
    t.device = c.device.name;
    t.duration_s = c.duration_s;
    t.ground_truth_f = c.source_temp_f;
    t.metadata["source_kind"] = "sous-vide";
    t.metadata["source_temp_f"] = format_double(c.source_temp_f);
    t.metadata["initial_device_f"] = format_double(c.initial_device_f);
    t.metadata["patch_rows"] = patch_range(c.patch.row_lo, c.patch.row_hi);
    t.metadata["patch_cols"] = patch_range(c.patch.col_lo, c.patch.col_hi);
    t.metadata["seed"] = std::to_string(c.seed);
    if (c.noise_sd_f) t.metadata["noise_sd_f"] = format_double(*c.noise_sd_f);
    if (c.drift.amplitude_f > 0) {
        t.metadata["drift_amplitude_f"] = format_double(c.drift.amplitude_f);
        t.metadata["drift_period_s"] = format_double(c.drift.period_s);
    }

    // Each sensor and the frame stream draw from their own derived seed.
    for (std::size_t si = 0; si < c.device.sensors.size(); ++si) {
        const auto& sensor = c.device.sensors[si];
        Rng rng(mix_seed(c.seed, si));
        const double k = effective_k(sensor, c.patch);
        const double sd = c.noise_sd_f.value_or(sensor.noise_sd_f);
        ThermistorSeries series{sensor.sensor_id, {}};
        for (std::size_t j = 0;; ++j) {
            const double ts = static_cast<double>(j) * sensor.sample_period_s;
            if (ts > c.duration_s) break;
            double v = simulated_temperature(c, k, ts);
            if (sd > 0) v += rng.normal(0.0, sd);
            v = std::clamp(quantize(v, sensor.quantization_f), kMinSaneTempF, kMaxSaneTempF);
            series.samples.push_back({ts, v});
        }
        t.series.push_back(std::move(series));
    }

    if (c.device.has_screen_matrix) {
        Rng rng(mix_seed(c.seed, 0x46524D53));  // "FRMS"
        const auto count = static_cast<std::size_t>(std::floor(c.duration_s / c.frame_period_s + 1e-9));
        for (std::size_t j = 0; j < count; ++j) {
            CapacitanceFrame f;
            f.t_s = static_cast<double>(j) * c.frame_period_s;
            for (int r = 0; r < static_cast<int>(kGridRows); ++r)
                for (int col = 0; col < static_cast<int>(kGridCols); ++col) {
                    const bool in_patch =
                        r >= c.patch.row_lo && r <= c.patch.row_hi && col >= c.patch.col_lo && col <= c.patch.col_hi;
                    f.matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(col)) =
                        in_patch ? rng.uniform_int(kPatchCapMin, kPatchCapMax)
                                 : rng.uniform_int(kBackgroundCapMin, kBackgroundCapMax);
                }
            t.frames.push_back(std::move(f));
        }
    }
    return t;
}

namespace {

// Patches span most of the minor axis (>= 12 of 16 columns).
constexpr int kMinPatchCols = 12;
constexpr int kTopThirdRow = 21;
constexpr double kTopBiasedFraction = 0.7;

// Uniform draw over every placement whose cell count lies in
// [min_cells, max_cells] and whose row_lo lies in [row_lo_min, row_lo_max].
ContactPatch draw_patch(Rng& rng, double min_percent, double max_percent, int row_lo_min, int row_lo_max) {
    const double min_cells = min_percent * static_cast<double>(kGridCells);
    const double max_cells = max_percent * static_cast<double>(kGridCells);
    std::vector<ContactPatch> options;
    for (int rows = 1; rows <= static_cast<int>(kGridRows); ++rows)
        for (int cols = kMinPatchCols; cols <= static_cast<int>(kGridCols); ++cols) {
            const double cells = static_cast<double>(rows * cols);
            if (cells < min_cells || cells > max_cells) continue;
            for (int lo = row_lo_min; lo <= row_lo_max && lo + rows <= static_cast<int>(kGridRows); ++lo)
                for (int cl = 0; cl + cols <= static_cast<int>(kGridCols); ++cl)
                    options.push_back({lo, lo + rows - 1, cl, cl + cols - 1});
        }
    if (options.empty()) throw ValidationError("patch", "no patch placement satisfies the contact constraints");
    return options[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
}

// Stratified source temperatures: per-segment quotas by largest remainder,
// uniform within each segment, then shuffled.
std::vector<double> stratified_sources(Rng& rng, std::size_t n) {
    struct Segment {
        double lo, hi, weight;
    };
    const std::vector<Segment> segs = {{95.0, 99.4, 4.4}, {99.4, 101.4, 4.0}, {101.4, 102.5, 1.1}};
    double total = 0;
    for (const auto& s : segs) total += s.weight;
    std::vector<std::size_t> quota(segs.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double exact = static_cast<double>(n) * segs[i].weight / total;
        quota[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += quota[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++quota[remainders[i].second];

    std::vector<double> temps;
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = 0; j < quota[i]; ++j) temps.push_back(rng.uniform(segs[i].lo, segs[i].hi));
    rng.shuffle(temps.begin(), temps.end());
    return temps;
}

std::vector<bool> top_biased_flags(Rng& rng, std::size_t n) {
    const auto top = static_cast<std::size_t>(std::llround(kTopBiasedFraction * static_cast<double>(n)));
    std::vector<bool> flags(n, false);
    for (std::size_t i = 0; i < top; ++i) flags[i] = true;
    rng.shuffle(flags.begin(), flags.end());
    return flags;
}

std::string indexed_id(const std::string& prefix, std::size_t i) {
    std::string num = std::to_string(i);
    if (num.size() < 3) num.insert(0, 3 - num.size(), '0');
    return prefix + "-" + num;
}

struct CohortSpec {
    std::string prefix;
    double min_percent, max_percent;
};

std::vector<TrialRecord> simulate_cohort(const DeviceProfile& device, const CohortSpec& spec,
                                         const std::vector<double>& sources, const std::vector<bool>& top_flags,
                                         std::uint64_t seed, const DatasetOptions& options) {
    std::vector<TrialRecord> out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const std::uint64_t trial_seed = mix_seed(seed, i + 1);
        Rng rng(trial_seed);
        SimConfig c;
        c.device = device;
        c.trial_id = indexed_id(spec.prefix, i);
        c.source_temp_f = sources[i];
        c.initial_device_f = rng.uniform(70.0, 83.0);
        c.duration_s = options.duration_s;
        c.noise_sd_f = options.noise_sd_f;
        c.drift = options.drift;
        c.seed = trial_seed;
        if (device.has_screen_matrix) {
            c.patch = top_flags[i] ? draw_patch(rng, spec.min_percent, spec.max_percent, kTopThirdRow,
                                                static_cast<int>(kGridRows) - 1)
                                   : draw_patch(rng, spec.min_percent, spec.max_percent, 0, kTopThirdRow - 1);
        } else {
            c.patch = kFullPatch;
        }
        out.push_back(simulate_trial(c));
    }
    return out;
}

} // namespace

std::vector<TrialRecord> simulate_lab_dataset(const DeviceProfile& device, std::size_t n, std::uint64_t seed,
                                              const DatasetOptions& options) {
    if (n < 10) throw ValidationError("n", "lab dataset needs n >= 10");
    Rng rng(seed);
    const auto sources = stratified_sources(rng, n);
    const auto flags = top_biased_flags(rng, n);
    return simulate_cohort(device, {"lab", 0.30, 0.50}, sources, flags, seed, options);
}

std::vector<TrialRecord> simulate_clinical_dataset(const DeviceProfile& device, std::size_t n, std::uint64_t seed,
                                                   const DatasetOptions& options) {
    if (n == 0) throw ValidationError("n", "clinical dataset needs n >= 1");
    Rng rng(seed);
    std::vector<double> sources(n);
    for (auto& s : sources) s = rng.uniform(97.0, 101.0);
    const auto flags = top_biased_flags(rng, n);
    return simulate_cohort(device, {"clinical", 0.08, 0.20}, sources, flags, seed, options);
}

} // namespace thermoscreen
