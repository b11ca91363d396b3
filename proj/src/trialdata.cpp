#include "thermoscreen/trialdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json_fields.hpp"
#include "thermoscreen/canonical_json.hpp"
#include "thermoscreen/error.hpp"

namespace thermoscreen {

using detail::as_array;
using detail::as_integer;
using detail::as_number;
using detail::as_string;
using detail::index_path;
using detail::join_path;
using detail::number_field;
using detail::require;
using detail::string_field;

const ThermistorSeries* TrialRecord::find_series(std::string_view sensor_id) const {
    for (const auto& s : series)
        if (s.sensor_id == sensor_id) return &s;
    return nullptr;
}

void validate_trial(const TrialRecord& trial, const DeviceProfile& profile) {
    if (trial.trial_id.empty()) throw ValidationError("trial_id", "empty trial id");
    if (trial.device != profile.name)
        throw ValidationError("device", "record names '" + trial.device + "' but profile is '" + profile.name + "'");
    if (!(std::isfinite(trial.duration_s) && trial.duration_s > 0))
        throw ValidationError("duration_s", "must be a finite value > 0");
    if (trial.ground_truth_f && !std::isfinite(*trial.ground_truth_f))
        throw ValidationError("ground_truth_f", "must be finite");

    std::set<std::string_view> ids;
    for (std::size_t i = 0; i < trial.series.size(); ++i) {
        const auto& s = trial.series[i];
        const auto ctx = "series[" + std::to_string(i) + "]";
        if (s.sensor_id.empty()) throw ValidationError(ctx + ".sensor_id", "empty sensor id");
        if (!ids.insert(s.sensor_id).second) throw ValidationError(ctx + ".sensor_id", "duplicate sensor id " + s.sensor_id);
        if (!profile.find_sensor(s.sensor_id))
            throw ValidationError(ctx + ".sensor_id", "sensor '" + s.sensor_id + "' not in profile '" + profile.name + "'");
        if (s.samples.empty()) throw ValidationError(ctx + ".samples", "series needs at least one sample");
        double prev_t = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < s.samples.size(); ++j) {
            const auto& smp = s.samples[j];
            const auto sctx = ctx + ".samples[" + std::to_string(j) + "]";
            if (!(std::isfinite(smp.t_s) && smp.t_s >= 0)) throw ValidationError(sctx + ".t_s", "must be finite and >= 0");
            if (!(smp.t_s > prev_t)) throw ValidationError(sctx + ".t_s", "sample times must be strictly increasing");
            if (smp.t_s > trial.duration_s) throw ValidationError(sctx + ".t_s", "sample after duration_s");
            if (!(smp.temp_f >= kMinSaneTempF && smp.temp_f <= kMaxSaneTempF))
                throw ValidationError(sctx + ".temp_f", "outside sanity bounds [32, 150] F");
            prev_t = smp.t_s;
        }
    }

    if (!profile.has_screen_matrix && !trial.frames.empty())
        throw ValidationError("frames", "profile '" + profile.name + "' has no screen matrix");
    for (std::size_t i = 0; i < trial.frames.size(); ++i) {
        const auto& f = trial.frames[i];
        const auto ctx = "frames[" + std::to_string(i) + "]";
        if (!(std::isfinite(f.t_s) && f.t_s >= 0)) throw ValidationError(ctx + ".t_s", "must be finite and >= 0");
        if (f.t_s > trial.duration_s) throw ValidationError(ctx + ".t_s", "frame after duration_s");
        for (auto v : f.matrix.cells())
            if (v < 0) throw ValidationError(ctx + ".matrix", "capacitance cells must be >= 0");
    }
}

namespace {

CapacitanceGrid parse_matrix(const nlohmann::json& v, const std::string& path) {
    as_array(v, path);
    if (v.size() != kGridRows)
        throw ValidationError(path, "matrix dimensions must be 32x16, got " + std::to_string(v.size()) + " rows");
    CapacitanceGrid grid;
    for (std::size_t r = 0; r < kGridRows; ++r) {
        const auto rpath = index_path(path, r);
        const auto& row = as_array(v[r], rpath);
        if (row.size() != kGridCols)
            throw ValidationError(rpath, "matrix dimensions must be 32x16, got a row of " + std::to_string(row.size()));
        for (std::size_t c = 0; c < kGridCols; ++c) grid(r, c) = as_integer(row[c], index_path(rpath, c));
    }
    return grid;
}

} // namespace

TrialRecord parse_trial(std::string_view text, const ProfileLibrary& profiles) {
    const auto doc = parse_json_document(text, "trial");
    if (!doc.is_object()) throw ParseError("trial", "expected a JSON object");

    TrialRecord t;
    t.trial_id = string_field(doc, "trial_id", "");
    t.device = string_field(doc, "device", "");
    t.duration_s = number_field(doc, "duration_s", "");
    const auto& gt = require(doc, "ground_truth_f", "");
    if (!gt.is_null()) t.ground_truth_f = as_number(gt, "ground_truth_f");

    if (auto it = doc.find("metadata"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("metadata", "expected an object");
        for (const auto& [k, v] : it->items()) t.metadata[k] = as_string(v, join_path("metadata", k));
    }

    const auto& series = as_array(require(doc, "series", ""), "series");
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto ctx = index_path("series", i);
        ThermistorSeries s;
        s.sensor_id = string_field(series[i], "sensor_id", ctx);
        const auto spath = join_path(ctx, "samples");
        const auto& samples = as_array(require(series[i], "samples", ctx), spath);
        s.samples.reserve(samples.size());
        for (std::size_t j = 0; j < samples.size(); ++j) {
            const auto p = index_path(spath, j);
            const auto& pair = as_array(samples[j], p);
            if (pair.size() != 2) throw ParseError(p, "expected [t_s, temp_f]");
            s.samples.push_back({as_number(pair[0], p + "[0]"), as_number(pair[1], p + "[1]")});
        }
        t.series.push_back(std::move(s));
    }

    const auto& frames = as_array(require(doc, "frames", ""), "frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto ctx = index_path("frames", i);
        CapacitanceFrame f;
        f.t_s = number_field(frames[i], "t_s", ctx);
        f.matrix = parse_matrix(require(frames[i], "matrix", ctx), join_path(ctx, "matrix"));
        t.frames.push_back(std::move(f));
    }

    validate_trial(t, profiles.at(t.device));
    return t;
}

std::string write_trial(const TrialRecord& trial) {
    nlohmann::json doc;
    doc["trial_id"] = trial.trial_id;
    doc["device"] = trial.device;
    doc["duration_s"] = trial.duration_s;
    doc["ground_truth_f"] = trial.ground_truth_f ? nlohmann::json(*trial.ground_truth_f) : nlohmann::json(nullptr);
    doc["metadata"] = nlohmann::json::object();
    for (const auto& [k, v] : trial.metadata) doc["metadata"][k] = v;

    auto& series = doc["series"] = nlohmann::json::array();
    for (const auto& s : trial.series) {
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& smp : s.samples) samples.push_back(nlohmann::json::array({smp.t_s, smp.temp_f}));
        series.push_back({{"sensor_id", s.sensor_id}, {"samples", std::move(samples)}});
    }

    auto& frames = doc["frames"] = nlohmann::json::array();
    for (const auto& f : trial.frames) {
        nlohmann::json matrix = nlohmann::json::array();
        for (std::size_t r = 0; r < kGridRows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < kGridCols; ++c) row.push_back(f.matrix(r, c));
            matrix.push_back(std::move(row));
        }
        frames.push_back({{"t_s", f.t_s}, {"matrix", std::move(matrix)}});
    }
    return to_canonical_json(doc);
}

DatasetSummary validate_dataset(const std::vector<TrialRecord>& trials) {
    if (trials.empty()) throw ValidationError("dataset", "empty trial list");
    DatasetSummary out;
    out.n = trials.size();
    out.temp_min_f = std::numeric_limits<double>::infinity();
    out.temp_max_f = -std::numeric_limits<double>::infinity();

    std::set<std::string> common;
    bool first = true;
    for (const auto& t : trials) {
        if (!t.ground_truth_f) throw ValidationError("ground_truth_f", "trial '" + t.trial_id + "' has no ground truth");
        const double gt = *t.ground_truth_f;
        if (gt >= kFeverCutoffF) ++out.n_febrile;
        out.temp_min_f = std::min(out.temp_min_f, gt);
        out.temp_max_f = std::max(out.temp_max_f, gt);

        std::set<std::string> ids;
        for (const auto& s : t.series) ids.insert(s.sensor_id);
        if (first) {
            common = std::move(ids);
            first = false;
        } else {
            std::set<std::string> kept;
            std::set_intersection(common.begin(), common.end(), ids.begin(), ids.end(), std::inserter(kept, kept.end()));
            common = std::move(kept);
        }
    }
    out.sensors_common.assign(common.begin(), common.end());
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> write_dataset(const std::filesystem::path& dir, const std::vector<TrialRecord>& trials) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    std::vector<std::string> files;
    for (const auto& t : trials) {
        auto name = t.trial_id + ".json";
        write_text_file(dir / name, write_trial(t));
        files.push_back(std::move(name));
    }
    nlohmann::json manifest = {{"version", 1}, {"trials", files}};
    write_text_file(dir / kDatasetManifest, to_canonical_json(manifest));
    return files;
}

std::vector<TrialRecord> load_dataset(const std::filesystem::path& dir, const ProfileLibrary& profiles) {
    const auto manifest = parse_json_document(read_text_file(dir / kDatasetManifest), "manifest");
    const auto& files = as_array(require(manifest, "trials", "manifest"), "manifest.trials");
    std::vector<TrialRecord> trials;
    trials.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto name = as_string(files[i], index_path("manifest.trials", i));
        try {
            trials.push_back(parse_trial(read_text_file(dir / name), profiles));
        } catch (const ParseError& e) {
            throw ParseError(name, e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(name + ":" + e.field(), e.message());
        }
    }
    return trials;
}

} // namespace thermoscreen
