#include "cli_commands.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "thermoscreen/canonical_json.hpp"
#include "thermoscreen/error.hpp"
#include "thermoscreen/eval.hpp"
#include "thermoscreen/simulate.hpp"

namespace thermoscreen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kFeaturesHeader = "trial_id,slope_f_per_s,t0_f,centroid,percent,truth_f";

std::string fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) t = static_cast<std::time_t>(std::atoll(sde));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Everything a command needs to describe itself in a run manifest.
struct Run {
    std::vector<std::string> args;
    std::string command;
    json config = json::object();
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
    std::vector<fs::path> outputs;
};

void write_run_manifest(const Run& run, const fs::path& where) {
    json outputs = json::array();
    for (const auto& p : run.outputs)
        outputs.push_back({{"path", p.string()}, {"fnv1a64", fnv1a64(read_text_file(p))}});
    json doc = {
        {"tool", "thermoscreen"},
        {"version", kToolVersion},
        {"command", run.command},
        {"args", run.args},
        {"config", run.config},
        {"seed", run.seed ? json(*run.seed) : json(nullptr)},
        {"inputs", run.inputs},
        {"outputs", outputs},
        {"timestamp", timestamp()},
    };
    write_text_file(where, to_canonical_json(doc));
}

struct ProfileSource {
    ProfileLibrary library;
    std::string origin;  // file path or "builtin"
};

ProfileSource load_profiles(const std::string& flag) {
    std::string path = flag;
    if (path.empty())
        if (const char* env = std::getenv(kProfilesEnv); env && *env) path = env;
    if (path.empty()) return {ProfileLibrary::builtin(), "builtin"};
    return {ProfileLibrary::load_file(path), path};
}

ContactPatch parse_patch(const std::string& text) {
    // "r0-r1,c0-c1", inclusive
    int v[4];
    if (std::sscanf(text.c_str(), "%d-%d,%d-%d", &v[0], &v[1], &v[2], &v[3]) != 4)
        throw ValidationError("patch", "expected ROWLO-ROWHI,COLLO-COLHI, got '" + text + "'");
    return {v[0], v[1], v[2], v[3]};
}

double parse_number(std::string_view s, const std::string& where) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where, "not a number: '" + std::string(s) + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

struct FeatureRow {
    std::string trial_id;
    TrainingExample example;
};

std::vector<FeatureRow> read_features_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line != kFeaturesHeader)
        throw ParseError(path + ":1", std::string("header must be exactly ") + kFeaturesHeader);
    std::vector<FeatureRow> rows;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        const auto where = path + ":" + std::to_string(lineno);
        const auto cells = split(line, ',');
        if (cells.size() != 6) throw ParseError(where, "expected 6 columns");
        FeatureRow r;
        r.trial_id = cells[0];
        auto& f = r.example.features;
        f.slope_f_per_s = parse_number(cells[1], where);
        f.t0_f = parse_number(cells[2], where);
        f.centroid = parse_number(cells[3], where);
        f.percent = parse_number(cells[4], where);
        r.example.truth_f = parse_number(cells[5], where);
        rows.push_back(std::move(r));
    }
    return rows;
}

// Builds features per trial; infeasible or unlabeled trials are reported and skipped.
std::vector<FeatureRow> collect_features(const std::vector<TrialRecord>& trials, const ProfileLibrary& profiles,
                                         const std::string& sensor, double duration_s,
                                         std::vector<std::string>& dropped) {
    std::vector<FeatureRow> rows;
    for (const auto& t : trials) {
        try {
            if (!t.ground_truth_f) throw ValidationError("ground_truth_f", "missing");
            FeatureRow r{t.trial_id, {build_features(t, profiles.at(t.device), sensor, duration_s), *t.ground_truth_f}};
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            std::cerr << "skipping " << t.trial_id << ": " << e.what() << "\n";
            dropped.push_back(t.trial_id);
        }
    }
    return rows;
}

std::vector<TrainingExample> examples_of(const std::vector<FeatureRow>& rows) {
    std::vector<TrainingExample> out;
    for (const auto& r : rows) out.push_back(r.example);
    return out;
}

ModelKind parse_kind(const std::string& s) { return model_kind_from_string(s); }

// --- commands -------------------------------------------------------------

struct SimulateOpts {
    std::string profile{kPhoneProfile};
    std::string kind = "lab";
    std::optional<std::size_t> n;
    std::uint64_t seed = 0;
    std::string out;
    std::optional<double> noise_sd;
    double duration = kDefaultDurationS;
    double source_f = 100.0;
    double initial_f = 75.0;
    std::string patch = "0-31,0-15";
    std::string trial_id = "sim";
};

int cmd_simulate(const SimulateOpts& o, const ProfileSource& ps, Run run) {
    const auto& device = ps.library.at(o.profile);
    std::vector<TrialRecord> trials;
    DatasetOptions dopt;
    dopt.noise_sd_f = o.noise_sd;
    dopt.duration_s = o.duration;
    if (o.kind == "lab") {
        trials = simulate_lab_dataset(device, o.n.value_or(51), o.seed, dopt);
    } else if (o.kind == "clinical") {
        trials = simulate_clinical_dataset(device, o.n.value_or(7), o.seed, dopt);
    } else if (o.kind == "single") {
        SimConfig c;
        c.device = device;
        c.trial_id = o.trial_id;
        c.source_temp_f = o.source_f;
        c.initial_device_f = o.initial_f;
        c.patch = device.has_screen_matrix ? parse_patch(o.patch) : kFullPatch;
        c.duration_s = o.duration;
        c.seed = o.seed;
        c.noise_sd_f = o.noise_sd;
        trials.push_back(simulate_trial(c));
    } else {
        throw ValidationError("kind", "expected lab, clinical or single");
    }

    const fs::path dir = o.out;
    const auto files = write_dataset(dir, trials);
    run.config = {{"profile", o.profile}, {"kind", o.kind},         {"n", trials.size()},
                  {"duration_s", o.duration}, {"noise_sd_f", o.noise_sd ? json(*o.noise_sd) : json(nullptr)}};
    if (o.kind == "single")
        run.config.update({{"source_f", o.source_f}, {"initial_f", o.initial_f}, {"patch", o.patch}, {"trial_id", o.trial_id}});
    run.seed = o.seed;
    run.inputs = {ps.origin};
    for (const auto& f : files) run.outputs.push_back(dir / f);
    run.outputs.push_back(dir / kDatasetManifest);
    write_run_manifest(run, dir / kRunManifestName);
    std::cout << "wrote " << files.size() << " trials to " << dir.string() << "\n";
    return 0;
}

struct FeaturesOpts {
    std::string dataset;
    std::string sensor = "pa_0";
    double duration = kDefaultDurationS;
    std::string out;
};

int cmd_features(const FeaturesOpts& o, const ProfileSource& ps, Run run) {
    const auto trials = load_dataset(o.dataset, ps.library);
    std::vector<std::string> dropped;
    const auto rows = collect_features(trials, ps.library, o.sensor, o.duration, dropped);
    std::string csv = std::string(kFeaturesHeader) + "\n";
    for (const auto& r : rows) {
        const auto& f = r.example.features;
        csv += r.trial_id + "," + format_double(f.slope_f_per_s) + "," + format_double(f.t0_f) + "," +
               format_double(f.centroid) + "," + format_double(f.percent) + "," + format_double(r.example.truth_f) +
               "\n";
    }
    write_text_file(o.out, csv);
    run.config = {{"sensor", o.sensor}, {"duration_s", o.duration}, {"rows", rows.size()}, {"dropped", dropped}};
    run.inputs = {o.dataset, ps.origin};
    run.outputs = {o.out};
    write_run_manifest(run, o.out + ".run.json");
    std::cout << "wrote " << rows.size() << " rows to " << o.out << "\n";
    return 0;
}

struct TrainOpts {
    std::string features;
    std::string kind = "quadratic";
    std::string out;
};

int cmd_train(const TrainOpts& o, Run run) {
    const auto rows = read_features_csv(o.features);
    const auto data = examples_of(rows);
    const auto model = fit_model(data, parse_kind(o.kind));
    write_text_file(o.out, save_model(model));
    double sum = 0;
    for (const auto& ex : data) sum += std::abs(predict(model, ex.features) - ex.truth_f);
    const double mae = sum / static_cast<double>(data.size());
    run.config = {{"kind", o.kind}, {"n", data.size()}};
    run.inputs = {o.features};
    run.outputs = {o.out};
    write_run_manifest(run, o.out + ".run.json");
    std::cout << "training_mae_f=" << format_double(mae) << " n=" << data.size() << "\n";
    return 0;
}

struct EvaluateOpts {
    std::string dataset;
    std::string sensor = "pa_0";
    std::string kind = "quadratic";
    std::size_t k = 10;
    std::uint64_t seed = 0;
    double loa_multiplier = kDefaultLoaMultiplier;
    double fever_cutoff = kFeverCutoffF;
    double duration = kDefaultDurationS;
    bool durations = false;
    std::vector<std::string> sweep_sensors;
    std::string out;
};

int cmd_evaluate(const EvaluateOpts& o, const ProfileSource& ps, Run run) {
    const auto trials = load_dataset(o.dataset, ps.library);
    std::vector<std::string> dropped;
    const auto rows = collect_features(trials, ps.library, o.sensor, o.duration, dropped);

    EvaluationOptions eo;
    eo.kind = parse_kind(o.kind);
    eo.k = o.k;
    eo.seed = o.seed;
    eo.loa_multiplier = o.loa_multiplier;
    eo.fever_cutoff_f = o.fever_cutoff;
    const auto report = evaluate(examples_of(rows), eo);

    const fs::path dir = o.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    std::vector<std::string> ids;
    for (const auto& r : rows) ids.push_back(r.trial_id);
    const json extra = {{"sensor", o.sensor}, {"duration_s", o.duration}, {"dropped", dropped}};
    write_text_file(dir / "report.json", report_to_json(report, extra));
    write_text_file(dir / "roc.csv", roc_to_csv(report.roc));
    write_text_file(dir / "predictions.csv", predictions_to_csv(ids, report.pairs));
    run.outputs = {dir / "report.json", dir / "roc.csv", dir / "predictions.csv"};

    std::vector<std::string> sensors = o.sweep_sensors;
    if (o.durations) {
        if (sensors.empty()) {
            // Profile order, restricted to sensors present in every trial.
            const auto summary = validate_dataset(trials);
            const std::set<std::string> common(summary.sensors_common.begin(), summary.sensors_common.end());
            for (const auto& s : ps.library.at(trials.front().device).sensors)
                if (common.count(s.sensor_id)) sensors.push_back(s.sensor_id);
        }
        const std::vector<double> durs(kSweepDurationsS.begin(), kSweepDurationsS.end());
        const auto table = duration_sweep(trials, ps.library, eo, sensors, durs);
        write_text_file(dir / "sweep.csv", sweep_to_csv(table));
        write_text_file(dir / "sweep.json", to_canonical_json(sweep_to_json(table)));
        run.outputs.push_back(dir / "sweep.csv");
        run.outputs.push_back(dir / "sweep.json");
    }

    run.config = {{"sensor", o.sensor}, {"kind", o.kind}, {"k", o.k}, {"loa_multiplier", o.loa_multiplier},
                  {"fever_cutoff_f", o.fever_cutoff}, {"duration_s", o.duration}, {"durations", o.durations},
                  {"sweep_sensors", sensors}};
    run.seed = o.seed;
    run.inputs = {o.dataset, ps.origin};
    write_run_manifest(run, dir / kRunManifestName);
    std::cout << "mae_f=" << format_double(report.mae_f) << " auc=" << format_double(report.roc.auc)
              << " threshold_f=" << format_double(report.roc.best_threshold_f) << "\n";
    return 0;
}

struct PredictOpts {
    std::string trial;
    std::string model;
    std::string sensor = "pa_0";
    double threshold = kFeverCutoffF;
    double duration = kDefaultDurationS;
    bool celsius = false;
};

int cmd_predict(const PredictOpts& o, const ProfileSource& ps) {
    const auto trial = parse_trial(read_text_file(o.trial), ps.library);
    const auto model = load_model(read_text_file(o.model));
    const auto features = build_features(trial, ps.library.at(trial.device), o.sensor, o.duration);
    const double t = predict(model, features);
    std::cout << "temp_f=" << format_double(t) << " fever=" << (t >= o.threshold ? "yes" : "no");
    if (o.celsius) std::cout << " temp_c=" << format_double(fahrenheit_to_celsius(t));
    std::cout << "\n";
    return 0;
}

int cmd_replay(const std::string& manifest_path) {
    const auto doc = parse_json_document(read_text_file(manifest_path), "run manifest");
    if (!doc.is_object() || !doc.contains("args") || !doc["args"].is_array() || !doc.contains("outputs"))
        throw ParseError(manifest_path, "not a run manifest");
    std::vector<std::string> args;
    for (const auto& a : doc["args"]) args.push_back(a.get<std::string>());
    if (!args.empty() && args.front() == "replay") throw ValidationError("args", "cannot replay a replay");

    const int status = run(args);
    if (status != 0) return status;

    std::size_t mismatched = 0;
    for (const auto& out : doc["outputs"]) {
        const auto path = out.at("path").get<std::string>();
        if (fnv1a64(read_text_file(path)) != out.at("fnv1a64").get<std::string>()) {
            std::cerr << "replay mismatch: " << path << "\n";
            ++mismatched;
        }
    }
    if (mismatched) return 1;
    std::cout << "replay ok: " << doc["outputs"].size() << " outputs identical\n";
    return 0;
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Fever screening from device thermistor and touch-screen data", "thermoscreen"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    std::string profiles_flag;
    app.add_option("--profiles", profiles_flag, "Device profile library (default: $" + std::string(kProfilesEnv) +
                                                    " or the built-in profiles)");

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic trial corpus");
    sim->add_option("--profile", so.profile, "Device profile name")->capture_default_str();
    sim->add_option("--kind", so.kind, "lab, clinical or single")
        ->check(CLI::IsMember({"lab", "clinical", "single"}))
        ->capture_default_str();
    sim->add_option("--n", so.n, "Number of trials (lab 51, clinical 7)");
    sim->add_option("--seed", so.seed)->capture_default_str();
    sim->add_option("--out", so.out, "Output dataset directory")->required();
    sim->add_option("--noise-sd", so.noise_sd, "Override every sensor's noise sd (F)");
    sim->add_option("--duration", so.duration, "Trial length (s)")->capture_default_str();
    sim->add_option("--source-f", so.source_f, "single: source temperature (F)")->capture_default_str();
    sim->add_option("--initial-f", so.initial_f, "single: initial device temperature (F)")->capture_default_str();
    sim->add_option("--patch", so.patch, "single: contact patch ROWLO-ROWHI,COLLO-COLHI")->capture_default_str();
    sim->add_option("--trial-id", so.trial_id, "single: trial id")->capture_default_str();

    FeaturesOpts fo;
    auto* feat = app.add_subcommand("features", "Extract per-trial features to CSV");
    feat->add_option("--dataset", fo.dataset)->required();
    feat->add_option("--sensor", fo.sensor)->capture_default_str();
    feat->add_option("--duration", fo.duration)->capture_default_str();
    feat->add_option("--out", fo.out, "Output CSV")->required();

    TrainOpts to;
    auto* train = app.add_subcommand("train", "Fit a regression model from a features CSV");
    train->add_option("--features", to.features)->required();
    train->add_option("--kind", to.kind, "linear or quadratic")
        ->check(CLI::IsMember({"linear", "quadratic"}))
        ->capture_default_str();
    train->add_option("--out", to.out, "Output model JSON")->required();

    EvaluateOpts eo;
    auto* eval = app.add_subcommand("evaluate", "k-fold evaluation with ROC, Bland-Altman and duration sweep");
    eval->add_option("--dataset", eo.dataset)->required();
    eval->add_option("--sensor", eo.sensor)->capture_default_str();
    eval->add_option("--kind", eo.kind)->check(CLI::IsMember({"linear", "quadratic"}))->capture_default_str();
    eval->add_option("--k", eo.k)->capture_default_str();
    eval->add_option("--seed", eo.seed)->capture_default_str();
    eval->add_option("--loa-multiplier", eo.loa_multiplier)->capture_default_str();
    eval->add_option("--fever-cutoff", eo.fever_cutoff)->capture_default_str();
    eval->add_option("--duration", eo.duration)->capture_default_str();
    eval->add_flag("--durations", eo.durations, "Also sweep 30..180 s for each sensor");
    eval->add_option("--sweep-sensors", eo.sweep_sensors, "Sensors for the sweep (default: all common)");
    eval->add_option("--out", eo.out, "Output directory")->required();

    PredictOpts po;
    auto* pred = app.add_subcommand("predict", "Predict one trial's source temperature");
    pred->add_option("--trial", po.trial)->required();
    pred->add_option("--model", po.model)->required();
    pred->add_option("--sensor", po.sensor)->capture_default_str();
    pred->add_option("--threshold", po.threshold)->capture_default_str();
    pred->add_option("--duration", po.duration)->capture_default_str();
    pred->add_flag("--celsius", po.celsius, "Also print the prediction in C");

    std::string profiles_out;
    auto* prof = app.add_subcommand("profiles", "Print the device profile library");
    prof->add_option("--out", profiles_out, "Write to a file instead of stdout");

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "Re-run a command from its run manifest and verify outputs");
    replay->add_option("manifest", replay_path)->required();

    std::vector<const char*> argv{"thermoscreen"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    Run run_info;
    run_info.args = args;
    const auto profiles = [&] { return load_profiles(profiles_flag); };
    if (*sim) return run_info.command = "simulate", cmd_simulate(so, profiles(), run_info);
    if (*feat) return run_info.command = "features", cmd_features(fo, profiles(), run_info);
    if (*train) return run_info.command = "train", cmd_train(to, run_info);
    if (*eval) return run_info.command = "evaluate", cmd_evaluate(eo, profiles(), run_info);
    if (*pred) return cmd_predict(po, profiles());
    if (*prof) {
        const auto text = profiles().library.write();
        if (profiles_out.empty())
            std::cout << text;
        else
            write_text_file(profiles_out, text);
        return 0;
    }
    if (*replay) return cmd_replay(replay_path);
    return 1;
}

} // namespace

int run(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace thermoscreen::cli
