// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "thermoscreen/contact.hpp"
#include "thermoscreen/eval.hpp"
#include "thermoscreen/rng.hpp"
#include "thermoscreen/simulate.hpp"

using namespace thermoscreen;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

const ProfileLibrary& lib() {
    static const ProfileLibrary l = ProfileLibrary::builtin();
    return l;
}

const DeviceProfile& phone() { return lib().at(kPhoneProfile); }

constexpr std::uint64_t kReplicaSeed = 1;

const std::vector<TrialRecord>& replica() {
    static const auto trials = simulate_lab_dataset(phone(), 51, kReplicaSeed);
    return trials;
}

std::vector<TrainingExample> replica_examples(const std::string& sensor, double duration_s) {
    std::vector<TrainingExample> d;
    for (const auto& t : replica()) d.push_back({build_features(t, phone(), sensor, duration_s), *t.ground_truth_f});
    return d;
}

Outcome exponential_recovery() {
    const auto start = Clock::now();
    Rng rng(101);
    double worst_tp = 0, worst_k = 0;
    for (int i = 0; i < 200; ++i) {
        const double t0 = rng.uniform(70, 83);
        const double tp = t0 + rng.uniform(2, 30);
        const double k = std::exp(rng.uniform(std::log(5e-4), std::log(0.05)));
        const auto n = static_cast<std::size_t>(rng.uniform_int(8, 40));
        ThermistorSeries s{"x", {}};
        for (std::size_t j = 0; j < n; ++j) {
            const double t = 180.0 * static_cast<double>(j) / static_cast<double>(n - 1);
            s.samples.push_back({t, heating_curve(t0, tp, k, t)});
        }
        const auto fit = fit_exponential(s);
        worst_tp = std::max(worst_tp, std::abs(fit.t_peak_f - tp));
        worst_k = std::max(worst_k, std::abs(fit.k - k) / k);
    }
    const double secs = seconds_since(start);
    return {worst_tp <= 1e-4 && worst_k <= 1e-3 && secs < 10,
            "max |dTpeak|=" + fmt("%.2e", worst_tp) + " F (<=1e-4), max rel dk=" + fmt("%.2e", worst_k) +
                " (<=1e-3), " + fmt("%.2f", secs) + " s (<10)"};
}

Outcome watch_mae() {
    const auto start = Clock::now();
    Rng rng(202);
    const double periods[] = {60, 45, 36};  // 4, 5 and 6 samples over 180 s
    double sum = 0;
    std::size_t min_n = 99, max_n = 0;
    for (int i = 0; i < 100; ++i) {
        SimConfig c;
        c.device = lib().at(kWatchProfile);
        c.device.sensors[0].sample_period_s = periods[i % 3];
        c.device.sensors[0].noise_sd_f = 0.1;
        c.device.sensors[0].quantization_f = 0.1;
        c.source_temp_f = rng.uniform(95, 102.5);
        c.initial_device_f = rng.uniform(70, 83);
        c.seed = rng.next_u64();
        c.trial_id = "watch-" + std::to_string(i);
        const auto trial = simulate_trial(c);
        const auto& series = trial.series.front();
        min_n = std::min(min_n, series.samples.size());
        max_n = std::max(max_n, series.samples.size());
        sum += std::abs(fit_exponential(series).t_peak_f - c.source_temp_f);
    }
    const double mae = sum / 100;
    const double secs = seconds_since(start);
    return {mae <= 0.5 && min_n >= 4 && max_n <= 6 && secs < 10,
            "MAE=" + fmt("%.3f", mae) + " F (<=0.5), samples " + std::to_string(min_n) + "-" + std::to_string(max_n) +
                ", " + fmt("%.2f", secs) + " s (<10)"};
}

struct ReplicaRun {
    EvaluationReport quad;
    double linear_mae = 0;
    double secs = 0;
};

const ReplicaRun& replica_run() {
    static const ReplicaRun r = [] {
        const auto start = Clock::now();
        const auto d = replica_examples("pa_0", kDefaultDurationS);
        EvaluationOptions opt;
        opt.seed = kReplicaSeed;
        ReplicaRun out;
        out.quad = evaluate(d, opt);
        out.linear_mae = kfold_predictions(d, ModelKind::linear, opt.k, opt.seed).mean_fold_mae;
        out.secs = seconds_since(start);
        return out;
    }();
    return r;
}

Outcome lab_regression() {
    const auto start = Clock::now();
    replica();
    const auto& r = replica_run();
    const double secs = seconds_since(start);
    return {r.quad.mae_f <= 1.0 && r.quad.mae_f <= r.linear_mae && secs < 30,
            "quadratic MAE=" + fmt("%.3f", r.quad.mae_f) + " F (<=1.0), linear MAE=" + fmt("%.3f", r.linear_mae) +
                " F (>= quadratic), " + fmt("%.2f", secs) + " s (<30)"};
}

Outcome screening() {
    const auto& roc = replica_run().quad.roc;
    return {roc.auc >= 0.95 && roc.best_threshold_f >= 100.0 && roc.best_threshold_f <= 101.5,
            "AUC=" + fmt("%.4f", roc.auc) + " (>=0.95), Youden threshold=" + fmt("%.3f", roc.best_threshold_f) +
                " F (in [100.0, 101.5]), tpr=" + fmt("%.3f", roc.best_tpr) + " fpr=" + fmt("%.3f", roc.best_fpr)};
}

Outcome metric_oracles() {
    Rng rng(505);
    double worst = 0, worst_identity = 0;
    for (int round = 0; round < 100; ++round) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(4, 25));
        std::vector<PredictionPair> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            const double truth = i == 0 ? 99.0 : i == 1 ? 101.0 : rng.uniform(96, 103);
            double pred = truth + rng.normal(0, 1);
            if (round % 2) pred = std::round(pred * 2) / 2;  // ties
            pairs.push_back({truth, pred});
        }
        std::vector<double> t, p, e, ae;
        for (const auto& x : pairs) {
            t.push_back(x.truth_f);
            p.push_back(x.pred_f);
            e.push_back(x.pred_f - x.truth_f);
            ae.push_back(std::abs(x.pred_f - x.truth_f));
        }
        const auto es = error_stats(pairs);
        const auto co = correlation(pairs);
        const auto ba = bland_altman(pairs);
        const auto rc = roc(pairs);
        const double m = oracle::mean(e), sd = oracle::sample_sd(e);
        const double diffs[] = {
            es.mae_f - oracle::mean(ae),
            es.mean_err_f - m,
            es.sd_err_f - sd,
            co.pearson_r - oracle::pearson(t, p),
            co.r_squared - oracle::r_squared(t, p),
            ba.loa_low_f - (m - 1.96 * sd),
            ba.loa_high_f - (m + 1.96 * sd),
            rc.auc - oracle::trapezoid_auc(t, p, kFeverCutoffF),
        };
        for (double d : diffs) worst = std::max(worst, std::abs(d));
        worst_identity = std::max(worst_identity, std::abs(rc.auc - oracle::concordant_auc(t, p, kFeverCutoffF)));
    }
    return {worst <= 1e-9 && worst_identity <= 1e-9,
            "max oracle diff=" + fmt("%.2e", worst) + " (<=1e-9), max |AUC - concordant|=" +
                fmt("%.2e", worst_identity) + " (<=1e-9)"};
}

Outcome contact_analytics() {
    Rng rng(606);
    bool scale_exact = true;
    for (int round = 0; round < 50; ++round) {
        std::vector<CapacitanceFrame> frames(static_cast<std::size_t>(rng.uniform_int(1, 12)));
        for (auto& f : frames)
            for (auto& v : f.matrix.cells()) v = rng.uniform_int(0, 1000);
        const auto scale = rng.uniform_int(2, 1000);
        auto scaled = frames;
        for (auto& f : scaled)
            for (auto& v : f.matrix.cells()) v *= scale;
        if (!(contact_mask(average_frames(frames)) == contact_mask(average_frames(scaled)))) scale_exact = false;
    }

    double worst_pct = 0, worst_cen = 0;
    for (int i = 0; i < 100; ++i) {
        SimConfig c;
        c.device = phone();
        c.patch.row_lo = static_cast<int>(rng.uniform_int(0, 31));
        c.patch.row_hi = static_cast<int>(rng.uniform_int(c.patch.row_lo, 31));
        c.patch.col_lo = static_cast<int>(rng.uniform_int(0, 15));
        c.patch.col_hi = static_cast<int>(rng.uniform_int(c.patch.col_lo, 15));
        c.seed = rng.next_u64();
        const auto stats = contact_stats(simulate_trial(c).frames);
        worst_pct = std::max(worst_pct, std::abs(stats.percent - c.patch.percent()));
        worst_cen = std::max(worst_cen, std::abs(stats.centroid.value_or(-1) - c.patch.centroid()));
    }
    return {scale_exact && worst_pct <= 1.0 / 512 && worst_cen <= 1.0 / 31,
            std::string("scale invariance ") + (scale_exact ? "exact" : "BROKEN") + ", max |dpercent|=" +
                fmt("%.2e", worst_pct) + " (<=1/512), max |dcentroid|=" + fmt("%.2e", worst_cen) + " (<=1/31)"};
}

Outcome sweep_shape() {
    std::vector<std::string> sensors;
    for (const auto& s : phone().sensors) sensors.push_back(s.sensor_id);
    const std::vector<double> durations(kSweepDurationsS.begin(), kSweepDurationsS.end());
    EvaluationOptions opt;
    opt.seed = kReplicaSeed;
    const auto table = duration_sweep(replica(), lib(), opt, sensors, durations);

    bool ok = true;
    std::string worst_sensor;
    double worst_gap = -1e9;
    std::optional<double> battery_30, max_other_30;
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto& row = table.cells[i];
        const auto& at30 = row.front().mae_f;
        const auto& at180 = row.back().mae_f;
        if (sensors[i] == "battery") {
            battery_30 = at30;
            continue;
        }
        if (at30) max_other_30 = std::max(max_other_30.value_or(0), *at30);
        // Every other sensor samples at least every 5 s.
        if (!at30 || !at180) {
            ok = false;
            continue;
        }
        if (*at180 - *at30 > worst_gap) {
            worst_gap = *at180 - *at30;
            worst_sensor = sensors[i];
        }
        if (*at180 > *at30 + 0.1) ok = false;
    }
    const bool battery_ok = !battery_30 || (max_other_30 && *battery_30 >= *max_other_30);
    return {ok && battery_ok,
            "max MAE(180)-MAE(30)=" + fmt("%.3f", worst_gap) + " F at " + worst_sensor + " (<=0.1), battery at 30 s " +
                (battery_30 ? "MAE=" + fmt("%.3f", *battery_30) : std::string("infeasible")) +
                (battery_ok ? "" : " (not worst)")};
}

Outcome determinism() {
    std::size_t checked = 0;
    bool ok = true;
    auto same = [&](const std::string& a, const std::string& b) {
        ++checked;
        if (a != b) ok = false;
    };

    const auto a = simulate_lab_dataset(phone(), 51, 808);
    const auto b = simulate_lab_dataset(phone(), 51, 808);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto text = write_trial(a[i]);
        same(text, write_trial(b[i]));
        same(text, write_trial(parse_trial(text, lib())));
    }
    const auto w = simulate_clinical_dataset(lib().at(kWatchProfile), 7, 808);
    for (const auto& t : w) same(write_trial(t), write_trial(parse_trial(write_trial(t), lib())));

    std::vector<TrainingExample> d1, d2;
    for (const auto& t : a) d1.push_back({build_features(t, phone(), "pa_0", 180), *t.ground_truth_f});
    for (const auto& t : b) d2.push_back({build_features(t, phone(), "pa_0", 180), *t.ground_truth_f});
    for (auto kind : {ModelKind::linear, ModelKind::quadratic}) {
        const auto m = save_model(fit_model(d1, kind));
        same(m, save_model(fit_model(d2, kind)));
        same(m, save_model(load_model(m)));
    }
    EvaluationOptions opt;
    opt.seed = 808;
    same(report_to_json(evaluate(d1, opt)), report_to_json(evaluate(d2, opt)));
    const auto profiles = lib().write();
    same(profiles, ProfileLibrary::parse(profiles).write());
    return {ok, std::to_string(checked) + " byte comparisons, " + (ok ? "all identical" : "MISMATCH")};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"exponential recovery", exponential_recovery},
        {"watch-path MAE", watch_mae},
        {"lab-replica regression", lab_regression},
        {"screening quality", screening},
        {"metric oracles", metric_oracles},
        {"contact analytics", contact_analytics},
        {"duration sweep shape", sweep_shape},
        {"determinism and round-trip", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
