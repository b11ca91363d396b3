#include "thermoscreen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thermoscreen/canonical_json.hpp"
#include "thermoscreen/error.hpp"
#include "thermoscreen/rng.hpp"

namespace thermoscreen {

std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("k", "k-fold needs k >= 2");
    if (n < k) throw UnderdeterminedError("k-fold needs at least k examples");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());

    std::vector<std::size_t> fold_of(n);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold_of[order[pos++]] = f;
    }
    return fold_of;
}

KFoldResult kfold_predictions(std::span<const TrainingExample> data, ModelKind kind, std::size_t k, std::uint64_t seed) {
    const std::size_t n = data.size();
    const auto fold_of = kfold_assignment(n, k, seed);
    const std::size_t largest_fold = n / k + (n % k ? 1 : 0);
    if (n - largest_fold < basis_size(kind))
        throw UnderdeterminedError("k-fold training split of " + std::to_string(n - largest_fold) +
                                   " examples is too small for a " + std::string(to_string(kind)) + " model");

    KFoldResult out;
    out.k = k;
    out.fold_of = fold_of;
    out.pairs.resize(n);
    out.per_fold_mae.assign(k, 0.0);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<TrainingExample> train;
        for (std::size_t i = 0; i < n; ++i)
            if (fold_of[i] != f) train.push_back(data[i]);
        const auto model = fit_model(train, kind);
        double abs_sum = 0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] != f) continue;
            const double pred = predict(model, data[i].features);
            out.pairs[i] = {data[i].truth_f, pred};
            abs_sum += std::abs(pred - data[i].truth_f);
            ++count;
        }
        out.per_fold_mae[f] = abs_sum / static_cast<double>(count);
    }
    out.mean_fold_mae = std::accumulate(out.per_fold_mae.begin(), out.per_fold_mae.end(), 0.0) / static_cast<double>(k);
    return out;
}

ErrorStats error_stats(std::span<const PredictionPair> pairs) {
    if (pairs.empty()) throw InsufficientDataError("error_stats: no prediction pairs");
    if (pairs.size() < 2) throw InsufficientDataError("error_stats: standard deviation needs at least 2 pairs");
    const auto n = static_cast<double>(pairs.size());
    double abs_sum = 0, sum = 0;
    for (const auto& p : pairs) {
        const double e = p.pred_f - p.truth_f;
        abs_sum += std::abs(e);
        sum += e;
    }
    const double mean = sum / n;
    double ss = 0;
    for (const auto& p : pairs) {
        const double d = p.pred_f - p.truth_f - mean;
        ss += d * d;
    }
    return {abs_sum / n, mean, std::sqrt(ss / (n - 1))};
}

Correlation correlation(std::span<const PredictionPair> pairs) {
    if (pairs.size() < 3) throw InsufficientDataError("correlation: needs at least 3 pairs");
    const auto n = static_cast<double>(pairs.size());
    double mt = 0, mp = 0;
    for (const auto& p : pairs) {
        mt += p.truth_f;
        mp += p.pred_f;
    }
    mt /= n;
    mp /= n;
    double stt = 0, spp = 0, stp = 0, ss_res = 0;
    for (const auto& p : pairs) {
        const double dt = p.truth_f - mt;
        const double dp = p.pred_f - mp;
        stt += dt * dt;
        spp += dp * dp;
        stp += dt * dp;
        ss_res += (p.truth_f - p.pred_f) * (p.truth_f - p.pred_f);
    }
    if (!(stt > 0) || !(spp > 0)) throw InsufficientDataError("correlation: zero variance");
    const double r = std::clamp(stp / std::sqrt(stt * spp), -1.0, 1.0);
    return {r, 1.0 - ss_res / stt};
}

BlandAltman bland_altman(std::span<const PredictionPair> pairs, double multiplier) {
    if (!(multiplier > 0)) throw ValidationError("loa_multiplier", "must be > 0");
    if (pairs.size() < 2) throw InsufficientDataError("bland_altman: needs at least 2 pairs");
    const auto s = error_stats(pairs);
    return {s.mean_err_f, s.sd_err_f, s.mean_err_f - multiplier * s.sd_err_f, s.mean_err_f + multiplier * s.sd_err_f};
}

RocResult roc(std::span<const PredictionPair> pairs, double positive_cutoff_f) {
    std::vector<PredictionPair> sorted(pairs.begin(), pairs.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.pred_f > b.pred_f; });

    long long positives = 0;
    for (const auto& p : sorted)
        if (p.truth_f >= positive_cutoff_f) ++positives;
    const long long negatives = static_cast<long long>(sorted.size()) - positives;
    if (positives == 0 || negatives == 0)
        throw DegenerateLabelsError("roc: both fever and non-fever examples are required");

    RocResult out;
    const double inf = std::numeric_limits<double>::infinity();
    out.points.push_back({0.0, 0.0, inf});
    out.best_threshold_f = inf;
    long long best_num = 0;  // Youden's J scaled by P*N: tp*N - fp*P

    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double thr = sorted[i].pred_f;
        while (i < sorted.size() && sorted[i].pred_f == thr) {
            if (sorted[i].truth_f >= positive_cutoff_f)
                ++tp;
            else
                ++fp;
            ++i;
        }
        const RocPoint pt{static_cast<double>(fp) / static_cast<double>(negatives),
                          static_cast<double>(tp) / static_cast<double>(positives), thr};
        out.points.push_back(pt);
        const long long num = tp * negatives - fp * positives;
        if (num > best_num) {
            best_num = num;
            out.best_threshold_f = thr;
            out.best_tpr = pt.tpr;
            out.best_fpr = pt.fpr;
        }
    }

    for (std::size_t j = 1; j < out.points.size(); ++j) {
        const auto& a = out.points[j - 1];
        const auto& b = out.points[j];
        out.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return out;
}

EvaluationReport evaluate(std::span<const TrainingExample> data, const EvaluationOptions& options) {
    EvaluationReport rep;
    rep.options = options;
    rep.n = data.size();
    const auto kf = kfold_predictions(data, options.kind, options.k, options.seed);
    rep.pairs = kf.pairs;
    rep.per_fold_mae = kf.per_fold_mae;
    rep.mae_f = kf.mean_fold_mae;

    const auto es = error_stats(rep.pairs);
    rep.pooled_mae_f = es.mae_f;
    rep.mean_err_f = es.mean_err_f;
    rep.sd_err_f = es.sd_err_f;

    const auto corr = correlation(rep.pairs);
    rep.pearson_r = corr.pearson_r;
    rep.r_squared = corr.r_squared;

    const auto ba = bland_altman(rep.pairs, options.loa_multiplier);
    rep.loa_low_f = ba.loa_low_f;
    rep.loa_high_f = ba.loa_high_f;

    rep.roc = roc(rep.pairs, options.fever_cutoff_f);
    return rep;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : (v > 0 ? "inf" : "-inf"); }

} // namespace

std::string report_to_json(const EvaluationReport& r, const nlohmann::json& extra) {
    nlohmann::json doc = extra;
    doc["kind"] = std::string(to_string(r.options.kind));
    doc["k"] = r.options.k;
    doc["seed"] = r.options.seed;
    doc["n"] = r.n;
    doc["fever_cutoff_f"] = r.options.fever_cutoff_f;
    doc["loa_multiplier"] = r.options.loa_multiplier;
    doc["mae_f"] = r.mae_f;
    doc["pooled_mae_f"] = r.pooled_mae_f;
    doc["mean_err_f"] = r.mean_err_f;
    doc["sd_err_f"] = r.sd_err_f;
    doc["pearson_r"] = r.pearson_r;
    doc["r_squared"] = r.r_squared;
    doc["loa_low_f"] = r.loa_low_f;
    doc["loa_high_f"] = r.loa_high_f;
    doc["auc"] = r.roc.auc;
    doc["best_threshold_f"] = finite_or_null(r.roc.best_threshold_f);
    doc["best_tpr"] = r.roc.best_tpr;
    doc["best_fpr"] = r.roc.best_fpr;
    doc["per_fold_mae"] = r.per_fold_mae;
    auto& pts = doc["roc"] = nlohmann::json::array();
    for (const auto& p : r.roc.points)
        pts.push_back({{"fpr", p.fpr}, {"tpr", p.tpr}, {"threshold_f", finite_or_null(p.threshold_f)}});
    return to_canonical_json(doc);
}

std::string roc_to_csv(const RocResult& roc) {
    std::string out = "threshold_f,fpr,tpr\n";
    for (const auto& p : roc.points) out += csv_number(p.threshold_f) + "," + csv_number(p.fpr) + "," + csv_number(p.tpr) + "\n";
    return out;
}

std::string predictions_to_csv(std::span<const std::string> trial_ids, std::span<const PredictionPair> pairs) {
    std::string out = "trial_id,truth_f,pred_f\n";
    for (std::size_t i = 0; i < pairs.size(); ++i)
        out += (i < trial_ids.size() ? trial_ids[i] : std::to_string(i)) + "," + csv_number(pairs[i].truth_f) + "," +
               csv_number(pairs[i].pred_f) + "\n";
    return out;
}

SweepTable duration_sweep(std::span<const TrialRecord> trials, const ProfileLibrary& profiles,
                          const EvaluationOptions& options, std::span<const std::string> sensors,
                          std::span<const double> durations_s) {
    SweepTable table;
    table.sensors.assign(sensors.begin(), sensors.end());
    table.durations_s.assign(durations_s.begin(), durations_s.end());
    for (const auto& sensor : sensors) {
        auto& row = table.cells.emplace_back();
        for (double d : durations_s) {
            SweepCell cell;
            std::vector<TrainingExample> data;
            for (const auto& t : trials) {
                if (!t.ground_truth_f) {
                    ++cell.n_dropped;
                    continue;
                }
                try {
                    data.push_back({build_features(t, profiles.at(t.device), sensor, d), *t.ground_truth_f});
                } catch (const InsufficientDataError&) {
                    ++cell.n_dropped;
                } catch (const ValidationError&) {
                    ++cell.n_dropped;
                }
            }
            cell.n_used = data.size();
            try {
                cell.mae_f = kfold_predictions(data, options.kind, options.k, options.seed).mean_fold_mae;
            } catch (const UnderdeterminedError&) {
                cell.mae_f.reset();
            }
            row.push_back(cell);
        }
    }
    return table;
}

std::string sweep_to_csv(const SweepTable& table) {
    std::string out = "sensor";
    for (double d : table.durations_s) out += "," + format_double(d);
    out += "\n";
    for (std::size_t s = 0; s < table.sensors.size(); ++s) {
        out += table.sensors[s];
        for (const auto& cell : table.cells[s]) out += "," + (cell.mae_f ? format_double(*cell.mae_f) : std::string());
        out += "\n";
    }
    return out;
}

nlohmann::json sweep_to_json(const SweepTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t s = 0; s < table.sensors.size(); ++s) {
        for (std::size_t d = 0; d < table.durations_s.size(); ++d) {
            const auto& cell = table.cells[s][d];
            rows.push_back({{"sensor", table.sensors[s]},
                            {"duration_s", table.durations_s[d]},
                            {"mae_f", cell.mae_f ? nlohmann::json(*cell.mae_f) : nlohmann::json(nullptr)},
                            {"n_used", cell.n_used},
                            {"n_dropped", cell.n_dropped}});
        }
    }
    return rows;
}

} // namespace thermoscreen
