#include "thermoscreen/models.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "json_fields.hpp"
#include "thermoscreen/canonical_json.hpp"
#include "thermoscreen/error.hpp"

namespace thermoscreen {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::linear ? "linear" : "quadratic"; }

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "linear") return ModelKind::linear;
    if (s == "quadratic") return ModelKind::quadratic;
    throw ValidationError("kind", "unknown model kind '" + std::string(s) + "'");
}

std::size_t basis_size(ModelKind kind) { return kind == ModelKind::linear ? 5 : 15; }

std::vector<std::string> term_names(ModelKind kind) {
    const std::array<std::string, 4> x = {"m", "t0", "centroid", "percent"};
    std::vector<std::string> out = {"1"};
    for (const auto& v : x) out.push_back(v);
    if (kind == ModelKind::quadratic) {
        for (const auto& v : x) out.push_back(v + "^2");
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) out.push_back(x[i] + "*" + x[j]);
    }
    return out;
}

std::vector<double> design_row(const std::array<double, 4>& x, ModelKind kind) {
    std::vector<double> row;
    row.reserve(basis_size(kind));
    row.push_back(1.0);
    for (double v : x) row.push_back(v);
    if (kind == ModelKind::quadratic) {
        for (double v : x) row.push_back(v * v);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) row.push_back(x[i] * x[j]);
    }
    return row;
}

std::array<double, 4> FittedModel::standardize(const FeatureVector& f) const {
    auto x = f.values();
    for (std::size_t i = 0; i < 4; ++i) x[i] = (x[i] - feature_means[i]) / feature_scales[i];
    return x;
}

FittedModel fit_model(std::span<const TrainingExample> data, ModelKind kind) {
    const std::size_t p = basis_size(kind);
    const std::size_t n = data.size();
    if (n < p)
        throw UnderdeterminedError(std::string(to_string(kind)) + " regression needs at least " + std::to_string(p) +
                                   " examples, got " + std::to_string(n));
    for (const auto& ex : data) {
        for (double v : ex.features.values())
            if (!std::isfinite(v)) throw ValidationError("features", "non-finite feature value");
        if (!std::isfinite(ex.truth_f)) throw ValidationError("truth_f", "non-finite target");
    }

    FittedModel model;
    model.kind = kind;
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0;
        for (const auto& ex : data) mean += ex.features.values()[j];
        mean /= static_cast<double>(n);
        double ss = 0;
        for (const auto& ex : data) {
            const double d = ex.features.values()[j] - mean;
            ss += d * d;
        }
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        model.feature_means[j] = mean;
        model.feature_scales[j] = std::max(sd, kMinFeatureScale);
    }

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = design_row(model.standardize(data[i].features), kind);
        for (std::size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        y(static_cast<Eigen::Index>(i)) = data[i].truth_f;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    Eigen::VectorXd w;
    if (static_cast<std::size_t>(qr.rank()) == p) {
        w = qr.solve(y);
    } else {
        const auto pi = static_cast<Eigen::Index>(p);
        Eigen::MatrixXd A(X.rows() + pi, pi);
        A << X, std::sqrt(kRidgeLambda) * Eigen::MatrixXd::Identity(pi, pi);
        Eigen::VectorXd b(X.rows() + pi);
        b << y, Eigen::VectorXd::Zero(pi);
        w = A.colPivHouseholderQr().solve(b);
    }
    model.coeffs.assign(w.data(), w.data() + w.size());
    return model;
}

double predict_raw(const FittedModel& model, const FeatureVector& f) {
    const auto row = design_row(model.standardize(f), model.kind);
    double acc = 0;
    for (std::size_t j = 0; j < row.size(); ++j) acc += model.coeffs[j] * row[j];
    return acc;
}

double predict(const FittedModel& model, const FeatureVector& f) {
    return std::clamp(predict_raw(model, f), kPredictMinF, kPredictMaxF);
}

std::string save_model(const FittedModel& model) {
    nlohmann::json doc;
    doc["version"] = kModelFormatVersion;
    doc["kind"] = std::string(to_string(model.kind));
    doc["coeffs"] = model.coeffs;
    doc["feature_means"] = model.feature_means;
    doc["feature_scales"] = model.feature_scales;
    return to_canonical_json(doc);
}

FittedModel load_model(std::string_view text) {
    using namespace detail;
    const auto doc = parse_json_document(text, "model");
    const auto& version = require(doc, "version", "");
    if (as_integer(version, "version") != kModelFormatVersion)
        throw ValidationError("version", "unsupported model format version " + version.dump());

    FittedModel m;
    m.kind = model_kind_from_string(string_field(doc, "kind", ""));
    const auto& coeffs = as_array(require(doc, "coeffs", ""), "coeffs");
    for (std::size_t i = 0; i < coeffs.size(); ++i) m.coeffs.push_back(as_number(coeffs[i], index_path("coeffs", i)));
    if (m.coeffs.size() != basis_size(m.kind))
        throw ValidationError("coeffs", "expected " + std::to_string(basis_size(m.kind)) + " coefficients for a " +
                                            std::string(to_string(m.kind)) + " model");

    auto read4 = [&](const char* key, std::array<double, 4>& dst) {
        const auto& arr = as_array(require(doc, key, ""), key);
        if (arr.size() != 4) throw ValidationError(key, "expected 4 values");
        for (std::size_t i = 0; i < 4; ++i) dst[i] = as_number(arr[i], index_path(key, i));
    };
    read4("feature_means", m.feature_means);
    read4("feature_scales", m.feature_scales);
    for (double s : m.feature_scales)
        if (!(s > 0)) throw ValidationError("feature_scales", "scales must be > 0");
    for (double c : m.coeffs)
        if (!std::isfinite(c)) throw ValidationError("coeffs", "non-finite coefficient");
    return m;
}

} // namespace thermoscreen
