#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoscreen/thermal.hpp"

namespace thermoscreen {

enum class ModelKind { linear, quadratic };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

// Linear: [1, x1..x4]. Quadratic adds squares then pairwise products:
// [1, x1, x2, x3, x4, x1², x2², x3², x4², x1x2, x1x3, x1x4, x2x3, x2x4, x3x4]
// with x = (slope, T0, centroid, percent) after standardization.
std::size_t basis_size(ModelKind kind);
std::vector<std::string> term_names(ModelKind kind);
std::vector<double> design_row(const std::array<double, 4>& x, ModelKind kind);

inline constexpr int kModelFormatVersion = 1;
inline constexpr double kMinFeatureScale = 1e-12;
inline constexpr double kRidgeLambda = 1e-8;
inline constexpr double kPredictMinF = 90.0;
inline constexpr double kPredictMaxF = 110.0;

struct FittedModel {
    ModelKind kind = ModelKind::linear;
    std::vector<double> coeffs;
    std::array<double, 4> feature_means{};
    std::array<double, 4> feature_scales{1.0, 1.0, 1.0, 1.0};

    std::array<double, 4> standardize(const FeatureVector& f) const;

    bool operator==(const FittedModel&) const = default;
};

struct TrainingExample {
    FeatureVector features;
    double truth_f = 0.0;
};

// Standardizes each feature (sample sd, floored at 1e-12) and solves the
// least-squares problem with column-pivoted Householder QR. Rank-deficient
// designs fall back to ridge regression with lambda = 1e-8.
// Throws UnderdeterminedError when there are fewer examples than basis terms.
FittedModel fit_model(std::span<const TrainingExample> data, ModelKind kind);

// Unclamped regression value.
double predict_raw(const FittedModel& model, const FeatureVector& f);

// Regression value clamped to [90, 110] F.
double predict(const FittedModel& model, const FeatureVector& f);

std::string save_model(const FittedModel& model);
FittedModel load_model(std::string_view text);

} // namespace thermoscreen
