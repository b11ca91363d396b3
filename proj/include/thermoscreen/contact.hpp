#pragma once

#include <optional>
#include <span>

#include "thermoscreen/grid.hpp"
#include "thermoscreen/trialdata.hpp"

namespace thermoscreen {

// Cells count as contact when their averaged capacitance exceeds this
// fraction of the grid maximum.
inline constexpr double kContactThresholdFraction = 0.25;

struct ContactStats {
    double percent = 0.0;           // mask_size / 512
    std::optional<double> centroid; // absent iff the mask is empty
    std::size_t mask_size = 0;
    double c_max = 0.0;
    double tau = 0.0;  // kContactThresholdFraction * c_max
};

// Cell-wise mean over all frames. Throws InsufficientDataError on an empty list.
AverageGrid average_frames(std::span<const CapacitanceFrame> frames);

// Strict test: value > 0.25 * max. An all-zero grid yields an empty mask.
ContactMask contact_mask(const AverageGrid& avg);

std::size_t mask_size(const ContactMask& mask);

double contact_percent(const ContactMask& mask);

// Mean in-mask row index over 31: 0 = bottom row, 1 = top row. Columns are
// ignored. Throws InsufficientDataError when the mask is empty.
double contact_centroid(const ContactMask& mask);

ContactStats contact_stats(std::span<const CapacitanceFrame> frames);

} // namespace thermoscreen
