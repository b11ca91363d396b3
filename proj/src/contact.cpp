#include "thermoscreen/contact.hpp"

#include <algorithm>
#include <cmath>

#include "thermoscreen/error.hpp"

namespace thermoscreen {

AverageGrid average_frames(std::span<const CapacitanceFrame> frames) {
    if (frames.empty()) throw InsufficientDataError("average_frames: no capacitance frames");
    // Integer accumulation keeps the mean independent of frame order.
    Grid<long long> sums;
    for (const auto& f : frames) {
        auto src = f.matrix.cells();
        auto dst = sums.cells();
        for (std::size_t i = 0; i < kGridCells; ++i) dst[i] += src[i];
    }
    AverageGrid avg;
    const auto n = static_cast<double>(frames.size());
    for (std::size_t i = 0; i < kGridCells; ++i) avg.cells()[i] = static_cast<double>(sums.cells()[i]) / n;
    return avg;
}

ContactMask contact_mask(const AverageGrid& avg) {
    const auto cells = avg.cells();
    for (double v : cells)
        if (!(v >= 0)) throw ValidationError("matrix", "averaged capacitance must be >= 0");
    const double c_max = *std::max_element(cells.begin(), cells.end());
    const double tau = kContactThresholdFraction * c_max;
    ContactMask mask;
    for (std::size_t i = 0; i < kGridCells; ++i) mask.cells()[i] = cells[i] > tau;
    return mask;
}

std::size_t mask_size(const ContactMask& mask) {
    const auto cells = mask.cells();
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), true));
}

double contact_percent(const ContactMask& mask) {
    return static_cast<double>(mask_size(mask)) / static_cast<double>(kGridCells);
}

double contact_centroid(const ContactMask& mask) {
    std::size_t count = 0;
    std::size_t row_sum = 0;
    for (std::size_t r = 0; r < kGridRows; ++r)
        for (std::size_t c = 0; c < kGridCols; ++c)
            if (mask(r, c)) {
                ++count;
                row_sum += r;
            }
    if (count == 0) throw InsufficientDataError("contact_centroid: no contact (empty mask)");
    return static_cast<double>(row_sum) / static_cast<double>(count) / static_cast<double>(kGridRows - 1);
}

ContactStats contact_stats(std::span<const CapacitanceFrame> frames) {
    const auto avg = average_frames(frames);
    const auto mask = contact_mask(avg);
    ContactStats s;
    s.c_max = *std::max_element(avg.cells().begin(), avg.cells().end());
    s.tau = kContactThresholdFraction * s.c_max;
    s.mask_size = mask_size(mask);
    s.percent = contact_percent(mask);
    if (s.mask_size > 0) s.centroid = contact_centroid(mask);
    return s;
}

} // namespace thermoscreen
