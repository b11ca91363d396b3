#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace thermoscreen {

// Touchscreen capacitance grid. Rows run along the device major axis
// (row 0 = microphone end, row 31 = camera end); columns along the minor axis.
inline constexpr std::size_t kGridRows = 32;
inline constexpr std::size_t kGridCols = 16;
inline constexpr std::size_t kGridCells = kGridRows * kGridCols;

template <typename T>
class Grid {
public:
    constexpr Grid() : cells_{} {}
    explicit constexpr Grid(T fill) { cells_.fill(fill); }

    constexpr T& operator()(std::size_t row, std::size_t col) { return cells_[row * kGridCols + col]; }
    constexpr const T& operator()(std::size_t row, std::size_t col) const { return cells_[row * kGridCols + col]; }

    std::span<T, kGridCells> cells() { return cells_; }
    std::span<const T, kGridCells> cells() const { return cells_; }

    bool operator==(const Grid&) const = default;

private:
    std::array<T, kGridCells> cells_;
};

using CapacitanceGrid = Grid<long long>;
using AverageGrid = Grid<double>;
using ContactMask = Grid<bool>;

} // namespace thermoscreen
