#pragma once

#include <cmath>
#include <cstddef>

namespace trrgen::oracle {

// Sinusoidal encoding evaluated term by term from its closed form.
inline double positional_value(std::size_t pos, std::size_t dim, std::size_t d_model) {
    const double i = static_cast<double>(dim / 2);
    const double angle = static_cast<double>(pos) / std::pow(10000.0, 2.0 * i / static_cast<double>(d_model));
    return dim % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

}  // namespace trrgen::oracle
