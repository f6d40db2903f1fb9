#pragma once

#include "hema/image.hpp"

namespace hema {

// Hue in degrees [0, 360); saturation and value as fractions in [0, 1].
struct Hsv {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

// Standard hexcone conversion. v = max/255; s = 0 when max = 0, else
// (max-min)/max; h from the piecewise sector formula, 0 for achromatic
// pixels by convention.
Hsv rgb_to_hsv(Rgb c);

// Inverse hexcone; used for synthesizing test imagery.
Rgb hsv_to_rgb(const Hsv& hsv);

}  // namespace hema
