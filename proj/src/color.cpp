#include "hema/color.hpp"

#include <algorithm>
#include <cmath>

namespace hema {

Hsv rgb_to_hsv(Rgb c) {
    const double r = c.r;
    const double g = c.g;
    const double b = c.b;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;

    Hsv out;
    out.v = mx / 255.0;
    out.s = (mx == 0.0) ? 0.0 : delta / mx;
    if (delta == 0.0) {
        out.h = 0.0;
        return out;
    }
    double h;
    if (mx == r) {
        h = 60.0 * (g - b) / delta;
    } else if (mx == g) {
        h = 60.0 * ((b - r) / delta + 2.0);
    } else {
        h = 60.0 * ((r - g) / delta + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
    return out;
}

Rgb hsv_to_rgb(const Hsv& hsv) {
    const double c = hsv.v * hsv.s;
    double h = hsv.h;
    while (h < 0.0) h += 360.0;
    while (h >= 360.0) h -= 360.0;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0, g = 0.0, b = 0.0;
    if (hp < 1.0) { r = c; g = x; }
    else if (hp < 2.0) { r = x; g = c; }
    else if (hp < 3.0) { g = c; b = x; }
    else if (hp < 4.0) { g = x; b = c; }
    else if (hp < 5.0) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = hsv.v - c;
    auto to_byte = [](double f) {
        const long v = std::lround(f * 255.0);
        return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
    };
    return Rgb{to_byte(r + m), to_byte(g + m), to_byte(b + m)};
}

}  // namespace hema
