#include "objmark/color.hpp"

#include <algorithm>
#include <cmath>

namespace objmark {

Hsv rgb_to_hsv(double r, double g, double b) noexcept {
    const double maxc = std::max({r, g, b});
    const double minc = std::min({r, g, b});
    const double delta = maxc - minc;
    Hsv out{0.0, 0.0, maxc};
    if (maxc <= 0.0 || delta <= 0.0) {
        return out;
    }
    out.s = delta / maxc;
    double h;
    if (maxc == r) {
        h = (g - b) / delta;
    } else if (maxc == g) {
        h = 2.0 + (b - r) / delta;
    } else {
        h = 4.0 + (r - g) / delta;
    }
    h /= 6.0;
    out.h = h - std::floor(h);
    return out;
}

void hsv_to_rgb(const Hsv& hsv, double& r, double& g, double& b) noexcept {
    const double h6 = (hsv.h - std::floor(hsv.h)) * 6.0;
    const int sector = static_cast<int>(h6) % 6;
    const double f = h6 - std::floor(h6);
    const double v = hsv.v;
    const double p = v * (1.0 - hsv.s);
    const double q = v * (1.0 - hsv.s * f);
    const double t = v * (1.0 - hsv.s * (1.0 - f));
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

}  // namespace objmark
