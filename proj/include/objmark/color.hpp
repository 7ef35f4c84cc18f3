#pragma once

namespace objmark {

struct Hsv {
    double h;  // fraction of the hue circle, [0, 1)
    double s;
    double v;
};

Hsv rgb_to_hsv(double r, double g, double b) noexcept;
void hsv_to_rgb(const Hsv& hsv, double& r, double& g, double& b) noexcept;

}  // namespace objmark
