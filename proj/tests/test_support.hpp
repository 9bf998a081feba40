#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "triwarp/raster.hpp"

namespace test_support {

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline triwarp::ScalarField random_field(int w, int h, std::mt19937_64& gen) {
    triwarp::ScalarField f(w, h);
    for (double& v : f.data) v = uniform01(gen);
    return f;
}

// values on the 1/255 grid so codec round trips are exact
inline triwarp::RasterImage random_quantized_image(int w, int h, int c, std::mt19937_64& gen) {
    triwarp::RasterImage img(w, h, c);
    for (double& v : img.data) v = static_cast<double>(gen() % 256) / 255.0;
    return img;
}

inline triwarp::RasterImage gradient_test_image(int w, int h) {
    triwarp::RasterImage img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.at(y, x, 0) = static_cast<double>(x) / (w - 1);
            img.at(y, x, 1) = static_cast<double>(y) / (h - 1);
            img.at(y, x, 2) = 0.5;
        }
    return img;
}

// synthetic content: smooth background, bright disc, dark bar, white line
inline triwarp::RasterImage scene_test_image(int w, int h) {
    triwarp::RasterImage img(w, h, 3);
    const double cx = 0.33 * w, cy = 0.5 * h, rad = 0.2 * std::min(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double r = 0.4 + 0.3 * x / w, g = 0.3 + 0.3 * y / h, b = 0.35;
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy < rad * rad) {
                r = 0.95;
                g = 0.85;
                b = 0.25;
            }
            if (x >= 0.7 * w && x < 0.78 * w) {
                r = 0.1;
                g = 0.15;
                b = 0.6;
            }
            if (y >= 0.24 * h && y < 0.24 * h + 3 && x >= 0.1 * w && x < 0.9 * w) {
                r = g = b = 1.0;
            }
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    return img;
}

} // namespace test_support
