#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "triwarp/importance.hpp"
#include "test_support.hpp"

using namespace triwarp;

TEST_CASE("gbvs_saliency of a constant image is flat") {
    const ScalarField g = gbvs_saliency(ScalarField(48, 48, 0.5));
    double mean = 0, sq = 0;
    for (double v : g.data) {
        mean += v;
        sq += v * v;
    }
    mean /= g.data.size();
    const double stddev = std::sqrt(std::max(0.0, sq / g.data.size() - mean * mean));
    const double cov = mean > 0 ? stddev / mean : 0.0;
    CHECK(cov < 0.1);
}

TEST_CASE("gbvs_saliency peaks inside a bright square") {
    ScalarField img(64, 64, 0.0);
    for (int y = 24; y < 40; ++y)
        for (int x = 24; x < 40; ++x) img.at(y, x) = 1.0;
    const ScalarField g = gbvs_saliency(img);
    const auto arg = std::max_element(g.data.begin(), g.data.end()) - g.data.begin();
    const int ay = static_cast<int>(arg) / g.width, ax = static_cast<int>(arg) % g.width;
    CHECK(ax >= 24);
    CHECK(ax < 40);
    CHECK(ay >= 24);
    CHECK(ay < 40);
    for (double v : g.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gbvs_saliency is mirror equivariant") {
    std::mt19937_64 gen(41);
    const ScalarField f = test_support::random_field(56, 40, gen);
    ScalarField mirrored(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) mirrored.at(y, x) = f.at(y, f.width - 1 - x);
    const ScalarField g = gbvs_saliency(f);
    const ScalarField gm = gbvs_saliency(mirrored);
    double max_diff = 0;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            max_diff = std::max(max_diff, std::abs(g.at(y, x) - gm.at(y, f.width - 1 - x)));
    CHECK(max_diff < 1e-3);
}

TEST_CASE("gbvs_saliency upsamples small inputs internally") {
    const ScalarField g = gbvs_saliency(ScalarField(16, 12, 0.25));
    CHECK(g.width == 16);
    CHECK(g.height == 12);
}

TEST_CASE("texture_suppress leaves a zero-gradient field alone") {
    ScalarField e(4, 1, 0.5);
    const ScalarField y(4, 1, 0.0);
    auto [e_mod, w] = texture_suppress(e, y, 1.2, 1.5);
    CHECK(e_mod.data == e.data); // mean zero, threshold empty
    CHECK(w.data == e.data);
}

TEST_CASE("texture_suppress hand example") {
    ScalarField e(4, 1, 0.5);
    ScalarField y(4, 1);
    y.at(0, 0) = 0.0;
    y.at(0, 1) = 0.0;
    y.at(0, 2) = 1.0;
    y.at(0, 3) = 1.0;
    auto [e_mod, w] = texture_suppress(e, y, 1.2, 1.5);
    CHECK(e_mod.at(0, 0) == 0.1);
    CHECK(e_mod.at(0, 1) == 0.1);
    CHECK(e_mod.at(0, 2) == 0.5);
    CHECK(e_mod.at(0, 3) == 0.5);
    CHECK(w.at(0, 0) == Catch::Approx(0.1));
    CHECK(w.at(0, 1) == Catch::Approx(0.1));
    CHECK(w.at(0, 2) == Catch::Approx(2.0));
    CHECK(w.at(0, 3) == Catch::Approx(2.0));
}

TEST_CASE("texture_suppress with a vanishing threshold keeps E") {
    std::mt19937_64 gen(42);
    const ScalarField e = test_support::random_field(6, 4, gen);
    ScalarField y = test_support::random_field(6, 4, gen);
    for (double& v : y.data) v += 0.01; // strictly positive
    auto [e_mod, w] = texture_suppress(e, y, 1e-12, 2.0);
    CHECK(e_mod.data == e.data);
}

TEST_CASE("texture_suppress only touches below-threshold pixels and writes 0.1") {
    std::mt19937_64 gen(43);
    const ScalarField e = test_support::random_field(8, 8, gen);
    const ScalarField y = test_support::random_field(8, 8, gen);
    const double alpha = 1.1;
    auto [e_mod, w] = texture_suppress(e, y, alpha, 1.5);
    const double threshold = alpha * field_mean(y);
    for (std::size_t i = 0; i < e.data.size(); ++i) {
        if (y.data[i] < threshold) CHECK(e_mod.data[i] == 0.1);
        else CHECK(e_mod.data[i] == e.data[i]);
    }
}

TEST_CASE("hough_line_map finds a single full-width line") {
    ScalarField img(200, 200, 0.0);
    for (int x = 0; x < 200; ++x) img.at(100, x) = 1.0;
    auto [h, lines] = hough_line_map(img);
    REQUIRE(lines.size() == 1);
    const LineSegment& seg = lines[0];
    const double ang = std::atan2(seg.y1 - seg.y0, seg.x1 - seg.x0) * 180.0 / M_PI;
    CHECK(std::abs(std::remainder(ang, 180.0)) <= 2.0);
    CHECK(seg.length > 150.0);
    for (int y = 0; y < 200; ++y)
        for (int x = 0; x < 200; ++x)
            if (h.at(y, x) != 0.0) CHECK(std::abs(y - 100) <= 2);
}

TEST_CASE("hough_line_map discards segments shorter than a tenth of the diagonal") {
    ScalarField img(200, 200, 0.0);
    for (int x = 95; x < 105; ++x) img.at(100, x) = 1.0; // 10 px, cutoff ~28.3
    auto [h, lines] = hough_line_map(img);
    CHECK(lines.empty());
    for (double v : h.data) CHECK(v == 0.0);
}

TEST_CASE("hough_line_map of a constant image is empty") {
    auto [h, lines] = hough_line_map(ScalarField(64, 64, 0.7));
    CHECK(lines.empty());
    for (double v : h.data) CHECK(v == 0.0);
}

TEST_CASE("hough segments land on the H support") {
    ScalarField img(120, 120, 0.0);
    for (int i = 10; i < 110; ++i) img.at(i, i) = 1.0; // diagonal line
    auto [h, lines] = hough_line_map(img);
    REQUIRE(!lines.empty());
    for (const LineSegment& seg : lines) {
        CHECK(seg.length >= std::sqrt(2.0) * 120.0 / 10.0);
        CHECK(h.at(static_cast<int>(std::lround(seg.y0)), static_cast<int>(std::lround(seg.x0))) == 1.0);
        CHECK(h.at(static_cast<int>(std::lround(seg.y1)), static_cast<int>(std::lround(seg.x1))) == 1.0);
    }
}

TEST_CASE("combine_importance of constant inputs is all zeros") {
    const ScalarField c(6, 6, 0.4);
    const ScalarField m = combine_importance(c, c, c, ScalarField(6, 6, 0.0), 2.0);
    for (double v : m.data) CHECK(v == 0.0);
}

TEST_CASE("combine_importance keeps a co-located maximum") {
    ScalarField f(8, 8, 0.2);
    f.at(3, 5) = 0.9;
    const ScalarField zero(8, 8, 0.0);
    const ScalarField m = combine_importance(f, f, f, zero, 2.0);
    const auto arg = std::max_element(m.data.begin(), m.data.end()) - m.data.begin();
    CHECK(arg == 3 * 8 + 5);
}

TEST_CASE("combine_importance matches a straight-line transcription") {
    std::mt19937_64 gen(44);
    const ScalarField g = test_support::random_field(8, 8, gen);
    const ScalarField e = test_support::random_field(8, 8, gen);
    const ScalarField w = test_support::random_field(8, 8, gen);
    const ScalarField h = test_support::random_field(8, 8, gen);
    const double gamma = 2.0;
    const ScalarField m = combine_importance(g, e, w, h, gamma);

    // independent evaluation written out longhand
    auto unit = [](const ScalarField& f) {
        double mn = f.data[0], mx = f.data[0];
        for (double v : f.data) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        ScalarField out(f.width, f.height);
        if (mx > mn)
            for (std::size_t i = 0; i < f.data.size(); ++i)
                out.data[i] = (f.data[i] - mn) / (mx - mn);
        return out;
    };
    const ScalarField ng = unit(g), ne = unit(e), nw = unit(w), nh = unit(h);
    ScalarField raw(8, 8);
    for (std::size_t i = 0; i < raw.data.size(); ++i)
        raw.data[i] = ng.data[i] * ne.data[i] + nw.data[i] + gamma * nh.data[i];
    const ScalarField expect = unit(raw);
    for (std::size_t i = 0; i < m.data.size(); ++i)
        CHECK(std::abs(m.data[i] - expect.data[i]) < 1e-12);
}

TEST_CASE("importance maps stay in the unit interval") {
    const RasterImage scene = test_support::scene_test_image(80, 60);
    const ScalarField lum = to_luminance(scene);
    auto [e_mod, w] =
        texture_suppress(gradient_energy(lum, GradientNorm::L1),
                         gradient_energy(lum, GradientNorm::L2), 1.2, 1.5);
    auto [h, lines] = hough_line_map(lum);
    const ScalarField m = combine_importance(gbvs_saliency(lum), e_mod, w, h, 2.0);
    for (double v : m.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
