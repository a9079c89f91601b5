// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/common.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace sltarch {

struct Rgb {
    float r = 0.0f;
    float g = 0.0f;
    float b = 0.0f;

    float operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }

    friend bool operator==(Rgb, Rgb) = default;
};

class Image {
  public:
    Image() = default;
    Image(int width, int height) : width_(width), height_(height), pixels_(checked_area(width, height)) {}

    int width() const { return width_; }
    int height() const { return height_; }

    Rgb &at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const Rgb &at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const std::vector<Rgb> &pixels() const { return pixels_; }

    friend bool operator==(const Image &, const Image &) = default;

  private:
    static std::size_t checked_area(int w, int h) {
        if (w < 0 || h < 0) throw ParameterError("image dimensions must be non-negative");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }

    int width_  = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

inline std::uint8_t to_byte(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0));
}

/// Binary PPM (P6, maxval 255); linear values quantized with round(clamp(v) * 255).
inline std::string encode_ppm(const Image &img) {
    std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.reserve(out.size() + img.pixels().size() * 3);
    for (const Rgb &p : img.pixels())
        for (int c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(p[c])));
    return out;
}

inline void write_image(const Image &img, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::string bytes = encode_ppm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline Image decode_ppm(const std::string &bytes) {
    std::size_t at = 0;
    auto token     = [&]() {
        while (at < bytes.size()) {
            if (bytes[at] == '#') {
                while (at < bytes.size() && bytes[at] != '\n') ++at;
            } else if (std::isspace(static_cast<unsigned char>(bytes[at]))) {
                ++at;
            } else {
                break;
            }
        }
        const std::size_t start = at;
        while (at < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[at]))) ++at;
        if (start == at) throw FormatError("PPM: truncated header");
        return bytes.substr(start, at - start);
    };
    if (token() != "P6") throw FormatError("PPM: only binary P6 is supported");
    int w = 0, h = 0, maxval = 0;
    try {
        w      = std::stoi(token());
        h      = std::stoi(token());
        maxval = std::stoi(token());
    } catch (const std::logic_error &) {
        throw FormatError("PPM: malformed header");
    }
    if (maxval != 255 || w < 0 || h < 0) throw FormatError("PPM: unsupported header values");
    ++at; // single whitespace byte after maxval
    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (bytes.size() < at + need) throw FormatError("PPM: truncated pixel data");
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = at + (static_cast<std::size_t>(y) * w + x) * 3;
            img.at(x, y) = {static_cast<unsigned char>(bytes[i]) / 255.0f, static_cast<unsigned char>(bytes[i + 1]) / 255.0f,
                            static_cast<unsigned char>(bytes[i + 2]) / 255.0f};
        }
    return img;
}

inline Image read_image(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return decode_ppm({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

struct ImageMetrics {
    double psnr = 0.0; // dB, capped at kPsnrCap
    double ssim = 0.0;
};

inline constexpr double kPsnrCap = 99.0;

inline double psnr(const Image &a, const Image &b) {
    if (a.width() != b.width() || a.height() != b.height()) throw ParameterError("image dimensions differ");
    if (a.pixels().empty()) return kPsnrCap;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels().size(); ++i)
        for (int c = 0; c < 3; ++c) {
            const double d = static_cast<double>(a.pixels()[i][c]) - static_cast<double>(b.pixels()[i][c]);
            sum += d * d;
        }
    const double mse = sum / (3.0 * static_cast<double>(a.pixels().size()));
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

// 11-tap Gaussian window, sigma 1.5, normalized.
inline std::array<double, 11> ssim_window() {
    std::array<double, 11> w{};
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        w[i]           = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += w[i];
    }
    for (auto &v : w) v /= sum;
    return w;
}

// Separable "valid" filtering of a single-channel plane.
inline std::vector<double> filter_valid(const std::vector<double> &plane, int w, int h) {
    const auto win = ssim_window();
    const int ow = w - 10, oh = h - 10;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < 11; ++k) s += win[k] * plane[static_cast<std::size_t>(y) * w + x + k];
            rows[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < 11; ++k) s += win[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

} // namespace detail

/// Mean SSIM over RGB channels with the standard 11x11 Gaussian window
/// (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1). Images smaller than the
/// window fall back to a single global window.
inline double ssim(const Image &a, const Image &b) {
    if (a.width() != b.width() || a.height() != b.height()) throw ParameterError("image dimensions differ");
    const int w = a.width(), h = a.height();
    if (w == 0 || h == 0) return 1.0;
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    double total        = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i]  = a.pixels()[i][c];
            y[i]  = b.pixels()[i][c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        auto index = [](double mx, double my, double sxx, double syy, double sxy) {
            const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
            return ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        };
        if (w < 11 || h < 11) {
            const auto mean = [n](const std::vector<double> &v) {
                double s = 0.0;
                for (double e : v) s += e;
                return s / static_cast<double>(n);
            };
            total += index(mean(x), mean(y), mean(xx), mean(yy), mean(xy));
            continue;
        }
        const auto mx = detail::filter_valid(x, w, h), my = detail::filter_valid(y, w, h);
        const auto sxx = detail::filter_valid(xx, w, h), syy = detail::filter_valid(yy, w, h);
        const auto sxy = detail::filter_valid(xy, w, h);
        double sum     = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) sum += index(mx[i], my[i], sxx[i], syy[i], sxy[i]);
        total += sum / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

inline ImageMetrics image_metrics(const Image &a, const Image &b) { return {psnr(a, b), ssim(a, b)}; }

} // namespace sltarch
