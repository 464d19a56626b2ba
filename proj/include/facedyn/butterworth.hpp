// Butterworth low-pass design (analog prototype + bilinear transform with
// frequency pre-warping) and zero-phase forward-backward application.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "facedyn/common.hpp"

namespace facedyn {

// One second-order section, direct form II transposed, normalized a0 = 1.
struct Biquad {
    double b0, b1, b2;
    double a1, a2;
};

struct ButterworthLowpass {
    std::vector<Biquad> sections;
    int order = 0;

    // |H(f)| of a single pass. The forward-backward pass squares this.
    double magnitude(double freq_hz, double fs) const {
        const double w = 2.0 * std::numbers::pi * freq_hz / fs;
        const std::complex<double> z{std::cos(w), std::sin(w)};
        std::complex<double> h{1.0, 0.0};
        const auto zi = 1.0 / z;
        for (const auto& s : sections) {
            h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) /
                 (1.0 + s.a1 * zi + s.a2 * zi * zi);
        }
        return std::abs(h);
    }
};

inline ButterworthLowpass design_butterworth_lowpass(int order, double cutoff_hz,
                                                     double fs) {
    if (order < 1) throw InvalidParams("filter order must be >= 1");
    if (cutoff_hz <= 0.0 || cutoff_hz >= fs / 2.0)
        throw InvalidParams("cutoff must lie in (0, fs/2)");

    // Pre-warp so the digital cutoff lands exactly on cutoff_hz.
    const double K = 2.0 * fs;
    const double wc = K * std::tan(std::numbers::pi * cutoff_hz / fs);

    ButterworthLowpass f;
    f.order = order;
    // Conjugate pole pairs of the unit analog prototype.
    for (int k = 0; k < order / 2; ++k) {
        const double phi =
            std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order) +
            std::numbers::pi / 2.0;
        const double re = std::cos(phi);  // < 0
        const double a0 = K * K - 2.0 * re * wc * K + wc * wc;
        Biquad s{};
        s.b0 = wc * wc / a0;
        s.b1 = 2.0 * wc * wc / a0;
        s.b2 = wc * wc / a0;
        s.a1 = (2.0 * wc * wc - 2.0 * K * K) / a0;
        s.a2 = (K * K + 2.0 * re * wc * K + wc * wc) / a0;
        f.sections.push_back(s);
    }
    if (order % 2) {
        // Real pole at -wc; expressed as a degenerate biquad.
        const double a0 = K + wc;
        Biquad s{};
        s.b0 = wc / a0;
        s.b1 = wc / a0;
        s.b2 = 0.0;
        s.a1 = (wc - K) / a0;
        s.a2 = 0.0;
        f.sections.push_back(s);
    }
    return f;
}

namespace detail {

// Cascade run with each section started in its constant-input steady state,
// so a constant signal passes through bit-clean.
inline void run_cascade(const ButterworthLowpass& f, std::vector<double>& x) {
    for (const auto& s : f.sections) {
        double z1 = (s.b1 - s.a1) * x[0] + (s.b2 - s.a2) * x[0];
        double z2 = (s.b2 - s.a2) * x[0];
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace detail

inline std::size_t filtfilt_pad_length(int order) {
    return 3 * static_cast<std::size_t>(order + 1);
}

// Forward-backward filtering with odd-reflection padding at both ends.
// Requires x.size() > pad length; shorter inputs throw SeriesTooShort.
inline std::vector<double> filtfilt(const ButterworthLowpass& f,
                                    const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t pad = filtfilt_pad_length(f.order);
    if (n <= pad)
        throw SeriesTooShort("filtfilt needs more than " + std::to_string(pad) +
                             " samples, got " + std::to_string(n));

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    detail::run_cascade(f, ext);
    std::reverse(ext.begin(), ext.end());
    detail::run_cascade(f, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace facedyn
