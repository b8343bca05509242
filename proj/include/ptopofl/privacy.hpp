#pragma once

#include <algorithm>
#include <cmath>

#include "ptopofl/common.hpp"

namespace ptopofl {

// Transmission-side reconstruction exposure of one client: n samples in R^d,
// a p-parameter model, an m-dimensional descriptor, and the PH compression
// factor alpha_c.
struct PrivacyProfile {
    int n = 0;
    int d = 0;
    int p = 0;
    int m = 48;
    double alpha_c = 0.1;

    void validate() const {
        if (n < 1 || d < 1 || p < 1 || m < 1) throw input_error("PrivacyProfile: all dims positive");
        if (alpha_c < 0.0) throw input_error("PrivacyProfile: alpha_c >= 0");
    }
};

// Reconstruction risk of gradient transmission: min(1, p / (n*d)).
inline double rho_gradient(const PrivacyProfile& profile) {
    profile.validate();
    return std::min(1.0, static_cast<double>(profile.p) /
                             (static_cast<double>(profile.n) * static_cast<double>(profile.d)));
}

// Reconstruction risk of descriptor transmission: (m / (n*d)) * alpha_c.
inline double rho_topo(const PrivacyProfile& profile) {
    profile.validate();
    return static_cast<double>(profile.m) /
           (static_cast<double>(profile.n) * static_cast<double>(profile.d)) * profile.alpha_c;
}

// Mutual-information proxy in bits: log2(1 + dim * alpha_c).
inline double mi_proxy(int dim, double alpha_c) {
    if (dim < 0 || alpha_c < 0.0) throw input_error("mi_proxy: dim >= 0 and alpha_c >= 0");
    return std::log2(1.0 + static_cast<double>(dim) * alpha_c);
}

} // namespace ptopofl
