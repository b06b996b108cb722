#pragma once

// Shared test helpers: tolerant comparisons, deterministic random data and
// closed-form oracles kept independent of the library's integration path.

#include <random>

#include "lwr/liealg.hpp"

namespace lwrtest {

using lwr::cplx;
using lwr::Mat2;

inline bool approx(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

inline double mat_dist(const Mat2& a, const Mat2& b) { return (a - b).norm(); }

inline bool mat_approx(const Mat2& a, const Mat2& b, double tol) {
    return mat_dist(a, b) <= tol;
}

struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed = 12345) : gen(seed) {}
    double real(double lo = -1, double hi = 1) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    cplx complex(double scale = 1) { return {scale * real(), scale * real()}; }
    Mat2 mat(double scale = 1) {
        return {complex(scale), complex(scale), complex(scale), complex(scale)};
    }
    Mat2 sl2c() {  // random unimodular matrix
        Mat2 m = mat();
        cplx d = m.det();
        while (std::abs(d) < 1e-3) {
            m = mat();
            d = m.det();
        }
        return (1.0 / std::sqrt(d)) * m;
    }
    Mat2 su2() {
        double t = real(0, 6.2831853);
        cplx a{real(), real()}, b{real(), real()};
        double n = std::sqrt(std::norm(a) + std::norm(b));
        a /= n;
        b /= n;
        (void)t;
        return {a, b, -std::conj(b), std::conj(a)};
    }
    Mat2 sl2c_tracefree() {
        cplx a = complex(), b = complex(), c = complex();
        return {a, b, c, -a};
    }
    Mat2 hermitian() {
        cplx b = complex();
        return {cplx(real(), 0), b, std::conj(b), cplx(real(), 0)};
    }
};

// z^K for constant K via the trace split: K = h I + K0 with K0 trace-free,
// K0^2 = -det(K0) I, so z^K = z^h (cosh(mu L) I + sinh(mu L)/mu K0), L = log z.
inline Mat2 oracle_z_to_K(const Mat2& K, cplx logz) {
    cplx h = 0.5 * K.tr();
    Mat2 K0 = K - Mat2::diag(h, h);
    cplx mu2 = -K0.det();
    cplx mu = std::sqrt(mu2);
    cplx L = logz;
    cplx ch, shm;
    if (std::abs(mu * L) < 1e-8) {
        cplx x = mu2 * L * L;
        ch = 1.0 + x / 2.0;
        shm = L * (1.0 + x / 6.0);
    } else {
        ch = std::cosh(mu * L);
        shm = std::sinh(mu * L) / mu;
    }
    return std::exp(h * L) * (ch * Mat2::identity() + shm * K0);
}

// exp(M) by the same split (used as an oracle for monodromy eigenvalues)
inline Mat2 oracle_exp(const Mat2& m) { return oracle_z_to_K(m, 1.0); }

}  // namespace lwrtest
