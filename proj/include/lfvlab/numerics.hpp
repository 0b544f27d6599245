// numerics.hpp — Shared numerical substrate: complex matrices, position grids,
// uniform time meshes, RK4 stepping, trapezoid quadrature.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/errors.hpp"

namespace lfvlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

// --------------------------------- PositionGrid ------------------------------

// Uniform inclusive-endpoint grid on [x_min, x_max]. Values outside the grid
// are treated as zero everywhere in the library (hard-wall truncation).
struct PositionGrid {
    std::size_t n_points{0};
    double x_min{0.0};
    double x_max{0.0};

    PositionGrid() = default;

    PositionGrid(std::size_t n, double lo, double hi)
        : n_points(n), x_min(lo), x_max(hi) {
        if (n_points < 2) throw ValidationError("PositionGrid: n_points must be >= 2");
        if (!(x_min < x_max)) throw ValidationError("PositionGrid: requires x_min < x_max");
    }

    double spacing() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }

    double point(std::size_t j) const {
        return x_min + static_cast<double>(j) * spacing();
    }

    std::vector<double> points() const {
        std::vector<double> xs(n_points);
        for (std::size_t j = 0; j < n_points; ++j) xs[j] = point(j);
        return xs;
    }

    bool operator==(const PositionGrid& o) const {
        return n_points == o.n_points && x_min == o.x_min && x_max == o.x_max;
    }
};

// ----------------------------------- TimeMesh --------------------------------

// Uniform mesh 0, dt, 2dt, ..., t_total. Points are computed as k*dt (one
// multiply), never accumulated, so there is no drift.
struct TimeMesh {
    std::size_t n_steps{0};
    double t_total{0.0};

    TimeMesh() = default;

    TimeMesh(std::size_t steps, double total) : n_steps(steps), t_total(total) {
        if (n_steps < 1) throw ValidationError("TimeMesh: n_steps must be >= 1");
        if (!(t_total > 0.0)) throw ValidationError("TimeMesh: t_total must be > 0");
    }

    double dt() const { return t_total / static_cast<double>(n_steps); }

    double time(std::size_t k) const { return static_cast<double>(k) * dt(); }

    std::size_t n_points() const { return n_steps + 1; }

    bool operator==(const TimeMesh& o) const {
        return n_steps == o.n_steps && t_total == o.t_total;
    }
};

// ----------------------------------- rk4_step --------------------------------

// One classical fourth-order Runge-Kutta step for d(state)/dt = rhs(state).
// Local truncation error O(dt^5). Throws NumericalError naming the stage if a
// stage produces non-finite entries.
template <class Rhs>
ComplexMatrix rk4_step(const ComplexMatrix& state, Rhs&& rhs, double dt) {
    const auto check = [](const ComplexMatrix& m, const char* stage) {
        if (!all_finite(m)) {
            throw NumericalError(std::string("rk4_step: non-finite entries at stage ") + stage);
        }
    };
    const ComplexMatrix k1 = rhs(state);
    check(k1, "k1");
    const ComplexMatrix k2 = rhs(state + (0.5 * dt) * k1);
    check(k2, "k2");
    const ComplexMatrix k3 = rhs(state + (0.5 * dt) * k2);
    check(k3, "k3");
    const ComplexMatrix k4 = rhs(state + dt * k3);
    check(k4, "k4");
    ComplexMatrix next = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check(next, "update");
    return next;
}

// ------------------------------ trapezoid_integrate ---------------------------

// Composite trapezoid rule over explicitly sampled (time, value) pairs.
// A single sample integrates to zero. Times must be strictly increasing.
inline Complex trapezoid_integrate(const std::vector<std::pair<double, Complex>>& samples) {
    if (samples.empty()) throw ValidationError("trapezoid_integrate: needs at least one sample");
    Complex acc{0.0, 0.0};
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double h = samples[k].first - samples[k - 1].first;
        if (!(h > 0.0)) {
            throw ValidationError("trapezoid_integrate: sample times must be strictly increasing");
        }
        acc += 0.5 * h * (samples[k].second + samples[k - 1].second);
    }
    return acc;
}

// Trapezoid over values on a uniform mesh prefix [0, k*dt].
inline Complex trapezoid_uniform(const std::vector<Complex>& values, double dt, std::size_t k) {
    if (k >= values.size()) {
        throw ValidationError("trapezoid_uniform: prefix length exceeds sample count");
    }
    if (k == 0) return Complex{0.0, 0.0};
    Complex acc = 0.5 * (values[0] + values[k]);
    for (std::size_t j = 1; j < k; ++j) acc += values[j];
    return acc * dt;
}

// ----------------------------------- hermitize --------------------------------

// (m + m^dagger)/2. Idempotent; maps anti-Hermitian matrices to zero.
inline ComplexMatrix hermitize(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("hermitize: matrix must be square");
    return 0.5 * (m + m.adjoint());
}

// Max-norm distance from Hermiticity, used by validation guards.
inline double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("hermiticity_defect: matrix must be square");
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace lfvlab
