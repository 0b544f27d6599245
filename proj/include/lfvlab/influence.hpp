// influence.hpp — Feynman-Vernon reduction on a position grid: factorized
// initial state, influence phase of the oscillator bath, and the discrete
// density-matrix propagator built by exhaustive path-pair summation.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/bath.hpp"
#include "lfvlab/closed_system.hpp"
#include "lfvlab/errors.hpp"
#include "lfvlab/numerics.hpp"
#include "lfvlab/propagator_tensor.hpp"

namespace lfvlab {

// ---------------------------------- DiscretePath ------------------------------

// Real-valued path sampled on every point of a uniform time mesh.
struct DiscretePath {
    TimeMesh mesh;
    std::vector<double> values;

    DiscretePath() = default;

    DiscretePath(TimeMesh m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
        if (values.size() != mesh.n_points()) {
            throw ShapeError("DiscretePath: needs one value per mesh point (" +
                             std::to_string(mesh.n_points()) + ")");
        }
        for (double x : values) {
            if (!std::isfinite(x)) throw ValidationError("DiscretePath: values must be finite");
        }
    }
};

// Discrete action along a path, summed slice by slice. Shared with the sliced
// closed kernel so zero-coupling reductions agree term by term.
inline double path_action(const SystemSpec& spec, const DiscretePath& path) {
    const double dt = path.mesh.dt();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
        acc += slice_action(spec, path.values[k], path.values[k + 1], dt);
    }
    return acc;
}

// ------------------------------- factorized_initial ---------------------------

// System-times-bath product state at t = 0: the system density matrix on its
// grid paired with the thermal bath functional. No entanglement by
// construction.
struct JointInitialState {
    GridDensityMatrix system;
    BathSpec bath;

    Complex system_value(std::size_t jx, std::size_t jy) const {
        return system.values(static_cast<Eigen::Index>(jx), static_cast<Eigen::Index>(jy));
    }

    double bath_value(const std::vector<double>& X, const std::vector<double>& Y) const {
        return thermal_density(bath, X, Y);
    }

    Complex joint_value(std::size_t jx, std::size_t jy, const std::vector<double>& X,
                        const std::vector<double>& Y) const {
        return system_value(jx, jy) * bath_value(X, Y);
    }

    double trace() const { return system.trace(); }
};

inline JointInitialState factorized_initial(const GridDensityMatrix& rho_s, const BathSpec& bath) {
    if (std::abs(rho_s.trace() - 1.0) > 1e-8) {
        throw ValidationError("factorized_initial: system state must be normalized (trace = " +
                              std::to_string(rho_s.trace()) + ")");
    }
    return JointInitialState{rho_s, bath};
}

// ------------------------------- influence_phase_cl ---------------------------

// Influence phase of the oscillator bath over a forward/backward path pair:
//   Phi = int_0^t dt' int_0^{t'} dt'' { [x-y](t') (i * noise(t'-t'')) [x-y](t'')
//                                      + [x-y](t') dissip(t'-t'') [x+y](t'') }
// evaluated by trapezoid on the shared mesh (strict lower triangle plus half
// the diagonal). Returned as the complex quantity multiplying i/hbar in the
// propagator exponent.
inline Complex influence_phase_cl(const DiscretePath& path_x, const DiscretePath& path_y,
                                  const BathSpec& bath) {
    if (!(path_x.mesh == path_y.mesh)) {
        throw ShapeError("influence_phase_cl: paths must share one mesh");
    }
    const std::size_t n = path_x.values.size();
    const double dt = path_x.mesh.dt();
    // product of one-dimensional trapezoid weights; the diagonal carries half
    // a product weight, making the (symmetric) noise part exactly half the
    // positive-semidefinite square-form of the cos kernel
    const auto w = [&](std::size_t k) { return dt * ((k == 0 || k + 1 == n) ? 0.5 : 1.0); };
    double noise_part = 0.0;
    double dissip_part = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double diff_k = path_x.values[k] - path_y.values[k];
        const double wk = w(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double s = path_x.mesh.time(k) - path_x.mesh.time(j);
            const double wj = w(j);
            const double diff_j = path_x.values[j] - path_y.values[j];
            const double sum_j = path_x.values[j] + path_y.values[j];
            noise_part += wk * wj * noise_kernel(bath, s) * diff_k * diff_j;
            dissip_part += wk * wj * dissipation_kernel(bath, s) * diff_k * sum_j;
        }
        noise_part += 0.5 * wk * wk * noise_kernel(bath, 0.0) * diff_k * diff_k;
        // the dissipation kernel vanishes at s = 0
    }
    return Complex(dissip_part, noise_part);
}

// --------------------------- path-pair exponent/measure ----------------------

// Exponent of one forward/backward path pair in the discrete Feynman-Vernon
// propagator. Used verbatim by j_fv_matrix and by oracle comparisons so the
// two code paths evaluate bit-identical terms.
inline Complex fv_path_pair_exponent(const SystemSpec& spec, const BathSpec& bath,
                                     const DiscretePath& path_x, const DiscretePath& path_y) {
    const double s_x = path_action(spec, path_x);
    const double s_y = path_action(spec, path_y);
    const Complex phi = influence_phase_cl(path_x, path_y, bath);
    return (kI / spec.hbar) * (s_x - s_y + phi);
}

// Measure carried by every path pair: |slice prefactor|^(2 S) and one grid
// weight dx per interior point of each path. Real by construction.
inline double path_pair_measure(const SystemSpec& spec, const PositionGrid& grid,
                                const TimeMesh& mesh) {
    const double dt = mesh.dt();
    const std::size_t n_slices = mesh.n_steps;
    const double pref2 = spec.mass / (2.0 * M_PI * spec.hbar * dt);  // |prefactor|^2 per slice
    double measure = 1.0;
    for (std::size_t k = 0; k < n_slices; ++k) measure *= pref2;
    for (std::size_t k = 0; k + 1 < n_slices; ++k) measure *= grid.spacing() * grid.spacing();
    return measure;
}

namespace detail {

// Total number of enumerated path pairs: n^4 endpoint combinations times
// n^(2 (S-1)) interior configurations.
inline double total_path_pairs(const PositionGrid& grid, const TimeMesh& mesh) {
    return std::pow(static_cast<double>(grid.n_points),
                    static_cast<double>(2 * mesh.n_steps + 2));
}

// Exhaustive sum over interior path-pair configurations for a fixed endpoint
// quadruple. Enumeration is lexicographic: forward-path digits are the most
// significant block, the last interior digit varies fastest. ExponentFn is
// called as f(path_x, path_y).
template <class ExponentFn>
Complex sum_interior_configurations(const PositionGrid& grid, DiscretePath& path_x,
                                    DiscretePath& path_y, ExponentFn&& exponent) {
    const std::size_t n_interior = path_x.values.size() - 2;
    const std::size_t n = grid.n_points;
    std::vector<std::size_t> digits(2 * n_interior, 0);
    const auto assign = [&]() {
        for (std::size_t d = 0; d < n_interior; ++d) {
            path_x.values[d + 1] = grid.point(digits[d]);
            path_y.values[d + 1] = grid.point(digits[n_interior + d]);
        }
    };
    Complex acc{0.0, 0.0};
    if (n_interior == 0) {
        return std::exp(exponent(path_x, path_y));
    }
    while (true) {
        assign();
        acc += std::exp(exponent(path_x, path_y));
        // odometer increment, last digit fastest
        std::size_t d = digits.size();
        while (d > 0) {
            --d;
            if (++digits[d] < n) break;
            digits[d] = 0;
            if (d == 0) return acc;
        }
    }
}

}  // namespace detail

// ----------------------------------- j_fv_matrix ------------------------------

// Discrete Feynman-Vernon propagator: exhaustive sum over all grid-valued
// path pairs of exp{(i/hbar)[S(x) - S(y) + Phi(x,y)]}, endpoints fixed by the
// tensor indices, one slice prefactor pair per time step and one dx weight per
// interior point. Work is bounded by the total path-pair count.
inline PropagatorTensor j_fv_matrix(const PositionGrid& grid, const TimeMesh& mesh,
                                    const SystemSpec& spec, const BathSpec& bath,
                                    double max_path_pairs = 1e7) {
    if (detail::total_path_pairs(grid, mesh) > max_path_pairs) {
        throw SizeError("j_fv_matrix: " + std::to_string(detail::total_path_pairs(grid, mesh)) +
                        " path pairs exceed the bound " + std::to_string(max_path_pairs));
    }
    const std::size_t n = grid.n_points;
    const double measure = path_pair_measure(spec, grid, mesh);
    std::vector<Complex> entries(n * n * n * n);
    DiscretePath path_x(mesh, std::vector<double>(mesh.n_points(), 0.0));
    DiscretePath path_y(mesh, std::vector<double>(mesh.n_points(), 0.0));
    const auto exponent = [&spec, &bath](const DiscretePath& px, const DiscretePath& py) {
        return fv_path_pair_exponent(spec, bath, px, py);
    };
    const std::size_t last = mesh.n_points() - 1;
    for (std::size_t ix = 0; ix < n; ++ix) {
        for (std::size_t iy = 0; iy < n; ++iy) {
            for (std::size_t jx = 0; jx < n; ++jx) {
                for (std::size_t jy = 0; jy < n; ++jy) {
                    path_x.values[0] = grid.point(jx);
                    path_x.values[last] = grid.point(ix);
                    path_y.values[0] = grid.point(jy);
                    path_y.values[last] = grid.point(iy);
                    const Complex sum =
                        detail::sum_interior_configurations(grid, path_x, path_y, exponent);
                    entries[((ix * n + iy) * n + jx) * n + jy] = measure * sum;
                }
            }
        }
    }
    return PropagatorTensor::dense(grid, mesh.t_total, PropagatorVariant::FeynmanVernon,
                                   std::move(entries));
}

// --------------------------------- rho_propagate_fv ---------------------------

inline GridDensityMatrix rho_propagate_fv(const GridDensityMatrix& rho0,
                                          const PropagatorTensor& J) {
    if (!(rho0.grid == J.grid())) {
        throw ShapeError("rho_propagate_fv: density matrix and propagator grids differ");
    }
    return GridDensityMatrix(rho0.grid, J.apply(rho0.values));
}

}  // namespace lfvlab
