// closed_system.hpp — Closed-system baseline: von Neumann evolution, analytic
// quantum propagators for free/harmonic potentials, Trotter-sliced kernels for
// general potentials, and the density-matrix propagator J = K conj(K).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include "lfvlab/bath.hpp"
#include "lfvlab/errors.hpp"
#include "lfvlab/numerics.hpp"
#include "lfvlab/propagator_tensor.hpp"

namespace lfvlab {

// ---------------------------------- SystemSpec -------------------------------

struct SystemSpec {
    double mass{1.0};
    std::function<double(double)> potential;  // V(x)
    double hbar{1.0};

    SystemSpec() : potential([](double) { return 0.0; }) {}

    SystemSpec(double m, std::function<double(double)> V, double hb)
        : mass(m), potential(std::move(V)), hbar(hb) {
        if (!(mass > 0.0)) throw ValidationError("SystemSpec: mass must be > 0");
        if (!(hbar > 0.0)) throw ValidationError("SystemSpec: hbar must be > 0");
        if (!potential) throw ValidationError("SystemSpec: potential must be callable");
    }

    static SystemSpec free_particle(double m, double hb) {
        return SystemSpec(m, [](double) { return 0.0; }, hb);
    }

    static SystemSpec harmonic(double m, double omega0, double hb) {
        return SystemSpec(m, [m, omega0](double x) { return 0.5 * m * omega0 * omega0 * x * x; },
                          hb);
    }
};

// ------------------------------- GridDensityMatrix ---------------------------

// Density matrix discretized on a position grid; values carry units 1/length
// so that dx * trace(values) = 1.
struct GridDensityMatrix {
    PositionGrid grid;
    ComplexMatrix values;

    GridDensityMatrix() = default;

    GridDensityMatrix(PositionGrid g, ComplexMatrix v) : grid(std::move(g)), values(std::move(v)) {
        const auto n = static_cast<Eigen::Index>(grid.n_points);
        if (values.rows() != n || values.cols() != n) {
            throw ShapeError("GridDensityMatrix: values must be n_points x n_points");
        }
    }

    double trace() const { return (grid.spacing() * values.trace()).real(); }

    double hermiticity_defect_relative() const {
        const double scale = values.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        return hermiticity_defect(values) / scale;
    }

    void validate(double trace_tol, double herm_tol = 1e-12) const {
        if (hermiticity_defect_relative() > herm_tol) {
            throw ValidationError("GridDensityMatrix: Hermiticity defect above tolerance");
        }
        if (std::abs(trace() - 1.0) > trace_tol) {
            throw ValidationError("GridDensityMatrix: trace " + std::to_string(trace()) +
                                  " deviates from 1 beyond tolerance");
        }
    }

    // Pure state rho(x,y) = psi(x) conj(psi(y)), normalized on the grid.
    static GridDensityMatrix pure_state(const PositionGrid& g,
                                        const std::function<Complex(double)>& psi) {
        const auto n = static_cast<Eigen::Index>(g.n_points);
        ComplexVector v(n);
        for (Eigen::Index j = 0; j < n; ++j) v(j) = psi(g.point(static_cast<std::size_t>(j)));
        const double norm2 = v.squaredNorm() * g.spacing();
        if (!(norm2 > 0.0)) throw ValidationError("pure_state: wavefunction has zero norm");
        v /= std::sqrt(norm2);
        return GridDensityMatrix(g, v * v.adjoint());
    }
};

// -------------------------------- von_neumann_rhs ----------------------------

// d rho/dt = (-i/hbar)(H rho - rho H). H must be Hermitian to 1e-10 relative.
inline ComplexMatrix von_neumann_rhs(const ComplexMatrix& H, const ComplexMatrix& rho,
                                     double hbar) {
    if (H.rows() != H.cols() || rho.rows() != rho.cols()) {
        throw ShapeError("von_neumann_rhs: H and rho must be square");
    }
    if (H.rows() != rho.rows()) {
        throw ShapeError("von_neumann_rhs: H and rho dimensions differ");
    }
    const double h_scale = H.cwiseAbs().maxCoeff();
    if (h_scale > 0.0 && hermiticity_defect(H) > 1e-10 * h_scale) {
        throw ValidationError("von_neumann_rhs: H is not Hermitian to 1e-10");
    }
    return (-kI / hbar) * (H * rho - rho * H);
}

// --------------------------------- evolve_closed -----------------------------

// rho(t) = exp(-i H t / hbar) rho0 exp(+i H t / hbar) via diagonalization.
inline ComplexMatrix evolve_closed(const ComplexMatrix& rho0, const ComplexMatrix& H, double t,
                                   double hbar) {
    if (H.rows() != H.cols() || rho0.rows() != rho0.cols() || H.rows() != rho0.rows()) {
        throw ShapeError("evolve_closed: H and rho0 must be square with equal dimension");
    }
    if (t < 0.0) throw ValidationError("evolve_closed: t must be >= 0");
    const double h_scale = H.cwiseAbs().maxCoeff();
    if (h_scale > 0.0 && hermiticity_defect(H) > 1e-10 * h_scale) {
        throw ValidationError("evolve_closed: H is not Hermitian to 1e-10");
    }
    if (t == 0.0) return rho0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    if (es.info() != Eigen::Success) {
        throw NumericalError("evolve_closed: eigensolver failed at dimension " +
                             std::to_string(H.rows()) + ", max|H| = " + std::to_string(h_scale));
    }
    const auto& U = es.eigenvectors();
    ComplexVector phases(H.rows());
    for (Eigen::Index k = 0; k < H.rows(); ++k) {
        phases(k) = std::exp(-kI * es.eigenvalues()(k) * t / hbar);
    }
    const ComplexMatrix expH = U * phases.asDiagonal() * U.adjoint();
    return expH * rho0 * expH.adjoint();
}

// Unitary exp(-i H t / hbar) for reuse by the oracle simulators.
inline ComplexMatrix evolution_operator(const ComplexMatrix& H, double t, double hbar) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    if (es.info() != Eigen::Success) {
        throw NumericalError("evolution_operator: eigensolver failed at dimension " +
                             std::to_string(H.rows()));
    }
    ComplexVector phases(H.rows());
    for (Eigen::Index k = 0; k < H.rows(); ++k) {
        phases(k) = std::exp(-kI * es.eigenvalues()(k) * t / hbar);
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// ------------------------------ analytic propagators -------------------------

// Free-particle kernel sqrt(M/(2 pi i hbar t)) exp{i M (x-x0)^2 / (2 hbar t)}.
inline Complex propagator_free(double x, double x0, double t, const SystemSpec& spec) {
    if (!(t > 0.0)) throw ValidationError("propagator_free: t must be > 0");
    const Complex pref = std::sqrt(Complex(spec.mass, 0.0) / (Complex(0.0, 2.0 * M_PI * spec.hbar * t)));
    const double d = x - x0;
    return pref * std::exp(kI * spec.mass * d * d / (2.0 * spec.hbar * t));
}

// Harmonic kernel for V = (1/2) M omega0^2 x^2:
//   sqrt(M omega0 / (2 pi i hbar sin(omega0 t)))
//   * exp{ i M omega0 / (2 hbar sin(omega0 t)) [ (x^2 + x0^2) cos(omega0 t) - 2 x x0 ] }
inline Complex propagator_harmonic(double x, double x0, double t, const SystemSpec& spec,
                                   double omega0) {
    if (!(t > 0.0)) throw ValidationError("propagator_harmonic: t must be > 0");
    require_away_from_caustic(omega0, t);
    const double s = std::sin(omega0 * t);
    const double c = std::cos(omega0 * t);
    const Complex pref =
        std::sqrt(Complex(spec.mass * omega0, 0.0) / Complex(0.0, 2.0 * M_PI * spec.hbar * s));
    const double phase = spec.mass * omega0 / (2.0 * spec.hbar * s) * ((x * x + x0 * x0) * c - 2.0 * x * x0);
    return pref * std::exp(kI * phase);
}

// ------------------------------- kernel matrices ------------------------------

inline ComplexMatrix kernel_matrix_free(const PositionGrid& grid, const SystemSpec& spec,
                                        double t) {
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    ComplexMatrix K(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            K(a, b) = propagator_free(grid.point(static_cast<std::size_t>(a)),
                                      grid.point(static_cast<std::size_t>(b)), t, spec);
        }
    }
    return K;
}

inline ComplexMatrix kernel_matrix_harmonic(const PositionGrid& grid, const SystemSpec& spec,
                                            double omega0, double t) {
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    ComplexMatrix K(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            K(a, b) = propagator_harmonic(grid.point(static_cast<std::size_t>(a)),
                                          grid.point(static_cast<std::size_t>(b)), t, spec, omega0);
        }
    }
    return K;
}

// Discrete action of one slice: M (x1-x0)^2 / (2 dt) - dt V((x0+x1)/2).
// Shared by the sliced kernel, the influence-functional path sum, and the
// collision-model path sum so their zero-coupling reductions agree exactly.
inline double slice_action(const SystemSpec& spec, double x_from, double x_to, double dt) {
    const double d = x_to - x_from;
    return spec.mass * d * d / (2.0 * dt) - dt * spec.potential(0.5 * (x_from + x_to));
}

inline Complex slice_prefactor(const SystemSpec& spec, double dt) {
    return std::sqrt(Complex(spec.mass, 0.0) / Complex(0.0, 2.0 * M_PI * spec.hbar * dt));
}

// Trotter-sliced kernel: n_slices factors of the short-time kernel with one
// grid integration (weight dx) between consecutive factors.
inline ComplexMatrix kernel_matrix_sliced(const PositionGrid& grid, const SystemSpec& spec,
                                          std::size_t n_slices, double t) {
    if (n_slices < 1) throw ValidationError("kernel_matrix_sliced: needs at least one slice");
    if (!(t > 0.0)) throw ValidationError("kernel_matrix_sliced: t must be > 0");
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const double dt = t / static_cast<double>(n_slices);
    const Complex pref = slice_prefactor(spec, dt);
    ComplexMatrix A(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            A(a, b) = pref * std::exp(kI / spec.hbar *
                                      slice_action(spec, grid.point(static_cast<std::size_t>(b)),
                                                   grid.point(static_cast<std::size_t>(a)), dt));
        }
    }
    ComplexMatrix K = A;
    for (std::size_t k = 1; k < n_slices; ++k) K = K * (grid.spacing() * A);
    return K;
}

// ------------------------------------ j_closed -------------------------------

// Density-matrix propagator J(x,y;x',y') = K(x,x') conj(K(y,y')) in factored
// storage. Pass any kernel matrix built above (analytic or sliced).
inline PropagatorTensor j_closed(const PositionGrid& grid, double t, ComplexMatrix kernel) {
    return PropagatorTensor::factored(grid, t, std::move(kernel));
}

// Position-basis Hamiltonian on the grid: sinc-DVR kinetic term (spectrally
// accurate for smooth states) plus diagonal potential. Shares the grid with
// the path sums so operator and path-integral baselines live in one
// representation.
inline ComplexMatrix position_hamiltonian(const PositionGrid& grid, const SystemSpec& spec) {
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const double dx = grid.spacing();
    const double kin = spec.hbar * spec.hbar / (2.0 * spec.mass * dx * dx);
    ComplexMatrix H = ComplexMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        H(j, j) = kin * M_PI * M_PI / 3.0 + spec.potential(grid.point(static_cast<std::size_t>(j)));
        for (Eigen::Index k = 0; k < j; ++k) {
            const double d = static_cast<double>(j - k);
            const double sign = ((j - k) % 2 == 0) ? 1.0 : -1.0;
            H(j, k) = kin * 2.0 * sign / (d * d);
            H(k, j) = H(j, k);
        }
    }
    return H;
}

}  // namespace lfvlab
