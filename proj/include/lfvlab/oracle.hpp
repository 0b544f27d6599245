// oracle.hpp — Independent ground-truth engines: exact Gaussian
// covariance-matrix dynamics of the coupled system+bath, brute-force
// repeated-interaction channel simulation, and exhaustive tiny path sums.
// Nothing here shares an algorithm with the production propagators; these are
// the references the physics modules are checked against.

#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/bath.hpp"
#include "lfvlab/closed_system.hpp"
#include "lfvlab/collision.hpp"
#include "lfvlab/errors.hpp"
#include "lfvlab/influence.hpp"
#include "lfvlab/numerics.hpp"
#include "lfvlab/propagator_tensor.hpp"

namespace lfvlab {

// ----------------------------- tensor-product helpers ------------------------

inline ComplexMatrix kron(const ComplexMatrix& A, const ComplexMatrix& B) {
    ComplexMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    return out;
}

// Trace over the second factor of a (d1*d2) x (d1*d2) joint matrix.
inline ComplexMatrix partial_trace_second(const ComplexMatrix& joint, Eigen::Index d1,
                                          Eigen::Index d2) {
    if (joint.rows() != d1 * d2 || joint.cols() != d1 * d2) {
        throw ShapeError("partial_trace_second: joint dimension is not d1*d2");
    }
    ComplexMatrix out = ComplexMatrix::Zero(d1, d1);
    for (Eigen::Index a = 0; a < d1; ++a) {
        for (Eigen::Index b = 0; b < d1; ++b) {
            Complex acc{0.0, 0.0};
            for (Eigen::Index k = 0; k < d2; ++k) acc += joint(a * d2 + k, b * d2 + k);
            out(a, b) = acc;
        }
    }
    return out;
}

// ----------------------------------- GaussianState ----------------------------

// First and second moments of (x, p, X_1, P_1, ..., X_N, P_N).
struct GaussianState {
    RealVector mean;
    RealMatrix covariance;

    std::size_t n_modes() const { return static_cast<std::size_t>(mean.size()) / 2; }

    void validate(double hbar, double sym_tol = 1e-12, double bound_tol = 1e-9) const {
        const Eigen::Index d = mean.size();
        if (d % 2 != 0 || covariance.rows() != d || covariance.cols() != d) {
            throw ShapeError("GaussianState: moments must cover an integer number of modes");
        }
        if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > sym_tol) {
            throw ValidationError("GaussianState: covariance is not symmetric");
        }
        ComplexMatrix test = covariance.cast<Complex>() +
                             (0.5 * hbar * kI) * symplectic_form(n_modes()).cast<Complex>();
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(test);
        if (es.info() != Eigen::Success) {
            throw NumericalError("GaussianState: uncertainty check eigensolver failed");
        }
        if (es.eigenvalues().minCoeff() < -bound_tol) {
            throw ValidationError("GaussianState: uncertainty bound violated (min eig " +
                                  std::to_string(es.eigenvalues().minCoeff()) + ")");
        }
    }

    static RealMatrix symplectic_form(std::size_t n_modes) {
        RealMatrix omega = RealMatrix::Zero(2 * static_cast<Eigen::Index>(n_modes),
                                            2 * static_cast<Eigen::Index>(n_modes));
        for (std::size_t m = 0; m < n_modes; ++m) {
            const auto k = static_cast<Eigen::Index>(2 * m);
            omega(k, k + 1) = 1.0;
            omega(k + 1, k) = -1.0;
        }
        return omega;
    }
};

// System wavepacket (given 2x2 moments) times the thermal bath blocks.
inline GaussianState make_system_bath_state(double mean_x, double mean_p,
                                            const RealMatrix& system_cov, const BathSpec& bath) {
    if (system_cov.rows() != 2 || system_cov.cols() != 2) {
        throw ShapeError("make_system_bath_state: system covariance must be 2x2");
    }
    const auto dim = static_cast<Eigen::Index>(2 * (1 + bath.count));
    GaussianState state;
    state.mean = RealVector::Zero(dim);
    state.mean(0) = mean_x;
    state.mean(1) = mean_p;
    state.covariance = RealMatrix::Zero(dim, dim);
    state.covariance.block(0, 0, 2, 2) = system_cov;
    for (std::size_t i = 0; i < bath.count; ++i) {
        const double w = bath.omegas[i];
        const double c2 = bath.coth_half_ratio(i);
        const auto k = static_cast<Eigen::Index>(2 + 2 * i);
        state.covariance(k, k) = bath.hbar / (2.0 * bath.mass * w) * c2;
        state.covariance(k + 1, k + 1) = bath.hbar * bath.mass * w / 2.0 * c2;
    }
    return state;
}

namespace detail {

// Recover the harmonic frequency from a potential callable, rejecting
// anything that is not free or harmonic.
inline double infer_quadratic_omega(const SystemSpec& spec) {
    const double samples[] = {0.5, 1.0, 1.7, -1.3};
    if (std::abs(spec.potential(0.0)) > 1e-12) {
        throw ValidationError("gaussian_evolve: potential is not quadratic (V(0) != 0)");
    }
    double k_ref = 2.0 * spec.potential(samples[0]) / (spec.mass * samples[0] * samples[0]);
    for (double x : samples) {
        const double k = 2.0 * spec.potential(x) / (spec.mass * x * x);
        if (std::abs(k - k_ref) > 1e-8 * std::max(1.0, std::abs(k_ref))) {
            throw ValidationError("gaussian_evolve: potential is not quadratic in x");
        }
    }
    if (k_ref < 0.0) {
        throw ValidationError("gaussian_evolve: inverted potentials are unsupported");
    }
    return std::sqrt(k_ref);
}

// Quadratic-form matrix A with H = (1/2) z^T A z for the coupled
// system+bath, z = (x, p, X_1, P_1, ...). The coupling enters as +c_i x X_i.
inline RealMatrix quadratic_hamiltonian(const SystemSpec& spec, double omega0,
                                        const BathSpec& bath) {
    const auto dim = static_cast<Eigen::Index>(2 * (1 + bath.count));
    RealMatrix A = RealMatrix::Zero(dim, dim);
    A(0, 0) = spec.mass * omega0 * omega0;
    A(1, 1) = 1.0 / spec.mass;
    for (std::size_t i = 0; i < bath.count; ++i) {
        const auto k = static_cast<Eigen::Index>(2 + 2 * i);
        A(k, k) = bath.mass * bath.omegas[i] * bath.omegas[i];
        A(k + 1, k + 1) = 1.0 / bath.mass;
        A(0, k) = bath.couplings[i];
        A(k, 0) = bath.couplings[i];
    }
    return A;
}

}  // namespace detail

// ----------------------------------- gaussian_evolve --------------------------

// Exact propagation of the joint Gaussian state under the quadratic total
// Hamiltonian: z -> S z with S = exp(t Omega A).
inline GaussianState gaussian_evolve(const GaussianState& state, const SystemSpec& spec,
                                     const BathSpec& bath, double t) {
    const auto dim = static_cast<Eigen::Index>(2 * (1 + bath.count));
    if (state.mean.size() != dim) {
        throw ShapeError("gaussian_evolve: state covers " + std::to_string(state.mean.size() / 2) +
                         " modes, bath needs " + std::to_string(1 + bath.count));
    }
    const double omega0 = detail::infer_quadratic_omega(spec);
    const RealMatrix A = detail::quadratic_hamiltonian(spec, omega0, bath);
    const RealMatrix omega = GaussianState::symplectic_form(1 + bath.count);
    const RealMatrix S = (t * omega * A).exp();
    GaussianState out;
    out.mean = S * state.mean;
    out.covariance = S * state.covariance * S.transpose();
    return out;
}

// Total energy <H> = (1/2) tr(A cov) + (1/2) mean^T A mean; conserved for the
// closed coupled dynamics.
inline double gaussian_energy(const GaussianState& state, const SystemSpec& spec,
                              const BathSpec& bath) {
    const double omega0 = detail::infer_quadratic_omega(spec);
    const RealMatrix A = detail::quadratic_hamiltonian(spec, omega0, bath);
    return 0.5 * (A * state.covariance).trace() + 0.5 * state.mean.dot(A * state.mean);
}

// --------------------------------- bath_force_correlator ----------------------

// <F(t1) F(t2)> for F = sum_i c_i X_i in the thermal state, from exact
// oscillator algebra:
//   sum_i c_i^2 hbar/(2 m omega_i) [ coth(hbar omega_i/2kT) cos(omega_i s)
//                                    - i sin(omega_i s) ],  s = t1 - t2.
inline Complex bath_force_correlator(const BathSpec& bath, double t1, double t2) {
    const double s = t1 - t2;
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < bath.count; ++i) {
        const double c = bath.couplings[i];
        const double pref = c * c * bath.hbar / (2.0 * bath.mass * bath.omegas[i]);
        acc += pref * Complex(bath.coth_half_ratio(i) * std::cos(bath.omegas[i] * s),
                              -std::sin(bath.omegas[i] * s));
    }
    return acc;
}

// --------------------------------- TruncatedOscillator ------------------------

// Fresh-ancilla factory: thermal oscillator truncated at Fock level dim-1.
struct TruncatedOscillator {
    std::size_t dim{0};
    double omega{0.0};
    double thermal_ratio{1.0};  // hbar*omega / kT, +inf for zero temperature
    double mass{1.0};
    double hbar{1.0};

    TruncatedOscillator(std::size_t d, double w, double ratio, double m, double hb)
        : dim(d), omega(w), thermal_ratio(ratio), mass(m), hbar(hb) {
        if (dim < 2) throw ValidationError("TruncatedOscillator: dimension must be >= 2");
        if (!(omega > 0.0)) throw ValidationError("TruncatedOscillator: omega must be > 0");
        if (!(thermal_ratio > 0.0)) {
            throw ValidationError("TruncatedOscillator: thermal ratio must be > 0");
        }
        if (leakage() >= 1e-6) {
            throw ValidationError("TruncatedOscillator: thermal occupancy above cutoff is " +
                                  std::to_string(leakage()) + " (needs < 1e-6)");
        }
    }

    // Thermal weight above the cutoff: sum_{n >= dim} p_n = exp(-dim * ratio).
    double leakage() const {
        return std::isinf(thermal_ratio) ? 0.0 : std::exp(-static_cast<double>(dim) * thermal_ratio);
    }

    ComplexMatrix lowering() const {
        ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
        for (std::size_t n = 1; n < dim; ++n) {
            a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) =
                std::sqrt(static_cast<double>(n));
        }
        return a;
    }

    ComplexMatrix position_operator() const {
        const ComplexMatrix a = lowering();
        return std::sqrt(hbar / (2.0 * mass * omega)) * (a + ComplexMatrix(a.adjoint()));
    }

    ComplexMatrix hamiltonian() const {
        ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
        for (std::size_t n = 0; n < dim; ++n) {
            h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) =
                hbar * omega * (static_cast<double>(n) + 0.5);
        }
        return h;
    }

    // Thermal state renormalized over the kept levels (leakage already < 1e-6).
    ComplexMatrix thermal_state() const {
        ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
        if (std::isinf(thermal_ratio)) {
            rho(0, 0) = 1.0;
            return rho;
        }
        double z = 0.0;
        for (std::size_t n = 0; n < dim; ++n) z += std::exp(-static_cast<double>(n) * thermal_ratio);
        for (std::size_t n = 0; n < dim; ++n) {
            rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) =
                std::exp(-static_cast<double>(n) * thermal_ratio) / z;
        }
        return rho;
    }

    TruncatedOscillator with_frequency(double w) const {
        // Same physical temperature: ratio scales with omega.
        const double ratio = std::isinf(thermal_ratio) ? thermal_ratio
                                                       : thermal_ratio * (w / omega);
        return TruncatedOscillator(dim, w, ratio, mass, hbar);
    }
};

// ------------------------------- repeated_interaction_sim ---------------------

// Collision-resolved reference dynamics: free evolution for tau - epsilon,
// then a joint unitary with a fresh thermal ancilla coupled as c * x (x) X for
// duration epsilon, then the ancilla is traced out. Returns the stroboscopic
// system states (initial state first, one snapshot per collision).
inline std::vector<ComplexMatrix> repeated_interaction_sim(
    const ComplexMatrix& rho_s0, const PositionGrid& grid, const TruncatedOscillator& ancilla,
    double coupling, const CollisionSchedule& schedule, const SystemSpec& spec) {
    const auto d_sys = static_cast<Eigen::Index>(grid.n_points);
    if (rho_s0.rows() != d_sys || rho_s0.cols() != d_sys) {
        throw ShapeError("repeated_interaction_sim: rho_s does not match the grid");
    }
    if (grid.n_points > 32) {
        throw ValidationError("repeated_interaction_sim: system dimension must be <= 32");
    }
    if (ancilla.dim > 16) {
        throw ValidationError("repeated_interaction_sim: ancilla dimension must be <= 16");
    }
    const ComplexMatrix H_s = position_hamiltonian(grid, spec);
    ComplexMatrix x_s = ComplexMatrix::Zero(d_sys, d_sys);
    for (Eigen::Index j = 0; j < d_sys; ++j) x_s(j, j) = grid.point(static_cast<std::size_t>(j));
    const ComplexMatrix U_free =
        evolution_operator(H_s, schedule.tau - schedule.epsilon, spec.hbar);

    const auto d_anc = static_cast<Eigen::Index>(ancilla.dim);
    const ComplexMatrix I_sys = ComplexMatrix::Identity(d_sys, d_sys);
    const ComplexMatrix I_anc = ComplexMatrix::Identity(d_anc, d_anc);

    // Collision unitaries cached per distinct frequency.
    struct CollisionPieces {
        double omega;
        ComplexMatrix unitary;
        ComplexMatrix thermal;
    };
    std::vector<CollisionPieces> cache;
    const auto collision_index = [&](double w) -> std::size_t {
        for (std::size_t k = 0; k < cache.size(); ++k) {
            if (cache[k].omega == w) return k;
        }
        const TruncatedOscillator osc = ancilla.with_frequency(w);
        const ComplexMatrix H_joint = kron(H_s, I_anc) + kron(I_sys, osc.hamiltonian()) +
                                      coupling * kron(x_s, osc.position_operator());
        cache.push_back({w, evolution_operator(H_joint, schedule.epsilon, spec.hbar),
                         osc.thermal_state()});
        return cache.size() - 1;
    };

    std::vector<ComplexMatrix> snapshots;
    snapshots.reserve(schedule.n_collisions + 1);
    snapshots.push_back(rho_s0);
    ComplexMatrix rho = rho_s0;
    for (std::size_t i = 1; i <= schedule.n_collisions; ++i) {
        rho = U_free * rho * U_free.adjoint();
        const CollisionPieces& pieces = cache[collision_index(schedule.omega_at(i))];
        ComplexMatrix joint = kron(rho, pieces.thermal);
        joint = pieces.unitary * joint * pieces.unitary.adjoint();
        // Cutoff tripwire: occupation of the top ancilla level after the kick.
        double top = 0.0;
        for (Eigen::Index s = 0; s < d_sys; ++s) {
            top += joint(s * d_anc + (d_anc - 1), s * d_anc + (d_anc - 1)).real();
        }
        if (top > 1e-5) {
            throw NumericalError("repeated_interaction_sim: ancilla cutoff leakage " +
                                 std::to_string(top) + " at collision " + std::to_string(i));
        }
        rho = partial_trace_second(joint, d_sys, d_anc);
        snapshots.push_back(rho);
    }
    return snapshots;
}

// --------------------------------- brute_force_path_sum -----------------------

enum class EnumerationOrder { Canonical, Reversed };

using PathPairExponent = std::function<Complex(const DiscretePath&, const DiscretePath&)>;

// Literal enumeration of every grid-valued path pair, summing exp(exponent).
// No measure factors: callers scale the result. Canonical order matches the
// production path sums (forward-path digits most significant, last digit
// fastest); Reversed exists for the summation-stability audit.
inline PropagatorTensor brute_force_path_sum(const PositionGrid& grid, const TimeMesh& mesh,
                                             const PathPairExponent& exponent,
                                             EnumerationOrder order = EnumerationOrder::Canonical) {
    if (grid.n_points > 4) throw SizeError("brute_force_path_sum: grid must have <= 4 points");
    if (mesh.n_steps > 3) throw SizeError("brute_force_path_sum: mesh must have <= 3 slices");
    const double total = std::pow(static_cast<double>(grid.n_points),
                                  static_cast<double>(2 * mesh.n_steps + 2));
    if (total > 1e6) {
        throw SizeError("brute_force_path_sum: " + std::to_string(total) +
                        " path pairs exceed 1e6");
    }
    const std::size_t n = grid.n_points;
    const std::size_t n_interior = mesh.n_steps - 1;
    const std::size_t last = mesh.n_points() - 1;
    std::vector<Complex> entries(n * n * n * n);
    DiscretePath px(mesh, std::vector<double>(mesh.n_points(), 0.0));
    DiscretePath py(mesh, std::vector<double>(mesh.n_points(), 0.0));
    std::vector<std::size_t> digits(2 * n_interior, 0);
    for (std::size_t ix = 0; ix < n; ++ix) {
        for (std::size_t iy = 0; iy < n; ++iy) {
            for (std::size_t jx = 0; jx < n; ++jx) {
                for (std::size_t jy = 0; jy < n; ++jy) {
                    px.values[0] = grid.point(jx);
                    px.values[last] = grid.point(ix);
                    py.values[0] = grid.point(jy);
                    py.values[last] = grid.point(iy);
                    Complex acc{0.0, 0.0};
                    std::fill(digits.begin(), digits.end(), 0);
                    while (true) {
                        for (std::size_t d = 0; d < n_interior; ++d) {
                            px.values[d + 1] = grid.point(digits[d]);
                            py.values[d + 1] = grid.point(digits[n_interior + d]);
                        }
                        acc += std::exp(exponent(px, py));
                        if (digits.empty()) break;
                        // odometer; canonical runs the last digit fastest
                        bool rolled_over = true;
                        if (order == EnumerationOrder::Canonical) {
                            for (std::size_t d = digits.size(); d-- > 0;) {
                                if (++digits[d] < n) {
                                    rolled_over = false;
                                    break;
                                }
                                digits[d] = 0;
                            }
                        } else {
                            for (std::size_t d = 0; d < digits.size(); ++d) {
                                if (++digits[d] < n) {
                                    rolled_over = false;
                                    break;
                                }
                                digits[d] = 0;
                            }
                        }
                        if (rolled_over) break;
                    }
                    entries[((ix * n + iy) * n + jx) * n + jy] = acc;
                }
            }
        }
    }
    return PropagatorTensor::dense(grid, mesh.t_total, PropagatorVariant::FeynmanVernon,
                                   std::move(entries));
}

}  // namespace lfvlab
