// lgks.hpp — Markovian master equation (trace-preserving, completely positive
// generator), effective-Hamiltonian form, and the memory-augmented
// integro-differential extension with two-time kernels.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/bath.hpp"
#include "lfvlab/errors.hpp"
#include "lfvlab/numerics.hpp"

namespace lfvlab {

// ------------------------------ LindbladOperatorSet --------------------------

struct LindbladOperatorSet {
    ComplexMatrix H;
    std::vector<ComplexMatrix> L_ops;
    double hbar{1.0};

    LindbladOperatorSet() = default;

    LindbladOperatorSet(ComplexMatrix h, std::vector<ComplexMatrix> ls, double hb)
        : H(std::move(h)), L_ops(std::move(ls)), hbar(hb) {
        validate();
    }

    void validate() const {
        if (H.rows() != H.cols()) throw ShapeError("LindbladOperatorSet: H must be square");
        const double scale = H.cwiseAbs().maxCoeff();
        if (scale > 0.0 && hermiticity_defect(H) > 1e-10 * scale) {
            throw ValidationError("LindbladOperatorSet: H is not Hermitian to 1e-10");
        }
        for (const auto& L : L_ops) {
            if (L.rows() != H.rows() || L.cols() != H.cols()) {
                throw ShapeError("LindbladOperatorSet: all operators must share one dimension");
            }
        }
        if (!(hbar > 0.0)) throw ValidationError("LindbladOperatorSet: hbar must be > 0");
    }

    Eigen::Index dim() const { return H.rows(); }
};

namespace detail {

// Generator without state validation; the memory-augmented integrator feeds
// states whose trace legitimately drifts.
inline ComplexMatrix lindblad_rhs_raw(const LindbladOperatorSet& ops, const ComplexMatrix& rho) {
    ComplexMatrix out = (-kI / ops.hbar) * (ops.H * rho - rho * ops.H);
    for (const auto& L : ops.L_ops) {
        const ComplexMatrix LdL = L.adjoint() * L;
        out += (1.0 / ops.hbar) * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
    }
    return out;
}

}  // namespace detail

// --------------------------------- lindblad_rhs ------------------------------

// d rho/dt = (-i/hbar)[H, rho] + (1/hbar) sum_k ( L_k rho L_k^dag
//            - (1/2){L_k^dag L_k, rho} ).
// The stored right-hand side is the equation of motion divided through by
// i hbar so all integrators see plain d rho/dt.
inline ComplexMatrix lindblad_rhs(const LindbladOperatorSet& ops, const ComplexMatrix& rho) {
    if (rho.rows() != rho.cols() || rho.rows() != ops.dim()) {
        throw ShapeError("lindblad_rhs: rho dimension does not match the operator set");
    }
    const double scale = rho.cwiseAbs().maxCoeff();
    if (scale > 0.0 && hermiticity_defect(rho) > 1e-8 * scale) {
        throw ValidationError("lindblad_rhs: rho is not Hermitian to 1e-8");
    }
    if (std::abs(rho.trace() - Complex{1.0, 0.0}) > 1e-8) {
        throw ValidationError("lindblad_rhs: rho trace deviates from 1 beyond 1e-8");
    }
    return detail::lindblad_rhs_raw(ops, rho);
}

// ------------------------------------ h_eff -----------------------------------

// H_eff = H - (i/2) sum_k L_k^dag L_k
inline ComplexMatrix h_eff(const LindbladOperatorSet& ops) {
    ComplexMatrix out = ops.H;
    for (const auto& L : ops.L_ops) out -= 0.5 * kI * (L.adjoint() * L);
    return out;
}

// ------------------------------- check_positivity ----------------------------

struct PositivityReport {
    double min_eigenvalue{0.0};
    double trace{0.0};
    double hermiticity_defect{0.0};
    bool pass{false};
};

inline PositivityReport check_positivity(const ComplexMatrix& rho, double tol) {
    if (rho.rows() != rho.cols()) throw ShapeError("check_positivity: rho must be square");
    PositivityReport rep;
    rep.hermiticity_defect = lfvlab::hermiticity_defect(rho);
    rep.trace = rho.trace().real();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(rho));
    if (es.info() != Eigen::Success) {
        throw NumericalError("check_positivity: eigensolver failed");
    }
    rep.min_eigenvalue = es.eigenvalues().minCoeff();
    rep.pass = rep.min_eigenvalue >= -tol && std::abs(rep.trace - 1.0) <= tol;
    return rep;
}

// --------------------------------- StateHistory ------------------------------

// Uniform-mesh state history for the memory integral. Full storage, no
// windowing; desk-scale runs keep this cheap and the quadrature exact-in-mesh.
struct StateHistory {
    TimeMesh mesh;
    std::vector<ComplexMatrix> states;

    StateHistory() = default;
    explicit StateHistory(TimeMesh m) : mesh(std::move(m)) {}

    std::size_t size() const { return states.size(); }

    const ComplexMatrix& at_step(std::size_t k) const {
        if (k >= states.size()) {
            throw MissingHistoryError("StateHistory: no state stored at mesh point t = " +
                                      std::to_string(mesh.time(k)));
        }
        return states[k];
    }
};

// -------------------------------- MemoryKernelSet ----------------------------

// Two-time kernels for the memory ("Plus") term
//   integrand(t, tau, rho) = M(t,tau) rho - rho M(t,tau)^dag
//                            + N(t,tau) rho N_delta(t,tau).
// M, N, N_delta are operator-valued functions of (t, tau); N_delta defaults to
// the adjoint of N when unset. The scalar coefficient queries expose the
// bath-trace sums so tests can check them independently of operator placement.
struct MemoryKernelSet {
    using OperatorKernel = std::function<ComplexMatrix(double, double)>;
    using ScalarKernel = std::function<Complex(double)>;

    OperatorKernel M;
    OperatorKernel N;        // empty = no N term
    OperatorKernel N_delta;  // empty with N set = adjoint of N

    // Coefficient queries as functions of s = t' - t''.
    ScalarKernel m_coeff;   // i coth cos + sin sum
    ScalarKernel a_coeff;   // principal square root of a2_sum
    ScalarKernel b_coeff;
    ScalarKernel a2_sum;    // -i coth cos + sin sum
    ScalarKernel b2_sum;    // -i coth cos - sin sum

    bool lindbladian_is_zero{false};
    std::string n_delta_choice{"adjoint"};
    std::string sign_convention{"generator"};

    ComplexMatrix plus_integrand(double t, double tau, const ComplexMatrix& rho) const {
        ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
        if (M) {
            const ComplexMatrix m = M(t, tau);
            out += m * rho - rho * m.adjoint();
        }
        if (N) {
            const ComplexMatrix n = N(t, tau);
            const ComplexMatrix nd = N_delta ? N_delta(t, tau) : ComplexMatrix(n.adjoint());
            out += n * rho * nd;
        }
        return out;
    }
};

// ------------------------------- lindblad_plus_rhs ---------------------------

// d rho/dt at mesh step k: the Markov generator at rho(t) plus
//   (1/(i hbar)) * trapezoid over tau in [0, t] of the memory integrand.
inline ComplexMatrix lindblad_plus_rhs(const LindbladOperatorSet& ops,
                                       const MemoryKernelSet& kernels,
                                       const StateHistory& history, std::size_t k) {
    const ComplexMatrix& rho_t = history.at_step(k);
    ComplexMatrix out = detail::lindblad_rhs_raw(ops, rho_t);
    if (k == 0) return out;
    const double t = history.mesh.time(k);
    const double dt = history.mesh.dt();
    ComplexMatrix mem = ComplexMatrix::Zero(ops.dim(), ops.dim());
    for (std::size_t j = 0; j <= k; ++j) {
        const double w = (j == 0 || j == k) ? 0.5 : 1.0;
        mem += (w * dt) * kernels.plus_integrand(t, history.mesh.time(j), history.at_step(j));
    }
    out += mem / (kI * ops.hbar);
    return out;
}

// Convenience overload resolving t to a mesh step.
inline ComplexMatrix lindblad_plus_rhs(const LindbladOperatorSet& ops,
                                       const MemoryKernelSet& kernels,
                                       const StateHistory& history, double t) {
    const double dt = history.mesh.dt();
    const double kf = t / dt;
    const auto k = static_cast<std::size_t>(std::llround(kf));
    if (std::abs(kf - static_cast<double>(k)) > 1e-9) {
        throw MissingHistoryError("lindblad_plus_rhs: t = " + std::to_string(t) +
                                  " is not a mesh point");
    }
    return lindblad_plus_rhs(ops, kernels, history, k);
}

// ---------------------------- integrate_lindblad_plus ------------------------

// Heun predictor-corrector over the full mesh. Second order, matching the
// trapezoid accuracy of the stored-history memory quadrature.
inline StateHistory integrate_lindblad_plus(const LindbladOperatorSet& ops,
                                            const MemoryKernelSet& kernels,
                                            const ComplexMatrix& rho0, const TimeMesh& mesh) {
    StateHistory history(mesh);
    history.states.reserve(mesh.n_points());
    history.states.push_back(rho0);
    const double dt = mesh.dt();
    for (std::size_t k = 0; k < mesh.n_steps; ++k) {
        const ComplexMatrix f0 = lindblad_plus_rhs(ops, kernels, history, k);
        history.states.push_back(history.states[k] + dt * f0);  // predictor
        const ComplexMatrix f1 = lindblad_plus_rhs(ops, kernels, history, k + 1);
        history.states[k + 1] = history.states[k] + (0.5 * dt) * (f0 + f1);
        if (!all_finite(history.states[k + 1])) {
            throw NumericalError("integrate_lindblad_plus: non-finite state at t = " +
                                 std::to_string(mesh.time(k + 1)));
        }
    }
    return history;
}

// Plain Markovian RK4 integration, returning the stroboscopic history.
inline StateHistory integrate_lindblad(const LindbladOperatorSet& ops, const ComplexMatrix& rho0,
                                       const TimeMesh& mesh) {
    StateHistory history(mesh);
    history.states.reserve(mesh.n_points());
    history.states.push_back(rho0);
    const double dt = mesh.dt();
    const auto rhs = [&ops](const ComplexMatrix& s) { return detail::lindblad_rhs_raw(ops, s); };
    for (std::size_t k = 0; k < mesh.n_steps; ++k) {
        history.states.push_back(rk4_step(history.states[k], rhs, dt));
    }
    return history;
}

// ------------------------------- cl_memory_kernels ---------------------------

// Sign convention for realizing the exponent-level kernels as generator
// kernels of the integro-differential equation. The exponent coefficients are
// what the scalar queries always return; the operator kernels flip sign under
// FvMatched so that integrating the memory equation reproduces the
// influence-functional propagator through second order in t (see
// docs/theory.md). AsPrinted keeps the exponent sign in the generator.
enum class PlusSignConvention { FvMatched, AsPrinted };

inline const char* to_string(PlusSignConvention s) {
    return s == PlusSignConvention::FvMatched ? "generator(FV-matched)" : "as-printed(exponent)";
}

// Memory kernels of the position-coupled oscillator bath. The M coefficient is
//   sum_i c_i^2/(2 m omega_i) [ i coth(hbar omega_i/2kT) cos omega_i s
//                               + sin omega_i s ],
// the cross coefficients A^2, B^2 carry -i coth cos +/- sin, and the
// Lindbladian proper is zero. Position factors: M places both of its x-hat
// factors on the propagation side (its adjoint partner mirrors them), the
// N pair splits into an x-hat sandwich carrying the joint A^2 + B^2 weight.
inline MemoryKernelSet cl_memory_kernels(const BathSpec& bath, double hbar,
                                         const ComplexMatrix& x_op,
                                         PlusSignConvention sign = PlusSignConvention::FvMatched) {
    if (bath.count == 0) throw ValidationError("cl_memory_kernels: bath must be non-empty");
    if (bath.hbar != hbar) {
        throw ValidationError("cl_memory_kernels: hbar disagrees with the bath specification");
    }
    if (x_op.rows() != x_op.cols()) {
        throw ShapeError("cl_memory_kernels: position operator must be square");
    }

    const auto noise = [bath](double s) { return noise_kernel(bath, s); };
    const auto dissip = [bath](double s) { return dissipation_kernel(bath, s); };

    MemoryKernelSet set;
    set.m_coeff = [noise, dissip](double s) { return kI * noise(s) + dissip(s); };
    set.a2_sum = [noise, dissip](double s) { return -kI * noise(s) + dissip(s); };
    set.b2_sum = [noise, dissip](double s) { return -kI * noise(s) - dissip(s); };
    set.a_coeff = [a2 = set.a2_sum](double s) { return std::sqrt(a2(s)); };
    set.b_coeff = [b2 = set.b2_sum](double s) { return std::sqrt(b2(s)); };

    const double sigma = (sign == PlusSignConvention::FvMatched) ? -1.0 : 1.0;
    const ComplexMatrix x2 = x_op * x_op;
    set.M = [sigma, m = set.m_coeff, x2](double t, double tau) -> ComplexMatrix {
        return (sigma * m(t - tau)) * x2;
    };
    set.N = [x_op](double, double) -> ComplexMatrix { return x_op; };
    set.N_delta = [sigma, a2 = set.a2_sum, b2 = set.b2_sum, x_op](double t,
                                                                  double tau) -> ComplexMatrix {
        return (sigma * (a2(t - tau) + b2(t - tau))) * x_op;
    };
    set.lindbladian_is_zero = true;
    set.n_delta_choice = "joint-product";
    set.sign_convention = to_string(sign);
    return set;
}

}  // namespace lfvlab
