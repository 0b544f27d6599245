// bath.hpp — Harmonic bath: oscillator data, classical boundary-value
// solutions, the fixed-endpoint Green's function, the thermal initial state,
// and the noise/dissipation kernels of the influence phase.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lfvlab/errors.hpp"
#include "lfvlab/numerics.hpp"

namespace lfvlab {

// |sin(omega*t)| below this floor is treated as a caustic.
inline constexpr double kCausticFloor = 1e-9;

inline void require_away_from_caustic(double omega, double t, double floor = kCausticFloor) {
    if (std::abs(std::sin(omega * t)) < floor) {
        throw CausticError("sin(omega*t) ~ 0 at omega=" + std::to_string(omega) +
                           ", t=" + std::to_string(t) + ": boundary-value problem degenerates");
    }
}

// coth(x) for x > 0, stable from x ~ 1e-300 up to x = +inf (-> 1).
inline double coth(double x) {
    return 1.0 / std::tanh(x);
}

// ----------------------------------- BathSpec --------------------------------

// N independent oscillators, common mass, per-oscillator frequency, linear
// coupling constant, and thermal ratio hbar*omega_i/kT. A ratio of +inf marks
// zero temperature (coth -> 1 limit).
struct BathSpec {
    std::size_t count{0};
    double mass{1.0};
    std::vector<double> omegas;
    std::vector<double> couplings;
    std::vector<double> thermal_ratios;  // hbar*omega_i / kT, dimensionless
    double hbar{1.0};

    BathSpec() = default;

    BathSpec(double m, std::vector<double> w, std::vector<double> c,
             std::vector<double> ratios, double hb)
        : count(w.size()),
          mass(m),
          omegas(std::move(w)),
          couplings(std::move(c)),
          thermal_ratios(std::move(ratios)),
          hbar(hb) {
        validate();
    }

    static BathSpec from_temperature(double m, std::vector<double> w, std::vector<double> c,
                                     double kT, double hb) {
        std::vector<double> ratios(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            ratios[i] = (kT > 0.0) ? hb * w[i] / kT : std::numeric_limits<double>::infinity();
        }
        return BathSpec(m, std::move(w), std::move(c), std::move(ratios), hb);
    }

    void validate() const {
        if (count == 0) throw ValidationError("BathSpec: bath must be non-empty");
        if (!(mass > 0.0)) throw ValidationError("BathSpec: mass must be > 0");
        if (!(hbar > 0.0)) throw ValidationError("BathSpec: hbar must be > 0");
        if (couplings.size() != count || thermal_ratios.size() != count) {
            throw ShapeError("BathSpec: omegas/couplings/thermal_ratios lengths differ (" +
                             std::to_string(omegas.size()) + ", " + std::to_string(couplings.size()) +
                             ", " + std::to_string(thermal_ratios.size()) + ")");
        }
        for (std::size_t i = 0; i < count; ++i) {
            if (!(omegas[i] > 0.0)) {
                throw ValidationError("BathSpec: omega[" + std::to_string(i) +
                                      "] must be > 0 (c^2/2m*omega diverges otherwise)");
            }
            if (!(thermal_ratios[i] > 0.0)) {
                throw ValidationError("BathSpec: thermal ratio[" + std::to_string(i) +
                                      "] must be > 0 (use +inf for zero temperature)");
            }
        }
    }

    bool zero_temperature(std::size_t i) const { return std::isinf(thermal_ratios[i]); }

    // coth(hbar*omega_i / 2kT); ratio = +inf gives the zero-temperature limit 1.
    double coth_half_ratio(std::size_t i) const {
        const double u = thermal_ratios[i];
        return std::isinf(u) ? 1.0 : coth(0.5 * u);
    }
};

// --------------------------------- ClassicalPath -----------------------------

// Harmonic boundary-value solution X(t') = A sin(omega t') + B cos(omega t')
// pinned to X(0) = X_start and X(t_final) = X_end.
struct ClassicalPath {
    double omega{0.0};
    double t_final{0.0};
    double X_start{0.0};
    double X_end{0.0};
    double A{0.0};
    double B{0.0};

    double value(double t) const { return A * std::sin(omega * t) + B * std::cos(omega * t); }
    double velocity(double t) const {
        return omega * (A * std::cos(omega * t) - B * std::sin(omega * t));
    }
};

inline ClassicalPath classical_solution(double X_start, double X_end, double omega,
                                        double t_final) {
    require_away_from_caustic(omega, t_final);
    const double s = std::sin(omega * t_final);
    const double c = std::cos(omega * t_final);
    ClassicalPath path;
    path.omega = omega;
    path.t_final = t_final;
    path.X_start = X_start;
    path.X_end = X_end;
    path.B = X_start;
    path.A = X_end / s - X_start * (c / s);
    return path;
}

// -------------------------------- greens_function ----------------------------

// Green's function of m (d^2/dt'^2 + omega^2) with both-endpoint Dirichlet
// conditions on [0, t_final]:
//   G(t1, t2) = sin(omega (t_final - t1)) sin(omega t2) / (m omega sin(omega t_final))
// for t2 <= t1, extended symmetrically for t2 > t1.
inline double greens_function(double omega, double t_final, double t1, double t2, double m) {
    if (t1 < 0.0 || t2 < 0.0 || t1 > t_final || t2 > t_final) {
        throw DomainError("greens_function: times must lie in [0, t_final]");
    }
    require_away_from_caustic(omega, t_final);
    if (t2 > t1) std::swap(t1, t2);
    return std::sin(omega * (t_final - t1)) * std::sin(omega * t2) /
           (m * omega * std::sin(omega * t_final));
}

// -------------------------------- thermal_density ----------------------------

// Thermal oscillator density matrix in position representation, one factor per
// oscillator with u_i = hbar*omega_i/kT:
//   rho_i(X, Y) = sqrt(m omega_i tanh(u_i/2) / (pi hbar))
//                 * exp{ -(m omega_i / 2 hbar sinh u_i) [ (X^2 + Y^2) cosh u_i - 2 X Y ] }
// Evaluated in log domain so extreme ratios stay finite; the prefactor is the
// unique choice that makes each factor trace to one.
inline double thermal_density(const BathSpec& bath, const std::vector<double>& X,
                              const std::vector<double>& Y) {
    if (X.size() != bath.count || Y.size() != bath.count) {
        throw ShapeError("thermal_density: endpoint vectors must have length N");
    }
    double log_value = 0.0;
    for (std::size_t i = 0; i < bath.count; ++i) {
        const double u = bath.thermal_ratios[i];
        const double w = bath.omegas[i];
        const double scale = bath.mass * w / bath.hbar;  // 1/length^2
        double tanh_half, coth_u, inv_sinh;
        if (std::isinf(u)) {
            tanh_half = 1.0;
            coth_u = 1.0;
            inv_sinh = 0.0;
        } else {
            tanh_half = std::tanh(0.5 * u);
            coth_u = coth(u);
            // 2 e^{-u} / (1 - e^{-2u}), stable for u up to overflow of exp(u)
            inv_sinh = 2.0 * std::exp(-u) / (-std::expm1(-2.0 * u));
        }
        log_value += 0.5 * std::log(scale * tanh_half / M_PI);
        log_value -= 0.5 * scale * ((X[i] * X[i] + Y[i] * Y[i]) * coth_u - 2.0 * X[i] * Y[i] * inv_sinh);
        if (!std::isfinite(log_value)) {
            if (log_value > 0.0) {
                throw NumericalError("thermal_density: overflow at oscillator " + std::to_string(i));
            }
            return 0.0;  // clean underflow far from the diagonal
        }
    }
    return std::exp(log_value);
}

// ---------------------------- influence-phase kernels ------------------------

// Noise (decoherence) kernel at time difference s = t' - t'':
//   sum_i c_i^2/(2 m omega_i) coth(hbar omega_i / 2kT) cos(omega_i s)
inline double noise_kernel(const BathSpec& bath, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < bath.count; ++i) {
        const double c = bath.couplings[i];
        acc += c * c / (2.0 * bath.mass * bath.omegas[i]) * bath.coth_half_ratio(i) *
               std::cos(bath.omegas[i] * s);
    }
    return acc;
}

// Dissipation (friction) kernel, temperature independent:
//   sum_i c_i^2/(2 m omega_i) sin(omega_i s)
inline double dissipation_kernel(const BathSpec& bath, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < bath.count; ++i) {
        const double c = bath.couplings[i];
        acc += c * c / (2.0 * bath.mass * bath.omegas[i]) * std::sin(bath.omegas[i] * s);
    }
    return acc;
}

}  // namespace lfvlab
