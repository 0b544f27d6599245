// propagator_tensor.hpp — Four-point density-matrix propagator J(x,y;x',y';t)
// on a position grid, either stored dense (small grids, path-sum variants) or
// factored as K(x,x') conj(K(y,y')) (closed variant).

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/errors.hpp"
#include "lfvlab/numerics.hpp"

namespace lfvlab {

enum class PropagatorVariant { Closed, FeynmanVernon, MasterEquation };

inline const char* to_string(PropagatorVariant v) {
    switch (v) {
        case PropagatorVariant::Closed: return "closed";
        case PropagatorVariant::FeynmanVernon: return "FV";
        case PropagatorVariant::MasterEquation: return "ME";
    }
    return "?";
}

class PropagatorTensor {
  public:
    // Factored closed form: J(x,y;x',y') = K(x,x') conj(K(y,y')).
    static PropagatorTensor factored(PositionGrid grid, double t, ComplexMatrix kernel) {
        const auto n = static_cast<Eigen::Index>(grid.n_points);
        if (kernel.rows() != n || kernel.cols() != n) {
            throw ShapeError("PropagatorTensor: kernel must be n_points x n_points");
        }
        PropagatorTensor J;
        J.grid_ = std::move(grid);
        J.t_ = t;
        J.variant_ = PropagatorVariant::Closed;
        J.kernel_ = std::move(kernel);
        J.is_factored_ = true;
        return J;
    }

    // Dense storage, entries indexed ((ix*n + iy)*n + jx)*n + jy.
    static PropagatorTensor dense(PositionGrid grid, double t, PropagatorVariant variant,
                                  std::vector<Complex> entries) {
        const std::size_t n = grid.n_points;
        if (entries.size() != n * n * n * n) {
            throw ShapeError("PropagatorTensor: dense storage must hold n^4 entries");
        }
        PropagatorTensor J;
        J.grid_ = std::move(grid);
        J.t_ = t;
        J.variant_ = variant;
        J.entries_ = std::move(entries);
        J.is_factored_ = false;
        return J;
    }

    // Identity propagator (t = 0): K = I/dx, so that applying J returns rho0.
    static PropagatorTensor identity(const PositionGrid& grid) {
        const auto n = static_cast<Eigen::Index>(grid.n_points);
        ComplexMatrix k = ComplexMatrix::Identity(n, n) / grid.spacing();
        return factored(grid, 0.0, std::move(k));
    }

    const PositionGrid& grid() const { return grid_; }
    double time() const { return t_; }
    PropagatorVariant variant() const { return variant_; }
    bool is_factored() const { return is_factored_; }
    const ComplexMatrix& kernel() const {
        if (!is_factored_) throw ValidationError("PropagatorTensor: no kernel in dense form");
        return kernel_;
    }

    Complex entry(std::size_t ix, std::size_t iy, std::size_t jx, std::size_t jy) const {
        const std::size_t n = grid_.n_points;
        if (ix >= n || iy >= n || jx >= n || jy >= n) {
            throw ShapeError("PropagatorTensor: index out of range");
        }
        if (is_factored_) {
            return kernel_(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(jx)) *
                   std::conj(kernel_(static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(jy)));
        }
        return entries_[((ix * n + iy) * n + jx) * n + jy];
    }

    // rho(x,y;t) = dx^2 sum_{x',y'} J(x,y;x',y') rho0(x',y')
    ComplexMatrix apply(const ComplexMatrix& rho0) const {
        const auto n = static_cast<Eigen::Index>(grid_.n_points);
        if (rho0.rows() != n || rho0.cols() != n) {
            throw ShapeError("PropagatorTensor: rho0 does not match the grid");
        }
        const double dx = grid_.spacing();
        if (is_factored_) {
            return (dx * dx) * (kernel_ * rho0 * kernel_.adjoint());
        }
        ComplexMatrix out = ComplexMatrix::Zero(n, n);
        const std::size_t nn = grid_.n_points;
        for (std::size_t ix = 0; ix < nn; ++ix) {
            for (std::size_t iy = 0; iy < nn; ++iy) {
                Complex acc{0.0, 0.0};
                for (std::size_t jx = 0; jx < nn; ++jx) {
                    for (std::size_t jy = 0; jy < nn; ++jy) {
                        acc += entries_[((ix * nn + iy) * nn + jx) * nn + jy] *
                               rho0(static_cast<Eigen::Index>(jx), static_cast<Eigen::Index>(jy));
                    }
                }
                out(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(iy)) = acc;
            }
        }
        return (dx * dx) * out;
    }

  private:
    PropagatorTensor() = default;

    PositionGrid grid_;
    double t_{0.0};
    PropagatorVariant variant_{PropagatorVariant::Closed};
    bool is_factored_{false};
    ComplexMatrix kernel_;
    std::vector<Complex> entries_;
};

}  // namespace lfvlab
