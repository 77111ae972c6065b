#pragma once

#include "skdv/grid.hpp"

#include <Eigen/Dense>

#include <vector>

namespace skdv {

struct SolitonParams {
    double c = 1.0;
    double x0 = 0.0;
};

// Pointwise closed forms of phi_c(x) = 3c sech^2(sqrt(c) x / 2) and its partial derivatives.
namespace profile {
double phi(double c, double x);
double phi_x(double c, double x);
double phi_xx(double c, double x);
double phi_xxx(double c, double x);
double phi_c(double c, double x);
double phi_cc(double c, double x);
}  // namespace profile

Field soliton(double c, const Grid& grid);
Field soliton_dx(double c, const Grid& grid);
Field soliton_dxx(double c, const Grid& grid);
Field soliton_dxxx(double c, const Grid& grid);
Field soliton_dc(double c, const Grid& grid);
Field soliton_dcc(double c, const Grid& grid);
// phi_c centred at x0, i.e. translate(soliton(c), -x0).
Field soliton_at(const SolitonParams& p, const Grid& grid);

// L2 norm of phi'' - c phi + phi^2 / 2.
double soliton_residual(const Field& u, double c);
double soliton_residual(double c, const Grid& grid);

double mass(const Field& u);
double energy(const Field& u);
double lyapunov(const Field& u, double c0);

// L = -d^2/dx^2 + c0 - phi_{c0}
class LinearizedOperator {
public:
    LinearizedOperator(double c0, const Grid& grid);

    double c0() const noexcept { return c0_; }
    const Grid& grid() const noexcept { return grid_; }
    const Field& profile() const noexcept { return phi_; }

    Field apply(const Field& v) const;
    // Dense N x N matrix acting on nodal values.
    Eigen::MatrixXd matrix() const;

private:
    double c0_;
    Grid grid_;
    Field phi_;
};

Field apply_L(const LinearizedOperator& op, const Field& v);

// Dense spectral differentiation matrix on nodal values.
Eigen::MatrixXd derivative_matrix(const Grid& grid, int order);
Eigen::MatrixXd second_derivative_matrix(const Grid& grid);

// Ascending eigenvalues of the unprojected operator.
std::vector<double> linearized_spectrum(double c0, const Grid& grid);

// Smallest nu with (Lv, v) >= nu |v|_{H1}^2 on the complement of span{phi, phi_x}.
// Throws NumericalFailure if the restricted form is not positive definite.
double coercivity_nu(double c0, const Grid& grid);

}  // namespace skdv
