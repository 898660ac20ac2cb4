// Nonlinear least squares: Levenberg-Marquardt with finite-difference
// Jacobian (trust-region damping on the normal equations) and a Nelder-Mead
// simplex fallback. Positivity constraints enter through smooth parameter
// transforms, never through clipping.

#ifndef HANLE_FIT_HPP
#define HANLE_FIT_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "hanle/scan.hpp"
#include "hanle/types.hpp"

namespace hanle {

struct FitOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10;
    double step_tol = 1e-12;
    double cost_tol = 1e-14;
    double fd_rel = 1e-6;  // finite-difference relative step
    double fd_abs = 1e-9;  // absolute floor
    bool simplex_fallback = true;
    bool joint_channels = true;   // share model params across s_b and s_t
    bool float_gamma_gyro = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresOutcome {
    Eigen::VectorXd params;
    double cost = 0.0;  // 0.5 * ||r||^2
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_history;  // accepted-step costs, monotone
    Eigen::VectorXd jtj_diag;               // Gauss-Newton diagonal at solution
    std::string message;
};

LeastSquaresOutcome levenberg_marquardt(const ResidualFn& residuals,
                                        const Eigen::VectorXd& initial,
                                        const FitOptions& options);

// Derivative-free minimizer of 0.5 * ||r||^2 over the same parameters.
LeastSquaresOutcome nelder_mead(const ResidualFn& residuals, const Eigen::VectorXd& initial,
                                const FitOptions& options);

struct FitResult {
    ModifiedModelParams params;
    double scale_sb = 1.0;
    double scale_st = 1.0;
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> per_param_sensitivity;  // native-unit diag(J^T J)
    std::vector<std::string> param_names;
    std::vector<double> objective_history;
    std::string message;
};

// Fits {gamma2, k_aniso, b_y0, decay_coeff, amplitude scale(s)} of the
// modified closed-form model to a map. The region mask and branch sign are
// held fixed at the guess. Jointly fits s_b and s_t with shared model
// parameters and separate scales when the map carries both channels and
// options.joint_channels is set.
FitResult fit_map(const SignalMap& data, const ModifiedModelParams& guess, double scale_guess,
                  const FitOptions& options);

// Amplitude-vs-B_y dispersion curve with the quadrature effective field:
//   A(b) = 2 * scale * w * beff / (w^2 + beff^2),
//   beff = Sign(b) * sqrt(b^2 + b_y0^2).
double effective_dispersion(double b_y, double scale, double width, double b_y0);

struct CurveFitResult {
    double scale = 0.0;
    double width = 0.0;
    double b_y0 = 0.0;
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;
};

CurveFitResult fit_amplitude_curve(const std::vector<double>& b_y,
                                   const std::vector<double>& amplitude, double scale_guess,
                                   double width_guess, double b_y0_guess,
                                   const FitOptions& options);

}  // namespace hanle

#endif
