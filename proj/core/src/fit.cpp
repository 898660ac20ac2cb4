#include "hanle/fit.hpp"

#include <algorithm>
#include <cmath>

#include "hanle/reference_model.hpp"

namespace hanle {

namespace {

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }
double softplus_inv(double y) {
    y = std::max(y, 1e-12);
    return y > 30.0 ? y : std::log(std::expm1(y));
}

Eigen::VectorXd fd_jacobian_col(const ResidualFn& fn, Eigen::VectorXd p, int j, double h,
                                const Eigen::VectorXd& r0) {
    p(j) += h;
    return (fn(p) - r0) / h;
}

}  // namespace

LeastSquaresOutcome levenberg_marquardt(const ResidualFn& residuals,
                                        const Eigen::VectorXd& initial,
                                        const FitOptions& options) {
    LeastSquaresOutcome out;
    Eigen::VectorXd p = initial;
    Eigen::VectorXd r = residuals(p);
    double cost = 0.5 * r.squaredNorm();
    if (!std::isfinite(cost)) {
        out.params = p;
        out.message = "non-finite cost at the initial guess";
        return out;
    }
    out.objective_history.push_back(cost);

    const int n = static_cast<int>(p.size());
    const int m = static_cast<int>(r.size());
    double lambda = 1e-3;
    Eigen::MatrixXd jac(m, n);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        out.iterations = iter + 1;
        for (int j = 0; j < n; ++j) {
            const double h = options.fd_rel * std::abs(p(j)) + options.fd_abs;
            jac.col(j) = fd_jacobian_col(residuals, p, j, h, r);
        }
        const Eigen::VectorXd g = jac.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < options.gradient_tol * std::max(1.0, cost)) {
            out.converged = true;
            out.message = "gradient below tolerance";
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;

        bool accepted = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            for (int j = 0; j < n; ++j)
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-g);
            if (!step.allFinite()) {
                lambda *= 4.0;
                continue;
            }
            const Eigen::VectorXd p_try = p + step;
            const Eigen::VectorXd r_try = residuals(p_try);
            const double cost_try = 0.5 * r_try.squaredNorm();
            if (std::isfinite(cost_try) && cost_try < cost) {
                const double drop = cost - cost_try;
                const double step_norm = step.norm();
                p = p_try;
                r = r_try;
                cost = cost_try;
                out.objective_history.push_back(cost);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (drop < options.cost_tol * std::max(1.0, cost) ||
                    step_norm < options.step_tol * (1.0 + p.norm())) {
                    out.converged = true;
                    out.message = "cost/step change below tolerance";
                }
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            out.message = "no acceptable step found (lambda saturated)";
            break;
        }
        if (out.converged) break;
    }
    if (!out.converged && out.message.empty()) out.message = "iteration limit reached";

    // Gauss-Newton diagonal at the solution for sensitivity reporting.
    out.jtj_diag.resize(n);
    for (int j = 0; j < n; ++j) {
        const double h = options.fd_rel * std::abs(p(j)) + options.fd_abs;
        out.jtj_diag(j) = fd_jacobian_col(residuals, p, j, h, r).squaredNorm();
    }
    out.params = p;
    out.cost = cost;
    return out;
}

LeastSquaresOutcome nelder_mead(const ResidualFn& residuals, const Eigen::VectorXd& initial,
                                const FitOptions& options) {
    const int n = static_cast<int>(initial.size());
    auto cost_of = [&](const Eigen::VectorXd& p) {
        const double c = 0.5 * residuals(p).squaredNorm();
        return std::isfinite(c) ? c : 1e300;
    };

    std::vector<Eigen::VectorXd> simplex(static_cast<size_t>(n) + 1, initial);
    std::vector<double> cost(static_cast<size_t>(n) + 1);
    for (int j = 0; j < n; ++j)
        simplex[static_cast<size_t>(j) + 1](j) +=
            (initial(j) != 0.0) ? 0.05 * std::abs(initial(j)) : 0.1;
    for (size_t k = 0; k < simplex.size(); ++k) cost[k] = cost_of(simplex[k]);

    LeastSquaresOutcome out;
    const int max_iter = options.max_iterations * 10;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::vector<size_t> order(simplex.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return cost[a] < cost[b]; });
        const size_t best = order.front(), worst = order.back();
        const size_t second_worst = order[order.size() - 2];
        if (std::abs(cost[worst] - cost[best]) <
            options.cost_tol * std::max(1.0, std::abs(cost[best])) + 1e-300) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (size_t k = 0; k < simplex.size(); ++k)
            if (k != worst) centroid += simplex[k];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflect = centroid + (centroid - simplex[worst]);
        const double c_reflect = cost_of(reflect);
        if (c_reflect < cost[best]) {
            const Eigen::VectorXd expand = centroid + 2.0 * (centroid - simplex[worst]);
            const double c_expand = cost_of(expand);
            if (c_expand < c_reflect) {
                simplex[worst] = expand;
                cost[worst] = c_expand;
            } else {
                simplex[worst] = reflect;
                cost[worst] = c_reflect;
            }
        } else if (c_reflect < cost[second_worst]) {
            simplex[worst] = reflect;
            cost[worst] = c_reflect;
        } else {
            const Eigen::VectorXd contract = centroid + 0.5 * (simplex[worst] - centroid);
            const double c_contract = cost_of(contract);
            if (c_contract < cost[worst]) {
                simplex[worst] = contract;
                cost[worst] = c_contract;
            } else {
                for (size_t k = 0; k < simplex.size(); ++k) {
                    if (k == best) continue;
                    simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
                    cost[k] = cost_of(simplex[k]);
                }
            }
        }
    }
    size_t best = 0;
    for (size_t k = 1; k < simplex.size(); ++k)
        if (cost[k] < cost[best]) best = k;
    out.params = simplex[best];
    out.cost = cost[best];
    out.iterations = iter;
    out.message = out.converged ? "simplex collapsed" : "simplex iteration limit";
    return out;
}

double effective_dispersion(double b_y, double scale, double width, double b_y0) {
    const double beff = (b_y >= 0.0 ? 1.0 : -1.0) * std::sqrt(b_y * b_y + b_y0 * b_y0);
    return 2.0 * scale * width * beff / (width * width + beff * beff);
}

namespace {

// Transform layout for fit_map: [log gamma2, log k, softplus^-1 b_y0,
// softplus^-1 decay, scale_sb(, scale_st)].
struct MapParamPack {
    bool with_st = false;

    int size() const { return with_st ? 6 : 5; }

    Eigen::VectorXd pack(const ModifiedModelParams& p, double scale_sb,
                         double scale_st) const {
        Eigen::VectorXd u(size());
        u(0) = std::log(p.base.gamma2);
        u(1) = std::log(p.k_aniso);
        u(2) = softplus_inv(p.b_y0);
        u(3) = softplus_inv(p.decay_coeff);
        u(4) = scale_sb;
        if (with_st) u(5) = scale_st;
        return u;
    }

    void unpack(const Eigen::VectorXd& u, ModifiedModelParams& p, double& scale_sb,
                double& scale_st) const {
        p.base.gamma2 = std::exp(u(0));
        p.k_aniso = std::exp(u(1));
        p.b_y0 = softplus(u(2));
        p.decay_coeff = softplus(u(3));
        scale_sb = u(4);
        if (with_st) scale_st = u(5);
    }
};

}  // namespace

FitResult fit_map(const SignalMap& data, const ModifiedModelParams& guess, double scale_guess,
                  const FitOptions& options) {
    if (!data.complete() || data.nx() == 0 || data.ny() == 0)
        throw invalid_parameter("fit_map: data grid must be complete and nonempty");
    guess.validate();

    MapParamPack pack;
    pack.with_st = data.has_s_t() && options.joint_channels;

    const size_t n_nodes = data.nx() * data.ny();
    ModifiedModelParams base = guess;

    ResidualFn residuals = [&](const Eigen::VectorXd& u) {
        ModifiedModelParams p = base;
        double scale_sb = 1.0, scale_st = 1.0;
        pack.unpack(u, p, scale_sb, scale_st);
        const size_t m = pack.with_st ? 2 * n_nodes : n_nodes;
        Eigen::VectorXd r(m);
        size_t idx = 0;
        for (size_t j = 0; j < data.ny(); ++j) {
            ModifiedModelParams row = p;
            const double by = data.by_values[j];
            if (by > 0.0) row.branch_sign = +1;
            if (by < 0.0) row.branch_sign = -1;
            for (size_t i = 0; i < data.nx(); ++i) {
                const FieldVector f{data.bx_values[i], by, 0.0};
                if (pack.with_st) {
                    const SignalPair sig = signals_modified(f, row);
                    r(idx) = scale_sb * sig.s_b - data.sb_at(i, j);
                    r(n_nodes + idx) = scale_st * sig.s_t - data.st_at(i, j);
                } else {
                    r(idx) = scale_sb * s_b_modified(f, row) - data.sb_at(i, j);
                }
                ++idx;
            }
        }
        return r;
    };

    const Eigen::VectorXd u0 = pack.pack(guess, scale_guess, scale_guess);
    LeastSquaresOutcome lm = levenberg_marquardt(residuals, u0, options);
    if (!lm.converged && options.simplex_fallback) {
        LeastSquaresOutcome nm = nelder_mead(residuals, lm.params, options);
        if (nm.cost < lm.cost) {
            nm.objective_history = lm.objective_history;
            nm.objective_history.insert(nm.objective_history.end(), nm.cost);
            nm.jtj_diag = lm.jtj_diag;
            nm.message = "simplex fallback: " + nm.message;
            lm = nm;
        }
    }

    FitResult result;
    result.params = base;
    pack.unpack(lm.params, result.params, result.scale_sb, result.scale_st);
    const size_t m = pack.with_st ? 2 * n_nodes : n_nodes;
    result.residual_rms = std::sqrt(2.0 * lm.cost / static_cast<double>(m));
    result.iterations = lm.iterations;
    result.converged = lm.converged;
    result.objective_history = lm.objective_history;
    result.message = lm.message;
    result.param_names = {"gamma2", "k_aniso", "b_y0", "decay_coeff", "scale_sb"};
    if (pack.with_st) result.param_names.push_back("scale_st");

    // Native-unit sensitivities from a finite-difference Jacobian in the
    // untransformed parameters.
    {
        std::vector<double> native{result.params.base.gamma2, result.params.k_aniso,
                                   result.params.b_y0, result.params.decay_coeff,
                                   result.scale_sb};
        if (pack.with_st) native.push_back(result.scale_st);
        const Eigen::VectorXd r0 = residuals(lm.params);
        for (size_t j = 0; j < native.size(); ++j) {
            ModifiedModelParams p = result.params;
            double ssb = result.scale_sb, sst = result.scale_st;
            const double h = options.fd_rel * std::abs(native[j]) + options.fd_abs;
            std::vector<double> bumped = native;
            bumped[j] += h;
            p.base.gamma2 = bumped[0];
            p.k_aniso = bumped[1];
            p.b_y0 = bumped[2];
            p.decay_coeff = bumped[3];
            ssb = bumped[4];
            if (pack.with_st) sst = bumped[5];
            const Eigen::VectorXd u =
                pack.pack(p, ssb, sst);  // same residuals via transform
            const Eigen::VectorXd dr = (residuals(u) - r0) / h;
            result.per_param_sensitivity.push_back(dr.squaredNorm());
        }
    }
    return result;
}

CurveFitResult fit_amplitude_curve(const std::vector<double>& b_y,
                                   const std::vector<double>& amplitude, double scale_guess,
                                   double width_guess, double b_y0_guess,
                                   const FitOptions& options) {
    if (b_y.size() != amplitude.size() || b_y.size() < 4)
        throw invalid_parameter("fit_amplitude_curve: need >= 4 points");
    if (!(width_guess > 0.0))
        throw invalid_parameter("fit_amplitude_curve: width guess must be > 0");

    // Transform: [scale, log width, softplus^-1 b_y0].
    ResidualFn residuals = [&](const Eigen::VectorXd& u) {
        const double scale = u(0);
        const double width = std::exp(u(1));
        const double b0 = softplus(u(2));
        Eigen::VectorXd r(static_cast<int>(b_y.size()));
        for (size_t i = 0; i < b_y.size(); ++i)
            r(static_cast<int>(i)) =
                effective_dispersion(b_y[i], scale, width, b0) - amplitude[i];
        return r;
    };

    Eigen::VectorXd u0(3);
    u0(0) = scale_guess;
    u0(1) = std::log(width_guess);
    u0(2) = softplus_inv(std::max(b_y0_guess, 1e-9));
    LeastSquaresOutcome lm = levenberg_marquardt(residuals, u0, options);
    if (!lm.converged && options.simplex_fallback) {
        const LeastSquaresOutcome nm = nelder_mead(residuals, lm.params, options);
        if (nm.cost < lm.cost) lm = nm;
    }

    CurveFitResult out;
    out.scale = lm.params(0);
    out.width = std::exp(lm.params(1));
    out.b_y0 = softplus(lm.params(2));
    out.residual_rms = std::sqrt(2.0 * lm.cost / static_cast<double>(b_y.size()));
    out.iterations = lm.iterations;
    out.converged = lm.converged;
    return out;
}

}  // namespace hanle
