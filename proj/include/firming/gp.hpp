#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace firming::gp {

enum class KernelFamily { Matern52, Matern32 };

// Anisotropic product Matern kernel over 2-d inputs. Hyperparameters are
// expressed in standardized units (inputs and outputs min-max scaled to
// [-1, 1] by fit/mle_fit).
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern52;
    double sigma2 = 1.0;                    // signal variance
    std::array<double, 2> ell = {1.0, 1.0}; // lengthscales per input dimension

    void validate() const;
};

double kernel_eval(const KernelSpec& spec, const Eigen::Vector2d& x, const Eigen::Vector2d& y);

// Trained exact-GP surrogate: factorized covariance weights plus the
// standardization constants needed to evaluate in original units.
struct GPModel {
    KernelSpec kernel;
    double noise2 = 0.0;       // observation noise variance (standardized units)
    Eigen::MatrixXd train_x;   // n x 2, standardized
    Eigen::VectorXd alpha;     // (C + noise2 I)^{-1} y_std
    Eigen::Vector2d x_shift = Eigen::Vector2d::Zero();
    Eigen::Vector2d x_scale = Eigen::Vector2d::Ones();
    double y_shift = 0.0;
    double y_scale = 1.0;
    double jitter = 0.0;       // diagonal jitter actually added
    double train_rmse = 0.0;   // training residual RMSE, original units

    int size() const { return static_cast<int>(train_x.rows()); }
    Eigen::Vector2d standardize(const Eigen::Vector2d& x) const {
        return (x - x_shift).cwiseQuotient(x_scale);
    }

    double mean(const Eigen::Vector2d& x) const;
    // d mean / d x_dim, dim is 0-based; analytic, chain-ruled through the
    // standardization. The Matern-3/2 derivative at zero distance is taken as 0.
    double grad(const Eigen::Vector2d& x, int dim) const;
    Eigen::VectorXd mean_batch(const Eigen::MatrixXd& pts) const;
};

// Exact GP fit: factorizes C + noise2 I (escalating diagonal jitter
// 1e-10..1e-6 x mean diagonal on failure) and stores the prediction weights.
// Throws when the Gram matrix stays indefinite at maximum jitter.
GPModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
            const KernelSpec& spec, double noise2);

double posterior_mean(const GPModel& model, const Eigen::Vector2d& x);
double posterior_grad(const GPModel& model, const Eigen::Vector2d& x, int dim);

struct MleBounds {
    double ell_lo = 1e-3, ell_hi = 10.0;
    double sigma2_lo = 1e-4, sigma2_hi = 10.0;
    double noise2_lo = 1e-8, noise2_hi = 1.0;
};

struct MleResult {
    KernelSpec kernel;   // standardized units
    double noise2 = 0.0; // standardized units
    double log_marginal = 0.0;
    int iterations = 0;
    bool warning = false;  // no start improved on the initialization
};

// Maximum-likelihood hyperparameters by BFGS in log-hyperparameter space,
// started from `init` plus `n_restarts` fixed perturbations of it. The result
// never has lower log marginal likelihood than `init`; deterministic given
// inputs.
MleResult mle_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                  const KernelSpec& init, double init_noise2,
                  const MleBounds& bounds = {}, int n_restarts = 3, int max_iters = 60);

}  // namespace firming::gp
