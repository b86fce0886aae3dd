#include "firming/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace firming::gp {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964091736687747;
constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// one-dimensional correlation factor at scaled distance u = |r| / ell
inline double factor(KernelFamily fam, double u) {
    if (fam == KernelFamily::Matern52) {
        return (1.0 + kSqrt5 * u + (5.0 / 3.0) * u * u) * std::exp(-kSqrt5 * u);
    }
    return (1.0 + kSqrt3 * u) * std::exp(-kSqrt3 * u);
}

// d log factor / d log ell at scaled distance u (used by the likelihood gradient)
inline double ell_weight(KernelFamily fam, double u) {
    if (fam == KernelFamily::Matern52) {
        return (5.0 / 3.0) * u * u * (1.0 + kSqrt5 * u) /
               (1.0 + kSqrt5 * u + (5.0 / 3.0) * u * u);
    }
    return 3.0 * u * u / (1.0 + kSqrt3 * u);
}

// (d factor / d r) / factor with r = x_eval - x_train (signed), as a multiplier
// applied to the full kernel value
inline double grad_ratio(KernelFamily fam, double r, double ell) {
    const double a = std::abs(r);
    const double u = a / ell;
    if (fam == KernelFamily::Matern52) {
        const double poly = 1.0 + kSqrt5 * u + (5.0 / 3.0) * u * u;
        return (-(5.0 / 3.0) * r / (ell * ell) -
                (5.0 * kSqrt5 / 3.0) * r * a / (ell * ell * ell)) / poly;
    }
    // Matern-3/2; the one-sided limits at r = 0 cancel to 0
    return -3.0 * r / (ell * ell) / (1.0 + kSqrt3 * u);
}

struct Standardization {
    Eigen::Vector2d x_shift, x_scale;
    double y_shift, y_scale;
};

Standardization standardize_data(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
    Standardization s;
    for (int d = 0; d < 2; ++d) {
        const double lo = inputs.col(d).minCoeff();
        const double hi = inputs.col(d).maxCoeff();
        s.x_shift[d] = (hi + lo) / 2.0;
        s.x_scale[d] = (hi - lo) / 2.0;
        if (s.x_scale[d] <= 0.0) s.x_scale[d] = 1.0;
    }
    const double ylo = targets.minCoeff();
    const double yhi = targets.maxCoeff();
    s.y_shift = (yhi + ylo) / 2.0;
    s.y_scale = (yhi - ylo) / 2.0;
    if (s.y_scale <= 0.0) s.y_scale = 1.0;
    return s;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& xs) {
    const int n = static_cast<int>(xs.rows());
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i) {
        c(i, i) = spec.sigma2;
        for (int j = 0; j < i; ++j) {
            const double u0 = std::abs(xs(i, 0) - xs(j, 0)) / spec.ell[0];
            const double u1 = std::abs(xs(i, 1) - xs(j, 1)) / spec.ell[1];
            const double v = spec.sigma2 * factor(spec.family, u0) * factor(spec.family, u1);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

}  // namespace

void KernelSpec::validate() const {
    require(std::isfinite(sigma2) && sigma2 > 0.0, "KernelSpec: sigma2 must be > 0");
    for (double l : ell)
        require(std::isfinite(l) && l > 0.0, "KernelSpec: lengthscales must be > 0");
}

double kernel_eval(const KernelSpec& spec, const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
    spec.validate();
    double v = spec.sigma2;
    for (int d = 0; d < 2; ++d) v *= factor(spec.family, std::abs(x[d] - y[d]) / spec.ell[d]);
    return v;
}

GPModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
            const KernelSpec& spec, double noise2) {
    require(inputs.rows() >= 1, "gp::fit: need at least one training point");
    require(inputs.cols() == 2, "gp::fit: inputs must be n x 2");
    require(inputs.rows() == targets.size(), "gp::fit: input/target size mismatch");
    require(noise2 >= 0.0, "gp::fit: noise variance must be >= 0");
    spec.validate();

    GPModel model;
    model.kernel = spec;
    model.noise2 = noise2;
    const Standardization s = standardize_data(inputs, targets);
    model.x_shift = s.x_shift;
    model.x_scale = s.x_scale;
    model.y_shift = s.y_shift;
    model.y_scale = s.y_scale;

    const int n = static_cast<int>(inputs.rows());
    model.train_x.resize(n, 2);
    for (int i = 0; i < n; ++i)
        model.train_x.row(i) =
            (inputs.row(i).transpose() - s.x_shift).cwiseQuotient(s.x_scale).transpose();
    Eigen::VectorXd y_std = (targets.array() - s.y_shift) / s.y_scale;

    const Eigen::MatrixXd c = gram(spec, model.train_x);
    const double diag_mean = c.diagonal().mean() + noise2;

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    for (double level : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
        jitter = level * diag_mean;
        Eigen::MatrixXd k = c;
        k.diagonal().array() += noise2 + jitter;
        llt.compute(k);
        if (llt.info() == Eigen::Success) break;
        if (level == 1e-6)
            throw std::runtime_error(
                "gp::fit: covariance not positive definite at maximum jitter; "
                "check for duplicate inputs with zero noise");
    }
    model.jitter = jitter;
    model.alpha = llt.solve(y_std);

    const Eigen::VectorXd resid = c * model.alpha - y_std;
    model.train_rmse = model.y_scale * std::sqrt(resid.squaredNorm() / n);
    return model;
}

double GPModel::mean(const Eigen::Vector2d& x) const {
    const Eigen::Vector2d xs = standardize(x);
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double u0 = std::abs(xs[0] - train_x(i, 0)) / kernel.ell[0];
        const double u1 = std::abs(xs[1] - train_x(i, 1)) / kernel.ell[1];
        acc += alpha[i] * factor(kernel.family, u0) * factor(kernel.family, u1);
    }
    return y_shift + y_scale * kernel.sigma2 * acc;
}

double GPModel::grad(const Eigen::Vector2d& x, int dim) const {
    require(dim == 0 || dim == 1, "GPModel::grad: dim must be 0 or 1");
    const Eigen::Vector2d xs = standardize(x);
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double r0 = xs[0] - train_x(i, 0);
        const double r1 = xs[1] - train_x(i, 1);
        const double k = kernel.sigma2 * factor(kernel.family, std::abs(r0) / kernel.ell[0]) *
                         factor(kernel.family, std::abs(r1) / kernel.ell[1]);
        const double r = dim == 0 ? r0 : r1;
        acc += alpha[i] * k * grad_ratio(kernel.family, r, kernel.ell[dim]);
    }
    return acc * y_scale / x_scale[dim];
}

Eigen::VectorXd GPModel::mean_batch(const Eigen::MatrixXd& pts) const {
    const int m = static_cast<int>(pts.rows());
    Eigen::VectorXd out(m);
    for (int p = 0; p < m; ++p) out[p] = mean(pts.row(p).transpose());
    return out;
}

double posterior_mean(const GPModel& model, const Eigen::Vector2d& x) { return model.mean(x); }

double posterior_grad(const GPModel& model, const Eigen::Vector2d& x, int dim) {
    return model.grad(x, dim);
}

namespace {

// negative log marginal likelihood and its gradient in log-hyperparameter
// space; theta = (log sigma2, log ell0, log ell1, log noise2)
struct LmlWorkspace {
    const Eigen::MatrixXd& xs;      // standardized inputs
    const Eigen::VectorXd& y;       // standardized targets
    Eigen::MatrixXd u0, u1;         // pairwise |dx| per dimension
    KernelFamily family;

    LmlWorkspace(const Eigen::MatrixXd& xs_, const Eigen::VectorXd& y_, KernelFamily fam)
        : xs(xs_), y(y_), family(fam) {
        const int n = static_cast<int>(xs.rows());
        u0.resize(n, n);
        u1.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                u0(i, j) = std::abs(xs(i, 0) - xs(j, 0));
                u1(i, j) = std::abs(xs(i, 1) - xs(j, 1));
            }
    }

    // returns false when the factorization fails (caller treats as +inf)
    bool eval(const Eigen::Vector4d& theta, double& nlml, Eigen::Vector4d* grad) const {
        const int n = static_cast<int>(xs.rows());
        const double sigma2 = std::exp(theta[0]);
        const double ell0 = std::exp(theta[1]);
        const double ell1 = std::exp(theta[2]);
        const double noise2 = std::exp(theta[3]);

        Eigen::MatrixXd c(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = sigma2 * factor(family, u0(i, j) / ell0) *
                                 factor(family, u1(i, j) / ell1);
                c(i, j) = v;
                c(j, i) = v;
            }
        Eigen::MatrixXd k = c;
        k.diagonal().array() += noise2 + 1e-12 * sigma2;

        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::VectorXd a = llt.solve(y);
        double logdet = 0.0;
        for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
        nlml = 0.5 * y.dot(a) + logdet + 0.5 * n * kLog2Pi;

        if (grad) {
            const Eigen::MatrixXd kinv =
                llt.solve(Eigen::MatrixXd::Identity(n, n));
            // dLML/dtheta_p = 0.5 tr((a a^T - K^{-1}) dK/dtheta_p)
            const Eigen::MatrixXd diff = a * a.transpose() - kinv;
            double g_sigma = 0.5 * diff.cwiseProduct(c).sum();
            double g_ell0 = 0.0, g_ell1 = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double dc = diff(i, j) * c(i, j);
                    g_ell0 += dc * ell_weight(family, u0(i, j) / ell0);
                    g_ell1 += dc * ell_weight(family, u1(i, j) / ell1);
                }
            g_ell0 *= 0.5;
            g_ell1 *= 0.5;
            const double g_noise = 0.5 * noise2 * diff.trace();
            *grad = -Eigen::Vector4d(g_sigma, g_ell0, g_ell1, g_noise);  // negated for NLML
        }
        return true;
    }
};

struct BfgsOutcome {
    Eigen::Vector4d theta;
    double nlml = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

BfgsOutcome bfgs_minimize(const LmlWorkspace& ws, Eigen::Vector4d theta,
                          const Eigen::Vector4d& lo, const Eigen::Vector4d& hi,
                          int max_iters) {
    auto clamp = [&](Eigen::Vector4d t) {
        for (int i = 0; i < 4; ++i) t[i] = std::min(std::max(t[i], lo[i]), hi[i]);
        return t;
    };
    theta = clamp(theta);

    BfgsOutcome out;
    double f;
    Eigen::Vector4d g;
    if (!ws.eval(theta, f, &g)) return out;
    out.theta = theta;
    out.nlml = f;

    Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
    for (int it = 0; it < max_iters; ++it) {
        out.iterations = it + 1;
        Eigen::Vector4d dir = -(h * g);
        if (dir.dot(g) > 0.0) dir = -g;  // reset on loss of descent

        double step = 1.0;
        double f_new = f;
        Eigen::Vector4d theta_new = theta;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            theta_new = clamp(theta + step * dir);
            double f_try;
            // Armijo on the clamped displacement, never accepting an increase
            if (ws.eval(theta_new, f_try, nullptr) && f_try <= f &&
                f_try <= f + 1e-4 * std::min(0.0, g.dot(theta_new - theta))) {
                f_new = f_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::Vector4d g_new;
        double f_check;
        if (!ws.eval(theta_new, f_check, &g_new)) break;

        const Eigen::Vector4d s = theta_new - theta;
        const Eigen::Vector4d yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            const Eigen::Matrix4d eye = Eigen::Matrix4d::Identity();
            const Eigen::Matrix4d v = eye - (s * yv.transpose()) / sy;
            h = v * h * v.transpose() + (s * s.transpose()) / sy;
        }
        theta = theta_new;
        g = g_new;
        const double delta = f - f_new;
        f = f_new;
        out.theta = theta;
        out.nlml = f;
        if (g.lpNorm<Eigen::Infinity>() < 1e-5 || delta < 1e-10 * (1.0 + std::abs(f))) break;
    }
    return out;
}

}  // namespace

MleResult mle_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                  const KernelSpec& init, double init_noise2, const MleBounds& bounds,
                  int n_restarts, int max_iters) {
    require(inputs.rows() >= 3, "gp::mle_fit: need at least three training points");
    require(inputs.cols() == 2, "gp::mle_fit: inputs must be n x 2");
    init.validate();

    const Standardization s = standardize_data(inputs, targets);
    const int n = static_cast<int>(inputs.rows());
    Eigen::MatrixXd xs(n, 2);
    for (int i = 0; i < n; ++i)
        xs.row(i) = (inputs.row(i).transpose() - s.x_shift).cwiseQuotient(s.x_scale).transpose();
    Eigen::VectorXd y = (targets.array() - s.y_shift) / s.y_scale;

    const LmlWorkspace ws(xs, y, init.family);
    const Eigen::Vector4d lo(std::log(bounds.sigma2_lo), std::log(bounds.ell_lo),
                             std::log(bounds.ell_lo), std::log(bounds.noise2_lo));
    const Eigen::Vector4d hi(std::log(bounds.sigma2_hi), std::log(bounds.ell_hi),
                             std::log(bounds.ell_hi), std::log(bounds.noise2_hi));
    auto clamp = [&](Eigen::Vector4d t) {
        for (int i = 0; i < 4; ++i) t[i] = std::min(std::max(t[i], lo[i]), hi[i]);
        return t;
    };

    const Eigen::Vector4d theta0 = clamp(Eigen::Vector4d(
        std::log(init.sigma2), std::log(init.ell[0]), std::log(init.ell[1]),
        std::log(std::max(init_noise2, bounds.noise2_lo))));

    double init_nlml = std::numeric_limits<double>::infinity();
    const bool init_ok = ws.eval(theta0, init_nlml, nullptr);

    // fixed alternative starts keep the search deterministic; the canonical
    // start guards against a poor warm start dragging the fit into a
    // degenerate basin
    std::vector<Eigen::Vector4d> starts = {theta0};
    const double l4 = std::log(4.0);
    if (n_restarts >= 1)
        starts.push_back(clamp(Eigen::Vector4d(0.0, 0.0, 0.0, std::log(1e-2))));
    if (n_restarts >= 2)
        starts.push_back(clamp(theta0 + Eigen::Vector4d(0.0, -l4, -l4, l4)));
    if (n_restarts >= 3)
        starts.push_back(clamp(Eigen::Vector4d(std::log(1e-3), 0.0, 0.0, std::log(0.25))));
    for (int r = 4; r <= n_restarts; ++r)
        starts.push_back(clamp(theta0 + Eigen::Vector4d(0.0, (r - 2) * l4, -(r - 2) * l4, 0.0)));

    BfgsOutcome best;
    int total_iters = 0;
    for (const auto& start : starts) {
        const BfgsOutcome run = bfgs_minimize(ws, start, lo, hi, max_iters);
        total_iters += run.iterations;
        if (run.nlml < best.nlml) best = run;
    }

    MleResult result;
    result.iterations = total_iters;
    if (!std::isfinite(best.nlml) || (init_ok && best.nlml > init_nlml)) {
        // nothing improved on the initialization; hand it back unchanged
        result.kernel = init;
        result.noise2 = std::max(init_noise2, bounds.noise2_lo);
        result.log_marginal = init_ok ? -init_nlml : -std::numeric_limits<double>::infinity();
        result.warning = true;
        return result;
    }
    result.kernel.family = init.family;
    result.kernel.sigma2 = std::exp(best.theta[0]);
    result.kernel.ell = {std::exp(best.theta[1]), std::exp(best.theta[2])};
    result.noise2 = std::exp(best.theta[3]);
    result.log_marginal = -best.nlml;
    result.warning = false;
    return result;
}

}  // namespace firming::gp
