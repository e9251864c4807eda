#include "bci/blda.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace bci {

namespace {

constexpr double kPrecisionFloor = 1e-12;
constexpr double kPrecisionCeil = 1e12;

double clamp_precision(double v) {
    return std::min(std::max(v, kPrecisionFloor), kPrecisionCeil);
}

}  // namespace

BldaModel train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const BldaOptions& options) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2 || d < 2) throw std::invalid_argument("training set too small");
    if (y.size() != n) throw std::invalid_argument("label count mismatch");
    if ((X.col(d - 1).array() != 1.0).any()) {
        throw std::invalid_argument("last feature column must be the bias (ones)");
    }

    Eigen::Index n_pos = 0, n_neg = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i] > 0) {
            ++n_pos;
        } else if (y[i] < 0) {
            ++n_neg;
        } else {
            throw std::invalid_argument("labels must be +-1");
        }
    }
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("both classes must be present");
    }

    Eigen::VectorXd t = y;
    if (options.balance_classes) {
        const double wp = static_cast<double>(n) / (2.0 * n_pos);
        const double wn = static_cast<double>(n) / (2.0 * n_neg);
        for (Eigen::Index i = 0; i < n; ++i) t[i] = y[i] > 0 ? wp : -wn;
    }

    const Eigen::Index d_reg = d - 1;  // bias is not regularized
    const Eigen::MatrixXd gram = X.transpose() * X;
    const Eigen::VectorXd xty = X.transpose() * t;

    // Eigenvalues of the regularized Gram block, computed once; the effective
    // number of parameters gamma then costs O(d) per iteration.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        gram.topLeftCorner(d_reg, d_reg), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition of the Gram matrix failed");
    }
    const Eigen::VectorXd mu = eig.eigenvalues().cwiseMax(0.0);

    BldaModel model;
    double alpha = options.alpha_init;
    double beta = options.beta_init;
    if (alpha <= 0.0 || beta <= 0.0) {
        throw std::invalid_argument("hyperparameter inits must be positive");
    }

    Eigen::MatrixXd a(d, d);
    double prev_evidence = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        a = beta * gram;
        a.diagonal().head(d_reg).array() += alpha;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
            throw std::runtime_error(
                "degenerate training data: posterior precision not positive "
                "definite");
        }
        const Eigen::VectorXd w = ldlt.solve(beta * xty);
        if (!w.allFinite()) {
            throw std::runtime_error("degenerate training data: weights diverged");
        }
        const double resid = (t - X * w).squaredNorm();
        const double w_reg2 = w.head(d_reg).squaredNorm();
        const double log_det_a = ldlt.vectorD().array().log().sum();

        double gamma = 0.0;
        for (Eigen::Index i = 0; i < d_reg; ++i) {
            const double lambda = beta * mu[i];
            gamma += lambda / (lambda + alpha);
        }

        const double evidence =
            0.5 * (d_reg * std::log(alpha) + n * std::log(beta) -
                   beta * resid - alpha * w_reg2 - log_det_a -
                   n * std::log(2.0 * std::numbers::pi));
        // The fixed-point updates can overshoot near the optimum; keep the
        // previous iterate if the evidence would drop.
        if (evidence < prev_evidence) break;
        prev_evidence = evidence;
        model.evidence_trace.push_back(evidence);
        model.weights = w;
        model.alpha = alpha;
        model.beta = beta;
        model.n_iterations = iter + 1;

        if (options.freeze_hyperparameters) break;

        if (w_reg2 <= 0.0 || resid <= 0.0 || gamma >= static_cast<double>(n)) {
            throw std::runtime_error(
                "degenerate training data: hyperparameter update undefined");
        }
        const double alpha_next = clamp_precision(gamma / w_reg2);
        const double beta_next = clamp_precision((n - gamma) / resid);
        const bool converged =
            std::abs(alpha_next - alpha) < options.tolerance * std::abs(alpha) &&
            std::abs(beta_next - beta) < options.tolerance * std::abs(beta);
        alpha = alpha_next;
        beta = beta_next;
        if (converged) break;
    }
    return model;
}

double score(const BldaModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.weights.size()) {
        throw std::invalid_argument("feature dimension mismatch");
    }
    return model.weights.dot(x);
}

}  // namespace bci
