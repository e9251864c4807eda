#pragma once

#include <vector>

#include <Eigen/Dense>

namespace bci {

// Linear discriminant trained by evidence maximization. The feature matrix
// carries a trailing bias column of ones; the bias weight is excluded from
// the alpha-regularized norm.
struct BldaModel {
    Eigen::VectorXd weights;  // feature weights + bias, bias last
    double alpha = 0.0;       // prior precision
    double beta = 0.0;        // noise precision
    int n_iterations = 0;
    std::vector<double> evidence_trace;  // log evidence per iteration
};

struct BldaOptions {
    double tolerance = 1e-4;  // relative change of alpha and beta
    int max_iterations = 100;
    // Frozen hyperparameters: skip the evidence updates and solve once.
    bool freeze_hyperparameters = false;
    double alpha_init = 1.0;
    double beta_init = 1.0;
    // Reweight the regression targets by class size (off by default).
    bool balance_classes = false;
};

// X: N x (D+1) with a trailing ones column; y entries are +-1.
BldaModel train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const BldaOptions& options = {});

double score(const BldaModel& model, const Eigen::VectorXd& x);

}  // namespace bci
