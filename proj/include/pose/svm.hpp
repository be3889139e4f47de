#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pose {

// Hinge-loss linear SVM solved by dual coordinate descent. The bias is an
// augmented, regularized coordinate (constant feature 1), so the objective is
//   1/2 (||w||^2 + b^2) + C sum_i max(0, 1 - y_i (w.x_i + b)).
struct SvmOptions {
    double C = 0.002;
    // stop at the tighter of the absolute and relative duality gap
    double tol_abs = 1e-3;
    double tol_rel = 1e-5;
    int max_epochs = 1000;
    std::uint64_t seed = 0;
};

struct SvmModel {
    std::vector<double> w;
    double bias = 0.0;
    double primal_objective = 0.0;
    double duality_gap = 0.0;
    int epochs_run = 0;

    double score(std::span<const double> x) const {
        double s = bias;
        for (size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
        return s;
    }
};

SvmModel train_linear_svm(const std::vector<std::span<const double>>& xs,
                          const std::vector<int>& ys, const SvmOptions& opt);

double svm_primal_objective(const SvmModel& m, const std::vector<std::span<const double>>& xs,
                            const std::vector<int>& ys, double C);

} // namespace pose
