#include "pose/svm.hpp"

#include <algorithm>
#include <cmath>

#include "pose/error.hpp"
#include "pose/rng.hpp"

namespace pose {

double svm_primal_objective(const SvmModel& m, const std::vector<std::span<const double>>& xs,
                            const std::vector<int>& ys, double C) {
    double reg = m.bias * m.bias;
    for (double v : m.w) reg += v * v;
    double hinge = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        hinge += std::max(0.0, 1.0 - ys[i] * m.score(xs[i]));
    return 0.5 * reg + C * hinge;
}

SvmModel train_linear_svm(const std::vector<std::span<const double>>& xs,
                          const std::vector<int>& ys, const SvmOptions& opt) {
    const int n = static_cast<int>(xs.size());
    if (n == 0) fail("insufficient_samples", "empty SVM training set");
    if (ys.size() != xs.size()) fail("bad_arguments", "labels and rows disagree");
    const size_t dim = xs[0].size();

    SvmModel m;
    m.w.assign(dim, 0.0);

    std::vector<double> alpha(static_cast<size_t>(n), 0.0);
    std::vector<double> qii(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double q = 1.0; // bias coordinate
        for (double v : xs[static_cast<size_t>(i)]) q += v * v;
        qii[static_cast<size_t>(i)] = q;
    }

    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    Rng rng(opt.seed);

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        m.epochs_run = epoch + 1;
        // Fisher-Yates with the stable PRNG keeps runs reproducible
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[rng.below(static_cast<std::uint64_t>(i) + 1)]);

        for (int idx : order) {
            const auto& x = xs[static_cast<size_t>(idx)];
            const int y = ys[static_cast<size_t>(idx)];
            double g = y * m.score(x) - 1.0;
            const double a_old = alpha[static_cast<size_t>(idx)];
            const double a_new =
                std::clamp(a_old - g / qii[static_cast<size_t>(idx)], 0.0, opt.C);
            const double delta = a_new - a_old;
            if (delta != 0.0) {
                alpha[static_cast<size_t>(idx)] = a_new;
                const double step = delta * y;
                for (size_t d = 0; d < dim; ++d) m.w[d] += step * x[d];
                m.bias += step;
            }
        }

        double reg = m.bias * m.bias;
        for (double v : m.w) reg += v * v;
        double hinge = 0.0;
        double alpha_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            hinge += std::max(0.0, 1.0 - ys[static_cast<size_t>(i)] * m.score(xs[static_cast<size_t>(i)]));
            alpha_sum += alpha[static_cast<size_t>(i)];
        }
        const double primal = 0.5 * reg + opt.C * hinge;
        const double dual = alpha_sum - 0.5 * reg;
        m.primal_objective = primal;
        m.duality_gap = primal - dual;
        const double tol = std::min(opt.tol_abs, opt.tol_rel * std::max(1e-8, std::abs(primal)));
        if (m.duality_gap <= tol) break;
    }
    return m;
}

} // namespace pose
