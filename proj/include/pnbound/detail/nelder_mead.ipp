#pragma once

#include <algorithm>
#include <numeric>

namespace pnbound {

template <class F>
SimplexResult nelder_mead(F&& f, const Eigen::VectorXd& start, double step, double x_tol,
                          int max_iterations, std::vector<Eigen::VectorXd>* best_path) {
    const Eigen::Index n = start.size();
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)](i) += step;
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

    std::vector<std::size_t> order(pts.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    };

    int it = 0;
    bool converged = false;
    for (; it < max_iterations; ++it) {
        sort_simplex();
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];
        if (best_path) best_path->push_back(pts[best]);

        double spread = 0.0;
        for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).cwiseAbs().maxCoeff());
        if (spread < x_tol) {
            converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
        const double fr = f(xr);
        if (fr < vals[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = f(xc);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = f(pts[i]);
        }
    }
    sort_simplex();
    return {pts[order.front()], vals[order.front()], it, converged};
}

} // namespace pnbound
