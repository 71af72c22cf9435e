#include "tbod/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

struct Vertex {
    Eigen::VectorXd x;
    double f;
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts) {
    const Eigen::Index n = x0.size();
    if (n == 0 || opts.lower.size() != n || opts.upper.size() != n) {
        throw InvalidConfig("optimizer bounds must match the parameter dimension");
    }
    if ((opts.upper.array() < opts.lower.array()).any()) {
        throw InvalidConfig("optimizer lower bound exceeds upper bound");
    }
    if (opts.max_evals < 1) {
        throw InvalidConfig("optimizer budget must be at least 1");
    }

    NelderMeadResult out;
    auto project = [&](const Eigen::VectorXd& x) { return x.cwiseMax(opts.lower).cwiseMin(opts.upper); };
    auto eval = [&](const Eigen::VectorXd& x) {
        const double v = f(x);
        ++out.evals;
        const double fv = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
        if (fv < out.f) {
            out.f = fv;
            out.x = x;
        }
        return fv;
    };
    auto budget_left = [&] { return out.evals < opts.max_evals; };

    out.x = project(x0);
    out.f = std::numeric_limits<double>::infinity();
    eval(out.x);
    out.trace.push_back(out.f);

    const Eigen::VectorXd width = opts.upper - opts.lower;
    double step_scale = opts.initial_step;

    while (budget_left()) {
        // Fresh simplex around the incumbent.
        std::vector<Vertex> simplex;
        simplex.push_back({out.x, out.f});
        for (Eigen::Index i = 0; i < n && budget_left(); ++i) {
            Eigen::VectorXd x = out.x;
            const double step = step_scale * width[i];
            x[i] = (x[i] + step <= opts.upper[i]) ? x[i] + step : x[i] - step;
            x = project(x);
            simplex.push_back({x, eval(x)});
        }
        if (static_cast<Eigen::Index>(simplex.size()) < n + 1) {
            break;
        }

        while (budget_left()) {
            std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            double spread = simplex.back().f - simplex.front().f;
            double size = 0.0;
            for (const auto& v : simplex) {
                size = std::max(size, (v.x - simplex.front().x).cwiseAbs().maxCoeff());
            }
            if ((std::isfinite(spread) && spread <= opts.f_tol) || size <= opts.x_tol) {
                break;
            }

            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
            for (std::size_t i = 0; i + 1 < simplex.size(); ++i) {
                centroid += simplex[i].x;
            }
            centroid /= static_cast<double>(n);
            Vertex& worst = simplex.back();

            const Eigen::VectorXd xr = project(centroid + (centroid - worst.x));
            const double fr = eval(xr);
            if (fr < simplex.front().f) {
                if (!budget_left()) {
                    worst = {xr, fr};
                } else {
                    const Eigen::VectorXd xe = project(centroid + 2.0 * (centroid - worst.x));
                    const double fe = eval(xe);
                    worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
                }
            } else if (fr < simplex[simplex.size() - 2].f) {
                worst = {xr, fr};
            } else {
                if (!budget_left()) {
                    out.trace.push_back(out.f);
                    break;
                }
                const bool outside = fr < worst.f;
                const Eigen::VectorXd xc =
                    outside ? project(centroid + 0.5 * (xr - centroid)) : project(centroid + 0.5 * (worst.x - centroid));
                const double fc = eval(xc);
                if (fc < std::min(fr, worst.f)) {
                    worst = {xc, fc};
                } else {
                    for (std::size_t i = 1; i < simplex.size() && budget_left(); ++i) {
                        simplex[i].x = simplex.front().x + 0.5 * (simplex[i].x - simplex.front().x);
                        simplex[i].f = eval(simplex[i].x);
                    }
                }
            }
            out.trace.push_back(out.f);
        }
        if (budget_left()) {
            ++out.restarts;
            step_scale = std::max(step_scale * 0.5, 1e-3);
        }
    }
    return out;
}

}  // namespace tbod
