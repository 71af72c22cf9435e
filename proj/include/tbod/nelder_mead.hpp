#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace tbod {

struct NelderMeadOptions {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::size_t max_evals = 500;
    /// Initial simplex edge as a fraction of each box width.
    double initial_step = 0.25;
    /// A simplex whose f-spread and width both fall below these is restarted
    /// around its best vertex.
    double f_tol = 1e-10;
    double x_tol = 1e-7;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = 0.0;
    std::size_t evals = 0;
    std::size_t restarts = 0;
    /// Best value after the initial point and after every iteration.
    std::vector<double> trace;
};

/// Box-constrained Nelder-Mead. Trial points are projected onto the box, the
/// start point is always evaluated first, and the search restarts from the
/// incumbent until the evaluation budget runs out.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts);

}  // namespace tbod
