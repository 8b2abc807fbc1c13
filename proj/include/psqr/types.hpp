#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace psqr {

// A regression sample (x_i, y_i), x on [0,1].
struct Dataset {
    Eigen::VectorXd x;
    Eigen::VectorXd y;

    Dataset() = default;
    Dataset(Eigen::VectorXd xs, Eigen::VectorXd ys) : x(std::move(xs)), y(std::move(ys)) {
        if (x.size() != y.size())
            throw std::invalid_argument("Dataset: x and y must have equal length");
    }
    int size() const { return static_cast<int>(x.size()); }
};

// Numerical failure (rank-deficient normal matrix, non-SPD system).
// Distinct from precondition violations so callers such as model-selection
// sweeps can skip the offending configuration instead of aborting.
class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace psqr
