#pragma once

// Shared outer loop of the three iterated estimators.

#include "mar/alse.hpp"

namespace mar::detail {

// step_a(B) returns a new A given the current B; step_b(A) the reverse.
// The pair is normalized after every A-update; B absorbs the scale.
template <class StepA, class StepB>
FitTrace alternate(const MatrixSeries& series, MarCoefficients& current, double eta, int max_iter,
                   UpdateOrder order, StepA&& step_a, StepB&& step_b) {
    FitTrace trace;
    current = normalize_identification(current);
    auto update_a = [&] {
        current.A = step_a(current.B);
        current = normalize_identification(current);
        trace.objective.push_back(residual_sum_of_squares(series, current.A, current.B));
    };
    auto update_b = [&] {
        current.B = step_b(current.A);
        trace.objective.push_back(residual_sum_of_squares(series, current.A, current.B));
    };
    for (int iter = 1; iter <= max_iter; ++iter) {
        const MarCoefficients previous = current;
        if (order == UpdateOrder::a_first) {
            update_a();
            update_b();
        } else {
            update_b();
            update_a();
        }
        const double da = (current.A - previous.A).norm();
        const double db = (current.B - previous.B).norm();
        trace.delta_A.push_back(da);
        trace.delta_B.push_back(db);
        trace.iterations = iter;
        if (da <= eta && db <= eta) {
            trace.converged = true;
            break;
        }
    }
    return trace;
}

}  // namespace mar::detail
