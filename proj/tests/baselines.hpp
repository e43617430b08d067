#pragma once

#include "hes1/tikhonov.hpp"

namespace hes1::testing {

/// Regression ceilings for the slow-variable distance at eps = 1e-4 (par-n3,
/// T = 100, default sweep options). Calibrated runs sit near half of these.
inline double slow_distance_baseline(Reduction r) {
    switch (r) {
    case Reduction::full_to_no_dimers: return 5e-5;
    case Reduction::full_to_with_dimers: return 3e-4;
    case Reduction::no_dimers_to_classical: return 3e-5;
    case Reduction::with_dimers_to_classical: return 1.2e-4;
    }
    return 0.0;
}

inline const std::vector<double> sweep_eps{1e-1, 1e-2, 1e-3, 1e-4};

} // namespace hes1::testing
