#pragma once

#include "kylefee/model.hpp"

// Base-case market everywhere in the suite: sigma = 0.20, sigma_v = 0.30,
// T = 10, open grid ending at T - T/100.
inline kylefee::MarketParams base_params(double kappa = 0.0) {
    return kylefee::make_params(0.20, 0.30, 10.0, kappa);
}

inline kylefee::TimeGrid base_grid(std::size_t n = 1000) {
    return kylefee::make_uniform_grid(base_params(), n, 0.01);
}
