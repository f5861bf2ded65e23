#pragma once

#include "confmatch/branch.hpp"

#include <vector>

namespace confmatch {

struct OuterProfileParams {
    double h_out0 = 0.0;
    double eta = 1.0;
    double lambda = 0.0;
};

OuterProfileParams outer_profile_params(double h_out0);

// Corner parameter; outer tip angle is pi/eta.
double eta_from_height(double h_out0);

// Left side of the implicit profile relation; equals |x| on the profile, decreasing in h.
double implicit_lhs(double h, double h_out0);

// h(x) on the leading-order outer profile, x >= 0.
double outer_height_implicit(double h_out0, double x);

double tip_force(double h_out0);
double tip_force_from_eta(double eta);

double leading_q(double l, double h0);

Branch leading_branch(double l, const std::vector<double>& h0_grid);

}  // namespace confmatch
