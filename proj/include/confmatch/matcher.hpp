#pragma once

#include "confmatch/inner_solver.hpp"
#include "confmatch/outer_solver.hpp"

#include <map>
#include <string>
#include <vector>

namespace confmatch {

struct MatchParams {
    double epsilon = 0.0;
    double c = 0.0;  // inner vertical translation, -C_asy
    double a = 0.0;  // outer frame w = (omega - a)/(1 - a omega)
    double K = 0.0;  // (1+a)/(1-a) = K eps^eta
};

struct MatchedSolution {
    OuterSolution outer;
    InnerSolution inner;
    MatchParams match;
    double l = 0.0;
    double h0 = 0.0;

    double q() const;
};

enum class NodeSet { single, inner, outer };
std::string to_string(NodeSet s);

struct TaggedSample {
    double theta = 0.0;
    double x = 0.0;
    double h = 0.0;
    NodeSet node_set = NodeSet::single;
};

struct OverlapGap {
    double gap_in = 0.0;
    double gap_out = 0.0;
};

struct TailDip {
    double min_h = 0.0;
    double x_at = 0.0;
};

MatchParams match_params(const OuterSolution& outer, const InnerSolution& inner, double epsilon);
MatchedSolution make_matched(const OuterSolution& outer, const InnerSolution& inner, double epsilon);

// F = F_in + F_out - F_c in the inner disk variable omega, with two omega-derivatives.
Jet composite_jet(const MatchedSolution& ms, cplx omega);
cplx composite_eval(const MatchedSolution& ms, cplx omega);

// h_out0 + eps (A (1-w)/(1+w))^{1/eta}
Jet overlap_jet(const MatchedSolution& ms, cplx omega);

OverlapGap overlap_gap(const MatchedSolution& ms, double r, const std::vector<cplx>& tau_grid);

// Inner circle nodes k pi/n_inner, outer circle nodes k pi/n_outer pulled back to omega.
std::vector<TaggedSample> matched_profile(const MatchedSolution& ms, int n_inner, int n_outer);

// Full single-scale residual with q = sqrt(eps) Q on the nodes of both circles, tip nodes excluded.
std::vector<double> composite_residual(const MatchedSolution& ms, int n_inner, int n_outer);

// Minimum height over x in [x_lo, x_hi] along the outer circle.
TailDip tail_dip(const MatchedSolution& ms, double x_lo = 1.0, double x_hi = 6.0);

// Caches inner and outer solves keyed by h_out0.
class MatchContext {
public:
    double T = 0.5;
    int M_in = 32;
    int M_out = 128;
    double t = 1.0;

    const InnerSolution& inner_for(double h_out0);
    const OuterSolution& outer_for(double h_out0);

private:
    std::map<double, InnerSolution> inner_;
    std::map<double, OuterSolution> outer_;
};

struct Inversion {
    double h_out0 = 0.0;
    double epsilon = 0.0;
    int iterations = 0;
};

// Finds h_out0 with h_out0 + eps (1 + T - C_asy) = l at eps = l - h0.
Inversion invert_parameters(double l, double h0, MatchContext& ctx);

}  // namespace confmatch
