#pragma once

#include "confmatch/branch.hpp"
#include "confmatch/direct_solver.hpp"
#include "confmatch/matcher.hpp"

#include <optional>
#include <vector>

namespace confmatch {

struct ContinuationOptions {
    NlsqOptions nlsq = default_direct_options();
    int max_bisections = 3;  // intermediate warm-start points inserted after a failure
};

// Sequential direct solves along an increasing h0 grid. Throws ConvergenceError if the first point fails.
Branch continue_branch(double l, const std::vector<double>& h0_grid, int M, const ContinuationOptions& opts = {},
                       std::vector<DirectSolution>* solutions = nullptr);

enum class MatchedMode { fixed_hout0, fixed_l };

// fixed_hout0: one inner and one outer solve for the whole grid, l varies with eps.
// fixed_l: h_out0 is recovered per eps so that every point has charge height l.
Branch matched_branch(MatchedMode mode, double value, const std::vector<double>& eps_grid, MatchContext& ctx);

std::optional<Fold> find_fold(const Branch& b);

Branch stability_label(const Branch& b);

}  // namespace confmatch
