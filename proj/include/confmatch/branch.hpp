#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace confmatch {

enum class Method { direct, matched, leading };
enum class Stability { stable, unstable, unknown };

std::string to_string(Method m);
std::string to_string(Stability s);

struct BranchPoint {
    double h0 = 0.0;
    double q = 0.0;
    Stability stable = Stability::unknown;
    Method method = Method::direct;
    double residual_inf_norm = 0.0;
    bool converged = true;
    double eps = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct Fold {
    double q_star = 0.0;
    double h0_star = 0.0;
};

struct Branch {
    double l = 0.0;
    std::vector<BranchPoint> points;
    std::optional<Fold> fold;
};

}  // namespace confmatch
