// Loss functions for scoring oracle predictions against observed decisions.
//
// Three families are supported:
//   square        (y - yhat)^2
//   cross_entropy -[y ln p' + (1-y) ln(1-p')], p' clamped to [eps, 1-eps]
//   utility       u(y; x) - u(yhat; x) for the release utility
//                 u(d; x) = -d P(S=0|x) - lambda (1-d) P(S=1|x),
//                 where the per-row risk probabilities come from data columns.
//
// The utility loss is antisymmetric in (y, yhat) and can be negative; it
// accepts fractional decisions. The other two are nonnegative.
#pragma once

#include <string>

#include "rely/errors.hpp"

namespace rely {

enum class LossKind { square, cross_entropy, utility };

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

struct LossSpec {
    LossKind kind = LossKind::square;
    // cross_entropy: probability clamp, must be in (0, 0.5).
    double clip_epsilon = 1e-12;
    // utility: weight on withheld-but-safe outcomes, and the names of the
    // dataset columns holding P(S=0|x) and P(S=1|x) per row.
    double lambda = 1.0;
    std::string risk_p0_column;
    std::string risk_p1_column;

    void validate() const;
};

// Per-row context needed by context-dependent losses. For the utility loss
// this is the risk pair of the row whose outcome is being scored.
struct LossContext {
    double p0 = 0.0;
    double p1 = 0.0;
};

double square_loss(double y, double yhat);
double cross_entropy_loss(double y, double p, double clip_epsilon = 1e-12);
double utility_loss(double y, double yhat, double p0, double p1, double lambda);

double loss_value(const LossSpec& spec, double y, double yhat, const LossContext& ctx = {});

} // namespace rely
