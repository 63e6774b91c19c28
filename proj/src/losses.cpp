#include "rely/losses.hpp"

#include <algorithm>
#include <cmath>

namespace rely {

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::square: return "square";
        case LossKind::cross_entropy: return "cross_entropy";
        case LossKind::utility: return "utility";
    }
    return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "square") return LossKind::square;
    if (name == "cross_entropy") return LossKind::cross_entropy;
    if (name == "utility") return LossKind::utility;
    throw UsageError("unknown loss kind '" + name + "' (expected square, cross_entropy or utility)");
}

void LossSpec::validate() const {
    if (kind == LossKind::cross_entropy) {
        if (!(clip_epsilon > 0.0 && clip_epsilon < 0.5))
            throw UsageError("cross_entropy clip_epsilon must be in (0, 0.5)");
    }
    if (kind == LossKind::utility) {
        if (risk_p0_column.empty() || risk_p1_column.empty())
            throw UsageError("utility loss requires risk_p0 and risk_p1 column names");
        if (!(std::isfinite(lambda) && lambda >= 0.0))
            throw UsageError("utility loss lambda must be a nonnegative finite number");
    }
}

double square_loss(double y, double yhat) {
    double d = y - yhat;
    return d * d;
}

double cross_entropy_loss(double y, double p, double clip_epsilon) {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 0.5))
        throw UsageError("cross_entropy clip_epsilon must be in (0, 0.5)");
    if (!(y >= 0.0 && y <= 1.0))
        throw UsageError("cross_entropy outcome must lie in [0, 1]");
    double q = std::clamp(p, clip_epsilon, 1.0 - clip_epsilon);
    double loss = 0.0;
    if (y > 0.0) loss -= y * std::log(q);
    if (y < 1.0) loss -= (1.0 - y) * std::log(1.0 - q);
    return loss;
}

namespace {
double release_utility(double d, double p0, double p1, double lambda) {
    return -d * p0 - lambda * (1.0 - d) * p1;
}
} // namespace

double utility_loss(double y, double yhat, double p0, double p1, double lambda) {
    if (!(p0 >= 0.0 && p0 <= 1.0) || !(p1 >= 0.0 && p1 <= 1.0))
        throw UsageError("utility loss risk inputs must be probabilities in [0, 1]");
    return release_utility(y, p0, p1, lambda) - release_utility(yhat, p0, p1, lambda);
}

double loss_value(const LossSpec& spec, double y, double yhat, const LossContext& ctx) {
    switch (spec.kind) {
        case LossKind::square: return square_loss(y, yhat);
        case LossKind::cross_entropy: return cross_entropy_loss(y, yhat, spec.clip_epsilon);
        case LossKind::utility: return utility_loss(y, yhat, ctx.p0, ctx.p1, spec.lambda);
    }
    throw UsageError("unhandled loss kind");
}

} // namespace rely
