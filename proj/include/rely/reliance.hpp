// Reliance estimators: how much does a decision-maker's output depend on a
// chosen covariate set?
//
// Reliance r is the expected loss after the audited covariates x1 are
// replaced by an independent draw from their own marginal before querying
// the oracle; the baseline b is the expected loss with nothing replaced.
// The normalized value r - b is the excess loss caused by severing the
// dependence, and is the statistic used to compare decision-makers.
//
// Two estimators compute the same double sum over ordered row pairs (i, j),
// i != j, splicing x1 from row j into row i:
//   exhaustive   every pair, n(n-1) oracle evaluations
//   categorical  groups donor rows by their distinct observed x1 tuple,
//                n * |C| oracle evaluations
// Their results agree exactly up to floating-point summation order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rely/dataset.hpp"
#include "rely/fit.hpp"
#include "rely/losses.hpp"
#include "rely/oracle.hpp"

namespace rely {

enum class RelianceMethod { automatic, exhaustive, categorical };

std::string reliance_method_name(RelianceMethod method);
RelianceMethod reliance_method_from_name(const std::string& name);

struct RelianceOptions {
    RelianceMethod method = RelianceMethod::automatic;
    // Worker threads for the pair loops.  0 picks the hardware count.  The
    // reduction is a fixed-order blocked sum, so results are bit-identical
    // for every thread count.
    std::size_t threads = 1;
};

struct RelianceEstimate {
    double r_hat = 0.0;
    double b_hat = 0.0;
    double normalized = 0.0;  // r_hat - b_hat
    std::size_t n = 0;
    std::vector<std::string> x1_columns;
    LossSpec loss;
    RelianceMethod method = RelianceMethod::exhaustive;  // method actually used
};

// r estimate only.  The spliced prediction for pair (i, j) feeds x1 values
// from row j and everything else from row i.
double reliance_exhaustive(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                           const Partition& partition, std::size_t threads = 1);

// Same estimand, grouping donors by distinct observed x1 tuple.  Requires
// every x1 column to have finite declared support (binary, categorical or
// count kind).
double reliance_categorical(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                            const Partition& partition, std::size_t threads = 1);

// b estimate: mean loss with no splicing.
double baseline(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                const Partition& partition);

// r, b and their difference in one call.  The automatic method picks
// categorical when every x1 column has finite support.
RelianceEstimate estimate_reliance(const Dataset& data, const Oracle& oracle,
                                   const LossSpec& loss, const Partition& partition,
                                   const RelianceOptions& options = {});

struct RelianceInterval {
    double r_min = 0.0;
    double r_max = 0.0;
};

// Conservative reliance bounds when the oracle is only known to lie inside
// the envelope [f_min, f_max] pointwise.  Each spliced pair contributes the
// smaller (for r_min) or larger (for r_max) of its two envelope losses, so
// any oracle inside the envelope has its r estimate inside the interval.
// Requires a 0/1 outcome and square or cross-entropy loss.
RelianceInterval reliance_bounds(const Dataset& data, const BoundedOracle& envelope,
                                 const LossSpec& loss, const Partition& partition,
                                 const RelianceOptions& options = {});

struct WorstCaseReliance {
    double r_sup = 0.0;
    std::vector<double> level;  // maximizing x1 tuple, stored representation
    std::string level_label;    // rendered "col=value" list
};

// Largest mean loss over the observed x1 levels: max over c of
// (1/n) sum_i L(y_i, f(c, x2_i)).  Ties keep the earliest level in tuple
// order.  Requires finite-support x1 columns.
WorstCaseReliance worst_case_reliance(const Dataset& data, const Oracle& oracle,
                                      const LossSpec& loss, const Partition& partition,
                                      const RelianceOptions& options = {});

struct ConditionalReliance {
    double r_cond = 0.0;
    std::size_t rows_retained = 0;
    std::size_t rows_dropped = 0;    // rows in singleton x2 groups
    std::size_t groups_retained = 0;
    std::size_t groups_dropped = 0;
};

// Splices x1 only between rows sharing the exact x2 tuple, so the donor draw
// follows the conditional law of x1 given x2 instead of the marginal.  Rows
// whose x2 tuple appears once have no donors and are dropped and counted.
// Every retained row contributes equally: the estimate is the mean over
// retained rows of each row's within-group donor average.  Requires
// finite-support x2 columns.
ConditionalReliance conditional_reliance(const Dataset& data, const Oracle& oracle,
                                         const LossSpec& loss, const Partition& partition);

struct BootstrapOptions {
    std::size_t B = 1000;
    std::uint64_t seed = 0;
    // refit=true re-estimates the oracle on every resample via the fitter
    // below; refit=false holds the supplied oracle fixed (conditional
    // inference on the fitted model).
    bool refit = false;
    const FitterSpec* fitter = nullptr;  // required when refit
    double alpha = 0.05;                 // interval mass outside is alpha
    RelianceOptions estimate;
};

struct BootstrapResult {
    RelianceEstimate point;                // estimate on the original data
    RelianceInterval r_interval;           // percentile interval for r
    RelianceInterval normalized_interval;  // basic interval for r - b
    std::size_t B = 0;
    std::size_t redraws = 0;  // degenerate resamples redrawn
};

// Nonparametric row bootstrap.  The r interval is the percentile interval of
// the resampled r values; the r - b interval is the basic (reverse
// percentile) interval, which keeps near-nominal coverage for that
// nonnegatively biased statistic.  Deterministic given the seed.  Resamples
// with fewer than 2 distinct rows, or whose refit fails, are redrawn and
// counted.
BootstrapResult bootstrap_reliance(const Dataset& data, const Oracle* oracle,
                                   const LossSpec& loss, const Partition& partition,
                                   const BootstrapOptions& options);

struct ParityResult {
    double statistic = 0.0;  // r_hat - b_hat on the full data
    double p_value = 1.0;
    double null_scale = 0.0;  // bootstrap estimate of E[statistic] under parity
    std::size_t dof = 0;      // x1 columns in the fitted model
    std::size_t B = 0;
    std::size_t redraws = 0;
};

// One-sided test of conditional statistical parity (r = b, no excess loss
// from splicing) against r > b, under square loss with a refitted oracle.
//
// The statistic r_hat - b_hat is a nonnegative quadratic form under the
// null, so a translation bootstrap would be badly miscalibrated.  Instead
// the refitting bootstrap estimates the statistic's null mean as
// mean(resampled statistics) - statistic, and the p-value comes from the
// chi-square reference P(chisq_d >= d * statistic / mean), d = number of x1
// columns in the model.  Requires B >= 100 and n >= 20.
ParityResult parity_test(const Dataset& data, const FitterSpec& fitter, const LossSpec& loss,
                         const Partition& partition, std::size_t B, std::uint64_t seed,
                         const RelianceOptions& estimate = {});

// One decision-maker entering a cross-group ranking.
struct GroupInput {
    std::string id;
    const Dataset* data = nullptr;
    std::shared_ptr<const Oracle> oracle;
};

struct RankOptions {
    // Checks the stacked cross-distribution identity: the reliance of group
    // k inside the stacked joint equals r_k + sum of the other groups'
    // baselines.  Computed literally as a pair loop over aligned super-rows.
    bool validate_stacked = false;
    std::uint64_t seed = 0;  // alignment resampling when group sizes differ
    RelianceOptions estimate;
};

struct RankEntry {
    std::string group;
    std::size_t n = 0;
    // Indexed like RankingReport::covariate_sets; failed sets hold NaN and a
    // nonempty error string.
    std::vector<double> r_hat;
    std::vector<double> b_hat;
    std::vector<double> normalized;
    std::vector<std::string> errors;

    bool ok(std::size_t set) const { return errors.at(set).empty(); }
};

struct StackedValidation {
    bool performed = false;
    bool resampled = false;    // group sizes differed, alignment resampled
    std::size_t aligned_n = 0; // rows per group in the aligned stack
    double max_abs_gap = 0.0;  // worst |stacked r - (r_k + sum b_others)|
    bool orderings_match = true;
};

struct RankingReport {
    std::vector<std::vector<std::string>> covariate_sets;
    std::vector<std::string> set_labels;
    std::vector<RankEntry> entries;  // one per group, input order
    // Per covariate set: group ids sorted by normalized reliance descending,
    // ties broken by id; groups that failed that set are omitted.
    std::vector<std::vector<std::string>> orderings;
    StackedValidation validation;
};

// Ranks decision-makers by normalized reliance for each covariate set.  A
// group's partition for a set takes x1 = the set and x2 = the oracle's other
// input columns.  Per-group failures are recorded in the entry and the group
// is left out of the affected orderings; other groups proceed.
RankingReport rank_reliance(const std::vector<GroupInput>& groups, const LossSpec& loss,
                            const std::vector<std::vector<std::string>>& covariate_sets,
                            const RankOptions& options = {});

} // namespace rely
