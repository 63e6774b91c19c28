#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "rely/dataset.hpp"
#include "rely/errors.hpp"
#include "rely/fit.hpp"
#include "rely/losses.hpp"
#include "rely/oracle.hpp"
#include "rely/reliance.hpp"
#include "rely/rng.hpp"
#include "rely/schema.hpp"
#include "support/brute.hpp"
#include "support/joints.hpp"

using namespace rely;

namespace {

ColumnSchema make_column(const std::string& name, ColumnKind kind, ColumnRole role,
                         std::vector<std::string> levels = {}) {
    ColumnSchema c;
    c.name = name;
    c.kind = kind;
    c.role = role;
    c.levels = std::move(levels);
    return c;
}

// The ten-row fixture whose reliance values were worked out by hand: the
// fitted least squares line is y = 2.44 + 2 x, the baseline is 3.964 / 10
// and the reliance double sum is 235.676 / 90.
Dataset toy_dataset() {
    Schema schema;
    schema.columns = {make_column("x", ColumnKind::binary, ColumnRole::covariate),
                      make_column("z", ColumnKind::real, ColumnRole::covariate),
                      make_column("y", ColumnKind::real, ColumnRole::outcome)};
    Dataset data = Dataset::empty(schema);
    data.append_row({0, 1.0, 2.1});
    data.append_row({1, 0.5, 3.9});
    data.append_row({0, 2.0, 3.2});
    data.append_row({1, 1.5, 5.1});
    data.append_row({0, 0.8, 1.7});
    data.append_row({1, 1.2, 4.4});
    data.append_row({0, 1.9, 3.0});
    data.append_row({1, 0.3, 3.5});
    data.append_row({0, 1.1, 2.2});
    data.append_row({1, 1.8, 5.3});
    return data;
}

// Mixed-kind dataset for randomized equivalence checks.
Dataset random_mixed_dataset(SeededRng& rng, std::size_t n, bool binary_outcome) {
    Schema schema;
    schema.columns = {
        make_column("y", binary_outcome ? ColumnKind::binary : ColumnKind::real,
                    ColumnRole::outcome),
        make_column("xb", ColumnKind::binary, ColumnRole::covariate),
        make_column("xc", ColumnKind::categorical, ColumnRole::covariate, {"a", "b", "c"}),
        make_column("xk", ColumnKind::count, ColumnRole::covariate),
        make_column("xr", ColumnKind::real, ColumnRole::covariate),
        make_column("p0", ColumnKind::real, ColumnRole::auxiliary),
        make_column("p1", ColumnKind::real, ColumnRole::auxiliary)};
    Dataset data = Dataset::empty(schema);
    for (std::size_t i = 0; i < n; ++i) {
        double y = binary_outcome ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : 3.0 * rng.uniform01();
        data.append_row({y, rng.bernoulli(0.4) ? 1.0 : 0.0, static_cast<double>(rng.index(3)),
                         static_cast<double>(rng.index(5)), 4.0 * rng.uniform01() - 2.0,
                         rng.uniform01(), rng.uniform01()});
    }
    return data;
}

// Assembles the straight-line reference inputs from the public estimator
// contract: the oracle reads its input columns in declared order, x1 values
// come from the donor row and everything else from the base row.
struct BruteSetup {
    ref::Table table;
    ref::Predict predict;
    ref::RowLoss row_loss;
};

BruteSetup brute_setup(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                       const Partition& part) {
    const std::vector<std::string>& cols = oracle.input_columns();
    std::vector<std::size_t> x1_slots, x2_slots, x1_cols, x2_cols;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        bool in_x1 = std::find(part.x1_columns.begin(), part.x1_columns.end(), cols[k]) !=
                     part.x1_columns.end();
        (in_x1 ? x1_slots : x2_slots).push_back(k);
        (in_x1 ? x1_cols : x2_cols).push_back(data.schema.index_of(cols[k]));
    }

    BruteSetup s;
    std::size_t n = data.n_rows();
    s.table.x1.resize(n);
    s.table.x2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c : x1_cols) s.table.x1[i].push_back(data.cell(i, c));
        for (std::size_t c : x2_cols) s.table.x2[i].push_back(data.cell(i, c));
    }

    std::size_t width = cols.size();
    const Oracle* f = &oracle;
    s.predict = [width, x1_slots, x2_slots, f](const ref::Row& a, const ref::Row& b) {
        std::vector<double> in(width);
        for (std::size_t k = 0; k < x1_slots.size(); ++k) in[x1_slots[k]] = a[k];
        for (std::size_t k = 0; k < x2_slots.size(); ++k) in[x2_slots[k]] = b[k];
        return f->predict(in);
    };

    std::vector<double> outcome = data.column(part.outcome);
    std::vector<double> p0, p1;
    if (loss.kind == LossKind::utility) {
        p0 = data.column(loss.risk_p0_column);
        p1 = data.column(loss.risk_p1_column);
    }
    s.row_loss = [loss, outcome, p0, p1](std::size_t i, double pred) {
        LossContext ctx;
        if (!p0.empty()) {
            ctx.p0 = p0[i];
            ctx.p1 = p1[i];
        }
        return loss_value(loss, outcome[i], pred, ctx);
    };
    return s;
}

void check_against_brute(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                         const Partition& part, bool finite_x1) {
    BruteSetup s = brute_setup(data, oracle, loss, part);
    double want_r = ref::reliance(s.table, s.predict, s.row_loss);
    double want_b = ref::baseline(s.table, s.predict, s.row_loss);
    double scale_r = std::max(1.0, std::abs(want_r));
    double scale_b = std::max(1.0, std::abs(want_b));

    double got_ex = reliance_exhaustive(data, oracle, loss, part);
    CHECK(std::abs(got_ex - want_r) <= 1e-12 * scale_r);
    double got_b = baseline(data, oracle, loss, part);
    CHECK(std::abs(got_b - want_b) <= 1e-12 * scale_b);

    RelianceOptions options;
    RelianceEstimate est = estimate_reliance(data, oracle, loss, part, options);
    CHECK(std::abs(est.r_hat - want_r) <= 1e-12 * scale_r);
    CHECK(std::abs(est.b_hat - want_b) <= 1e-12 * scale_b);
    CHECK(est.normalized == est.r_hat - est.b_hat);
    CHECK(est.n == data.n_rows());

    if (finite_x1) {
        CHECK(est.method == RelianceMethod::categorical);
        double got_cat = reliance_categorical(data, oracle, loss, part);
        CHECK(std::abs(got_cat - want_r) <= 1e-12 * scale_r);
    } else {
        CHECK(est.method == RelianceMethod::exhaustive);
    }
}

} // namespace

TEST_CASE("toy fixture reproduces the hand-computed reliance values") {
    Dataset data = toy_dataset();
    FittedModel model = fit_ols(data, "y", {"x"});
    CHECK(model.intercept == doctest::Approx(2.44).epsilon(1e-12));
    CHECK(model.coef[0] == doctest::Approx(2.0).epsilon(1e-12));

    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";
    LossSpec loss;
    RelianceEstimate est = estimate_reliance(data, *model.oracle(), loss, part);
    CHECK(est.b_hat == doctest::Approx(0.3964).epsilon(1e-13));
    CHECK(est.r_hat == doctest::Approx(235.676 / 90.0).epsilon(1e-13));
    CHECK(est.normalized == doctest::Approx(2.2222222222222223).epsilon(1e-12));
    CHECK(est.method == RelianceMethod::categorical);
    CHECK(est.n == 10);

    double exhaustive = reliance_exhaustive(data, *model.oracle(), loss, part);
    double categorical = reliance_categorical(data, *model.oracle(), loss, part);
    CHECK(std::abs(exhaustive - categorical) <= 1e-12 * exhaustive);
}

TEST_CASE("estimators match the straight-line double sum on random data") {
    SeededRng rng(20240817);
    for (int rep = 0; rep < 6; ++rep) {
        Dataset data = random_mixed_dataset(rng, 40 + 7 * rep, false);
        LinearOracle oracle({"xb", "xc", "xk", "xr"}, 0.4,
                            {1.5 - rng.uniform01(), 0.7, -0.9, 0.6 * rng.uniform01()});
        LossSpec loss;

        Partition finite;
        finite.x1_columns = {"xb", "xc"};
        finite.x2_columns = {"xk", "xr"};
        finite.outcome = "y";
        check_against_brute(data, oracle, loss, finite, true);

        Partition with_real;
        with_real.x1_columns = {"xr", "xb"};
        with_real.x2_columns = {"xc", "xk"};
        with_real.outcome = "y";
        check_against_brute(data, oracle, loss, with_real, false);
    }
}

TEST_CASE("estimators match the double sum under cross entropy") {
    SeededRng rng(99);
    for (int rep = 0; rep < 4; ++rep) {
        Dataset data = random_mixed_dataset(rng, 35, true);
        LogisticOracle oracle({"xb", "xc", "xr"}, -0.2, {0.8, -0.5, 1.1});
        LossSpec loss;
        loss.kind = LossKind::cross_entropy;
        Partition part;
        part.x1_columns = {"xb", "xc"};
        part.x2_columns = {"xr"};
        part.outcome = "y";
        check_against_brute(data, oracle, loss, part, true);
    }
}

TEST_CASE("estimators match the double sum under the utility loss") {
    SeededRng rng(7);
    Dataset data = random_mixed_dataset(rng, 45, true);
    LinearOracle oracle({"xb", "xk", "xr"}, 0.3, {0.4, 0.1, -0.2});
    LossSpec loss;
    loss.kind = LossKind::utility;
    loss.lambda = 2.5;
    loss.risk_p0_column = "p0";
    loss.risk_p1_column = "p1";
    Partition part;
    part.x1_columns = {"xb", "xk"};
    part.x2_columns = {"xr", "p0", "p1"};
    part.outcome = "y";
    check_against_brute(data, oracle, loss, part, true);

    // The utility loss is antisymmetric, so the normalized value can be
    // negative; nothing in the estimator should forbid that.
    RelianceEstimate est = estimate_reliance(data, oracle, loss, part);
    CHECK(std::isfinite(est.normalized));
}

TEST_CASE("categorical evaluates n * |C| times, exhaustive n * (n - 1)") {
    Schema schema;
    schema.columns = {make_column("y", ColumnKind::real, ColumnRole::outcome),
                      make_column("x", ColumnKind::count, ColumnRole::covariate),
                      make_column("z", ColumnKind::real, ColumnRole::covariate)};
    Dataset data = Dataset::empty(schema);
    // Level 2 appears exactly once: its donor weight for its own row is
    // zero, yet the estimator still evaluates it, keeping the count at
    // exactly n * |C|.
    std::vector<double> xs = {0, 0, 1, 1, 1, 2, 0};
    for (std::size_t i = 0; i < xs.size(); ++i)
        data.append_row({0.5 * static_cast<double>(i), xs[i], static_cast<double>(i)});

    LinearOracle inner({"x", "z"}, 0.0, {1.0, 0.25});
    Partition part;
    part.x1_columns = {"x"};
    part.x2_columns = {"z"};
    part.outcome = "y";
    LossSpec loss;

    CountingOracle counting(inner);
    double cat = reliance_categorical(data, counting, loss, part);
    CHECK(counting.count() == 7 * 3);

    counting.reset();
    double ex = reliance_exhaustive(data, counting, loss, part);
    CHECK(counting.count() == 7 * 6);
    CHECK(std::abs(cat - ex) <= 1e-12 * std::max(1.0, std::abs(ex)));

    counting.reset();
    baseline(data, counting, loss, part);
    CHECK(counting.count() == 7);
}

TEST_CASE("results are bit-identical across thread counts") {
    SeededRng rng(1234);
    Dataset data = random_mixed_dataset(rng, 150, false);
    LinearOracle oracle({"xb", "xc", "xk", "xr"}, 0.1, {0.3, -0.7, 0.2, 0.9});
    LossSpec loss;

    Partition finite;
    finite.x1_columns = {"xc", "xk"};
    finite.x2_columns = {"xb", "xr"};
    finite.outcome = "y";
    Partition real_x1;
    real_x1.x1_columns = {"xr"};
    real_x1.x2_columns = {"xb", "xc", "xk"};
    real_x1.outcome = "y";

    double cat1 = reliance_categorical(data, oracle, loss, finite, 1);
    double ex1 = reliance_exhaustive(data, oracle, loss, real_x1, 1);
    for (std::size_t threads : {2u, 4u, 7u}) {
        CHECK(reliance_categorical(data, oracle, loss, finite, threads) == cat1);
        CHECK(reliance_exhaustive(data, oracle, loss, real_x1, threads) == ex1);
    }
}

TEST_CASE("method selection and validation") {
    Dataset data = toy_dataset();
    FittedModel model = fit_ols(data, "y", {"x", "z"});
    LossSpec loss;

    Partition real_x1;
    real_x1.x1_columns = {"z"};
    real_x1.x2_columns = {"x"};
    real_x1.outcome = "y";
    RelianceEstimate est = estimate_reliance(data, *model.oracle(), loss, real_x1);
    CHECK(est.method == RelianceMethod::exhaustive);

    RelianceOptions force_cat;
    force_cat.method = RelianceMethod::categorical;
    CHECK_THROWS_AS(estimate_reliance(data, *model.oracle(), loss, real_x1, force_cat),
                    UsageError);

    Partition empty_x1;
    empty_x1.outcome = "y";
    CHECK_THROWS_AS(estimate_reliance(data, *model.oracle(), loss, empty_x1), UsageError);

    Partition overlap;
    overlap.x1_columns = {"x"};
    overlap.x2_columns = {"x"};
    overlap.outcome = "y";
    CHECK_THROWS_AS(estimate_reliance(data, *model.oracle(), loss, overlap), UsageError);

    // One row cannot form a donor pair.
    Dataset tiny = gather_rows(data, {0});
    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";
    CHECK_THROWS_AS(reliance_exhaustive(tiny, *model.oracle(), loss, part), UsageError);

    CHECK(reliance_method_from_name("categorical") == RelianceMethod::categorical);
    CHECK(reliance_method_name(RelianceMethod::automatic) == "automatic");
    CHECK_THROWS_AS(reliance_method_from_name("fast"), UsageError);
}

TEST_CASE("oracle inputs outside the partition are rejected") {
    Dataset data = toy_dataset();
    LinearOracle oracle({"x", "z"}, 0.0, {1.0, 1.0});
    LossSpec loss;
    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";  // oracle also reads z, which the partition omits
    CHECK_THROWS_WITH_AS(reliance_exhaustive(data, oracle, loss, part),
                         doctest::Contains("z"), UsageError);
}

TEST_CASE("non-finite predictions and losses raise numeric errors") {
    Dataset data = toy_dataset();
    LossSpec loss;
    Partition part;
    part.x1_columns = {"x"};
    part.x2_columns = {"z"};
    part.outcome = "y";

    FunctionOracle bad({"x", "z"}, [](std::span<const double> in) {
        return in[1] > 1.6 ? std::numeric_limits<double>::infinity() : in[0];
    });
    CHECK_THROWS_AS(reliance_exhaustive(data, bad, loss, part), NumericError);
    CHECK_THROWS_AS(baseline(data, bad, loss, part), NumericError);
}

TEST_CASE("worst case reliance picks the level with the largest mean loss") {
    Schema schema;
    schema.columns = {make_column("y", ColumnKind::real, ColumnRole::outcome),
                      make_column("x", ColumnKind::binary, ColumnRole::covariate)};
    Dataset data = Dataset::empty(schema);
    data.append_row({0.0, 0});
    data.append_row({1.0, 0});
    data.append_row({5.0, 1});
    data.append_row({5.0, 1});

    LinearOracle oracle({"x"}, 0.0, {1.0});
    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";
    LossSpec loss;
    WorstCaseReliance worst = worst_case_reliance(data, oracle, loss, part);
    // Level 0 predicts 0 for everyone: (0 + 1 + 25 + 25) / 4 = 12.75.
    // Level 1 predicts 1: (1 + 0 + 16 + 16) / 4 = 8.25.
    CHECK(worst.r_sup == doctest::Approx(12.75).epsilon(1e-14));
    CHECK(worst.level == std::vector<double>{0.0});
    CHECK(worst.level_label == "x=0");

    // Ties keep the earliest level in tuple order.
    Dataset tie = Dataset::empty(schema);
    tie.append_row({-1.0, 0});
    tie.append_row({1.0, 1});
    LinearOracle flat({"x"}, 0.0, {0.0});
    WorstCaseReliance tied = worst_case_reliance(tie, flat, loss, part);
    CHECK(tied.level == std::vector<double>{0.0});

    // Real-kind x1 has no finite support to enumerate.
    Partition bad;
    bad.x1_columns = {"z"};
    bad.outcome = "y";
    Dataset toy = toy_dataset();
    CHECK_THROWS_AS(worst_case_reliance(toy, flat, loss, bad), UsageError);
}

TEST_CASE("conditional reliance splices within exact x2 groups") {
    Schema schema;
    schema.columns = {make_column("y", ColumnKind::real, ColumnRole::outcome),
                      make_column("x", ColumnKind::count, ColumnRole::covariate),
                      make_column("g", ColumnKind::count, ColumnRole::covariate)};
    Dataset data = Dataset::empty(schema);
    data.append_row({0.0, 1, 0});
    data.append_row({0.0, 2, 0});
    data.append_row({0.0, 3, 1});
    data.append_row({0.0, 5, 1});
    data.append_row({0.0, 7, 2});

    LinearOracle oracle({"x"}, 0.0, {1.0});
    Partition part;
    part.x1_columns = {"x"};
    part.x2_columns = {"g"};
    part.outcome = "y";
    LossSpec loss;
    ConditionalReliance cond = conditional_reliance(data, oracle, loss, part);
    // Group g=0 swaps 1 and 2, group g=1 swaps 3 and 5, the g=2 row has no
    // donor: (4 + 1 + 25 + 9) / 4.
    CHECK(cond.r_cond == doctest::Approx(9.75).epsilon(1e-14));
    CHECK(cond.rows_retained == 4);
    CHECK(cond.rows_dropped == 1);
    CHECK(cond.groups_retained == 2);
    CHECK(cond.groups_dropped == 1);

    // Every group a singleton: nothing to splice.
    Dataset singletons = gather_rows(data, {0, 2, 4});
    CHECK_THROWS_AS(conditional_reliance(singletons, oracle, loss, part), DataError);
}

TEST_CASE("conditional reliance with empty x2 equals the exhaustive estimate") {
    // With no x2 columns, the conditional law of x1 given x2 is the
    // marginal, so both estimators target the same quantity.
    Dataset data = toy_dataset();
    FittedModel model = fit_ols(data, "y", {"x"});
    LossSpec loss;
    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";
    ConditionalReliance cond = conditional_reliance(data, *model.oracle(), loss, part);
    double ex = reliance_exhaustive(data, *model.oracle(), loss, part);
    CHECK(cond.r_cond == doctest::Approx(ex).epsilon(1e-13));
    CHECK(cond.rows_retained == 10);
    CHECK(cond.groups_retained == 1);
}

TEST_CASE("reliance bounds reproduce the two-row hand example") {
    Schema schema;
    schema.columns = {make_column("y", ColumnKind::binary, ColumnRole::outcome),
                      make_column("x", ColumnKind::binary, ColumnRole::covariate)};
    Dataset data = Dataset::empty(schema);
    data.append_row({0, 0});
    data.append_row({1, 1});

    auto lo = std::make_shared<FunctionOracle>(
        std::vector<std::string>{"x"}, [](std::span<const double>) { return 0.2; },
        OutputRange::probability());
    auto hi = std::make_shared<FunctionOracle>(
        std::vector<std::string>{"x"}, [](std::span<const double>) { return 0.6; },
        OutputRange::probability());
    BoundedOracle envelope{lo, hi};

    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";
    LossSpec loss;
    RelianceInterval interval = reliance_bounds(data, envelope, loss, part);
    // Base y=0: losses 0.04 and 0.36. Base y=1: losses 0.64 and 0.16.
    // Per-pair minima average to 0.10, maxima to 0.50.
    CHECK(interval.r_min == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(interval.r_max == doctest::Approx(0.50).epsilon(1e-14));
}

TEST_CASE("reliance bounds contain every oracle inside the envelope") {
    SeededRng rng(31);
    Dataset data = random_mixed_dataset(rng, 40, true);
    auto f1 = std::make_shared<LogisticOracle>(std::vector<std::string>{"xb", "xr"}, 0.2,
                                               std::vector<double>{0.9, -1.3});
    BoundedOracle envelope = bound_oracle(f1, 0.75);
    Partition part;
    part.x1_columns = {"xb"};
    part.x2_columns = {"xr"};
    part.outcome = "y";

    for (LossKind kind : {LossKind::square, LossKind::cross_entropy}) {
        LossSpec loss;
        loss.kind = kind;
        RelianceInterval interval = reliance_bounds(data, envelope, loss, part);
        CHECK(interval.r_min <= interval.r_max);
        for (double t : {0.0, 0.25, 0.8, 1.0}) {
            AffineOracle inside(f1, 0.75, 0.25 * t);
            double r = reliance_exhaustive(data, inside, loss, part);
            CHECK(r >= interval.r_min - 1e-12);
            CHECK(r <= interval.r_max + 1e-12);
        }
    }
}

TEST_CASE("reliance bounds validate their requirements") {
    Dataset toy = toy_dataset();  // real outcome with non 0/1 values
    auto lo = std::make_shared<FunctionOracle>(
        std::vector<std::string>{"x"}, [](std::span<const double>) { return 0.2; });
    auto hi = std::make_shared<FunctionOracle>(
        std::vector<std::string>{"x"}, [](std::span<const double>) { return 0.6; });
    Partition part;
    part.x1_columns = {"x"};
    part.outcome = "y";
    LossSpec loss;
    CHECK_THROWS_AS(reliance_bounds(toy, BoundedOracle{lo, hi}, loss, part), UsageError);

    Schema schema;
    schema.columns = {make_column("y", ColumnKind::binary, ColumnRole::outcome),
                      make_column("x", ColumnKind::binary, ColumnRole::covariate)};
    Dataset data = Dataset::empty(schema);
    data.append_row({0, 0});
    data.append_row({1, 1});

    CHECK_THROWS_AS(reliance_bounds(data, BoundedOracle{lo, nullptr}, loss, part), UsageError);

    LossSpec util;
    util.kind = LossKind::utility;
    util.risk_p0_column = "x";
    util.risk_p1_column = "x";
    CHECK_THROWS_AS(reliance_bounds(data, BoundedOracle{lo, hi}, util, part), UsageError);

    // Inverted envelope: f_min above f_max.
    CHECK_THROWS_AS(reliance_bounds(data, BoundedOracle{hi, lo}, loss, part), NumericError);
}

TEST_CASE("census datasets tie the estimators to exact enumeration") {
    SeededRng rng(5151);
    for (int rep = 0; rep < 3; ++rep) {
        ref::Census census = ref::random_census(rng, 3, 3, 2);
        const ref::Joint& joint = census.joint;
        FunctionOracle oracle({"x1", "x2"}, [&joint](std::span<const double> in) {
            return joint.oracle(static_cast<std::size_t>(in[0]),
                                static_cast<std::size_t>(in[1]));
        });
        Partition part;
        part.x1_columns = {"x1"};
        part.x2_columns = {"x2"};
        part.outcome = "y";
        LossSpec loss;
        auto square = [](double y, double pred) {
            return (y - pred) * (y - pred);
        };

        RelianceEstimate est = estimate_reliance(census.data, oracle, loss, part);
        double want_b = joint.baseline(square);
        CHECK(std::abs(est.b_hat - want_b) <= 1e-12 * std::max(1.0, std::abs(want_b)));

        // The pair sum excludes the diagonal, so the population value under
        // the empirical product measure is ((n - 1) r + b) / n.
        double n = static_cast<double>(census.n);
        double recovered = ((n - 1.0) * est.r_hat + est.b_hat) / n;
        double want_r = joint.reliance(square);
        CHECK(std::abs(recovered - want_r) <= 1e-10 * std::max(1.0, std::abs(want_r)));
    }
}
