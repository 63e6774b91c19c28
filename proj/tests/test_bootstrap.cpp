#include <cmath>
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

using namespace rely;

namespace {

ColumnSchema make_column(const std::string& name, ColumnKind kind, ColumnRole role) {
    ColumnSchema c;
    c.name = name;
    c.kind = kind;
    c.role = role;
    return c;
}

Schema xzy_schema() {
    Schema schema;
    schema.columns = {make_column("x", ColumnKind::binary, ColumnRole::covariate),
                      make_column("z", ColumnKind::real, ColumnRole::covariate),
                      make_column("y", ColumnKind::real, ColumnRole::outcome)};
    return schema;
}

// y depends on z only; x is independent noise, so splicing x changes nothing
// in population.
Dataset independent_dataset(SeededRng& rng, std::size_t n) {
    Dataset data = Dataset::empty(xzy_schema());
    for (std::size_t i = 0; i < n; ++i) {
        double z = 2.0 * rng.uniform01() - 1.0;
        double y = 2.0 + z + 0.3 * rng.normal_pair().first;
        data.append_row({rng.bernoulli(0.5) ? 1.0 : 0.0, z, y});
    }
    return data;
}

// y depends strongly on x.
Dataset dependent_dataset(SeededRng& rng, std::size_t n) {
    Dataset data = Dataset::empty(xzy_schema());
    for (std::size_t i = 0; i < n; ++i) {
        double x = rng.bernoulli(0.5) ? 1.0 : 0.0;
        double z = 2.0 * rng.uniform01() - 1.0;
        double y = 1.0 + 5.0 * x + z + 0.3 * rng.normal_pair().first;
        data.append_row({x, z, y});
    }
    return data;
}

Partition x_partition() {
    Partition part;
    part.x1_columns = {"x"};
    part.x2_columns = {"z"};
    part.outcome = "y";
    return part;
}

} // namespace

TEST_CASE("fixed-oracle bootstrap is deterministic and brackets the point") {
    SeededRng rng(11);
    Dataset data = independent_dataset(rng, 60);
    FittedModel model = fit_ols(data, "y", {"x", "z"});
    LossSpec loss;
    BootstrapOptions options;
    options.B = 200;
    options.seed = 42;

    BootstrapResult first =
        bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), options);
    BootstrapResult second =
        bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), options);
    CHECK(first.B == 200);
    CHECK(first.r_interval.r_min == second.r_interval.r_min);
    CHECK(first.r_interval.r_max == second.r_interval.r_max);
    CHECK(first.normalized_interval.r_min == second.normalized_interval.r_min);
    CHECK(first.normalized_interval.r_max == second.normalized_interval.r_max);
    CHECK(first.redraws == second.redraws);

    RelianceEstimate point = estimate_reliance(data, *model.oracle(), loss, x_partition());
    CHECK(first.point.r_hat == point.r_hat);
    CHECK(first.point.b_hat == point.b_hat);
    CHECK(first.r_interval.r_min <= first.r_interval.r_max);
    CHECK(first.normalized_interval.r_min <= first.normalized_interval.r_max);
    // 60 i.i.d. rows essentially never resample to a single distinct row.
    CHECK(first.redraws == 0);

    // A different seed moves the interval endpoints.
    options.seed = 43;
    BootstrapResult third =
        bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), options);
    CHECK(third.r_interval.r_min != first.r_interval.r_min);
}

TEST_CASE("bootstrap works at B = 1 and rejects bad options") {
    SeededRng rng(12);
    Dataset data = independent_dataset(rng, 30);
    FittedModel model = fit_ols(data, "y", {"x", "z"});
    LossSpec loss;

    BootstrapOptions one;
    one.B = 1;
    one.seed = 9;
    BootstrapResult result =
        bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), one);
    CHECK(result.r_interval.r_min == result.r_interval.r_max);

    BootstrapOptions bad;
    bad.B = 0;
    CHECK_THROWS_AS(bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), bad),
                    UsageError);
    bad.B = 100;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), bad),
                    UsageError);
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), bad),
                    UsageError);

    BootstrapOptions refit_no_fitter;
    refit_no_fitter.refit = true;
    CHECK_THROWS_AS(
        bootstrap_reliance(data, model.oracle().get(), loss, x_partition(), refit_no_fitter),
        UsageError);

    BootstrapOptions fixed_no_oracle;
    CHECK_THROWS_AS(bootstrap_reliance(data, nullptr, loss, x_partition(), fixed_no_oracle),
                    UsageError);
}

TEST_CASE("refitting bootstrap re-estimates the model per resample") {
    SeededRng rng(13);
    Dataset data = dependent_dataset(rng, 80);
    FitterSpec fitter;
    fitter.covariates = {"x", "z"};
    LossSpec loss;
    BootstrapOptions options;
    options.B = 150;
    options.seed = 7;
    options.refit = true;
    options.fitter = &fitter;

    BootstrapResult result = bootstrap_reliance(data, nullptr, loss, x_partition(), options);
    CHECK(result.B == 150);
    CHECK(result.r_interval.r_min <= result.r_interval.r_max);
    // x carries a strong effect, so the normalized interval stays away
    // from zero.
    CHECK(result.normalized_interval.r_min > 0.0);

    BootstrapResult again = bootstrap_reliance(data, nullptr, loss, x_partition(), options);
    CHECK(again.r_interval.r_min == result.r_interval.r_min);
    CHECK(again.r_interval.r_max == result.r_interval.r_max);
}

TEST_CASE("resamples that lose the model's rank are redrawn and counted") {
    // Row 0 is the only x = 1 row; resamples that miss it make x constant,
    // the refit throws, and the resample is redrawn.
    SeededRng rng(14);
    Dataset data = Dataset::empty(xzy_schema());
    data.append_row({1.0, 0.5, 3.0});
    for (std::size_t i = 1; i < 25; ++i) {
        double z = 2.0 * rng.uniform01() - 1.0;
        data.append_row({0.0, z, 1.0 + z});
    }
    FitterSpec fitter;
    fitter.covariates = {"x", "z"};
    LossSpec loss;
    BootstrapOptions options;
    options.B = 60;
    options.seed = 21;
    options.refit = true;
    options.fitter = &fitter;
    BootstrapResult result = bootstrap_reliance(data, nullptr, loss, x_partition(), options);
    CHECK(result.B == 60);
    // Missing row 0 has probability (1 - 1/25)^25, about 0.36 per resample.
    CHECK(result.redraws > 5);
}

TEST_CASE("a refit failure on the full sample propagates instead of being redrawn") {
    // x is constant, so the point-estimate refit is rank deficient.  Only
    // resample refits are retried; the full-sample fit reports its error.
    SeededRng rng(4);
    Dataset data = Dataset::empty(xzy_schema());
    for (std::size_t i = 0; i < 20; ++i) {
        double z = rng.uniform01();
        data.append_row({1.0, z, 2.0 * z + rng.uniform01()});
    }
    FitterSpec fitter;
    fitter.covariates = {"x"};
    LossSpec loss;
    BootstrapOptions options;
    options.B = 10;
    options.seed = 3;
    options.refit = true;
    options.fitter = &fitter;
    CHECK_THROWS_WITH_AS(bootstrap_reliance(data, nullptr, loss, x_partition(), options),
                         doctest::Contains("rank deficient"), NumericError);
}

TEST_CASE("parity test validates its preconditions") {
    SeededRng rng(15);
    Dataset data = independent_dataset(rng, 50);
    FitterSpec fitter;
    fitter.covariates = {"x", "z"};
    LossSpec loss;

    CHECK_THROWS_WITH_AS(parity_test(data, fitter, loss, x_partition(), 50, 1),
                         doctest::Contains("100"), UsageError);

    Dataset small = gather_rows(data, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK_THROWS_AS(parity_test(small, fitter, loss, x_partition(), 200, 1), UsageError);

    LossSpec ce;
    ce.kind = LossKind::cross_entropy;
    CHECK_THROWS_WITH_AS(parity_test(data, fitter, ce, x_partition(), 200, 1),
                         doctest::Contains("square"), UsageError);
}

TEST_CASE("parity test returns p = 1 when the model never reads x1") {
    SeededRng rng(16);
    Dataset data = independent_dataset(rng, 50);
    FitterSpec fitter;
    fitter.covariates = {"z"};  // x is not an input, so splicing x is a no-op
    LossSpec loss;
    ParityResult result = parity_test(data, fitter, loss, x_partition(), 150, 4);
    CHECK(result.dof == 0);
    CHECK(result.p_value == 1.0);
    CHECK(result.statistic == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("parity test separates null from strong dependence") {
    SeededRng rng(17);
    Dataset null_data = independent_dataset(rng, 120);
    FitterSpec fitter;
    fitter.covariates = {"x", "z"};
    LossSpec loss;
    ParityResult null_result = parity_test(null_data, fitter, loss, x_partition(), 200, 5);
    CHECK(null_result.dof == 1);
    CHECK(null_result.B == 200);
    CHECK(null_result.statistic >= 0.0);
    CHECK(null_result.p_value > 0.01);
    CHECK(null_result.p_value <= 1.0);

    Dataset strong = dependent_dataset(rng, 120);
    ParityResult strong_result = parity_test(strong, fitter, loss, x_partition(), 200, 6);
    CHECK(strong_result.p_value < 0.001);

    // Deterministic in the seed.
    ParityResult repeat = parity_test(strong, fitter, loss, x_partition(), 200, 6);
    CHECK(repeat.p_value == strong_result.p_value);
    CHECK(repeat.statistic == strong_result.statistic);
}
