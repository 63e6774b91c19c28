#include <cmath>
#include <vector>

#include "doctest.h"
#include "rely/dataset.hpp"
#include "rely/errors.hpp"
#include "rely/fit.hpp"
#include "rely/schema.hpp"
#include "support/minimize.hpp"
#include "support/tmpdir.hpp"

using namespace rely;

namespace {

Schema xy_schema() {
    Schema schema;
    ColumnSchema y;
    y.name = "y";
    y.kind = ColumnKind::real;
    y.role = ColumnRole::outcome;
    ColumnSchema x1;
    x1.name = "x1";
    x1.kind = ColumnKind::real;
    x1.role = ColumnRole::covariate;
    ColumnSchema x2;
    x2.name = "x2";
    x2.kind = ColumnKind::real;
    x2.role = ColumnRole::covariate;
    schema.columns = {y, x1, x2};
    return schema;
}

// 30-row deterministic design shared by the frozen regression references.
std::vector<std::pair<double, double>> reference_design() {
    std::vector<std::pair<double, double>> rows;
    for (int i = 0; i < 30; ++i) {
        double x1 = static_cast<double>(i % 5) - 2.0;
        double x2 = static_cast<double>((i * 7) % 11) / 5.0 - 1.0;
        rows.emplace_back(x1, x2);
    }
    return rows;
}

Dataset dataset_with_outcomes(const std::vector<double>& y) {
    Dataset data = Dataset::empty(xy_schema());
    auto design = reference_design();
    for (std::size_t i = 0; i < y.size(); ++i)
        data.append_row({y[i], design[i].first, design[i].second});
    return data;
}

// Outcomes drawn once from a logistic model on the design; the values and
// the maximum likelihood solution below were frozen from an independent
// optimizer (BFGS then Newton steps on the exact likelihood, gradient norm
// at the solution below 1e-9).
const std::vector<double> kLogisticY = {1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0,
                                        1, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1, 1};

// Linear outcomes with frozen bounded noise around 2 + 0.5 x1 - 1.25 x2, and
// the least squares solution from an independent solver.
const std::vector<double> kOlsY = {
    2.1794682580257358,   0.59487521447044855, 2.6421784614121862,  1.7498404391208169,
    2.559907185508564,    1.3230074632174365,  0.18457214247246156, 2.2533853211207315,
    3.8644390550653043,   2.7085633489896281,  1.3626882963171738,  2.5021100414296598,
    1.3875360870010809,   2.876354594272243,   1.2874239339904534,  1.24287808744225,
    2.7499378846159743,   0.63785752421790676, 2.1216300506084735,  4.1831423210842331,
    0.11560270311019838,  1.2638267719448777,  2.9326560094941669,  1.6954954919710872,
    3.1892819567365223,   -0.645709942382382,  1.2823655346728629,  2.5645444083402253,
    1.9471138390963461,   3.4563456425166805};

} // namespace

TEST_CASE("ols recovers exact linear data to machine precision") {
    auto design = reference_design();
    std::vector<double> y(design.size());
    for (std::size_t i = 0; i < design.size(); ++i)
        y[i] = 2.0 + 0.5 * design[i].first - 1.25 * design[i].second;
    Dataset data = dataset_with_outcomes(y);
    FittedModel model = fit_ols(data, "y", {"x1", "x2"});
    CHECK(model.fitter == "ols");
    CHECK(model.intercept == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(model.coef[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.coef[1] == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(model.diagnostics.converged);
    CHECK(model.diagnostics.objective < 1e-20);
}

TEST_CASE("ols matches an independent least squares solver on noisy data") {
    Dataset data = dataset_with_outcomes(kOlsY);
    FittedModel model = fit_ols(data, "y", {"x1", "x2"});
    CHECK(model.intercept == doctest::Approx(1.957383293552082).epsilon(1e-10));
    CHECK(model.coef[0] == doctest::Approx(0.543230322518890).epsilon(1e-10));
    CHECK(model.coef[1] == doctest::Approx(-1.270451701697711).epsilon(1e-10));
}

TEST_CASE("ols without intercept and with collinear columns") {
    auto design = reference_design();
    std::vector<double> y(design.size());
    for (std::size_t i = 0; i < design.size(); ++i) y[i] = 3.0 * design[i].first;
    Dataset data = dataset_with_outcomes(y);
    FitOptions options;
    options.intercept = false;
    FittedModel model = fit_ols(data, "y", {"x1"}, options);
    CHECK_FALSE(model.has_intercept);
    CHECK(model.intercept == 0.0);
    CHECK(model.coef[0] == doctest::Approx(3.0).epsilon(1e-12));

    // Repeating a covariate name is caught before the solve.
    CHECK_THROWS_WITH_AS(fit_ols(data, "y", {"x2", "x2"}),
                         doctest::Contains("more than once"), UsageError);

    // Covariates with proportional values are rank deficient even though
    // their names differ.
    Dataset collinear = Dataset::empty(xy_schema());
    for (int i = 0; i < 10; ++i) {
        double v = static_cast<double>(i);
        collinear.append_row({1.0 + v, v, 2.0 * v});
    }
    CHECK_THROWS_WITH_AS(fit_ols(collinear, "y", {"x1", "x2"}),
                         doctest::Contains("rank deficient"), NumericError);
}

TEST_CASE("logistic matches the frozen maximum likelihood solution") {
    Dataset data = dataset_with_outcomes(kLogisticY);
    FittedModel model = fit_logistic(data, "y", {"x1", "x2"});
    CHECK(model.fitter == "logistic");
    CHECK(model.diagnostics.converged);
    CHECK_FALSE(model.diagnostics.separation_warning);
    CHECK(model.intercept == doctest::Approx(0.385096424708123).epsilon(1e-7));
    CHECK(model.coef[0] == doctest::Approx(-0.977835777064288).epsilon(1e-7));
    CHECK(model.coef[1] == doctest::Approx(0.632926811655381).epsilon(1e-7));
    CHECK(model.diagnostics.objective == doctest::Approx(15.610932868662314).epsilon(1e-9));

    // The oracle squashes the linear index through the logistic function.
    auto oracle = model.oracle();
    std::vector<double> x = {1.0, 0.5};
    double eta = model.intercept + model.coef[0] * 1.0 + model.coef[1] * 0.5;
    CHECK(oracle->predict(x) == doctest::Approx(1.0 / (1.0 + std::exp(-eta))).epsilon(1e-15));
    CHECK(oracle->output_range().is_probability());
}

TEST_CASE("logistic flags perfect separation instead of failing") {
    Dataset data = Dataset::empty(xy_schema());
    for (int i = 0; i < 20; ++i) {
        double x1 = (i % 4 < 2) ? -1.0 - (i % 2) : 1.0 + (i % 2);
        double x2 = static_cast<double>(i % 7) / 3.0;
        data.append_row({x1 > 0.0 ? 1.0 : 0.0, x1, x2});
    }
    FittedModel model = fit_logistic(data, "y", {"x1", "x2"});
    CHECK(model.diagnostics.separation_warning);
    CHECK_FALSE(model.diagnostics.converged);
    CHECK(std::isfinite(model.intercept));
    for (double c : model.coef) CHECK(std::isfinite(c));
    // The direction is right even though the magnitude diverges.
    CHECK(model.coef[0] > 1.0);
}

TEST_CASE("huber with a huge tuning constant reproduces ols") {
    Dataset data = dataset_with_outcomes(kOlsY);
    FittedModel ols = fit_ols(data, "y", {"x1", "x2"});
    FitOptions options;
    options.tuning_c = 1e8;
    FittedModel huber = fit_huber(data, "y", {"x1", "x2"}, options);
    CHECK(huber.fitter == "huber");
    CHECK(huber.diagnostics.converged);
    CHECK(huber.scale > 0.0);
    CHECK(huber.intercept == doctest::Approx(ols.intercept).epsilon(1e-9));
    CHECK(huber.coef[0] == doctest::Approx(ols.coef[0]).epsilon(1e-9));
    CHECK(huber.coef[1] == doctest::Approx(ols.coef[1]).epsilon(1e-9));
}

TEST_CASE("huber resists contamination that drags ols away") {
    auto design = reference_design();
    std::vector<double> y(design.size());
    for (std::size_t i = 0; i < design.size(); ++i)
        y[i] = 1.0 + 2.0 * design[i].first - 0.5 * design[i].second;
    y[3] += 40.0;
    y[11] -= 60.0;
    y[22] += 50.0;
    Dataset data = dataset_with_outcomes(y);
    FittedModel ols = fit_ols(data, "y", {"x1", "x2"});
    FittedModel huber = fit_huber(data, "y", {"x1", "x2"});
    double ols_err = std::abs(ols.coef[0] - 2.0) + std::abs(ols.coef[1] + 0.5);
    double huber_err = std::abs(huber.coef[0] - 2.0) + std::abs(huber.coef[1] + 0.5);
    CHECK(huber_err < 0.1);
    CHECK(huber_err < 0.2 * ols_err);
    CHECK(huber.tuning_c == doctest::Approx(1.345));

    // An independent simplex minimizer over (intercept, coef) at the
    // returned scale finds no materially better objective.
    double scale = huber.scale;
    auto objective = [&](const std::vector<double>& b) {
        return huber_objective(data, "y", {"x1", "x2"}, true, b[0],
                               {b[1], b[2]}, scale, huber.tuning_c);
    };
    double at_fit = objective({huber.intercept, huber.coef[0], huber.coef[1]});
    CHECK(at_fit == doctest::Approx(huber.diagnostics.objective).epsilon(1e-12));
    ref::MinimizeResult best = ref::nelder_mead(objective, {0.0, 0.0, 0.0});
    CHECK(at_fit <= best.value * (1.0 + 1e-4) + 1e-12);
    CHECK(at_fit >= best.value * (1.0 - 1e-4) - 1e-12);
}

TEST_CASE("huber falls back cleanly when residuals vanish") {
    auto design = reference_design();
    std::vector<double> y(design.size());
    for (std::size_t i = 0; i < design.size(); ++i)
        y[i] = -0.5 + 1.5 * design[i].first;
    Dataset data = dataset_with_outcomes(y);
    FittedModel model = fit_huber(data, "y", {"x1"});
    CHECK(model.diagnostics.converged);
    CHECK(model.intercept == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(model.coef[0] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("huber_objective validates its inputs") {
    Dataset data = dataset_with_outcomes(kOlsY);
    CHECK_THROWS_AS(huber_objective(data, "y", {"x1"}, true, 0.0, {1.0}, 0.0, 1.345),
                    UsageError);
    CHECK_THROWS_AS(huber_objective(data, "y", {"x1"}, true, 0.0, {1.0, 2.0}, 1.0, 1.345),
                    UsageError);
}

TEST_CASE("fitted models save and load without losing a bit") {
    Dataset data = dataset_with_outcomes(kLogisticY);
    FittedModel model = fit_logistic(data, "y", {"x1", "x2"});
    ref::TempDir dir;
    std::string path = dir.file("model.txt");
    model.save(path);
    FittedModel loaded = FittedModel::load(path);
    CHECK(loaded.fitter == model.fitter);
    CHECK(loaded.columns == model.columns);
    CHECK(loaded.has_intercept == model.has_intercept);
    CHECK(loaded.intercept == model.intercept);
    CHECK(loaded.coef == model.coef);
    CHECK(loaded.scale == model.scale);
    CHECK(loaded.tuning_c == model.tuning_c);
    CHECK(loaded.diagnostics.converged == model.diagnostics.converged);
    CHECK(loaded.diagnostics.objective == model.diagnostics.objective);

    // Round trip again through the document form.
    FittedModel reparsed = FittedModel::parse(loaded.to_document());
    CHECK(reparsed.intercept == model.intercept);
    CHECK(reparsed.coef == model.coef);
}

TEST_CASE("fitter spec dispatches by name") {
    Dataset data = dataset_with_outcomes(kOlsY);
    FitterSpec spec;
    spec.fitter = "huber";
    spec.covariates = {"x1", "x2"};
    FittedModel model = spec.fit(data, "y");
    CHECK(model.fitter == "huber");
    spec.fitter = "nonsense";
    CHECK_THROWS_AS(spec.fit(data, "y"), UsageError);
}

TEST_CASE("fitters reject unknown columns and empty covariates") {
    Dataset data = dataset_with_outcomes(kOlsY);
    CHECK_THROWS_AS(fit_ols(data, "y", {"zz"}), UsageError);
    CHECK_THROWS_AS(fit_ols(data, "zz", {"x1"}), UsageError);
}
