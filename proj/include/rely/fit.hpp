// Linear-index model fitters supplying the reliance oracle.
//
// Three fitters are provided: ordinary least squares, logistic regression by
// iteratively reweighted least squares, and Huber robust regression with a
// median-absolute-deviation residual scale.  All of them add an intercept
// unless disabled, and all expose their coefficients so fitted models can be
// serialized and reloaded bit-for-bit.

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "rely/dataset.hpp"
#include "rely/oracle.hpp"
#include "rely/text_format.hpp"

namespace rely {

struct FitDiagnostics {
    std::size_t iterations = 0;
    bool converged = false;
    bool separation_warning = false;  // logistic only
    double objective = 0.0;           // value minimized, at the returned coefficients
};

struct FitOptions {
    bool intercept = true;
    std::size_t max_iter = 100;
    double tol = 0.0;        // 0 selects the fitter default
    double tuning_c = 1.345; // Huber only; 95% Gaussian efficiency
};

// A fitted linear-index model, serializable to a structured text file.
struct FittedModel {
    std::string fitter;  // ols, logistic or huber
    std::vector<std::string> columns;
    bool has_intercept = true;
    double intercept = 0.0;
    std::vector<double> coef;  // one per column
    double scale = 0.0;        // Huber residual scale; 0 otherwise
    double tuning_c = 0.0;     // Huber tuning constant; 0 otherwise
    FitDiagnostics diagnostics;

    // LinearOracle for ols and huber, LogisticOracle for logistic.
    std::shared_ptr<const Oracle> oracle() const;

    TextDocument to_document() const;
    static FittedModel parse(const TextDocument& doc);
    void save(const std::string& path) const;
    static FittedModel load(const std::string& path);
};

// Least squares.  Throws NumericError naming the collinear columns when the
// design matrix is rank deficient.
FittedModel fit_ols(const Dataset& data, const std::string& outcome,
                    const std::vector<std::string>& covariates, const FitOptions& options = {});

// Logistic regression on a 0/1 outcome.  Perfect separation does not fail:
// the model returns with converged=false, separation_warning=true and the
// coefficients reached at the iteration cap.
FittedModel fit_logistic(const Dataset& data, const std::string& outcome,
                         const std::vector<std::string>& covariates,
                         const FitOptions& options = {});

// Huber M-estimator.  The residual scale is re-estimated each iteration as
// median(|r|)/0.6745; a zero median falls back to mean(|r|), and if that is
// zero too the current coefficients fit exactly and are returned.
FittedModel fit_huber(const Dataset& data, const std::string& outcome,
                      const std::vector<std::string>& covariates, const FitOptions& options = {});

// Huber objective sum_i rho_c(r_i / scale) at the given coefficients, with
// rho_c(u) = u^2/2 inside [-c, c] and c|u| - c^2/2 outside.  Used to compare
// the fitter against independent minimizers.
double huber_objective(const Dataset& data, const std::string& outcome,
                       const std::vector<std::string>& covariates, bool has_intercept,
                       double intercept, const std::vector<double>& coef, double scale,
                       double tuning_c);

// A recipe for fitting the oracle, used when resampling procedures must
// re-estimate the model on each resample.
struct FitterSpec {
    std::string fitter = "ols";  // ols, logistic or huber
    std::vector<std::string> covariates;
    FitOptions options;

    FittedModel fit(const Dataset& data, const std::string& outcome) const;
};

// Identification envelope around a probability oracle when the oracle is
// estimable only on a subpopulation observed with probability p_z1:
//   f_min(x) = f1(x) * p_z1
//   f_max(x) = f1(x) * p_z1 + (1 - p_z1)
// p_z1 = 0 makes the envelope the vacuous [0, 1] and is refused unless
// allow_vacuous is set.
BoundedOracle bound_oracle(std::shared_ptr<const Oracle> f1, double p_z1,
                           bool allow_vacuous = false);

} // namespace rely
