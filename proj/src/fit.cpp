#include "rely/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rely/errors.hpp"

namespace rely {

namespace {

constexpr double kLogisticTolDefault = 1e-8;
constexpr double kHuberTolDefault = 1e-6;
constexpr double kProbClamp = 1e-12;
constexpr double kWeightFloor = 1e-10;
// Linear index past which fitted probabilities are saturated; reaching it at
// the iteration cap is the practical signature of perfect separation.
constexpr double kSeparationEta = 30.0;

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;  // one per X column; "(intercept)" first if present
};

Design build_design(const Dataset& data, const std::string& outcome,
                    const std::vector<std::string>& covariates, bool intercept) {
    std::set<std::string> seen;
    for (const std::string& c : covariates) {
        if (c == outcome)
            throw UsageError("outcome column '" + outcome + "' cannot also be a covariate");
        if (!seen.insert(c).second)
            throw UsageError("covariate '" + c + "' listed more than once");
    }
    if (covariates.empty() && !intercept)
        throw UsageError("fit needs at least one covariate or an intercept");

    const std::size_t n = data.n_rows();
    if (n < covariates.size() + 1)
        throw UsageError("fit needs at least " + std::to_string(covariates.size() + 1) +
                         " rows for " + std::to_string(covariates.size()) +
                         " covariates, got " + std::to_string(n));

    Design d;
    const std::size_t p = covariates.size() + (intercept ? 1 : 0);
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    d.y.resize(static_cast<Eigen::Index>(n));
    std::size_t col = 0;
    if (intercept) {
        d.X.col(0).setOnes();
        d.names.push_back("(intercept)");
        col = 1;
    }
    for (const std::string& name : covariates) {
        const std::vector<double>& values = data.column(name);
        for (std::size_t i = 0; i < n; ++i)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = values[i];
        d.names.push_back(name);
        ++col;
    }
    const std::vector<double>& yv = data.column(outcome);
    for (std::size_t i = 0; i < n; ++i) d.y(static_cast<Eigen::Index>(i)) = yv[i];
    return d;
}

// Solves min ||X b - z|| by rank-revealing QR, throwing NumericError naming
// the dependent columns when X is rank deficient.
Eigen::VectorXd solve_full_rank(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                                const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        const auto& perm = qr.colsPermutation().indices();
        std::vector<std::string> dependent;
        for (Eigen::Index k = qr.rank(); k < X.cols(); ++k)
            dependent.push_back(names[static_cast<std::size_t>(perm(k))]);
        std::sort(dependent.begin(), dependent.end());
        throw NumericError("design matrix is rank deficient; collinear columns: " +
                           join(dependent, ", "));
    }
    return qr.solve(z);
}

Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& w, const std::vector<std::string>& names) {
    Eigen::VectorXd sw = w.array().sqrt();
    Eigen::MatrixXd Xw = sw.asDiagonal() * X;
    Eigen::VectorXd zw = sw.asDiagonal() * z;
    return solve_full_rank(Xw, zw, names);
}

FittedModel make_model(const char* fitter, const std::vector<std::string>& covariates,
                       bool intercept, const Eigen::VectorXd& beta) {
    FittedModel m;
    m.fitter = fitter;
    m.columns = covariates;
    m.has_intercept = intercept;
    std::size_t off = 0;
    if (intercept) {
        m.intercept = beta(0);
        off = 1;
    }
    m.coef.resize(covariates.size());
    for (std::size_t k = 0; k < covariates.size(); ++k)
        m.coef[k] = beta(static_cast<Eigen::Index>(k + off));
    return m;
}

double median_abs(std::vector<double> v) {
    for (double& x : v) x = std::fabs(x);
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double huber_rho(double u, double c) {
    double a = std::fabs(u);
    if (a <= c) return 0.5 * u * u;
    return c * a - 0.5 * c * c;
}

} // namespace

std::shared_ptr<const Oracle> FittedModel::oracle() const {
    if (fitter == "logistic")
        return std::make_shared<LogisticOracle>(columns, intercept, coef);
    return std::make_shared<LinearOracle>(columns, intercept, coef);
}

TextDocument FittedModel::to_document() const {
    TextDocument doc;
    TextSection& s = doc.add("model");
    s.set("fitter", fitter);
    s.set("columns", join(columns, ", "));
    s.set("intercept", has_intercept ? "true" : "false");
    s.set("intercept_value", format_double(intercept));
    std::vector<std::string> parts;
    for (double c : coef) parts.push_back(format_double(c));
    s.set("coef", join(parts, ", "));
    s.set("scale", format_double(scale));
    s.set("tuning_c", format_double(tuning_c));
    s.set("iterations", std::to_string(diagnostics.iterations));
    s.set("converged", diagnostics.converged ? "true" : "false");
    s.set("separation_warning", diagnostics.separation_warning ? "true" : "false");
    s.set("objective", format_double(diagnostics.objective));
    return doc;
}

FittedModel FittedModel::parse(const TextDocument& doc) {
    const TextSection* s = doc.find("model");
    if (!s) throw UsageError("model file has no [model] section");
    FittedModel m;
    m.fitter = s->require("fitter");
    if (m.fitter != "ols" && m.fitter != "logistic" && m.fitter != "huber")
        throw UsageError("unknown fitter '" + m.fitter + "' in model file");
    for (const std::string& part : split(s->require("columns"), ',')) {
        std::string name = trim(part);
        if (!name.empty()) m.columns.push_back(name);
    }
    m.has_intercept = parse_bool(s->require("intercept"));
    m.intercept = parse_double(s->require("intercept_value"));
    for (const std::string& part : split(s->require("coef"), ',')) {
        std::string v = trim(part);
        if (!v.empty()) m.coef.push_back(parse_double(v));
    }
    if (m.coef.size() != m.columns.size())
        throw UsageError("model file has " + std::to_string(m.coef.size()) + " coefficients for " +
                         std::to_string(m.columns.size()) + " columns");
    m.scale = parse_double(s->require("scale"));
    m.tuning_c = parse_double(s->require("tuning_c"));
    m.diagnostics.iterations = static_cast<std::size_t>(parse_int(s->require("iterations")));
    m.diagnostics.converged = parse_bool(s->require("converged"));
    m.diagnostics.separation_warning = parse_bool(s->require("separation_warning"));
    m.diagnostics.objective = parse_double(s->require("objective"));
    return m;
}

void FittedModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << to_document().serialize();
    if (!out) throw DataError("failed writing model to '" + path + "'");
}

FittedModel FittedModel::load(const std::string& path) {
    return parse(TextDocument::parse_file(path));
}

FittedModel fit_ols(const Dataset& data, const std::string& outcome,
                    const std::vector<std::string>& covariates, const FitOptions& options) {
    Design d = build_design(data, outcome, covariates, options.intercept);
    Eigen::VectorXd beta = solve_full_rank(d.X, d.y, d.names);
    FittedModel m = make_model("ols", covariates, options.intercept, beta);
    m.diagnostics.iterations = 1;
    m.diagnostics.converged = true;
    m.diagnostics.objective = (d.y - d.X * beta).squaredNorm();
    return m;
}

FittedModel fit_logistic(const Dataset& data, const std::string& outcome,
                         const std::vector<std::string>& covariates, const FitOptions& options) {
    Design d = build_design(data, outcome, covariates, options.intercept);
    for (Eigen::Index i = 0; i < d.y.size(); ++i)
        if (d.y(i) != 0.0 && d.y(i) != 1.0)
            throw UsageError("logistic outcome '" + outcome + "' must contain only 0 and 1");

    const double tol = options.tol > 0.0 ? options.tol : kLogisticTolDefault;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.X.cols());
    FitDiagnostics diag;
    bool diverged = false;

    for (std::size_t it = 0; it < options.max_iter; ++it) {
        Eigen::VectorXd eta = d.X * beta;
        Eigen::VectorXd p(eta.size()), w(eta.size()), z(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            double pi = 1.0 / (1.0 + std::exp(-eta(i)));
            pi = std::clamp(pi, kProbClamp, 1.0 - kProbClamp);
            double wi = std::max(pi * (1.0 - pi), kWeightFloor);
            p(i) = pi;
            w(i) = wi;
            z(i) = eta(i) + (d.y(i) - pi) / wi;
        }
        Eigen::VectorXd next = weighted_solve(d.X, z, w, d.names);
        diag.iterations = it + 1;
        if (!next.allFinite()) {
            diverged = true;
            break;
        }
        double delta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (delta < tol) {
            diag.converged = true;
            break;
        }
    }

    Eigen::VectorXd eta = d.X * beta;
    if (diverged || eta.cwiseAbs().maxCoeff() > kSeparationEta) {
        diag.separation_warning = true;
        diag.converged = false;
    }
    double nll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        double pi = std::clamp(1.0 / (1.0 + std::exp(-eta(i))), kProbClamp, 1.0 - kProbClamp);
        nll -= d.y(i) * std::log(pi) + (1.0 - d.y(i)) * std::log(1.0 - pi);
    }
    diag.objective = nll;

    FittedModel m = make_model("logistic", covariates, options.intercept, beta);
    m.diagnostics = diag;
    return m;
}

FittedModel fit_huber(const Dataset& data, const std::string& outcome,
                      const std::vector<std::string>& covariates, const FitOptions& options) {
    if (!(options.tuning_c > 0.0)) throw UsageError("Huber tuning constant must be positive");
    Design d = build_design(data, outcome, covariates, options.intercept);
    const double tol = options.tol > 0.0 ? options.tol : kHuberTolDefault;
    const double c = options.tuning_c;

    Eigen::VectorXd beta = solve_full_rank(d.X, d.y, d.names);
    FitDiagnostics diag;

    auto residual_scale = [&](const Eigen::VectorXd& r) {
        std::vector<double> rv(r.data(), r.data() + r.size());
        double s = median_abs(rv) / 0.6745;
        if (s == 0.0) s = r.cwiseAbs().mean();
        return s;
    };

    double scale = 0.0;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
        Eigen::VectorXd r = d.y - d.X * beta;
        scale = residual_scale(r);
        if (scale == 0.0) {
            // Every residual is zero: the least-squares solution fits exactly.
            diag.iterations = it + 1;
            diag.converged = true;
            diag.objective = 0.0;
            FittedModel exact = make_model("huber", covariates, options.intercept, beta);
            exact.scale = 0.0;
            exact.tuning_c = c;
            exact.diagnostics = diag;
            return exact;
        }
        Eigen::VectorXd w(r.size());
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            double a = std::fabs(r(i));
            w(i) = a <= c * scale ? 1.0 : c * scale / a;
        }
        Eigen::VectorXd next = weighted_solve(d.X, d.y, w, d.names);
        diag.iterations = it + 1;
        double delta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (delta < tol) {
            diag.converged = true;
            break;
        }
    }

    Eigen::VectorXd r = d.y - d.X * beta;
    scale = residual_scale(r);
    FittedModel m = make_model("huber", covariates, options.intercept, beta);
    m.scale = scale;
    m.tuning_c = c;
    if (scale > 0.0) {
        double obj = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i) obj += huber_rho(r(i) / scale, c);
        diag.objective = obj;
    }
    m.diagnostics = diag;
    return m;
}

double huber_objective(const Dataset& data, const std::string& outcome,
                       const std::vector<std::string>& covariates, bool has_intercept,
                       double intercept, const std::vector<double>& coef, double scale,
                       double tuning_c) {
    if (!(scale > 0.0)) throw UsageError("Huber objective needs a positive scale");
    if (coef.size() != covariates.size())
        throw UsageError("huber_objective got " + std::to_string(coef.size()) +
                         " coefficients for " + std::to_string(covariates.size()) + " covariates");
    const std::vector<double>& y = data.column(outcome);
    std::vector<const std::vector<double>*> cols;
    for (const std::string& name : covariates) cols.push_back(&data.column(name));
    double obj = 0.0;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        double pred = has_intercept ? intercept : 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) pred += coef[k] * (*cols[k])[i];
        obj += huber_rho((y[i] - pred) / scale, tuning_c);
    }
    return obj;
}

FittedModel FitterSpec::fit(const Dataset& data, const std::string& outcome) const {
    if (fitter == "ols") return fit_ols(data, outcome, covariates, options);
    if (fitter == "logistic") return fit_logistic(data, outcome, covariates, options);
    if (fitter == "huber") return fit_huber(data, outcome, covariates, options);
    throw UsageError("unknown fitter '" + fitter + "' (expected ols, logistic or huber)");
}

BoundedOracle bound_oracle(std::shared_ptr<const Oracle> f1, double p_z1, bool allow_vacuous) {
    if (!f1) throw UsageError("bound_oracle needs an oracle");
    if (!f1->output_range().is_probability())
        throw UsageError("bound_oracle needs a probability oracle with outputs in [0, 1]");
    if (!(p_z1 >= 0.0 && p_z1 <= 1.0))
        throw UsageError("p_z1 must lie in [0, 1], got " + format_double(p_z1));
    if (p_z1 == 0.0 && !allow_vacuous)
        throw UsageError("p_z1 = 0 makes the bounds vacuous ([0, 1] everywhere); "
                         "pass the vacuous-bounds override to proceed");
    BoundedOracle b;
    b.f_min = std::make_shared<AffineOracle>(f1, p_z1, 0.0);
    b.f_max = std::make_shared<AffineOracle>(f1, p_z1, 1.0 - p_z1);
    return b;
}

} // namespace rely
