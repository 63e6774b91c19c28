// Pointwise decision-maker models.
//
// An Oracle predicts the decision for one covariate record.  It declares the
// column names it reads; callers assemble the input values in that order.
// Oracles are immutable after construction and safe to evaluate concurrently.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rely {

// Closed interval of possible oracle outputs.
struct OutputRange {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static OutputRange probability() { return {0.0, 1.0}; }
    static OutputRange unbounded() { return {}; }
    bool is_probability() const { return lo >= 0.0 && hi <= 1.0; }
};

class Oracle {
public:
    virtual ~Oracle() = default;

    // Column names this oracle reads, in the order predict expects them.
    virtual const std::vector<std::string>& input_columns() const = 0;
    virtual double predict(std::span<const double> inputs) const = 0;
    virtual OutputRange output_range() const { return OutputRange::unbounded(); }
};

// Linear predictor: intercept + coef . x.
class LinearOracle : public Oracle {
public:
    LinearOracle(std::vector<std::string> columns, double intercept, std::vector<double> coef)
        : columns_(std::move(columns)), intercept_(intercept), coef_(std::move(coef)) {}

    const std::vector<std::string>& input_columns() const override { return columns_; }
    double predict(std::span<const double> x) const override {
        double eta = intercept_;
        for (std::size_t k = 0; k < coef_.size(); ++k) eta += coef_[k] * x[k];
        return eta;
    }

    double intercept() const { return intercept_; }
    const std::vector<double>& coef() const { return coef_; }

private:
    std::vector<std::string> columns_;
    double intercept_;
    std::vector<double> coef_;
};

// Probability predictor: sigmoid(intercept + coef . x).
class LogisticOracle : public Oracle {
public:
    LogisticOracle(std::vector<std::string> columns, double intercept, std::vector<double> coef)
        : columns_(std::move(columns)), intercept_(intercept), coef_(std::move(coef)) {}

    const std::vector<std::string>& input_columns() const override { return columns_; }
    double predict(std::span<const double> x) const override {
        double eta = intercept_;
        for (std::size_t k = 0; k < coef_.size(); ++k) eta += coef_[k] * x[k];
        return 1.0 / (1.0 + std::exp(-eta));
    }
    OutputRange output_range() const override { return OutputRange::probability(); }

    double intercept() const { return intercept_; }
    const std::vector<double>& coef() const { return coef_; }

private:
    std::vector<std::string> columns_;
    double intercept_;
    std::vector<double> coef_;
};

// Wraps an arbitrary function; used for exact decision rules and in tests.
class FunctionOracle : public Oracle {
public:
    using Fn = std::function<double(std::span<const double>)>;

    FunctionOracle(std::vector<std::string> columns, Fn fn,
                   OutputRange range = OutputRange::unbounded())
        : columns_(std::move(columns)), fn_(std::move(fn)), range_(range) {}

    const std::vector<std::string>& input_columns() const override { return columns_; }
    double predict(std::span<const double> x) const override { return fn_(x); }
    OutputRange output_range() const override { return range_; }

private:
    std::vector<std::string> columns_;
    Fn fn_;
    OutputRange range_;
};

// Affine transform of another oracle: scale * inner(x) + shift.  Used to
// build identification envelopes around a probability oracle.
class AffineOracle : public Oracle {
public:
    AffineOracle(std::shared_ptr<const Oracle> inner, double scale, double shift)
        : inner_(std::move(inner)), scale_(scale), shift_(shift) {}

    const std::vector<std::string>& input_columns() const override {
        return inner_->input_columns();
    }
    double predict(std::span<const double> x) const override {
        return scale_ * inner_->predict(x) + shift_;
    }
    OutputRange output_range() const override {
        OutputRange r = inner_->output_range();
        double a = scale_ * r.lo + shift_;
        double b = scale_ * r.hi + shift_;
        return {std::min(a, b), std::max(a, b)};
    }

private:
    std::shared_ptr<const Oracle> inner_;
    double scale_;
    double shift_;
};

// Forwards to another oracle while counting evaluations; used to verify the
// evaluation-count guarantees of the reliance estimators.
class CountingOracle : public Oracle {
public:
    explicit CountingOracle(const Oracle& inner) : inner_(inner) {}

    const std::vector<std::string>& input_columns() const override {
        return inner_.input_columns();
    }
    double predict(std::span<const double> x) const override {
        count_.fetch_add(1, std::memory_order_relaxed);
        return inner_.predict(x);
    }
    OutputRange output_range() const override { return inner_.output_range(); }

    std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
    void reset() { count_.store(0, std::memory_order_relaxed); }

private:
    const Oracle& inner_;
    mutable std::atomic<std::uint64_t> count_{0};
};

// Envelope of oracles bracketing a partially identified predictor.
struct BoundedOracle {
    std::shared_ptr<const Oracle> f_min;
    std::shared_ptr<const Oracle> f_max;
};

} // namespace rely
