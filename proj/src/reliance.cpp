#include "rely/reliance.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "rely/errors.hpp"
#include "rely/rng.hpp"
#include "rely/text_format.hpp"

namespace rely {

namespace {

// Rows per reduction block.  Partial sums are always combined in block
// order, which keeps results bit-identical for every worker count.
constexpr std::size_t kRowBlock = 64;

std::size_t resolve_threads(std::size_t threads) {
    if (threads != 0) return threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Sums range_sum(lo, hi) over fixed row blocks, fanning blocks out across
// workers, then combines the per-block partials sequentially.
double blocked_row_sum(std::size_t n, std::size_t threads,
                       const std::function<double(std::size_t, std::size_t)>& range_sum) {
    if (n == 0) return 0.0;
    const std::size_t n_blocks = (n + kRowBlock - 1) / kRowBlock;
    threads = std::min(resolve_threads(threads), n_blocks);
    std::vector<double> partial(n_blocks, 0.0);

    auto run_blocks = [&](std::size_t first, std::size_t stride) {
        for (std::size_t b = first; b < n_blocks; b += stride) {
            std::size_t lo = b * kRowBlock;
            std::size_t hi = std::min(n, lo + kRowBlock);
            partial[b] = range_sum(lo, hi);
        }
    };

    if (threads <= 1) {
        run_blocks(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::mutex error_mutex;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    run_blocks(t, threads);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    double sum = 0.0;
    for (double p : partial) sum += p;
    return sum;
}

// Where one oracle input comes from during a spliced evaluation.
struct InputSource {
    bool from_x1 = false;
    std::size_t x1_pos = 0;          // position in the x1 tuple when from_x1
    const double* column = nullptr;  // base-row column otherwise
};

// Precomputed evaluation context for one (data, oracle, loss, partition).
struct EvalPlan {
    const Dataset* data = nullptr;
    const Oracle* oracle = nullptr;
    LossSpec loss;
    std::size_t n = 0;
    std::vector<InputSource> sources;    // one per oracle input column
    std::vector<std::size_t> x1_cols;    // dataset column index per x1 position
    std::vector<const double*> x1_data;  // donor column per x1 position
    const double* y = nullptr;
    const double* p0 = nullptr;  // utility-loss risk columns, base row
    const double* p1 = nullptr;

    LossContext context(std::size_t i) const {
        LossContext ctx;
        if (p0) {
            ctx.p0 = p0[i];
            ctx.p1 = p1[i];
        }
        return ctx;
    }
};

EvalPlan make_plan(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                   const Partition& partition) {
    partition.validate(data.schema);
    loss.validate();

    EvalPlan plan;
    plan.data = &data;
    plan.oracle = &oracle;
    plan.loss = loss;
    plan.n = data.n_rows();

    for (const std::string& name : partition.x1_columns) {
        std::size_t idx = data.schema.index_of(name);
        plan.x1_cols.push_back(idx);
        plan.x1_data.push_back(data.column(idx).data());
    }

    std::set<std::string> x2_names(partition.x2_columns.begin(), partition.x2_columns.end());
    for (const std::string& name : oracle.input_columns()) {
        InputSource src;
        auto it = std::find(partition.x1_columns.begin(), partition.x1_columns.end(), name);
        if (it != partition.x1_columns.end()) {
            src.from_x1 = true;
            src.x1_pos = static_cast<std::size_t>(it - partition.x1_columns.begin());
        } else if (x2_names.count(name)) {
            src.column = data.column(name).data();
        } else {
            throw UsageError("oracle input column '" + name + "' is not in the partition");
        }
        plan.sources.push_back(src);
    }

    plan.y = data.column(partition.outcome).data();
    if (loss.kind == LossKind::utility) {
        plan.p0 = data.column(loss.risk_p0_column).data();
        plan.p1 = data.column(loss.risk_p1_column).data();
    }
    return plan;
}

// Prediction for base row i with x1 values taken from donor row j.  The
// baseline uses j = i.
double predict_pair(const EvalPlan& plan, std::vector<double>& buf, std::size_t i,
                    std::size_t j) {
    for (std::size_t k = 0; k < plan.sources.size(); ++k) {
        const InputSource& s = plan.sources[k];
        buf[k] = s.from_x1 ? plan.x1_data[s.x1_pos][j] : s.column[i];
    }
    double v = plan.oracle->predict(buf);
    if (!std::isfinite(v))
        throw NumericError("oracle returned a non-finite prediction for base row " +
                           std::to_string(i) + " with x1 from row " + std::to_string(j));
    return v;
}

// Prediction for base row i with x1 values taken from the given level tuple.
double predict_level(const EvalPlan& plan, std::vector<double>& buf, std::size_t i,
                     const double* tuple, std::size_t level_id) {
    for (std::size_t k = 0; k < plan.sources.size(); ++k) {
        const InputSource& s = plan.sources[k];
        buf[k] = s.from_x1 ? tuple[s.x1_pos] : s.column[i];
    }
    double v = plan.oracle->predict(buf);
    if (!std::isfinite(v))
        throw NumericError("oracle returned a non-finite prediction for base row " +
                           std::to_string(i) + " with x1 level " + std::to_string(level_id));
    return v;
}

double checked_loss(const EvalPlan& plan, double y, double pred, const LossContext& ctx,
                    std::size_t i) {
    double L = loss_value(plan.loss, y, pred, ctx);
    if (!std::isfinite(L))
        throw NumericError("loss is non-finite at base row " + std::to_string(i));
    return L;
}

// Distinct x1 (or x2) tuples, ascending in tuple order, with per-row level
// ids and per-level counts.
struct LevelIndex {
    std::size_t dims = 0;
    std::vector<double> tuples;          // |C| x dims, row-major
    std::vector<double> counts;          // rows per level
    std::vector<std::size_t> row_level;  // level id per row

    std::size_t size() const { return counts.size(); }
    const double* tuple(std::size_t c) const { return tuples.data() + c * dims; }
};

LevelIndex build_levels(const Dataset& data, const std::vector<std::size_t>& cols,
                        const std::string& real_kind_error) {
    for (std::size_t c : cols) {
        if (data.schema.at(c).kind == ColumnKind::real)
            throw UsageError("column '" + data.schema.at(c).name + "' " + real_kind_error);
    }
    const std::size_t n = data.n_rows();
    LevelIndex lv;
    lv.dims = cols.size();
    lv.row_level.resize(n);

    std::map<std::vector<double>, std::size_t> ids;
    std::vector<double> key(cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) key[k] = data.cell(i, cols[k]);
        ids.emplace(key, 0);
    }
    std::size_t next = 0;
    for (auto& kv : ids) kv.second = next++;
    lv.counts.assign(next, 0.0);
    lv.tuples.reserve(next * lv.dims);
    for (const auto& kv : ids)
        lv.tuples.insert(lv.tuples.end(), kv.first.begin(), kv.first.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) key[k] = data.cell(i, cols[k]);
        std::size_t id = ids.at(key);
        lv.row_level[i] = id;
        lv.counts[id] += 1.0;
    }
    return lv;
}

std::string render_value(const ColumnSchema& col, double v) {
    switch (col.kind) {
        case ColumnKind::categorical: {
            auto idx = static_cast<std::size_t>(v);
            return idx < col.levels.size() ? col.levels[idx] : format_double(v);
        }
        case ColumnKind::binary:
        case ColumnKind::count:
            return std::to_string(static_cast<long long>(std::llround(v)));
        case ColumnKind::real:
            return format_double(v);
    }
    return format_double(v);
}

std::string render_level_label(const Dataset& data, const std::vector<std::size_t>& cols,
                               const double* tuple) {
    std::vector<std::string> parts;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const ColumnSchema& cs = data.schema.at(cols[k]);
        parts.push_back(cs.name + "=" + render_value(cs, tuple[k]));
    }
    return join(parts, ", ");
}

void require_rows(std::size_t n, std::size_t need, const char* op) {
    if (n < need)
        throw UsageError(std::string(op) + " needs at least " + std::to_string(need) +
                         " rows, got " + std::to_string(n));
}

RelianceMethod pick_method(const Dataset& data, const Partition& partition,
                           RelianceMethod requested) {
    if (requested != RelianceMethod::automatic) return requested;
    for (const std::string& name : partition.x1_columns) {
        if (data.schema.at(data.schema.index_of(name)).kind == ColumnKind::real)
            return RelianceMethod::exhaustive;
    }
    return RelianceMethod::categorical;
}

constexpr const char* kX1RealError =
    "has real kind and no finite level set; use the exhaustive method";

// Sample quantile with linear interpolation between order statistics
// (type 7).  v must be sorted ascending and nonempty.
double quantile_type7(const std::vector<double>& v, double p) {
    if (v.empty()) throw UsageError("quantile of an empty sample");
    if (v.size() == 1) return v.front();
    double h = p * static_cast<double>(v.size() - 1);
    double lo = std::floor(h);
    auto k = static_cast<std::size_t>(lo);
    if (k + 1 >= v.size()) return v.back();
    return v[k] + (h - lo) * (v[k + 1] - v[k]);
}

struct ResampleDraws {
    std::vector<double> r;
    std::vector<double> b;
    std::size_t redraws = 0;
};

// Shared bootstrap engine.  Draws B row resamples; degenerate ones (fewer
// than 2 distinct rows, or a failed refit) are redrawn and counted.
ResampleDraws run_bootstrap(const Dataset& data, const LossSpec& loss,
                            const Partition& partition, std::size_t B, std::uint64_t seed,
                            bool refit, const FitterSpec* fitter, const Oracle* fixed_oracle,
                            const RelianceOptions& estimate) {
    const std::size_t n = data.n_rows();
    require_rows(n, 2, "bootstrap");
    SeededRng rng(seed);
    ResampleDraws out;
    out.r.reserve(B);
    out.b.reserve(B);
    std::vector<std::size_t> idx(n);

    for (std::size_t b = 0; b < B; ++b) {
        std::size_t attempts = 0;
        while (true) {
            if (++attempts > 1000)
                throw NumericError("bootstrap redrew 1000 consecutive degenerate resamples");
            for (std::size_t i = 0; i < n; ++i)
                idx[i] = static_cast<std::size_t>(rng.index(n));
            bool two_distinct = false;
            for (std::size_t i = 1; i < n; ++i) {
                if (idx[i] != idx[0]) {
                    two_distinct = true;
                    break;
                }
            }
            if (!two_distinct) {
                ++out.redraws;
                continue;
            }
            Dataset resample = gather_rows(data, idx);
            std::shared_ptr<const Oracle> fitted;
            const Oracle* oracle = fixed_oracle;
            if (refit) {
                try {
                    fitted = fitter->fit(resample, partition.outcome).oracle();
                } catch (const Error&) {
                    ++out.redraws;
                    continue;
                }
                oracle = fitted.get();
            }
            RelianceEstimate e = estimate_reliance(resample, *oracle, loss, partition, estimate);
            out.r.push_back(e.r_hat);
            out.b.push_back(e.b_hat);
            break;
        }
    }
    return out;
}

} // namespace

std::string reliance_method_name(RelianceMethod method) {
    switch (method) {
        case RelianceMethod::automatic: return "automatic";
        case RelianceMethod::exhaustive: return "exhaustive";
        case RelianceMethod::categorical: return "categorical";
    }
    return "?";
}

RelianceMethod reliance_method_from_name(const std::string& name) {
    if (name == "automatic") return RelianceMethod::automatic;
    if (name == "exhaustive") return RelianceMethod::exhaustive;
    if (name == "categorical") return RelianceMethod::categorical;
    throw UsageError("unknown reliance method '" + name +
                     "' (expected automatic, exhaustive or categorical)");
}

double reliance_exhaustive(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                           const Partition& partition, std::size_t threads) {
    EvalPlan plan = make_plan(data, oracle, loss, partition);
    require_rows(plan.n, 2, "reliance");
    const std::size_t n = plan.n;

    double sum = blocked_row_sum(n, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> buf(plan.sources.size());
        double block = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            LossContext ctx = plan.context(i);
            double yi = plan.y[i];
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double pred = predict_pair(plan, buf, i, j);
                row += checked_loss(plan, yi, pred, ctx, i);
            }
            block += row;
        }
        return block;
    });
    return sum / (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
}

double reliance_categorical(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                            const Partition& partition, std::size_t threads) {
    EvalPlan plan = make_plan(data, oracle, loss, partition);
    require_rows(plan.n, 2, "reliance");
    const std::size_t n = plan.n;
    LevelIndex lv = build_levels(data, plan.x1_cols, kX1RealError);
    const std::size_t C = lv.size();

    double sum = blocked_row_sum(n, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> buf(plan.sources.size());
        double block = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            LossContext ctx = plan.context(i);
            double yi = plan.y[i];
            std::size_t own = lv.row_level[i];
            double row = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                // The donor weight counts rows at this level other than i
                // itself.  The oracle is evaluated even at weight 0 so the
                // evaluation count is exactly n * |C|.
                double pred = predict_level(plan, buf, i, lv.tuple(c), c);
                double w = lv.counts[c] - (own == c ? 1.0 : 0.0);
                row += w * checked_loss(plan, yi, pred, ctx, i);
            }
            block += row;
        }
        return block;
    });
    return sum / (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
}

double baseline(const Dataset& data, const Oracle& oracle, const LossSpec& loss,
                const Partition& partition) {
    EvalPlan plan = make_plan(data, oracle, loss, partition);
    require_rows(plan.n, 1, "baseline");
    std::vector<double> buf(plan.sources.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < plan.n; ++i) {
        double pred = predict_pair(plan, buf, i, i);
        sum += checked_loss(plan, plan.y[i], pred, plan.context(i), i);
    }
    return sum / static_cast<double>(plan.n);
}

RelianceEstimate estimate_reliance(const Dataset& data, const Oracle& oracle,
                                   const LossSpec& loss, const Partition& partition,
                                   const RelianceOptions& options) {
    RelianceMethod method = pick_method(data, partition, options.method);
    RelianceEstimate est;
    est.r_hat = method == RelianceMethod::categorical
                    ? reliance_categorical(data, oracle, loss, partition, options.threads)
                    : reliance_exhaustive(data, oracle, loss, partition, options.threads);
    est.b_hat = baseline(data, oracle, loss, partition);
    est.normalized = est.r_hat - est.b_hat;
    est.n = data.n_rows();
    est.x1_columns = partition.x1_columns;
    est.loss = loss;
    est.method = method;
    return est;
}

RelianceInterval reliance_bounds(const Dataset& data, const BoundedOracle& envelope,
                                 const LossSpec& loss, const Partition& partition,
                                 const RelianceOptions& options) {
    if (!envelope.f_min || !envelope.f_max)
        throw UsageError("reliance bounds need both envelope oracles");
    if (loss.kind == LossKind::utility)
        throw UsageError("reliance bounds need a loss monotone in |y - yhat| "
                         "(square or cross_entropy)");
    EvalPlan pmin = make_plan(data, *envelope.f_min, loss, partition);
    EvalPlan pmax = make_plan(data, *envelope.f_max, loss, partition);
    require_rows(pmin.n, 2, "reliance bounds");
    const std::size_t n = pmin.n;
    for (std::size_t i = 0; i < n; ++i) {
        if (pmin.y[i] != 0.0 && pmin.y[i] != 1.0)
            throw UsageError("reliance bounds need a 0/1 outcome; row " + std::to_string(i) +
                             " has " + format_double(pmin.y[i]));
    }

    RelianceMethod method = pick_method(data, partition, options.method);
    // Separate accumulators for the lower and upper bound; both come from
    // the same pass structure, run once per bound to reuse the fixed-order
    // reduction.  Each pair keeps the smaller envelope loss for the lower
    // bound and the larger for the upper bound.
    auto pair_minmax = [&](std::vector<double>& buf, std::size_t i, double yi,
                           const LossContext& ctx, std::size_t j) {
        double vmin = predict_pair(pmin, buf, i, j);
        double vmax = predict_pair(pmax, buf, i, j);
        if (vmin > vmax)
            throw NumericError("envelope violated: f_min > f_max for base row " +
                               std::to_string(i) + ", donor row " + std::to_string(j));
        double a = checked_loss(pmin, yi, vmin, ctx, i);
        double b = checked_loss(pmax, yi, vmax, ctx, i);
        return std::pair<double, double>(std::min(a, b), std::max(a, b));
    };
    auto level_minmax = [&](std::vector<double>& buf, std::size_t i, double yi,
                            const LossContext& ctx, const double* tuple, std::size_t c) {
        double vmin = predict_level(pmin, buf, i, tuple, c);
        double vmax = predict_level(pmax, buf, i, tuple, c);
        if (vmin > vmax)
            throw NumericError("envelope violated: f_min > f_max for base row " +
                               std::to_string(i) + ", x1 level " + std::to_string(c));
        double a = checked_loss(pmin, yi, vmin, ctx, i);
        double b = checked_loss(pmax, yi, vmax, ctx, i);
        return std::pair<double, double>(std::min(a, b), std::max(a, b));
    };

    double sum_lo = 0.0, sum_hi = 0.0;
    if (method == RelianceMethod::categorical) {
        LevelIndex lv = build_levels(data, pmin.x1_cols, kX1RealError);
        const std::size_t C = lv.size();
        for (int which = 0; which < 2; ++which) {
            double s = blocked_row_sum(n, options.threads, [&](std::size_t lo, std::size_t hi) {
                std::vector<double> buf(pmin.sources.size());
                double block = 0.0;
                for (std::size_t i = lo; i < hi; ++i) {
                    LossContext ctx = pmin.context(i);
                    double yi = pmin.y[i];
                    std::size_t own = lv.row_level[i];
                    for (std::size_t c = 0; c < C; ++c) {
                        double w = lv.counts[c] - (own == c ? 1.0 : 0.0);
                        auto mm = level_minmax(buf, i, yi, ctx, lv.tuple(c), c);
                        block += w * (which == 0 ? mm.first : mm.second);
                    }
                }
                return block;
            });
            (which == 0 ? sum_lo : sum_hi) = s;
        }
    } else {
        for (int which = 0; which < 2; ++which) {
            double s = blocked_row_sum(n, options.threads, [&](std::size_t lo, std::size_t hi) {
                std::vector<double> buf(pmin.sources.size());
                double block = 0.0;
                for (std::size_t i = lo; i < hi; ++i) {
                    LossContext ctx = pmin.context(i);
                    double yi = pmin.y[i];
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        auto mm = pair_minmax(buf, i, yi, ctx, j);
                        block += which == 0 ? mm.first : mm.second;
                    }
                }
                return block;
            });
            (which == 0 ? sum_lo : sum_hi) = s;
        }
    }
    double denom = static_cast<double>(n) * (static_cast<double>(n) - 1.0);
    return {sum_lo / denom, sum_hi / denom};
}

WorstCaseReliance worst_case_reliance(const Dataset& data, const Oracle& oracle,
                                      const LossSpec& loss, const Partition& partition,
                                      const RelianceOptions& options) {
    EvalPlan plan = make_plan(data, oracle, loss, partition);
    require_rows(plan.n, 1, "worst-case reliance");
    const std::size_t n = plan.n;
    LevelIndex lv = build_levels(data, plan.x1_cols, kX1RealError);
    const std::size_t C = lv.size();

    WorstCaseReliance best;
    bool first = true;
    for (std::size_t c = 0; c < C; ++c) {
        double sum = blocked_row_sum(n, options.threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> buf(plan.sources.size());
            double block = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                double pred = predict_level(plan, buf, i, lv.tuple(c), c);
                block += checked_loss(plan, plan.y[i], pred, plan.context(i), i);
            }
            return block;
        });
        double mean = sum / static_cast<double>(n);
        // Strict comparison keeps the earliest level on ties.
        if (first || mean > best.r_sup) {
            first = false;
            best.r_sup = mean;
            best.level.assign(lv.tuple(c), lv.tuple(c) + lv.dims);
            best.level_label = render_level_label(data, plan.x1_cols, lv.tuple(c));
        }
    }
    return best;
}

ConditionalReliance conditional_reliance(const Dataset& data, const Oracle& oracle,
                                         const LossSpec& loss, const Partition& partition) {
    EvalPlan plan = make_plan(data, oracle, loss, partition);
    require_rows(plan.n, 2, "conditional reliance");
    const std::size_t n = plan.n;

    std::vector<std::size_t> x2_cols;
    for (const std::string& name : partition.x2_columns)
        x2_cols.push_back(data.schema.index_of(name));
    LevelIndex lv = build_levels(data, x2_cols,
                                 "has real kind; conditional reliance needs finite-support "
                                 "x2 columns");
    std::vector<std::vector<std::size_t>> members(lv.size());
    for (std::size_t i = 0; i < n; ++i) members[lv.row_level[i]].push_back(i);

    ConditionalReliance out;
    std::vector<double> buf(plan.sources.size());
    double sum = 0.0;
    for (const std::vector<std::size_t>& group : members) {
        if (group.size() < 2) {
            ++out.groups_dropped;
            out.rows_dropped += group.size();
            continue;
        }
        ++out.groups_retained;
        out.rows_retained += group.size();
        double inv = 1.0 / (static_cast<double>(group.size()) - 1.0);
        for (std::size_t i : group) {
            LossContext ctx = plan.context(i);
            double yi = plan.y[i];
            double donors = 0.0;
            for (std::size_t j : group) {
                if (j == i) continue;
                double pred = predict_pair(plan, buf, i, j);
                donors += checked_loss(plan, yi, pred, ctx, i);
            }
            sum += donors * inv;
        }
    }
    if (out.rows_retained == 0)
        throw DataError("every x2 group is a singleton; no within-group donor pairs exist");
    out.r_cond = sum / static_cast<double>(out.rows_retained);
    return out;
}

BootstrapResult bootstrap_reliance(const Dataset& data, const Oracle* oracle,
                                   const LossSpec& loss, const Partition& partition,
                                   const BootstrapOptions& options) {
    if (options.B < 1) throw UsageError("bootstrap needs B >= 1");
    if (!(options.alpha > 0.0 && options.alpha < 1.0))
        throw UsageError("bootstrap alpha must lie in (0, 1)");
    if (options.refit && !options.fitter)
        throw UsageError("refitting bootstrap needs a fitter specification");
    if (!options.refit && !oracle)
        throw UsageError("fixed-oracle bootstrap needs an oracle");

    std::shared_ptr<const Oracle> fitted;
    const Oracle* point_oracle = oracle;
    if (options.refit) {
        fitted = options.fitter->fit(data, partition.outcome).oracle();
        point_oracle = fitted.get();
    }

    BootstrapResult result;
    result.point = estimate_reliance(data, *point_oracle, loss, partition, options.estimate);
    result.B = options.B;

    ResampleDraws draws =
        run_bootstrap(data, loss, partition, options.B, options.seed, options.refit,
                      options.fitter, point_oracle, options.estimate);
    result.redraws = draws.redraws;

    std::vector<double> r_sorted = draws.r;
    std::sort(r_sorted.begin(), r_sorted.end());
    double a2 = options.alpha / 2.0;
    result.r_interval = {quantile_type7(r_sorted, a2), quantile_type7(r_sorted, 1.0 - a2)};

    std::vector<double> t_sorted(draws.r.size());
    for (std::size_t i = 0; i < draws.r.size(); ++i) t_sorted[i] = draws.r[i] - draws.b[i];
    std::sort(t_sorted.begin(), t_sorted.end());
    double t_hat = result.point.normalized;
    result.normalized_interval = {2.0 * t_hat - quantile_type7(t_sorted, 1.0 - a2),
                                  2.0 * t_hat - quantile_type7(t_sorted, a2)};
    return result;
}

ParityResult parity_test(const Dataset& data, const FitterSpec& fitter, const LossSpec& loss,
                         const Partition& partition, std::size_t B, std::uint64_t seed,
                         const RelianceOptions& estimate) {
    if (loss.kind != LossKind::square)
        throw UsageError("parity test requires square loss");
    if (B < 100) throw UsageError("parity test needs B >= 100, got " + std::to_string(B));
    require_rows(data.n_rows(), 20, "parity test");
    partition.validate(data.schema);

    FittedModel model = fitter.fit(data, partition.outcome);
    std::shared_ptr<const Oracle> oracle = model.oracle();
    RelianceEstimate point = estimate_reliance(data, *oracle, loss, partition, estimate);

    ParityResult result;
    result.statistic = point.normalized;
    result.B = B;
    for (const std::string& name : partition.x1_columns)
        if (std::find(fitter.covariates.begin(), fitter.covariates.end(), name) !=
            fitter.covariates.end())
            ++result.dof;
    if (result.dof == 0) {
        // The model never reads x1, so splicing cannot change predictions.
        result.p_value = 1.0;
        return result;
    }

    ResampleDraws draws =
        run_bootstrap(data, loss, partition, B, seed, true, &fitter, nullptr, estimate);
    result.redraws = draws.redraws;

    double mean = 0.0;
    for (std::size_t i = 0; i < B; ++i) mean += draws.r[i] - draws.b[i];
    mean /= static_cast<double>(B);
    double var = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        double d = draws.r[i] - draws.b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(B - 1);

    // Under parity the statistic is a nonnegative quadratic form whose mean
    // the bootstrap reproduces on top of the observed value, so mean(T*) - T
    // estimates the null mean c of T.  The spread-based recovery of c from
    // sd(chisq_d) = c * sqrt(2/d) is only a fallback for when the additive
    // estimate lands nonpositive: the resampled statistic also varies with
    // the observed effect, so the spread overstates c whenever the statistic
    // is large and would wreck both size and power if always mixed in.
    double d = static_cast<double>(result.dof);
    double c_raw = mean - result.statistic;
    double c_floor = std::sqrt(var) * std::sqrt(d / 2.0);
    double c_hat = c_raw > 0.0 ? c_raw : std::max(c_floor, 1e-300);
    result.null_scale = c_hat;

    if (result.statistic <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    double q = d * result.statistic / c_hat;
    if (!std::isfinite(q)) {
        result.p_value = 0.0;
        return result;
    }
    boost::math::chi_squared_distribution<double> chisq(d);
    result.p_value = boost::math::cdf(boost::math::complement(chisq, q));
    return result;
}

RankingReport rank_reliance(const std::vector<GroupInput>& groups, const LossSpec& loss,
                            const std::vector<std::vector<std::string>>& covariate_sets,
                            const RankOptions& options) {
    if (groups.empty()) throw UsageError("ranking needs at least one group");
    if (covariate_sets.empty()) throw UsageError("ranking needs at least one covariate set");
    {
        std::set<std::string> ids;
        for (const GroupInput& g : groups) {
            if (!g.data || !g.oracle)
                throw UsageError("ranking group '" + g.id + "' is missing data or an oracle");
            if (!ids.insert(g.id).second)
                throw UsageError("ranking group id '" + g.id + "' appears more than once");
        }
    }

    auto make_partition = [](const GroupInput& g, const std::vector<std::string>& set) {
        Partition p;
        p.x1_columns = set;
        p.outcome = g.data->schema.at(g.data->schema.outcome_index()).name;
        std::set<std::string> in_set(set.begin(), set.end());
        for (const std::string& name : g.oracle->input_columns())
            if (!in_set.count(name)) p.x2_columns.push_back(name);
        return p;
    };

    RankingReport report;
    report.covariate_sets = covariate_sets;
    for (const std::vector<std::string>& set : covariate_sets)
        report.set_labels.push_back(join(set, "+"));

    const std::size_t S = covariate_sets.size();
    for (const GroupInput& g : groups) {
        RankEntry entry;
        entry.group = g.id;
        entry.n = g.data->n_rows();
        for (std::size_t s = 0; s < S; ++s) {
            try {
                Partition p = make_partition(g, covariate_sets[s]);
                RelianceEstimate est =
                    estimate_reliance(*g.data, *g.oracle, loss, p, options.estimate);
                entry.r_hat.push_back(est.r_hat);
                entry.b_hat.push_back(est.b_hat);
                entry.normalized.push_back(est.normalized);
                entry.errors.emplace_back();
            } catch (const Error& e) {
                double nan = std::numeric_limits<double>::quiet_NaN();
                entry.r_hat.push_back(nan);
                entry.b_hat.push_back(nan);
                entry.normalized.push_back(nan);
                entry.errors.emplace_back(e.what());
            }
        }
        report.entries.push_back(std::move(entry));
    }

    auto order_ids = [](std::vector<std::pair<double, std::string>> scored) {
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::vector<std::string> ids;
        for (auto& p : scored) ids.push_back(std::move(p.second));
        return ids;
    };

    for (std::size_t s = 0; s < S; ++s) {
        std::vector<std::pair<double, std::string>> scored;
        for (const RankEntry& e : report.entries)
            if (e.ok(s)) scored.emplace_back(e.normalized[s], e.group);
        report.orderings.push_back(order_ids(std::move(scored)));
    }

    if (!options.validate_stacked) return report;

    // Stacked cross-distribution check.  Groups are aligned by row index;
    // unequal sizes are first resampled (seeded) to the largest size so the
    // alignment is well defined.  For each set and each focal group k, the
    // stacked reliance is computed literally: a pair loop over aligned rows
    // where the focal group's loss uses spliced x1 and every other group
    // contributes its unspliced loss, all inside the same sum.
    StackedValidation& val = report.validation;
    val.performed = true;

    std::vector<std::size_t> usable;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        bool ok = true;
        for (std::size_t s = 0; s < S; ++s)
            if (!report.entries[k].ok(s)) ok = false;
        if (ok) usable.push_back(k);
    }
    if (usable.empty()) {
        val.orderings_match = false;
        return report;
    }

    std::size_t m = 0;
    for (std::size_t k : usable) m = std::max(m, groups[k].data->n_rows());
    val.aligned_n = m;
    SeededRng rng(options.seed);
    std::vector<Dataset> aligned;
    aligned.reserve(usable.size());
    for (std::size_t k : usable) {
        const Dataset& src = *groups[k].data;
        if (src.n_rows() == m) {
            aligned.push_back(src);
        } else {
            val.resampled = true;
            std::vector<std::size_t> idx(m);
            for (std::size_t i = 0; i < m; ++i)
                idx[i] = static_cast<std::size_t>(rng.index(src.n_rows()));
            aligned.push_back(gather_rows(src, idx));
        }
    }

    for (std::size_t s = 0; s < S; ++s) {
        std::vector<EvalPlan> plans;
        std::vector<double> r_aligned(usable.size()), b_aligned(usable.size());
        for (std::size_t u = 0; u < usable.size(); ++u) {
            const GroupInput& g = groups[usable[u]];
            Partition p = make_partition(g, covariate_sets[s]);
            plans.push_back(make_plan(aligned[u], *g.oracle, loss, p));
            RelianceEstimate est =
                estimate_reliance(aligned[u], *g.oracle, loss, p, options.estimate);
            r_aligned[u] = est.r_hat;
            b_aligned[u] = est.b_hat;
        }

        std::vector<std::pair<double, std::string>> scored;
        for (std::size_t u = 0; u < usable.size(); ++u) {
            std::vector<std::vector<double>> bufs;
            for (const EvalPlan& p : plans) bufs.emplace_back(p.sources.size());
            double stacked = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    if (j == i) continue;
                    const EvalPlan& pk = plans[u];
                    double pred = predict_pair(pk, bufs[u], i, j);
                    double term = checked_loss(pk, pk.y[i], pred, pk.context(i), i);
                    for (std::size_t v = 0; v < plans.size(); ++v) {
                        if (v == u) continue;
                        const EvalPlan& pg = plans[v];
                        double base = predict_pair(pg, bufs[v], i, i);
                        term += checked_loss(pg, pg.y[i], base, pg.context(i), i);
                    }
                    stacked += term;
                }
            }
            stacked /= static_cast<double>(m) * (static_cast<double>(m) - 1.0);

            double rhs = r_aligned[u];
            for (std::size_t v = 0; v < usable.size(); ++v)
                if (v != u) rhs += b_aligned[v];
            val.max_abs_gap = std::max(val.max_abs_gap, std::fabs(stacked - rhs));
            scored.emplace_back(stacked, groups[usable[u]].id);
        }

        std::vector<std::string> stacked_order = order_ids(std::move(scored));
        if (stacked_order != report.orderings[s]) val.orderings_match = false;
    }
    return report;
}

} // namespace rely
