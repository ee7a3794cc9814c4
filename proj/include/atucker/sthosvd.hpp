#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "atucker/errors.hpp"
#include "atucker/kernels.hpp"
#include "atucker/selector.hpp"
#include "atucker/solvers.hpp"
#include "atucker/tensor.hpp"

namespace atucker {

/// Core tensor plus one orthonormal-column factor per mode.
struct TuckerDecomposition {
    DenseTensor core;
    std::vector<DenseMatrix> factors;
    std::vector<std::size_t> original_dims;
};

/// Per-mode trace of one st-HOSVD run.
struct ModeReport {
    std::size_t mode = 0;  // zero-based
    SolverKind solver_used = SolverKind::Eig;
    double selector_decision_time = 0.0;  // seconds
    double solver_time = 0.0;             // seconds
    double predicted_cost_eig = 0.0;
    double predicted_cost_als = 0.0;
    std::vector<std::size_t> dims_before;
    std::vector<std::size_t> dims_after;
};

/// How the driver picks the per-mode solver. Adaptive consults a trained
/// decision tree, CostModel compares the flop formulas, the Fixed* variants
/// always use one solver, and Manual spells out all N choices.
class Strategy {
public:
    enum class Kind { Adaptive, CostModel, FixedEig, FixedAls, FixedSvd, Manual };

    static Strategy adaptive(selector::DecisionTreeModel model) {
        Strategy s(Kind::Adaptive);
        s.model_ = std::move(model);
        return s;
    }
    static Strategy cost_model() { return Strategy(Kind::CostModel); }
    static Strategy fixed_eig() { return Strategy(Kind::FixedEig); }
    static Strategy fixed_als() { return Strategy(Kind::FixedAls); }
    static Strategy fixed_svd() { return Strategy(Kind::FixedSvd); }
    static Strategy manual(std::vector<SolverKind> choices) {
        for (SolverKind c : choices)
            if (c == SolverKind::Svd) throw Error("manual strategies choose between eig and als");
        Strategy s(Kind::Manual);
        s.choices_ = std::move(choices);
        return s;
    }

    Kind kind() const { return kind_; }
    const std::vector<SolverKind>& choices() const { return choices_; }
    const selector::DecisionTreeModel& model() const { return model_; }

    SolverKind decide(std::size_t mode, std::size_t i, std::size_t r, std::size_t j,
                      const selector::CostModelParams& params) const {
        switch (kind_) {
            case Kind::Adaptive:
                return selector::predict(model_, selector::extract_features(
                                                     static_cast<double>(i), static_cast<double>(r),
                                                     static_cast<double>(j)));
            case Kind::CostModel:
                return selector::heuristic_choice(static_cast<double>(i), static_cast<double>(r),
                                                  static_cast<double>(j), params);
            case Kind::FixedEig: return SolverKind::Eig;
            case Kind::FixedAls: return SolverKind::Als;
            case Kind::FixedSvd: return SolverKind::Svd;
            case Kind::Manual: return choices_.at(mode);
        }
        return SolverKind::Eig;
    }

    std::string name() const {
        switch (kind_) {
            case Kind::Adaptive: return "adaptive";
            case Kind::CostModel: return "costmodel";
            case Kind::FixedEig: return "eig";
            case Kind::FixedAls: return "als";
            case Kind::FixedSvd: return "svd";
            case Kind::Manual: {
                std::string s = "manual:";
                for (std::size_t n = 0; n < choices_.size(); ++n) {
                    if (n) s += ',';
                    s += choices_[n] == SolverKind::Eig ? 'e' : 'a';
                }
                return s;
            }
        }
        return "eig";
    }

private:
    explicit Strategy(Kind k) : kind_(k) {}

    Kind kind_;
    selector::DecisionTreeModel model_;
    std::vector<SolverKind> choices_;
};

struct SthosvdResult {
    TuckerDecomposition decomposition;
    std::vector<ModeReport> reports;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Sequentially truncated HOSVD with a per-mode solver switch: walks modes in
/// ascending order, asks the strategy for a solver given the current
/// (already shrunk) shape, and replaces the work tensor with the solver's
/// shrunk output. The final work tensor is the core.
inline SthosvdResult sthosvd(const DenseTensor& x, const std::vector<std::size_t>& ranks,
                             const Strategy& strategy, const AlsOptions& opts = {}) {
    const std::size_t order = x.order();
    if (ranks.size() != order)
        throw RankExceedsDim("expected " + std::to_string(order) + " truncations, got " +
                             std::to_string(ranks.size()));
    for (std::size_t n = 0; n < order; ++n) {
        if (ranks[n] < 1 || ranks[n] > x.dim(n))
            throw RankExceedsDim("truncation " + std::to_string(ranks[n]) +
                                 " invalid for mode " + std::to_string(n) + " of dimension " +
                                 std::to_string(x.dim(n)));
    }
    if (strategy.kind() == Strategy::Kind::Manual && strategy.choices().size() != order)
        throw Error("manual strategy must choose a solver for each of the " +
                    std::to_string(order) + " modes");

    const selector::CostModelParams cost_params{opts.num_iters};
    SthosvdResult result;
    result.decomposition.original_dims = x.dims();
    result.decomposition.factors.resize(order);

    DenseTensor work = x;  // the shrinking work tensor
    for (std::size_t n = 0; n < order; ++n) {
        const std::size_t i = work.dim(n);
        const std::size_t r = ranks[n];
        std::size_t j = 1;
        for (std::size_t m = 0; m < order; ++m)
            if (m != n) j *= work.dim(m);

        ModeReport report;
        report.mode = n;
        report.dims_before = work.dims();
        report.predicted_cost_eig = selector::cost_eig(static_cast<double>(i),
                                                       static_cast<double>(r),
                                                       static_cast<double>(j), cost_params);
        report.predicted_cost_als = selector::cost_als(static_cast<double>(i),
                                                       static_cast<double>(r),
                                                       static_cast<double>(j), cost_params);

        const auto t_decide = std::chrono::steady_clock::now();
        const SolverKind choice = strategy.decide(n, i, r, j, cost_params);
        report.selector_decision_time = detail::seconds_since(t_decide);

        const auto t_solve = std::chrono::steady_clock::now();
        ModeResult mode_result;
        try {
            switch (choice) {
                case SolverKind::Eig: mode_result = eig_mode_solver(work, n, r); break;
                case SolverKind::Als: mode_result = als_mode_solver(work, n, r, opts); break;
                case SolverKind::Svd: mode_result = svd_mode_solver(work, n, r); break;
            }
        } catch (const NotSPD& e) {
            throw NotSPD("mode " + std::to_string(n + 1) + ": " + e.what());
        } catch (const NoConvergence& e) {
            throw NoConvergence("mode " + std::to_string(n + 1) + ": " + e.what());
        } catch (const Error& e) {
            throw Error("mode " + std::to_string(n + 1) + ": " + e.what());
        }
        report.solver_time = detail::seconds_since(t_solve);
        report.solver_used = mode_result.solver_used;

        result.decomposition.factors[n] = std::move(mode_result.factor);
        work = std::move(mode_result.shrunk);
        report.dims_after = work.dims();
        result.reports.push_back(std::move(report));
    }
    result.decomposition.core = std::move(work);
    return result;
}

/// Expands a decomposition back to a full tensor: core x_1 U^(1) ... x_N U^(N).
inline DenseTensor reconstruct(const TuckerDecomposition& t) {
    const std::size_t order = t.core.order();
    if (t.factors.size() != order || t.original_dims.size() != order)
        throw ShapeMismatch("decomposition has inconsistent order");
    DenseTensor y = t.core;
    for (std::size_t n = 0; n < order; ++n) {
        if (t.factors[n].rows() != t.original_dims[n] || t.factors[n].cols() != y.dim(n))
            throw ShapeMismatch("factor " + std::to_string(n + 1) +
                                " does not match the core and original dims");
        y = kernels::ttm(y, t.factors[n], n);
    }
    return y;
}

/// ||X_hat - X||_F / ||X||_F with X_hat the reconstruction of `t`.
inline double relative_error(const DenseTensor& x, const TuckerDecomposition& t) {
    const double norm_x = frobenius_norm(x);
    if (norm_x == 0.0) throw ZeroNormInput("relative error is undefined for a zero tensor");
    const DenseTensor x_hat = reconstruct(t);
    if (x_hat.dims() != x.dims()) throw ShapeMismatch("reconstruction shape differs from input");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x_hat[i] - x[i];
        s += d * d;
    }
    return std::sqrt(s) / norm_x;
}

}  // namespace atucker
