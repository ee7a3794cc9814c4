// Acceptance suite: runs each release criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any criterion
// fails; dataset-gated criteria report SKIP when their input is absent.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "atucker/generators.hpp"
#include "atucker/harness.hpp"
#include "atucker/instrumentation.hpp"
#include "atucker/selector_io.hpp"
#include "atucker/sthosvd.hpp"
#include "atucker/tensor_io.hpp"

#include "oracles.hpp"

using namespace atucker;

namespace {

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

Outcome pass(std::string detail = "") { return {true, false, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, false, std::move(detail)}; }
Outcome skip(std::string detail) { return {true, true, std::move(detail)}; }

DenseTensor random_signed(std::vector<std::size_t> dims, std::uint64_t seed) {
    DenseTensor x(std::move(dims));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = g(rng);
    return x;
}

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    DenseMatrix m(rows, cols);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// --- criterion 1: matricization-free kernels match the explicit oracle ------
// The oracle is the literal matricize -> backend GEMM -> tensorize route; the
// unit suite separately checks matricize and the kernels against fully
// independent index-walk/triple-loop oracles on smaller shapes.
Outcome kernel_equivalence() {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t order = 3 + rep % 2;
        DenseTensor x(oracles::random_dims(rng, order, 2, 20));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);
        for (std::size_t n = 0; n < order; ++n) {
            const std::size_t r = 1 + rng() % x.dim(n);
            DenseMatrix m = random_matrix(r, x.dim(n), rng());
            std::vector<std::size_t> out_dims = x.dims();
            out_dims[n] = r;
            const DenseTensor ttm_oracle =
                tensorize(linalg::gemm(m, matricize(x, n)), out_dims, n);
            worst = std::max(worst, oracles::max_abs_diff(kernels::ttm(x, m, n), ttm_oracle));

            DenseTensor y(out_dims);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = u(rng);
            const DenseMatrix ttt_oracle =
                linalg::gemm(matricize(x, n), matricize(y, n), false, true);
            worst = std::max(worst,
                             oracles::max_abs_diff(kernels::ttt_mode(x, y, n), ttt_oracle));

            const DenseMatrix gram_oracle =
                linalg::gemm(matricize(x, n), matricize(x, n), false, true);
            worst = std::max(worst, oracles::max_abs_diff(kernels::gram(x, n), gram_oracle));
        }
    }
    if (worst > 1e-12)
        return fail("max abs deviation " + fmt(worst) +
                    " (gram entries reach ~J/3 ~ 2.7e3 at this shape cap, where 1e-12 is ~2 ulps;"
                    " the gap is summation-order rounding between two double-precision routes)");
    return pass("200 tensors, max abs deviation " + fmt(worst));
}

// --- criterion 2: GEMM call counts follow the loop regimes ------------------
Outcome loop_regimes() {
    std::mt19937_64 rng(1002);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t order = 3 + rep % 2;
        const auto dims = oracles::random_dims(rng, order, 2, 9);
        DenseTensor x = random_signed(dims, rng());
        for (std::size_t n = 0; n < order; ++n) {
            std::size_t outer = 1;
            for (std::size_t m = n + 1; m < order; ++m) outer *= dims[m];
            const long long expected =
                (n == 0 || n + 1 == order) ? 1 : static_cast<long long>(outer);
            DenseMatrix u = random_matrix(3, x.dim(n), rng());

            instr::reset_gemm_counters();
            kernels::ttm(x, u, n);
            if (instr::gemm_calls() != expected)
                return fail("ttm mode " + std::to_string(n) + ": " +
                            std::to_string(instr::gemm_calls()) + " calls, expected " +
                            std::to_string(expected));

            instr::reset_gemm_counters();
            kernels::gram(x, n);
            if (instr::gemm_calls() != expected)
                return fail("gram mode " + std::to_string(n) + " call count mismatch");
        }
    }
    return pass("20 shapes, single-GEMM edges and O_n-GEMM interior");
}

// --- criterion 3: orthonormal factors everywhere ----------------------------
Outcome orthonormality() {
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    std::vector<Strategy> strategies = {Strategy::fixed_eig(), Strategy::fixed_als(),
                                        Strategy::fixed_svd(), Strategy::cost_model(),
                                        Strategy::manual({SolverKind::Als, SolverKind::Eig,
                                                          SolverKind::Als})};
    for (int rep = 0; rep < 10; ++rep) {
        DenseTensor x = random_signed(oracles::random_dims(rng, 3, 8, 16), rng());
        std::vector<std::size_t> ranks;
        for (std::size_t d : x.dims()) ranks.push_back(std::max<std::size_t>(2, d / 2));
        for (const Strategy& s : strategies) {
            AlsOptions opts;
            opts.seed = rng();
            SthosvdResult res = sthosvd(x, ranks, s, opts);
            for (const DenseMatrix& f : res.decomposition.factors)
                worst = std::max(worst, oracles::orthonormality_defect(f));
        }
    }
    if (worst > 1e-10) return fail("worst ||U^T U - I||_max = " + fmt(worst));
    return pass("worst ||U^T U - I||_max = " + fmt(worst));
}

// --- criterion 4: exact-rank recovery across the whole strategy space -------
Outcome exact_rank_recovery() {
    DenseTensor x = synth_lowrank({20, 30, 40}, {5, 6, 7}, 4001);
    const std::vector<std::size_t> ranks = {5, 6, 7};
    std::vector<Strategy> strategies = {Strategy::fixed_eig(), Strategy::fixed_als(),
                                        Strategy::fixed_svd(), Strategy::cost_model()};
    for (std::size_t mask = 0; mask < 8; ++mask) {
        std::vector<SolverKind> choices;
        for (std::size_t n = 0; n < 3; ++n)
            choices.push_back((mask >> n) & 1 ? SolverKind::Als : SolverKind::Eig);
        strategies.push_back(Strategy::manual(std::move(choices)));
    }
    double worst = 0.0;
    for (const Strategy& s : strategies) {
        AlsOptions opts;
        opts.seed = 5;
        const double err = relative_error(x, sthosvd(x, ranks, s, opts).decomposition);
        worst = std::max(worst, err);
        if (err > 1e-8) return fail(s.name() + " error " + fmt(err));
    }
    return pass("12 strategies, worst error " + fmt(worst));
}

// --- criterion 5: eig/als/svd error agreement --------------------------------
Outcome solver_agreement() {
    std::mt19937_64 rng(1005);
    double worst_ea = 0.0, worst_es = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        DenseTensor x = random_signed({30, 30, 30}, rng());
        const std::vector<std::size_t> ranks = {10, 10, 10};
        AlsOptions opts;
        opts.seed = rng();
        const double e_eig = relative_error(x, sthosvd(x, ranks, Strategy::fixed_eig()).decomposition);
        const double e_als =
            relative_error(x, sthosvd(x, ranks, Strategy::fixed_als(), opts).decomposition);
        const double e_svd = relative_error(x, sthosvd(x, ranks, Strategy::fixed_svd()).decomposition);
        worst_ea = std::max(worst_ea, std::abs(e_eig - e_als));
        worst_es = std::max(worst_es, std::abs(e_eig - e_svd));
    }
    if (worst_ea > 0.01) return fail("|eig - als| = " + fmt(worst_ea));
    if (worst_es > 1e-9) return fail("|eig - svd| = " + fmt(worst_es));
    return pass("|eig-als| <= " + fmt(worst_ea) + ", |eig-svd| <= " + fmt(worst_es));
}

// --- criterion 6: ALS objective monotonicity ---------------------------------
Outcome als_monotonicity() {
    std::mt19937_64 rng(1006);
    for (int rep = 0; rep < 20; ++rep) {
        DenseTensor x = random_signed(oracles::random_dims(rng, 3, 6, 12), rng());
        for (std::size_t n = 0; n < 3; ++n) {
            const std::size_t r = std::max<std::size_t>(2, x.dim(n) / 2);
            DenseMatrix l0 = random_matrix(x.dim(n), r, rng());
            std::vector<double> objectives;
            als_iterate(x, n, l0, AlsOptions{},
                        [&](const DenseMatrix& l, const DenseTensor& rfac) {
                            objectives.push_back(oracles::fit_objective(x, l, rfac, n));
                        });
            for (std::size_t k = 1; k < objectives.size(); ++k) {
                if (objectives[k] > objectives[k - 1] + 1e-9)
                    return fail("objective rose at case " + std::to_string(rep) + " mode " +
                                std::to_string(n) + ": " + fmt(objectives[k - 1]) + " -> " +
                                fmt(objectives[k]));
            }
        }
    }
    return pass("20 cases, all modes, 5 iterations each");
}

// --- criterion 7: cost formulas and the instrumented flop counter ------------
Outcome cost_formulas() {
    if (selector::cost_eig(10, 2, 100) != 23000.0)
        return fail("cost_eig(10,2,100) = " + fmt(selector::cost_eig(10, 2, 100)));
    const double als_ref = 49834.0 + 2.0 / 3.0;
    if (std::abs(selector::cost_als(10, 2, 100) - als_ref) > 1e-9)
        return fail("cost_als(10,2,100) = " + fmt(selector::cost_als(10, 2, 100)));

    std::mt19937_64 rng(1007);
    for (int rep = 0; rep < 10; ++rep) {
        const auto dims = oracles::random_dims(rng, 3, 3, 8);
        DenseTensor x = random_signed(dims, rng());
        const std::size_t n = rep % 3;
        const long long i = static_cast<long long>(dims[n]);
        long long j = 1;
        for (std::size_t m = 0; m < 3; ++m)
            if (m != n) j *= static_cast<long long>(dims[m]);
        const long long r = 1 + static_cast<long long>(rng() % dims[n]);

        instr::reset_gemm_counters();
        eig_mode_solver(x, n, static_cast<std::size_t>(r));
        const long long eig_expected = i * i * j + 2 * i * r * j;
        if (instr::gemm_flops() != eig_expected)
            return fail("eig flops " + std::to_string(instr::gemm_flops()) + " != " +
                        std::to_string(eig_expected));

        AlsOptions opts;
        opts.seed = rng();
        instr::reset_gemm_counters();
        als_mode_solver(x, n, static_cast<std::size_t>(r), opts);
        const long long als_expected =
            5 * (4 * i * j * r + 4 * j * r * r + 4 * i * r * r) + 2 * j * r * r;
        if (instr::gemm_flops() != als_expected)
            return fail("als flops " + std::to_string(instr::gemm_flops()) + " != " +
                        std::to_string(als_expected));
    }
    return pass("formulas exact; counter matches on 10 cases");
}

// --- criterion 8: feature extraction -----------------------------------------
Outcome feature_extraction() {
    const selector::FeatureVector f = selector::extract_features(100, 20, 5000);
    const double expect[] = {100, 20, 5000, 10000, 400, 2000, 4.0, 0.08, 0.02, 0.004};
    for (std::size_t k = 0; k < 10; ++k) {
        if (std::abs(f[k] - expect[k]) > 1e-12)
            return fail("feature " + std::to_string(k) + " = " + fmt(f[k]));
    }
    return pass("(100,20,5000) vector exact");
}

// --- criterion 9: trainer sanity ----------------------------------------------
Outcome trainer_sanity() {
    using selector::TrainingSample;

    std::vector<TrainingSample> separable;
    for (int k = 0; k < 10; ++k) {
        TrainingSample a, b;
        a.features = selector::extract_features(100, 5.0 + k, 2000);
        a.label = 0;
        a.time_eig = 1.0;
        a.time_als = 2.0;
        b.features = selector::extract_features(100, 30.0 + k, 2000);
        b.label = 1;
        b.time_eig = 2.0;
        b.time_als = 1.0;
        separable.push_back(a);
        separable.push_back(b);
    }
    selector::TrainOptions depth1;
    depth1.max_depth_hi = 1;
    const selector::DecisionTreeModel m1 = selector::train(separable, depth1);
    if (m1.cv_accuracy != 1.0 || m1.max_depth != 1)
        return fail("separable data: cv accuracy " + fmt(m1.cv_accuracy));

    std::vector<TrainingSample> xors;
    for (int rep = 0; rep < 10; ++rep)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                TrainingSample s;
                s.features[0] = a;
                s.features[1] = b;
                s.label = a ^ b;
                s.time_eig = s.label == 0 ? 1.0 : 2.0;
                s.time_als = s.label == 0 ? 2.0 : 1.0;
                xors.push_back(s);
            }
    const selector::DecisionTreeModel m2 = selector::train(xors, {});
    if (m2.max_depth < 2) return fail("xor data settled at depth " + std::to_string(m2.max_depth));
    std::size_t correct = 0;
    for (const TrainingSample& s : xors)
        if ((selector::predict(m2, s.features) == SolverKind::Als ? 1 : 0) == s.label) ++correct;
    const double xor_acc = static_cast<double>(correct) / static_cast<double>(xors.size());
    if (xor_acc < 0.95) return fail("xor accuracy " + fmt(xor_acc));

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "atucker_acceptance";
    fs::create_directories(dir);
    const std::string path = (dir / "model.json").string();
    selector::save_model(m2, path);
    const selector::DecisionTreeModel loaded = selector::load_model(path);
    std::mt19937_64 rng(1009);
    std::uniform_real_distribution<double> u(1.0, 500.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const selector::FeatureVector f = selector::extract_features(
            std::floor(u(rng)), std::floor(u(rng)), std::floor(u(rng)));
        if (selector::predict(m2, f) != selector::predict(loaded, f))
            return fail("round-trip prediction drift");
    }
    fs::remove_all(dir);
    return pass("cv=1.0 at depth 1; xor acc " + fmt(xor_acc) + "; 1000 round-trip predictions");
}

// --- criterion 10: end-to-end adaptive pipeline -------------------------------
Outcome adaptive_pipeline() {
    harness::GenConfig cfg;
    cfg.sample_count = 1050;
    cfg.dim_lo = 10;
    cfg.dim_hi = 200;
    cfg.seed = 20250810;
    cfg.repeats = 3;

    const harness::GenResult gen = harness::generate_samples(cfg);
    if (gen.samples.size() < 1000)
        return fail("only " + std::to_string(gen.samples.size()) + " samples generated");

    std::vector<selector::TrainingSample> usable;
    for (const selector::TrainingSample& s : gen.samples)
        if (!s.tie) usable.push_back(s);
    if (usable.size() < 500) return fail("tie exclusion left too few samples");

    auto [train_set, test_set] = harness::split_samples(usable, 0.7, 7);
    selector::TrainOptions opts;
    opts.seed = 11;
    const selector::DecisionTreeModel model = selector::train(train_set, opts);
    const harness::EvalReport eval = harness::evaluate_model(model, test_set);
    if (eval.accuracy < 0.85)
        return fail("held-out accuracy " + fmt(eval.accuracy) + " < 0.85 (" +
                    std::to_string(test_set.size()) + " samples)");
    if (eval.mean_regret > 1.2) return fail("mean regret " + fmt(eval.mean_regret));

    // fresh tensors, never seen by training
    std::mt19937_64 rng(987654);
    std::vector<harness::BenchCase> cases;
    for (int k = 0; k < 50; ++k) {
        harness::BenchCase c;
        c.name = "fresh" + std::to_string(k);
        c.dims = oracles::random_dims(rng, 3, 10, 200);
        for (std::size_t d : c.dims) {
            const std::size_t hi = std::max<std::size_t>(1, d / 2);
            const std::size_t lo = std::min<std::size_t>(10, hi);
            c.ranks.push_back(lo + (hi > lo ? rng() % (hi - lo + 1) : 0));
        }
        c.seed = rng();
        cases.push_back(std::move(c));
    }
    // median of 5 repeats: the smallest cases finish in microseconds, where a
    // 10% band sits inside scheduler noise at 3 repeats
    const harness::BenchReport bench = harness::bench_compare(
        cases, {Strategy::adaptive(model), Strategy::fixed_eig(), Strategy::fixed_als()},
        AlsOptions{}, 5);
    if (bench.cases_ok != 50) return fail("bench completed only " +
                                          std::to_string(bench.cases_ok) + " cases");
    if (bench.frac_within_10pct_of_best_fixed < 0.80)
        return fail("adaptive within 10% of best fixed in only " +
                    fmt(100.0 * bench.frac_within_10pct_of_best_fixed) + "% of cases");
    return pass("accuracy " + fmt(eval.accuracy) + ", mean regret " + fmt(eval.mean_regret) +
                ", within-10% fraction " + fmt(bench.frac_within_10pct_of_best_fixed) + " (" +
                std::to_string(usable.size()) + " usable samples)");
}

// --- criterion 11: selector overhead ------------------------------------------
Outcome selector_overhead() {
    std::vector<selector::TrainingSample> samples;
    for (int k = 0; k < 40; ++k) {
        selector::TrainingSample s;
        s.features = selector::extract_features(20.0 + k, 4.0 + k % 7, 400.0 + 13 * k);
        s.label = k % 2;
        s.time_eig = s.label == 0 ? 1.0 : 2.0;
        s.time_als = s.label == 0 ? 2.0 : 1.0;
        samples.push_back(s);
    }
    const selector::DecisionTreeModel model = selector::train(samples, {});

    const auto t0 = std::chrono::steady_clock::now();
    volatile int sink = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const selector::FeatureVector f =
            selector::extract_features(100.0 + rep % 50, 10.0 + rep % 9, 5000.0 + rep);
        sink = sink + (selector::predict(model, f) == SolverKind::Als ? 1 : 0);
    }
    const double per_call =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 1000.0;
    if (per_call >= 1e-3) return fail("extract+predict " + fmt(per_call * 1e3) + " ms per call");

    // the driver reports the decision time separately from the solve time
    DenseTensor x = random_signed({12, 10, 8}, 1011);
    SthosvdResult res = sthosvd(x, {4, 4, 4}, Strategy::adaptive(model));
    for (const ModeReport& r : res.reports) {
        if (r.selector_decision_time < 0.0 || r.selector_decision_time >= 1e-3)
            return fail("reported decision time " + fmt(r.selector_decision_time) + " s");
    }
    return pass("extract+predict " + fmt(per_call * 1e6) + " us per mode");
}

// --- criterion 12: memory discipline -------------------------------------------
Outcome memory_discipline() {
    DenseTensor x = random_signed({24, 20, 16}, 1012);
    const std::vector<std::size_t> ranks = {8, 8, 8};

    {
        instr::AllocScope scope(x.size());
        sthosvd(x, ranks, Strategy::fixed_eig());
        if (scope.stats().peak_watched != 1)
            return fail("eig run held " + std::to_string(scope.stats().peak_watched) +
                        " full-size buffers, expected the work tensor only");
    }
    {
        instr::AllocScope scope(x.size());
        AlsOptions opts;
        opts.seed = 3;
        sthosvd(x, ranks, Strategy::fixed_als(), opts);
        if (scope.stats().peak_watched != 1)
            return fail("als run held " + std::to_string(scope.stats().peak_watched) +
                        " full-size buffers");
    }
    long long explicit_peak = 0;
    {
        instr::AllocScope scope(x.size());
        sthosvd(x, ranks, Strategy::fixed_svd());  // explicit-matricization path
        explicit_peak = scope.stats().peak_watched;
        if (explicit_peak < 2)
            return fail("explicit path did not materialize an unfolding");
    }
    return pass("matricization-free peak 1 full-size buffer; explicit path peak " +
                std::to_string(explicit_peak));
}

// --- criterion 13: optional MNIST check -----------------------------------------
Outcome mnist_check() {
    const char* env = std::getenv("ATUCKER_MNIST");
    std::string path = env ? env : "data/mnist_784x5000x10.dten";
    if (!std::filesystem::exists(path))
        return skip("dataset not present (set ATUCKER_MNIST to a 784x5000x10 .dten)");
    DenseTensor x = read_dten(path);
    if (x.dims() != std::vector<std::size_t>{784, 5000, 10})
        return fail("dataset has unexpected dims");
    const double err =
        relative_error(x, sthosvd(x, {65, 142, 10}, Strategy::fixed_eig()).decomposition);
    if (std::abs(err - 0.213) > 0.005) return fail("relative error " + fmt(err));
    return pass("relative error " + fmt(err));
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 = unbudgeted
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "kernel equivalence vs explicit oracle", 30.0, kernel_equivalence},
        {2, "loop-regime GEMM call structure", 5.0, loop_regimes},
        {3, "factor orthonormality across solvers", 0.0, orthonormality},
        {4, "exact-rank recovery for all strategies", 10.0, exact_rank_recovery},
        {5, "solver error agreement", 60.0, solver_agreement},
        {6, "ALS objective monotonicity", 0.0, als_monotonicity},
        {7, "cost formulas and flop counter", 0.0, cost_formulas},
        {8, "feature extraction", 0.0, feature_extraction},
        {9, "trainer sanity and model round-trip", 0.0, trainer_sanity},
        {10, "end-to-end adaptive pipeline", 1800.0, adaptive_pipeline},
        {11, "selector overhead", 0.0, selector_overhead},
        {12, "memory discipline", 0.0, memory_discipline},
        {13, "MNIST reference error (dataset-gated)", 0.0, mnist_check},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = fail(std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (out.pass && c.budget_s > 0.0 && elapsed > c.budget_s)
            out = fail("runtime " + fmt(elapsed) + " s exceeds the " + fmt(c.budget_s) +
                       " s budget");
        const char* verdict = out.skipped ? "SKIP" : (out.pass ? "PASS" : "FAIL");
        std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n", verdict, c.id, c.name, elapsed,
                    out.detail.empty() ? "" : " -- ", out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
