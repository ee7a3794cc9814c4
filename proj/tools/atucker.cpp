// atucker command-line tool: Tucker decomposition of dense .dten tensors with
// per-mode solver selection, plus the offline pipeline that benchmarks the
// solvers, trains the selector model and compares strategies.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "atucker/generators.hpp"
#include "atucker/harness.hpp"
#include "atucker/selector_io.hpp"
#include "atucker/sthosvd.hpp"
#include "atucker/tensor_io.hpp"
#include "atucker/tucker_io.hpp"

namespace {

// exit codes: 0 ok, 2 usage, 3 I/O, 4 numeric failure, 5 degenerate-data warning
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_size_list(const std::string& s, char sep) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) next = s.size();
        const std::string cell = s.substr(pos, next - pos);
        try {
            out.push_back(static_cast<std::size_t>(std::stoull(cell)));
        } catch (const std::exception&) {
            throw UsageError("cannot parse '" + cell + "' as a positive integer");
        }
        pos = next + 1;
        if (next == s.size()) break;
    }
    return out;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos) throw UsageError("expected a lo:hi range, got '" + s + "'");
    const auto lo = parse_size_list(s.substr(0, colon), ':');
    const auto hi = parse_size_list(s.substr(colon + 1), ':');
    if (lo.size() != 1 || hi.size() != 1) throw UsageError("expected a lo:hi range, got '" + s + "'");
    return {lo[0], hi[0]};
}

atucker::Strategy make_strategy(const std::string& spec, const std::string& model_path,
                                bool* adaptive_fallback) {
    using atucker::SolverKind;
    using atucker::Strategy;
    if (spec == "eig") return Strategy::fixed_eig();
    if (spec == "als") return Strategy::fixed_als();
    if (spec == "svd") return Strategy::fixed_svd();
    if (spec == "costmodel") return Strategy::cost_model();
    if (spec == "adaptive") {
        if (model_path.empty()) {
            std::cerr << "warning: --strategy adaptive without --model, falling back to the "
                         "cost-model selector\n";
            if (adaptive_fallback) *adaptive_fallback = true;
            return Strategy::cost_model();
        }
        return Strategy::adaptive(atucker::selector::load_model(model_path));
    }
    if (spec.rfind("manual:", 0) == 0) {
        std::vector<SolverKind> choices;
        const std::string body = spec.substr(7);
        std::size_t pos = 0;
        while (pos <= body.size()) {
            std::size_t next = body.find(',', pos);
            if (next == std::string::npos) next = body.size();
            const std::string c = body.substr(pos, next - pos);
            if (c == "e")
                choices.push_back(SolverKind::Eig);
            else if (c == "a")
                choices.push_back(SolverKind::Als);
            else
                throw UsageError("manual strategy entries must be 'e' or 'a', got '" + c + "'");
            pos = next + 1;
            if (next == body.size()) break;
        }
        if (choices.empty()) throw UsageError("manual strategy lists no choices");
        return Strategy::manual(std::move(choices));
    }
    throw UsageError("unknown strategy '" + spec +
                     "' (expected adaptive|costmodel|eig|als|svd|manual:<e|a,...>)");
}

struct DecomposeArgs {
    std::string input, output, model, report;
    std::string ranks, strategy = "eig";
    int als_iters = 5;
    double als_tol = 0.0;
    std::uint64_t seed = 0;
    bool with_error = false;
};

int cmd_decompose(const DecomposeArgs& args) {
    const atucker::DenseTensor x = atucker::read_dten(args.input);
    const std::vector<std::size_t> ranks = parse_size_list(args.ranks, ',');
    if (ranks.size() != x.order())
        throw UsageError("--ranks lists " + std::to_string(ranks.size()) +
                         " values but the input tensor has order " + std::to_string(x.order()));
    for (std::size_t n = 0; n < ranks.size(); ++n) {
        if (ranks[n] < 1 || ranks[n] > x.dim(n))
            throw UsageError("rank " + std::to_string(ranks[n]) + " is invalid for mode " +
                             std::to_string(n + 1) + " of dimension " + std::to_string(x.dim(n)));
    }

    bool fallback = false;
    const atucker::Strategy strategy = make_strategy(args.strategy, args.model, &fallback);
    if (strategy.kind() == atucker::Strategy::Kind::Manual &&
        strategy.choices().size() != x.order())
        throw UsageError("manual strategy lists " + std::to_string(strategy.choices().size()) +
                         " choices but the input tensor has order " + std::to_string(x.order()));

    atucker::AlsOptions opts;
    opts.num_iters = args.als_iters;
    opts.rel_tol = args.als_tol;
    opts.seed = args.seed;

    atucker::SthosvdResult res = atucker::sthosvd(x, ranks, strategy, opts);
    atucker::save_tucker(args.output, res.decomposition, res.reports, strategy.name(), args.seed);

    std::optional<double> rel_err;
    if (args.with_error) rel_err = atucker::relative_error(x, res.decomposition);

    if (!args.report.empty()) {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["input"] = args.input;
        j["original_dims"] = x.dims();
        j["ranks"] = ranks;
        j["strategy"] = strategy.name();
        j["adaptive_fallback"] = fallback;
        j["seed"] = args.seed;
        j["als_iters"] = args.als_iters;
        double total = 0.0, overhead = 0.0;
        nlohmann::json modes = nlohmann::json::array();
        for (const atucker::ModeReport& r : res.reports) {
            total += r.solver_time;
            overhead += r.selector_decision_time;
            modes.push_back(atucker::mode_report_to_json(r));
        }
        j["modes"] = std::move(modes);
        j["solver_time_s"] = total;
        j["selector_overhead_s"] = overhead;
        if (rel_err) j["relative_error"] = *rel_err;
        std::ofstream out(args.report, std::ios::binary);
        if (!out) throw atucker::IoFailure("cannot open " + args.report + " for writing");
        out << j.dump(2) << '\n';
        if (!out) throw atucker::IoFailure("failed writing " + args.report);
    }
    return 0;
}

int cmd_reconstruct(const std::string& decomposition, const std::string& output) {
    const atucker::TuckerDecomposition t = atucker::load_tucker(decomposition);
    atucker::write_dten(output, atucker::reconstruct(t));
    return 0;
}

int cmd_error(const std::string& input, const std::string& decomposition) {
    const atucker::DenseTensor x = atucker::read_dten(input);
    const atucker::TuckerDecomposition t = atucker::load_tucker(decomposition);
    double err = 0.0;
    try {
        err = atucker::relative_error(x, t);
    } catch (const atucker::ShapeMismatch& e) {
        throw UsageError(e.what());
    }
    std::printf("%.6f\n", err);
    return 0;
}

int cmd_info(const std::string& input) {
    const atucker::DenseTensor x = atucker::read_dten(input);
    std::printf("order: %zu\n", x.order());
    std::printf("dims: %s\n", atucker::harness::detail::shape_string(x.dims()).c_str());
    std::printf("bytes: %zu\n", x.size() * sizeof(double));
    std::printf("frobenius_norm: %.6f\n", atucker::frobenius_norm(x));
    return 0;
}

struct GendataArgs {
    std::size_t count = 100;
    std::string dim_range = "10:60";
    std::size_t order = 3;
    std::uint64_t seed = 0;
    std::string out;
    std::uint64_t memory_cap = 2ull << 30;
    int repeats = 3;
};

int cmd_gendata(const GendataArgs& args) {
    const auto [lo, hi] = parse_range(args.dim_range);
    if (lo < 1 || hi < lo) throw UsageError("--dim-range must satisfy 1 <= lo <= hi");
    if (args.order < 1) throw UsageError("--order must be at least 1");
    atucker::harness::GenConfig cfg;
    cfg.sample_count = args.count;
    cfg.dim_lo = lo;
    cfg.dim_hi = hi;
    cfg.order_lo = cfg.order_hi = args.order;
    cfg.seed = args.seed;
    cfg.memory_cap = args.memory_cap;
    cfg.repeats = args.repeats;
    const atucker::harness::GenResult res = atucker::harness::generate_samples(cfg);
    atucker::harness::write_samples_csv(args.out, res.samples);
    std::cerr << "generated " << res.samples.size() << " samples from " << res.tensors_used
              << " tensors (" << res.tensors_skipped << " skipped over the memory cap)\n";
    return 0;
}

struct TrainArgs {
    std::string samples, out, eval_report;
    double split = 0.7;
    std::string depth_grid = "1:10";
    int cv = 5;
    std::uint64_t seed = 0;
    bool include_ties = false;
};

int cmd_train(const TrainArgs& args) {
    std::vector<atucker::selector::TrainingSample> samples =
        atucker::harness::read_samples_csv(args.samples);
    if (!args.include_ties) {
        std::erase_if(samples, [](const atucker::selector::TrainingSample& s) { return s.tie; });
    }
    if (samples.empty()) throw atucker::EmptyDataset("no usable samples in " + args.samples);
    if (!(args.split > 0.0 && args.split < 1.0))
        throw UsageError("--split must be strictly between 0 and 1");

    auto [train_set, test_set] = atucker::harness::split_samples(samples, args.split, args.seed);

    const auto [dlo, dhi] = parse_range(args.depth_grid);
    if (dlo < 1 || dhi < dlo) throw UsageError("--max-depth-grid must satisfy 1 <= lo <= hi");
    atucker::selector::TrainOptions opts;
    opts.max_depth_lo = static_cast<int>(dlo);
    opts.max_depth_hi = static_cast<int>(dhi);
    opts.cv_folds = args.cv;
    opts.seed = args.seed;

    const atucker::selector::DecisionTreeModel model = atucker::selector::train(train_set, opts);
    atucker::selector::save_model(model, args.out);

    if (!test_set.empty()) {
        const atucker::harness::EvalReport eval = atucker::harness::evaluate_model(model, test_set);
        if (!args.eval_report.empty()) {
            nlohmann::json j;
            j["schema_version"] = 1;
            j["accuracy"] = eval.accuracy;
            j["mean_regret"] = eval.mean_regret;
            j["p90_regret"] = eval.p90_regret;
            j["test_count"] = eval.count;
            j["train_count"] = train_set.size();
            j["chosen_max_depth"] = model.max_depth;
            j["chosen_class_weight"] = model.class_weight;
            j["cv_accuracy"] = model.cv_accuracy;
            j["degenerate_labels"] = model.degenerate_labels;
            std::ofstream out(args.eval_report, std::ios::binary);
            if (!out) throw atucker::IoFailure("cannot open " + args.eval_report + " for writing");
            out << j.dump(2) << '\n';
            if (!out) throw atucker::IoFailure("failed writing " + args.eval_report);
        }
        std::cerr << "held-out accuracy " << eval.accuracy << ", mean regret " << eval.mean_regret
                  << " over " << eval.count << " samples\n";
    } else {
        std::cerr << "test split is empty, skipping evaluation\n";
    }

    if (model.degenerate_labels) {
        std::cerr << "warning: training data contains a single class, wrote a constant model\n";
        return 5;
    }
    return 0;
}

struct BenchArgs {
    std::string tensors, strategies, model, out, csv;
    int als_iters = 5;
    int repeats = 3;
};

std::vector<atucker::harness::BenchCase> load_bench_cases(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw atucker::IoFailure("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw atucker::SchemaMismatch("malformed tensor spec " + path + ": " + e.what());
    }
    if (!j.contains("cases") || !j["cases"].is_array())
        throw atucker::SchemaMismatch(path + ": expected a top-level 'cases' array");
    std::vector<atucker::harness::BenchCase> cases;
    std::size_t i = 0;
    for (const nlohmann::json& jc : j["cases"]) {
        atucker::harness::BenchCase c;
        c.name = jc.value("name", "case" + std::to_string(i));
        if (!jc.contains("ranks")) throw atucker::SchemaMismatch(c.name + ": missing 'ranks'");
        c.ranks = jc["ranks"].get<std::vector<std::size_t>>();
        if (jc.contains("path")) {
            c.gen = atucker::harness::BenchCase::Gen::File;
            c.path = jc["path"].get<std::string>();
        } else {
            if (!jc.contains("dims")) throw atucker::SchemaMismatch(c.name + ": missing 'dims'");
            c.dims = jc["dims"].get<std::vector<std::size_t>>();
            c.seed = jc.value("seed", std::uint64_t{0});
            const std::string gen = jc.value("generator", "normal");
            if (gen == "normal")
                c.gen = atucker::harness::BenchCase::Gen::Normal;
            else if (gen == "uniform")
                c.gen = atucker::harness::BenchCase::Gen::Uniform;
            else if (gen == "lowrank") {
                c.gen = atucker::harness::BenchCase::Gen::LowRank;
                if (jc.contains("gen_ranks"))
                    c.gen_ranks = jc["gen_ranks"].get<std::vector<std::size_t>>();
            } else
                throw atucker::SchemaMismatch(c.name + ": unknown generator '" + gen + "'");
        }
        cases.push_back(std::move(c));
        ++i;
    }
    return cases;
}

int cmd_bench(const BenchArgs& args) {
    if (args.strategies.empty()) throw UsageError("--strategies lists no strategies");
    std::vector<atucker::Strategy> strategies;
    bool fallback = false;
    std::size_t pos = 0;
    while (pos <= args.strategies.size()) {
        std::size_t next = args.strategies.find(',', pos);
        if (next == std::string::npos) next = args.strategies.size();
        const std::string name = args.strategies.substr(pos, next - pos);
        if (!name.empty()) strategies.push_back(make_strategy(name, args.model, &fallback));
        pos = next + 1;
        if (next == args.strategies.size()) break;
    }
    if (strategies.empty()) throw UsageError("--strategies lists no strategies");

    if (args.repeats < 1) throw UsageError("--repeats must be at least 1");
    const std::vector<atucker::harness::BenchCase> cases = load_bench_cases(args.tensors);
    atucker::AlsOptions opts;
    opts.num_iters = args.als_iters;
    const atucker::harness::BenchReport report =
        atucker::harness::bench_compare(cases, strategies, opts, args.repeats);

    if (!args.csv.empty()) atucker::harness::write_bench_csv(args.csv, report);
    if (!args.out.empty()) {
        nlohmann::json j = atucker::harness::bench_report_to_json(report);
        j["adaptive_fallback"] = fallback;
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw atucker::IoFailure("cannot open " + args.out + " for writing");
        out << j.dump(2) << '\n';
        if (!out) throw atucker::IoFailure("failed writing " + args.out);
    }
    std::cerr << report.cases_ok << " cases succeeded, " << report.cases_failed << " failed\n";
    return report.cases_ok > 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("ATUCKER_THREADS")) {
        const int v = std::atoi(threads);
        if (v > 0) Eigen::setNbThreads(v);
    }

    CLI::App app{"Tucker decomposition toolkit with per-mode solver selection"};
    app.require_subcommand(1);

    DecomposeArgs dargs;
    CLI::App* dec = app.add_subcommand("decompose", "st-HOSVD decomposition of a .dten tensor");
    dec->add_option("--input", dargs.input, ".dten input tensor")->required();
    dec->add_option("--ranks", dargs.ranks, "comma-separated truncations, one per mode")->required();
    dec->add_option("--strategy", dargs.strategy,
                    "adaptive|costmodel|eig|als|svd|manual:<e|a per mode>");
    dec->add_option("--model", dargs.model, "trained selector model (for --strategy adaptive)");
    dec->add_option("--als-iters", dargs.als_iters, "ALS iteration count");
    dec->add_option("--als-tol", dargs.als_tol, "ALS relative-change stop (0 disables)");
    dec->add_option("--seed", dargs.seed, "seed for ALS initial guesses");
    dec->add_option("--output", dargs.output, "output .tucker directory")->required();
    dec->add_option("--report", dargs.report, "write a JSON run report here");
    dec->add_flag("--with-error", dargs.with_error, "include the relative error in the report");

    std::string rec_dir, rec_out;
    CLI::App* rec = app.add_subcommand("reconstruct", "expand a .tucker directory to a .dten");
    rec->add_option("--decomposition", rec_dir, ".tucker directory")->required();
    rec->add_option("--output", rec_out, "output .dten path")->required();

    std::string err_input, err_dir;
    CLI::App* err = app.add_subcommand("error", "relative reconstruction error of a decomposition");
    err->add_option("--input", err_input, ".dten input tensor")->required();
    err->add_option("--decomposition", err_dir, ".tucker directory")->required();

    std::string info_input;
    CLI::App* info = app.add_subcommand("info", "print order, dims, byte size and Frobenius norm");
    info->add_option("--input", info_input, ".dten input tensor")->required();

    GendataArgs gargs;
    CLI::App* gen = app.add_subcommand("gendata", "benchmark both solvers to produce samples");
    gen->add_option("--count", gargs.count, "minimum number of samples to produce");
    gen->add_option("--dim-range", gargs.dim_range, "per-mode dimension range lo:hi");
    gen->add_option("--order", gargs.order, "tensor order");
    gen->add_option("--seed", gargs.seed, "sweep seed");
    gen->add_option("--out", gargs.out, "output samples CSV")->required();
    gen->add_option("--memory-cap", gargs.memory_cap, "skip tensors above this many bytes");
    gen->add_option("--repeats", gargs.repeats, "timed repeats per solver (median)");

    TrainArgs targs;
    CLI::App* tr = app.add_subcommand("train", "train the selector from a samples CSV");
    tr->add_option("--samples", targs.samples, "samples CSV from gendata")->required();
    tr->add_option("--split", targs.split, "train fraction of the shuffled samples");
    tr->add_option("--max-depth-grid", targs.depth_grid, "grid-search depth range lo:hi");
    tr->add_option("--cv", targs.cv, "cross-validation folds");
    tr->add_option("--seed", targs.seed, "shuffle/grid seed");
    tr->add_option("--out", targs.out, "output model JSON")->required();
    tr->add_option("--eval-report", targs.eval_report, "write held-out evaluation JSON here");
    tr->add_flag("--include-ties", targs.include_ties, "keep tie-flagged rows in training");

    BenchArgs bargs;
    CLI::App* bench = app.add_subcommand("bench", "compare strategies over a tensor spec");
    bench->add_option("--tensors", bargs.tensors, "JSON tensor spec with a 'cases' array")->required();
    bench->add_option("--strategies", bargs.strategies, "comma-separated strategy names")->required();
    bench->add_option("--model", bargs.model, "trained selector model for 'adaptive'");
    bench->add_option("--out", bargs.out, "output report JSON");
    bench->add_option("--csv", bargs.csv, "output per-row CSV");
    bench->add_option("--als-iters", bargs.als_iters, "ALS iteration count");
    bench->add_option("--repeats", bargs.repeats, "timed repeats per case (median)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (dec->parsed()) return cmd_decompose(dargs);
        if (rec->parsed()) return cmd_reconstruct(rec_dir, rec_out);
        if (err->parsed()) return cmd_error(err_input, err_dir);
        if (info->parsed()) return cmd_info(info_input);
        if (gen->parsed()) return cmd_gendata(gargs);
        if (tr->parsed()) return cmd_train(targs);
        if (bench->parsed()) return cmd_bench(bargs);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const atucker::IoFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const atucker::SchemaMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const atucker::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
