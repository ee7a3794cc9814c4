#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "atucker/errors.hpp"
#include "atucker/generators.hpp"
#include "atucker/selector.hpp"
#include "atucker/solvers.hpp"
#include "atucker/sthosvd.hpp"
#include "atucker/tensor_io.hpp"
#include "atucker/tucker_io.hpp"

namespace atucker::harness {

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string shape_string(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(dims[i]);
    }
    return s;
}

inline std::vector<std::size_t> parse_shape(const std::string& s) {
    std::vector<std::size_t> dims;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find('x', pos);
        if (next == std::string::npos) next = s.size();
        dims.push_back(static_cast<std::size_t>(std::stoull(s.substr(pos, next - pos))));
        pos = next + 1;
    }
    return dims;
}

/// Median wall time of `repeats` calls after one untimed warm-up call.
template <typename Fn>
double median_time_s(int repeats, Fn&& fn) {
    fn();  // warm-up
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeats));
    for (int k = 0; k < repeats; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

}  // namespace detail

/// Configuration of the synthetic benchmark sweep that produces labeled
/// training samples. Desk-scale defaults; the pipeline itself does not care
/// about the ranges.
struct GenConfig {
    std::size_t sample_count = 100;           // stop once this many samples exist
    std::size_t dim_lo = 10, dim_hi = 60;     // per-mode dimension range
    std::size_t order_lo = 3, order_hi = 3;   // tensor order range
    std::uint64_t seed = 0;
    std::uint64_t memory_cap = 2ull << 30;    // bytes; larger tensors are skipped
    int repeats = 3;                          // timed repeats per solver (median)
    AlsOptions als;                           // solver options used when timing ALS
};

struct GenResult {
    std::vector<selector::TrainingSample> samples;
    std::size_t tensors_used = 0;
    std::size_t tensors_skipped = 0;  // over the memory cap
};

/// Runs the per-mode dual-solver benchmark: for every generated tensor and
/// every mode, both solvers are timed on the same work-tensor state, one
/// sample is recorded, and the sweep continues with the faster solver's
/// output so later modes see realistic shrunk shapes.
inline GenResult generate_samples(const GenConfig& cfg) {
    if (cfg.dim_lo < 1 || cfg.dim_hi < cfg.dim_lo)
        throw Error("invalid dimension range");
    if (cfg.order_lo < 1 || cfg.order_hi < cfg.order_lo)
        throw Error("invalid order range");
    if (cfg.repeats < 1) throw Error("repeats must be at least 1");

    GenResult out;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> dim_dist(cfg.dim_lo, cfg.dim_hi);
    std::uniform_int_distribution<std::size_t> order_dist(cfg.order_lo, cfg.order_hi);

    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 + 100 * cfg.sample_count;
    while (out.samples.size() < cfg.sample_count && attempts++ < max_attempts) {
        const std::size_t order = order_dist(rng);
        std::vector<std::size_t> dims(order);
        for (std::size_t& d : dims) d = dim_dist(rng);

        std::size_t total = 1;
        for (std::size_t d : dims) total *= d;
        std::vector<std::size_t> ranks(order);
        for (std::size_t n = 0; n < order; ++n) {
            // truncation uniform in [10, I_n/2], clamped to stay valid
            const std::size_t hi = std::max<std::size_t>(1, dims[n] / 2);
            const std::size_t lo = std::min<std::size_t>(10, hi);
            ranks[n] = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
        }
        const std::uint64_t tensor_seed = rng();
        if (total * sizeof(double) > cfg.memory_cap) {
            ++out.tensors_skipped;
            continue;
        }

        DenseTensor work = random_tensor(dims, tensor_seed, Distribution::StandardNormal);
        ++out.tensors_used;
        AlsOptions als = cfg.als;
        als.seed = tensor_seed;

        for (std::size_t n = 0; n < order; ++n) {
            const std::size_t i = work.dim(n);
            const std::size_t r = ranks[n];
            std::size_t j = 1;
            for (std::size_t m = 0; m < order; ++m)
                if (m != n) j *= work.dim(m);

            std::optional<ModeResult> eig_res, als_res;
            const double time_eig = detail::median_time_s(
                cfg.repeats, [&] { eig_res = eig_mode_solver(work, n, r); });
            const double time_als = detail::median_time_s(
                cfg.repeats, [&] { als_res = als_mode_solver(work, n, r, als); });

            selector::TrainingSample s;
            s.features = selector::extract_features(static_cast<double>(i),
                                                    static_cast<double>(r),
                                                    static_cast<double>(j));
            s.time_eig = time_eig;
            s.time_als = time_als;
            s.label = time_eig <= time_als ? 0 : 1;
            s.tie = std::abs(time_eig - time_als) <= 0.05 * std::max(time_eig, time_als);
            s.provenance = {dims, ranks, n, tensor_seed};
            const int label = s.label;
            out.samples.push_back(std::move(s));

            work = std::move(label == 0 ? eig_res->shrunk : als_res->shrunk);
        }
    }
    return out;
}

/// Seeded shuffle followed by a round(ratio*n) split into train and test.
inline std::pair<std::vector<selector::TrainingSample>, std::vector<selector::TrainingSample>>
split_samples(const std::vector<selector::TrainingSample>& samples, double ratio,
              std::uint64_t seed) {
    if (samples.empty()) throw EmptyDataset("no samples to split");
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must be in (0, 1)");
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(samples.size())));
    std::pair<std::vector<selector::TrainingSample>, std::vector<selector::TrainingSample>> out;
    for (std::size_t k = 0; k < idx.size(); ++k)
        (k < n_train ? out.first : out.second).push_back(samples[idx[k]]);
    return out;
}

struct EvalReport {
    double accuracy = 0.0;
    double mean_regret = 0.0;  // time(predicted)/time(best), 1.0 is optimal
    double p90_regret = 0.0;
    std::size_t count = 0;
};

inline EvalReport evaluate_model(const selector::DecisionTreeModel& model,
                                 const std::vector<selector::TrainingSample>& test) {
    if (test.empty()) throw EmptyDataset("empty test set");
    EvalReport rep;
    rep.count = test.size();
    std::vector<double> regrets;
    regrets.reserve(test.size());
    std::size_t correct = 0;
    for (const selector::TrainingSample& s : test) {
        const int pred = selector::predict(model, s.features) == SolverKind::Als ? 1 : 0;
        if (pred == s.label) ++correct;
        const double t_pred = pred == 0 ? s.time_eig : s.time_als;
        const double t_best = std::min(s.time_eig, s.time_als);
        regrets.push_back(t_best > 0.0 ? t_pred / t_best : 1.0);
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    double sum = 0.0;
    for (double r : regrets) sum += r;
    rep.mean_regret = sum / static_cast<double>(regrets.size());
    std::sort(regrets.begin(), regrets.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.9 * static_cast<double>(regrets.size())));
    rep.p90_regret = regrets[std::max<std::size_t>(rank, 1) - 1];
    return rep;
}

// --- samples CSV (header is part of the interface) ---------------------------

inline constexpr const char* kSamplesCsvHeader =
    "I,R,J,f4,f5,f6,f7,f8,f9,f10,time_eig_s,time_als_s,label,tie_flag,dims,ranks,mode,seed";

inline void write_samples_csv(const std::string& path,
                              const std::vector<selector::TrainingSample>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << kSamplesCsvHeader << '\n';
    for (const selector::TrainingSample& s : samples) {
        out << static_cast<long long>(std::llround(s.features[0])) << ','
            << static_cast<long long>(std::llround(s.features[1])) << ','
            << static_cast<long long>(std::llround(s.features[2]));
        for (std::size_t f = 3; f < 10; ++f) out << ',' << detail::fmt_double(s.features[f]);
        out << ',' << detail::fmt_double(s.time_eig) << ',' << detail::fmt_double(s.time_als)
            << ',' << s.label << ',' << (s.tie ? 1 : 0) << ','
            << detail::shape_string(s.provenance.dims) << ','
            << detail::shape_string(s.provenance.ranks) << ',' << s.provenance.mode + 1 << ','
            << s.provenance.seed << '\n';
    }
    if (!out) throw IoFailure("failed writing " + path);
}

inline std::vector<selector::TrainingSample> read_samples_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kSamplesCsvHeader)
        throw IoFailure(path + ": missing or unexpected samples CSV header");
    std::vector<selector::TrainingSample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 18) throw IoFailure(path + ": malformed row: " + line);
        selector::TrainingSample s;
        for (std::size_t f = 0; f < 10; ++f) s.features[f] = std::stod(cells[f]);
        s.time_eig = std::stod(cells[10]);
        s.time_als = std::stod(cells[11]);
        s.label = std::stoi(cells[12]);
        s.tie = cells[13] == "1";
        s.provenance.dims = detail::parse_shape(cells[14]);
        s.provenance.ranks = detail::parse_shape(cells[15]);
        s.provenance.mode = static_cast<std::size_t>(std::stoull(cells[16])) - 1;
        s.provenance.seed = std::stoull(cells[17]);
        samples.push_back(std::move(s));
    }
    return samples;
}

// --- strategy comparison sweep ------------------------------------------------

struct BenchCase {
    enum class Gen { Normal, Uniform, LowRank, File };
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<std::size_t> ranks;
    std::uint64_t seed = 0;
    Gen gen = Gen::Normal;
    std::vector<std::size_t> gen_ranks;  // LowRank construction ranks
    std::string path;                    // File input
};

struct BenchRow {
    std::string case_name;
    std::vector<std::size_t> dims;
    std::vector<std::size_t> ranks;
    std::string strategy;
    double total_time = 0.0;
    double selector_overhead = 0.0;
    double relative_error = 0.0;
    bool failed = false;
    std::string error;
    std::vector<ModeReport> reports;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::string reference;  // strategy the speedups compare against
    std::map<std::string, double> mean_speedup_vs;  // mean time(other)/time(reference)
    double frac_within_10pct_of_best_fixed = -1.0;  // reference vs best fixed, -1 when n/a
    std::size_t reference_worse_than_all_fixed = 0;  // beyond overhead + 5%
    std::size_t cases_ok = 0;
    std::size_t cases_failed = 0;
};

inline DenseTensor materialize(const BenchCase& c) {
    switch (c.gen) {
        case BenchCase::Gen::Normal:
            return random_tensor(c.dims, c.seed, Distribution::StandardNormal);
        case BenchCase::Gen::Uniform:
            return random_tensor(c.dims, c.seed, Distribution::Uniform01);
        case BenchCase::Gen::LowRank:
            return synth_lowrank(c.dims, c.gen_ranks.empty() ? c.ranks : c.gen_ranks, c.seed);
        case BenchCase::Gen::File: return read_dten(c.path);
    }
    throw Error("unknown generator");
}

/// Runs sthosvd for every (case, strategy) pair sequentially, one case at a
/// time, and aggregates speedups of the reference strategy (the adaptive one
/// when present) against the others. Times are the median of `repeats` runs
/// after one untimed warm-up, like the sample generator's timing.
inline BenchReport bench_compare(const std::vector<BenchCase>& cases,
                                 const std::vector<Strategy>& strategies,
                                 const AlsOptions& opts = {}, int repeats = 3) {
    if (strategies.empty()) throw Error("no strategies to compare");
    if (repeats < 1) throw Error("repeats must be at least 1");

    std::size_t ref_idx = 0;
    for (std::size_t s = 0; s < strategies.size(); ++s)
        if (strategies[s].kind() == Strategy::Kind::Adaptive) { ref_idx = s; break; }
    if (strategies[ref_idx].kind() != Strategy::Kind::Adaptive)
        for (std::size_t s = 0; s < strategies.size(); ++s)
            if (strategies[s].kind() == Strategy::Kind::CostModel) { ref_idx = s; break; }

    const auto is_fixed = [](const Strategy& s) {
        return s.kind() == Strategy::Kind::FixedEig || s.kind() == Strategy::Kind::FixedAls ||
               s.kind() == Strategy::Kind::FixedSvd;
    };

    BenchReport report;
    report.reference = strategies[ref_idx].name();
    std::map<std::string, std::vector<double>> speedups;
    std::size_t within10 = 0, with_fixed = 0;

    for (std::size_t c = 0; c < cases.size(); ++c) {
        DenseTensor x;
        try {
            x = materialize(cases[c]);
        } catch (const Error& e) {
            BenchRow row;
            row.case_name = cases[c].name;
            row.dims = cases[c].dims;
            row.ranks = cases[c].ranks;
            row.strategy = "-";
            row.failed = true;
            row.error = e.what();
            report.rows.push_back(std::move(row));
            ++report.cases_failed;
            continue;
        }

        std::vector<double> times(strategies.size(), -1.0);
        double ref_overhead = 0.0;
        bool any_ok = false;
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            BenchRow row;
            row.case_name = cases[c].name;
            row.dims = x.dims();
            row.ranks = cases[c].ranks;
            row.strategy = strategies[s].name();
            try {
                AlsOptions case_opts = opts;
                case_opts.seed = cases[c].seed;
                // the kept-result run doubles as the untimed warm-up
                SthosvdResult res = sthosvd(x, cases[c].ranks, strategies[s], case_opts);
                std::vector<double> runs;
                for (int k = 0; k < repeats; ++k) {
                    const auto t0 = std::chrono::steady_clock::now();
                    sthosvd(x, cases[c].ranks, strategies[s], case_opts);
                    runs.push_back(
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count());
                }
                std::sort(runs.begin(), runs.end());
                row.total_time = runs.size() % 2 == 1
                                     ? runs[runs.size() / 2]
                                     : 0.5 * (runs[runs.size() / 2 - 1] + runs[runs.size() / 2]);
                for (const ModeReport& mr : res.reports)
                    row.selector_overhead += mr.selector_decision_time;
                row.relative_error = relative_error(x, res.decomposition);
                row.reports = std::move(res.reports);
                times[s] = row.total_time;
                if (s == ref_idx) ref_overhead = row.selector_overhead;
                any_ok = true;
            } catch (const Error& e) {
                row.failed = true;
                row.error = e.what();
            }
            report.rows.push_back(std::move(row));
        }
        if (any_ok) ++report.cases_ok; else ++report.cases_failed;

        if (times[ref_idx] <= 0.0) continue;
        double best_fixed = -1.0, worst_fixed = -1.0;
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            if (times[s] <= 0.0) continue;
            speedups[strategies[s].name()].push_back(times[s] / times[ref_idx]);
            if (is_fixed(strategies[s])) {
                if (best_fixed < 0.0 || times[s] < best_fixed) best_fixed = times[s];
                if (times[s] > worst_fixed) worst_fixed = times[s];
            }
        }
        if (best_fixed > 0.0) {
            ++with_fixed;
            if (times[ref_idx] <= 1.1 * best_fixed) ++within10;
            if (times[ref_idx] > 1.05 * worst_fixed + ref_overhead)
                ++report.reference_worse_than_all_fixed;
        }
    }

    for (const auto& [name, v] : speedups) {
        double sum = 0.0;
        for (double x : v) sum += x;
        report.mean_speedup_vs[name] = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
    }
    if (with_fixed > 0)
        report.frac_within_10pct_of_best_fixed =
            static_cast<double>(within10) / static_cast<double>(with_fixed);
    return report;
}

inline void write_bench_csv(const std::string& path, const BenchReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << "case,dims,ranks,strategy,total_time_s,selector_overhead_s,relative_error,failed\n";
    for (const BenchRow& r : report.rows) {
        out << r.case_name << ',' << detail::shape_string(r.dims) << ','
            << detail::shape_string(r.ranks) << ',' << r.strategy << ','
            << detail::fmt_double(r.total_time) << ',' << detail::fmt_double(r.selector_overhead)
            << ',' << detail::fmt_double(r.relative_error) << ',' << (r.failed ? 1 : 0) << '\n';
    }
    if (!out) throw IoFailure("failed writing " + path);
}

inline nlohmann::json bench_report_to_json(const BenchReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["reference"] = report.reference;
    j["cases_ok"] = report.cases_ok;
    j["cases_failed"] = report.cases_failed;
    j["mean_speedup_vs"] = report.mean_speedup_vs;
    if (report.frac_within_10pct_of_best_fixed >= 0.0)
        j["frac_within_10pct_of_best_fixed"] = report.frac_within_10pct_of_best_fixed;
    j["reference_worse_than_all_fixed"] = report.reference_worse_than_all_fixed;
    nlohmann::json rows = nlohmann::json::array();
    for (const BenchRow& r : report.rows) {
        nlohmann::json jr;
        jr["case"] = r.case_name;
        jr["dims"] = r.dims;
        jr["ranks"] = r.ranks;
        jr["strategy"] = r.strategy;
        jr["total_time_s"] = r.total_time;
        jr["selector_overhead_s"] = r.selector_overhead;
        jr["relative_error"] = r.relative_error;
        jr["failed"] = r.failed;
        if (r.failed) jr["error"] = r.error;
        nlohmann::json jm = nlohmann::json::array();
        for (const ModeReport& mr : r.reports) jm.push_back(mode_report_to_json(mr));
        jr["modes"] = std::move(jm);
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline void write_bench_json(const std::string& path, const BenchReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << bench_report_to_json(report).dump(2) << '\n';
    if (!out) throw IoFailure("failed writing " + path);
}

}  // namespace atucker::harness
