#include "btm/suite.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "btm/io.hpp"

namespace btm {

namespace {

constexpr std::uint64_t kTeacherSalt = 0x7465616368657273ULL;
constexpr std::uint64_t kSurrogateSalt = 0x737572726f676174ULL;
constexpr std::uint64_t kEvalSeedSalt = 0x6576616c73656564ULL;
constexpr std::uint64_t kCellSalt = 0x63656c6c00000000ULL;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::uint64_t cell_seed(const RunConfig& cfg, const std::string& experiment, std::size_t ipc) {
    std::uint64_t s = hash_combine(cfg.seed, kCellSalt);
    s = hash_combine(s, io::fnv1a64(experiment.data(), experiment.size()));
    return hash_combine(s, ipc);
}

}  // namespace

Dataset suite_dataset(const RunConfig& cfg) {
    if (!cfg.data_file.empty()) return load_benchmark(cfg.data_file);
    return generate_benchmark(cfg.data);
}

std::vector<Trajectory> suite_train_teachers(const RunConfig& cfg, const Dataset& ds) {
    const Batch train = ds.split_batch(Split::train);
    const MlpConfig model = cfg.model_cfg();
    std::vector<Trajectory> teachers(cfg.teacher.count);
    const std::int64_t count = static_cast<std::int64_t>(cfg.teacher.count);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t m = 0; m < count; ++m) {
        TeacherConfig tc = cfg.teacher.sgd;
        tc.seed = hash_combine(hash_combine(cfg.seed, kTeacherSalt), static_cast<std::uint64_t>(m));
        teachers[static_cast<std::size_t>(m)] = train_teacher(train, tc, model);
    }
    return teachers;
}

std::vector<BezierSurrogate> suite_fit_surrogates(
    const RunConfig& cfg, const Dataset& ds, const std::vector<Trajectory>& teachers,
    std::vector<ControlPointResult>* fit_results) {
    const Batch train = ds.split_batch(Split::train);
    const MlpConfig model = cfg.model_cfg();
    std::vector<BezierSurrogate> surrogates(teachers.size());
    std::vector<ControlPointResult> results(teachers.size());
    const std::int64_t count = static_cast<std::int64_t>(teachers.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t m = 0; m < count; ++m) {
        const Trajectory& traj = teachers[static_cast<std::size_t>(m)];
        ControlPointOpts opts = cfg.surrogate.opts;
        opts.seed =
            hash_combine(hash_combine(cfg.seed, kSurrogateSalt), static_cast<std::uint64_t>(m));
        ControlPointResult res = optimize_control_point(traj.checkpoints.front(),
                                                        traj.checkpoints.back(), train, model,
                                                        opts);
        surrogates[static_cast<std::size_t>(m)] = res.surrogate;
        results[static_cast<std::size_t>(m)] = std::move(res);
    }
    if (fit_results != nullptr) *fit_results = std::move(results);
    return surrogates;
}

std::vector<BezierSurrogate> linear_surrogates_from(const std::vector<Trajectory>& teachers) {
    std::vector<BezierSurrogate> out;
    out.reserve(teachers.size());
    for (const Trajectory& t : teachers)
        out.push_back(linear_surrogate(t.checkpoints.front(), t.checkpoints.back()));
    return out;
}

SyntheticDataset random_subset_baseline(const Dataset& ds, std::size_t ipc, std::uint64_t seed) {
    return init_synthetic(ds, ipc, InitMode::real, seed);
}

std::vector<std::uint64_t> evaluation_seeds(const RunConfig& cfg) {
    std::vector<std::uint64_t> seeds(cfg.eval.seeds);
    for (std::size_t i = 0; i < seeds.size(); ++i)
        seeds[i] = hash_combine(hash_combine(cfg.seed, kEvalSeedSalt), i);
    return seeds;
}

namespace {

struct SuiteContext {
    const RunConfig& cfg;
    const Dataset& ds;
    const std::vector<Trajectory>& teachers;
    const std::vector<BezierSurrogate>& bezier;
    const std::vector<BezierSurrogate>& linear;
    const std::vector<std::uint64_t>& eval_seeds;
    std::string out_dir;
};

SyntheticDataset condense_for_cell(const SuiteContext& ctx, const std::string& method,
                                   std::size_t ipc, const CondenseConfig& base,
                                   const std::string& cell_dir, CondenseTrace& trace) {
    CondenseConfig cc = base;
    cc.ipc = ipc;
    // The condensation seed is shared across methods so paired comparisons
    // start from the same synthetic initialization.
    cc.seed = cell_seed(ctx.cfg, "condense", ipc);

    Supervision sup;
    if (method == "btm") {
        cc.method = Method::btm;
        sup.surrogates = ctx.bezier;
    } else if (method == "linear") {
        cc.method = Method::linear;
        sup.surrogates = ctx.linear;
    } else if (method == "mtt") {
        cc.method = Method::mtt;
        sup.trajectories = ctx.teachers;
    } else {
        throw InvalidInput("unknown condensation method: " + method);
    }

    SyntheticDataset synth = condense(ctx.ds, sup, cc, ctx.cfg.model_cfg(), trace);
    write_trace_csv(trace, cell_dir + "/trace.csv");
    return synth;
}

CellResult run_main_cell(const SuiteContext& ctx, const std::string& experiment,
                         const std::string& method, std::size_t ipc,
                         const CondenseConfig& base) {
    CellResult cell;
    cell.experiment = experiment;
    cell.method = method;
    cell.ipc = ipc;
    const auto start = std::chrono::steady_clock::now();

    const std::string cell_dir =
        ctx.out_dir + "/cells/" + experiment + "_" + method + "_" + std::to_string(ipc);
    std::filesystem::create_directories(cell_dir);

    SyntheticDataset synth;
    if (method == "random") {
        // Exactly the subset the condensation methods start from, so paired
        // per-seed comparisons isolate the effect of optimization.
        synth = random_subset_baseline(ctx.ds, ipc, cell_seed(ctx.cfg, "condense", ipc));
    } else if (method == "full") {
        const Batch train = ctx.ds.split_batch(Split::train);
        synth.x = train.x;
        synth.y = train.y;
        synth.ipc = ipc;
    } else {
        CondenseTrace trace;
        synth = condense_for_cell(ctx, method, ipc, base, cell_dir, trace);
        cell.diagnostics["best_val_auprc"] = trace.best_val_auprc;
        cell.diagnostics["best_iter"] = static_cast<double>(trace.best_iter);
    }
    save_synthetic(synth, cell_dir + "/synthetic.btmd");

    cell.per_seed = evaluate_synthetic(synth, ctx.ds, ctx.cfg.model_cfg(), ctx.cfg.eval.cfg,
                                       ctx.eval_seeds);
    cell.summary = summarize(cell.per_seed);
    cell.wall_ms = elapsed_ms(start);
    return cell;
}

CellResult run_spectral_cell(const SuiteContext& ctx) {
    CellResult cell;
    cell.experiment = "spectral";
    cell.method = "all";
    const auto start = std::chrono::steady_clock::now();

    // SGD: contiguous (s, s+5) epoch segments, mirroring 5-epoch experts.
    DisplacementMatrix sgd =
        build_displacements(ctx.teachers, contiguous_epoch_segments(ctx.teachers, 5));
    SpectralReport sgd_rep = spectral_report(sgd);
    write_spectral_csv(sgd_rep, ctx.out_dir + "/spectrum_sgd.csv");
    cell.diagnostics["sgd_effective_rank_99"] = static_cast<double>(sgd_rep.effective_rank_99);
    cell.diagnostics["sgd_numerical_rank"] = static_cast<double>(sgd_rep.numerical_rank);

    const std::size_t per = 20;
    Rng seg_rng(hash_combine(ctx.cfg.seed, 0x7370656374726121ULL));
    std::vector<CurveSegment> segs =
        sample_curve_segments(ctx.bezier.size(), per, ctx.cfg.condense.cfg.segment_dt, seg_rng);
    DisplacementMatrix bez = build_displacements(ctx.bezier, segs, SupervisionSource::bezier);
    SpectralReport bez_rep = spectral_report(bez);
    write_spectral_csv(bez_rep, ctx.out_dir + "/spectrum_bezier.csv");
    cell.diagnostics["bezier_effective_rank_99"] =
        static_cast<double>(bez_rep.effective_rank_99);
    cell.diagnostics["bezier_numerical_rank"] = static_cast<double>(bez_rep.numerical_rank);

    DisplacementMatrix lin = build_displacements(ctx.linear, segs, SupervisionSource::linear);
    SpectralReport lin_rep = spectral_report(lin);
    write_spectral_csv(lin_rep, ctx.out_dir + "/spectrum_linear.csv");
    cell.diagnostics["linear_effective_rank_99"] =
        static_cast<double>(lin_rep.effective_rank_99);
    cell.diagnostics["linear_numerical_rank"] = static_cast<double>(lin_rep.numerical_rank);

    cell.wall_ms = elapsed_ms(start);
    return cell;
}

CellResult run_storage_cell(const SuiteContext& ctx) {
    CellResult cell;
    cell.experiment = "storage";
    cell.method = "all";
    const StorageReport rep = storage_report(ctx.cfg.teacher.count, ctx.cfg.teacher.sgd.epochs,
                                             ctx.cfg.model_cfg().param_count());
    cell.diagnostics["sgd_vectors"] = static_cast<double>(rep.sgd_vectors);
    cell.diagnostics["bezier_vectors"] = static_cast<double>(rep.bezier_vectors);
    cell.diagnostics["ratio"] = rep.ratio;
    cell.diagnostics["sgd_bytes"] = static_cast<double>(rep.sgd_bytes);
    cell.diagnostics["bezier_bytes"] = static_cast<double>(rep.bezier_bytes);
    return cell;
}

}  // namespace

std::vector<CellResult> run_experiment_suite(const RunConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const Dataset ds = suite_dataset(cfg);
    const std::vector<Trajectory> teachers = suite_train_teachers(cfg, ds);
    const std::vector<BezierSurrogate> bezier = suite_fit_surrogates(cfg, ds, teachers);
    const std::vector<BezierSurrogate> linear = linear_surrogates_from(teachers);
    const std::vector<std::uint64_t> eval_seeds = evaluation_seeds(cfg);

    SuiteContext ctx{cfg, ds, teachers, bezier, linear, eval_seeds, out_dir};

    std::vector<CellResult> cells;
    auto guarded = [&](const std::string& experiment, const std::string& method, std::size_t ipc,
                       auto&& fn) {
        CellResult cell;
        try {
            cell = fn();
        } catch (const std::exception& e) {
            cell.experiment = experiment;
            cell.method = method;
            cell.ipc = ipc;
            cell.failed = true;
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));
    };

    for (const std::string& experiment : cfg.eval.experiments) {
        if (experiment == "main") {
            for (const std::string& method : cfg.eval.methods) {
                for (std::size_t ipc : cfg.eval.ipcs) {
                    guarded("main", method, ipc, [&] {
                        return run_main_cell(ctx, "main", method, ipc, cfg.condense.cfg);
                    });
                }
            }
        } else if (experiment == "spectral") {
            guarded("spectral", "all", 0, [&] { return run_spectral_cell(ctx); });
        } else if (experiment == "storage") {
            guarded("storage", "all", 0, [&] { return run_storage_cell(ctx); });
        } else if (experiment == "ablation-inner") {
            for (std::size_t n : cfg.eval.inner_steps_ablation) {
                guarded("ablation-inner-" + std::to_string(n), "btm", cfg.eval.ipcs.front(), [&] {
                    CondenseConfig cc = cfg.condense.cfg;
                    cc.inner_steps = n;
                    return run_main_cell(ctx, "ablation-inner-" + std::to_string(n), "btm",
                                         cfg.eval.ipcs.front(), cc);
                });
            }
        } else if (experiment == "ablation-dt") {
            for (double dt : cfg.eval.segment_dt_ablation) {
                const std::string tag = "ablation-dt-" + std::to_string(dt);
                guarded(tag, "btm", cfg.eval.ipcs.front(), [&] {
                    CondenseConfig cc = cfg.condense.cfg;
                    cc.segment_dt = dt;
                    return run_main_cell(ctx, tag, "btm", cfg.eval.ipcs.front(), cc);
                });
            }
        } else if (experiment == "ablation-init") {
            for (InitMode mode : {InitMode::real, InitMode::random_gaussian}) {
                const std::string tag = mode == InitMode::real ? "ablation-init-real"
                                                               : "ablation-init-random";
                guarded(tag, "btm", cfg.eval.ipcs.front(), [&] {
                    CondenseConfig cc = cfg.condense.cfg;
                    cc.init_mode = mode;
                    return run_main_cell(ctx, tag, "btm", cfg.eval.ipcs.front(), cc);
                });
            }
        } else {
            CellResult bad;
            bad.experiment = experiment;
            bad.failed = true;
            bad.error = "unknown experiment";
            cells.push_back(std::move(bad));
        }
    }

    write_results_csv(cells, out_dir + "/results.csv");
    write_summary_json(cells, out_dir + "/summary.json");
    return cells;
}

void write_results_csv(const std::vector<CellResult>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "experiment,method,ipc,seed,auroc,auprc,wall_ms\n";
    out.precision(10);
    for (const CellResult& cell : cells) {
        for (const MetricReport& rep : cell.per_seed) {
            out << cell.experiment << ',' << cell.method << ',' << cell.ipc << ',' << rep.seed
                << ',' << rep.auroc << ',' << rep.auprc << ',' << cell.wall_ms << '\n';
        }
    }
}

void write_summary_json(const std::vector<CellResult>& cells, const std::string& path) {
    nlohmann::json root = nlohmann::json::array();
    for (const CellResult& cell : cells) {
        nlohmann::json j;
        j["experiment"] = cell.experiment;
        j["method"] = cell.method;
        j["ipc"] = cell.ipc;
        j["failed"] = cell.failed;
        if (cell.failed) {
            j["error"] = cell.error;
        } else {
            j["mean_auroc"] = cell.summary.mean_auroc;
            j["std_auroc"] = cell.summary.std_auroc;
            j["mean_auprc"] = cell.summary.mean_auprc;
            j["std_auprc"] = cell.summary.std_auprc;
            j["valid_seeds"] = cell.summary.valid_seeds;
            j["diverged_seeds"] = cell.summary.diverged_seeds;
            j["wall_ms"] = cell.wall_ms;
            for (const auto& [key, value] : cell.diagnostics) j[key] = value;
        }
        root.push_back(std::move(j));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << root.dump(2) << '\n';
}

}  // namespace btm
