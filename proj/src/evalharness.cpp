#include "btm/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btm/rng.hpp"

namespace btm {

Batch Dataset::split_batch(Split s) const {
    const std::size_t n = split_count(s);
    Batch b;
    b.x = Matrix(n, x.cols);
    b.y.resize(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        if (split[i] != static_cast<std::uint8_t>(s)) continue;
        const double* row = x.row_ptr(i);
        std::copy(row, row + x.cols, b.x.row_ptr(k));
        b.y[k] = y[i];
        ++k;
    }
    return b;
}

std::size_t Dataset::split_count(Split s) const {
    std::size_t n = 0;
    for (std::uint8_t tag : split) {
        if (tag == static_cast<std::uint8_t>(s)) ++n;
    }
    return n;
}

namespace {

constexpr std::uint64_t kSampleSalt = 0x64617461676e0001ULL;
constexpr std::uint64_t kSplitSalt = 0x64617461676e0002ULL;

struct ClassComponents {
    // Two mean vectors per class over the informative coordinates (dims 0-2).
    double c0[2][3];
    double c1[2][3];
};

ClassComponents component_means(const DataSpec& spec) {
    // Separation shrinks linearly as overlap grows; unit covariance.
    const double s = 3.0 * (1.0 - spec.overlap);
    ClassComponents m{};
    if (spec.nonlinearity) {
        // XOR arrangement over dims 0-1 plus a weaker linear class shift on
        // dim 2. The interaction carries the top of the achievable range
        // while the shift keeps small subsets off the AUPRC floor.
        m.c0[0][0] = s;  m.c0[0][1] = -s; m.c0[0][2] = 0.0;
        m.c0[1][0] = -s; m.c0[1][1] = s;  m.c0[1][2] = 0.0;
        m.c1[0][0] = s;  m.c1[0][1] = s;  m.c1[0][2] = 0.9 * s;
        m.c1[1][0] = -s; m.c1[1][1] = -s; m.c1[1][2] = 0.9 * s;
    } else {
        // Separation along dim 0; within-class bimodality along dim 1.
        const double w = 1.5;
        m.c0[0][0] = -s; m.c0[0][1] = -w;
        m.c0[1][0] = -s; m.c0[1][1] = w;
        m.c1[0][0] = s;  m.c1[0][1] = -w;
        m.c1[1][0] = s;  m.c1[1][1] = w;
    }
    return m;
}

}  // namespace

Dataset generate_benchmark(const DataSpec& spec) {
    if (spec.n < 100) throw InvalidSpec("generate_benchmark: need n >= 100");
    if (spec.d < 2) throw InvalidSpec("generate_benchmark: need d >= 2");
    if (!(spec.prevalence > 0.0 && spec.prevalence <= 0.5))
        throw InvalidSpec("generate_benchmark: prevalence outside (0, 0.5]");
    const std::size_t n_pos =
        static_cast<std::size_t>(std::llround(spec.prevalence * static_cast<double>(spec.n)));
    if (n_pos < 10) throw InvalidSpec("generate_benchmark: fewer than 10 positives");

    const ClassComponents means = component_means(spec);
    Rng sample_rng(hash_combine(spec.seed, kSampleSalt));

    Dataset ds;
    ds.x = Matrix(spec.n, spec.d);
    ds.y.resize(spec.n);
    ds.split.assign(spec.n, 0);
    ds.prevalence = static_cast<double>(n_pos) / static_cast<double>(spec.n);

    for (std::size_t i = 0; i < spec.n; ++i) {
        const bool positive = i < n_pos;
        ds.y[i] = positive ? 1.0 : 0.0;
        const std::size_t comp = sample_rng.uniform() < 0.5 ? 0 : 1;
        const double* mean = positive ? means.c1[comp] : means.c0[comp];
        double* row = ds.x.row_ptr(i);
        const std::size_t informative = std::min<std::size_t>(3, spec.d);
        for (std::size_t j = 0; j < informative; ++j) row[j] = mean[j] + sample_rng.normal();
        for (std::size_t j = informative; j < spec.d; ++j) row[j] = sample_rng.normal();
    }

    // Stratified 65/15/20 split.
    Rng split_rng(hash_combine(spec.seed, kSplitSalt));
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (ds.y[i] == static_cast<double>(cls)) idx.push_back(i);
        }
        split_rng.shuffle(idx);
        const std::size_t n_train = static_cast<std::size_t>(
            std::llround(0.65 * static_cast<double>(idx.size())));
        const std::size_t n_val = static_cast<std::size_t>(
            std::llround(0.15 * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::uint8_t tag = static_cast<std::uint8_t>(Split::test);
            if (k < n_train) {
                tag = static_cast<std::uint8_t>(Split::train);
            } else if (k < n_train + n_val) {
                tag = static_cast<std::uint8_t>(Split::val);
            }
            ds.split[idx[k]] = tag;
        }
    }

    // Standardize on train statistics.
    for (std::size_t j = 0; j < spec.d; ++j) {
        double mean = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (ds.split[i] != static_cast<std::uint8_t>(Split::train)) continue;
            mean += ds.x(i, j);
            ++count;
        }
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (ds.split[i] != static_cast<std::uint8_t>(Split::train)) continue;
            const double d = ds.x(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(count);
        const double scale = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
        for (std::size_t i = 0; i < spec.n; ++i) ds.x(i, j) = (ds.x(i, j) - mean) * scale;
    }
    return ds;
}

namespace {

void validate_scores_labels(const Vector& scores, const Vector& labels) {
    if (scores.size() != labels.size()) throw DimError("metric: score/label size mismatch");
    if (scores.empty()) throw InvalidInput("metric: empty input");
    if (!all_finite(scores)) throw InvalidInput("metric: non-finite scores");
    for (double y : labels) {
        if (y != 0.0 && y != 1.0) throw InvalidInput("metric: labels must be exactly 0 or 1");
    }
}

}  // namespace

double auroc(const Vector& scores, const Vector& labels) {
    validate_scores_labels(scores, labels);
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (double y : labels) n_pos += y == 1.0 ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("auroc: need both classes");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over tie groups, then the Mann-Whitney statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1.0) rank_sum_pos += midrank;
        }
        i = j + 1;
    }
    const double u = rank_sum_pos -
                     0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auprc(const Vector& scores, const Vector& labels) {
    validate_scores_labels(scores, labels);
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (double y : labels) n_pos += y == 1.0 ? 1 : 0;
    if (n_pos == 0) throw UndefinedMetric("auprc: no positives");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Sweep distinct-score thresholds; each group enters at once.
    double ap = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        std::size_t new_tp = 0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1.0) {
                ++new_tp;
            } else {
                ++fp;
            }
        }
        tp += new_tp;
        if (new_tp > 0) {
            const double precision =
                static_cast<double>(tp) / static_cast<double>(tp + fp);
            const double delta_recall =
                static_cast<double>(new_tp) / static_cast<double>(n_pos);
            ap += precision * delta_recall;
        }
        i = j + 1;
    }
    return ap;
}

Vector train_eval_model(const Batch& train, const MlpConfig& model_cfg, const EvalConfig& cfg,
                        std::uint64_t seed, bool& diverged) {
    diverged = false;
    Rng init_rng(hash_combine(seed, 0x6576616c696e6974ULL));
    Vector theta = init_params(model_cfg, init_rng);
    Vector velocity(theta.size(), 0.0);
    Vector grad;

    const std::size_t n = train.x.rows;
    const std::size_t batch = std::min(cfg.batch_size, n);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(hash_combine(seed, epoch));
        std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t end = std::min(begin + batch, n);
            Batch mb;
            mb.x = Matrix(end - begin, train.x.cols);
            mb.y.resize(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                const double* row = train.x.row_ptr(order[i]);
                std::copy(row, row + train.x.cols, mb.x.row_ptr(i - begin));
                mb.y[i - begin] = train.y[order[i]];
            }
            const double l = loss_and_grad(model_cfg, theta, mb, grad);
            if (!std::isfinite(l)) {
                diverged = true;
                return theta;
            }
            for (std::size_t i = 0; i < theta.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] - cfg.lr * grad[i];
                theta[i] += velocity[i];
            }
        }
    }
    if (!all_finite(theta)) diverged = true;
    return theta;
}

MetricReport score_model(const MlpConfig& model_cfg, const Vector& theta, const Batch& target,
                         std::uint64_t seed) {
    MetricReport rep;
    rep.seed = seed;
    const Vector scores = predict(model_cfg, theta, target.x);
    for (double y : target.y) {
        if (y == 1.0) {
            ++rep.n_pos;
        } else {
            ++rep.n_neg;
        }
    }
    rep.auroc = auroc(scores, target.y);
    rep.auprc = auprc(scores, target.y);
    return rep;
}

std::vector<MetricReport> evaluate_synthetic(const SyntheticDataset& synth, const Dataset& real,
                                             const MlpConfig& model_cfg, const EvalConfig& cfg,
                                             const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw InvalidInput("evaluate_synthetic: no seeds");
    const Batch test = real.split_batch(Split::test);
    const Batch train = synth.as_batch();

    std::vector<MetricReport> reports(seeds.size());
    const std::int64_t n_seeds = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n_seeds; ++i) {
        bool diverged = false;
        Vector theta = train_eval_model(train, model_cfg, cfg, seeds[i], diverged);
        MetricReport rep;
        if (diverged) {
            rep.seed = seeds[i];
            rep.diverged = true;
        } else {
            rep = score_model(model_cfg, theta, test, seeds[i]);
        }
        reports[static_cast<std::size_t>(i)] = rep;
    }
    return reports;
}

MetricSummary summarize(const std::vector<MetricReport>& reports) {
    MetricSummary s;
    for (const MetricReport& r : reports) {
        if (r.diverged) {
            ++s.diverged_seeds;
            continue;
        }
        ++s.valid_seeds;
        s.mean_auroc += r.auroc;
        s.mean_auprc += r.auprc;
    }
    if (s.valid_seeds == 0) return s;
    s.mean_auroc /= static_cast<double>(s.valid_seeds);
    s.mean_auprc /= static_cast<double>(s.valid_seeds);
    double va = 0.0, vp = 0.0;
    for (const MetricReport& r : reports) {
        if (r.diverged) continue;
        va += (r.auroc - s.mean_auroc) * (r.auroc - s.mean_auroc);
        vp += (r.auprc - s.mean_auprc) * (r.auprc - s.mean_auprc);
    }
    s.std_auroc = std::sqrt(va / static_cast<double>(s.valid_seeds));
    s.std_auprc = std::sqrt(vp / static_cast<double>(s.valid_seeds));
    return s;
}

}  // namespace btm
