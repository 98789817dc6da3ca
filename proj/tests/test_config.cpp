#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "btm/config.hpp"

using namespace btm;

namespace {

const char* kFullConfig = R"(
# pipeline configuration
seed = 42

[data]
n = 800
d = 8
prevalence = 0.2
overlap = 0.3
nonlinearity = false

[teacher]
count = 3
hidden = 6
lr = 0.05
momentum = 0.9
epochs = 12
batch_size = 64

[surrogate]
lr = 0.01
max_iters = 40
mc_samples = 5

[condense]
method = btm
ipc = 5
inner_steps = 10
student_lr = 0.01
meta_lr = 50
max_iters = 20
eval_every = 10
init = real

[eval]
seeds = 3
epochs = 20
suite = false
methods = btm, random
ipcs = 5

[verify]
trials = 10
subspace_trials = 50
)";

}  // namespace

TEST_CASE("full config parses with every section") {
    RunConfig cfg = parse_config_text(kFullConfig, ".");
    CHECK(cfg.seed == 42);
    CHECK(cfg.data.n == 800);
    CHECK(cfg.data.prevalence == 0.2);
    CHECK(cfg.teacher.count == 3);
    CHECK(cfg.teacher.sgd.epochs == 12);
    CHECK(cfg.surrogate.opts.max_iters == 40);
    CHECK(cfg.condense.cfg.method == Method::btm);
    CHECK(cfg.condense.cfg.meta_lr == 50.0);
    CHECK(cfg.eval.seeds == 3);
    CHECK(cfg.eval.methods == std::vector<std::string>{"btm", "random"});
    CHECK(cfg.verify.subspace_trials == 50);
    // The master seed propagates into every stage config.
    CHECK(cfg.data.seed == 42);
    CHECK(cfg.teacher.sgd.seed == 42);
    CHECK(cfg.condense.cfg.seed == 42);
}

TEST_CASE("unknown keys, sections and malformed lines are rejected") {
    CHECK_THROWS_AS(parse_config_text("seed=1\n[data]\nbogus_key = 2\n", "."), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed=1\n[nope]\nn = 2\n", "."), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed=1\n[data]\nn 2\n", "."), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed=1\n[data\nn = 2\n", "."), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed=1\n[data]\nn = abc\n", "."), ConfigError);
}

TEST_CASE("seed is mandatory") {
    CHECK_THROWS_AS(parse_config_text("[data]\nn = 200\n", "."), ConfigError);
}

TEST_CASE("method and init enums validate") {
    CHECK_THROWS_AS(parse_config_text("seed=1\n[condense]\nmethod = magic\n", "."), ConfigError);
    RunConfig cfg = parse_config_text("seed=1\n[condense]\ninit = random-gaussian\n", ".");
    CHECK(cfg.condense.cfg.init_mode == InitMode::random_gaussian);
}

TEST_CASE("benchmark dataset round-trips through its file format") {
    DataSpec spec;
    spec.n = 300;
    spec.d = 4;
    spec.prevalence = 0.3;
    spec.seed = 9;
    Dataset ds = generate_benchmark(spec);
    const std::string path =
        (std::filesystem::temp_directory_path() / "btm_benchmark_roundtrip.btmg").string();
    save_benchmark(ds, path);
    Dataset loaded = load_benchmark(path);
    CHECK(loaded.x.data == ds.x.data);
    CHECK(loaded.y == ds.y);
    CHECK(loaded.split == ds.split);
    CHECK(loaded.prevalence == ds.prevalence);
    std::remove(path.c_str());
}

TEST_CASE("synthetic dataset round-trips through its file format") {
    SyntheticDataset s;
    s.x = Matrix(4, 3);
    for (std::size_t i = 0; i < s.x.data.size(); ++i) s.x.data[i] = 0.25 * (double)i - 1.0;
    s.y = {1.0, 1.0, 0.0, 0.0};
    s.ipc = 2;
    const std::string path =
        (std::filesystem::temp_directory_path() / "btm_synth_roundtrip.btmd").string();
    save_synthetic(s, path);
    // magic + version + n + d + 12 doubles + 4 label bytes
    CHECK(std::filesystem::file_size(path) == 4 + 4 + 8 + 8 + 12 * 8 + 4);
    SyntheticDataset loaded = load_synthetic(path);
    CHECK(loaded.x.data == s.x.data);
    CHECK(loaded.y == s.y);
    std::remove(path.c_str());
}
