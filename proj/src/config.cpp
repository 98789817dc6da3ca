#include "btm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "btm/io.hpp"

namespace btm {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_uint(const std::string& v, const std::string& key) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Method parse_method(const std::string& v) {
    if (v == "btm") return Method::btm;
    if (v == "mtt") return Method::mtt;
    if (v == "linear") return Method::linear;
    throw ConfigError("unknown method '" + v + "' (expected btm, mtt or linear)");
}

InitMode parse_init(const std::string& v) {
    if (v == "real") return InitMode::real;
    if (v == "random-gaussian" || v == "random") return InitMode::random_gaussian;
    throw ConfigError("unknown init mode '" + v + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& config_dir) {
    RunConfig cfg;
    cfg.config_dir = config_dir;
    bool seed_seen = false;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    std::map<std::string, std::map<std::string, Setter>> schema;

    schema[""]["seed"] = [&](const std::string& k, const std::string& v) {
        cfg.seed = parse_uint(v, k);
        seed_seen = true;
    };

    auto& data = schema["data"];
    data["n"] = [&](const std::string& k, const std::string& v) { cfg.data.n = parse_uint(v, k); };
    data["d"] = [&](const std::string& k, const std::string& v) { cfg.data.d = parse_uint(v, k); };
    data["prevalence"] = [&](const std::string& k, const std::string& v) {
        cfg.data.prevalence = parse_double(v, k);
    };
    data["overlap"] = [&](const std::string& k, const std::string& v) {
        cfg.data.overlap = parse_double(v, k);
    };
    data["nonlinearity"] = [&](const std::string& k, const std::string& v) {
        cfg.data.nonlinearity = parse_bool(v, k);
    };
    data["file"] = [&](const std::string&, const std::string& v) {
        cfg.data_file = config_dir.empty() ? v : config_dir + "/" + v;
    };

    auto& teach = schema["teacher"];
    teach["count"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.count = parse_uint(v, k);
    };
    teach["hidden"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.hidden = parse_uint(v, k);
    };
    teach["lr"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.sgd.lr = parse_double(v, k);
    };
    teach["momentum"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.sgd.momentum = parse_double(v, k);
    };
    teach["epochs"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.sgd.epochs = parse_uint(v, k);
    };
    teach["batch_size"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.sgd.batch_size = parse_uint(v, k);
    };
    teach["dropout"] = [&](const std::string& k, const std::string& v) {
        cfg.teacher.sgd.dropout_rate = parse_double(v, k);
    };

    auto& sur = schema["surrogate"];
    sur["lr"] = [&](const std::string& k, const std::string& v) {
        cfg.surrogate.opts.lr = parse_double(v, k);
    };
    sur["grad_tol"] = [&](const std::string& k, const std::string& v) {
        cfg.surrogate.opts.grad_tol = parse_double(v, k);
    };
    sur["max_iters"] = [&](const std::string& k, const std::string& v) {
        cfg.surrogate.opts.max_iters = parse_uint(v, k);
    };
    sur["mc_samples"] = [&](const std::string& k, const std::string& v) {
        cfg.surrogate.opts.mc_samples = parse_uint(v, k);
    };
    sur["batch_size"] = [&](const std::string& k, const std::string& v) {
        cfg.surrogate.opts.batch_size = parse_uint(v, k);
    };
    sur["grid_points"] = [&](const std::string& k, const std::string& v) {
        cfg.surrogate.opts.grid_points = parse_uint(v, k);
    };

    auto& con = schema["condense"];
    con["method"] = [&](const std::string&, const std::string& v) {
        cfg.condense.cfg.method = parse_method(v);
    };
    con["ipc"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.ipc = parse_uint(v, k);
    };
    con["inner_steps"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.inner_steps = parse_uint(v, k);
    };
    con["student_lr"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.student_lr = parse_double(v, k);
    };
    con["meta_lr"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.meta_lr = parse_double(v, k);
    };
    con["meta_momentum"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.meta_momentum = parse_double(v, k);
    };
    con["batch_size"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.batch_size = parse_uint(v, k);
    };
    con["segment_dt"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.segment_dt = parse_double(v, k);
    };
    con["free_pair"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.free_pair = parse_bool(v, k);
    };
    con["max_iters"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.max_iters = parse_uint(v, k);
    };
    con["eval_every"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.eval_every = parse_uint(v, k);
    };
    con["init"] = [&](const std::string&, const std::string& v) {
        cfg.condense.cfg.init_mode = parse_init(v);
    };
    con["mtt_segment_epochs"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.mtt_segment_epochs = parse_uint(v, k);
    };
    con["mtt_inner_steps"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.mtt_inner_steps = parse_uint(v, k);
    };
    con["eval_epochs"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.eval_cfg.epochs = parse_uint(v, k);
    };
    con["eval_models"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.eval_models = parse_uint(v, k);
    };
    con["eval_lr"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.eval_cfg.lr = parse_double(v, k);
    };
    con["eval_momentum"] = [&](const std::string& k, const std::string& v) {
        cfg.condense.cfg.eval_cfg.momentum = parse_double(v, k);
    };

    auto& ev = schema["eval"];
    ev["seeds"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.seeds = parse_uint(v, k);
    };
    ev["lr"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.cfg.lr = parse_double(v, k);
    };
    ev["momentum"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.cfg.momentum = parse_double(v, k);
    };
    ev["epochs"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.cfg.epochs = parse_uint(v, k);
    };
    ev["batch_size"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.cfg.batch_size = parse_uint(v, k);
    };
    ev["suite"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.suite = parse_bool(v, k);
    };
    ev["methods"] = [&](const std::string&, const std::string& v) {
        cfg.eval.methods = split_list(v);
    };
    ev["ipcs"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.ipcs.clear();
        for (const std::string& item : split_list(v)) cfg.eval.ipcs.push_back(parse_uint(item, k));
    };
    ev["experiments"] = [&](const std::string&, const std::string& v) {
        cfg.eval.experiments = split_list(v);
    };
    ev["inner_steps_ablation"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.inner_steps_ablation.clear();
        for (const std::string& item : split_list(v))
            cfg.eval.inner_steps_ablation.push_back(parse_uint(item, k));
    };
    ev["segment_dt_ablation"] = [&](const std::string& k, const std::string& v) {
        cfg.eval.segment_dt_ablation.clear();
        for (const std::string& item : split_list(v))
            cfg.eval.segment_dt_ablation.push_back(parse_double(item, k));
    };

    auto& ver = schema["verify"];
    ver["trials"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.trials = parse_uint(v, k);
    };
    ver["subspace_trials"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.subspace_trials = parse_uint(v, k);
    };
    ver["grid_points"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.grid_points = parse_uint(v, k);
    };
    ver["surrogate_dim"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.surrogate_dim = parse_uint(v, k);
    };
    ver["surrogate_count"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.surrogate_count = parse_uint(v, k);
    };
    ver["segments_per_surrogate"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.segments_per_surrogate = parse_uint(v, k);
    };
    ver["fidelity_surrogates"] = [&](const std::string& k, const std::string& v) {
        cfg.verify.fidelity_surrogates = parse_uint(v, k);
    };

    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (schema.find(section) == schema.end())
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto& keys = schema[section];
        auto it = keys.find(key);
        if (it == keys.end())
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                              "' in section [" + section + "]");
        it->second(key, value);
    }

    if (!seed_seen) throw ConfigError("config: mandatory top-level key 'seed' is missing");
    cfg.data.seed = cfg.seed;
    cfg.teacher.sgd.seed = cfg.seed;
    cfg.surrogate.opts.seed = cfg.seed;
    cfg.condense.cfg.seed = cfg.seed;
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string dir = ".";
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash);
    return parse_config_text(buf.str(), dir);
}

void save_benchmark(const Dataset& ds, const std::string& path) {
    io::BinaryWriter w(path);
    w.write_bytes("BTMG", 4);
    w.write_u32(1);
    w.write_u64(ds.x.rows);
    w.write_u64(ds.x.cols);
    w.write_f64(ds.prevalence);
    w.write_f64_array(ds.x.data.data(), ds.x.data.size());
    for (double y : ds.y) {
        const unsigned char label = y == 1.0 ? 1 : 0;
        w.write_bytes(&label, 1);
    }
    w.write_bytes(ds.split.data(), ds.split.size());
}

Dataset load_benchmark(const std::string& path) {
    io::BinaryReader r(path);
    char magic[4];
    r.read_bytes(magic, 4, "magic");
    if (std::string(magic, 4) != "BTMG") throw FormatError("bad magic in " + path, 0);
    if (r.read_u32("version") != 1) throw FormatError("unsupported benchmark version", 4);
    const std::uint64_t n = r.read_u64("row count");
    const std::uint64_t d = r.read_u64("feature count");
    Dataset ds;
    ds.prevalence = r.read_f64("prevalence");
    ds.x = Matrix(n, d);
    r.read_f64_array(ds.x.data.data(), ds.x.data.size(), "features");
    ds.y.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        unsigned char label;
        r.read_bytes(&label, 1, "label");
        ds.y[i] = static_cast<double>(label);
    }
    ds.split.resize(n);
    r.read_bytes(ds.split.data(), n, "split tags");
    if (!r.at_eof()) throw FormatError("trailing bytes after benchmark", r.offset());
    return ds;
}

}  // namespace btm
